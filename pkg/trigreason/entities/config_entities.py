from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from trigreason.entities.token_entities import Origin


class Strategy(Enum):
    TRIGREASON = 'trigreason'
    SPECREASON = 'specreason'
    SRM_ONLY = 'srm-only'
    LRM_ONLY = 'lrm-only'


@dataclass(frozen=True)
class SessionConfig:
    """
    Protocol knobs, None marks an absent field that validate_config fills with its default
    """
    n: Optional[int] = None
    m: Optional[int] = None
    k: Optional[int] = None
    tau: Optional[float] = None
    rho: Optional[float] = None
    budget: Optional[int] = None
    temperature: Optional[float] = None
    top_p: Optional[float] = None
    step_delimiter: Optional[str] = None
    max_step_tokens: Optional[int] = None
    lexicon: Optional[Tuple[str, ...]] = None
    strategy: Optional[Strategy] = None
    judge_threshold: Optional[int] = None
    answer_model: Optional[Origin] = None
    finish_markers: Optional[Tuple[str, ...]] = None
    skip_draft_during_rectify: Optional[bool] = None
    judge_template: Optional[str] = None
    answer_suffix: Optional[str] = None
    judge_max_tokens: Optional[int] = None
    answer_max_tokens: Optional[int] = None

    @property
    def label(self):
        """
        Trigger statistics label, rho-n-m
        """
        return '{0:g}-{1}-{2}'.format(self.rho, self.n, self.m)


@dataclass(frozen=True)
class CostModel:
    """
    Prices are currency per token, latencies are seconds
    """
    srm_input_price: float = 0.0
    srm_output_price: float = 0.0
    lrm_input_price: float = 0.0
    lrm_output_price: float = 0.0
    rtt_latency: float = 0.0
    srm_token_latency: float = 0.0
    lrm_token_latency: float = 0.0
    count_judge_calls: bool = True
