from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

from trigreason.entities.backend_entities import StepResponse
from trigreason.entities.token_entities import FinishReason, Origin, TokenSample


class TriggerKind(Enum):
    STRATEGIC_PRIMING = 'StrategicPriming'
    COGNITIVE_OFFLOAD = 'CognitiveOffload'
    INTERVENTION_REQUEST = 'InterventionRequest'


class StepCause(Enum):
    """
    Why a step was generated by the model that produced it
    """
    PRIMING = 'Priming'
    COGNITIVE_OFFLOAD = 'CognitiveOffload'
    RECTIFICATION = 'Rectification'
    JUDGE_REJECTION = 'JudgeRejection'
    BASELINE = 'Baseline'


class CallPurpose(Enum):
    STEP = 'step'
    DRAFT = 'draft'
    JUDGE = 'judge'
    ANSWER = 'answer'


@dataclass(frozen=True)
class TriggerEvent:
    """
    evidence: r_s for CognitiveOffload, the k step indices for InterventionRequest, None for StrategicPriming
    """
    kind: TriggerKind
    step_index: int
    evidence: Optional[Union[float, Tuple[int, ...]]] = None


@dataclass(frozen=True)
class ReasoningStep:
    index: int
    origin: Origin
    tokens: Tuple[TokenSample, ...]
    low_ppl_ratio: Optional[float] = None
    hesitation: bool = False
    discarded_draft: bool = False
    draft: Optional['ReasoningStep'] = None
    cause: Optional[StepCause] = None
    finish_reason: FinishReason = FinishReason.STOP
    stop_sequence: Optional[str] = None
    completion_tokens: Optional[int] = None

    @property
    def text(self):
        return ''.join(token.text for token in self.tokens)

    @property
    def token_count(self):
        """
        Tokens charged to the budget, the usage count wins when the endpoint returned no per-token data
        """
        if self.completion_tokens is not None:
            return self.completion_tokens
        return len(self.tokens)


@dataclass(frozen=True)
class CallRecord:
    """
    One backend round trip made on behalf of a session
    """
    origin: Origin
    purpose: CallPurpose
    step_index: int
    response: StepResponse
