from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from trigreason.entities.config_entities import SessionConfig
from trigreason.entities.step_entities import CallRecord, ReasoningStep, TriggerEvent


class FinishState(Enum):
    CONTINUE = 'Continue'
    FINISHED_BY_MARKER = 'FinishedByMarker'
    FINISHED_BY_EOS = 'FinishedByEos'
    FINISHED_BY_BUDGET = 'FinishedByBudget'


@dataclass(frozen=True)
class InterventionState:
    recent_h: Tuple[bool, ...] = ()
    recent_steps: Tuple[int, ...] = ()
    rectify_steps_remaining: int = 0


@dataclass
class Session:
    """
    Per-session state, owned by one orchestrator run
    """
    question: str
    config: SessionConfig
    steps: List[ReasoningStep] = field(default_factory=list)
    events: List[TriggerEvent] = field(default_factory=list)
    calls: List[CallRecord] = field(default_factory=list)
    judge_scores: List[Optional[int]] = field(default_factory=list)
    intervention: InterventionState = field(default_factory=InterventionState)
    thinking_tokens_used: int = 0
    finished: bool = False
    finish_state: Optional[FinishState] = None
    answer_text: Optional[str] = None

    @property
    def next_index(self):
        return len(self.steps) + 1


@dataclass(frozen=True)
class SessionReport:
    answer: Optional[str]
    correct: Optional[bool]
    srm_tokens: int
    lrm_tokens: int
    wasted_draft_tokens: int
    smt_percentage: float
    trigger_counts: Dict[str, int]
    step_counts: Dict[str, int]
    est_latency: float
    est_cost: float
    lrm_calls: int = 0
    config_label: str = ''
