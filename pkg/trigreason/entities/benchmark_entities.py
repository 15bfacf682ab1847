from dataclasses import dataclass
from enum import Enum
from typing import Optional


class AnswerKind(Enum):
    INTEGER_BOXED = 'IntegerBoxed'
    MULTIPLE_CHOICE = 'MultipleChoice'


@dataclass(frozen=True)
class BenchmarkItem:
    id: str
    question: str
    answer: str
    kind: AnswerKind = AnswerKind.INTEGER_BOXED


@dataclass(frozen=True)
class ActivationRow:
    """
    Trigger activation percentages over all reasoning steps of a group of sessions
    """
    label: str
    cognitive_offload_pct: float
    strategic_priming_pct: float
    intervention_request_pct: float
    total_pct: float
    steps: int = 0
    accuracy: Optional[float] = None
