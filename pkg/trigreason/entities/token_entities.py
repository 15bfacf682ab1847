from dataclasses import dataclass
from enum import Enum
from typing import Optional


class Origin(Enum):
    SRM = 'SRM'
    LRM = 'LRM'


class FinishReason(Enum):
    STOP = 'StopSequence'
    LENGTH = 'Length'
    EOS = 'EndOfSequence'


@dataclass(frozen=True)
class TokenSample:
    """
    One generated token, logprob is the natural log probability (absent when the endpoint returned none)
    """
    text: str
    logprob: Optional[float] = None
    special: bool = False
