from dataclasses import dataclass, field
from typing import Optional, Tuple

from trigreason.entities.token_entities import FinishReason, TokenSample


@dataclass(frozen=True)
class StepRequest:
    """
    :param context: question plus accepted step texts joined by the step delimiter
    :param prompt_tokens_hint: cumulative prefix length, reported as prompt tokens by offline backends
    """
    context: str
    stop: Tuple[str, ...]
    max_tokens: int
    temperature: float = 0.6
    top_p: float = 0.95
    want_logprobs: bool = True
    prompt_tokens_hint: int = 0


@dataclass(frozen=True)
class StepResponse:
    tokens: Tuple[TokenSample, ...]
    finish_reason: FinishReason
    wall_time: float = 0.0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    stop_sequence: Optional[str] = field(default=None)

    @property
    def text(self):
        return ''.join(token.text for token in self.tokens)
