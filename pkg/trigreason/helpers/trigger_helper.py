#!/usr/bin/python
# -*- coding: utf-8 -*-
"""
Trigger mathematics. Pure functions, InterventionState goes in and comes out by value.
"""
import math

from trigreason.entities.session_entities import InterventionState
from trigreason.exceptions import DomainError, EmptyStep


def token_perplexity(logprob):
    """
    Per-token perplexity exp(-logprob)
    :type logprob: float
    :rtype: float
    """
    if logprob is None or not math.isfinite(logprob) or logprob > 0:
        raise DomainError('token_perplexity', 'logprob must be finite and <= 0, got {}'.format(logprob))
    return math.exp(-logprob)


def low_ppl_ratio(step_tokens, tau):
    """
    Fraction of tokens whose perplexity is strictly below tau, special tokens are removed by the caller
    :type step_tokens: list[trigreason.entities.token_entities.TokenSample]
    :type tau: float
    :rtype: float
    """
    if not step_tokens:
        raise EmptyStep('low_ppl_ratio', 'step has no tokens')
    below = sum(1 for token in step_tokens if token_perplexity(token.logprob) < tau)
    return below / len(step_tokens)


def cognitive_trigger(r_s, rho):
    if not 0.0 <= r_s <= 1.0:
        raise DomainError('cognitive_trigger', 'r_s must be in [0, 1], got {}'.format(r_s))
    if not 0.0 < rho <= 1.0:
        raise DomainError('cognitive_trigger', 'rho must be in (0, 1], got {}'.format(rho))
    return r_s > rho


def detect_hesitation(text, lexicon):
    """
    :type text: str
    :type lexicon: trigreason.helpers.lexicon_helper.HesitationLexicon
    :rtype: bool
    """
    return lexicon.search(text) is not None


def record_hesitation(state, new_h, k, step_index=0):
    """
    Push a flag without evaluating the trigger
    :type state: InterventionState
    :rtype: InterventionState
    """
    if k < 1:
        raise DomainError('record_hesitation', 'k must be >= 1, got {}'.format(k))
    return InterventionState(recent_h=(state.recent_h + (bool(new_h),))[-k:],
                             recent_steps=(state.recent_steps + (step_index,))[-k:],
                             rectify_steps_remaining=state.rectify_steps_remaining)


def intervention_trigger(state, new_h, k, m, step_index=0):
    """
    Push new_h and fire when the last k flags are all true; firing clears the ring and arms m rectification steps
    :type state: InterventionState
    :type new_h: bool
    :rtype: tuple[InterventionState, bool]
    """
    pushed = record_hesitation(state, new_h, k, step_index)
    fired = len(pushed.recent_h) == k and all(pushed.recent_h)
    if fired:
        return InterventionState(rectify_steps_remaining=m), True
    return pushed, False


def is_priming(step_index, n):
    if step_index < 1:
        raise DomainError('is_priming', 'step_index must be >= 1, got {}'.format(step_index))
    return step_index <= n
