#!/usr/bin/python
# -*- coding: utf-8 -*-
import re
import threading
from collections import OrderedDict, defaultdict

from trigreason.entities.benchmark_entities import ActivationRow, AnswerKind
from trigreason.entities.session_entities import SessionReport
from trigreason.entities.step_entities import CallPurpose, TriggerKind
from trigreason.entities.token_entities import Origin
from trigreason.exceptions import EmptyInput, EmptySession

BOXED_PATTERN = re.compile(r'\\boxed\s*\{((?:[^{}]|\{[^{}]*\})*)\}')
CHOICE_PATTERN = re.compile(r'(?<![A-Za-z])([A-D])(?![A-Za-z])')
INTEGER_PATTERN = re.compile(r'^[+]?\d+$')


def token_totals(session):
    """
    SRM and LRM tokens over the trajectory plus the tokens of discarded drafts
    :type session: trigreason.entities.session_entities.Session
    :rtype: tuple[int, int, int]
    """
    srm_tokens = lrm_tokens = wasted = 0
    for step in session.steps:
        if step.origin == Origin.SRM:
            srm_tokens += step.token_count
        else:
            lrm_tokens += step.token_count
        if step.draft is not None:
            wasted += step.draft.token_count
    return srm_tokens, lrm_tokens, wasted


def smt_percentage(session):
    """
    Share of the reasoning tokens the SRM generated, discarded drafts excluded
    :rtype: float
    :raises EmptySession: no tokens in the trajectory
    """
    srm_tokens, lrm_tokens, _ = token_totals(session)
    if not session.steps or srm_tokens + lrm_tokens == 0:
        raise EmptySession('Metrics', 'Session has no reasoning tokens')
    return srm_tokens / float(srm_tokens + lrm_tokens)


def trigger_counts(session):
    counts = OrderedDict((kind.value, 0) for kind in TriggerKind)
    for event in session.events:
        counts[event.kind.value] += 1
    return counts


def trigger_activation_report(sessions, label=None, accuracy=None):
    """
    Percentage of all reasoning steps at which each trigger fired
    :type sessions: list[trigreason.entities.session_entities.Session]
    :param label: row label, the first session's rho-n-m when None
    :param accuracy: optional accuracy column
    :rtype: ActivationRow
    """
    if label is None:
        label = sessions[0].config.label if sessions else ''
    steps = sum(len(session.steps) for session in sessions)
    counts = defaultdict(int)
    for session in sessions:
        for event in session.events:
            counts[event.kind] += 1

    def percentage(kind):
        return 100.0 * counts[kind] / steps if steps else 0.0

    cognitive = percentage(TriggerKind.COGNITIVE_OFFLOAD)
    priming = percentage(TriggerKind.STRATEGIC_PRIMING)
    intervention = percentage(TriggerKind.INTERVENTION_REQUEST)
    return ActivationRow(label=label, cognitive_offload_pct=cognitive, strategic_priming_pct=priming,
                         intervention_request_pct=intervention, total_pct=cognitive + priming + intervention,
                         steps=steps, accuracy=accuracy)


def _priced_calls(calls, model):
    for call in calls:
        if call.purpose == CallPurpose.JUDGE and not model.count_judge_calls:
            continue
        yield call


def _completion_tokens(response):
    return response.completion_tokens or len(response.tokens)


def estimate_cost(session, model):
    """
    Sum over backend calls of prompt and completion tokens at the origin's prices.
    The prompt of every call is the whole prefix resent, which is what makes per-step polling expensive.
    :type model: trigreason.entities.config_entities.CostModel
    :rtype: float
    """
    cost = 0.0
    for call in _priced_calls(session.calls, model):
        response = call.response
        if call.origin == Origin.LRM:
            cost += response.prompt_tokens * model.lrm_input_price
            cost += _completion_tokens(response) * model.lrm_output_price
        else:
            cost += response.prompt_tokens * model.srm_input_price
            cost += _completion_tokens(response) * model.srm_output_price
    return cost


def estimate_latency(session, model):
    """
    LRM call: rtt + completion tokens x lrm_token_latency, SRM call: completion tokens x srm_token_latency.
    Discarded drafts ran and are counted, drafts skipped during rectification never produced a call.
    :rtype: float
    """
    latency = 0.0
    for call in _priced_calls(session.calls, model):
        if call.origin == Origin.LRM:
            latency += model.rtt_latency + _completion_tokens(call.response) * model.lrm_token_latency
        else:
            latency += _completion_tokens(call.response) * model.srm_token_latency
    return latency


def lrm_calls(session):
    return sum(1 for call in session.calls if call.origin == Origin.LRM)


def _boxed_integer(answer_text):
    for matched in reversed(BOXED_PATTERN.findall(answer_text)):
        value = matched.strip().strip('$').replace(',', '').strip()
        if INTEGER_PATTERN.match(value) and 0 <= int(value) <= 999:
            return str(int(value))
    return None


def extract_answer(answer_text, kind):
    """
    :param kind: IntegerBoxed takes the last boxed integer in [0, 999], MultipleChoice the last standalone A-D
    :type kind: AnswerKind
    :rtype: str | None
    """
    if not answer_text:
        return None
    if kind == AnswerKind.INTEGER_BOXED:
        return _boxed_integer(answer_text)
    choices = CHOICE_PATTERN.findall(answer_text)
    return choices[-1] if choices else None


def grade(extracted, expected, kind):
    """
    Exact match of an extracted answer against the reference
    :rtype: bool
    """
    if extracted is None or expected is None:
        return False
    expected = str(expected).strip()
    if kind == AnswerKind.INTEGER_BOXED:
        return INTEGER_PATTERN.match(expected) is not None and int(extracted) == int(expected)
    return extracted.upper() == expected.upper()


def pass_at_1(per_question_runs):
    """
    Mean over questions of the mean correctness of that question's runs
    :type per_question_runs: dict[str, list[bool]]
    :rtype: float
    :raises EmptyInput: no questions, or a question without runs
    """
    if not per_question_runs:
        raise EmptyInput('Metrics', 'No questions to score')
    means = []
    for question_id in sorted(per_question_runs):
        runs = per_question_runs[question_id]
        if not runs:
            raise EmptyInput('Metrics', 'Question {} has no runs'.format(question_id))
        means.append(sum(1 for correct in runs if correct) / float(len(runs)))
    return sum(means) / len(means)


def build_report(session, cost_model, expected=None, kind=AnswerKind.INTEGER_BOXED):
    """
    :type session: trigreason.entities.session_entities.Session
    :type cost_model: trigreason.entities.config_entities.CostModel
    :param expected: reference answer, correct stays None without one
    :rtype: SessionReport
    """
    srm_tokens, lrm_tokens, wasted = token_totals(session)
    answer = extract_answer(session.answer_text, kind)
    total = srm_tokens + lrm_tokens
    step_counts = OrderedDict((origin.value, 0) for origin in Origin)
    for step in session.steps:
        step_counts[step.origin.value] += 1
    return SessionReport(answer=answer,
                         correct=None if expected is None else grade(answer, expected, kind),
                         srm_tokens=srm_tokens, lrm_tokens=lrm_tokens, wasted_draft_tokens=wasted,
                         smt_percentage=srm_tokens / float(total) if total else 0.0,
                         trigger_counts=trigger_counts(session), step_counts=step_counts,
                         est_latency=estimate_latency(session, cost_model),
                         est_cost=estimate_cost(session, cost_model),
                         lrm_calls=lrm_calls(session), config_label=session.config.label)


class MetricsAccumulator(object):
    """
    Collects sessions and grades from concurrent bench workers
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._sessions = []
        self._runs = defaultdict(list)
        self._failures = defaultdict(list)

    def add(self, question_id, session, correct):
        with self._lock:
            self._sessions.append(session)
            self._runs[question_id].append(bool(correct))

    def add_failure(self, question_id, error):
        with self._lock:
            self._failures[question_id].append(error)

    @property
    def sessions(self):
        with self._lock:
            return list(self._sessions)

    @property
    def per_question_runs(self):
        with self._lock:
            return dict((question_id, list(runs)) for question_id, runs in self._runs.items())

    @property
    def failures(self):
        with self._lock:
            return dict((question_id, list(errors)) for question_id, errors in self._failures.items())

    def pass_at_1(self):
        return pass_at_1(self.per_question_runs)
