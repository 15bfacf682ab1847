#!/usr/bin/python
# -*- coding: utf-8 -*-
import io
import json
import os
from dataclasses import dataclass, field, replace
from typing import List, Optional

from trigreason.backends.scripted_backend import parse_finish, record_to_response, response_to_record
from trigreason.command_actions.step_actions import parse_score
from trigreason.entities.config_entities import SessionConfig
from trigreason.entities.session_entities import FinishState, Session
from trigreason.entities.step_entities import CallPurpose, CallRecord, ReasoningStep, StepCause, TriggerEvent, \
    TriggerKind
from trigreason.entities.token_entities import Origin
from trigreason.exceptions import ConfigException, SchemaError, TrigReasonException
from trigreason.helpers.config_helper import config_from_dict, config_to_dict, validate_config
from trigreason.helpers.trigger_helper import low_ppl_ratio as low_ppl_ratio_of

TRACE_VERSION = 1


@dataclass
class Trace:
    """
    Parsed trace file, calls are in recording order with the answer phase last
    """
    path: str
    records: List[dict] = field(default_factory=list)
    lines: List[int] = field(default_factory=list)
    calls: List[CallRecord] = field(default_factory=list)
    summary: Optional[dict] = None
    config: Optional[SessionConfig] = None

    @property
    def replayable(self):
        return self.summary is not None and bool(self.summary.get('finish_state')) and bool(self.calls)


def _call_to_record(call):
    return {'origin': call.origin.value, 'purpose': call.purpose.value, 'step_index': call.step_index,
            'response': response_to_record(call.response)}


def _step_fields(step):
    record = _token_fields(step)
    record['idx'] = step.index
    record['origin'] = step.origin.value
    record['hesitation'] = step.hesitation
    record['discarded_draft'] = step.discarded_draft
    if step.low_ppl_ratio is not None:
        record['low_ppl_ratio'] = step.low_ppl_ratio
    if step.cause is not None:
        record['cause'] = step.cause.value
    if step.stop_sequence is not None:
        record['stop_sequence'] = step.stop_sequence
    if step.completion_tokens is not None:
        record['completion_tokens'] = step.completion_tokens
    return record


def _token_fields(step):
    record = {
        'tokens': [token.text for token in step.tokens],
        'logprobs': [token.logprob for token in step.tokens],
        'finish': step.finish_reason.value,
    }
    if any(token.special for token in step.tokens):
        record['special'] = [token.special for token in step.tokens]
    return record


def _event_to_record(event):
    evidence = event.evidence
    if isinstance(evidence, tuple):
        evidence = list(evidence)
    return {'kind': event.kind.value, 'evidence': evidence}


def session_to_records(session):
    """
    One record per trajectory step followed by the summary record
    :type session: Session
    :rtype: list[dict]
    """
    records = []
    for step in session.steps:
        record = _step_fields(step)
        if step.draft is not None:
            record['draft'] = _step_fields(step.draft)
        record['events'] = [_event_to_record(event) for event in session.events if event.step_index == step.index]
        record['calls'] = [_call_to_record(call) for call in session.calls
                           if call.step_index == step.index and call.purpose != CallPurpose.ANSWER]
        records.append(record)
    summary = {
        'version': TRACE_VERSION,
        'question': session.question,
        'config': config_to_dict(session.config),
        'answer_text': session.answer_text,
        'finish_state': session.finish_state.value if session.finish_state else None,
        'thinking_tokens_used': session.thinking_tokens_used,
        'calls': [_call_to_record(call) for call in session.calls if call.purpose == CallPurpose.ANSWER],
    }
    records.append({'summary': summary})
    return records


def dump_records(records):
    return ''.join(json.dumps(record, sort_keys=True, ensure_ascii=False) + '\n' for record in records)


def write_trace(session, trace_path):
    """
    JSON Lines trace, byte identical for identical sessions
    """
    directory = os.path.dirname(os.path.abspath(trace_path))
    if not os.path.isdir(directory):
        os.makedirs(directory)
    with io.open(trace_path, 'w', encoding='utf-8') as trace_file:
        trace_file.write(dump_records(session_to_records(session)))


def _enum_value(enum_class, value, line, name):
    try:
        return enum_class(value)
    except ValueError:
        raise SchemaError(line, 'unknown {0} {1!r}'.format(name, value))


def _parse_call(record, line):
    if not isinstance(record, dict) or 'response' not in record:
        raise SchemaError(line, 'call record needs origin, purpose, step_index and response')
    step_index = record.get('step_index')
    if not isinstance(step_index, int):
        raise SchemaError(line, 'call step_index must be an integer')
    return CallRecord(origin=_enum_value(Origin, record.get('origin'), line, 'origin'),
                      purpose=_enum_value(CallPurpose, record.get('purpose'), line, 'purpose'),
                      step_index=step_index, response=record_to_response(record['response'], line))


def _parse_step(record, line, tau=None, index=None):
    """
    :param tau: recomputes an absent SRM low_ppl_ratio when given
    """
    response = record_to_response(record, line)
    origin = _enum_value(Origin, record.get('origin'), line, 'origin')
    low_ppl_ratio = record.get('low_ppl_ratio')
    if low_ppl_ratio is not None and origin == Origin.LRM:
        raise SchemaError(line, 'low_ppl_ratio on an LRM step')
    if low_ppl_ratio is None and origin == Origin.SRM and tau is not None:
        content = [token for token in response.tokens if not token.special]
        if any(token.logprob is None for token in content):
            raise SchemaError(line, 'SRM step without logprobs')
        low_ppl_ratio = low_ppl_ratio_of(content, tau) if content else 0.0
    cause = record.get('cause')
    completion_tokens = record.get('completion_tokens')
    return ReasoningStep(index=record.get('idx', index), origin=origin, tokens=response.tokens,
                         low_ppl_ratio=None if low_ppl_ratio is None else float(low_ppl_ratio),
                         hesitation=bool(record.get('hesitation', False)),
                         discarded_draft=bool(record.get('discarded_draft', False)),
                         cause=None if cause is None else _enum_value(StepCause, cause, line, 'cause'),
                         finish_reason=parse_finish(record.get('finish', 'StopSequence'), line),
                         stop_sequence=record.get('stop_sequence'),
                         completion_tokens=None if completion_tokens is None else int(completion_tokens))


def read_trace(trace_path):
    """
    :rtype: Trace
    :raises SchemaError: naming the offending line
    """
    if not os.path.isfile(trace_path):
        raise ConfigException('Trace', 'trace: file {} does not exist'.format(trace_path))
    trace = Trace(path=trace_path)
    answer_calls = []
    with io.open(trace_path, 'r', encoding='utf-8') as trace_file:
        for line_number, line in enumerate(trace_file, 1):
            if not line.strip():
                continue
            if trace.summary is not None:
                raise SchemaError(line_number, 'record after the summary record')
            try:
                record = json.loads(line)
            except ValueError as e:
                raise SchemaError(line_number, 'invalid JSON: {}'.format(e))
            if not isinstance(record, dict):
                raise SchemaError(line_number, 'record is not an object')
            if 'summary' in record:
                trace.summary = record['summary']
                if not isinstance(trace.summary, dict):
                    raise SchemaError(line_number, 'summary is not an object')
                answer_calls = [_parse_call(call, line_number) for call in trace.summary.get('calls', [])]
                if trace.summary.get('config') is not None:
                    try:
                        trace.config = validate_config(config_from_dict(trace.summary['config']))
                    except TrigReasonException as e:
                        raise SchemaError(line_number, 'summary config: {}'.format(e.message))
                continue
            for name in ('idx', 'origin', 'tokens', 'finish'):
                if name not in record:
                    raise SchemaError(line_number, 'missing field "{}"'.format(name))
            if record['idx'] != len(trace.records) + 1:
                raise SchemaError(line_number, 'expected idx {0}, got {1!r}'.format(len(trace.records) + 1,
                                                                                   record['idx']))
            _parse_step(record, line_number)
            if 'draft' in record:
                _parse_step(record['draft'], line_number, index=record['idx'])
            trace.calls.extend(_parse_call(call, line_number) for call in record.get('calls', []))
            trace.records.append(record)
            trace.lines.append(line_number)
    trace.calls.extend(answer_calls)
    return trace


def records_to_session(trace):
    """
    Session rebuilt from the trace records alone
    :type trace: Trace
    :rtype: Session
    """
    summary = trace.summary or {}
    config = trace.config or validate_config(SessionConfig())
    session = Session(question=summary.get('question', ''), config=config)
    for record, line in zip(trace.records, trace.lines):
        step = _parse_step(record, line, config.tau)
        if 'draft' in record:
            step = replace(step, draft=_parse_step(record['draft'], line, config.tau, step.index))
        session.steps.append(step)
        for event in record.get('events', []):
            kind = _enum_value(TriggerKind, event.get('kind'), line, 'event kind')
            evidence = event.get('evidence')
            if isinstance(evidence, list):
                evidence = tuple(evidence)
            session.events.append(TriggerEvent(kind, step.index, evidence))
    session.calls = list(trace.calls)
    for call in session.calls:
        if call.purpose == CallPurpose.JUDGE:
            try:
                session.judge_scores.append(parse_score(call.response.text))
            except TrigReasonException:
                session.judge_scores.append(None)
    session.thinking_tokens_used = summary.get('thinking_tokens_used',
                                               sum(step.token_count for step in session.steps))
    session.finished = True
    if summary.get('finish_state'):
        session.finish_state = _enum_value(FinishState, summary['finish_state'], len(trace.records) + 1,
                                           'finish_state')
    session.answer_text = summary.get('answer_text')
    return session
