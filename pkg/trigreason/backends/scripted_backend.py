#!/usr/bin/python
# -*- coding: utf-8 -*-
import io
import json
import os
import threading

from trigreason.entities.backend_entities import StepResponse
from trigreason.entities.token_entities import FinishReason, TokenSample
from trigreason.exceptions import ConfigException, LogprobsUnavailable, SchemaError

_FINISH_NAMES = {
    'stop': FinishReason.STOP,
    'length': FinishReason.LENGTH,
    'eos': FinishReason.EOS,
}


def parse_finish(value, line=0):
    for finish_reason in FinishReason:
        if value == finish_reason.value:
            return finish_reason
    if value in _FINISH_NAMES:
        return _FINISH_NAMES[value]
    raise SchemaError(line, 'unknown finish {!r}'.format(value))


def record_to_response(record, line=0):
    """
    StepResponse from a script or trace record
    :param record: {"tokens": [str], "logprobs": [number|null], "finish": str, ...}
    :param line: 1-based line number for error messages
    :rtype: StepResponse
    """
    if not isinstance(record, dict):
        raise SchemaError(line, 'record is not an object')
    token_texts = record.get('tokens')
    if not isinstance(token_texts, list) or not all(isinstance(text, str) for text in token_texts):
        raise SchemaError(line, '"tokens" must be a list of strings')
    logprobs = record.get('logprobs')
    if logprobs is None:
        logprobs = [None] * len(token_texts)
    if not isinstance(logprobs, list) or len(logprobs) != len(token_texts):
        raise SchemaError(line, '"logprobs" must be a list as long as "tokens"')
    for logprob in logprobs:
        if logprob is not None and (isinstance(logprob, bool) or not isinstance(logprob, (int, float))):
            raise SchemaError(line, 'logprob {!r} is not a number'.format(logprob))
    special = record.get('special') or [False] * len(token_texts)
    if len(special) != len(token_texts):
        raise SchemaError(line, '"special" must be as long as "tokens"')
    tokens = tuple(TokenSample(text, None if logprob is None else float(logprob), bool(flag))
                   for text, logprob, flag in zip(token_texts, logprobs, special))
    completion_tokens = record.get('completion_tokens')
    return StepResponse(tokens=tokens,
                        finish_reason=parse_finish(record.get('finish', FinishReason.STOP.value), line),
                        wall_time=float(record.get('wall_time', 0.0)),
                        prompt_tokens=int(record.get('prompt_tokens', 0)),
                        completion_tokens=len(tokens) if completion_tokens is None else int(completion_tokens),
                        stop_sequence=record.get('stop_sequence'))


def response_to_record(response):
    """
    :type response: StepResponse
    :rtype: dict
    """
    record = {
        'tokens': [token.text for token in response.tokens],
        'logprobs': [token.logprob for token in response.tokens],
        'finish': response.finish_reason.value,
        'wall_time': response.wall_time,
        'prompt_tokens': response.prompt_tokens,
        'completion_tokens': response.completion_tokens,
    }
    if any(token.special for token in response.tokens):
        record['special'] = [token.special for token in response.tokens]
    if response.stop_sequence is not None:
        record['stop_sequence'] = response.stop_sequence
    return record


class ScriptedBackend(object):
    """
    Serves scripted responses in order, an exhausted script answers with end-of-sequence
    """

    def __init__(self, responses, logger=None, name='script'):
        """
        :type responses: list[StepResponse]
        :type logger: logging.Logger
        """
        self._responses = list(responses)
        self._logger = logger
        self._name = name
        self._position = 0
        self._lock = threading.Lock()
        self.requests = []

    @classmethod
    def from_file(cls, script_path, logger=None):
        """
        JSON Lines script, one response record per line
        """
        if not os.path.isfile(script_path):
            raise ConfigException(cls.__name__, 'script: file {} does not exist'.format(script_path))
        responses = []
        with io.open(script_path, 'r', encoding='utf-8') as script_file:
            for line_number, line in enumerate(script_file, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except ValueError as e:
                    raise SchemaError(line_number, 'invalid JSON: {}'.format(e))
                responses.append(record_to_response(record, line_number))
        return cls(responses, logger, name=os.path.basename(script_path))

    @property
    def model(self):
        return self._name

    @property
    def remaining(self):
        return len(self._responses) - self._position

    def _next(self, request):
        with self._lock:
            self.requests.append(request)
            if self._position >= len(self._responses):
                return None
            response = self._responses[self._position]
            self._position += 1
            return response

    def generate_step(self, request):
        """
        :type request: trigreason.entities.backend_entities.StepRequest
        :rtype: StepResponse
        """
        response = self._next(request)
        if response is None:
            if self._logger:
                self._logger.debug('{} exhausted, answering end-of-sequence'.format(self._name))
            return StepResponse(tokens=(), finish_reason=FinishReason.EOS, prompt_tokens=request.prompt_tokens_hint)
        tokens = response.tokens
        finish_reason = response.finish_reason
        completion_tokens = response.completion_tokens
        if len(tokens) > request.max_tokens:
            tokens = tokens[:request.max_tokens]
            finish_reason = FinishReason.LENGTH
            completion_tokens = len(tokens)
        if request.want_logprobs and any(token.logprob is None for token in tokens):
            raise LogprobsUnavailable(self.__class__.__name__, '{} has no logprobs for this step'.format(self._name))
        return StepResponse(tokens=tokens, finish_reason=finish_reason, wall_time=response.wall_time,
                            prompt_tokens=response.prompt_tokens or request.prompt_tokens_hint,
                            completion_tokens=completion_tokens, stop_sequence=response.stop_sequence)

    def close(self):
        pass


class ReplayBackend(ScriptedBackend):
    """
    Serves, in order, the calls a trace recorded for one origin
    """

    @classmethod
    def from_trace(cls, trace, origin, logger=None):
        """
        :type trace: trigreason.helpers.trace_helper.Trace
        :type origin: trigreason.entities.token_entities.Origin
        """
        return cls([call.response for call in trace.calls if call.origin == origin], logger,
                   name='replay-{}'.format(origin.value))

    def generate_step(self, request):
        response = self._next(request)
        if response is None:
            return StepResponse(tokens=(), finish_reason=FinishReason.EOS, prompt_tokens=request.prompt_tokens_hint)
        return response
