#!/usr/bin/python
# -*- coding: utf-8 -*-
import json
import re
import time

import httpx

from trigreason.entities.backend_entities import StepResponse
from trigreason.entities.token_entities import FinishReason, TokenSample
from trigreason.exceptions import LogprobsUnavailable, ProtocolError, TransportError

FINISH_REASONS = {
    'stop': FinishReason.STOP,
    'length': FinishReason.LENGTH,
    'eos': FinishReason.EOS,
    None: FinishReason.EOS,
}

SPECIAL_TOKEN_PATTERN = re.compile(r'^\s*<[|｜].*[|｜]>\s*$')

# endpoints round tiny negatives up to a hair above zero
LOGPROB_TOLERANCE = 1e-6

RETRYABLE_STATUS = (408, 429, 500, 502, 503, 504)


def _load_body(body):
    try:
        data = json.loads(body)
    except (TypeError, ValueError) as e:
        raise ProtocolError('ResponseParser', 'Response body is not JSON: {}'.format(e))
    if not isinstance(data, dict):
        raise ProtocolError('ResponseParser', 'Response body is not a JSON object')
    choices = data.get('choices')
    if not choices or not isinstance(choices, list) or not isinstance(choices[0], dict):
        raise ProtocolError('ResponseParser', 'Response has no choices')
    return data, choices[0]


def _logprob(value):
    if value is None:
        return None
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ProtocolError('ResponseParser', 'Token logprob {!r} is not a number'.format(value))
    if value > 0:
        if value > LOGPROB_TOLERANCE:
            raise ProtocolError('ResponseParser', 'Token logprob {} is positive'.format(value))
        return 0.0
    return float(value)


def _token(text, logprob):
    return TokenSample(text, _logprob(logprob), bool(SPECIAL_TOKEN_PATTERN.match(text or '')))


def _finish(choice):
    """
    Finish reason and matched stop string, an integer stop reason is the end-of-sequence token id
    """
    raw = choice.get('finish_reason')
    if raw not in FINISH_REASONS:
        raise ProtocolError('ResponseParser', 'Unknown finish reason {!r}'.format(raw))
    finish_reason = FINISH_REASONS[raw]
    stop_sequence = None
    for key in ('stop_reason', 'matched_stop'):
        matched = choice.get(key)
        if isinstance(matched, str):
            stop_sequence = matched
        elif isinstance(matched, int) and not isinstance(matched, bool) and finish_reason == FinishReason.STOP:
            finish_reason = FinishReason.EOS
    # vLLM: finished on the end-of-sequence token when no stop string matched
    if raw == 'stop' and 'stop_reason' in choice and choice['stop_reason'] is None and stop_sequence is None:
        finish_reason = FinishReason.EOS
    return finish_reason, stop_sequence


def _usage(data, key, default):
    usage = data.get('usage') or {}
    value = usage.get(key)
    return value if isinstance(value, int) else default


def parse_completion_response(body):
    """
    StepResponse from a /v1/completions response body
    :type body: bytes
    :rtype: StepResponse
    :raises ProtocolError: missing choices or token/logprob lists of different length
    """
    data, choice = _load_body(body)
    finish_reason, stop_sequence = _finish(choice)
    logprobs = choice.get('logprobs')
    if logprobs:
        token_texts = logprobs.get('tokens') or []
        token_logprobs = logprobs.get('token_logprobs') or []
        if len(token_texts) != len(token_logprobs):
            raise ProtocolError('ResponseParser',
                                'Got {0} tokens and {1} logprobs'.format(len(token_texts), len(token_logprobs)))
        tokens = tuple(_token(text, logprob) for text, logprob in zip(token_texts, token_logprobs))
        completion_tokens = len(tokens)
    else:
        text = choice.get('text') or ''
        tokens = (TokenSample(text),) if text else ()
        completion_tokens = _usage(data, 'completion_tokens', len(tokens))
    return StepResponse(tokens=tokens, finish_reason=finish_reason,
                        prompt_tokens=_usage(data, 'prompt_tokens', 0),
                        completion_tokens=completion_tokens, stop_sequence=stop_sequence)


def parse_chat_response(body):
    """
    StepResponse from a /v1/chat/completions response body
    :type body: bytes
    :rtype: StepResponse
    """
    data, choice = _load_body(body)
    finish_reason, stop_sequence = _finish(choice)
    content = (choice.get('logprobs') or {}).get('content')
    if content:
        tokens = tuple(_token(item.get('token', ''), item.get('logprob')) for item in content)
        completion_tokens = len(tokens)
    else:
        text = (choice.get('message') or {}).get('content') or ''
        tokens = (TokenSample(text),) if text else ()
        completion_tokens = _usage(data, 'completion_tokens', len(tokens))
    return StepResponse(tokens=tokens, finish_reason=finish_reason,
                        prompt_tokens=_usage(data, 'prompt_tokens', 0),
                        completion_tokens=completion_tokens, stop_sequence=stop_sequence)


class CompletionsBackend(object):
    """
    OpenAI-compatible /v1/completions client
    """
    PATH = '/v1/completions'

    def __init__(self, logger, base_url, model, api_key=None, timeout=120, retries=3, backoff=0.25,
                 max_connections=8, transport=None):
        """
        :type logger: logging.Logger
        :param base_url: 'http://localhost:8000'
        :param transport: httpx transport, tests pass httpx.MockTransport
        """
        self._logger = logger
        self._model = model
        self._retries = retries
        self._backoff = backoff
        self._sleep = time.sleep
        headers = {'Authorization': 'Bearer {}'.format(api_key)} if api_key else {}
        self._client = httpx.Client(base_url=base_url.rstrip('/'), headers=headers,
                                    timeout=httpx.Timeout(timeout, connect=10.0),
                                    limits=httpx.Limits(max_connections=max_connections),
                                    transport=transport)

    @property
    def model(self):
        return self._model

    def _payload(self, request):
        payload = {
            'model': self._model,
            'prompt': request.context,
            'max_tokens': request.max_tokens,
            'temperature': request.temperature,
            'top_p': request.top_p,
        }
        if request.want_logprobs:
            payload['logprobs'] = 1
        if request.stop:
            payload['stop'] = list(request.stop)
        return payload

    def _parse(self, body):
        return parse_completion_response(body)

    def _post(self, payload):
        attempt = 0
        while True:
            try:
                response = self._client.post(self.PATH, json=payload)
                if response.status_code in RETRYABLE_STATUS:
                    raise TransportError(self.__class__.__name__,
                                         'HTTP {0} from {1}'.format(response.status_code, response.url))
                if response.status_code >= 400:
                    raise ProtocolError(self.__class__.__name__,
                                        'HTTP {0} from {1}: {2}'.format(response.status_code, response.url,
                                                                        response.text[:200]))
                return response.content
            except (httpx.TransportError, TransportError) as e:
                if attempt >= self._retries:
                    if isinstance(e, TransportError):
                        raise
                    raise TransportError(self.__class__.__name__,
                                         'Cannot reach {0}{1}: {2}'.format(self._client.base_url, self.PATH, e))
                delay = self._backoff * (2 ** attempt)
                self._logger.warning('Retrying {0} in {1:.2f}s after: {2}'.format(self.PATH, delay, e))
                self._sleep(delay)
                attempt += 1

    def generate_step(self, request):
        """
        One step, halted at the first stop sequence, max_tokens or end-of-sequence
        :type request: trigreason.entities.backend_entities.StepRequest
        :rtype: StepResponse
        """
        start_time = time.perf_counter()
        body = self._post(self._payload(request))
        response = self._parse(body)
        if request.want_logprobs and any(token.logprob is None for token in response.tokens):
            raise LogprobsUnavailable(self.__class__.__name__,
                                      'Endpoint {} returned no token logprobs'.format(self._client.base_url))
        self._logger.debug('{0} {1}: {2} tokens, {3}'.format(self._model, self.PATH, response.completion_tokens,
                                                               response.finish_reason.value))
        return StepResponse(tokens=response.tokens, finish_reason=response.finish_reason,
                            wall_time=time.perf_counter() - start_time, prompt_tokens=response.prompt_tokens,
                            completion_tokens=response.completion_tokens, stop_sequence=response.stop_sequence)

    def close(self):
        self._client.close()


class ChatCompletionsBackend(CompletionsBackend):
    """
    /v1/chat/completions variant, the context goes in as a single user turn
    """
    PATH = '/v1/chat/completions'

    def _payload(self, request):
        payload = {
            'model': self._model,
            'messages': [{'role': 'user', 'content': request.context}],
            'max_tokens': request.max_tokens,
            'temperature': request.temperature,
            'top_p': request.top_p,
        }
        if request.want_logprobs:
            payload['logprobs'] = True
        if request.stop:
            payload['stop'] = list(request.stop)
        return payload

    def _parse(self, body):
        return parse_chat_response(body)
