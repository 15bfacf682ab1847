#!/usr/bin/python
# -*- coding: utf-8 -*-
import re

import trigreason.command_templates.prompts as prompts
from trigreason.entities.backend_entities import StepRequest
from trigreason.exceptions import UnparseableScore

SCORE_PATTERN = re.compile(r'\d+')


def parse_score(reply):
    """
    First integer in [0, 9] found in the judge reply
    :type reply: str
    :rtype: int
    :raises UnparseableScore: no in-range integer
    """
    for matched in SCORE_PATTERN.finditer(reply or ''):
        score = int(matched.group(0))
        if 0 <= score <= 9:
            return score
    raise UnparseableScore('StepActions', 'No score in judge reply {!r}'.format((reply or '')[:80]))


class StepActions(object):
    """
    Step level actions on one model backend
    """

    def __init__(self, backend, logger):
        """
        :param backend: live, scripted or replay backend
        :type logger: logging.Logger
        """
        self._backend = backend
        self._logger = logger

    def generate_step(self, request):
        """
        :type request: StepRequest
        :rtype: trigreason.entities.backend_entities.StepResponse
        """
        return self._backend.generate_step(request)

    def request_judgement(self, context, candidate_step, template_text=prompts.JUDGE_TEMPLATE, max_tokens=8,
                          temperature=0.0, top_p=1.0, prompt_tokens_hint=0):
        """
        Ask the model to score a candidate step
        :rtype: trigreason.entities.backend_entities.StepResponse
        """
        request = StepRequest(context=prompts.judge_prompt(template_text, context, candidate_step), stop=(),
                              max_tokens=max_tokens, temperature=temperature, top_p=top_p, want_logprobs=False,
                              prompt_tokens_hint=prompt_tokens_hint)
        return self._backend.generate_step(request)

    def judge_step(self, context, candidate_step, **kwargs):
        """
        Score in [0, 9] for the candidate step
        :return: score and the judge response, the response is kept for call accounting
        :rtype: tuple[int, trigreason.entities.backend_entities.StepResponse]
        :raises UnparseableScore: no score in the reply, the exception carries the response
        """
        response = self.request_judgement(context, candidate_step, **kwargs)
        try:
            score = parse_score(response.text)
        except UnparseableScore as e:
            e.response = response
            raise
        self._logger.debug('Judge score {}'.format(score))
        return score, response

    def answer(self, context, answer_suffix, delimiter, max_tokens, temperature, top_p, prompt_tokens_hint=0):
        """
        Final answer after the thinking phase
        :rtype: trigreason.entities.backend_entities.StepResponse
        """
        request = StepRequest(context=prompts.answer_prompt(context, answer_suffix, delimiter), stop=(),
                              max_tokens=max_tokens, temperature=temperature, top_p=top_p, want_logprobs=False,
                              prompt_tokens_hint=prompt_tokens_hint)
        return self._backend.generate_step(request)
