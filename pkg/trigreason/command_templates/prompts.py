#!/usr/bin/python
# -*- coding: utf-8 -*-

from functools import lru_cache

from jinja2 import Environment, StrictUndefined

JUDGE_TEMPLATE = (
    '{{ context }}\n\n'
    'Candidate reasoning step:\n{{ candidate }}\n\n'
    'Rate the following candidate reasoning step from 0-9 for usefulness and correctness '
    'given the partial solution; reply with one integer.\nScore: '
)

ANSWER_SUFFIX = '\n</think>\n\nThe final answer is '

STEP_CONTEXT_TEMPLATE = '{{ steps | join(delimiter) }}{{ delimiter }}'

_ENVIRONMENT = Environment(autoescape=False, undefined=StrictUndefined, keep_trailing_newline=True)


@lru_cache(maxsize=32)
def _template(template_text):
    return _ENVIRONMENT.from_string(template_text)


def render(template_text, **kwargs):
    """
    Render a prompt template
    :type template_text: str
    :rtype: str
    """
    return _template(template_text).render(**kwargs)


def step_context(question, step_texts, delimiter):
    """
    Conditioning prefix for the next step: the question and every accepted step, each followed by the delimiter
    """
    return render(STEP_CONTEXT_TEMPLATE, steps=[question] + list(step_texts), delimiter=delimiter)


def judge_prompt(template_text, context, candidate):
    return render(template_text, context=context, candidate=candidate)


def answer_prompt(context, answer_suffix, delimiter):
    """
    Trajectory followed by the answer-eliciting suffix, the trailing delimiter of the context is dropped
    """
    if delimiter and context.endswith(delimiter):
        context = context[:-len(delimiter)]
    return context + answer_suffix
