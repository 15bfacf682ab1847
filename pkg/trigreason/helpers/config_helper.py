#!/usr/bin/python
# -*- coding: utf-8 -*-
import math
import os
from dataclasses import asdict, fields, replace

import yaml

try:
    import tomllib
except ImportError:
    import tomli as tomllib

from trigreason.command_templates.prompts import ANSWER_SUFFIX, JUDGE_TEMPLATE
from trigreason.entities.config_entities import CostModel, SessionConfig, Strategy
from trigreason.entities.token_entities import Origin
from trigreason.exceptions import ConfigException, RangeError
from trigreason.helpers.lexicon_helper import DEFAULT_PHRASES, load_lexicon

DEFAULTS = {
    'n': 20,
    'm': 1,
    'k': 3,
    'tau': 1.05,
    'rho': 0.85,
    'budget': 8192,
    'temperature': 0.6,
    'top_p': 0.95,
    'step_delimiter': '\n\n',
    'max_step_tokens': 512,
    'lexicon': DEFAULT_PHRASES,
    'strategy': Strategy.TRIGREASON,
    'judge_threshold': 7,
    'answer_model': Origin.SRM,
    'finish_markers': ('</think>',),
    'skip_draft_during_rectify': False,
    'judge_template': JUDGE_TEMPLATE,
    'answer_suffix': ANSWER_SUFFIX,
    'judge_max_tokens': 8,
    'answer_max_tokens': 512,
}

_STRATEGY_NAMES = {
    'trigreason': Strategy.TRIGREASON,
    'specreason': Strategy.SPECREASON,
    'srmonly': Strategy.SRM_ONLY,
    'lrmonly': Strategy.LRM_ONLY,
}

CONFIG_FIELDS = tuple(config_field.name for config_field in fields(SessionConfig))


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value):
    return (isinstance(value, (int, float)) and not isinstance(value, bool)) and math.isfinite(value)


def _check_int(name, value, minimum, maximum=None):
    if not _is_int(value) or value < minimum or (maximum is not None and value > maximum):
        bounds = '[{0}, {1}]'.format(minimum, maximum) if maximum is not None else '>= {}'.format(minimum)
        raise RangeError(name, 'expected an integer {0}, got {1!r}'.format(bounds, value))


def _check_strings(name, value, allow_empty):
    if not isinstance(value, tuple) or not all(isinstance(item, str) for item in value):
        raise RangeError(name, 'expected a list of strings, got {!r}'.format(value))
    if not allow_empty and not value:
        raise RangeError(name, 'must not be empty')


def parse_strategy(value):
    if isinstance(value, Strategy):
        return value
    key = str(value).lower().replace('-', '').replace('_', '')
    if key not in _STRATEGY_NAMES:
        raise RangeError('strategy', 'unknown strategy {!r}'.format(value))
    return _STRATEGY_NAMES[key]


def parse_origin(name, value):
    if isinstance(value, Origin):
        return value
    try:
        return Origin(str(value).upper())
    except ValueError:
        raise RangeError(name, 'expected SRM or LRM, got {!r}'.format(value))


def validate_config(config):
    """
    Fill absent fields with defaults and check every range
    :type config: SessionConfig
    :rtype: SessionConfig
    :raises RangeError: naming the offending field
    """
    values = {}
    for name in CONFIG_FIELDS:
        value = getattr(config, name)
        values[name] = DEFAULTS[name] if value is None else value

    for name in ('lexicon', 'finish_markers'):
        if isinstance(values[name], list):
            values[name] = tuple(values[name])
    values['strategy'] = parse_strategy(values['strategy'])
    values['answer_model'] = parse_origin('answer_model', values['answer_model'])

    _check_int('n', values['n'], 0)
    _check_int('m', values['m'], 0)
    _check_int('k', values['k'], 1)
    _check_int('budget', values['budget'], 1)
    _check_int('max_step_tokens', values['max_step_tokens'], 1)
    _check_int('judge_threshold', values['judge_threshold'], 0, 9)
    _check_int('judge_max_tokens', values['judge_max_tokens'], 1)
    _check_int('answer_max_tokens', values['answer_max_tokens'], 1)
    if not _is_real(values['tau']) or values['tau'] <= 0:
        raise RangeError('tau', 'expected a real > 0, got {!r}'.format(values['tau']))
    if not _is_real(values['rho']) or not 0 < values['rho'] <= 1:
        raise RangeError('rho', 'expected a real in (0, 1], got {!r}'.format(values['rho']))
    if not _is_real(values['temperature']) or values['temperature'] < 0:
        raise RangeError('temperature', 'expected a real >= 0, got {!r}'.format(values['temperature']))
    if not _is_real(values['top_p']) or not 0 < values['top_p'] <= 1:
        raise RangeError('top_p', 'expected a real in (0, 1], got {!r}'.format(values['top_p']))
    if not isinstance(values['step_delimiter'], str) or not values['step_delimiter']:
        raise RangeError('step_delimiter', 'expected a non-empty string')
    for name in ('judge_template', 'answer_suffix'):
        if not isinstance(values[name], str):
            raise RangeError(name, 'expected a string')
    if not isinstance(values['skip_draft_during_rectify'], bool):
        raise RangeError('skip_draft_during_rectify', 'expected a boolean')
    _check_strings('lexicon', values['lexicon'], allow_empty=True)
    _check_strings('finish_markers', values['finish_markers'], allow_empty=True)

    return replace(config, **values)


def config_to_dict(config):
    """
    Plain mapping with the SessionConfig field names, enums by value and tuples as lists
    :type config: SessionConfig
    :rtype: dict
    """
    result = {}
    for name, value in asdict(config).items():
        if isinstance(value, (Strategy, Origin)):
            value = value.value
        elif isinstance(value, tuple):
            value = list(value)
        result[name] = value
    return result


def config_from_dict(data):
    """
    :type data: dict
    :rtype: SessionConfig
    """
    unknown = sorted(set(data) - set(CONFIG_FIELDS))
    if unknown:
        raise ConfigException('SessionConfig', 'unknown config field(s): {}'.format(', '.join(unknown)))
    values = dict(data)
    if values.get('strategy') is not None:
        values['strategy'] = parse_strategy(values['strategy'])
    if values.get('answer_model') is not None:
        values['answer_model'] = parse_origin('answer_model', values['answer_model'])
    if isinstance(values.get('lexicon'), str):
        values['lexicon'] = load_lexicon(values['lexicon']).phrases
    for name in ('lexicon', 'finish_markers'):
        if isinstance(values.get(name), list):
            values[name] = tuple(values[name])
    return SessionConfig(**values)


def load_session_config(config_path=None, overrides=None):
    """
    Session config with precedence flag > file > default
    :param config_path: TOML file mirroring the SessionConfig field names
    :param overrides: flag values, None entries are ignored
    :rtype: SessionConfig
    """
    data = {}
    if config_path:
        if not os.path.isfile(config_path):
            raise ConfigException('SessionConfig', 'config: file {} does not exist'.format(config_path))
        with open(config_path, 'rb') as config_file:
            try:
                data = tomllib.load(config_file)
            except tomllib.TOMLDecodeError as e:
                raise ConfigException('SessionConfig', 'config: {0}: {1}'.format(config_path, e))
    for name, value in (overrides or {}).items():
        if value is not None:
            data[name] = value
    return validate_config(config_from_dict(data))


def load_cost_model(cost_model_path=None):
    """
    Cost model from a YAML mapping of CostModel field names, None gives the zero model
    :rtype: CostModel
    """
    if not cost_model_path:
        return CostModel()
    if not os.path.isfile(cost_model_path):
        raise ConfigException('CostModel', 'cost-model: file {} does not exist'.format(cost_model_path))
    with open(cost_model_path, 'r') as cost_file:
        data = yaml.safe_load(cost_file) or {}
    known = set(config_field.name for config_field in fields(CostModel))
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigException('CostModel', 'unknown cost model field(s): {}'.format(', '.join(unknown)))
    for name, value in data.items():
        if name == 'count_judge_calls':
            if not isinstance(value, bool):
                raise RangeError(name, 'expected a boolean')
        elif not _is_real(value) or value < 0:
            raise RangeError(name, 'expected a real >= 0, got {!r}'.format(value))
    return CostModel(**data)
