#!/usr/bin/python
# -*- coding: utf-8 -*-


class TrigReasonException(Exception):
    """
    Base exception, constructed as (source, message) where source is the raising class name
    """

    @property
    def source(self):
        return self.args[0] if len(self.args) > 1 else None

    @property
    def message(self):
        return self.args[-1] if self.args else ''


class ConfigException(TrigReasonException):
    pass


class RangeError(ConfigException):
    def __init__(self, field, message):
        super(RangeError, self).__init__('SessionConfig', '{0}: {1}'.format(field, message))
        self.field = field


class EmptyLexicon(ConfigException):
    def __init__(self, message='no hesitation phrases'):
        super(EmptyLexicon, self).__init__('SessionConfig', 'lexicon: {}'.format(message))
        self.field = 'lexicon'


class DomainError(TrigReasonException):
    pass


class EmptyStep(TrigReasonException):
    pass


class BackendException(TrigReasonException):
    """
    Backend failure, the orchestrator attaches the partial session before re-raising
    """
    partial_session = None


class TransportError(BackendException):
    pass


class ProtocolError(BackendException):
    pass


class LogprobsUnavailable(BackendException):
    pass


class UnparseableScore(BackendException):
    response = None


class EmptySession(TrigReasonException):
    pass


class EmptyInput(TrigReasonException):
    pass


class SchemaError(TrigReasonException):
    def __init__(self, line, message):
        super(SchemaError, self).__init__('Trace', 'line {0}: {1}'.format(line, message))
        self.line = line
