#!/usr/bin/python
# -*- coding: utf-8 -*-
import os
import threading

from trigreason.backends.completions_backend import ChatCompletionsBackend, CompletionsBackend
from trigreason.backends.scripted_backend import ScriptedBackend
from trigreason.exceptions import ConfigException


class BackendHandler(object):
    """
    Builds model clients: live endpoints are created once and shared, scripts are re-read for every session
    """

    def __init__(self, logger, runtime_config):
        """
        :type logger: logging.Logger
        :type runtime_config: trigreason.helpers.runtime_configuration.RuntimeConfiguration
        """
        self._logger = logger
        self._runtime_config = runtime_config
        self._defined_backend_types = {'COMPLETIONS': CompletionsBackend, 'CHAT': ChatCompletionsBackend}
        self._backend_type = str(runtime_config.read_key('BACKEND.API', 'COMPLETIONS')).upper()
        self._endpoints = {}
        self._live_backends = {}
        self._lock = threading.Lock()

    def define_endpoint_attributes(self, origin, url=None, script=None, api_key=None, model=None):
        """
        Define where the model of one origin lives
        :type origin: trigreason.entities.token_entities.Origin
        :param url: base url of an OpenAI-compatible server, 'http://localhost:8000'
        :param script: JSON Lines script file, or a directory of '<question id>.jsonl' scripts
        """
        if not url and not script:
            raise ConfigException(self.__class__.__name__,
                                  '--{0}-url or --{0}-script is required'.format(origin.value.lower()))
        if self._backend_type not in self._defined_backend_types:
            raise ConfigException(self.__class__.__name__,
                                  'Backend type {} is not defined'.format(self._backend_type))
        self._endpoints[origin] = {
            'url': url,
            'script': script,
            'api_key': api_key,
            'model': model or self._runtime_config.read_key('{}.MODEL'.format(origin.value), 'default'),
        }

    def get_backend(self, origin, question_id=None):
        """
        Backend for one session
        :param question_id: selects '<question_id>.jsonl' when the script is a directory
        """
        endpoint = self._endpoints.get(origin)
        if endpoint is None:
            raise ConfigException(self.__class__.__name__,
                                  'Endpoint for {} is not defined'.format(origin.value))
        script = endpoint['script']
        if script:
            if os.path.isdir(script):
                script = os.path.join(script, '{}.jsonl'.format(question_id))
            return ScriptedBackend.from_file(script, self._logger)
        with self._lock:
            if origin not in self._live_backends:
                backend_class = self._defined_backend_types[self._backend_type]
                self._live_backends[origin] = backend_class(
                    self._logger, endpoint['url'], endpoint['model'], api_key=endpoint['api_key'],
                    timeout=self._runtime_config.read_key('BACKEND.TIMEOUT', 120),
                    retries=self._runtime_config.read_key('BACKEND.RETRIES', 3),
                    backoff=self._runtime_config.read_key('BACKEND.BACKOFF', 0.25),
                    max_connections=self._runtime_config.read_key('BACKEND.MAX_CONNECTIONS', 8))
            return self._live_backends[origin]

    def close(self):
        with self._lock:
            for backend in self._live_backends.values():
                backend.close()
            self._live_backends = {}
