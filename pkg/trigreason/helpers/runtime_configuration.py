#!/usr/bin/python
# -*- coding: utf-8 -*-
import os

import yaml


class RuntimeConfiguration(object):
    """
    Driver runtime configuration, YAML file with dotted key access
    """

    def __init__(self, config_path=None):
        self._config = {}
        if config_path and os.path.isfile(config_path):
            with open(config_path, 'r') as config_file:
                self._config = yaml.safe_load(config_file) or {}

    def read_key(self, complex_key, default_value=None):
        """
        Value for a dotted key
        :param complex_key: 'LOGGING.LEVEL'
        :type complex_key: str
        :param default_value: returned when any part of the key is missing
        :return:
        """
        value = self._config
        for key in complex_key.split('.'):
            if not isinstance(value, dict) or key not in value:
                return default_value
            value = value[key]
        return default_value if value is None else value
