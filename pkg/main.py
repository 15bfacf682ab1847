#!/usr/bin/python
# -*- coding: utf-8 -*-
import argparse
import importlib
import os
import sys

from cloudshell.logging.qs_logger import get_qs_logger

from trigreason.exceptions import BackendException, ConfigException, TrigReasonException
from trigreason.helpers.runtime_configuration import RuntimeConfiguration

EXIT_BACKEND_FAILURE = 2
EXIT_INPUT_ERROR = 3

MIN_BUDGET = 2048
MAX_BUDGET = 32768


class ArgumentParser(argparse.ArgumentParser):
    """
    Usage errors are input errors, argparse would exit with the backend failure code
    """

    def error(self, message):
        raise ConfigException(self.__class__.__name__, message)


def _budget(value):
    budget = int(value)
    if not MIN_BUDGET <= budget <= MAX_BUDGET:
        raise argparse.ArgumentTypeError('budget must be in [{0}, {1}]'.format(MIN_BUDGET, MAX_BUDGET))
    return budget


def build_parser():
    """
    :rtype: argparse.ArgumentParser
    """
    session_flags = ArgumentParser(add_help=False)
    session_flags.add_argument('--config', help='session config TOML')
    session_flags.add_argument('--strategy', choices=('trigreason', 'specreason', 'srm-only', 'lrm-only'))
    session_flags.add_argument('--rho', type=float)
    session_flags.add_argument('--tau', type=float)
    session_flags.add_argument('--n', type=int)
    session_flags.add_argument('--m', type=int)
    session_flags.add_argument('--k', type=int)
    session_flags.add_argument('--budget', type=_budget)
    session_flags.add_argument('--judge-threshold', type=int)
    session_flags.add_argument('--answer-model', type=str.upper, choices=('SRM', 'LRM'))
    session_flags.add_argument('--lexicon', help='hesitation phrases, one per line')
    session_flags.add_argument('--temperature', type=float)
    session_flags.add_argument('--top-p', type=float)
    session_flags.add_argument('--max-step-tokens', type=int)
    session_flags.add_argument('--skip-draft-during-rectify', action='store_true', default=None)
    session_flags.add_argument('--cost-model', help='cost model YAML')
    session_flags.add_argument('--srm-url')
    session_flags.add_argument('--lrm-url')
    session_flags.add_argument('--srm-model')
    session_flags.add_argument('--lrm-model')
    session_flags.add_argument('--srm-script', help='JSON Lines script, or a directory of <id>.jsonl scripts')
    session_flags.add_argument('--lrm-script', help='JSON Lines script, or a directory of <id>.jsonl scripts')
    session_flags.add_argument('--json-out')

    parser = ArgumentParser(prog='trigreason', description='Trigger-based SRM/LRM collaborative reasoning')
    commands = parser.add_subparsers(dest='command', parser_class=ArgumentParser)
    commands.required = True

    run_parser = commands.add_parser('run', parents=[session_flags], help='one session on one question')
    run_parser.add_argument('question')
    run_parser.add_argument('--trace-out', help='trace JSON Lines file')
    run_parser.add_argument('--expected', help='reference answer to grade against')
    run_parser.add_argument('--kind', choices=('IntegerBoxed', 'MultipleChoice'))

    bench_parser = commands.add_parser('bench', parents=[session_flags], help='sessions over a dataset')
    bench_parser.add_argument('dataset')
    bench_parser.add_argument('--runs', type=int)
    bench_parser.add_argument('--parallel', type=int)
    bench_parser.add_argument('--trace-out', help='directory for per-session traces')
    bench_parser.add_argument('--results-out', help='per-question results JSON Lines file')

    replay_parser = commands.add_parser('replay', help='rebuild and re-execute sessions from traces')
    replay_parser.add_argument('traces', nargs='+')
    replay_parser.add_argument('--cost-model')
    replay_parser.add_argument('--json-out')

    report_parser = commands.add_parser('report', help='trigger activation table from traces')
    report_parser.add_argument('traces', nargs='+')
    report_parser.add_argument('--json-out')
    return parser


class Main(object):
    def __init__(self, file_path=None, log_path=None):
        self._driver_path = os.path.dirname(file_path or sys.argv[0])
        self._log_path = log_path or os.path.join(self._driver_path, '..', 'Logs')
        os.environ['LOG_PATH'] = self._log_path

    def run_command(self, driver_name, argv=None):
        """
        :param driver_name: package name, also the runtime config and log prefix
        :param argv: command line without the program name
        :return: exit code
        :rtype: int
        """
        # Reading runtime configuration
        runtime_config = RuntimeConfiguration(
            os.path.join(self._driver_path, driver_name + '_runtime_config.yml'))

        # Creating command logger instance
        command_logger = get_qs_logger(log_group=driver_name,
                                       log_file_prefix=driver_name + '_commands', log_category='COMMANDS')
        log_level = runtime_config.read_key('LOGGING.LEVEL', 'INFO')
        command_logger.setLevel(log_level)

        try:
            options = build_parser().parse_args(argv)
            command_logger.info('Command {0}, PID: {1}'.format(options.command, os.getpid()))

            driver_commands = importlib.import_module('{}.driver_commands'.format(driver_name), package=None)
            driver_instance = driver_commands.DriverCommands(command_logger, runtime_config)

            if options.command == 'run':
                return driver_instance.cmd_run(options.question, options)
            if options.command == 'bench':
                return driver_instance.cmd_bench(options.dataset, options)
            if options.command == 'replay':
                return driver_instance.cmd_replay(options.traces, options)
            return driver_instance.cmd_report(options.traces, options)
        except BackendException as e:
            command_logger.error('Backend failure: {}'.format(e))
            sys.stderr.write('error: {}\n'.format(e.message))
            return EXIT_BACKEND_FAILURE
        except TrigReasonException as e:
            command_logger.error('Input error: {}'.format(e))
            sys.stderr.write('error: {}\n'.format(e.message))
            return EXIT_INPUT_ERROR


if __name__ == '__main__':
    sys.exit(Main(sys.argv[0]).run_command('trigreason', sys.argv[1:]))
