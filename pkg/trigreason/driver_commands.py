#!/usr/bin/python
# -*- coding: utf-8 -*-
import io
import json
import os
import sys
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor, as_completed

from trigreason.backends.backend_handler import BackendHandler
from trigreason.backends.scripted_backend import ReplayBackend
from trigreason.entities.benchmark_entities import AnswerKind
from trigreason.entities.config_entities import Strategy
from trigreason.entities.token_entities import Origin
from trigreason.exceptions import BackendException, TrigReasonException
from trigreason.helpers.benchmark_helper import load_benchmark
from trigreason.helpers.config_helper import load_cost_model, load_session_config
from trigreason.helpers.report_helper import ReportHelper
from trigreason.helpers.trace_helper import read_trace, records_to_session, session_to_records, write_trace
from trigreason.metrics import MetricsAccumulator, build_report, pass_at_1
from trigreason.orchestrator import SessionOrchestrator

EXIT_OK = 0
EXIT_BACKEND_FAILURE = 2
EXIT_INPUT_ERROR = 3

# flag attribute -> SessionConfig field
CONFIG_OVERRIDES = ('n', 'm', 'k', 'tau', 'rho', 'budget', 'strategy', 'judge_threshold', 'answer_model', 'lexicon',
                    'temperature', 'top_p', 'max_step_tokens', 'skip_draft_during_rectify')

_REQUIRED_ORIGINS = {
    Strategy.TRIGREASON: (Origin.SRM, Origin.LRM),
    Strategy.SPECREASON: (Origin.SRM, Origin.LRM),
    Strategy.SRM_ONLY: (Origin.SRM,),
    Strategy.LRM_ONLY: (Origin.LRM,),
}


class DriverCommands(object):
    """
    Command implementations behind the run, bench, replay and report verbs
    """

    def __init__(self, logger, runtime_config, output=None):
        """
        :type logger: logging.Logger
        :type runtime_config: trigreason.helpers.runtime_configuration.RuntimeConfiguration
        :param output: stream for command output, stdout by default
        """
        self._logger = logger
        self._runtime_config = runtime_config
        self._output = output or sys.stdout
        self._backend_handler = BackendHandler(logger, runtime_config)
        self._orchestrator = SessionOrchestrator(logger)
        self._report_helper = ReportHelper(logger)

        self._bench_runs = runtime_config.read_key('BENCH.RUNS', 16)
        self._bench_parallel = runtime_config.read_key('BENCH.PARALLEL', 4)

    def _write(self, text):
        self._output.write(text + '\n')

    @staticmethod
    def _write_json(json_path, data):
        with io.open(json_path, 'w', encoding='utf-8') as json_file:
            json_file.write(json.dumps(data, indent=2, ensure_ascii=False) + '\n')

    def _session_config(self, options):
        overrides = dict((name, getattr(options, name, None)) for name in CONFIG_OVERRIDES)
        return load_session_config(getattr(options, 'config', None), overrides)

    def _define_endpoints(self, options, config):
        for origin in _REQUIRED_ORIGINS[config.strategy]:
            name = origin.value.lower()
            url = getattr(options, '{}_url'.format(name), None) or os.environ.get('TRIG_{}_URL'.format(origin.value))
            self._backend_handler.define_endpoint_attributes(
                origin, url=url,
                script=getattr(options, '{}_script'.format(name), None),
                api_key=os.environ.get('TRIG_{}_API_KEY'.format(origin.value)),
                model=getattr(options, '{}_model'.format(name), None))

    def _backends(self, config, question_id=None):
        origins = _REQUIRED_ORIGINS[config.strategy]
        return tuple(self._backend_handler.get_backend(origin, question_id) if origin in origins else None
                     for origin in (Origin.SRM, Origin.LRM))

    def cmd_run(self, question, options):
        """
        One session on one question
        :type question: str
        :param options: parsed command line flags
        :return: exit code
        :rtype: int
        """
        config = self._session_config(options)
        cost_model = load_cost_model(getattr(options, 'cost_model', None))
        self._logger.info('Run, Strategy: {0}, Question: {1}'.format(config.strategy.value, question[:80]))
        self._define_endpoints(options, config)
        trace_out = getattr(options, 'trace_out', None)
        srm, lrm = self._backends(config)
        try:
            session = self._orchestrator.run(question, config, srm, lrm)
        except BackendException as e:
            if trace_out and e.partial_session is not None:
                write_trace(e.partial_session, trace_out)
                self._logger.info('Partial trace written to {}'.format(trace_out))
            raise
        finally:
            self._backend_handler.close()

        if trace_out:
            write_trace(session, trace_out)
        report = build_report(session, cost_model, expected=getattr(options, 'expected', None),
                              kind=AnswerKind(getattr(options, 'kind', None) or AnswerKind.INTEGER_BOXED.value))
        self._logger.info('Run finished: {0}, answer {1}'.format(session.finish_state.value, report.answer))
        self._write(self._report_helper.run_summary(report))
        if getattr(options, 'json_out', None):
            self._write_json(options.json_out, self._report_helper.report_to_dict(report))
        return EXIT_OK

    def _bench_session(self, item, run, config, cost_model, trace_dir):
        srm, lrm = self._backends(config, item.id)
        session = self._orchestrator.run(item.question, config, srm, lrm)
        if trace_dir:
            write_trace(session, os.path.join(trace_dir, '{0}-{1}.jsonl'.format(item.id, run)))
        return session, build_report(session, cost_model, expected=item.answer, kind=item.kind)

    def cmd_bench(self, dataset_path, options):
        """
        Sessions over a benchmark dataset, runs per question in a worker pool
        :return: exit code, backend failure only when every session failed
        :rtype: int
        """
        config = self._session_config(options)
        cost_model = load_cost_model(getattr(options, 'cost_model', None))
        items = load_benchmark(dataset_path)
        runs = getattr(options, 'runs', None) or self._bench_runs
        parallel = getattr(options, 'parallel', None) or self._bench_parallel
        trace_dir = getattr(options, 'trace_out', None)
        if trace_dir and not os.path.isdir(trace_dir):
            os.makedirs(trace_dir)
        self._logger.info('Bench, Strategy: {0}, Questions: {1}, Runs: {2}, Parallel: {3}'.format(
            config.strategy.value, len(items), runs, parallel))
        self._define_endpoints(options, config)

        accumulator = MetricsAccumulator()
        reports = {}
        try:
            with ThreadPoolExecutor(max_workers=parallel) as executor:
                futures = dict((executor.submit(self._bench_session, item, run, config, cost_model, trace_dir),
                                (item, run)) for item in items for run in range(runs))
                for future in as_completed(futures):
                    item, run = futures[future]
                    try:
                        session, report = future.result()
                    except TrigReasonException as e:
                        self._logger.warning('Question {0} run {1} failed: {2}'.format(item.id, run, e))
                        accumulator.add_failure(item.id, e)
                        reports[(item.id, run)] = None
                        continue
                    accumulator.add(item.id, session, report.correct)
                    reports[(item.id, run)] = report
        finally:
            self._backend_handler.close()

        if not accumulator.sessions:
            self._logger.error('Bench failed: no session completed')
            return EXIT_BACKEND_FAILURE

        # failed runs are graded incorrect
        per_question_runs = OrderedDict(
            (item.id, [reports[(item.id, run)] is not None and bool(reports[(item.id, run)].correct)
                       for run in range(runs)]) for item in items)
        score = pass_at_1(per_question_runs)
        rows = self._report_helper.activation_rows(accumulator.sessions, {config.label: score})

        results_out = getattr(options, 'results_out', None)
        if results_out:
            with io.open(results_out, 'w', encoding='utf-8') as results_file:
                for item in items:
                    results_file.write(json.dumps(self._question_result(item, runs, reports),
                                                  sort_keys=True, ensure_ascii=False) + '\n')
        self._write('pass@1: {:.4f}'.format(score))
        self._write(self._report_helper.activation_table(rows))
        if getattr(options, 'json_out', None):
            failures = accumulator.failures
            self._write_json(options.json_out, OrderedDict([
                ('pass_at_1', score),
                ('questions', len(items)),
                ('runs', runs),
                ('failed_runs', sum(len(errors) for errors in failures.values())),
                ('activation', self._report_helper.activation_json(rows)),
            ]))
        self._logger.info('Bench finished, pass@1 {:.4f}'.format(score))
        return EXIT_OK

    def _question_result(self, item, runs, reports):
        run_results = []
        for run in range(runs):
            report = reports.get((item.id, run))
            if report is None:
                run_results.append({'run': run, 'error': True})
            else:
                run_results.append(dict(self._report_helper.report_to_dict(report), run=run))
        correct = [result.get('correct') is True for result in run_results]
        return {'id': item.id, 'expected': item.answer, 'runs': run_results,
                'pass_at_1': sum(correct) / float(len(correct))}

    def cmd_replay(self, trace_paths, options):
        """
        Rebuild sessions from traces, re-executing through replay backends when the trace carries its calls
        :return: exit code, input error when a replay diverges from its trace
        :rtype: int
        """
        cost_model = load_cost_model(getattr(options, 'cost_model', None))
        sessions = []
        mismatches = 0
        for trace_path in trace_paths:
            trace = read_trace(trace_path)
            session = records_to_session(trace)
            if trace.replayable:
                replayed = self._orchestrator.run(session.question, session.config,
                                                  ReplayBackend.from_trace(trace, Origin.SRM, self._logger),
                                                  ReplayBackend.from_trace(trace, Origin.LRM, self._logger))
                if session_to_records(replayed) != session_to_records(session):
                    mismatches += 1
                    self._logger.warning('Replay of {} diverges from the recorded trace'.format(trace_path))
                    self._write('{}: replay MISMATCH'.format(trace_path))
            else:
                self._logger.debug('{} carries no calls or summary, reporting records only'.format(trace_path))
            sessions.append(session)
            report = build_report(session, cost_model)
            self._write('== {}'.format(trace_path))
            self._write(self._report_helper.run_summary(report))

        rows = self._report_helper.activation_rows(sessions)
        self._write(self._report_helper.activation_table(rows))
        if getattr(options, 'json_out', None):
            self._write_json(options.json_out, OrderedDict([
                ('traces', len(trace_paths)),
                ('mismatches', mismatches),
                ('activation', self._report_helper.activation_json(rows)),
            ]))
        return EXIT_INPUT_ERROR if mismatches else EXIT_OK

    def cmd_report(self, trace_paths, options):
        """
        Trigger activation table grouped by rho-n-m, from traces only
        :rtype: int
        """
        sessions = [records_to_session(read_trace(trace_path)) for trace_path in trace_paths]
        rows = self._report_helper.activation_rows(sessions)
        self._write(self._report_helper.activation_table(rows))
        if getattr(options, 'json_out', None):
            self._write_json(options.json_out, self._report_helper.activation_json(rows))
        return EXIT_OK
