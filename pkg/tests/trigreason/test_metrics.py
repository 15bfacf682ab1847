import os
import threading
from dataclasses import replace
from unittest import TestCase

from mock import Mock

from tests.trigreason.scripted_steps import confident_srm, lrm_step, plain_srm, scripted, srm_step
from trigreason.entities.backend_entities import StepResponse
from trigreason.entities.benchmark_entities import AnswerKind
from trigreason.entities.config_entities import CostModel, SessionConfig
from trigreason.entities.session_entities import Session
from trigreason.entities.step_entities import CallPurpose, CallRecord, ReasoningStep, TriggerEvent, TriggerKind
from trigreason.entities.token_entities import FinishReason, Origin
from trigreason.exceptions import EmptyInput, EmptySession
from trigreason.helpers.config_helper import load_cost_model, validate_config
from trigreason.metrics import MetricsAccumulator, build_report, estimate_cost, estimate_latency, extract_answer, \
    grade, lrm_calls, pass_at_1, smt_percentage, token_totals, trigger_activation_report, trigger_counts
from trigreason.orchestrator import SessionOrchestrator

COST_MODEL_PATH = os.path.join(os.path.dirname(__file__), '..', '..', 'cost_model_example.yml')


def _session(**kwargs):
    return Session(question='Q', config=validate_config(SessionConfig(**kwargs)))


def _step(index, origin, count, draft=None):
    return ReasoningStep(index=index, origin=origin, tokens=(), completion_tokens=count, draft=draft)


def _call(origin, purpose, prompt_tokens, completion_tokens, step_index=1):
    return CallRecord(origin, purpose, step_index,
                      StepResponse(tokens=(), finish_reason=FinishReason.STOP, prompt_tokens=prompt_tokens,
                                   completion_tokens=completion_tokens))


def _session_with_steps(srm_tokens, lrm_tokens):
    session = _session()
    session.steps = [_step(1, Origin.SRM, srm_tokens), _step(2, Origin.LRM, lrm_tokens)]
    return session


class TestSmtPercentage(TestCase):
    def test_ratio(self):
        self.assertAlmostEqual(smt_percentage(_session_with_steps(600, 400)), 0.6)
        self.assertAlmostEqual(smt_percentage(_session_with_steps(594, 406)), 0.594)
        self.assertAlmostEqual(smt_percentage(_session_with_steps(6137, 3863)), 0.6137)

    def test_discarded_drafts_are_not_counted(self):
        session = _session()
        draft = _step(2, Origin.SRM, 50)
        session.steps = [_step(1, Origin.SRM, 30), _step(2, Origin.LRM, 10, draft=draft)]
        self.assertAlmostEqual(smt_percentage(session), 0.75)
        self.assertEqual(token_totals(session), (30, 10, 50))

    def test_single_model_extremes(self):
        session = _session()
        session.steps = [_step(1, Origin.LRM, 7)]
        self.assertEqual(smt_percentage(session), 0.0)
        session.steps = [_step(1, Origin.SRM, 7)]
        self.assertEqual(smt_percentage(session), 1.0)

    def test_empty_session(self):
        with self.assertRaises(EmptySession):
            smt_percentage(_session())
        session = _session()
        session.steps = [_step(1, Origin.SRM, 0)]
        with self.assertRaises(EmptySession):
            smt_percentage(session)


class TestTriggerActivation(TestCase):
    def _session(self, steps, cognitive, priming, intervention, **kwargs):
        session = _session(**kwargs)
        session.steps = [_step(index, Origin.SRM, 1) for index in range(1, steps + 1)]
        for kind, count in ((TriggerKind.COGNITIVE_OFFLOAD, cognitive), (TriggerKind.STRATEGIC_PRIMING, priming),
                            (TriggerKind.INTERVENTION_REQUEST, intervention)):
            session.events.extend(TriggerEvent(kind, index) for index in range(1, count + 1))
        return session

    def test_large_corpus_row(self):
        row = trigger_activation_report([self._session(10000, 2595, 831, 473)])
        self.assertAlmostEqual(row.cognitive_offload_pct, 25.95)
        self.assertAlmostEqual(row.strategic_priming_pct, 8.31)
        self.assertAlmostEqual(row.intervention_request_pct, 4.73)
        self.assertAlmostEqual(row.total_pct, 38.99)
        self.assertEqual(row.steps, 10000)

    def test_percentages_pool_steps_across_sessions(self):
        sessions = [self._session(60, 20, 4, 3), self._session(40, 6, 4, 2)]
        row = trigger_activation_report(sessions, accuracy=0.5)
        self.assertAlmostEqual(row.strategic_priming_pct, 8.0)
        self.assertAlmostEqual(row.cognitive_offload_pct, 26.0)
        self.assertAlmostEqual(row.intervention_request_pct, 5.0)
        self.assertAlmostEqual(row.total_pct, 39.0)
        self.assertEqual(row.accuracy, 0.5)

    def test_no_events(self):
        row = trigger_activation_report([self._session(12, 0, 0, 0)])
        self.assertEqual((row.cognitive_offload_pct, row.strategic_priming_pct, row.intervention_request_pct,
                          row.total_pct), (0.0, 0.0, 0.0, 0.0))

    def test_label_defaults_to_rho_n_m(self):
        row = trigger_activation_report([self._session(4, 1, 1, 0, rho=0.85, n=20, m=0)])
        self.assertEqual(row.label, '0.85-20-0')
        self.assertEqual(trigger_activation_report([], label='x').steps, 0)

    def test_trigger_counts(self):
        counts = trigger_counts(self._session(10, 2, 1, 3))
        self.assertEqual(list(counts.items()), [('StrategicPriming', 1), ('CognitiveOffload', 2),
                                                ('InterventionRequest', 3)])


class TestCostAndLatency(TestCase):
    def test_cost_per_call(self):
        session = _session()
        session.calls = [_call(Origin.LRM, CallPurpose.STEP, 1000, 500)]
        model = CostModel(lrm_input_price=1e-6, lrm_output_price=3e-6)
        self.assertAlmostEqual(estimate_cost(session, model), 0.0025)

    def test_cost_uses_origin_prices(self):
        session = _session()
        session.calls = [_call(Origin.SRM, CallPurpose.STEP, 100, 10), _call(Origin.LRM, CallPurpose.STEP, 100, 10)]
        model = CostModel(srm_input_price=1.0, srm_output_price=2.0, lrm_input_price=10.0, lrm_output_price=20.0)
        self.assertAlmostEqual(estimate_cost(session, model), 120.0 + 1200.0)

    def test_srm_latency(self):
        session = _session()
        session.calls = [_call(Origin.SRM, CallPurpose.STEP, 0, 1000)]
        self.assertAlmostEqual(estimate_latency(session, CostModel(srm_token_latency=0.02)), 20.0)

    def test_lrm_latency_includes_round_trip(self):
        session = _session()
        session.calls = [_call(Origin.LRM, CallPurpose.STEP, 0, 100)]
        model = CostModel(rtt_latency=0.5, lrm_token_latency=0.01)
        self.assertAlmostEqual(estimate_latency(session, model), 1.5)

    def test_round_trips_scale_with_lrm_calls(self):
        session = _session()
        session.calls = [_call(Origin.LRM, CallPurpose.STEP, 0, 10, index) for index in range(1, 8)] + \
                        [_call(Origin.SRM, CallPurpose.STEP, 0, 10, index) for index in range(8, 12)]
        tokens_only = estimate_latency(session, CostModel(srm_token_latency=0.1, lrm_token_latency=0.2))
        with_rtt = estimate_latency(session, CostModel(srm_token_latency=0.1, lrm_token_latency=0.2,
                                                       rtt_latency=0.75))
        self.assertEqual(lrm_calls(session), 7)
        self.assertAlmostEqual(with_rtt - tokens_only, 7 * 0.75)

    def test_judge_calls_can_be_excluded(self):
        session = _session()
        session.calls = [_call(Origin.LRM, CallPurpose.JUDGE, 100, 1), _call(Origin.LRM, CallPurpose.STEP, 100, 5)]
        counted = CostModel(lrm_input_price=1.0, rtt_latency=1.0)
        excluded = CostModel(lrm_input_price=1.0, rtt_latency=1.0, count_judge_calls=False)
        self.assertAlmostEqual(estimate_cost(session, counted), 200.0)
        self.assertAlmostEqual(estimate_cost(session, excluded), 100.0)
        self.assertAlmostEqual(estimate_latency(session, counted), 2.0)
        self.assertAlmostEqual(estimate_latency(session, excluded), 1.0)

    def test_zero_model(self):
        session = _session()
        session.calls = [_call(Origin.LRM, CallPurpose.STEP, 1000, 500)]
        self.assertEqual(estimate_cost(session, CostModel()), 0.0)
        self.assertEqual(estimate_latency(session, CostModel()), 0.0)


class TestTriggeredAgainstPolling(TestCase):
    """
    Same trajectory under both strategies: the SRM writes every step but 3 and 7, where the LRM takes over.
    TrigReason gets there by cognitive offload, SpecReason by judging all ten drafts.
    """
    OFFLOADED = (3, 7)

    def setUp(self):
        self._instance = SessionOrchestrator(Mock())
        self._cost_model = load_cost_model(COST_MODEL_PATH)

    def _srm(self):
        drafts = [confident_srm() if index in self.OFFLOADED else plain_srm() for index in range(1, 11)]
        return scripted(drafts + [srm_step(['\\boxed{7}'])])

    def _run_pair(self):
        trig = self._instance.run_trigreason('Q', validate_config(SessionConfig(n=0, budget=40)), self._srm(),
                                             scripted([lrm_step([' y'] * 4)] * len(self.OFFLOADED)))
        polling = []
        for index in range(1, 11):
            if index in self.OFFLOADED:
                polling.extend([lrm_step(['2']), lrm_step([' y'] * 4)])
            else:
                polling.append(lrm_step(['9']))
        spec = self._instance.run_specreason(
            'Q', validate_config(SessionConfig(strategy='specreason', n=0, budget=40)), self._srm(),
            scripted(polling))
        return trig, spec

    def test_same_trajectory(self):
        trig, spec = self._run_pair()
        self.assertEqual(token_totals(trig), token_totals(spec))
        self.assertEqual(token_totals(trig), (32, 8, 8))
        self.assertEqual([step.origin for step in trig.steps], [step.origin for step in spec.steps])
        self.assertEqual((lrm_calls(trig), lrm_calls(spec)), (2, 12))
        self.assertEqual(trig.answer_text, spec.answer_text)

    def test_triggered_is_strictly_cheaper(self):
        trig, spec = self._run_pair()
        self.assertLess(estimate_cost(trig, self._cost_model), estimate_cost(spec, self._cost_model))
        self.assertLess(estimate_latency(trig, self._cost_model), estimate_latency(spec, self._cost_model))

    def test_latency_gap_is_extra_round_trips(self):
        trig, spec = self._run_pair()
        extra_calls = lrm_calls(spec) - lrm_calls(trig)
        judge_tokens = sum(call.response.completion_tokens for call in spec.calls
                           if call.purpose == CallPurpose.JUDGE)
        self.assertEqual((extra_calls, judge_tokens), (10, 10))
        # judge replies are LRM output tokens, each priced at lrm_token_latency on top of the round trip
        gap = estimate_latency(spec, self._cost_model) - estimate_latency(trig, self._cost_model)
        self.assertAlmostEqual(gap, extra_calls * self._cost_model.rtt_latency +
                               judge_tokens * self._cost_model.lrm_token_latency)
        self.assertAlmostEqual(gap, 5.3)
        round_trips_only = replace(self._cost_model, lrm_token_latency=0.0)
        self.assertAlmostEqual(estimate_latency(spec, round_trips_only) - estimate_latency(trig, round_trips_only),
                               extra_calls * self._cost_model.rtt_latency)

    def test_uncounted_judges_close_the_gap(self):
        trig, spec = self._run_pair()
        without_judges = replace(self._cost_model, count_judge_calls=False)
        self.assertAlmostEqual(estimate_cost(trig, without_judges), estimate_cost(spec, without_judges))
        self.assertAlmostEqual(estimate_latency(trig, without_judges), estimate_latency(spec, without_judges))


class TestAnswers(TestCase):
    def test_boxed_integer(self):
        self.assertEqual(extract_answer('so the answer is \\boxed{42}.', AnswerKind.INTEGER_BOXED), '42')
        self.assertEqual(extract_answer('\\boxed{12} or rather \\boxed{7}', AnswerKind.INTEGER_BOXED), '7')
        self.assertEqual(extract_answer('$\\boxed{007}$', AnswerKind.INTEGER_BOXED), '7')
        self.assertEqual(extract_answer('\\boxed{ 1,000 }', AnswerKind.INTEGER_BOXED), None)
        self.assertEqual(extract_answer('\\boxed{\\frac{1}{2}}', AnswerKind.INTEGER_BOXED), None)
        self.assertEqual(extract_answer('\\boxed{5} then \\boxed{x}', AnswerKind.INTEGER_BOXED), '5')
        self.assertEqual(extract_answer('the answer is 42', AnswerKind.INTEGER_BOXED), None)
        self.assertEqual(extract_answer(None, AnswerKind.INTEGER_BOXED), None)

    def test_multiple_choice(self):
        self.assertEqual(extract_answer('The answer is (B).', AnswerKind.MULTIPLE_CHOICE), 'B')
        self.assertEqual(extract_answer('Answer: D', AnswerKind.MULTIPLE_CHOICE), 'D')
        self.assertEqual(extract_answer('A looks right but C is correct', AnswerKind.MULTIPLE_CHOICE), 'C')
        self.assertEqual(extract_answer('none of these', AnswerKind.MULTIPLE_CHOICE), None)

    def test_grade(self):
        self.assertTrue(grade('7', '007', AnswerKind.INTEGER_BOXED))
        self.assertFalse(grade('13', '12', AnswerKind.INTEGER_BOXED))
        self.assertFalse(grade(None, '12', AnswerKind.INTEGER_BOXED))
        self.assertFalse(grade('12', 'twelve', AnswerKind.INTEGER_BOXED))
        self.assertTrue(grade('b', 'B', AnswerKind.MULTIPLE_CHOICE))
        self.assertFalse(grade('A', None, AnswerKind.MULTIPLE_CHOICE))


class TestPassAt1(TestCase):
    def test_mean_of_question_means(self):
        self.assertAlmostEqual(pass_at_1({'a': [True, False], 'b': [True, True, True, True]}), 0.75)

    def test_benchmark_scale(self):
        runs = dict(('q{:03d}'.format(question), [question < 37] * 16) for question in range(125))
        self.assertAlmostEqual(pass_at_1(runs), 0.296)

    def test_empty_input(self):
        with self.assertRaises(EmptyInput):
            pass_at_1({})
        with self.assertRaises(EmptyInput):
            pass_at_1({'a': []})


class TestMetricsAccumulator(TestCase):
    def setUp(self):
        self._instance = MetricsAccumulator()

    def test_concurrent_adds(self):
        session = _session_with_steps(1, 1)

        def worker(question_id):
            for run in range(50):
                self._instance.add(question_id, session, run % 2 == 0)

        threads = [threading.Thread(target=worker, args=('q{}'.format(index),)) for index in range(4)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        self.assertEqual(len(self._instance.sessions), 200)
        self.assertEqual(sorted(self._instance.per_question_runs), ['q0', 'q1', 'q2', 'q3'])
        self.assertAlmostEqual(self._instance.pass_at_1(), 0.5)

    def test_failures(self):
        error = EmptyInput('x', 'y')
        self._instance.add_failure('q1', error)
        self.assertEqual(self._instance.failures, {'q1': [error]})
        self.assertEqual(self._instance.sessions, [])


class TestBuildReport(TestCase):
    def test_report(self):
        session = _session()
        draft = _step(2, Origin.SRM, 4)
        session.steps = [_step(1, Origin.SRM, 3), _step(2, Origin.LRM, 2, draft=draft)]
        session.events = [TriggerEvent(TriggerKind.COGNITIVE_OFFLOAD, 2, 1.0)]
        session.calls = [_call(Origin.SRM, CallPurpose.STEP, 1, 3, 1), _call(Origin.SRM, CallPurpose.DRAFT, 4, 4, 2),
                         _call(Origin.LRM, CallPurpose.STEP, 4, 2, 2), _call(Origin.SRM, CallPurpose.ANSWER, 6, 4, 2)]
        session.answer_text = 'Final: \\boxed{7}'
        model = CostModel(rtt_latency=1.0, srm_token_latency=0.5, lrm_token_latency=0.25)

        report = build_report(session, model, expected='7')

        self.assertEqual(report.answer, '7')
        self.assertTrue(report.correct)
        self.assertEqual((report.srm_tokens, report.lrm_tokens, report.wasted_draft_tokens), (3, 2, 4))
        self.assertAlmostEqual(report.smt_percentage, 0.6)
        self.assertEqual(report.trigger_counts['CognitiveOffload'], 1)
        self.assertEqual(dict(report.step_counts), {'SRM': 1, 'LRM': 1})
        self.assertEqual(report.lrm_calls, 1)
        self.assertAlmostEqual(report.est_latency, (3 + 4 + 4) * 0.5 + 1.0 + 2 * 0.25)
        self.assertEqual(report.config_label, '0.85-20-1')

    def test_ungraded_without_reference(self):
        session = _session_with_steps(1, 1)
        session.answer_text = 'B'
        report = build_report(session, CostModel(), kind=AnswerKind.MULTIPLE_CHOICE)
        self.assertEqual(report.answer, 'B')
        self.assertIsNone(report.correct)

    def test_empty_session_reports_zero_share(self):
        report = build_report(_session(), CostModel(), expected='1')
        self.assertEqual(report.smt_percentage, 0.0)
        self.assertFalse(report.correct)
