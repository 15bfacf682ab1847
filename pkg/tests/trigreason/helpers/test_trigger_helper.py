import math
import random
from unittest import TestCase

from trigreason.entities.session_entities import InterventionState
from trigreason.entities.token_entities import TokenSample
from trigreason.exceptions import DomainError, EmptyStep
from trigreason.helpers.lexicon_helper import HesitationLexicon
from trigreason.helpers.trigger_helper import cognitive_trigger, detect_hesitation, intervention_trigger, \
    is_priming, low_ppl_ratio, record_hesitation, token_perplexity


def _tokens(logprobs):
    return [TokenSample('t', logprob) for logprob in logprobs]


class TestTokenPerplexity(TestCase):
    def test_certain_token(self):
        self.assertEqual(token_perplexity(0.0), 1.0)

    def test_known_values(self):
        self.assertAlmostEqual(token_perplexity(-0.6931471805599453), 2.0, delta=1e-12)
        self.assertAlmostEqual(token_perplexity(-4.605170185988091), 100.0, delta=1e-9)

    def test_strictly_decreasing(self):
        values = [token_perplexity(-0.1 * step) for step in range(50)]
        self.assertEqual(values, sorted(values))
        self.assertEqual(len(set(values)), len(values))

    def test_domain_errors(self):
        for logprob in (0.1, float('inf'), float('-inf'), float('nan'), None):
            with self.assertRaises(DomainError):
                token_perplexity(logprob)


class TestLowPplRatio(TestCase):
    def test_nine_of_ten(self):
        logprobs = [-0.01] * 9 + [-2.0]
        self.assertAlmostEqual(low_ppl_ratio(_tokens(logprobs), 1.05), 0.9)

    def test_equality_is_not_below(self):
        tau = 1.05
        self.assertEqual(low_ppl_ratio(_tokens([-math.log(tau)] * 4), token_perplexity(-math.log(tau))), 0.0)

    def test_empty_step(self):
        with self.assertRaises(EmptyStep):
            low_ppl_ratio([], 1.05)

    def test_matches_direct_count_on_random_inputs(self):
        rng = random.Random(1234)
        for _ in range(10000):
            logprobs = [-rng.expovariate(4.0) for _ in range(rng.randint(1, 12))]
            tau = rng.uniform(1.0, 1.5)
            expected = sum(1 for logprob in logprobs if math.exp(-logprob) < tau) / float(len(logprobs))
            ratio = low_ppl_ratio(_tokens(logprobs), tau)
            self.assertEqual(ratio, expected)
            self.assertTrue(0.0 <= ratio <= 1.0)
            self.assertLessEqual(ratio, low_ppl_ratio(_tokens(logprobs), tau + 0.1))

    def test_overconfident_share_of_constructed_corpus(self):
        rng = random.Random(7)
        steps = [[-0.01] * 9 + [-1.0]] * 381 + [[-0.01] * 5 + [-1.0] * 5] * 619
        rng.shuffle(steps)
        over = sum(1 for logprobs in steps if cognitive_trigger(low_ppl_ratio(_tokens(logprobs), 1.05), 0.85))
        self.assertAlmostEqual(100.0 * over / len(steps), 38.1, delta=0.5)


class TestCognitiveTrigger(TestCase):
    def test_fires_above_rho(self):
        self.assertTrue(cognitive_trigger(0.90, 0.85))

    def test_strict_at_rho(self):
        self.assertFalse(cognitive_trigger(0.85, 0.85))

    def test_rho_one_disables(self):
        self.assertFalse(cognitive_trigger(1.0, 1.0))

    def test_monotone_in_rho(self):
        rng = random.Random(99)
        for _ in range(2000):
            r_s = rng.random()
            rho_high = rng.uniform(0.01, 1.0)
            rho_low = rng.uniform(0.001, rho_high)
            if cognitive_trigger(r_s, rho_high):
                self.assertTrue(cognitive_trigger(r_s, rho_low))

    def test_range_checks(self):
        with self.assertRaises(DomainError):
            cognitive_trigger(1.2, 0.85)
        with self.assertRaises(DomainError):
            cognitive_trigger(0.5, 0.0)


class TestDetectHesitation(TestCase):
    def setUp(self):
        self._lexicon = HesitationLexicon()

    def test_examples(self):
        self.assertTrue(detect_hesitation('Wait, let me recompute', self._lexicon))
        self.assertFalse(detect_hesitation('The waiter brings soup', self._lexicon))
        self.assertTrue(detect_hesitation("I'M NOT ENTIRELY SURE about this", self._lexicon))

    def test_case_invariance(self):
        for text in ('Hmm, so', 'alternatively we can', 'The answer is 4.', 'on the Other hand'):
            self.assertEqual(detect_hesitation(text, self._lexicon), detect_hesitation(text.upper(), self._lexicon))
            self.assertEqual(detect_hesitation(text, self._lexicon), detect_hesitation(text.lower(), self._lexicon))

    def test_empty_lexicon_never_matches(self):
        self.assertFalse(detect_hesitation('wait wait wait', HesitationLexicon(())))


class TestInterventionTrigger(TestCase):
    def test_fires_on_full_window(self):
        state = InterventionState(recent_h=(True, True), recent_steps=(1, 2))
        new_state, fired = intervention_trigger(state, True, 3, 2, 3)
        self.assertTrue(fired)
        self.assertEqual(new_state.rectify_steps_remaining, 2)
        self.assertEqual(new_state.recent_h, ())

    def test_broken_run(self):
        state = InterventionState(recent_h=(True, False), recent_steps=(1, 2))
        new_state, fired = intervention_trigger(state, True, 3, 1, 3)
        self.assertFalse(fired)
        self.assertEqual(new_state.recent_h, (True, False, True))

    def test_degenerate_window(self):
        state = InterventionState(recent_h=(False, False))
        _, fired = intervention_trigger(state, True, 1, 1)
        self.assertTrue(fired)

    def test_ring_keeps_last_k(self):
        state = InterventionState()
        for index, flag in enumerate((True, False, True, False, True), 1):
            state, _ = intervention_trigger(state, flag, 2, 1, index)
        self.assertEqual(state.recent_h, (False, True))
        self.assertEqual(state.recent_steps, (4, 5))

    def test_no_refire_within_k_steps(self):
        state = InterventionState()
        fired_at = []
        for index in range(1, 20):
            state, fired = intervention_trigger(state, True, 3, 1, index)
            if fired:
                fired_at.append(index)
        self.assertEqual(fired_at, [3, 6, 9, 12, 15, 18])

    def test_record_hesitation_does_not_fire(self):
        state = record_hesitation(InterventionState(rectify_steps_remaining=1), True, 1, 4)
        self.assertEqual(state.recent_h, (True,))
        self.assertEqual(state.recent_steps, (4,))
        self.assertEqual(state.rectify_steps_remaining, 1)

    def test_invalid_k(self):
        with self.assertRaises(DomainError):
            intervention_trigger(InterventionState(), True, 0, 1)


class TestIsPriming(TestCase):
    def test_boundaries(self):
        self.assertTrue(is_priming(1, 20))
        self.assertTrue(is_priming(20, 20))
        self.assertFalse(is_priming(21, 20))
        self.assertFalse(is_priming(1, 0))

    def test_invalid_index(self):
        with self.assertRaises(DomainError):
            is_priming(0, 20)
