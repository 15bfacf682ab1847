#!/usr/bin/python
# -*- coding: utf-8 -*-
from dataclasses import replace

import trigreason.command_templates.prompts as prompts
from trigreason.command_actions.step_actions import StepActions
from trigreason.entities.backend_entities import StepRequest
from trigreason.entities.config_entities import Strategy
from trigreason.entities.session_entities import FinishState, Session
from trigreason.entities.step_entities import CallPurpose, CallRecord, ReasoningStep, StepCause, TriggerEvent, \
    TriggerKind
from trigreason.entities.token_entities import FinishReason, Origin
from trigreason.exceptions import BackendException, UnparseableScore
from trigreason.helpers.lexicon_helper import HesitationLexicon
from trigreason.helpers.trigger_helper import cognitive_trigger, detect_hesitation, intervention_trigger, \
    is_priming, low_ppl_ratio, record_hesitation


def check_finished(step, used, config):
    """
    Termination after a completed step, marker > eos > budget
    :type step: ReasoningStep
    :param used: thinking tokens used so far, this step included
    :type config: trigreason.entities.config_entities.SessionConfig
    :rtype: FinishState
    """
    markers = config.finish_markers or ()
    if any(marker in step.text for marker in markers) or (step.stop_sequence and step.stop_sequence in markers):
        return FinishState.FINISHED_BY_MARKER
    # an empty completion would repeat forever on the same prefix
    if step.finish_reason == FinishReason.EOS or step.token_count == 0:
        return FinishState.FINISHED_BY_EOS
    if used >= config.budget:
        return FinishState.FINISHED_BY_BUDGET
    return FinishState.CONTINUE


class SessionOrchestrator(object):
    """
    Session state machines for the TrigReason, SpecReason, SRM-only and LRM-only strategies
    """

    def __init__(self, logger):
        """
        :type logger: logging.Logger
        """
        self._logger = logger

    def run(self, question, config, srm_client, lrm_client):
        """
        Run the strategy named by the config
        :type config: trigreason.entities.config_entities.SessionConfig
        :rtype: Session
        """
        if config.strategy == Strategy.TRIGREASON:
            return self.run_trigreason(question, config, srm_client, lrm_client)
        if config.strategy == Strategy.SPECREASON:
            return self.run_specreason(question, config, srm_client, lrm_client)
        if config.strategy == Strategy.SRM_ONLY:
            return self.run_single_model(question, config, srm_client, Origin.SRM)
        return self.run_single_model(question, config, lrm_client, Origin.LRM)

    def run_trigreason(self, question, config, srm_client, lrm_client):
        """
        Trigger-based collaboration: LRM priming for steps 1..n, then SRM drafts that the LRM regenerates on
        cognitive offload or during a rectification window opened by k consecutive hesitation steps
        :type question: str
        :type config: trigreason.entities.config_entities.SessionConfig
        :rtype: Session
        """
        session = Session(question=question, config=config)
        lexicon = HesitationLexicon(config.lexicon)
        srm = StepActions(srm_client, self._logger)
        lrm = StepActions(lrm_client, self._logger)
        clients = {Origin.SRM: srm, Origin.LRM: lrm}
        try:
            while not session.finished:
                index = session.next_index
                if is_priming(index, config.n):
                    step = self._model_step(session, lrm, Origin.LRM, index, lexicon, StepCause.PRIMING)
                    session.events.append(TriggerEvent(TriggerKind.STRATEGIC_PRIMING, index))
                    session.intervention = record_hesitation(session.intervention, step.hesitation, config.k, index)
                else:
                    step = self._trigreason_step(session, srm, lrm, index, lexicon)
                self._append(session, step)
            self._answer_phase(session, clients[config.answer_model], config.answer_model)
        except BackendException as e:
            e.partial_session = session
            raise
        return session

    def _trigreason_step(self, session, srm, lrm, index, lexicon):
        config = session.config
        state = session.intervention
        rectifying = state.rectify_steps_remaining > 0
        if rectifying and config.skip_draft_during_rectify:
            draft, draft_response, ratio = None, None, None
        else:
            draft, draft_response = self._draft(session, srm, index, lexicon)
            ratio = draft.low_ppl_ratio
        offload = ratio is not None and cognitive_trigger(ratio, config.rho)

        if not rectifying and not offload:
            session.calls.append(CallRecord(Origin.SRM, CallPurpose.STEP, index, draft_response))
            if config.m > 0:
                window = (state.recent_steps + (index,))[-config.k:]
                session.intervention, fired = intervention_trigger(state, draft.hesitation, config.k, config.m,
                                                                   index)
                if fired:
                    self._logger.debug('Step {0}: intervention request over steps {1}'.format(index, window))
                    session.events.append(TriggerEvent(TriggerKind.INTERVENTION_REQUEST, index, window))
            else:
                session.intervention = record_hesitation(state, draft.hesitation, config.k, index)
            return draft

        if draft_response is not None:
            session.calls.append(CallRecord(Origin.SRM, CallPurpose.DRAFT, index, draft_response))
        if offload:
            self._logger.debug('Step {0}: cognitive offload, ratio {1:.4f}'.format(index, ratio))
            session.events.append(TriggerEvent(TriggerKind.COGNITIVE_OFFLOAD, index, ratio))
            cause = StepCause.COGNITIVE_OFFLOAD
        else:
            cause = StepCause.RECTIFICATION
        step = self._model_step(session, lrm, Origin.LRM, index, lexicon, cause, draft=draft)
        remaining = state.rectify_steps_remaining
        if rectifying and not offload:
            remaining -= 1
        session.intervention = replace(record_hesitation(state, step.hesitation, config.k, index),
                                       rectify_steps_remaining=remaining)
        return step

    def run_specreason(self, question, config, srm_client, lrm_client):
        """
        Polling baseline: the LRM judges every SRM draft and regenerates the step below judge_threshold
        :rtype: Session
        """
        session = Session(question=question, config=config)
        lexicon = HesitationLexicon(config.lexicon)
        srm = StepActions(srm_client, self._logger)
        lrm = StepActions(lrm_client, self._logger)
        clients = {Origin.SRM: srm, Origin.LRM: lrm}
        try:
            while not session.finished:
                index = session.next_index
                draft, draft_response = self._draft(session, srm, index, lexicon)
                judge_call = None
                accepted = True
                if config.judge_threshold > 0 and draft.tokens:
                    try:
                        score, judge_response = lrm.judge_step(
                            self._context(session), draft.text, template_text=config.judge_template,
                            max_tokens=config.judge_max_tokens, temperature=config.temperature, top_p=config.top_p,
                            prompt_tokens_hint=self._prompt_tokens_hint(session) + draft.token_count)
                    except UnparseableScore as e:
                        self._logger.warning('Step {0}: {1}, rejecting the draft'.format(index, e.message))
                        score, judge_response = None, e.response
                    judge_call = CallRecord(Origin.LRM, CallPurpose.JUDGE, index, judge_response)
                    session.judge_scores.append(score)
                    accepted = score is not None and score >= config.judge_threshold

                purpose = CallPurpose.STEP if accepted else CallPurpose.DRAFT
                session.calls.append(CallRecord(Origin.SRM, purpose, index, draft_response))
                if judge_call is not None:
                    session.calls.append(judge_call)
                if accepted:
                    step = draft
                else:
                    step = self._model_step(session, lrm, Origin.LRM, index, lexicon, StepCause.JUDGE_REJECTION,
                                            draft=draft)
                self._append(session, step)
            self._answer_phase(session, clients[config.answer_model], config.answer_model)
        except BackendException as e:
            e.partial_session = session
            raise
        return session

    def run_single_model(self, question, config, client, origin):
        """
        Baseline with every step from one model, the same model writes the answer
        :type origin: Origin
        :rtype: Session
        """
        session = Session(question=question, config=config)
        lexicon = HesitationLexicon(config.lexicon)
        actions = StepActions(client, self._logger)
        cause = StepCause.BASELINE if origin == Origin.LRM else None
        try:
            while not session.finished:
                index = session.next_index
                if origin == Origin.SRM:
                    step, response = self._draft(session, actions, index, lexicon)
                    session.calls.append(CallRecord(Origin.SRM, CallPurpose.STEP, index, response))
                else:
                    step = self._model_step(session, actions, origin, index, lexicon, cause)
                self._append(session, step)
            self._answer_phase(session, actions, origin)
        except BackendException as e:
            e.partial_session = session
            raise
        return session

    @staticmethod
    def _context(session):
        return prompts.step_context(session.question, [step.text for step in session.steps],
                                    session.config.step_delimiter)

    @staticmethod
    def _prompt_tokens_hint(session):
        # offline backends report this as the prompt length, live ones report usage
        return len(session.question.split()) + session.thinking_tokens_used

    def _request(self, session, want_logprobs):
        config = session.config
        remaining = config.budget - session.thinking_tokens_used
        return StepRequest(context=self._context(session),
                           stop=(config.step_delimiter,) + tuple(config.finish_markers),
                           max_tokens=max(1, min(config.max_step_tokens, remaining)),
                           temperature=config.temperature, top_p=config.top_p, want_logprobs=want_logprobs,
                           prompt_tokens_hint=self._prompt_tokens_hint(session))

    def _draft(self, session, srm, index, lexicon):
        """
        SRM step with its low-perplexity ratio, the caller records the call once the draft's fate is known
        :rtype: tuple[ReasoningStep, trigreason.entities.backend_entities.StepResponse]
        """
        response = srm.generate_step(self._request(session, want_logprobs=True))
        content = [token for token in response.tokens if not token.special]
        # no content tokens, no overconfidence evidence
        ratio = low_ppl_ratio(content, session.config.tau) if content else 0.0
        step = ReasoningStep(index=index, origin=Origin.SRM, tokens=response.tokens, low_ppl_ratio=ratio,
                             hesitation=detect_hesitation(response.text, lexicon),
                             finish_reason=response.finish_reason, stop_sequence=response.stop_sequence,
                             completion_tokens=response.completion_tokens or None)
        return step, response

    def _model_step(self, session, actions, origin, index, lexicon, cause, draft=None):
        response = actions.generate_step(self._request(session, want_logprobs=origin == Origin.SRM))
        session.calls.append(CallRecord(origin, CallPurpose.STEP, index, response))
        if draft is not None:
            draft = replace(draft, discarded_draft=True)
        step = ReasoningStep(index=index, origin=origin, tokens=response.tokens,
                             hesitation=detect_hesitation(response.text, lexicon), draft=draft, cause=cause,
                             finish_reason=response.finish_reason, stop_sequence=response.stop_sequence,
                             completion_tokens=response.completion_tokens or None)
        if origin == Origin.SRM:
            content = [token for token in response.tokens if not token.special]
            step = replace(step, low_ppl_ratio=low_ppl_ratio(content, session.config.tau) if content else 0.0)
        return step

    def _append(self, session, step):
        session.steps.append(step)
        session.thinking_tokens_used += step.token_count
        finish_state = check_finished(step, session.thinking_tokens_used, session.config)
        self._logger.debug('Step {0}: {1} {2} tokens, {3}'.format(step.index, step.origin.value, step.token_count,
                                                                  finish_state.value))
        if finish_state != FinishState.CONTINUE:
            session.finished = True
            session.finish_state = finish_state

    def _answer_phase(self, session, actions, origin):
        config = session.config
        response = actions.answer(self._context(session), config.answer_suffix, config.step_delimiter,
                                  max_tokens=config.answer_max_tokens, temperature=config.temperature,
                                  top_p=config.top_p, prompt_tokens_hint=self._prompt_tokens_hint(session))
        session.calls.append(CallRecord(origin, CallPurpose.ANSWER, len(session.steps), response))
        session.answer_text = response.text.strip() or None
        if session.answer_text is None:
            outcome = 'BudgetExhaustedWithoutAnswer' if session.finish_state == FinishState.FINISHED_BY_BUDGET \
                else 'answer absent'
            self._logger.warning('Session finished {0}: {1}'.format(session.finish_state.value, outcome))
        return session
