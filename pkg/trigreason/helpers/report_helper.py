#!/usr/bin/python
# -*- coding: utf-8 -*-
from collections import OrderedDict

from trigreason.metrics import trigger_activation_report

ACTIVATION_HEADER = ('Config (rho-n-m)', 'Cognitive Offload (%)', 'Strategic Priming (%)',
                     'Intervention Request (%)', 'Total Trigger (%)', 'ACC')


class ReportHelper(object):
    """
    Text and JSON renderings of session reports and trigger activation tables
    """

    def __init__(self, logger):
        self._logger = logger

    @staticmethod
    def group_by_label(sessions):
        """
        :rtype: collections.OrderedDict
        """
        groups = OrderedDict()
        for session in sessions:
            groups.setdefault(session.config.label, []).append(session)
        return OrderedDict((label, groups[label]) for label in sorted(groups))

    def activation_rows(self, sessions, accuracy_by_label=None):
        """
        One activation row per config label
        :param accuracy_by_label: {'0.85-20-1': 0.296}
        :rtype: list[trigreason.entities.benchmark_entities.ActivationRow]
        """
        rows = []
        for label, group in self.group_by_label(sessions).items():
            accuracy = (accuracy_by_label or {}).get(label)
            rows.append(trigger_activation_report(group, label=label, accuracy=accuracy))
            self._logger.debug('Activation row {0}: {1} sessions'.format(label, len(group)))
        return rows

    @staticmethod
    def activation_table(rows):
        """
        :rtype: str
        """
        widths = [max(len(ACTIVATION_HEADER[0]), max([len(row.label) for row in rows] or [0]))] + \
                 [len(title) for title in ACTIVATION_HEADER[1:]]
        lines = [' | '.join(title.ljust(width) for title, width in zip(ACTIVATION_HEADER, widths))]
        lines.append('-+-'.join('-' * width for width in widths))
        for row in rows:
            accuracy = '-' if row.accuracy is None else '{:.2f}'.format(100.0 * row.accuracy)
            cells = [row.label] + ['{:.2f}'.format(value) for value in
                                   (row.cognitive_offload_pct, row.strategic_priming_pct,
                                    row.intervention_request_pct, row.total_pct)] + [accuracy]
            lines.append(' | '.join(cell.ljust(width) for cell, width in zip(cells, widths)))
        return '\n'.join(lines)

    @staticmethod
    def activation_json(rows):
        """
        :rtype: dict
        """
        result = OrderedDict()
        for row in rows:
            result[row.label] = OrderedDict([
                ('cognitive_offload_pct', round(row.cognitive_offload_pct, 2)),
                ('strategic_priming_pct', round(row.strategic_priming_pct, 2)),
                ('intervention_request_pct', round(row.intervention_request_pct, 2)),
                ('total_pct', round(row.total_pct, 2)),
                ('accuracy', row.accuracy),
                ('steps', row.steps),
            ])
        return result

    @staticmethod
    def report_to_dict(report):
        """
        :type report: trigreason.entities.session_entities.SessionReport
        :rtype: dict
        """
        return OrderedDict([
            ('answer', report.answer),
            ('correct', report.correct),
            ('config', report.config_label),
            ('srm_tokens', report.srm_tokens),
            ('lrm_tokens', report.lrm_tokens),
            ('wasted_draft_tokens', report.wasted_draft_tokens),
            ('smt_percentage', report.smt_percentage),
            ('trigger_counts', dict(report.trigger_counts)),
            ('step_counts', dict(report.step_counts)),
            ('lrm_calls', report.lrm_calls),
            ('est_latency', report.est_latency),
            ('est_cost', report.est_cost),
        ])

    @staticmethod
    def run_summary(report):
        """
        :rtype: str
        """
        triggers = ', '.join('{0}: {1}'.format(kind, count) for kind, count in report.trigger_counts.items())
        steps = ', '.join('{0}: {1}'.format(origin, count) for origin, count in report.step_counts.items())
        return '\n'.join([
            'Answer: {}'.format(report.answer if report.answer is not None else 'absent'),
            'Config: {}'.format(report.config_label),
            'SMT: {:.2f}%'.format(100.0 * report.smt_percentage),
            'Tokens: SRM {0}, LRM {1}, discarded drafts {2}'.format(report.srm_tokens, report.lrm_tokens,
                                                                   report.wasted_draft_tokens),
            'Steps: {}'.format(steps),
            'Triggers: {}'.format(triggers),
            'LRM calls: {}'.format(report.lrm_calls),
            'Estimated latency: {:.3f} s'.format(report.est_latency),
            'Estimated cost: {:.6f}'.format(report.est_cost),
        ])
