"""
Nipype interface to judge a simulation report against the acceptance checks
- TVD between empirical and exact joint within 4 sqrt(K/N)
- chi-square p-value above a floor
- no outcome pair observed that the exact distribution forbids
- per-round acceptance rate within 5 sigma of 1/2

DATES : 2026-10-17 From scratch
"""

import json
import os
from pathlib import Path

from nipype import logging
from nipype.interfaces.base import (
    BaseInterface,
    BaseInterfaceInputSpec,
    traits,
    File,
    TraitedSpec,
)

from ..stats import binomial_sigma

LOGGER = logging.getLogger('nipype.interface')


class VerdictInputSpec(BaseInterfaceInputSpec):

    report_json = File(
        desc='Simulation report (JSON)',
        exists=True,
        mandatory=True
    )

    fixture = traits.Str(
        '',
        usedefault=True,
        desc='Fixture label recorded in the verdict'
    )

    pvalue_min = traits.Float(
        1e-6,
        usedefault=True,
        desc='Smallest acceptable chi-square p-value'
    )


class VerdictOutputSpec(TraitedSpec):
    verdict_json = File(
        desc="Pass/fail verdict with individual checks (JSON)",
    )


class Verdict(BaseInterface):

    input_spec = VerdictInputSpec
    output_spec = VerdictOutputSpec

    def _run_interface(self, runtime):

        with open(self.inputs.report_json, 'r', encoding='utf-8') as fd:
            report = json.load(fd)

        # Binomial sigma of the per-round acceptance frequency
        total_rounds = report['n'] * report['mean_rounds']
        accept_sigma = float(binomial_sigma(0.5, total_rounds))

        checks = {
            'tvd': report['tvd'] <= report['tvd_bound'],
            'chi2_pvalue': report['chi2_pvalue'] > self.inputs.pvalue_min,
            'impossible_cells': not report['zero_cell_violation'],
            'accept_rate': abs(report['accept_rate'] - 0.5) <= 5.0 * accept_sigma,
        }

        verdict = {
            'fixture': self.inputs.fixture,
            'passed': all(checks.values()),
            'checks': checks,
            'tvd': report['tvd'],
            'tvd_bound': report['tvd_bound'],
            'chi2_pvalue': report['chi2_pvalue'],
            'accept_rate': report['accept_rate'],
            'mean_bits': report['mean_bits'],
        }

        if not verdict['passed']:
            failed = [name for name, ok in checks.items() if not ok]
            LOGGER.warning(f'* Fixture {self.inputs.fixture} failed checks: {", ".join(failed)}')

        with open(self._gen_outfile_name(), 'w', encoding='utf-8') as fd:
            json.dump(verdict, fd, sort_keys=True, indent=2)

        return runtime

    def _list_outputs(self):
        outputs = self._outputs().get()
        outputs["verdict_json"] = self._gen_outfile_name()
        return outputs

    @staticmethod
    def _gen_outfile_name():
        return str(Path(os.getcwd()) / 'verdict.json')
