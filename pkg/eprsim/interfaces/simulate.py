"""
Nipype interface to run a seeded Monte Carlo batch of the protocol for a POVM pair

DATES : 2026-10-17 From scratch
"""

import os
from pathlib import Path

from nipype.interfaces.base import (
    BaseInterface,
    BaseInterfaceInputSpec,
    traits,
    File,
    TraitedSpec,
)

from ..experiment import ExperimentConfig, cmd_simulate
from ..povm import USER_EPS
from ..protocol import DEFAULT_MAX_ROUNDS
from ..utils import write_report


class SimulateInputSpec(BaseInterfaceInputSpec):

    povm_a = File(
        desc="Alice's POVM JSON file",
        exists=True,
        mandatory=True
    )

    povm_b = File(
        desc="Bob's POVM JSON file",
        exists=True,
        mandatory=True
    )

    seed = traits.Int(0, usedefault=True, desc='Master seed')

    trials = traits.Int(1_000_000, usedefault=True, desc='Number of protocol runs')

    max_rounds = traits.Int(DEFAULT_MAX_ROUNDS, usedefault=True, desc='Round limit per run')

    entropy_samples = traits.Int(
        1_000_000,
        usedefault=True,
        desc="Monte Carlo samples for the d' conditional entropy"
    )

    povm_eps = traits.Float(USER_EPS, usedefault=True, desc='Completeness tolerance for POVM files')

    parallelism = traits.Int(1, usedefault=True, desc='Worker processes for this node')


class SimulateOutputSpec(TraitedSpec):
    report_json = File(
        desc="Simulation report (JSON)",
    )


class Simulate(BaseInterface):

    input_spec = SimulateInputSpec
    output_spec = SimulateOutputSpec

    def _run_interface(self, runtime):

        cfg = ExperimentConfig(
            seed=self.inputs.seed,
            trials=self.inputs.trials,
            povm_a=self.inputs.povm_a,
            povm_b=self.inputs.povm_b,
            povm_eps=self.inputs.povm_eps,
            max_rounds=self.inputs.max_rounds,
            parallelism=self.inputs.parallelism,
            entropy_samples=self.inputs.entropy_samples,
        )

        report = cmd_simulate(cfg)
        write_report(report, 'json', self._gen_outfile_name())

        return runtime

    def _list_outputs(self):
        outputs = self._outputs().get()
        outputs["report_json"] = self._gen_outfile_name()
        return outputs

    @staticmethod
    def _gen_outfile_name():
        return str(Path(os.getcwd()) / 'report.json')
