"""
Nipype interface to write the POVM pair of a verification fixture to JSON files

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

from ..experiment import FIXTURES, ConfigError, resolve_povm
from ..povm import USER_EPS, save_povm


class PovmPairInputSpec(BaseInterfaceInputSpec):

    fixture = traits.Str(
        desc='Fixture label (key of eprsim.experiment.FIXTURES)',
        mandatory=True
    )

    seed = traits.Int(
        0,
        usedefault=True,
        desc='Master seed (random POVM generation)'
    )

    povm_eps = traits.Float(
        USER_EPS,
        usedefault=True,
        desc='Completeness tolerance for POVM files'
    )


class PovmPairOutputSpec(TraitedSpec):

    povm_a = File(
        exists=True,
        desc="Alice's POVM (JSON array of Bloch vectors)"
    )

    povm_b = File(
        exists=True,
        desc="Bob's POVM (JSON array of Bloch vectors)"
    )


class PovmPair(BaseInterface):

    input_spec = PovmPairInputSpec
    output_spec = PovmPairOutputSpec

    def _run_interface(self, runtime):

        fixture = self.inputs.fixture
        if fixture not in FIXTURES:
            raise ConfigError(f'Unknown fixture {fixture!r}, expected one of {sorted(FIXTURES)}')

        src_a, src_b = FIXTURES[fixture]

        # Alice and Bob draw random POVMs from separate substreams
        povm_a = resolve_povm(src_a, self.inputs.povm_eps, self.inputs.seed, side=0)
        povm_b = resolve_povm(src_b, self.inputs.povm_eps, self.inputs.seed, side=1)

        save_povm(povm_a, self._gen_povm_fname('a'))
        save_povm(povm_b, self._gen_povm_fname('b'))

        return runtime

    def _list_outputs(self):
        outputs = self._outputs().get()
        outputs['povm_a'] = self._gen_povm_fname('a')
        outputs['povm_b'] = self._gen_povm_fname('b')
        return outputs

    @staticmethod
    def _gen_povm_fname(side):
        return str(Path(os.getcwd()) / f'povm_{side}.json')
