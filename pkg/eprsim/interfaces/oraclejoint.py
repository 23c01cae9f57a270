"""
Nipype interface to tabulate the exact joint outcome distribution of a POVM pair

One row per outcome pair (i, j) with the joint probability and both marginals.

DATES : 2026-10-17 From scratch
"""

import os
from pathlib import Path

import pandas as pd
from nipype.interfaces.base import (
    BaseInterface,
    BaseInterfaceInputSpec,
    traits,
    File,
    TraitedSpec,
)

from .. import oracle
from ..povm import USER_EPS, load_povm


class OracleJointInputSpec(BaseInterfaceInputSpec):

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

    povm_eps = traits.Float(
        USER_EPS,
        usedefault=True,
        desc='Completeness tolerance for POVM files'
    )


class OracleJointOutputSpec(TraitedSpec):
    oracle_csv = File(
        desc="CSV table of exact joint and marginal outcome probabilities",
    )


class OracleJoint(BaseInterface):

    input_spec = OracleJointInputSpec
    output_spec = OracleJointOutputSpec

    def _run_interface(self, runtime):

        a = load_povm(self.inputs.povm_a, eps=self.inputs.povm_eps)
        b = load_povm(self.inputs.povm_b, eps=self.inputs.povm_eps)

        pj = oracle.joint(a, b)
        pa = oracle.marginal(a)
        pb = oracle.marginal(b)

        rows = [
            {'i': i, 'j': j, 'p': pj.p[i, j], 'marginal_a': pa[i], 'marginal_b': pb[j]}
            for i in range(a.n_outcomes)
            for j in range(b.n_outcomes)
        ]

        oracle_df = pd.DataFrame(rows, columns=['i', 'j', 'p', 'marginal_a', 'marginal_b'])
        oracle_df.to_csv(self._gen_outfile_name(), index=False, float_format="%0.12g")

        return runtime

    def _list_outputs(self):
        outputs = self._outputs().get()
        outputs["oracle_csv"] = self._gen_outfile_name()
        return outputs

    @staticmethod
    def _gen_outfile_name():
        return str(Path(os.getcwd()) / 'oracle.csv')
