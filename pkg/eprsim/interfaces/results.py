"""
Nipype interface to collect fixture results into the verification output folder

<out_dir>/<fixture>/povm_a.json, povm_b.json, oracle.csv, report.json, verdict.json

DATES : 2026-10-17 From scratch
"""

import os
import os.path as op
import shutil

from nipype import logging
from nipype.interfaces.base import (
    BaseInterface,
    BaseInterfaceInputSpec,
    traits,
    File,
    Directory,
    InputMultiPath,
    OutputMultiPath,
    TraitedSpec
)

LOGGER = logging.getLogger('nipype.interface')


class ResultsSorterInputSpec(BaseInterfaceInputSpec):

    out_dir = Directory(
        desc="Verification output folder",
        exists=True,
        mandatory=True
    )

    fixture = traits.Str(
        desc="Fixture label (output subfolder name)",
        mandatory=True
    )

    file_list = InputMultiPath(
        File(exists=True),
        copyfile=False,
        desc='List of files to copy into the fixture folder',
        mandatory=True
    )


class ResultsSorterOutputSpec(TraitedSpec):

    out_files = OutputMultiPath(
        File(),
        desc="Copied result files"
    )


class ResultsSorter(BaseInterface):

    input_spec = ResultsSorterInputSpec
    output_spec = ResultsSorterOutputSpec

    def _run_interface(self, runtime):

        # Safe create fixture subfolder
        fixture_dname = self._gen_fixture_dname()
        os.makedirs(fixture_dname, exist_ok=True)

        # Node working file names are already unique within a fixture
        for in_pname in self.inputs.file_list:
            out_pname = op.join(fixture_dname, op.basename(in_pname))
            LOGGER.debug(f'Copying {in_pname} to {out_pname}')
            shutil.copyfile(in_pname, out_pname)

        return runtime

    def _list_outputs(self):
        outputs = self._outputs().get()
        fixture_dname = self._gen_fixture_dname()
        outputs["out_files"] = [
            op.join(fixture_dname, op.basename(in_pname)) for in_pname in self.inputs.file_list
        ]
        return outputs

    def _gen_fixture_dname(self):
        return op.join(self.inputs.out_dir, self.inputs.fixture)
