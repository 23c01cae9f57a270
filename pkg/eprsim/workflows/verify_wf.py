#!/usr/bin/env python
# coding: utf-8

"""
Build and run the verification workflow
- iterate over acceptance fixtures (POVM pairs)
- write POVM files, exact oracle table, simulation report and verdict per fixture
- collect results into <out_dir>/<fixture>/

DATES : 2026-10-17 From scratch
"""

import json
import os
import os.path as op

import nipype.interfaces.utility as util
import nipype.pipeline.engine as pe
from nipype import logging

from .. import __version__
from ..experiment import FIXTURES, TOOL, ConfigError
from ..interfaces import OracleJoint, PovmPair, ResultsSorter, Simulate, Verdict
from ..povm import USER_EPS
from ..protocol import DEFAULT_MAX_ROUNDS

LOGGER = logging.getLogger('nipype.workflow')


def build_verify_wf(work_dir, out_dir, fixtures, trials, seed,
                    max_rounds=DEFAULT_MAX_ROUNDS, entropy_samples=1_000_000, povm_eps=USER_EPS):
    """
    Build the fixture verification workflow

    :param work_dir: str
        Nipype working directory
    :param out_dir: str
        Existing folder receiving one subfolder per fixture
    :param fixtures: list of str
        Fixture labels (keys of FIXTURES)
    :param trials: int
        Protocol runs per fixture
    :param seed: int
        Master seed
    :return: Workflow
    """

    # Workflow input node - one branch per fixture
    inputnode = pe.Node(
        util.IdentityInterface(fields=['fixture']),
        name='inputnode'
    )
    inputnode.iterables = ('fixture', list(fixtures))

    # POVM files for both parties
    povm_pair = pe.Node(
        PovmPair(seed=seed, povm_eps=povm_eps),
        name='povm_pair'
    )

    # Exact joint and marginal table
    oracle_joint = pe.Node(
        OracleJoint(povm_eps=povm_eps),
        name='oracle_joint'
    )

    # Monte Carlo batch. Parallelism comes from the workflow plugin, not the node.
    simulate = pe.Node(
        Simulate(
            seed=seed,
            trials=trials,
            max_rounds=max_rounds,
            entropy_samples=entropy_samples,
            povm_eps=povm_eps,
            parallelism=1
        ),
        name='simulate'
    )

    verdict = pe.Node(
        Verdict(),
        name='verdict'
    )

    # Gather all per-fixture result files
    result_files = pe.Node(
        util.Merge(numinputs=5),
        name='result_files'
    )

    results_sorter = pe.Node(
        ResultsSorter(out_dir=out_dir),
        name='results_sorter'
    )

    verify_wf = pe.Workflow(
        base_dir=str(work_dir),
        name='verify_wf'
    )

    verify_wf.connect([

        # Generate POVM pair for this fixture
        (inputnode, povm_pair, [('fixture', 'fixture')]),

        # Exact distribution and simulation from the same POVM files
        (povm_pair, oracle_joint, [('povm_a', 'povm_a'), ('povm_b', 'povm_b')]),
        (povm_pair, simulate, [('povm_a', 'povm_a'), ('povm_b', 'povm_b')]),

        # Judge the simulation report
        (inputnode, verdict, [('fixture', 'fixture')]),
        (simulate, verdict, [('report_json', 'report_json')]),

        # Copy everything to the output folder
        (povm_pair, result_files, [('povm_a', 'in1'), ('povm_b', 'in2')]),
        (oracle_joint, result_files, [('oracle_csv', 'in3')]),
        (simulate, result_files, [('report_json', 'in4')]),
        (verdict, result_files, [('verdict_json', 'in5')]),
        (inputnode, results_sorter, [('fixture', 'fixture')]),
        (result_files, results_sorter, [('out', 'file_list')]),
    ])

    return verify_wf


def cmd_verify(work_dir, out_dir, fixtures=None, trials=1_000_000, seed=0,
               max_rounds=DEFAULT_MAX_ROUNDS, entropy_samples=1_000_000, povm_eps=USER_EPS,
               parallelism=1):
    """
    Run the verification workflow and summarize the fixture verdicts

    :return: dict
        Summary report with one verdict per fixture and an overall pass flag
    """

    if fixtures is None:
        fixtures = list(FIXTURES)

    unknown = [f for f in fixtures if f not in FIXTURES]
    if unknown:
        raise ConfigError(f'Unknown fixtures {unknown}, expected a subset of {sorted(FIXTURES)}')

    work_dir = op.realpath(work_dir)
    out_dir = op.realpath(out_dir)
    os.makedirs(work_dir, exist_ok=True)
    os.makedirs(out_dir, exist_ok=True)

    verify_wf = build_verify_wf(
        work_dir, out_dir, fixtures, trials, seed,
        max_rounds=max_rounds, entropy_samples=entropy_samples, povm_eps=povm_eps
    )

    if parallelism > 1:
        verify_wf.run(plugin='MultiProc', plugin_args={'n_procs': parallelism})
    else:
        verify_wf.run()

    verdicts = {}
    for fixture in fixtures:
        with open(op.join(out_dir, fixture, 'verdict.json'), 'r', encoding='utf-8') as fd:
            verdicts[fixture] = json.load(fd)

    summary = {
        'tool': TOOL,
        'version': __version__,
        'command': 'verify',
        'config': {
            'trials': trials,
            'seed': seed,
            'max_rounds': max_rounds,
            'entropy_samples': entropy_samples,
            'povm_eps': povm_eps,
        },
        'fixtures': verdicts,
        'passed': all(v['passed'] for v in verdicts.values()),
    }

    LOGGER.info(f'Verification {"passed" if summary["passed"] else "FAILED"} for {len(fixtures)} fixtures')

    return summary
