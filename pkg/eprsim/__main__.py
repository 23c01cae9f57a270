#!/usr/bin/env python
# coding: utf-8

"""
Classical simulation of POVM measurements on a shared EPR pair
- simulate : run the 6-bit protocol and compare with the exact distribution
- oracle   : exact joint and marginal distributions only
- chsh     : CHSH value from simulated projective measurements
- cost     : plain and block-coded communication cost
- validate : check a POVM file
- verify   : acceptance fixture sweep as a nipype workflow

Reports go to stdout (or --out) as JSON or CSV. Progress and the configuration
splash go to the nipype loggers.

Exit codes : 0 success, 1 verification failed, 2 configuration error,
             3 POVM validation error, 4 protocol failure

DATES : 2026-10-17 From scratch
"""

import argparse
import logging as std_logging
import os
import os.path as op
import sys

from nipype import config, logging

from . import __version__
from .experiment import (
    OUTPUT_FORMATS,
    ConfigError,
    ExperimentConfig,
    check_seed,
    cmd_chsh,
    cmd_cost,
    cmd_oracle,
    cmd_simulate,
    cmd_validate,
)
from .povm import USER_EPS, PovmError
from .protocol import DEFAULT_MAX_ROUNDS, MaxRoundsExceeded
from .utils import write_report
from .workflows import cmd_verify

LOGGER = logging.getLogger('nipype.workflow')

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_PROTOCOL = 4


def build_parser():

    # Flags shared by every subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help='Master seed [0]')
    common.add_argument('--povm-eps', type=float, default=USER_EPS,
                        help=f'POVM completeness tolerance [{USER_EPS:g}]')
    common.add_argument('--format', dest='output_format', choices=OUTPUT_FORMATS, default='json',
                        help='Report format [json]')
    common.add_argument('--out', default=None, help='Report file [stdout]')
    common.add_argument('--debug', action='store_true', default=False, help='Debugging flag')

    # Flags for subcommands that run the protocol
    runs = argparse.ArgumentParser(add_help=False)
    runs.add_argument('--trials', type=int, default=1_000_000, help='Protocol runs [1000000]')
    runs.add_argument('--max-rounds', type=int, default=DEFAULT_MAX_ROUNDS,
                      help=f'Round cap per run [{DEFAULT_MAX_ROUNDS}]')
    runs.add_argument('--parallelism', type=int, default=os.cpu_count() or 1,
                      help='Worker processes [number of cores]')

    entropy = argparse.ArgumentParser(add_help=False)
    entropy.add_argument('--entropy-samples', type=int, default=1_000_000,
                         help="Monte Carlo samples for the d' entropy [1000000]")

    parser = argparse.ArgumentParser(
        prog='eprsim',
        description='Classical simulation of POVMs on a maximally entangled qubit pair'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', required=True)

    sp = subparsers.add_parser('simulate', parents=[common, runs, entropy],
                               help='Simulate the protocol for a POVM pair')
    sp.add_argument('--povm-a', default='sic', help="Alice's POVM source [sic]")
    sp.add_argument('--povm-b', default='sic', help="Bob's POVM source [sic]")

    sp = subparsers.add_parser('oracle', parents=[common], help='Exact outcome distributions')
    sp.add_argument('--povm-a', default='sic', help="Alice's POVM source [sic]")
    sp.add_argument('--povm-b', default='sic', help="Bob's POVM source [sic]")

    sp = subparsers.add_parser('chsh', parents=[common, runs], help='CHSH value from simulation')
    sp.add_argument('--settings', choices=('optimal', 'collinear'), default='optimal',
                    help='Measurement settings [optimal]')

    sp = subparsers.add_parser('cost', parents=[common, runs, entropy], help='Communication cost')
    sp.add_argument('--povm-a', default='random:4', help="Alice's POVM source [random:4]")
    sp.add_argument('--povm-b', default='random:4', help="Bob's POVM source [random:4]")

    sp = subparsers.add_parser('validate', parents=[common], help='Validate a POVM file')
    sp.add_argument('povm_file', help='JSON POVM file')

    sp = subparsers.add_parser('verify', parents=[common, runs, entropy],
                               help='Run the acceptance fixture sweep')
    sp.add_argument('-w', '--work-dir', default='work', help="Nipype work directory ['work']")
    sp.add_argument('-o', '--out-dir', default='eprsim_verify', help="Results directory ['eprsim_verify']")
    sp.add_argument('--fixtures', nargs='+', default=None, help='Fixture subset [all]')

    return parser


def main(argv=None):

    # Parse command line arguments
    args = build_parser().parse_args(argv)

    # Set nipype debug mode, logging to the work folder for verify runs
    if args.debug:
        config.enable_debug_mode()
        config.set('logging', 'workflow_level', 'DEBUG')
        config.set('logging', 'interface_level', 'DEBUG')
        if args.command == 'verify':
            work_dir = op.realpath(args.work_dir)
            os.makedirs(work_dir, exist_ok=True)
            config.set('execution', 'stop_on_first_crash', 'true')
            config.set('execution', 'remove_unnecessary_outputs', 'false')
            config.set('logging', 'node_level', 'DEBUG')
            config.update_config({
                'logging': {
                    'log_directory': work_dir,
                    'log_to_file': True
                }
            })
        logging.update_logging(config)

    # stdout carries the report only
    log_to_stderr()

    # Summary splash text
    LOGGER.info(f'eprsim {__version__}')
    LOGGER.info(f'Command          : {args.command}')
    LOGGER.info(f'Seed             : {args.seed}')
    if hasattr(args, 'trials'):
        LOGGER.info(f'Trials           : {args.trials}')
        LOGGER.info(f'Parallelism      : {args.parallelism}')
    LOGGER.info(f'Debug mode       : {args.debug}')

    try:
        exit_code = EXIT_OK
        report = run_command(args)
        if args.command == 'verify' and not report['passed']:
            exit_code = EXIT_VERIFY_FAILED
        write_report(report, args.output_format, args.out)

    except ConfigError as err:
        print(f'* {err} - exiting', file=sys.stderr)
        exit_code = EXIT_CONFIG

    except PovmError as err:
        print(f'* Invalid POVM: {err} - exiting', file=sys.stderr)
        exit_code = EXIT_VALIDATION

    except MaxRoundsExceeded as err:
        print(f'* Protocol failure at run {err.run_index}: {err} - exiting', file=sys.stderr)
        exit_code = EXIT_PROTOCOL

    except OSError as err:
        print(f'* {err} - exiting', file=sys.stderr)
        exit_code = EXIT_CONFIG

    sys.exit(exit_code)


def log_to_stderr():
    """
    Point nipype console handlers at stderr
    """

    for hdlr in std_logging.getLogger('nipype').handlers:
        if type(hdlr) is std_logging.StreamHandler:
            hdlr.setStream(sys.stderr)


def run_command(args):
    """
    Dispatch parsed arguments to the experiment functions

    :param args: argparse.Namespace
    :return: dict
        Report
    """

    if args.command == 'simulate':
        cfg = ExperimentConfig(
            seed=args.seed,
            trials=args.trials,
            povm_a=args.povm_a,
            povm_b=args.povm_b,
            povm_eps=args.povm_eps,
            max_rounds=args.max_rounds,
            output_format=args.output_format,
            parallelism=args.parallelism,
            entropy_samples=args.entropy_samples,
        )
        return cmd_simulate(cfg)

    if args.command == 'oracle':
        return cmd_oracle(args.povm_a, args.povm_b, povm_eps=args.povm_eps, seed=args.seed)

    if args.command == 'chsh':
        _check_runs(args)
        return cmd_chsh(
            args.trials, args.seed, settings=args.settings,
            max_rounds=args.max_rounds, parallelism=args.parallelism
        )

    if args.command == 'cost':
        return cmd_cost(
            args.trials, args.seed, args.entropy_samples,
            povm_a=args.povm_a, povm_b=args.povm_b, povm_eps=args.povm_eps,
            max_rounds=args.max_rounds, parallelism=args.parallelism
        )

    if args.command == 'validate':
        if not op.isfile(args.povm_file):
            raise ConfigError(f'{args.povm_file} does not exist')
        return cmd_validate(args.povm_file, povm_eps=args.povm_eps)

    if args.command == 'verify':
        _check_runs(args)
        return cmd_verify(
            args.work_dir, args.out_dir,
            fixtures=args.fixtures,
            trials=args.trials,
            seed=args.seed,
            max_rounds=args.max_rounds,
            entropy_samples=args.entropy_samples,
            povm_eps=args.povm_eps,
            parallelism=args.parallelism,
        )

    raise ConfigError(f'Unknown command {args.command!r}')


def _check_runs(args):
    """
    Range checks for subcommands that do not build an ExperimentConfig
    """

    if args.trials < 1:
        raise ConfigError(f'trials must be at least 1, got {args.trials}')
    if args.max_rounds < 1:
        raise ConfigError(f'max_rounds must be at least 1, got {args.max_rounds}')
    if args.parallelism < 1:
        raise ConfigError(f'parallelism must be at least 1, got {args.parallelism}')
    check_seed(args.seed)


if __name__ == "__main__":

    main()
