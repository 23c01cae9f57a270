"""
Experiment runner
- experiment configuration and POVM source grammar
- seeded, block-parallel Monte Carlo batches of the protocol
- simulate, oracle, CHSH, communication cost and validation reports

Reports are plain dicts ready for eprsim.utils.report serialization. A
report is a pure function of the configuration and seed: the worker count
changes how blocks are scheduled, never which random draws a run sees.

DATES : 2026-10-17 From scratch
"""

import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import reduce

import numpy as np
from nipype import logging

from . import __version__, bloch, oracle
from .povm import USER_EPS, load_povm, projective, random_povm, sic_tetrahedron
from .protocol import (
    BITS_A_TO_B,
    BITS_B_TO_A,
    DEFAULT_MAX_ROUNDS,
    MaxRoundsExceeded,
    block_rng,
    blockcoded_cost,
    iter_blocks,
    run_block,
)
from .stats import (
    ProtocolTally,
    build_report,
    dprime_conditional_entropy,
    dprime_entropy_quadrature,
)

LOGGER = logging.getLogger('nipype.workflow')

TOOL = 'eprsim'

# Substream identifiers under the master seed
STREAM_PROTOCOL = 0
STREAM_ENTROPY = 1
STREAM_POVM = 2
STREAM_CHSH = 10  # 10..13, one per CHSH setting pair

OUTPUT_FORMATS = ('json', 'csv')

# Acceptance fixtures for the verify sweep (label -> POVM sources for Alice and Bob)
FIXTURES = {
    'projz_projz': ('projective:0,0,1', 'projective:0,0,1'),
    'projz_projx': ('projective:0,0,1', 'projective:1,0,0'),
    'sic_sic': ('sic', 'sic'),
    'random4_random4': ('random:4', 'random:4'),
    'random3_random5': ('random:3', 'random:5'),
}

_RANDOM_RE = re.compile(r'^random:(\d+)$')
_PROJECTIVE_RE = re.compile(r'^projective:([^,]+),([^,]+),([^,]+)$')


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    trials: int = 1_000_000
    povm_a: str = 'sic'
    povm_b: str = 'sic'
    povm_eps: float = USER_EPS
    max_rounds: int = DEFAULT_MAX_ROUNDS
    output_format: str = 'json'
    parallelism: int = 1
    entropy_samples: int = 1_000_000

    def __post_init__(self):
        check_seed(self.seed)
        if self.trials < 1:
            raise ConfigError(f'trials must be at least 1, got {self.trials}')
        if not self.povm_eps > 0:
            raise ConfigError(f'povm_eps must be positive, got {self.povm_eps}')
        if self.max_rounds < 1:
            raise ConfigError(f'max_rounds must be at least 1, got {self.max_rounds}')
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f'output format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}')
        if self.parallelism < 1:
            raise ConfigError(f'parallelism must be at least 1, got {self.parallelism}')
        if self.entropy_samples < 1:
            raise ConfigError(f'entropy_samples must be at least 1, got {self.entropy_samples}')

    def echo(self):
        """
        Configuration as recorded in reports

        Parallelism is left out: it never changes the results.
        """

        cfg = asdict(self)
        del cfg['parallelism']

        return cfg


def check_seed(seed):
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f'seed must be a 64-bit unsigned integer, got {seed}')


def resolve_povm(source, eps=USER_EPS, seed=0, side=0):
    """
    Build a POVM from a source string

    Grammar:
      random:<n>             random n-outcome POVM (n >= 2) drawn from (seed, side)
      projective:<x>,<y>,<z> projective measurement along the normalized axis
      sic                    tetrahedral SIC POVM
      anything else          path to a JSON POVM file

    :param source: str
    :param eps: float
        Validation tolerance for POVM files
    :param seed: int
        Master seed
    :param side: int
        0 for Alice, 1 for Bob, so random POVMs differ between parties
    :return: Povm
    """

    if source == 'sic':
        return sic_tetrahedron()

    m = _RANDOM_RE.match(source)
    if m:
        n = int(m.group(1))
        if n < 2:
            raise ConfigError(f'random POVM needs at least 2 outcomes, got {source!r}')
        return random_povm(n, block_rng(seed, side, stream=STREAM_POVM))

    m = _PROJECTIVE_RE.match(source)
    if m:
        try:
            axis = bloch.vec3(*(float(g) for g in m.groups()))
            axis = bloch.normalize(axis)
        except ValueError as err:
            raise ConfigError(f'Invalid projective axis in {source!r}: {err}') from err
        return projective(axis)

    if source.startswith(('random:', 'projective:')):
        raise ConfigError(f'Malformed POVM generator spec {source!r}')

    if not os.path.isfile(source):
        raise ConfigError(f'POVM source {source!r} is neither a generator spec nor a file')

    return load_povm(source, eps=eps)


def _tally_block(task):
    """
    Worker task: run one block and tally it
    """

    a, b, seed, stream, block, first_run, n_runs, max_rounds = task
    rng = block_rng(seed, block, stream=stream)
    result = run_block(a, b, rng, n_runs, max_rounds=max_rounds, first_run=first_run)

    return ProtocolTally.from_block(result, (a.n_outcomes, b.n_outcomes))


def simulate_tally(a, b, seed, trials, max_rounds=DEFAULT_MAX_ROUNDS, parallelism=1,
                   stream=STREAM_PROTOCOL):
    """
    Run `trials` protocol executions and tally them

    Run k uses the block substream (seed, stream, k // BLOCK_SIZE), so the tally
    is identical for every parallelism level.

    :return: ProtocolTally
    """

    tasks = [
        (a, b, seed, stream, block, first_run, n_runs, max_rounds)
        for block, first_run, n_runs in iter_blocks(trials)
    ]

    n_workers = min(parallelism, len(tasks))
    LOGGER.debug(f'Running {trials} trials in {len(tasks)} blocks on {n_workers} workers')

    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            tallies = list(pool.map(_tally_block, tasks))
    else:
        tallies = [_tally_block(task) for task in tasks]

    return reduce(ProtocolTally.merge, tallies, ProtocolTally.empty((a.n_outcomes, b.n_outcomes)))


def _header(command):
    return {'tool': TOOL, 'version': __version__, 'command': command}


def simulate_report(a, b, cfg):
    """
    Simulate the protocol for a resolved POVM pair and compare with the oracle

    :param a: Povm
    :param b: Povm
    :param cfg: ExperimentConfig
    :return: dict
    """

    oracle_joint = oracle.joint(a, b)

    try:
        tally = simulate_tally(a, b, cfg.seed, cfg.trials, cfg.max_rounds, cfg.parallelism)
    except MaxRoundsExceeded as err:
        LOGGER.error(f'Protocol failure at run {err.run_index}')
        raise

    h_dprime = dprime_conditional_entropy(
        cfg.entropy_samples, block_rng(cfg.seed, 0, stream=STREAM_ENTROPY)
    )
    run_report = build_report(tally, oracle_joint, h_dprime)

    LOGGER.info(
        f'{cfg.trials} runs: mean rounds {run_report.mean_rounds:0.4f}, '
        f'mean bits {run_report.mean_bits:0.4f}, TVD {run_report.tvd:0.5f}'
    )

    report = _header('simulate')
    report['config'] = cfg.echo()
    report['povm_a'] = a.elements.tolist()
    report['povm_b'] = b.elements.tolist()
    report['oracle'] = oracle_joint.p.tolist()
    report['mean_bits_a_to_b'] = BITS_A_TO_B * run_report.mean_rounds
    report['mean_bits_b_to_a'] = BITS_B_TO_A * run_report.mean_rounds
    report.update(run_report.to_dict())

    return report


def cmd_simulate(cfg):
    """
    Resolve both POVM sources and run the simulate experiment
    """

    a = resolve_povm(cfg.povm_a, cfg.povm_eps, cfg.seed, side=0)
    b = resolve_povm(cfg.povm_b, cfg.povm_eps, cfg.seed, side=1)

    return simulate_report(a, b, cfg)


def cmd_oracle(povm_a, povm_b, povm_eps=USER_EPS, seed=0):
    """
    Exact joint distribution and marginals without simulation

    :param povm_a: str
        Alice's POVM source
    :param povm_b: str
        Bob's POVM source
    :return: dict
    """

    check_seed(seed)
    a = resolve_povm(povm_a, povm_eps, seed, side=0)
    b = resolve_povm(povm_b, povm_eps, seed, side=1)
    pj = oracle.joint(a, b)

    report = _header('oracle')
    report['povm_a'] = a.elements.tolist()
    report['povm_b'] = b.elements.tolist()
    report['joint'] = pj.p.tolist()
    report['marginal_a'] = oracle.marginal(a).tolist()
    report['marginal_b'] = oracle.marginal(b).tolist()

    return report


def _correlation_estimate(counts):
    """
    Mean of the product of +1/-1 outcomes from a 2 x 2 count table
    """

    n = int(counts.sum())
    same = int(counts[0, 0] + counts[1, 1])
    diff = int(counts[0, 1] + counts[1, 0])

    return (same - diff) / n


def cmd_chsh(trials, seed, settings='optimal', max_rounds=DEFAULT_MAX_ROUNDS, parallelism=1):
    """
    Estimate the CHSH quantity S from simulated projective measurements

    Each of the four setting pairs gets `trials` runs on its own substream.

    :param trials: int
        Runs per setting pair
    :param seed: int
    :param settings: str
        'optimal' or 'collinear'
    :return: dict
    """

    if trials < 1:
        raise ConfigError(f'trials must be at least 1, got {trials}')
    check_seed(seed)

    a, a_prime, b, b_prime = oracle.chsh_settings(settings)
    pairs = [
        ('a_b', a, b, 1.0),
        ('a_bp', a, b_prime, 1.0),
        ('ap_b', a_prime, b, 1.0),
        ('ap_bp', a_prime, b_prime, -1.0),
    ]

    estimates = {}
    std_errors = {}
    exact = {}
    s_value = 0.0
    s_var = 0.0
    total_rounds = 0

    for k, (name, x, y, sign) in enumerate(pairs):

        tally = simulate_tally(
            projective(x), projective(y), seed, trials, max_rounds, parallelism,
            stream=STREAM_CHSH + k
        )
        e = _correlation_estimate(tally.counts)

        # Outcome products are +/-1 so their variance is 1 - E^2
        se = math.sqrt(max(1.0 - e * e, 0.0) / trials)

        estimates[name] = e
        std_errors[name] = se
        exact[name] = oracle.correlation(x, y)
        s_value += sign * e
        s_var += se * se
        total_rounds += tally.total_rounds

    s_se = math.sqrt(s_var)
    LOGGER.info(f'CHSH S = {s_value:0.4f} +/- {s_se:0.4f}')

    report = _header('chsh')
    report['config'] = {'trials': trials, 'seed': seed, 'settings': settings, 'max_rounds': max_rounds}
    report['settings'] = {
        'a': a.tolist(), 'a_prime': a_prime.tolist(), 'b': b.tolist(), 'b_prime': b_prime.tolist()
    }
    report['correlations'] = estimates
    report['correlation_se'] = std_errors
    report['oracle_correlations'] = exact
    report['S'] = s_value
    report['S_se'] = s_se
    report['oracle_S'] = oracle.chsh(a, a_prime, b, b_prime)
    report['mean_rounds'] = total_rounds / (4 * trials)

    return report


def cmd_cost(trials, seed, entropy_samples, povm_a='random:4', povm_b='random:4',
             povm_eps=USER_EPS, max_rounds=DEFAULT_MAX_ROUNDS, parallelism=1):
    """
    Communication cost of the plain and block-coded protocol

    :param trials: int
    :param seed: int
    :param entropy_samples: int
        Monte Carlo samples for the d' conditional entropy
    :return: dict
    """

    cfg = ExperimentConfig(
        seed=seed, trials=trials, povm_a=povm_a, povm_b=povm_b, povm_eps=povm_eps,
        max_rounds=max_rounds, parallelism=parallelism, entropy_samples=entropy_samples
    )

    a = resolve_povm(cfg.povm_a, cfg.povm_eps, cfg.seed, side=0)
    b = resolve_povm(cfg.povm_b, cfg.povm_eps, cfg.seed, side=1)

    tally = simulate_tally(a, b, cfg.seed, cfg.trials, cfg.max_rounds, cfg.parallelism)
    mean_rounds = tally.total_rounds / tally.n_runs

    h_mc = dprime_conditional_entropy(
        cfg.entropy_samples, block_rng(cfg.seed, 0, stream=STREAM_ENTROPY)
    )
    h_exact = dprime_entropy_quadrature()

    round_freq = tally.round_frequencies()
    k = np.arange(1, round_freq.size + 1)

    report = _header('cost')
    report['config'] = cfg.echo()
    report['mean_rounds'] = mean_rounds
    report['accept_rate'] = tally.n_runs / tally.total_rounds
    report['mean_bits_a_to_b'] = tally.bits_a_to_b / tally.n_runs
    report['mean_bits_b_to_a'] = tally.bits_b_to_a / tally.n_runs
    report['plain_bits'] = (tally.bits_a_to_b + tally.bits_b_to_a) / tally.n_runs
    report['h_dprime'] = h_mc
    report['h_dprime_quadrature'] = h_exact
    report['dprime_rate'] = tally.dprime_ones / tally.total_rounds
    report['blockcoded_bits'] = blockcoded_cost(mean_rounds, h_mc)
    report['blockcoded_bits_quadrature'] = blockcoded_cost(mean_rounds, h_exact)
    report['round_frequencies'] = round_freq.tolist()
    report['round_frequencies_geometric'] = (0.5 ** k).tolist()

    return report


def cmd_validate(fname, povm_eps=USER_EPS):
    """
    Check a POVM file against the completeness conditions

    Raises a PovmError describing the violated condition.
    """

    p = load_povm(fname, eps=povm_eps)

    report = _header('validate')
    report['file'] = str(fname)
    report['valid'] = True
    report['povm_eps'] = povm_eps
    report['n_outcomes'] = p.n_outcomes
    report['weights'] = p.weights.tolist()
    report['weight_sum'] = float(p.weights.sum())
    report['vector_sum'] = p.elements.sum(axis=0).tolist()

    return report
