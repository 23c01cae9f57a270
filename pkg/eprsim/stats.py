"""
Estimators and distance metrics for protocol verification
- empirical joint distributions and mergeable run tallies
- total variation distance and Pearson chi-square goodness of fit
- communication cost statistics
- conditional entropy of the block-coding bit d'

DATES : 2026-10-17 From scratch
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import entr, gammaincc

from . import bloch
from .protocol import BITS_A_TO_B, BITS_B_TO_A, BITS_PER_ROUND, blockcoded_cost

# Vectors drawn per chunk in dprime_conditional_entropy()
ENTROPY_CHUNK = 1 << 16


class ShapeMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EmpiricalJoint:
    """
    Counts of accepted outcome pairs (i, j) over n runs
    """

    counts: np.ndarray
    n: int

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if np.any(counts < 0):
            raise ValueError('Outcome counts must be non-negative')
        if int(counts.sum()) != self.n:
            raise ValueError(f'Counts sum to {int(counts.sum())}, expected {self.n}')
        counts.setflags(write=False)
        object.__setattr__(self, 'counts', counts)

    @property
    def shape(self):
        return self.counts.shape

    def frequencies(self):
        return self.counts / self.n

    def marginal_a(self):
        return self.counts.sum(axis=1) / self.n

    def marginal_b(self):
        return self.counts.sum(axis=0) / self.n


@dataclass
class ProtocolTally:
    """
    Mergeable accumulator of protocol runs

    Only integer counts and sums are stored, so merging shards in any order
    gives exactly the same tally. Means are formed in build_report().
    """

    counts: np.ndarray
    n_runs: int = 0
    total_rounds: int = 0
    bits_a_to_b: int = 0
    bits_b_to_a: int = 0
    dprime_ones: int = 0
    # round_counts[k] = number of runs that took k rounds (index 0 unused)
    round_counts: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))

    @classmethod
    def empty(cls, shape):
        return cls(counts=np.zeros(shape, dtype=np.int64))

    @classmethod
    def from_block(cls, block, shape):
        """
        Tally a BlockResult from the vectorized protocol engine
        """

        counts = np.zeros(shape, dtype=np.int64)
        np.add.at(counts, (block.outcome_a, block.outcome_b), 1)
        total_rounds = int(block.rounds.sum())

        return cls(
            counts=counts,
            n_runs=block.n_runs,
            total_rounds=total_rounds,
            bits_a_to_b=BITS_A_TO_B * total_rounds,
            bits_b_to_a=BITS_B_TO_A * total_rounds,
            dprime_ones=block.dprime_ones,
            round_counts=np.bincount(block.rounds).astype(np.int64),
        )

    def add_transcript(self, t):
        """
        Add one Transcript in place
        """

        if not (0 <= t.outcome_a < self.counts.shape[0] and 0 <= t.outcome_b < self.counts.shape[1]):
            raise ShapeMismatch(
                f'Outcome pair ({t.outcome_a}, {t.outcome_b}) outside tally shape {self.counts.shape}'
            )

        self.counts[t.outcome_a, t.outcome_b] += 1
        self.n_runs += 1
        self.total_rounds += t.rounds
        self.bits_a_to_b += t.bits_a_to_b
        self.bits_b_to_a += t.bits_b_to_a
        self.dprime_ones += t.dprime_ones

        if t.rounds >= self.round_counts.size:
            self.round_counts = np.pad(self.round_counts, (0, t.rounds + 1 - self.round_counts.size))
        self.round_counts[t.rounds] += 1

    def merge(self, other):
        """
        Combine two tallies into a new one
        """

        if self.counts.shape != other.counts.shape:
            raise ShapeMismatch(f'Cannot merge tallies of shape {self.counts.shape} and {other.counts.shape}')

        size = max(self.round_counts.size, other.round_counts.size)
        round_counts = np.zeros(size, dtype=np.int64)
        round_counts[:self.round_counts.size] += self.round_counts
        round_counts[:other.round_counts.size] += other.round_counts

        return ProtocolTally(
            counts=self.counts + other.counts,
            n_runs=self.n_runs + other.n_runs,
            total_rounds=self.total_rounds + other.total_rounds,
            bits_a_to_b=self.bits_a_to_b + other.bits_a_to_b,
            bits_b_to_a=self.bits_b_to_a + other.bits_b_to_a,
            dprime_ones=self.dprime_ones + other.dprime_ones,
            round_counts=round_counts,
        )

    def empirical(self):
        return EmpiricalJoint(self.counts, self.n_runs)

    def round_frequencies(self):
        """
        Fraction of runs taking k = 1, 2, ... rounds (index 0 is k = 1)
        """

        return self.round_counts[1:] / self.n_runs


class ChiSquareResult(NamedTuple):
    statistic: float
    dof: int
    pvalue: float
    zero_cell_violation: bool


@dataclass(frozen=True)
class RunReport:
    """
    Aggregate statistics of a Monte Carlo batch
    """

    empirical: EmpiricalJoint
    tvd: float
    chi2_pvalue: float
    mean_rounds: float
    mean_bits: float
    h_dprime: float
    blockcoded_bits: float
    chi2_statistic: float = 0.0
    chi2_dof: int = 0
    zero_cell_violation: bool = False
    tvd_bound: float = 1.0
    accept_rate: float = 0.5
    dprime_rate: float = 0.5
    round_frequencies: tuple = ()

    def to_dict(self):

        return {
            'n': self.empirical.n,
            'counts': self.empirical.counts.tolist(),
            'p': self.empirical.frequencies().tolist(),
            'marginal_a': self.empirical.marginal_a().tolist(),
            'marginal_b': self.empirical.marginal_b().tolist(),
            'tvd': self.tvd,
            'tvd_bound': self.tvd_bound,
            'chi2_statistic': None if self.zero_cell_violation else self.chi2_statistic,
            'chi2_dof': self.chi2_dof,
            'chi2_pvalue': self.chi2_pvalue,
            'zero_cell_violation': self.zero_cell_violation,
            'mean_rounds': self.mean_rounds,
            'mean_bits': self.mean_bits,
            'accept_rate': self.accept_rate,
            'h_dprime': self.h_dprime,
            'dprime_rate': self.dprime_rate,
            'blockcoded_bits': self.blockcoded_bits,
            'round_frequencies': list(self.round_frequencies),
        }


def tvd(p, q):
    """
    Total variation distance (1/2) sum |p - q|

    :param p: array-like
        Probability matrix
    :param q: array-like
        Probability matrix of the same shape
    :return: float
    """

    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ShapeMismatch(f'Distribution shapes differ: {p.shape} vs {q.shape}')

    return 0.5 * float(np.abs(p - q).sum())


def tvd_bound(k, n):
    """
    Acceptance bound 4 sqrt(K/N) on the TVD of an N-sample empirical distribution over K cells
    """

    return 4.0 * math.sqrt(k / n)


def binomial_sigma(p, n):
    """
    Standard deviation of a binomial frequency
    """

    return np.sqrt(np.asarray(p) * (1.0 - np.asarray(p)) / n)


def chi_square_test(e, expected):
    """
    Pearson chi-square goodness of fit of observed counts against a joint distribution

    Only cells with positive expected probability enter the statistic, and
    dof = (number of such cells) - 1. An observed count in a zero-probability
    cell is an impossible event: p-value 0 with zero_cell_violation set.

    :param e: EmpiricalJoint
    :param expected: JointDistribution
    :return: ChiSquareResult
    """

    if e.n < 1:
        raise EmptyInput('Chi-square test needs at least one observation')
    if e.shape != expected.shape:
        raise ShapeMismatch(f'Observed shape {e.shape} does not match expected {expected.shape}')

    positive = expected.p > 0
    dof = int(positive.sum()) - 1

    if np.any(e.counts[~positive] > 0):
        return ChiSquareResult(math.inf, dof, 0.0, True)

    obs = e.counts[positive].astype(np.float64)
    exp = e.n * expected.p[positive]
    statistic = float(np.sum((obs - exp) ** 2 / exp))

    if dof > 0:
        # Chi-square survival function via the regularized upper incomplete gamma function
        pvalue = float(gammaincc(dof / 2.0, statistic / 2.0))
    else:
        # Single possible cell - any consistent data fits exactly
        pvalue = 1.0 if statistic == 0.0 else 0.0

    return ChiSquareResult(statistic, dof, min(max(pvalue, 0.0), 1.0), False)


def chi_square_pvalue(e, expected):
    return chi_square_test(e, expected).pvalue


def binary_entropy(p):
    """
    H2(p) in bits with 0 log 0 = 0
    """

    p = np.asarray(p, dtype=np.float64)
    h = (entr(p) + entr(1.0 - p)) / math.log(2.0)
    if h.ndim == 0:
        return float(h)

    return h


def dprime_conditional_entropy(n_samples, rng):
    """
    Monte Carlo estimate of the entropy of d' given the shared vectors

    For a uniformly random direction a_i, Pr[d' = 1 | v1, v2] = theta/pi where
    theta is the angle between v1 and v2. Average H2(theta/pi) over n_samples
    independent pairs of uniform unit vectors.

    :param n_samples: int
    :param rng: numpy Generator
    :return: float, bits
    """

    if n_samples < 1:
        raise ValueError(f'n_samples must be at least 1, got {n_samples}')

    total = 0.0
    remaining = n_samples
    while remaining > 0:
        m = min(ENTROPY_CHUNK, remaining)
        v1 = bloch.sample_unit_vectors(rng, m)
        v2 = bloch.sample_unit_vectors(rng, m)
        theta = bloch.angle_between(v1, v2)
        total += float(np.sum(binary_entropy(theta / math.pi)))
        remaining -= m

    return total / n_samples


def dprime_entropy_quadrature():
    """
    Deterministic value of E[H2(theta/pi)] with theta distributed as sin(theta)/2 on [0, pi]
    """

    value, _ = quad(lambda t: binary_entropy(t / math.pi) * math.sin(t) / 2.0, 0.0, math.pi)

    return value


def build_report(tally, oracle_joint, dprime_entropy):
    """
    Turn a protocol tally into a RunReport against the exact distribution

    :param tally: ProtocolTally
    :param oracle_joint: JointDistribution
    :param dprime_entropy: float
        Conditional entropy of d' in bits
    :return: RunReport
    """

    if tally.n_runs == 0:
        raise EmptyInput('No protocol runs to aggregate')
    if tally.counts.shape != oracle_joint.shape:
        raise ShapeMismatch(f'Tally shape {tally.counts.shape} does not match oracle {oracle_joint.shape}')

    # Plain encoding accounting is exact
    assert tally.bits_a_to_b + tally.bits_b_to_a == BITS_PER_ROUND * tally.total_rounds

    empirical = tally.empirical()
    chi2 = chi_square_test(empirical, oracle_joint)
    mean_rounds = tally.total_rounds / tally.n_runs

    return RunReport(
        empirical=empirical,
        tvd=tvd(empirical.frequencies(), oracle_joint.p),
        chi2_pvalue=chi2.pvalue,
        mean_rounds=mean_rounds,
        mean_bits=BITS_PER_ROUND * mean_rounds,
        h_dprime=dprime_entropy,
        blockcoded_bits=blockcoded_cost(mean_rounds, dprime_entropy),
        chi2_statistic=chi2.statistic,
        chi2_dof=chi2.dof,
        zero_cell_violation=chi2.zero_cell_violation,
        tvd_bound=tvd_bound(oracle_joint.p.size, tally.n_runs),
        accept_rate=tally.n_runs / tally.total_rounds,
        dprime_rate=tally.dprime_ones / tally.total_rounds,
        round_frequencies=tuple(tally.round_frequencies().tolist()),
    )


def aggregate(transcripts, oracle_joint, dprime_entropy):
    """
    Aggregate a stream of Transcripts into a RunReport

    :param transcripts: iterable of Transcript
    :param oracle_joint: JointDistribution
    :param dprime_entropy: float
    :return: RunReport
    """

    tally = ProtocolTally.empty(oracle_joint.shape)
    for t in transcripts:
        tally.add_transcript(t)

    return build_report(tally, oracle_joint, dprime_entropy)
