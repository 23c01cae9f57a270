"""
Classical simulation of bipartite POVMs on |phi+> with shared randomness and communication

Each round:
- Alice and Bob share fresh random unit vectors v1, v2
- Alice picks outcome i with probability |a_i|/2 and sends c = T(-a_i.v1), d = T(-a_i.v2)
- Bob picks outcome j with probability |b_j|/2 and accepts iff b_j.((-1)^c v1 + (-1)^d v2) >= 0
- Bob sends the accept bit; on reject both start over

Conditioning on acceptance reproduces Pr[a=i, b=j] = (|a_i||b_j| + a_i.b_j)/4.
Every round costs 2 bits Alice -> Bob and 1 bit Bob -> Alice and is accepted
with probability 1/2, so a run costs 6 bits on average.

Two implementations share the per-round rules:
- run_protocol() drives Alice and Bob state machines over a bit-counting channel, one run at a time
- run_block() applies the same rules to a whole block of runs at once with numpy

DATES : 2026-10-17 From scratch
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from nipype import logging

from . import bloch

LOGGER = logging.getLogger('nipype.interface')

# Plain encoding bit costs
BITS_A_TO_B = 2
BITS_B_TO_A = 1
BITS_PER_ROUND = BITS_A_TO_B + BITS_B_TO_A

DEFAULT_MAX_ROUNDS = 10000

# Runs per rng substream. Fixed so results never depend on the worker count.
BLOCK_SIZE = 1 << 14


class MaxRoundsExceeded(RuntimeError):
    """No acceptance within max_rounds rounds (probability 2^-max_rounds)"""

    def __init__(self, run_index, max_rounds):
        # Positional args so the exception survives pickling across worker processes
        super().__init__(run_index, max_rounds)
        self.run_index = run_index
        self.max_rounds = max_rounds

    def __str__(self):
        return f'Run {self.run_index} was not accepted within {self.max_rounds} rounds'


class Direction(Enum):
    ALICE_TO_BOB = 'alice->bob'
    BOB_TO_ALICE = 'bob->alice'


PAYLOAD_BITS = {
    Direction.ALICE_TO_BOB: BITS_A_TO_B,
    Direction.BOB_TO_ALICE: BITS_B_TO_A,
}


@dataclass(frozen=True)
class SharedRandomness:
    v1: np.ndarray
    v2: np.ndarray


def sample_shared(rng):
    """
    Draw a fresh pair of shared unit vectors (v1 first, then v2)
    """

    v1 = bloch.sample_unit_vector(rng)
    v2 = bloch.sample_unit_vector(rng)

    return SharedRandomness(v1, v2)


@dataclass(frozen=True)
class RoundMessage:
    """
    One message on the channel

    Alice -> Bob carries (c, d), Bob -> Alice carries (accept,).
    """

    direction: Direction
    payload: tuple

    def __post_init__(self):
        n_bits = PAYLOAD_BITS[self.direction]
        if len(self.payload) != n_bits:
            raise ValueError(
                f'{self.direction.value} payload must be {n_bits} bits, got {self.payload}'
            )
        if any(bit not in (0, 1) for bit in self.payload):
            raise ValueError(f'Payload bits must be 0 or 1, got {self.payload}')


class Channel:
    """
    Bit-counting message channel between Alice and Bob
    """

    def __init__(self, record=False):
        self.bits_a_to_b = 0
        self.bits_b_to_a = 0
        self._record = record
        self.messages = []

    def send(self, message):

        if message.direction is Direction.ALICE_TO_BOB:
            self.bits_a_to_b += len(message.payload)
        else:
            self.bits_b_to_a += len(message.payload)

        if self._record:
            self.messages.append(message)

        return message


@dataclass(frozen=True)
class Transcript:
    """
    Record of one complete protocol run
    """

    outcome_a: int
    outcome_b: int
    rounds: int
    bits_a_to_b: int
    bits_b_to_a: int
    dprime_ones: int = 0
    messages: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError(f'A run takes at least one round, got {self.rounds}')
        if self.bits_a_to_b != BITS_A_TO_B * self.rounds or self.bits_b_to_a != BITS_B_TO_A * self.rounds:
            raise ValueError(
                f'Bit counts ({self.bits_a_to_b}, {self.bits_b_to_a}) '
                f'inconsistent with {self.rounds} rounds'
            )

    @property
    def total_bits(self):
        return self.bits_a_to_b + self.bits_b_to_a


def sample_outcome(p, rng):
    """
    Draw outcome index i with probability |b_i|/2

    :param p: Povm
    :param rng: numpy Generator
    :return: int
    """

    return int(rng.choice(p.n_outcomes, p=p.probabilities))


def alice_round(a, i, s):
    """
    Alice's two message bits c = T(-a_i.v1), d = T(-a_i.v2)
    """

    a_i = a.elements[i]
    c = bloch.theta(-bloch.dot(a_i, s.v1))
    d = bloch.theta(-bloch.dot(a_i, s.v2))

    return c, d


def bob_round(b, j, s, c, d):
    """
    Bob's accept bit: 1 iff b_j.((-1)^c v1 + (-1)^d v2) >= 0
    """

    w = bloch.signed_combination(c, d, s.v1, s.v2)

    return bloch.theta(bloch.dot(b.elements[j], w))


def dprime(a_i, s):
    """
    Block-coding bit d' = T(a_i.v1) xor T(a_i.v2)
    """

    return bloch.theta(bloch.dot(a_i, s.v1)) ^ bloch.theta(bloch.dot(a_i, s.v2))


def recover_d(c, dp):
    """
    Recover Alice's second bit from c and d'
    """

    return c ^ dp


def blockcoded_cost(mean_rounds, h_dprime):
    """
    Expected bits per run when d' is entropy coded: rounds x (c + H(d') + accept)

    :param mean_rounds: float
        Mean number of rounds per run (> 0)
    :param h_dprime: float
        Entropy of d' in bits, [0, 1]
    :return: float
    """

    if mean_rounds <= 0:
        raise ValueError(f'mean_rounds must be positive, got {mean_rounds}')
    if not 0.0 <= h_dprime <= 1.0:
        raise ValueError(f'h_dprime must lie in [0, 1], got {h_dprime}')

    return mean_rounds * (1.0 + h_dprime + 1.0)


class Alice:
    """
    Alice's side of the protocol
    """

    def __init__(self, povm, rng):
        self._povm = povm
        self._rng = rng
        self.outcome = None
        self.dprime_ones = 0

    def send(self, shared):

        # Fresh outcome every round
        self.outcome = sample_outcome(self._povm, self._rng)
        c, d = alice_round(self._povm, self.outcome, shared)

        # d' is tallied for entropy bookkeeping only; the plain encoding still sends d
        self.dprime_ones += dprime(self._povm.elements[self.outcome], shared)

        return RoundMessage(Direction.ALICE_TO_BOB, (c, d))

    def receive(self, message):
        return message.payload[0] == 1


class Bob:
    """
    Bob's side of the protocol
    """

    def __init__(self, povm, rng):
        self._povm = povm
        self._rng = rng
        self.outcome = None

    def respond(self, shared, message):

        c, d = message.payload
        self.outcome = sample_outcome(self._povm, self._rng)
        accept = bob_round(self._povm, self.outcome, shared, c, d)

        return RoundMessage(Direction.BOB_TO_ALICE, (accept,))


def run_protocol(a, b, rng, max_rounds=DEFAULT_MAX_ROUNDS, shared_sampler=sample_shared,
                 record=False, run_index=0):
    """
    Run the protocol until Bob accepts

    Random draws per round, in order: v1, v2, Alice's outcome, Bob's outcome.

    :param a: Povm
        Alice's POVM
    :param b: Povm
        Bob's POVM
    :param rng: numpy Generator
        Random stream shared by both parties for this run
    :param max_rounds: int
        Give up after this many rejected rounds
    :param shared_sampler: callable
        rng -> SharedRandomness
    :param record: bool
        Keep the message log in the transcript
    :param run_index: int
        Run number reported by MaxRoundsExceeded
    :return: Transcript
    """

    if max_rounds < 1:
        raise ValueError(f'max_rounds must be at least 1, got {max_rounds}')

    alice = Alice(a, rng)
    bob = Bob(b, rng)
    channel = Channel(record=record)

    for rounds in range(1, max_rounds + 1):

        shared = shared_sampler(rng)

        cd_msg = channel.send(alice.send(shared))
        accept_msg = channel.send(bob.respond(shared, cd_msg))

        if alice.receive(accept_msg):
            return Transcript(
                outcome_a=alice.outcome,
                outcome_b=bob.outcome,
                rounds=rounds,
                bits_a_to_b=channel.bits_a_to_b,
                bits_b_to_a=channel.bits_b_to_a,
                dprime_ones=alice.dprime_ones,
                messages=tuple(channel.messages),
            )

    raise MaxRoundsExceeded(run_index, max_rounds)


@dataclass(frozen=True)
class BlockResult:
    """
    Outcomes of a block of runs from the vectorized engine
    """

    first_run: int
    outcome_a: np.ndarray
    outcome_b: np.ndarray
    rounds: np.ndarray
    dprime_ones: int

    @property
    def n_runs(self):
        return self.rounds.size


def run_block(a, b, rng, n_runs, max_rounds=DEFAULT_MAX_ROUNDS, first_run=0):
    """
    Run n_runs independent protocol executions with one rng, vectorized over runs

    Every iteration plays one round of every run that is still pending, with the
    same rules as run_protocol(). Draw order per iteration: v1 for all pending
    runs, v2, Alice's outcomes, Bob's outcomes.

    :param a: Povm
    :param b: Povm
    :param rng: numpy Generator
    :param n_runs: int
    :param max_rounds: int
    :param first_run: int
        Global index of the first run in this block (for error reporting)
    :return: BlockResult
    """

    pa = a.probabilities
    pb = b.probabilities

    outcome_a = np.zeros(n_runs, dtype=np.int64)
    outcome_b = np.zeros(n_runs, dtype=np.int64)
    rounds = np.zeros(n_runs, dtype=np.int64)
    dprime_ones = 0

    pending = np.arange(n_runs)

    for _ in range(max_rounds):

        m = pending.size
        if m == 0:
            break

        # Shared randomness for this round
        v1 = bloch.sample_unit_vectors(rng, m)
        v2 = bloch.sample_unit_vectors(rng, m)

        # Alice's outcome and message bits
        i = rng.choice(a.n_outcomes, size=m, p=pa)
        a_i = a.elements[i]
        a_v1 = bloch.dot(a_i, v1)
        a_v2 = bloch.dot(a_i, v2)
        c = bloch.theta(-a_v1)
        d = bloch.theta(-a_v2)
        dprime_ones += int(np.count_nonzero(bloch.theta(a_v1) ^ bloch.theta(a_v2)))

        # Bob's outcome and accept test
        j = rng.choice(b.n_outcomes, size=m, p=pb)
        w = bloch.signed_combination(c, d, v1, v2)
        accept = bloch.theta(bloch.dot(b.elements[j], w)).astype(bool)

        rounds[pending] += 1
        done = pending[accept]
        outcome_a[done] = i[accept]
        outcome_b[done] = j[accept]
        pending = pending[~accept]

    if pending.size > 0:
        raise MaxRoundsExceeded(first_run + int(pending[0]), max_rounds)

    LOGGER.debug(f'Block at run {first_run}: {n_runs} runs, {int(rounds.sum())} rounds')

    return BlockResult(first_run, outcome_a, outcome_b, rounds, dprime_ones)


def block_rng(seed, block, stream=0):
    """
    Random stream for one block of runs

    Substream key (stream, block) under the master seed. Run k always belongs
    to block k // BLOCK_SIZE, so a run's draws depend only on (seed, stream, k).

    :param seed: int
        Master seed
    :param block: int
        Block index
    :param stream: int
        Experiment stream (separates e.g. CHSH settings or entropy sampling)
    :return: numpy Generator
    """

    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))


def iter_blocks(trials, block_size=BLOCK_SIZE):
    """
    Split run indices 0..trials-1 into consecutive blocks

    :return: list of (block index, first run, number of runs)
    """

    return [
        (k, first, min(block_size, trials - first))
        for k, first in enumerate(range(0, trials, block_size))
    ]
