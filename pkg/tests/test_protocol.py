import math
import pickle

import numpy as np
import pytest

from eprsim import bloch, oracle, protocol
from eprsim.povm import random_povm, rotate_povm, validate
from eprsim.protocol import (
    Direction,
    MaxRoundsExceeded,
    RoundMessage,
    SharedRandomness,
    Transcript,
)
from eprsim.stats import ProtocolTally, binomial_sigma, chi_square_pvalue, tvd, tvd_bound

N_RUNS = 1_000_000


def simulate(a, b, seed, n_runs=N_RUNS):
    """Tally n_runs of the vectorized engine, block seeded"""
    tally = ProtocolTally.empty((a.n_outcomes, b.n_outcomes))
    for block, first, n in protocol.iter_blocks(n_runs):
        result = protocol.run_block(a, b, protocol.block_rng(seed, block), n, first_run=first)
        tally = tally.merge(ProtocolTally.from_block(result, tally.counts.shape))
    return tally


def test_bob_round_examples(proj_z):
    z = np.array([0.0, 0.0, 1.0])
    s = SharedRandomness(z, z)
    assert protocol.bob_round(proj_z, 0, s, 0, 0) == 1
    assert protocol.bob_round(proj_z, 0, s, 1, 1) == 0


def test_alice_round_bits(proj_z):
    s = SharedRandomness(np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0]))
    # a_0 = +z: c = T(-1) = 0, d = T(1) = 1
    assert protocol.alice_round(proj_z, 0, s) == (0, 1)
    assert protocol.alice_round(proj_z, 1, s) == (1, 0)


@pytest.mark.slow
def test_sample_outcome_frequencies(proj_z, sic, rng):
    n = 1_000_000
    i = np.array([protocol.sample_outcome(proj_z, rng) for _ in range(n)])
    assert np.all(np.abs(np.bincount(i, minlength=2) / n - 0.5) <= 0.002)

    i = np.array([protocol.sample_outcome(sic, rng) for _ in range(n)])
    assert np.all(np.abs(np.bincount(i, minlength=4) / n - 0.25) <= 0.0013)


def test_sample_outcome_skips_zero_weight(rng):
    p = validate([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    draws = {protocol.sample_outcome(p, rng) for _ in range(20_000)}
    assert draws == {0, 2}


def test_round_message_layout():
    RoundMessage(Direction.ALICE_TO_BOB, (0, 1))
    RoundMessage(Direction.BOB_TO_ALICE, (1,))
    with pytest.raises(ValueError):
        RoundMessage(Direction.ALICE_TO_BOB, (1,))
    with pytest.raises(ValueError):
        RoundMessage(Direction.BOB_TO_ALICE, (2,))


def test_transcript_accounting(random_pair, rng):
    a, b = random_pair
    for run in range(2000):
        t = protocol.run_protocol(a, b, rng, record=True, run_index=run)
        assert t.bits_a_to_b == 2 * t.rounds
        assert t.bits_b_to_a == t.rounds
        assert t.total_bits == 3 * t.rounds
        assert len(t.messages) == 2 * t.rounds

        # Alternating Alice / Bob messages, only the last one accepts
        accepts = [m.payload[0] for m in t.messages[1::2]]
        assert [m.direction for m in t.messages[::2]] == [Direction.ALICE_TO_BOB] * t.rounds
        assert accepts == [0] * (t.rounds - 1) + [1]


def test_transcript_rejects_inconsistent_bits():
    with pytest.raises(ValueError):
        Transcript(outcome_a=0, outcome_b=0, rounds=2, bits_a_to_b=2, bits_b_to_a=1)
    with pytest.raises(ValueError):
        Transcript(outcome_a=0, outcome_b=0, rounds=0, bits_a_to_b=0, bits_b_to_a=0)


class PinnedRng:
    """Alice always draws outcome 0, Bob always draws outcome 1"""

    def __init__(self):
        self.calls = 0

    def choice(self, n, p=None):
        self.calls += 1
        return 0 if self.calls % 2 == 1 else 1


def test_max_rounds_exceeded(proj_z):
    z = np.array([0.0, 0.0, 1.0])

    # a_0 = +z sends c = d = 0; Bob's b_1 = -z then tests -z.(2z) < 0 every round
    with pytest.raises(MaxRoundsExceeded) as err:
        protocol.run_protocol(
            proj_z, proj_z, PinnedRng(), max_rounds=3,
            shared_sampler=lambda rng: SharedRandomness(z, z), run_index=17
        )

    assert err.value.run_index == 17
    assert err.value.max_rounds == 3


def test_max_rounds_exceeded_pickles():
    err = pickle.loads(pickle.dumps(MaxRoundsExceeded(5, 10)))
    assert (err.run_index, err.max_rounds) == (5, 10)
    assert 'Run 5' in str(err)


def test_dprime_recovers_d(rng):
    n = 100_000
    a_i = bloch.sample_unit_vectors(rng, n)
    v1 = bloch.sample_unit_vectors(rng, n)
    v2 = bloch.sample_unit_vectors(rng, n)
    s = SharedRandomness(v1, v2)

    c = bloch.theta(-bloch.dot(a_i, v1))
    d = bloch.theta(-bloch.dot(a_i, v2))
    dp = protocol.dprime(a_i, s)

    assert np.array_equal(protocol.recover_d(c, dp), d)


def test_blockcoded_cost():
    assert math.isclose(protocol.blockcoded_cost(2.0, 0.85), 5.7)
    assert protocol.blockcoded_cost(2.0, 1.0) == 6.0
    with pytest.raises(ValueError):
        protocol.blockcoded_cost(0.0, 0.85)
    with pytest.raises(ValueError):
        protocol.blockcoded_cost(2.0, 1.5)


def test_rotation_equivariance(sic, random_pair):
    a, b = random_pair
    rotvec = np.random.default_rng(99).standard_normal(3)

    def rotated_sampler(rng):
        s = protocol.sample_shared(rng)
        return SharedRandomness(bloch.rotate(s.v1, rotvec), bloch.rotate(s.v2, rotvec))

    for pa, pb in ((a, b), (sic, b)):
        ra = rotate_povm(pa, rotvec)
        rb = rotate_povm(pb, rotvec)
        for seed in range(200):
            t = protocol.run_protocol(pa, pb, np.random.default_rng(seed))
            rt = protocol.run_protocol(ra, rb, np.random.default_rng(seed), shared_sampler=rotated_sampler)
            assert (t.outcome_a, t.outcome_b, t.rounds) == (rt.outcome_a, rt.outcome_b, rt.rounds)


def test_block_rng_streams():
    a = protocol.block_rng(1, 0).standard_normal(4)
    assert np.array_equal(a, protocol.block_rng(1, 0).standard_normal(4))
    assert not np.array_equal(a, protocol.block_rng(1, 1).standard_normal(4))
    assert not np.array_equal(a, protocol.block_rng(1, 0, stream=1).standard_normal(4))


def test_iter_blocks():
    assert protocol.iter_blocks(10, block_size=4) == [(0, 0, 4), (1, 4, 4), (2, 8, 2)]
    assert sum(n for _, _, n in protocol.iter_blocks(1_000_000)) == 1_000_000


def test_run_block_max_rounds(proj_z):
    with pytest.raises(MaxRoundsExceeded) as err:
        protocol.run_block(proj_z, proj_z, np.random.default_rng(0), 1000, max_rounds=1, first_run=5000)
    assert err.value.run_index >= 5000


@pytest.mark.slow
def test_projective_zz_never_anticorrelated(proj_z):
    tally = simulate(proj_z, proj_z, seed=1)
    assert tally.counts[0, 1] == 0
    assert tally.counts[1, 0] == 0
    assert tally.n_runs == N_RUNS


@pytest.mark.slow
def test_cost_and_rounds(random_pair):
    a, b = random_pair
    tally = simulate(a, b, seed=2)

    mean_rounds = tally.total_rounds / tally.n_runs
    mean_bits = (tally.bits_a_to_b + tally.bits_b_to_a) / tally.n_runs
    assert 1.99 <= mean_rounds <= 2.01
    assert 5.97 <= mean_bits <= 6.03

    # Rounds are geometric(1/2)
    freq = tally.round_frequencies()
    for k in range(1, 11):
        sigma = math.sqrt(0.5 ** k * (1 - 0.5 ** k) / tally.n_runs)
        assert abs(freq[k - 1] - 0.5 ** k) <= 5 * sigma


@pytest.mark.slow
@pytest.mark.parametrize('fixture', ['proj_z_proj_z', 'proj_z_proj_x', 'sic_sic', 'random'])
def test_joint_distribution(fixture, proj_z, proj_x, sic, random_pair):
    a, b = {
        'proj_z_proj_z': (proj_z, proj_z),
        'proj_z_proj_x': (proj_z, proj_x),
        'sic_sic': (sic, sic),
        'random': random_pair,
    }[fixture]

    tally = simulate(a, b, seed=3)
    exact = oracle.joint(a, b)
    e = tally.empirical()

    assert tvd(e.frequencies(), exact.p) < min(0.005, tvd_bound(exact.p.size, e.n))
    assert chi_square_pvalue(e, exact) > 1e-6

    # Per-round acceptance is 1/2
    assert 0.498 <= tally.n_runs / tally.total_rounds <= 0.502

    # Marginals within 3 binomial sigma
    for emp, ref in ((e.marginal_a(), oracle.marginal(a)), (e.marginal_b(), oracle.marginal(b))):
        sigma = binomial_sigma(ref, e.n)
        assert np.all(np.abs(emp - ref) <= 3 * sigma + 1e-12)


@pytest.mark.slow
def test_random_pairs_tvd():
    rng = np.random.default_rng(5)
    for k in range(5):
        a = random_povm(int(rng.integers(2, 6)), rng)
        b = random_povm(int(rng.integers(2, 6)), rng)
        tally = simulate(a, b, seed=100 + k)
        exact = oracle.joint(a, b)
        assert tvd(tally.empirical().frequencies(), exact.p) < 0.005
        assert chi_square_pvalue(tally.empirical(), exact) > 1e-6


@pytest.mark.slow
def test_accept_rate_random_rounds():
    rng = np.random.default_rng(6)
    accepts = 0
    n_rounds = 0
    for k in range(10):
        a = random_povm(int(rng.integers(2, 7)), rng)
        b = random_povm(int(rng.integers(2, 7)), rng)
        tally = simulate(a, b, seed=200 + k, n_runs=50_000)
        accepts += tally.n_runs
        n_rounds += tally.total_rounds
    assert 0.498 <= accepts / n_rounds <= 0.502
