import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from yulefam.partitions import (CRPParams, SetPartition, bell_number, crp_table_counts, dup_partition_prob,
                                enumerate_partitions, ewens_prob, pd_stick_sample, polya_sequence_prob,
                                simulate_crp)
from yulefam.seeding import mix64

P = SetPartition.parse


def rising(x, n):
    return math.prod(x + i for i in range(n))


def pitman_eppf(alpha, theta, sizes):
    k, n = len(sizes), sum(sizes)
    num = math.prod(theta + i * alpha for i in range(1, k)) if alpha else theta ** (k - 1)
    return num / rising(theta + 1, n - 1) * math.prod(rising(1 - alpha, s - 1) for s in sizes)


def test_parse_and_format():
    p = P("1,2|3")
    assert p.blocks == ((1, 2), (3,))
    assert str(p) == "1,2|3"
    assert P("3|2,1") == p
    assert p.rgs() == (0, 0, 1)
    assert p.least_elements == (1, 3)
    assert SetPartition.from_labels(["a", "b", "a"]) == P("1,3|2")
    with pytest.raises(ValueError):
        P("1,2|4")


@pytest.mark.parametrize("n,bell", [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)])
def test_bell_and_enumeration(n, bell):
    parts = list(enumerate_partitions(n))
    assert bell_number(n) == bell
    assert len(parts) == bell == len(set(parts))


def test_enumeration_cap():
    with pytest.raises(ValueError):
        next(enumerate_partitions(13))
    with pytest.raises(ValueError):
        next(enumerate_partitions(0))


def test_duplication_hand_values():
    expected = {"1,2,3": 0.25, "1,2|3": 0.25, "1,3|2": 0.125, "1|2,3": 0.125, "1|2|3": 0.25}
    for text, prob in expected.items():
        assert dup_partition_prob(0.5, P(text)) == pytest.approx(prob, rel=1e-14)
    # same block sizes, different probabilities: not exchangeable
    assert dup_partition_prob(0.5, P("1,2|3")) != dup_partition_prob(0.5, P("1,3|2"))


def test_duplication_n2():
    assert dup_partition_prob(0.3, P("1,2")) == pytest.approx(0.7)
    assert dup_partition_prob(0.3, P("1|2")) == pytest.approx(0.3)


@pytest.mark.parametrize("n", range(1, 7))
def test_laws_sum_to_one(n):
    for r in (0.1, 0.5, 0.9):
        assert abs(sum(dup_partition_prob(r, p) for p in enumerate_partitions(n)) - 1) < 1e-12
    for theta in (0.3, 1.0, 4.0):
        assert abs(sum(ewens_prob(theta, p) for p in enumerate_partitions(n)) - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(theta=st.floats(0.05, 20), n=st.integers(1, 7), data=st.data())
def test_ewens_matches_eppf(theta, n, data):
    parts = list(enumerate_partitions(n))
    p = parts[data.draw(st.integers(0, len(parts) - 1))]
    assert ewens_prob(theta, p) == pytest.approx(pitman_eppf(0.0, theta, p.sizes), rel=1e-10)
    assert ewens_prob(theta, p, log=True) == pytest.approx(math.log(ewens_prob(theta, p)), abs=1e-12)


def test_log_forms():
    p = P("1,3|2|4")
    assert math.exp(dup_partition_prob(0.4, p, log=True)) == pytest.approx(dup_partition_prob(0.4, p))


def test_polya_hand_values():
    assert polya_sequence_prob(1, 1, [1, 1]) == pytest.approx(1 / 3)
    assert polya_sequence_prob(1, 1, [1, 0]) == pytest.approx(1 / 6)
    assert polya_sequence_prob(2, 1, [1]) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        polya_sequence_prob(0, 1, [1])
    with pytest.raises(ValueError):
        polya_sequence_prob(1, 1, [2])


@pytest.mark.parametrize("a,b,N", [(1, 1, 4), (2, 3, 5)])
def test_polya_exchangeable_and_normalised(a, b, N):
    seqs = list(itertools.product([0, 1], repeat=N))
    total = sum(polya_sequence_prob(a, b, s) for s in seqs)
    assert total == pytest.approx(1.0, abs=1e-12)
    for s in seqs:
        assert polya_sequence_prob(a, b, s) == pytest.approx(polya_sequence_prob(a, b, sorted(s)))


def test_crp_params():
    CRPParams(0.0, 0.0)
    with pytest.raises(ValueError):
        CRPParams(1.0, 1.0)
    with pytest.raises(ValueError):
        CRPParams(0.5, -0.5)


def test_crp_zero_zero_is_one_table():
    assert simulate_crp(CRPParams(0.0, 0.0), 10, 1).k == 1
    assert np.all(crp_table_counts(CRPParams(0.0, 0.0), 10, 5, 1) == 1)
    with pytest.raises(ValueError):
        pd_stick_sample(CRPParams(0.0, 0.0), 5, 1)


@pytest.mark.parametrize("alpha,theta", [(0.0, 1.5), (0.4, 0.7)])
def test_crp_frequencies_match_eppf(alpha, theta):
    n, reps = 4, 20000
    params = CRPParams(alpha, theta)
    seen = {}
    for i in range(reps):
        key = str(simulate_crp(params, n, mix64(3, i)))
        seen[key] = seen.get(key, 0) + 1
    for p in enumerate_partitions(n):
        prob = pitman_eppf(alpha, theta, p.sizes)
        freq = seen.get(str(p), 0) / reps
        assert abs(freq - prob) < 4 * math.sqrt(prob * (1 - prob) / reps)


def test_table_count_mean_ewens():
    theta, n, reps = 2.0, 100, 20000
    k = crp_table_counts(CRPParams(0.0, theta), n, reps, 4)
    expect = sum(theta / (theta + i) for i in range(n))
    assert abs(k.mean() - expect) < 4 * k.std() / math.sqrt(reps)


def test_table_count_chain_matches_seating():
    params, n, reps = CRPParams(0.5, 1.0), 30, 4000
    fast = crp_table_counts(params, n, reps, 5)
    slow = np.array([simulate_crp(params, n, mix64(6, i)).k for i in range(reps)])
    se = math.sqrt(fast.var() / reps + slow.var() / reps)
    assert abs(fast.mean() - slow.mean()) < 4 * se


def test_pd_sticks():
    params = CRPParams(0.3, 1.0)
    p = pd_stick_sample(params, 50, 1)
    assert np.all(p >= 0) and p.sum() < 1
    first = np.array([pd_stick_sample(params, 1, mix64(2, i))[0] for i in range(20000)])
    assert abs(first.mean() - 0.7 / 2.0) < 4 * first.std() / math.sqrt(first.size)
