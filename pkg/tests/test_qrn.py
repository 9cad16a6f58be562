import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from yulefam.qrn import expected_Y, expected_Y_all, sample_qrn, sample_qrn_sparse, stick_tail_prob
from yulefam.seeding import mix64


def test_expected_Y_hand_value():
    # (1 - 1/4)(1 - 1/6)
    assert expected_Y(0.5, 3, 1) == pytest.approx(0.625, rel=1e-15)
    assert expected_Y(0.5, 3, 3) == 1.0
    np.testing.assert_allclose(expected_Y_all(0.3, 50), [expected_Y(0.3, 50, k) for k in range(1, 51)])


def test_expected_Y_bounds():
    with pytest.raises(ValueError):
        expected_Y(0.5, 3, 0)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.01, 0.99), N=st.integers(1, 500), seed=st.integers(0, 2**40))
def test_fractions_sum_to_one(r, N, seed):
    q = sample_qrn(r, N, seed)
    assert q.W[0] == 1.0
    assert np.all((q.p >= 0) & (q.p <= 1))
    assert q.p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(q.Y) >= 0)


def test_Y_mean_matches_product():
    r, N, reps = 0.4, 200, 20000
    Y = np.array([sample_qrn(r, N, mix64(3, i)).Y[[0, 9, 99]] for i in range(reps)])
    exact = [expected_Y(r, N, k) for k in (1, 10, 100)]
    se = Y.std(0, ddof=1) / math.sqrt(reps)
    assert np.all(np.abs(Y.mean(0) - exact) < 4 * se)


def test_stick_tail_prob_against_sampling():
    r, k, a, reps = 0.5, 4, 0.2, 50000
    W = np.array([sample_qrn(r, k, mix64(6, i)).W[k - 1] for i in range(reps)])
    p = stick_tail_prob(r, k, a)
    assert p == pytest.approx(0.5 * 0.8 ** 3)
    assert abs((W >= a).mean() - p) < 4 * math.sqrt(p * (1 - p) / reps)
    with pytest.raises(ValueError):
        stick_tail_prob(r, 1, a)


def test_sparse_agrees_in_law_with_dense():
    r, N, reps = 0.3, 2000, 3000
    dense = np.array([sample_qrn(r, N, mix64(1, i)).Y[0] for i in range(reps)])
    sparse = np.array([sample_qrn_sparse(r, N, mix64(2, i)).Y_at(1) for i in range(reps)])
    se = math.sqrt(dense.var(ddof=1) / reps + sparse.var(ddof=1) / reps)
    assert abs(dense.mean() - sparse.mean()) < 4 * se
    assert abs(sparse.mean() - expected_Y(r, N, 1)) < 4 * sparse.std(ddof=1) / math.sqrt(reps)


def test_sparse_to_dense_roundtrip():
    s = sample_qrn_sparse(0.2, 500, 9)
    d = s.to_dense()
    assert np.all(s.index >= 2) and np.all(s.index <= 500)
    np.testing.assert_allclose(s.Y_at(np.arange(1, 501)), d.Y)
    assert d.p.sum() == pytest.approx(1.0)


def test_tail_count():
    q = sample_qrn(0.5, 1000, 4)
    assert q.tail_count(0) == 1000
    assert q.tail_count(1e9) == 0


def test_single_stick():
    q = sample_qrn(0.3, 1, 5)
    np.testing.assert_array_equal(q.p, [1.0])


def test_expected_Y_limits():
    assert expected_Y(1e-12, 100, 1) == pytest.approx(1.0)
    assert expected_Y(0.7, 100, 100) == 1.0


@pytest.mark.parametrize("r", [0.05, 0.3, 0.6, 0.95])
def test_expected_Y_bracketing(r):
    for N in (1, 2, 10, 137, 1000):
        k = np.arange(1, N + 1)
        ey = expected_Y_all(r, N)
        assert np.all((k / N) ** r * np.exp(-r ** 2 / k) <= ey * (1 + 1e-12))
        assert np.all(ey <= (k / N) ** r * np.exp(r / k) * (1 + 1e-12))


def test_Y10_mean():
    reps = 200000
    Y = np.array([sample_qrn(0.5, 50, mix64(9, i)).Y[9] for i in range(reps)])
    assert abs(Y.mean() - expected_Y(0.5, 50, 10)) < 3 * Y.std(ddof=1) / math.sqrt(reps)


def test_stick_tail_examples():
    assert stick_tail_prob(0.5, 3, 0.5) == pytest.approx(0.125)
    assert stick_tail_prob(0.4, 7, 1e-12) == pytest.approx(0.4)
    reps = 200000
    W3 = np.array([sample_qrn(0.5, 3, mix64(10, i)).W[2] for i in range(reps)])
    assert abs((W3 > 0.5).mean() - 0.125) < 3 * math.sqrt(0.125 * 0.875 / reps)


def test_sparsity_is_binomial():
    r, N, reps = 0.2, 300, 5000
    nz = np.array([np.count_nonzero(sample_qrn(r, N, mix64(11, i)).W[1:]) for i in range(reps)])
    assert abs(nz.mean() - r * (N - 1)) < 3 * nz.std(ddof=1) / math.sqrt(reps)


def test_sticks_and_population_share_means():
    from yulefam.seeding import make_rng
    from yulefam.sim_core import duplication_labels
    r, N, reps, k = 0.3, 200, 20000, 20
    Y = np.array([sample_qrn(r, N, mix64(12, i)).Y[k - 1] for i in range(reps)])
    labels = duplication_labels(make_rng(13), r, N, size=reps)
    X = (labels <= k).mean(axis=1)
    se = math.sqrt(Y.var(ddof=1) / reps + X.var(ddof=1) / reps)
    assert abs(Y.mean() - X.mean()) < 3 * se
