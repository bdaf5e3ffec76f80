import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqnw.errors import DomainError, GridTooLarge
from seqnw.seqspace import (
    BandwidthSchedule,
    TruncSet,
    cover_grid,
    grid_size,
    kolmogorov_entropy,
    nearest_grid_point,
    sample_cover_grid,
    weighted_norm,
    weighted_norms,
)

coords = st.lists(st.floats(-5, 5), min_size=1, max_size=8)


def test_norm_of_identical_points_is_zero():
    x = np.array([0.3, -1.2, 4.0])
    assert weighted_norm(x, x, BandwidthSchedule(2.0, 0.7)) == 0.0


def test_single_coordinate_norm():
    assert weighted_norm([0, 2, 0], [0, 0, 0], BandwidthSchedule(1.0, 1.0)) == pytest.approx(1.0, abs=1e-15)


def test_three_term_norm_against_direct_sum():
    expected = math.sqrt(sum(1 / (j**2 * 0.5) ** 2 for j in (1, 2, 3)))
    assert weighted_norm([1, 1, 1], [0], BandwidthSchedule(2.0, 0.5)) == pytest.approx(expected, rel=1e-15)
    assert expected**2 == pytest.approx(4.29938, rel=1e-5)


def test_padding_makes_lengths_irrelevant():
    s = BandwidthSchedule(2.0, 0.3)
    assert weighted_norm([1.0, 2.0], [1.0], s) == weighted_norm([1.0, 2.0, 0, 0], [1.0, 0, 0], s)


def test_vectorized_norms_match_scalar(rng):
    s = BandwidthSchedule(1.5, 0.4)
    X = rng.normal(size=(50, 6))
    c = rng.normal(size=4)
    vec = weighted_norms(X, c, s)
    assert vec.shape == (50,)
    assert np.allclose(vec, [weighted_norm(x, c, s) for x in X], rtol=0, atol=1e-14)


@settings(max_examples=200, deadline=None)
@given(coords, coords, coords, st.floats(0.1, 3), st.floats(0.0, 3))
def test_metric_axioms(a, b, c, h, p):
    s = BandwidthSchedule(p, h)
    ab, ba = weighted_norm(a, b, s), weighted_norm(b, a, s)
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ab <= weighted_norm(a, c, s) + weighted_norm(c, b, s) + 1e-12


@settings(max_examples=100, deadline=None)
@given(coords, st.floats(0.05, 5))
def test_doubling_h_halves_the_norm(a, h):
    n1 = weighted_norm(a, [0.0], BandwidthSchedule(2, h))
    n2 = weighted_norm(a, [0.0], BandwidthSchedule(2, 2 * h))
    assert n2 == pytest.approx(n1 / 2, rel=1e-14, abs=1e-300)


def test_schedule_validation():
    with pytest.raises(DomainError):
        BandwidthSchedule(2.0, 0.0)
    with pytest.raises(DomainError):
        BandwidthSchedule(2.0, 1.0, -1.0)
    with pytest.raises(DomainError):
        BandwidthSchedule(-1.0, 1.0)
    assert np.all(np.diff(BandwidthSchedule(1.2).weights(10)) > 0)


def test_tau_above_limit_is_rejected():
    with pytest.raises(DomainError):
        BandwidthSchedule().weights(10**9 + 1)
    with pytest.raises(DomainError):
        TruncSet(0)


def test_truncset_membership():
    t = TruncSet(2, 1.0)
    assert t.contains([1.0, -1.0])
    assert t.contains([0.5, 0.5, 0.0])
    assert not t.contains([0.5, 0.5, 0.1])
    assert not t.contains([1.01, 0.0])


def test_entropy_examples():
    assert kolmogorov_entropy(1, 1, 2) == pytest.approx(math.log(2), rel=1e-15)
    assert kolmogorov_entropy(2, 1, 1) == pytest.approx(2 * math.log(2 * math.sqrt(2) + 1), rel=1e-15)


def test_entropy_is_of_order_log_n_squared():
    ratios = []
    for e in range(3, 10):
        n = 10.0**e
        ratios.append(kolmogorov_entropy(math.ceil(math.log(n)), 1.0, math.log(n) / n) / math.log(n) ** 2)
    assert 0.5 < min(ratios) and max(ratios) < 3.0


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 50), st.floats(0.1, 10), st.floats(0.01, 5))
def test_entropy_monotonicity(tau, lam, eta):
    base = kolmogorov_entropy(tau, lam, eta)
    assert kolmogorov_entropy(tau + 1, lam, eta) > base
    assert kolmogorov_entropy(tau, lam * 1.1, eta) > base
    assert kolmogorov_entropy(tau, lam, eta * 1.1) < base


def test_entropy_rejects_nonpositive():
    with pytest.raises(DomainError):
        kolmogorov_entropy(1, 1, 0)


def test_one_dimensional_grid():
    g = cover_grid(TruncSet(1, 1.0), 1.0)
    assert g.ravel().tolist() == [-1.0, 0.0, 1.0]


def test_corners_are_covered():
    t = TruncSet(2, 1.0)
    g = cover_grid(t, 0.5)
    for corner in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
        assert np.min(np.linalg.norm(g - np.array(corner), axis=1)) <= 0.5


@pytest.mark.parametrize("tau,lam,eta", [(1, 1.0, 1.0), (2, 1.0, 0.5), (3, 2.0, 1.3), (4, 0.5, 0.9)])
def test_grid_size_bound_and_covering(tau, lam, eta, rng):
    t = TruncSet(tau, lam)
    g = cover_grid(t, eta)
    assert len(g) == grid_size(t, eta) <= math.ceil(2 * lam * math.sqrt(tau) / eta + 1) ** tau
    u = rng.uniform(-lam, lam, size=(1000, tau))
    d = np.linalg.norm(u - nearest_grid_point(u, t, eta), axis=1)
    assert np.all(d <= eta)


def test_grid_cap():
    with pytest.raises(GridTooLarge, match="reduce tau or increase eta"):
        cover_grid(TruncSet(12, 1.0), 0.1, cap=10**6)


def test_grid_requires_eta_at_most_two_lambda():
    with pytest.raises(DomainError):
        cover_grid(TruncSet(1, 1.0), 2.5)


def test_sampled_grid_is_a_subset(rng):
    t = TruncSet(3, 1.0)
    full = {tuple(r) for r in cover_grid(t, 0.7)}
    s = sample_cover_grid(t, 0.7, 40, rng)
    assert s.shape == (40, 3)
    assert all(tuple(r) in full for r in s)
    assert np.all(s[0] == -1.0) and np.all(s[1] == 1.0)
