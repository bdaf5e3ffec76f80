import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, special

from seqnw.bandwidth import (
    RateExponents,
    a_limit,
    a_opt_pointwise,
    a_opt_uniform,
    a_opt_uniform_logdomain,
    balance_residual,
    h_opt,
    lambert_w0,
    lambert_w0_log,
    lambert_w0_vec,
)
from seqnw.errors import DomainError

W_GRID = np.concatenate((-1 / math.e + np.geomspace(1e-9, 1 / math.e, 200), np.geomspace(1e-12, 1e6, 300)))


def test_special_values():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, abs=1e-15)
    assert lambert_w0(-1 / math.e) == pytest.approx(-1.0, abs=1e-10)


def test_w_of_one_against_bisection():
    root = optimize.bisect(lambda x: x * math.exp(x) - 1, 0, 1, xtol=1e-16)
    assert lambert_w0(1.0) == pytest.approx(root, abs=1e-15)
    assert lambert_w0(1.0) == pytest.approx(0.5671432904, abs=1e-10)


def test_identity_on_grid():
    for y in W_GRID:
        w = lambert_w0(y)
        assert abs(w * math.exp(w) - y) <= 1e-13 * max(1.0, abs(y))


def test_agrees_with_scipy(rng):
    ys = np.concatenate((W_GRID, rng.uniform(-1 / math.e, 50, 1000)))
    ours, ref = lambert_w0_vec(ys), special.lambertw(ys).real
    # W' = W / (y (1 + W)) blows up at -1/e; allow the error a rounding of y induces
    slope = np.abs(1 / (np.exp(ref) * (1 + ref)))
    assert np.all(np.abs(ours - ref) <= 1e-12 * np.abs(ref) + 1e-13 + 4e-16 * np.abs(ys) * slope)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1 / math.e + 1e-12, 1e100), st.floats(-1 / math.e + 1e-12, 1e100))
def test_strictly_increasing(a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert lambert_w0(lo) <= lambert_w0(hi)


def test_below_branch_point_rejected():
    with pytest.raises(DomainError):
        lambert_w0(-0.4)
    with pytest.raises(DomainError):
        lambert_w0(float("nan"))


def test_huge_arguments_through_the_log():
    for L in (50.0, 700.0, 1e4, 1e8):
        w = lambert_w0_log(L)
        assert w + math.log(w) == pytest.approx(L, rel=1e-14)
    assert lambert_w0(1e305) == pytest.approx(lambert_w0_log(math.log(1e305)), rel=1e-15)


def test_rate_exponents():
    ex = RateExponents(1.0, 2.0)
    assert ex.j == pytest.approx(5 / 3, rel=1e-15)
    assert ex.k == pytest.approx(2 / 3, rel=1e-15)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("beta", [0.5, 1.0])
def test_balance_and_monotone_approach(p, beta):
    ns = [1e3, 1e6, 1e9, 1e12, 1e50, 1e300]
    a = [a_opt_pointwise(n, beta, p) for n in ns]
    for n, ai in zip(ns, a):
        assert abs(balance_residual(ai, n, beta, p)) <= 1e-10
    assert all(y < x for x, y in zip(a, a[1:]))
    assert all(ai > a_limit(p) for ai in a)


def test_uniform_tends_to_pointwise():
    gaps = [a_opt_uniform(n, 1.0, 2.0) - a_opt_pointwise(n, 1.0, 2.0) for n in (1e4, 1e6, 1e8)]
    assert all(g > 0 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]


def test_uniform_balance_and_dual_evaluation():
    for n in (1e4, 1e6, 1e12):
        a = a_opt_uniform(n, 1.0, 2.0)
        target = math.log(n) - 2 * math.log(math.log(n))
        assert abs(balance_residual(a, n, 1.0, 2.0, target)) <= 1e-10
        assert a == pytest.approx(a_opt_uniform_logdomain(n, 1.0, 2.0), abs=1e-10)


def test_negexp_uniform_form_is_finite_but_drifts():
    vals = [a_opt_uniform(n, 1.0, 2.0, form="negexp") for n in (1e4, 1e6, 1e8)]
    assert all(math.isfinite(v) for v in vals)
    assert vals[2] < a_limit(2.0)
    with pytest.raises(ValueError):
        a_opt_uniform(1e4, 1.0, 2.0, form="other")


def test_domain_checks():
    with pytest.raises(DomainError):
        a_opt_pointwise(2.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        a_opt_pointwise(100.0, 0.2, 2.0)
    with pytest.raises(DomainError):
        a_opt_uniform(100.0, 1.0, 1.0)


def test_h_opt():
    assert h_opt(1000, 0.0) == 1.0
    assert h_opt(math.exp(math.e), 1.0) == pytest.approx(math.e, rel=1e-15)
    assert h_opt(1e6, -1.5) == pytest.approx(math.log(1e6) ** -1.5, rel=1e-15)
    with pytest.raises(DomainError):
        h_opt(2, 1.0)
