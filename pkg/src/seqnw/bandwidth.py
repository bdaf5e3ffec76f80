"""Lambert W and the bias-variance balancing bandwidth exponent.

With ``h = (log n)^a`` the pointwise bias-variance balance reads

    j a log log n - (log n)^{-k a} = -log n,
    j = 2 beta + (1 - p)/(2p - 1),  k = 2/(2p - 1),

whose root is ``a = (j W((k/j) n^{k/j}) - k log n) / (j k log log n)``.
Writing ``u = -k a log log n`` the balance is ``e^u + (j/k) u = log n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_INV_E = math.exp(-1.0)
# largest log-argument for which exp() stays finite
_LOG_MAX = 700.0


@dataclass(frozen=True)
class RateExponents:
    beta: float
    p: float

    @property
    def j(self) -> float:
        return 2 * self.beta + (1 - self.p) / (2 * self.p - 1)

    @property
    def k(self) -> float:
        return 2 / (2 * self.p - 1)


def _initial_guess(y: float) -> float:
    if y < -0.25:
        # branch-point expansion in q = sqrt(2 (e y + 1))
        q = math.sqrt(max(2.0 * (math.e * y + 1.0), 0.0))
        return -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q**3
    if y < 3.0:
        # series about 0, tamed so it stays a decent start up to y = 3
        return y / (1.0 + y) if y > 0 else y - y * y + 1.5 * y**3
    l1 = math.log(y)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w0(y: float) -> float:
    """Principal branch of the Lambert W function for real ``y >= -1/e``.

    Halley iteration from a region-dependent start: the branch-point
    square-root expansion near ``-1/e``, a rational series near 0 and
    ``log y - log log y + log log y / log y`` for large ``y``.
    """
    y = float(y)
    if math.isnan(y) or y < -_INV_E:
        # tolerate the rounding of -1/e itself
        if not (y < -_INV_E and y > -_INV_E - 1e-15):
            raise DomainError(f"W0 is real only for y >= -1/e, got {y}")
        y = -_INV_E
    if y == 0.0:
        return 0.0
    if y == math.inf:
        return math.inf
    if y <= -_INV_E:
        return -1.0
    if y > 1e300:
        return lambert_w0_log(math.log(y))
    w = _initial_guess(y)
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - y
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w_new = w - step
        if w_new <= -1.0:
            w_new = (w - 1.0) / 2.0 if w > -1.0 else -1.0 + 1e-16
        if abs(w_new - w) <= 4e-16 * (1.0 + abs(w_new)):
            w = w_new
            break
        w = w_new
    return w


def lambert_w0_log(log_y: float) -> float:
    """``W0(exp(log_y))`` without forming ``exp(log_y)``.

    Solves ``w + log w = log_y`` by Newton's method, started from the
    three-term asymptotic expansion. Falls back to ``lambert_w0`` when the
    argument is representable and not large.
    """
    if log_y < 1.0:
        return lambert_w0(math.exp(log_y))
    l1 = log_y
    l2 = math.log(l1)
    w = l1 - l2 + l2 / l1
    for _ in range(50):
        f = w + math.log(w) - log_y
        step = f / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 4e-16 * w:
            break
    return w


lambert_w0_vec = np.vectorize(lambert_w0, otypes=[float])


def _check_n(n, beta, p):
    if not n > math.e:
        raise DomainError(f"n must exceed e so that log log n > 0, got {n}")
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")
    if beta < 0.25:
        raise DomainError(f"beta must be at least 1/4, got {beta}")


def _a_from_balance(log_target: float, n: float, ex: RateExponents) -> float:
    # root of e^u + (j/k) u = log_target, returned as a = -u / (k log log n)
    j, k = ex.j, ex.k
    log_z = math.log(k / j) + (k / j) * log_target
    w = lambert_w0(math.exp(log_z)) if log_z < _LOG_MAX else lambert_w0_log(log_z)
    return (j * w - k * log_target) / (j * k * math.log(math.log(n)))


def a_opt_pointwise(n: float, beta: float, p: float) -> float:
    """Exponent ``a`` of the pointwise optimal bandwidth ``h ~ (log n)^a``."""
    _check_n(n, beta, p)
    return _a_from_balance(math.log(n), n, RateExponents(beta, p))


def a_opt_uniform(n: float, beta: float, p: float, form: str = "derived") -> float:
    """Exponent of the bandwidth balancing the uniform (sup-norm) rate.

    The uniform rate carries an extra ``(log n)^2`` in the variance, so the
    balance becomes ``e^u + (j/k) u = log n - 2 log log n``, whose root is

        a = [j W((k/j) exp((k/j)(log n - 2 log log n))) + 2k log log n - k log n]
            / (j k log log n).

    ``form="negexp"`` instead evaluates the variant whose W argument is
    ``(k/j) exp(-(k/j) 2 log log n - k log n)``. That argument tends to 0,
    so that variant drifts to minus infinity rather than to ``-(2p-1)/2``;
    it is kept for comparison only.
    """
    _check_n(n, beta, p)
    ex = RateExponents(beta, p)
    j, k = ex.j, ex.k
    L = math.log(math.log(n))
    if form == "derived":
        return _a_from_balance(math.log(n) - 2 * L, n, ex)
    if form != "negexp":
        raise ValueError(f"unknown form {form!r}")
    z = (k / j) * math.exp(-(k / j) * 2 * L - k * math.log(n))
    w = z - z * z if z < 1e-8 else lambert_w0(z)
    return (j * w + 2 * k * L - k * math.log(n)) / (j * k * L)


def a_opt_uniform_logdomain(n: float, beta: float, p: float) -> float:
    """Same as ``a_opt_uniform(form="derived")`` but W is always evaluated from its log-argument."""
    _check_n(n, beta, p)
    ex = RateExponents(beta, p)
    j, k = ex.j, ex.k
    L = math.log(math.log(n))
    target = math.log(n) - 2 * L
    w = lambert_w0_log(math.log(k / j) + (k / j) * target)
    return (j * w - k * target) / (j * k * L)


def a_limit(p: float) -> float:
    """``-(2p - 1)/2``, the limit of the optimal exponent as ``n`` grows."""
    return -(2 * p - 1) / 2


def balance_residual(a: float, n: float, beta: float, p: float, log_target: float | None = None) -> float:
    """Relative residual of ``e^u + (j/k) u = log n`` at ``u = -k a log log n``."""
    ex = RateExponents(beta, p)
    target = math.log(n) if log_target is None else log_target
    u = -ex.k * a * math.log(math.log(n))
    return (math.exp(u) + ex.j / ex.k * u - target) / target


def h_opt(n: float, a: float, scale: float = 1.0) -> float:
    """``scale * (log n)^a``."""
    if not n >= 3:
        raise DomainError("n must be at least 3")
    return scale * math.log(n) ** a
