"""Nadaraya-Watson estimation with sequence-valued regressors."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonSummable
from .kernels import KernelSpec, XiEstimate, spherical_weight
from .seqspace import BandwidthSchedule


@dataclass(frozen=True)
class Contraction:
    """Coefficients ``c_j`` (j = 1, 2, ...) of a Hoelder-type contraction.

    Either geometric, ``c_j = c0 * exp(-gamma * j)``, or an explicit finite
    list (zero beyond its end).
    """

    c0: float = 1.0
    gamma: float = 1.0
    coeffs: tuple | None = None

    @classmethod
    def geometric(cls, c0=1.0, gamma=1.0):
        if c0 < 0 or gamma <= 0:
            raise ValueError("need c0 >= 0 and gamma > 0")
        return cls(c0, gamma)

    @classmethod
    def explicit(cls, coeffs):
        coeffs = tuple(float(c) for c in coeffs)
        if any(c < 0 for c in coeffs):
            raise ValueError("contraction coefficients must be nonnegative")
        return cls(coeffs=coeffs)

    @property
    def is_geometric(self) -> bool:
        return self.coeffs is None

    def head(self, tau: int) -> np.ndarray:
        """``(c_1, ..., c_tau)``."""
        if self.is_geometric:
            return self.c0 * np.exp(-self.gamma * np.arange(1, tau + 1))
        c = np.zeros(tau)
        m = min(tau, len(self.coeffs))
        c[:m] = self.coeffs[:m]
        return c

    def total(self) -> float:
        if self.is_geometric:
            r = math.exp(-self.gamma)
            return self.c0 * r / (1 - r)
        return float(sum(self.coeffs))


def weighted_coefficient_sum(cj: Contraction | Callable[[int], float], power: float, tol: float = 1e-14) -> float:
    """``sum_j c_j j^power``.

    Geometric coefficients are summed until a geometric bound on the
    remaining tail falls below ``tol`` relative to the partial sum. A
    callable ``c(j)`` is accepted too; it must pass a ratio test at large
    ``j`` or ``NonSummable`` is raised.
    """
    if isinstance(cj, Contraction) and not cj.is_geometric:
        c = np.asarray(cj.coeffs, dtype=float)
        return float(np.sum(c * np.arange(1, len(c) + 1, dtype=float) ** power))
    if isinstance(cj, Contraction):
        if cj.c0 == 0:
            return 0.0
        r = math.exp(-cj.gamma)

        def term(j):
            return cj.c0 * r**j * j**power

        def ratio_bound(j):
            # t_{i+1}/t_i = r ((i+1)/i)^power, which decreases in i for power >= 0
            return r * ((j + 1) / j) ** max(power, 0.0)
    else:
        def term(j):
            return cj(j) * j**power

        probe = [term(j + 1) / term(j) if term(j) > 0 else 0.0 for j in (1000, 2000, 4000)]
        if max(probe) >= 1 - 1e-3:
            raise NonSummable("coefficient sequence fails the ratio test")

        def ratio_bound(j):
            return max(term(j + 1) / term(j), probe[-1]) if term(j) > 0 else 0.0

    total, j = 0.0, 1
    while True:
        t = term(j)
        total += t
        q = ratio_bound(j + 1)
        if q < 1 and t * q / (1 - q) <= tol * max(total, 1e-300):
            return total
        j += 1
        if j > 10**7:
            raise NonSummable("series did not settle within 1e7 terms")


def bias_bound(h: float, beta: float, lam: float, cj, p: float) -> float:
    """``h^beta lam^beta sum_j c_j j^{p beta}``, the bound on the smoothing bias."""
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    if h < 0 or lam <= 0:
        raise ValueError("need h >= 0 and lam > 0")
    if h == 0:
        return 0.0
    return (h * lam) ** beta * weighted_coefficient_sum(cj, p * beta)


@dataclass
class RegressionSample:
    """Responses ``y`` and regressors ``x`` (one row per observation).

    ``origin`` is ``"static"`` or ``"autoregressive"``; in the latter case
    ``x[t, i] = y_series[t + tau - 1 - i]``, i.e. row ``t`` holds the ``tau``
    lags preceding ``y[t]``.
    """

    y: np.ndarray
    x: np.ndarray
    origin: str = "static"

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if len(self.y) != len(self.x):
            raise ValueError(f"{len(self.y)} responses but {len(self.x)} regressors")
        if self.origin not in ("static", "autoregressive"):
            raise ValueError(f"unknown origin {self.origin!r}")

    def __len__(self):
        return len(self.y)

    @property
    def tau(self) -> int:
        return self.x.shape[1]

    @classmethod
    def from_series(cls, series, tau: int) -> RegressionSample:
        """Lag-embed a scalar series; the first ``tau`` values only serve as lags."""
        series = np.asarray(series, dtype=float)
        if len(series) <= tau:
            raise ValueError("series must be longer than tau")
        windows = np.lib.stride_tricks.sliding_window_view(series[:-1], tau)
        return cls(series[tau:], windows[:, ::-1].copy(), "autoregressive")


@dataclass(frozen=True)
class NWEstimate:
    """Result of one evaluation; ``value`` is None when the window is empty."""

    value: float | None
    numer: float
    denom: float
    count: int
    n: int

    @property
    def empty(self) -> bool:
        return self.value is None

    @property
    def effective_n(self) -> float:
        """``n * phi_hat`` proxy: number of observations with positive weight."""
        return float(self.count)

    @property
    def phi_hat(self) -> float:
        return self.count / self.n if self.n else 0.0


def nw_from_weights(weights, y) -> NWEstimate:
    """Weighted average of ``y``; the empty-window case is reported, not divided."""
    w = np.asarray(weights, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    pos = w > 0
    count = int(pos.sum())
    if count == 0:
        return NWEstimate(None, 0.0, 0.0, 0, n)
    wp, yp = w[pos], y[pos]
    denom = float(wp.sum())
    numer = float(wp @ yp)
    value = numer / denom
    # keep the convex-combination guarantee under rounding
    value = float(min(max(value, yp.min()), yp.max()))
    return NWEstimate(value, numer / n, denom / n, count, n)


def nw_estimate(sample: RegressionSample, x, kernel: KernelSpec, sched: BandwidthSchedule) -> NWEstimate:
    """Local constant estimate of ``E[Y | X = x]``.

    ``numer`` and ``denom`` are the kernel-weighted response sum and kernel
    sum, each divided by ``n``; their ratio is the estimate.
    """
    if len(sample) == 0:
        raise ValueError("sample must be nonempty")
    return nw_from_weights(spherical_weight(kernel, sample.x, x, sched), sample.y)


def nw_estimate_many(sample: RegressionSample, points, kernel: KernelSpec, sched: BandwidthSchedule) -> list[NWEstimate]:
    return [nw_estimate(sample, pt, kernel, sched) for pt in np.atleast_2d(points)]


def variance_approx(sigma2: float, xi: XiEstimate | tuple, n: int, phi: float) -> float:
    """``sigma^2 xi2 / (n phi xi1^2)``."""
    if not phi > 0 or n < 1:
        raise ValueError("need phi > 0 and n >= 1")
    xi1, xi2 = (xi.xi1, xi.xi2) if isinstance(xi, XiEstimate) else xi
    return sigma2 * xi2 / (n * phi * xi1**2)


def standardize_error(mhat, m_true, bias, n, rate_factor, variance):
    """``sqrt(n rate_factor / variance) (mhat - m_true - bias)``."""
    if not (np.all(np.asarray(variance) > 0) and np.all(np.asarray(rate_factor) > 0)):
        raise ValueError("variance and rate_factor must be positive")
    return np.sqrt(n * rate_factor / variance) * (np.asarray(mhat) - m_true - bias)
