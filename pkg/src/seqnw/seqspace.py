"""Weighted sequence-space geometry.

A point of R^N is stored as a finite 1-D array ``(x_1, ..., x_tau)``; every
coordinate past the end of the array is zero. Samples of points are 2-D
arrays with one point per row. Arrays of different lengths are compared by
zero-padding the shorter one, so norms are exact and need no tail estimate.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridTooLarge

MAX_INDEX = 10**9
DEFAULT_GRID_CAP = 10**7


@dataclass(frozen=True)
class BandwidthSchedule:
    """Marginal bandwidths ``h_j = j**p * h`` with kernel support ``[0, lam]``.

    ``p = 0`` gives equal bandwidths in every coordinate, which is only
    useful for finite-dimensional sanity checks; the rate theory needs
    ``p > 1``.
    """

    p: float = 2.0
    h: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not self.p >= 0:
            raise DomainError(f"p must be nonnegative, got {self.p}")
        if not self.h > 0:
            raise DomainError(f"h must be positive, got {self.h}")
        if not self.lam > 0:
            raise DomainError(f"lam must be positive, got {self.lam}")

    def weights(self, tau: int) -> np.ndarray:
        """phi_j = j**p for j = 1..tau."""
        _check_tau(tau)
        return np.arange(1, tau + 1, dtype=float) ** self.p

    def marginal(self, tau: int) -> np.ndarray:
        return self.h * self.weights(tau)

    def with_h(self, h: float) -> BandwidthSchedule:
        return BandwidthSchedule(self.p, h, self.lam)


@dataclass(frozen=True)
class TruncSet:
    """The cube ``{u : |u_j| <= lam for j <= tau, u_j = 0 otherwise}``."""

    tau: int
    lam: float = 1.0

    def __post_init__(self):
        _check_tau(self.tau)
        if not self.lam > 0:
            raise DomainError("lam must be positive")

    def contains(self, u) -> bool:
        u = np.asarray(u, dtype=float)
        head, tail = u[: self.tau], u[self.tau :]
        return bool(np.all(np.abs(head) <= self.lam) and np.all(tail == 0))


def _check_tau(tau):
    if tau < 1 or tau > MAX_INDEX:
        raise DomainError(f"effective dimension must lie in [1, {MAX_INDEX}], got {tau}")


def pad(a, length: int) -> np.ndarray:
    """Zero-pad the last axis of ``a`` to ``length``."""
    a = np.asarray(a, dtype=float)
    extra = length - a.shape[-1]
    if extra < 0:
        raise ValueError("cannot pad to a shorter length")
    if extra == 0:
        return a
    widths = [(0, 0)] * (a.ndim - 1) + [(0, extra)]
    return np.pad(a, widths)


def weighted_norms(X, center, sched: BandwidthSchedule) -> np.ndarray:
    """``||H^{-1}(X_t - center)||_2`` for each row of ``X``.

    ``X`` may be 1-D (a single point) or 2-D. Returns an array of shape
    ``X.shape[:-1]``.
    """
    X = np.asarray(X, dtype=float)
    center = np.asarray(center, dtype=float)
    tau = max(X.shape[-1], center.shape[-1])
    _check_tau(tau)
    diff = (pad(X, tau) - pad(center, tau)) / sched.marginal(tau)
    return np.sqrt(np.einsum("...j,...j->...", diff, diff))


def weighted_norm(x, center, sched: BandwidthSchedule) -> float:
    return float(weighted_norms(np.asarray(x, dtype=float), center, sched))


def kolmogorov_entropy(tau: int, lam: float, eta: float) -> float:
    """Log covering number ``tau * log(2 lam sqrt(tau) / eta + 1)`` of the cube."""
    if not (tau > 0 and lam > 0 and eta > 0):
        raise DomainError("tau, lam and eta must all be positive")
    return tau * math.log1p(2.0 * lam * math.sqrt(tau) / eta)


def grid_axis(tset: TruncSet, eta: float) -> np.ndarray:
    """Per-coordinate lattice with step at most ``eta / sqrt(tau)``, endpoints included."""
    if not 0 < eta <= 2 * tset.lam:
        raise DomainError("eta must lie in (0, 2*lam]")
    m = math.ceil(2.0 * tset.lam * math.sqrt(tset.tau) / eta) + 1
    return np.linspace(-tset.lam, tset.lam, m)


def grid_size(tset: TruncSet, eta: float) -> int:
    return len(grid_axis(tset, eta)) ** tset.tau


def cover_grid(tset: TruncSet, eta: float, cap: int = DEFAULT_GRID_CAP) -> np.ndarray:
    """Axis-aligned lattice whose eta-balls cover ``tset``.

    Every point of the cube lies within ``eta / 2`` (Euclidean) of a lattice
    point, and the lattice has at most ``ceil(2 lam sqrt(tau)/eta + 1)**tau``
    points.

    Raises
    ------
    GridTooLarge
        If the lattice would have more than ``cap`` points.
    """
    axis = grid_axis(tset, eta)
    size = len(axis) ** tset.tau
    if size > cap:
        raise GridTooLarge(
            f"grid of {len(axis)}^{tset.tau} = {size} points exceeds cap {cap}; "
            "reduce tau or increase eta"
        )
    return np.array(list(itertools.product(axis, repeat=tset.tau)), dtype=float)


def sample_cover_grid(tset: TruncSet, eta: float, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` lattice points drawn uniformly (with replacement) from ``cover_grid``.

    Used when the full lattice is too large to enumerate. The lattice
    corners are always included first so the extreme points of the set are
    evaluated.
    """
    axis = grid_axis(tset, eta)
    idx = rng.integers(0, len(axis), size=(k, tset.tau))
    corners = min(k, 2)
    idx[:corners] = np.array([[0], [len(axis) - 1]])[:corners]
    return axis[idx]


def nearest_grid_point(u, tset: TruncSet, eta: float) -> np.ndarray:
    """Closest lattice point to each row of ``u`` (coordinatewise rounding)."""
    axis = grid_axis(tset, eta)
    u = np.asarray(u, dtype=float)[..., : tset.tau]
    step = axis[1] - axis[0]
    k = np.clip(np.rint((u + tset.lam) / step), 0, len(axis) - 1).astype(int)
    return axis[k]
