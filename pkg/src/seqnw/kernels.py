"""Univariate kernels on ``[0, lam]`` and the spherical weights built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroSmallBall
from .seqspace import BandwidthSchedule, weighted_norms

# closed forms on [0, 1]; (type, K(u), K'(u))
_SHAPES = {
    "uniform": ("I", lambda u: np.ones_like(u), lambda u: np.zeros_like(u)),
    "epanechnikov": ("II", lambda u: 1.5 * (1 - u**2), lambda u: -3.0 * u),
    "biweight": ("II", lambda u: 15 / 8 * (1 - u**2) ** 2, lambda u: -7.5 * u * (1 - u**2)),
    "bartlett": ("II", lambda u: 2.0 * (1 - u), lambda u: np.full_like(u, -2.0)),
    "gaussian": (
        "III",
        lambda u: math.sqrt(2 / math.pi) * np.exp(-(u**2) / 2),
        lambda u: -math.sqrt(2 / math.pi) * u * np.exp(-(u**2) / 2),
    ),
}

# (C3, C4) bounds of K' on (0, 1) for the unit-support shapes
_DERIV_BOUNDS = {
    "epanechnikov": (-3.0, 0.0),
    "biweight": (-7.5 * (1 / math.sqrt(3)) * (2 / 3), 0.0),
    "bartlett": (-2.0, -2.0),
}

KERNEL_KINDS = tuple(_SHAPES)


@dataclass(frozen=True)
class KernelSpec:
    """A kernel density on ``[0, lam]`` (on ``[0, inf)`` with scale ``lam`` for Gaussian).

    Built-in kinds are ``uniform`` (type I), ``epanechnikov``, ``biweight``,
    ``bartlett`` (type II) and ``gaussian`` (type III, one-sided).
    """

    kind: str = "epanechnikov"
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in _SHAPES:
            raise ValueError(f"unknown kernel {self.kind!r}; choose from {KERNEL_KINDS}")
        if not self.lam > 0:
            raise ValueError("lam must be positive")

    @property
    def type(self) -> str:
        return _SHAPES[self.kind][0]

    @property
    def compact(self) -> bool:
        return self.type != "III"

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        s = u / self.lam
        vals = _SHAPES[self.kind][1](s) / self.lam
        if self.compact:
            vals = np.where((s >= 0) & (s <= 1), vals, 0.0)
        return vals

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        s = u / self.lam
        vals = _SHAPES[self.kind][2](s) / self.lam**2
        if self.compact:
            vals = np.where((s >= 0) & (s <= 1), vals, 0.0)
        return vals

    @property
    def sup(self) -> float:
        return float(self(0.0))

    @property
    def envelope(self) -> tuple[float, float]:
        """``(C1, C2)`` with ``C1 1[0,lam] <= K <= C2 1[0,lam]``; ``C1 = 0`` unless type I."""
        if self.type == "I":
            return 1 / self.lam, 1 / self.lam
        return 0.0, self.sup

    @property
    def derivative_bounds(self) -> tuple[float, float]:
        """``(C3, C4)``: infimum and supremum of ``K'`` over ``(0, lam)``.

        For epanechnikov and biweight the supremum is 0, approached at the
        endpoints but not attained inside the interval.
        """
        if self.type != "II":
            raise ValueError("derivative bounds are defined for type II kernels only")
        lo, hi = _DERIV_BOUNDS[self.kind]
        return lo / self.lam**2, hi / self.lam**2


def spherical_weight(spec: KernelSpec, x, center, sched: BandwidthSchedule):
    """``K(||H^{-1}(x - center)||)``; vectorized over rows of ``x``."""
    return spec(weighted_norms(x, center, sched))


@dataclass(frozen=True)
class XiEstimate:
    xi1: float
    xi2: float
    stderr1: float
    stderr2: float
    n_mc: int
    hits: int


def estimate_xi(spec: KernelSpec, sampler, x, sched: BandwidthSchedule, n_mc: int, seed) -> XiEstimate:
    """Monte Carlo estimate of ``E[K^j] / phi_x(h lam)`` for ``j = 1, 2``.

    ``sampler(rng, size)`` must return a ``(size, tau)`` array of regressor
    draws. Since ``K`` vanishes outside the ellipsoid, the ratio of sample
    means equals the mean of ``K^j`` over the draws inside it, and the
    delta-method standard error reduces to the within-window standard error.
    For type III kernels the window is ``||.|| <= lam`` while ``K`` is summed
    over all draws, which is what exposes the missing upper bound.
    """
    if n_mc < 1000:
        raise ValueError("n_mc must be at least 1000")
    rng = np.random.default_rng(seed)
    u = weighted_norms(sampler(rng, n_mc), x, sched)
    inside = u <= sched.lam
    hits = int(inside.sum())
    if hits == 0:
        raise ZeroSmallBall(f"no draw inside the ellipsoid at h={sched.h} with n_mc={n_mc}")
    k = spec(u)
    phi = hits / n_mc
    out = []
    for j in (1, 2):
        kj = k**j
        ratio = kj.mean() / phi
        if spec.compact:
            sd = kj[inside].std(ddof=1) if hits > 1 else 0.0
            se = sd / math.sqrt(hits)
        else:
            # ratio of two means from the same draws
            cov = np.cov(kj, inside.astype(float))
            grad = np.array([1 / phi, -ratio / phi])
            se = math.sqrt(max(grad @ cov @ grad, 0.0) / n_mc)
        out.append((float(ratio), float(se)))
    return XiEstimate(out[0][0], out[1][0], out[0][1], out[1][1], n_mc, hits)
