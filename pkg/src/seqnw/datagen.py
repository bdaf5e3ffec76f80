"""Reproducible regressor and response generators.

Random streams come from ``numpy``'s counter-based Philox bit generator,
keyed by a ``SeedSequence`` whose spawn key carries the coordinates of the
draw (for example experiment id, sample size, replicate). Any cell of an
experiment can therefore be regenerated on its own, in any order and in any
worker process.
"""
from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import ContractionViolated
from .estimator import Contraction, RegressionSample
from .smallball import DistSpec, truncate_coeffs


def stream_key(text: str) -> int:
    """Stable 32-bit integer for a string label (CRC-32)."""
    return zlib.crc32(text.encode("utf-8"))


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for master ``seed`` and integer spawn ``key``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def geometric_ma_coeffs(ratio: float, tol: float = 1e-12) -> np.ndarray:
    """``a_j = ratio**j`` for ``j = 0, 1, ...`` until the squared tail drops below ``tol``."""
    if not 0 <= ratio < 1:
        raise ValueError("ratio must lie in [0, 1)")
    if ratio == 0:
        return np.ones(1)
    # sum_{j>=J} r^{2j} = r^{2J}/(1-r^2) < tol
    J = int(np.ceil(np.log(tol * (1 - ratio**2)) / (2 * np.log(ratio)))) + 1
    return ratio ** np.arange(J, dtype=float)


@dataclass(frozen=True)
class IIDRegressors:
    """Every coordinate i.i.d. with signed marginal built from ``dist``."""

    dist: DistSpec = field(default_factory=DistSpec.chisq1)
    tau: int = 20

    @property
    def burn_in(self) -> int:
        return 0


@dataclass(frozen=True)
class GaussianMA:
    """Windows of ``X_s = sum_{j>=0} a_j eps_{s-j}`` with standard Gaussian ``eps``.

    Row ``t`` of the generated design is ``(X_t, X_{t-1}, ..., X_{t-tau+1})``;
    consecutive rows overlap, so the sample is a genuine time series.
    """

    coeffs: tuple = (1.0,)
    tau: int = 20

    def __post_init__(self):
        a = np.asarray(self.coeffs, dtype=float)
        if a.ndim != 1 or len(a) == 0 or not np.all(np.isfinite(a)):
            raise ValueError("coeffs must be a nonempty finite sequence")
        object.__setattr__(self, "coeffs", tuple(truncate_coeffs(a).tolist()))

    @classmethod
    def geometric(cls, ratio: float, tau: int = 20):
        return cls(tuple(geometric_ma_coeffs(ratio)), tau)

    @property
    def burn_in(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class NARInfinite:
    """``Y_t = m(Y_{t-1}, ..., Y_{t-tau}) + sigma eps_t`` started from zero."""

    sigma: float = 1.0
    tau: int = 20
    burn_in_override: int | None = None

    @property
    def burn_in(self) -> int:
        if self.burn_in_override is not None:
            return self.burn_in_override
        return max(10 * self.tau, 1000)


ProcessSpec = IIDRegressors | GaussianMA | NARInfinite


@dataclass(frozen=True)
class RegressionFunctionSpec:
    """``m(x) = sum_j c_j g(x_j)`` with ``g`` in {identity, tanh}.

    Both choices of ``g`` are 1-Lipschitz, so ``m`` satisfies the contraction
    bound ``|m(x) - m(x')| <= sum_j c_j |x_j - x'_j|`` with ``beta = 1``.
    """

    g: str = "identity"
    contraction: Contraction = field(default_factory=Contraction.geometric)
    beta: float = 1.0

    def __post_init__(self):
        if self.g not in ("identity", "tanh"):
            raise ValueError(f"unknown link {self.g!r}")

    def link(self, x):
        return x if self.g == "identity" else np.tanh(x)

    def __call__(self, x) -> np.ndarray | float:
        """Evaluate on a point (1-D) or on the rows of a 2-D array."""
        x = np.asarray(x, dtype=float)
        c = self.contraction.head(x.shape[-1])
        out = self.link(x) @ c
        return float(out) if np.ndim(out) == 0 else out


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")


def gen_iid(spec: IIDRegressors, n: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, tau)`` design with independent rows and coordinates."""
    _check_n(n)
    return spec.dist.sample(rng, (n, spec.tau))


def _ma_series(coeffs, length: int, rng: np.random.Generator) -> np.ndarray:
    a = np.asarray(coeffs, dtype=float)
    eps = rng.standard_normal(length + len(a) - 1)
    # the first len(a) - 1 outputs see a partial history and are dropped
    return signal.lfilter(a, [1.0], eps)[len(a) - 1 :]


def gen_gaussian_ma(spec: GaussianMA, n: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, tau)`` sliding windows of a stationary Gaussian moving average."""
    _check_n(n)
    series = _ma_series(spec.coeffs, n + spec.tau - 1, rng)
    windows = np.lib.stride_tricks.sliding_window_view(series, spec.tau)
    return windows[:, ::-1].copy()


def gen_regressors(spec, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec, IIDRegressors):
        return gen_iid(spec, n, rng)
    if isinstance(spec, GaussianMA):
        return gen_gaussian_ma(spec, n, rng)
    raise TypeError(f"{type(spec).__name__} does not generate exogenous regressors")


def gen_nar(spec: NARInfinite, m_spec: RegressionFunctionSpec, n: int, rng: np.random.Generator):
    """Simulate the autoregression and lag-embed it.

    Returns ``(series, sample)`` where ``series`` has ``n + tau`` values after
    burn-in and ``sample`` is its autoregressive ``RegressionSample`` of
    length ``n``.

    Raises
    ------
    ContractionViolated
        If the contraction coefficients sum to more than one.
    """
    _check_n(n)
    if m_spec.contraction.total() > 1:
        raise ContractionViolated(f"sum of c_j is {m_spec.contraction.total():.6g} > 1")
    tau = spec.tau
    total = spec.burn_in + n + tau
    noise = spec.sigma * rng.standard_normal(total)
    c = m_spec.contraction.head(tau)
    if m_spec.g == "identity":
        y = signal.lfilter([1.0], np.concatenate(([1.0], -c)), noise)
    else:
        y = np.zeros(total)
        lags = np.zeros(tau)  # (Y_{t-1}, ..., Y_{t-tau})
        for t in range(total):
            y[t] = np.tanh(lags) @ c + noise[t]
            lags[1:] = lags[:-1]
            lags[0] = y[t]
    series = y[spec.burn_in :]
    return series, RegressionSample.from_series(series, tau)


def gen_response(x, m_spec: RegressionFunctionSpec, noise_sigma, rng: np.random.Generator) -> np.ndarray:
    """``Y_t = m(X_t) + sigma(X_t) eps_t`` with standard Gaussian ``eps``.

    ``noise_sigma`` is a constant or a callable mapping the design to a
    vector of conditional standard deviations.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mean = m_spec(x)
    sigma = noise_sigma(x) if callable(noise_sigma) else float(noise_sigma)
    if np.any(np.asarray(sigma) < 0):
        raise ValueError("noise_sigma must be nonnegative")
    return mean + sigma * rng.standard_normal(len(x))


def write_csv(path, sample: RegressionSample) -> None:
    """One row per observation: ``Y, X_1, ..., X_tau``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Y"] + [f"X_{j}" for j in range(1, sample.tau + 1)])
        for yt, xt in zip(sample.y, sample.x):
            w.writerow([repr(float(yt))] + [repr(float(v)) for v in xt])
