"""Small-ball probabilities and the constants that govern their decay.

For a regressor with i.i.d. marginals the weighted small ball
``phi(h lam) = P(sum_j j^{-2p} (x_j - X_j)^2 <= (h lam)^2)`` behaves like

    log phi = const + e * log(lam h) - C** (lam h)^{-2/(2p-1)},

with ``e = (1 + 2 rho p)/(2p - 1)``. ``rho`` and ``C_ell`` describe the
distribution of ``X_j^2`` near zero, and ``C**`` is driven by the
Laplace-transform constant ``zeta``. The additive constant involves the
unknown density ratio ``p*(0)``, so every comparison with data in this
package uses slopes or differences only.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from .errors import QuadratureFailure, ZetaAbsent
from .seqspace import BandwidthSchedule, weighted_norms

FAMILIES = ("uniform_sq", "gamma", "exp", "weibull", "pareto", "chisq1")


@dataclass(frozen=True)
class DistSpec:
    """Distribution ``F`` of the squared marginal ``X_j^2``.

    Parameterizations (``a``, ``b``):

    * ``uniform_sq(b)``: ``X^2 ~ U(1, b)``
    * ``gamma(alpha, beta)``: shape ``alpha``, rate ``beta``
    * ``exp(eta)``: rate ``eta``
    * ``weibull(alpha, beta)``: ``F(x) = 1 - exp(-beta x^alpha)``
    * ``pareto(theta, mu)``: Lomax, ``F(x) = 1 - (1 + x/theta)^{-mu}``
    * ``chisq1``: ``X`` standard Gaussian

    The marginal ``X`` itself is the square root of ``X^2`` with an
    independent random sign, so every design is symmetric about zero.
    """

    family: str
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not (self.a > 0 and self.b > 0):
            raise ValueError("distribution parameters must be positive")
        if self.family == "uniform_sq" and not self.a > 1:
            raise ValueError("uniform_sq needs b > 1")

    # constructors
    @classmethod
    def uniform_sq(cls, b):
        return cls("uniform_sq", b)

    @classmethod
    def gamma(cls, alpha, beta):
        return cls("gamma", alpha, beta)

    @classmethod
    def exp(cls, eta=1.0):
        return cls("exp", eta)

    @classmethod
    def weibull(cls, alpha, beta):
        return cls("weibull", alpha, beta)

    @classmethod
    def pareto(cls, theta, mu):
        return cls("pareto", theta, mu)

    @classmethod
    def chisq1(cls):
        return cls("chisq1")

    @classmethod
    def parse(cls, text: str) -> DistSpec:
        """Parse ``"exp:1"``, ``"gamma:2,0.5"``, ``"chisq1"`` and similar."""
        name, _, args = text.strip().partition(":")
        params = [float(s) for s in args.split(",") if s.strip()]
        ctor = getattr(cls, name.strip(), None)
        if name.strip() not in FAMILIES or ctor is None:
            raise ValueError(f"unknown distribution {text!r}")
        return ctor(*params)

    def __str__(self):
        if self.family == "chisq1":
            return "chisq1"
        if self.family in ("exp", "uniform_sq"):
            return f"{self.family}:{self.a:g}"
        return f"{self.family}:{self.a:g},{self.b:g}"

    # Karamata data
    @property
    def rho(self) -> float:
        return {
            "uniform_sq": -1.0,
            "gamma": -self.a,
            "exp": -1.0,
            "weibull": -self.a,
            "pareto": -1.0,
            "chisq1": -0.5,
        }[self.family]

    @property
    def ell_limit(self) -> float:
        """``lim_{x->inf} ell(x)`` in ``F(1/x) = x^rho ell(x)``, i.e. ``C_ell^{-2}``."""
        a, b = self.a, self.b
        return {
            "uniform_sq": 1.0,
            "gamma": b**a / (a * math.gamma(a)),
            "exp": a,
            "weibull": b,
            "pareto": b / a,
            "chisq1": math.sqrt(2 / math.pi),
        }[self.family]

    def sq_dist(self):
        """Frozen ``scipy.stats`` distribution of ``X^2``."""
        a, b = self.a, self.b
        if self.family == "uniform_sq":
            return stats.uniform(loc=1.0, scale=a - 1.0)
        if self.family == "gamma":
            return stats.gamma(a, scale=1 / b)
        if self.family == "exp":
            return stats.expon(scale=1 / a)
        if self.family == "weibull":
            return stats.weibull_min(a, scale=b ** (-1 / a))
        if self.family == "pareto":
            return stats.lomax(b, scale=a)
        return stats.chi2(1)

    def cdf_sq(self, x):
        return self.sq_dist().cdf(x)

    @property
    def mean_sq(self) -> float:
        return float(self.sq_dist().mean())

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw the signed marginal ``X`` (not ``X^2``)."""
        if self.family == "chisq1":
            return rng.standard_normal(size)
        a, b = self.a, self.b
        if self.family == "uniform_sq":
            sq = rng.uniform(1.0, a, size)
        elif self.family == "gamma":
            sq = rng.gamma(a, 1 / b, size)
        elif self.family == "exp":
            sq = rng.exponential(1 / a, size)
        elif self.family == "weibull":
            sq = (rng.standard_exponential(size) / b) ** (1 / a)
        else:
            sq = a * (rng.uniform(size=size) ** (-1 / b) - 1)
        sign = np.where(rng.uniform(size=size) < 0.5, -1.0, 1.0)
        return sign * np.sqrt(sq)

    # Laplace transform of X^2
    def laplace(self, u: float) -> float:
        a, b = self.a, self.b
        if self.family == "gamma":
            return (b / (b + u)) ** a
        if self.family == "exp":
            return a / (a + u)
        if self.family == "chisq1":
            return (1 + 2 * u) ** -0.5
        if self.family == "uniform_sq":
            return (math.exp(-u) - math.exp(-a * u)) / ((a - 1) * u) if u > 0 else 1.0
        return self._laplace_numeric(u)[0]

    def laplace_logderiv(self, u: float) -> float:
        """``-L'(u) / L(u)``, i.e. ``E[X^2 e^{-u X^2}] / E[e^{-u X^2}]``."""
        a, b = self.a, self.b
        if self.family == "gamma":
            return a / (b + u)
        if self.family == "exp":
            return 1 / (a + u)
        if self.family == "chisq1":
            return 1 / (1 + 2 * u)
        if self.family == "uniform_sq":
            if u == 0:
                return (1 + a) / 2
            e1, e2 = math.exp(-u), math.exp(-a * u)
            return (e1 - a * e2) / (e1 - e2) - 1 / u
        return self._logderiv_numeric(u)

    def _quantile_pdf(self):
        a, b = self.a, self.b
        if self.family == "weibull":
            return (
                lambda v: (-math.log1p(-v) / b) ** (1 / a),
                lambda x: b * a * x ** (a - 1) * math.exp(-b * x**a) if x > 0 else 0.0,
            )
        if self.family == "pareto":
            return (
                lambda v: a * ((1 - v) ** (-1 / b) - 1) if v < 1 else math.inf,
                lambda x: b / a * (1 + x / a) ** (-b - 1),
            )
        dist = self.sq_dist()
        return (lambda v: float(dist.ppf(v))), (lambda x: float(dist.pdf(x)))

    def _laplace_numeric(self, u):
        # quantile scale keeps the integrands bounded: X^2 = Q(v), v ~ U(0, 1)
        q, _ = self._quantile_pdf()

        def f0(v):
            return math.exp(-u * q(v))

        def f1(v):
            s = q(v)
            return s * math.exp(-u * s) if s < math.inf else 0.0

        return _quad(f0, 0, 1, _INNER_RTOL), _quad(f1, 0, 1, _INNER_RTOL)

    def _logderiv_numeric(self, u):
        q, pdf = self._quantile_pdf()
        if u >= 1:
            # the mass of e^{-u x} f(x) sits in a window of width 1/u;
            # substitute x = y/u so the integrals live on the unit scale
            def g0(y):
                return math.exp(-y) * pdf(y / u)

            def g1(y):
                return y * g0(y)

            return _quad(g1, 0, math.inf, _INNER_RTOL) / (u * _quad(g0, 0, math.inf, _INNER_RTOL))

        # small u: integrate over t = log x, where both integrands are smooth
        # bumps; beyond x = 60/u the factor e^{-u x} is below 1e-26
        def f0(t):
            x = math.exp(t)
            return math.exp(-u * x) * pdf(x) * x

        def f1(t):
            return math.exp(t) * f0(t)

        hi = math.log(60.0 / u)
        knots = sorted({math.log(q(0.5)), math.log(1.0 / u)})
        lv = _quad(f0, -60.0, hi, _INNER_RTOL, knots)
        dv = _quad(f1, -60.0, hi, _INNER_RTOL, knots)
        return dv / lv


_INNER_RTOL = 1e-10


def _quad(f, a, b, epsrel=1e-12, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=epsrel, limit=500, points=points)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    return val


def zeta_closed_form(dist: DistSpec, p: float) -> float | None:
    """Closed-form ``zeta`` for the Gamma, exponential and chi-square laws; None otherwise."""
    s = math.sin(math.pi / (2 * p))
    if dist.family == "gamma":
        return dist.a * math.pi * dist.b ** (-1 / (2 * p)) / s
    if dist.family == "exp":
        return math.pi * dist.a ** (-1 / (2 * p)) / s
    if dist.family == "chisq1":
        return math.pi * 2 ** ((1 - 2 * p) / (2 * p)) / s
    return None


def zeta_quadrature(dist: DistSpec, p: float, epsrel: float = 1e-9) -> float:
    """``zeta = int_0^inf u^{-1/(2p)} (-L'(u)/L(u)) du`` by adaptive quadrature.

    The range is split at 1. On ``[0, 1]`` the substitution ``u = s^{2p}``
    removes the ``u^{-1/(2p)}`` singularity; on ``[1, inf)`` the substitution
    ``u = t^{-2p}`` maps the ``1/u`` tail onto a bounded integrand on ``(0, 1]``.
    """
    if not p > 0.5:
        raise ValueError("p must exceed 1/2")
    q = 2.0 * p
    g = dist.laplace_logderiv

    def head(s):
        return q * s ** (q - 2) * g(s**q) if s > 0 else (q * g(0.0) if q == 2 else 0.0)

    def tail(t):
        return q * t ** (-q) * g(t ** (-q)) if t > 0 else _tail_limit(dist, q)

    return _quad(head, 0.0, 1.0, epsrel) + _quad(tail, 0.0, 1.0, epsrel)


def _tail_limit(dist, q):
    # -L'/L ~ -rho / u as u -> inf, so t^{-q} g(t^{-q}) -> -rho
    return -q * dist.rho


def zeta_exists(dist: DistSpec, p: float) -> bool:
    """Whether the zeta integral converges at all.

    Uniform(1, b) is excluded because its tabulated Karamata data do not
    describe the law near zero. For Lomax with shape ``mu <= 1`` the mean of
    ``X^2`` is infinite and ``-L'/L ~ u^{mu - 1}`` at zero, which is
    integrable against ``u^{-1/(2p)}`` only if ``mu > 1/(2p)``.
    """
    if dist.family == "uniform_sq":
        return False
    if dist.family == "pareto":
        return dist.b > 1 / (2 * p)
    return True


@dataclass(frozen=True)
class DistConstants:
    rho: float
    C_ell: float
    zeta: float | None
    zeta_source: str  # "closed", "quadrature" or "absent"


def dist_constants(dist: DistSpec, p: float) -> DistConstants:
    """``rho``, ``C_ell`` and ``zeta`` for the law of ``X^2`` at bandwidth exponent ``p``."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    c_ell = dist.ell_limit ** -0.5
    closed = zeta_closed_form(dist, p)
    if closed is not None:
        return DistConstants(dist.rho, c_ell, closed, "closed")
    if not zeta_exists(dist, p):
        return DistConstants(dist.rho, c_ell, None, "absent")
    return DistConstants(dist.rho, c_ell, zeta_quadrature(dist, p), "quadrature")


# rate constants ------------------------------------------------------------

def c_star(rho: float, zeta: float, p: float) -> float:
    q = 2 * p
    num = (2 * math.pi) ** (1 + q * rho) * (q - 1)
    den = (1 / math.gamma(1 - rho)) * q ** ((q * (rho + 2) - 1) / (q - 1))
    return num / den * zeta ** (q * (1 + rho) / (q - 1))


def c_dstar(zeta: float, p: float) -> float:
    """``(2p - 1) (zeta / 2p)^{2p/(2p-1)}``; the tabulated ``K`` is read as ``zeta``."""
    q = 2 * p
    return (q - 1) * (zeta / q) ** (q / (q - 1))


def c_star_gaussian(p: float) -> float:
    q = 2 * p
    zeta = math.pi * 2 ** ((1 - q) / q) / math.sin(math.pi / q)
    return (2 * math.pi) ** (1 - p) * (q - 1) / (2 * q ** ((3 * p - 1) / (q - 1))) * zeta ** (-p / (q - 1))


def c_dstar_gaussian(p: float) -> float:
    q = 2 * p
    return (q - 1) / 2 * (math.pi / (q * math.sin(math.pi / q))) ** (q / (q - 1))


def truncate_coeffs(a, tol: float = 1e-12) -> np.ndarray:
    """Drop the tail of ``a`` once its remaining squared mass is below ``tol``."""
    a = np.asarray(a, dtype=float)
    tail = np.cumsum((a**2)[::-1])[::-1]  # tail[k] = sum_{j>=k} a_j^2
    keep = np.nonzero(tail >= tol)[0]
    return a[: keep[-1] + 1] if len(keep) else a[:1]


def spectral_constant(a, p: float, rtol: float = 1e-9, start: int = 2048, max_points: int = 2**24) -> float:
    """``C_A = ((1/2pi) int_0^{2pi} |sum_j a_j e^{ijx}|^{1/p} dx)^p``.

    Periodic trapezoid rule on ``M`` equispaced nodes (the polynomial is
    evaluated with an FFT), doubling ``M`` until the relative change drops
    below ``rtol``.
    """
    a = truncate_coeffs(a)
    if not np.any(a):
        return 0.0
    m = max(start, 1 << int(math.ceil(math.log2(len(a)))))
    prev = None
    while True:
        vals = np.abs(np.fft.fft(a, n=m)) ** (1 / p)
        cur = float(vals.mean() ** p)
        if prev is not None and abs(cur - prev) <= rtol * abs(cur):
            return cur
        if 2 * m > max_points:
            raise QuadratureFailure(f"C_A did not settle to rtol={rtol} with {m} nodes")
        prev, m = cur, 2 * m


@dataclass(frozen=True)
class RateConstants:
    rho: float
    C_ell: float
    zeta: float | None
    C_star: float
    C_dstar: float
    variant: str = "iid"  # or "gaussian"
    C_A: float = 1.0
    # numerator of the polynomial exponent: 1 + 2 rho p (i.i.d.) or 1 - p (Gaussian)
    poly_numerator: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "rho": self.rho,
            "C_ell": self.C_ell,
            "zeta": self.zeta,
            "C_star": self.C_star,
            "C_dstar": self.C_dstar,
            "variant": self.variant,
            "C_A": self.C_A,
        }


def rate_constants(dist: DistSpec, p: float, lam: float = 1.0, variant: str = "iid", ma_coeffs=None) -> RateConstants:
    """Bundle the constants of the i.i.d. or dependent-Gaussian normal limits.

    ``lam`` does not enter the constants; it is accepted for symmetry with
    the other rate helpers, which take it explicitly.

    Raises
    ------
    ZetaAbsent
        For an i.i.d. design whose zeta integral does not exist.
    """
    dc = dist_constants(dist, p)
    if variant == "gaussian":
        if dist.family != "chisq1":
            raise ValueError("the dependent Gaussian variant needs Gaussian marginals (chisq1)")
        ca = 1.0 if ma_coeffs is None else spectral_constant(ma_coeffs, p)
        return RateConstants(
            dc.rho, dc.C_ell, dc.zeta, c_star_gaussian(p), c_dstar_gaussian(p), "gaussian", ca, 1 - p
        )
    if variant != "iid":
        raise ValueError(f"unknown variant {variant!r}")
    if dc.zeta is None:
        raise ZetaAbsent(f"zeta does not exist for {dist} at p={p}")
    return RateConstants(
        dc.rho, dc.C_ell, dc.zeta, c_star(dc.rho, dc.zeta, p), c_dstar(dc.zeta, p), "iid", 1.0,
        1 + 2 * dc.rho * p,
    )


def gaussian_shift_factor(z, gamma_diag) -> float:
    """``exp(-||Gamma^{-1/2} z||^2 / 2)`` for a diagonal covariance."""
    z = np.asarray(z, dtype=float)
    g = np.asarray(gamma_diag, dtype=float)
    if len(g) < len(z) or np.any(g[: len(z)] <= 0):
        raise ValueError("gamma_diag must be positive and cover the support of z")
    return float(np.exp(-0.5 * np.sum(z**2 / g[: len(z)])))


def small_ball_exponent(p: float) -> float:
    """``2/(2p - 1)``, the power of ``1/(lam h)`` in the exponential decay."""
    return 2.0 / (2.0 * p - 1.0)


def effective_radius(h, consts: RateConstants, lam: float):
    """``lam h``, rescaled by ``1/C_A`` for dependent Gaussian designs.

    Scaling every ``a_j`` by ``c`` scales ``X`` and ``C_A`` by ``c``, and the
    small ball of ``cX`` at radius ``r`` is that of ``X`` at ``r/c``; so the
    radius enters as ``lam h / C_A``.
    """
    r = lam * np.asarray(h, dtype=float)
    return r / consts.C_A if consts.variant == "gaussian" else r


def predicted_log_small_ball(h, consts: RateConstants, lam: float, p: float):
    """Two-term expansion of ``log phi(lam h)`` without its additive constant."""
    r = effective_radius(h, consts, lam)
    e = consts.poly_numerator / (2 * p - 1)
    return e * np.log(r) - consts.C_dstar * r ** (-small_ball_exponent(p))


def predicted_slope(consts: RateConstants, lam: float, p: float) -> float:
    """Slope of ``log phi`` against ``(lam h)^{-2/(2p-1)}`` after removing the log term."""
    scale = consts.C_A ** small_ball_exponent(p) if consts.variant == "gaussian" else 1.0
    return -consts.C_dstar * scale


def rate_factor(h, consts: RateConstants, lam: float, p: float):
    """``exp(predicted_log_small_ball)``: the CLT normalization without constants."""
    return np.exp(predicted_log_small_ball(h, consts, lam, p))


# empirical estimators ------------------------------------------------------

def empirical_small_ball(sample, x, sched: BandwidthSchedule) -> float:
    """Fraction of rows of ``sample`` inside the ellipsoid ``E(x, lam h)``."""
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if sample.shape[0] == 0:
        raise ValueError("sample must be nonempty")
    return float(np.mean(weighted_norms(sample, x, sched) <= sched.lam))


def empirical_small_ball_curve(norms, radii) -> np.ndarray:
    """``mean(norms <= r)`` for each radius, from precomputed weighted norms."""
    norms = np.sort(np.asarray(norms, dtype=float))
    return np.searchsorted(norms, np.asarray(radii, dtype=float), side="right") / len(norms)


def empirical_joint_small_ball(series, x, sched: BandwidthSchedule, lag: int) -> float:
    """Fraction of pairs ``(t, t + lag)`` with both points inside the ellipsoid."""
    series = np.atleast_2d(np.asarray(series, dtype=float))
    if lag < 1 or len(series) <= lag:
        raise ValueError("need 1 <= lag < len(series)")
    inside = weighted_norms(series, x, sched) <= sched.lam
    return float(np.mean(inside[:-lag] & inside[lag:]))


def binomial_stderr(prop: float, n: int) -> float:
    return math.sqrt(max(prop * (1 - prop), 0.0) / n)


def ball_volume(d: int) -> float:
    """Volume of the unit Euclidean ball in ``R^d``."""
    return math.pi ** (d / 2) / special.gamma(d / 2 + 1)
