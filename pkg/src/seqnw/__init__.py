"""Nadaraya-Watson regression on sequence-valued regressors.

Submodules: ``seqspace`` (weighted norms, covers), ``kernels``,
``smallball`` (small-ball constants), ``estimator``, ``bandwidth``
(Lambert-W bandwidth exponents), ``datagen`` and ``experiments``.
"""
from .bandwidth import a_opt_pointwise, a_opt_uniform, h_opt, lambert_w0
from .datagen import GaussianMA, IIDRegressors, NARInfinite, RegressionFunctionSpec, make_rng
from .errors import *  # noqa: F401,F403
from .estimator import Contraction, NWEstimate, RegressionSample, bias_bound, nw_estimate
from .experiments import ExperimentConfig, preset, run_experiment
from .kernels import KernelSpec, estimate_xi, spherical_weight
from .seqspace import BandwidthSchedule, TruncSet, cover_grid, kolmogorov_entropy, weighted_norms
from .smallball import DistSpec, dist_constants, rate_constants

__version__ = "0.1.0"
