"""Simulation lab for persistence probabilities of pinned fractional
Brownian fields on expanding domains tangent to a hyperplane at the origin."""

__version__ = "0.1.0"

from .covmodel import CovarianceModel, fbm, perturbed_fbm, variogram, covariance, gram
from .curve import build_curve, classify, validate_curve, EnumerationCurve
from .errors import (
    CapExceededError,
    ConfigError,
    FactorizationError,
    FbmLabError,
    ModelError,
)
from .geometry import Domain, lattice_points, make_domain, sandwich, scale
from .sampler import SampleBatch, derive_seed, factorize, max_over, sample

__all__ = [
    "CovarianceModel",
    "Domain",
    "EnumerationCurve",
    "SampleBatch",
    "CapExceededError",
    "ConfigError",
    "FactorizationError",
    "FbmLabError",
    "ModelError",
    "build_curve",
    "classify",
    "covariance",
    "derive_seed",
    "factorize",
    "fbm",
    "gram",
    "lattice_points",
    "make_domain",
    "max_over",
    "perturbed_fbm",
    "sample",
    "sandwich",
    "scale",
    "validate_curve",
    "variogram",
]
