"""Monte Carlo persistence probabilities, expected maxima, and exponent fits.

A persistence estimate is the fraction of field realizations whose maximum
over a grid on the scaled domain stays below a barrier.  Barrier semantics
follow the two usages downstream: a positive barrier is exceeded at values
>= barrier (strict survival "max < barrier"), while barrier 0 counts
realizations with max <= 0 (the pinned origin makes the max always >= 0, so
survival means "no strictly positive value").
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import geometry, sampler
from .covmodel import CovarianceModel, gram
from .curve import EnumerationCurve
from .errors import CapExceededError, ConfigError

DEFAULT_CAP = 20000

_Z95 = 1.959963984540054


def wilson_interval(hits: int, count: int, z: float = _Z95):
    """Wilson score interval for a binomial proportion (robust at small hits)."""
    if count <= 0:
        raise ConfigError("count must be positive")
    p = hits / count
    denom = 1.0 + z * z / count
    center = (p + z * z / (2 * count)) / denom
    half = z * math.sqrt(p * (1.0 - p) / count + z * z / (4 * count * count)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def net_points(domain: geometry.Domain, T: float, mesh: float = 1.0) -> np.ndarray:
    """Grid of spacing `mesh` on the scaled domain (mesh = 1/m for integer m)."""
    if not T > 0:
        raise ConfigError("T must be positive")
    m = round(1.0 / mesh)
    if m < 1 or abs(1.0 / mesh - m) > 1e-9:
        raise ConfigError("mesh must be 1/m for a positive integer m")
    lat = geometry.lattice_points(geometry.scale(domain, T * m))
    return lat.astype(float) * mesh


def _check_cap(n_points: int, cap: int):
    if n_points > cap:
        raise CapExceededError(
            f"{n_points} net points exceed the cap {cap}; lower T or coarsen the mesh"
        )


@dataclass
class PersistenceEstimate:
    model: CovarianceModel
    domain: geometry.Domain
    T: float
    barrier: float
    mesh: float
    count: int
    hits: int
    n_points: int
    seed: int

    @property
    def p_hat(self) -> float:
        return self.hits / self.count

    @property
    def stderr(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.count)

    @property
    def ci(self):
        return wilson_interval(self.hits, self.count)

    def row(self) -> dict:
        lo, hi = self.ci
        return {
            "model": self.model.kind,
            "d": self.domain.dim,
            "H": self.model.hurst,
            "domain": self.domain.kind,
            "size": self.domain.size,
            "T": self.T,
            "mesh": self.mesh,
            "barrier": self.barrier,
            "N": self.count,
            "hits": self.hits,
            "n_points": self.n_points,
            "p_hat": self.p_hat,
            "stderr": self.stderr,
            "ci_low": lo,
            "ci_high": hi,
            "seed": self.seed,
        }


def survival_counts(values: np.ndarray, barrier: float) -> int:
    """Realizations that stay below the barrier (see module docstring)."""
    m = np.max(values, axis=1)
    if barrier > 0:
        return int(np.sum(m < barrier))
    return int(np.sum(m <= 0.0))


def estimate_persistence(
    model: CovarianceModel,
    domain: geometry.Domain,
    T: float,
    barrier: float = 1.0,
    mesh: float = 1.0,
    seed: int = 0,
    count: int = 10000,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
    chunk: int = sampler.DEFAULT_CHUNK,
) -> PersistenceEstimate:
    """Estimate the probability that the field stays below the barrier on the net."""
    if count < 100:
        raise ConfigError("count must be >= 100")
    if barrier < 0:
        raise ConfigError("barrier must be >= 0")
    pts = sampler.normalize_points(net_points(domain, T, mesh))
    _check_cap(pts.shape[0], cap)
    factor = sampler.factorize(gram(model, pts))
    hits = 0
    for _, block in sampler.stream_values(factor, pts, model, seed, count, chunk, workers):
        hits += survival_counts(block, barrier)
    return PersistenceEstimate(
        model, domain, float(T), float(barrier), float(mesh), count, hits, pts.shape[0], seed
    )


@dataclass
class MaxMeanEstimate:
    model: CovarianceModel
    domain: geometry.Domain
    T: float
    mesh: float
    count: int
    n_points: int
    seed: int
    mean: float
    stderr: float

    def row(self) -> dict:
        return {
            "model": self.model.kind,
            "d": self.domain.dim,
            "H": self.model.hurst,
            "T": self.T,
            "mesh": self.mesh,
            "N": self.count,
            "n_points": self.n_points,
            "mean_max": self.mean,
            "stderr": self.stderr,
            "seed": self.seed,
        }


def estimate_max_mean(
    model: CovarianceModel,
    domain: geometry.Domain,
    T: float,
    mesh: float = 1.0,
    seed: int = 0,
    count: int = 10000,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
    chunk: int = sampler.DEFAULT_CHUNK,
) -> MaxMeanEstimate:
    """Mean and standard error of the per-realization maximum over the net."""
    if count < 2:
        raise ConfigError("count must be >= 2")
    pts = sampler.normalize_points(net_points(domain, T, mesh))
    _check_cap(pts.shape[0], cap)
    factor = sampler.factorize(gram(model, pts))
    s = 0.0
    s2 = 0.0
    for _, block in sampler.stream_values(factor, pts, model, seed, count, chunk, workers):
        m = np.max(block, axis=1)
        s += float(np.sum(m))
        s2 += float(np.sum(m * m))
    mean = s / count
    var = max(s2 / count - mean * mean, 0.0) * count / (count - 1)
    return MaxMeanEstimate(
        model, domain, float(T), float(mesh), count, pts.shape[0], seed,
        mean, math.sqrt(var / count),
    )


@dataclass
class ExponentFit:
    ts: np.ndarray
    p_hats: np.ndarray
    stderrs: np.ndarray
    weights: np.ndarray
    slope: float
    intercept: float
    slope_stderr: float

    def to_dict(self) -> dict:
        return {
            "T": self.ts.tolist(),
            "p_hat": self.p_hats.tolist(),
            "stderr": self.stderrs.tolist(),
            "weights": self.weights.tolist(),
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_stderr": self.slope_stderr,
        }


def fit_exponent(estimates) -> ExponentFit:
    """Weighted least squares of log p on log T.

    Weights are the delta-method inverse variances of log p, i.e.
    (p / stderr)^2, from the normal equations of the weighted fit.
    """
    if len(estimates) < 3:
        raise ConfigError("exponent fit needs >= 3 scales T")
    ts = np.array([e.T for e in estimates], dtype=float)
    if np.unique(ts).size < 3:
        raise ConfigError("exponent fit needs >= 3 distinct scales T")
    p = np.array([e.p_hat for e in estimates], dtype=float)
    se = np.array([e.stderr for e in estimates], dtype=float)
    if np.any(p <= 0):
        raise ConfigError("all p_hat must be positive: raise N or lower T")
    w = np.where(se > 0, (p / np.where(se > 0, se, 1.0)) ** 2, np.inf)
    if np.any(~np.isfinite(w)):
        # zero stderr (p = 1 exactly): dominate but keep finite
        w = np.where(np.isfinite(w), w, np.max(w[np.isfinite(w)], initial=1.0) * 1e6)
    x = np.log(ts)
    y = np.log(p)
    X = np.column_stack([np.ones_like(x), x])
    xtwx = X.T @ (w[:, None] * X)
    beta = np.linalg.solve(xtwx, X.T @ (w * y))
    cov = np.linalg.inv(xtwx)
    return ExponentFit(ts, p, se, w, float(beta[1]), float(beta[0]), float(math.sqrt(cov[1, 1])))


@dataclass
class RecordProbability:
    index: int
    point: tuple
    count: int
    hits: int
    n_points: int
    seed: int

    @property
    def p_hat(self) -> float:
        return self.hits / self.count

    @property
    def stderr(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.count)


def record_probability(
    model: CovarianceModel,
    curve: EnumerationCurve,
    index: int,
    seed: int = 0,
    count: int = 10000,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
) -> RecordProbability:
    """Probability that the field value at curve entry `index` equals the
    running maximum over all curve points up to that entry."""
    if not 0 <= index < len(curve.entries):
        raise ConfigError(f"curve index {index} out of range")
    target = curve.entries[index]
    if not target.first_visit:
        raise ConfigError("record probability is defined at first-visit indices")
    prefix = [e.point for e in curve.entries[: index + 1] if e.first_visit]
    _check_cap(len(prefix), cap)
    pts = np.array(prefix, dtype=float)
    batch = sampler.sample(model, pts, seed, count, workers=workers)
    lookup = {tuple(int(c) for c in row): k for k, row in enumerate(batch.points)}
    col = lookup[target.point]
    hits = int(np.sum(batch.values[:, col] >= np.max(batch.values, axis=1)))
    return RecordProbability(index, target.point, count, hits, pts.shape[0], seed)


def estimates_to_csv(estimates, path) -> None:
    rows = [e.row() for e in estimates]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def fit_plot_data(fit: ExponentFit, path) -> None:
    """Plot-ready columns (log T, log p, weight) for external tools."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["log_T", "log_p", "weight"])
        for t, p, w in zip(fit.ts, fit.p_hats, fit.weights):
            writer.writerow([repr(math.log(t)), repr(math.log(p)), repr(float(w))])
