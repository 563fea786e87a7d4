"""Exact sampling of the pinned Gaussian field on finite point sets.

Correctness rests on one oracle only: dense Cholesky factorization of the
kernel matrix with the origin row/column removed (the origin value is pinned
to zero and reinstated at assembly time).

Reproducibility contract
------------------------
Realization i of a batch is a deterministic function of
(model, points, master_seed, i):

* stream seed:   derive_seed(master_seed, i), the splitmix64 finalizer
                 applied to master_seed + (i + 1) * 0x9E3779B97F4A7C15;
* uniforms:      PCG64 seeded with that value, drawing 53-bit integers k
                 and mapping them to (k + 0.5) * 2**-53 in (0, 1);
* normals:       inverse normal CDF of those uniforms;
* field values:  lower Cholesky factor applied to the normal vector.

Results are therefore independent of chunking, execution order, and worker
count; bit-exactness is promised per platform.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .covmodel import CovarianceModel, GramMatrix, gram
from .errors import ConfigError, FactorizationError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Diagonal jitter escalation, as multiples of the mean diagonal entry.
JITTER_STEPS = (0.0, 1e-12, 1e-10, 1e-8)

DEFAULT_CHUNK = 4096


def derive_seed(master_seed: int, index: int) -> int:
    """Public 64-bit mixing function for per-realization stream seeds."""
    z = (int(master_seed) + (int(index) + 1) * _GOLDEN) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def _uniforms(stream_seed: int, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(stream_seed))
    k = rng.integers(0, 1 << 53, size=n, dtype=np.int64)
    return (k.astype(np.float64) + 0.5) * (2.0**-53)


@dataclass
class Factorization:
    """Lower-triangular factor of the Gram restricted to non-origin points."""

    lower: np.ndarray
    jitter: float
    free: np.ndarray  # indices of non-origin points in the original order
    n_points: int

    @property
    def n_free(self) -> int:
        return self.lower.shape[0]


def factorize(g: GramMatrix) -> Factorization:
    """Cholesky with jitter escalation; rejects the model if all steps fail.

    The reconstruction error ||L L^T - G||_F stays below 1e-8 * trace(G):
    jitter is measured in units of the mean diagonal entry, so even the
    largest step contributes at most 1e-8 * trace / sqrt(n) in Frobenius norm.
    """
    origin_mask = np.all(g.points == 0.0, axis=1)
    free = np.flatnonzero(~origin_mask)
    sub = g.values[np.ix_(free, free)]
    m = sub.shape[0]
    if m == 0:
        return Factorization(np.zeros((0, 0)), 0.0, free, g.n)
    mean_diag = float(np.trace(sub)) / m
    for step in JITTER_STEPS:
        jitter = step * mean_diag
        try:
            lower = np.linalg.cholesky(sub + jitter * np.eye(m))
        except np.linalg.LinAlgError:
            continue
        return Factorization(lower, jitter, free, g.n)
    raise FactorizationError(
        f"Cholesky failed for {m} points even with jitter 1e-8 * mean diagonal; "
        "model rejected"
    )


@dataclass
class SampleBatch:
    """Realizations of the pinned field on a fixed point set (origin first)."""

    points: np.ndarray
    values: np.ndarray
    master_seed: int
    model: CovarianceModel

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def points_digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.points).tobytes()).hexdigest()[:16]

    def to_csv(self, path) -> None:
        header = (
            f"model={self.model.label()} points_digest={self.points_digest()} "
            f"seed={self.master_seed} count={self.count}"
        )
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g", header=header)

    def to_npz(self, path) -> None:
        np.savez_compressed(
            path,
            points=self.points,
            values=self.values,
            master_seed=self.master_seed,
            model=self.model.label(),
        )


def normalize_points(points) -> np.ndarray:
    """Return points as an (n, d) float array with the origin first.

    The origin is appended if missing; otherwise it is moved to the front.
    The relative order of all other points is preserved.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    origin_rows = np.flatnonzero(np.all(pts == 0.0, axis=1))
    if origin_rows.size == 0:
        return np.vstack([np.zeros((1, pts.shape[1])), pts])
    k = origin_rows[0]
    order = np.concatenate([[k], np.delete(np.arange(pts.shape[0]), k)])
    return pts[order]


def _chunk_values(factor: Factorization, master_seed: int, start: int, size: int) -> np.ndarray:
    m = factor.n_free
    u = np.empty((size, m))
    for row in range(size):
        u[row] = _uniforms(derive_seed(master_seed, start + row), m)
    z = ndtri(u) if m else u
    out = np.zeros((size, factor.n_points))
    if m:
        out[:, factor.free] = z @ factor.lower.T
    return out


def stream_values(factor, points, model, master_seed, count, chunk=DEFAULT_CHUNK, workers=1):
    """Yield (start_index, values_chunk) pairs in index order.

    Worker threads only change wall time: chunk i is a pure function of
    (master_seed, chunk bounds), so output is identical for any worker count.
    """
    bounds = [(s, min(chunk, count - s)) for s in range(0, count, chunk)]
    if workers <= 1:
        for start, size in bounds:
            yield start, _chunk_values(factor, master_seed, start, size)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_chunk_values, factor, master_seed, s, n) for s, n in bounds]
        for (start, _), fut in zip(bounds, futures):
            yield start, fut.result()


def sample(model: CovarianceModel, points, master_seed: int, count: int,
           chunk: int = DEFAULT_CHUNK, workers: int = 1) -> SampleBatch:
    """Draw `count` iid realizations of the pinned field at the given points."""
    if count < 1:
        raise ConfigError("sample count must be >= 1")
    pts = normalize_points(points)
    factor = factorize(gram(model, pts))
    values = np.empty((count, pts.shape[0]))
    for start, block in stream_values(factor, pts, model, master_seed, count, chunk, workers):
        values[start : start + block.shape[0]] = block
    return SampleBatch(pts, values, int(master_seed), model)


def max_over(batch: SampleBatch, subset) -> np.ndarray:
    """Per-realization maxima of the field over a subset of point indices."""
    subset = np.asarray(subset, dtype=np.intp)
    if subset.size == 0:
        raise ConfigError("max_over needs a nonempty subset")
    return np.max(batch.values[:, subset], axis=1)
