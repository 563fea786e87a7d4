"""Isotropic stationary-increment Gaussian covariance models.

A model is specified by its variogram nu(h) = E(xi(t+h) - xi(t))^2 with
nu(0) = 0; the field is pinned at the origin, xi(0) = 0, so the kernel is

    K(t, s) = 0.5 * (nu(|t|) + nu(|s|) - nu(|t - s|)),   |.| Euclidean.

Supported kinds:

* fbm(H):            nu(h) = h^(2H), the self-similar fractional field;
* perturbed_fbm:     nu(h) = h^(2H) + sigma^2 * (1 - exp(-(h/ell)^2)),
                     a non-self-similar variant whose variance still grows
                     like h^(2H) at infinity and is dominated by k*h^(2H)
                     everywhere (the added term is O(h^2) near zero and
                     bounded at infinity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError

FBM = "fbm"
PERTURBED_FBM = "perturbed_fbm"

# Grams above this size skip the eigenvalue gate here; the factorization
# step applies an equivalent jittered-Cholesky gate.
PSD_EIG_LIMIT = 1500

PSD_TOL = 1e-8


@dataclass(frozen=True)
class CovarianceModel:
    kind: str
    hurst: float
    sigma: float = 0.0
    ell: float = 1.0

    def label(self) -> str:
        if self.kind == FBM:
            return f"fbm(H={self.hurst})"
        return f"perturbed_fbm(H={self.hurst},sigma={self.sigma},ell={self.ell})"


def fbm(hurst: float) -> CovarianceModel:
    if not 0.0 < hurst < 1.0:
        raise ModelError("Hurst index must lie in (0, 1)")
    return CovarianceModel(FBM, float(hurst))


def perturbed_fbm(hurst: float, sigma: float, ell: float) -> CovarianceModel:
    if not 0.0 < hurst < 1.0:
        raise ModelError("Hurst index must lie in (0, 1)")
    if sigma < 0:
        raise ModelError("perturbation amplitude must be >= 0")
    if not ell > 0:
        raise ModelError("perturbation length scale must be positive")
    return CovarianceModel(PERTURBED_FBM, float(hurst), float(sigma), float(ell))


def variogram(model: CovarianceModel, h):
    """Evaluate nu(h) for scalar or array h >= 0."""
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ModelError("variogram argument must be nonnegative")
    base = h ** (2.0 * model.hurst)
    if model.kind == FBM:
        out = base
    elif model.kind == PERTURBED_FBM:
        out = base + model.sigma**2 * (1.0 - np.exp(-((h / model.ell) ** 2)))
    else:
        raise ModelError(f"unknown model kind {model.kind!r}")
    return out if out.ndim else float(out)


def covariance(model: CovarianceModel, t, s) -> float:
    """Kernel value K(t, s) for two points (Euclidean norms, pinned origin)."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    nt = float(np.linalg.norm(t))
    ns = float(np.linalg.norm(s))
    nd = float(np.linalg.norm(t - s))
    return 0.5 * (variogram(model, nt) + variogram(model, ns) - variogram(model, nd))


@dataclass
class GramMatrix:
    """Kernel matrix on a finite point set (row/column order = point order)."""

    points: np.ndarray
    values: np.ndarray
    model: CovarianceModel

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.values))

    def to_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")


def gram(model: CovarianceModel, points) -> GramMatrix:
    """Kernel matrix of the model on distinct points.

    Raises ModelError on duplicate points (they would make any factorization
    singular and always signal a caller bug) and on a PSD violation beyond
    -1e-8 * trace for sets small enough to check by eigenvalues.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if np.unique(pts, axis=0).shape[0] != n:
        raise ModelError("duplicate points in Gram construction")
    sq = np.sum(pts * pts, axis=1)
    norms = np.sqrt(sq)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    np.maximum(d2, 0.0, out=d2)
    dist = np.sqrt(d2)
    nu_n = variogram(model, norms)
    values = 0.5 * (nu_n[:, None] + nu_n[None, :] - variogram(model, dist))
    values = 0.5 * (values + values.T)
    g = GramMatrix(pts, values, model)
    if n <= PSD_EIG_LIMIT:
        min_eig = float(np.linalg.eigvalsh(values)[0])
        if min_eig < -PSD_TOL * max(g.trace(), 1e-300):
            raise ModelError(
                f"Gram is not positive semidefinite (min eigenvalue {min_eig:.3e}, "
                f"trace {g.trace():.3e})"
            )
    return g


@dataclass
class EnvelopeReport:
    """Growth-envelope diagnostics for nu(h) against h^(2H)."""

    k_sup: float
    k_argmax: float
    c_squared: float
    tail_spread: float
    stable: bool
    radii: np.ndarray
    ratio: np.ndarray

    def to_dict(self) -> dict:
        return {
            "k_sup": self.k_sup,
            "k_argmax": self.k_argmax,
            "c_squared": self.c_squared,
            "tail_spread": self.tail_spread,
            "stable": self.stable,
        }


def check_growth_envelope(model: CovarianceModel, radii=None) -> EnvelopeReport:
    """Check that nu(h)/h^(2H) is bounded and stabilizes at large h.

    Reports the sup of the ratio over the grid (the envelope constant), the
    tail average of the ratio (the squared asymptotic scale), and whether the
    ratio varies by less than 1% over the last decade of the grid.
    """
    if radii is None:
        radii = np.logspace(-3, 3, 601)
    radii = np.asarray(radii, dtype=float)
    ratio = variogram(model, radii) / radii ** (2.0 * model.hurst)
    k_idx = int(np.argmax(ratio))
    last_decade = radii >= radii[-1] / 10.0
    tail = ratio[last_decade]
    c2 = float(np.mean(tail))
    spread = float(np.max(tail) / np.min(tail) - 1.0)
    return EnvelopeReport(
        k_sup=float(ratio[k_idx]),
        k_argmax=float(radii[k_idx]),
        c_squared=c2,
        tail_spread=spread,
        stable=bool(spread <= 0.01 and np.isfinite(ratio).all()),
        radii=radii,
        ratio=ratio,
    )
