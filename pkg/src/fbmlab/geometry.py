"""Convex domains tangent to the hyperplane {t1 = 0} at the origin.

Two kinds are supported: a Euclidean ball and an axis-aligned cube, both
touching the origin from the half-space t1 >= 0.  Any convex body that is
smooth at the origin sits between these two, so persistence estimates for
general domains are bracketed by the supported kinds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError

TANGENT_BALL = "tangent_ball"
TANGENT_CUBE = "tangent_cube"

_KIND_ALIASES = {
    "ball": TANGENT_BALL,
    "cube": TANGENT_CUBE,
    TANGENT_BALL: TANGENT_BALL,
    TANGENT_CUBE: TANGENT_CUBE,
}

# Relative slack on the defining inequality so boundary lattice points
# survive floating-point scaling.
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Domain:
    """Bounded convex region with the origin on its boundary.

    tangent_ball: Euclidean ball of radius size*scale centered at
        (size*scale, 0, ..., 0).
    tangent_cube: box [0, 2*size*scale] x [-size*scale, size*scale]^(d-1).

    Both contain the origin as a boundary point, lie in {t1 >= 0}, and have
    {t1 = 0} as tangent plane at 0.  Instances are immutable.
    """

    kind: str
    dim: int
    size: float
    scale: float = 1.0

    @property
    def extent(self) -> float:
        """Effective size parameter (radius / half width) after scaling."""
        return self.size * self.scale

    @property
    def center(self) -> np.ndarray:
        c = np.zeros(self.dim)
        c[0] = self.extent
        return c

    def volume(self) -> float:
        r = self.extent
        if self.kind == TANGENT_CUBE:
            return (2.0 * r) ** self.dim
        # unit-ball volume pi^(d/2) / Gamma(d/2 + 1)
        from math import gamma, pi

        return pi ** (self.dim / 2.0) / gamma(self.dim / 2.0 + 1.0) * r**self.dim

    def contains_many(self, pts) -> np.ndarray:
        """Vectorized membership test for an (n, d) array of points."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.dim:
            raise ConfigError(f"points have dimension {pts.shape[1]}, domain has {self.dim}")
        r = self.extent
        if self.kind == TANGENT_BALL:
            tol = BOUNDARY_TOL * max(1.0, r * r)
            d2 = np.sum((pts - self.center) ** 2, axis=1)
            return d2 <= r * r + tol
        tol = BOUNDARY_TOL * max(1.0, r)
        ok = (pts[:, 0] >= -tol) & (pts[:, 0] <= 2.0 * r + tol)
        if self.dim > 1:
            ok &= np.all(np.abs(pts[:, 1:]) <= r + tol, axis=1)
        return ok

    def contains(self, t) -> bool:
        return bool(self.contains_many(np.asarray(t, dtype=float)[None, :])[0])

    def bounding_box(self):
        """Integer bounding box (lo, hi), inclusive, of the closed domain."""
        r = self.extent
        lo = np.full(self.dim, -int(np.floor(r + BOUNDARY_TOL)))
        hi = np.full(self.dim, int(np.floor(r + BOUNDARY_TOL)))
        lo[0], hi[0] = 0, int(np.floor(2.0 * r + BOUNDARY_TOL))
        return lo, hi


def make_domain(kind: str, dim: int, size: float) -> Domain:
    """Build a tangent ball (size = radius) or tangent cube (size = half width)."""
    if kind not in _KIND_ALIASES:
        raise ConfigError(f"unknown domain kind {kind!r}")
    if dim < 1:
        raise ConfigError("domain dimension must be >= 1")
    if not size > 0:
        raise ConfigError("domain size must be positive")
    return Domain(_KIND_ALIASES[kind], int(dim), float(size))


def scale(domain: Domain, T: float) -> Domain:
    """Dilate about the origin by T > 0; tangency at 0 is preserved."""
    if not T > 0:
        raise ConfigError("scale factor must be positive")
    return replace(domain, scale=domain.scale * float(T))


def lattice_points(domain: Domain) -> np.ndarray:
    """Integer points of the closed domain, in lexicographic order.

    The origin lies on the boundary and is always included.
    """
    lo, hi = domain.bounding_box()
    axes = [np.arange(lo[i], hi[i] + 1) for i in range(domain.dim)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.dim)
    pts = grid[domain.contains_many(grid)]
    order = np.lexsort(tuple(pts[:, k] for k in range(domain.dim - 1, -1, -1)))
    return pts[order].astype(np.int64)


def sandwich(domain: Domain):
    """Inscribed tangent ball and circumscribed tangent cube of the domain.

    Both share the tangency point 0 and the tangent plane {t1 = 0}.
    """
    if domain.kind == TANGENT_BALL:
        return domain, Domain(TANGENT_CUBE, domain.dim, domain.extent)
    if domain.kind == TANGENT_CUBE:
        return Domain(TANGENT_BALL, domain.dim, domain.extent), domain
    raise ConfigError(f"unsupported domain kind {domain.kind!r}")


def points_to_csv(points: np.ndarray, path) -> None:
    """One row per point, raw coordinates."""
    points = np.atleast_2d(points)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"t{k + 1}" for k in range(points.shape[1])])
        for row in points:
            writer.writerow([repr(v) if isinstance(v, float) else int(v) for v in row.tolist()])
