"""Shell-ordered enumeration of the integer lattice with bounded steps.

The curve visits every lattice point of sup-norm <= n_max, shell by shell.
Each sup-norm shell splits into an edge zone (zone 1: points near the
(d-2)-dimensional edges and corners of the shell) and a bulk zone (zone 2:
the central part of each face).  Within a shell every zone-1 point is
first-visited before any zone-2 point, and zone-2 coverage runs face by face
in serpentine order.  Consecutive curve points differ by at least 1 and at
most `step_bound` in sup-norm; whenever the next target is farther than
that, the curve re-walks already-visited points as connectors (on the
previous shell for d >= 2, through the visited interval for d = 1).

Because all shells below n are complete before shell n starts, every zone-2
first visit t on face (axis, sign) is preceded by the full inward box

    t + {inward k : 1 <= k <= 2*rho_n} x {|j| <= rho_n - 1}^(d-1),

whose points all have sup-norm <= n-1.  This deterministic containment is
what the record-probability bound of the lower-bound chain rests on.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

_EPS = 1e-9


def band_factor(n: int, eps: float) -> float:
    """Slowly varying bandwidth parameter controlling the zone split (> 1)."""
    if n < 1:
        raise ConfigError("shell level must be >= 1")
    if not eps > 0:
        raise ConfigError("schedule exponent must be positive")
    return max(1.5, math.log(n + 2) ** eps)


def box_radius(n: int, eps: float) -> float:
    """Half-size rho_n = n / band_factor(n) of the containment box at level n."""
    return n / band_factor(n, eps)


def _level(p) -> int:
    return max(abs(c) for c in p)


def _face_of(p, n: int):
    """Owning face of a level-n point: smallest axis attaining the sup-norm."""
    for axis, c in enumerate(p):
        if abs(c) == n:
            return axis, (1 if c > 0 else -1)
    raise ConfigError(f"point {p} is not on shell {n}")


def classify(point, eps: float):
    """(level, face, zone) of a nonzero lattice point.

    `face` is a signed 1-based axis index (+1 for +e1, -1 for -e1, ...).
    Zone 2 means the point lies within sup-distance n(1 - 1/L_n) of its face
    center; zone 1 is the complementary edge band.  For d = 1 every face is
    its own center, so both shell points are zone 2.
    """
    p = tuple(int(c) for c in point)
    n = _level(p)
    if n == 0:
        raise ConfigError("the origin has no level/face/zone")
    axis, sign = _face_of(p, n)
    within = max((abs(c) for k, c in enumerate(p) if k != axis), default=0)
    threshold = n - box_radius(n, eps)
    zone = 2 if within <= threshold + _EPS else 1
    return n, sign * (axis + 1), zone


@dataclass(frozen=True)
class CurveEntry:
    index: int
    point: tuple
    level: int
    face: int
    zone: int
    first_visit: bool


@dataclass
class EnumerationCurve:
    dim: int
    n_max: int
    eps: float
    step_bound: int
    entries: list
    _first_index: dict = field(default_factory=dict, repr=False)
    _level_end: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not self._first_index:
            for e in self.entries:
                if e.first_visit:
                    self._first_index[e.point] = e.index
        if self._level_end is None:
            ends = np.full(self.n_max + 1, len(self.entries) - 1, dtype=np.int64)
            for e in self.entries:
                if e.first_visit and e.level > 0:
                    ends[: e.level] = np.minimum(ends[: e.level], e.index - 1)
            self._level_end = ends

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def num_points(self) -> int:
        return len(self._first_index)

    def points_array(self) -> np.ndarray:
        return np.array([e.point for e in self.entries], dtype=np.int64)

    def first_visit_index(self, point):
        return self._first_index.get(tuple(int(c) for c in point))

    def level_end_index(self, n: int) -> int:
        """Last curve index whose prefix set is exactly the closed ball of radius n."""
        if not 0 <= n <= self.n_max:
            raise ConfigError(f"level {n} outside [0, {self.n_max}]")
        return int(self._level_end[n])

    def trace_columns(self, points) -> np.ndarray:
        """Map each curve entry to its row index in a point array."""
        lookup = {tuple(int(c) for c in row): k for k, row in enumerate(np.asarray(points))}
        try:
            return np.array([lookup[e.point] for e in self.entries], dtype=np.intp)
        except KeyError as exc:
            raise ConfigError(f"curve point {exc.args[0]} missing from point set") from exc


def shrunken_box_offsets(face: int, rho: float, dim: int) -> np.ndarray:
    """Lattice offsets of the inward containment box for a face, as (k, d) ints.

    For face -e1 the box is [1, 2*rho] x [-(rho-1), rho-1]^(d-1); other faces
    are the rotated analogues.  All offsets applied to a zone-2 point of
    shell n land at sup-norm <= n-1.  Empty when rho is too small to hold a
    lattice point.
    """
    axis = abs(face) - 1
    sign = 1 if face > 0 else -1
    kmax = int(math.floor(2.0 * rho + _EPS))
    if kmax < 1:
        return np.zeros((0, dim), dtype=np.int64)
    cross_half = math.floor(rho - 1.0 + _EPS)
    if dim > 1 and cross_half < 0:
        return np.zeros((0, dim), dtype=np.int64)
    inward = [-sign * k for k in range(1, kmax + 1)]
    cross = list(range(-int(cross_half), int(cross_half) + 1)) if dim > 1 else [()]
    out = []
    for k in inward:
        for combo in itertools.product(*([cross] * (dim - 1))):
            off = [0] * dim
            off[axis] = k
            j = 0
            for a in range(dim):
                if a != axis:
                    off[a] = combo[j]
                    j += 1
            out.append(off)
    return np.array(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def _face_targets(dim: int, n: int, axis: int, sign: int, want_zone: int, eps: float):
    """Points assigned to one face with the given zone, in serpentine order."""
    free_axes = [a for a in range(dim) if a != axis]
    ranges = []
    for a in free_axes:
        m = n - 1 if a < axis else n  # points with |c|=n on an earlier axis belong there
        ranges.append(range(-m, m + 1))
    found = []
    for combo in itertools.product(*ranges):
        p = [0] * dim
        p[axis] = sign * n
        for a, c in zip(free_axes, combo):
            p[a] = c
        _, _, zone = classify(p, eps)
        if zone == want_zone:
            found.append(tuple(p))

    def snake_key(p):
        key = []
        s = 0
        for a in free_axes:
            key.append(p[a] if s % 2 == 0 else -p[a])
            s += p[a]
        return tuple(key)

    found.sort(key=snake_key)
    return found


def _sup_dist(a, b) -> int:
    return max(abs(x - y) for x, y in zip(a, b))


def _inward(p, m: int):
    return tuple((1 if c > 0 else -1) * min(abs(c), m) for c in p)


def _face_walk(a, b, fixed_axis: int):
    """King path from a (exclusive) to b (inclusive) holding one coordinate."""
    cur = list(a)
    path = []
    while tuple(cur) != tuple(b):
        for k in range(len(cur)):
            if k == fixed_axis:
                continue
            if cur[k] < b[k]:
                cur[k] += 1
            elif cur[k] > b[k]:
                cur[k] -= 1
        path.append(tuple(cur))
    return path


def _surface_path(a, b, m: int):
    """King path from a (exclusive) to b (inclusive) on the sup-norm shell m."""
    if a == b:
        return []
    dim = len(a)
    for k in range(dim):
        if abs(a[k]) == m and b[k] == a[k]:
            return _face_walk(a, b, k)
    fa_axis, fa_sign = _face_of(a, m)
    fb_axis, fb_sign = _face_of(b, m)
    if fa_axis != fb_axis:
        w = list(b)
        w[fa_axis] = fa_sign * m
        return _face_walk(a, tuple(w), fa_axis) + _face_walk(tuple(w), b, fb_axis)
    # opposite faces of one axis: route over a third face
    g = 1 if fa_axis == 0 else 0
    w1 = list(a)
    w1[g] = m
    w2 = list(b)
    w2[g] = m
    return (
        _face_walk(a, tuple(w1), fa_axis)
        + _face_walk(tuple(w1), tuple(w2), g)
        + _face_walk(tuple(w2), b, fb_axis)
    )


def _compress(path, stride: int):
    """Every stride-th point of a unit-step path, keeping the final point."""
    if not path:
        return []
    out = path[stride - 1 :: stride]
    if not out or out[-1] != path[-1]:
        out.append(path[-1])
    return out


def _connector(cur, target, m: int, stride: int):
    """Already-visited stepping stones from cur (exclusive) to within reach of target.

    For d >= 2 the stones lie on shell m (after an inward hop when cur sits on
    shell m+1); for d = 1 they stride through the visited interval [-m, m].
    """
    dim = len(cur)
    path = []
    a = cur
    if _level(a) == m + 1:
        a = _inward(a, m)
        path.append(a)
    b = _inward(target, m)
    if dim == 1:
        x, y = a[0], b[0]
        walk = []
        while x != y:
            x = min(x + stride, y) if y > x else max(x - stride, y)
            walk.append((x,))
        path.extend(walk)
    else:
        path.extend(_compress(_surface_path(a, b, m), stride))
    return path


def build_curve(dim: int, n_max: int, eps: float = 1.0, step_bound: int = 3) -> EnumerationCurve:
    """Construct the shell-ordered enumeration curve out to shell n_max."""
    if dim < 1:
        raise ConfigError("dimension must be >= 1")
    if n_max < 1:
        raise ConfigError("n_max must be >= 1")
    if step_bound < 2:
        raise ConfigError("step bound must be >= 2 for connector strides")
    band_factor(1, eps)  # validates eps

    origin = (0,) * dim
    entries = [CurveEntry(0, origin, 0, 0, 0, True)]
    visited = {origin}
    cur = origin
    for n in range(1, n_max + 1):
        targets = []
        for zone in (1, 2):
            for axis in range(dim):
                for sign in (1, -1):
                    targets.extend(_face_targets(dim, n, axis, sign, zone, eps))
        for tgt in targets:
            if _sup_dist(cur, tgt) > step_bound:
                for stone in _connector(cur, tgt, n - 1, step_bound):
                    if stone == cur:
                        continue
                    if stone not in visited or _sup_dist(cur, stone) > step_bound:
                        raise ConfigError(
                            f"connector failed at {stone} (step bound {step_bound} too small)"
                        )
                    lvl, face, zone = classify(stone, eps) if any(stone) else (0, 0, 0)
                    entries.append(CurveEntry(len(entries), stone, lvl, face, zone, False))
                    cur = stone
            lvl, face, zone = classify(tgt, eps)
            entries.append(CurveEntry(len(entries), tgt, lvl, face, zone, tgt not in visited))
            visited.add(tgt)
            cur = tgt
    return EnumerationCurve(dim, n_max, eps, step_bound, entries)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class CurveCheck:
    name: str
    ok: bool
    first_failure: int | None = None
    detail: str = ""


@dataclass
class CurveReport:
    checks: list
    length: int
    num_points: int

    @property
    def length_ratio(self) -> float:
        return self.length / self.num_points

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "length": self.length,
            "num_points": self.num_points,
            "length_ratio": self.length_ratio,
            "checks": [
                {"name": c.name, "ok": c.ok, "first_failure": c.first_failure, "detail": c.detail}
                for c in self.checks
            ],
        }


def _grid_index(pts: np.ndarray, n_max: int):
    return tuple((pts[:, k] + n_max for k in range(pts.shape[1])))


def validate_curve(curve: EnumerationCurve) -> CurveReport:
    """Check every structural property of the enumeration curve exhaustively."""
    checks = []
    pts = curve.points_array()
    levels = np.array([e.level for e in curve.entries])
    zones = np.array([e.zone for e in curve.entries])
    first = np.array([e.first_visit for e in curve.entries])
    d, n_max = curve.dim, curve.n_max

    ok = bool(np.all(pts[0] == 0) and curve.entries[0].first_visit)
    checks.append(CurveCheck("origin_start", ok, None if ok else 0))

    steps = np.max(np.abs(np.diff(pts, axis=0)), axis=1)
    bad = np.flatnonzero((steps < 1) | (steps > curve.step_bound))
    checks.append(
        CurveCheck(
            "step_bounds",
            bad.size == 0,
            int(bad[0]) + 1 if bad.size else None,
            f"{bad.size} violations" if bad.size else f"all steps within [1, {curve.step_bound}]",
        )
    )

    expected = (2 * n_max + 1) ** d
    seen = np.zeros((2 * n_max + 1,) * d, dtype=bool)
    fv_pts = pts[first]
    inside = np.max(np.abs(fv_pts), axis=1) <= n_max
    seen[_grid_index(fv_pts[inside], n_max)] = True
    onto = bool(np.all(seen)) and bool(np.all(inside))
    checks.append(
        CurveCheck("onto", onto, None, f"{int(np.sum(seen))}/{expected} points covered")
    )

    # first_visit flags mean what they say
    seen_set = set()
    flag_bad = None
    for e in curve.entries:
        if e.first_visit != (e.point not in seen_set):
            flag_bad = e.index
            break
        seen_set.add(e.point)
    checks.append(CurveCheck("first_visit_flags", flag_bad is None, flag_bad))

    fv_levels = levels[first]
    drops = np.flatnonzero(np.diff(fv_levels) < 0)
    idx = np.flatnonzero(first)
    checks.append(
        CurveCheck(
            "level_monotone",
            drops.size == 0,
            int(idx[drops[0] + 1]) if drops.size else None,
        )
    )

    zone_bad = None
    for n in range(1, n_max + 1):
        sel = first & (levels == n)
        z2_started = False
        for j, zz in zip(np.flatnonzero(sel), zones[sel]):
            if zz == 2:
                z2_started = True
            elif z2_started:
                zone_bad = int(j)
                break
        if zone_bad is not None:
            break
    checks.append(CurveCheck("zone_order", zone_bad is None, zone_bad))

    cls_bad = None
    for e in curve.entries[1:]:
        expected_cls = (0, 0, 0) if not any(e.point) else classify(e.point, curve.eps)
        if expected_cls != (e.level, e.face, e.zone):
            cls_bad = e.index
            break
    checks.append(CurveCheck("classification", cls_bad is None, cls_bad))

    # containment: at each zone-2 first visit, the whole inward box is visited
    grid = np.zeros((2 * n_max + 1,) * d, dtype=bool)
    cont_bad = None
    n_checked = 0
    for e in curve.entries:
        if e.first_visit and e.zone == 2 and cont_bad is None:
            offs = shrunken_box_offsets(e.face, box_radius(e.level, curve.eps), d)
            if offs.shape[0]:
                probes = np.asarray(e.point, dtype=np.int64) + offs
                if np.max(np.abs(probes)) > n_max or not np.all(grid[_grid_index(probes, n_max)]):
                    cont_bad = e.index
                n_checked += 1
        grid[tuple(c + n_max for c in e.point)] = True
    checks.append(
        CurveCheck(
            "box_containment", cont_bad is None, cont_bad, f"{n_checked} zone-2 visits probed"
        )
    )

    return CurveReport(checks, len(curve.entries), curve.num_points)


def difference_set_contains(curve: EnumerationCurve, i: int, probe) -> bool:
    """Whether probe lies in {t_k - t_i : k = 0..i} for curve index i."""
    if not 0 <= i < len(curve.entries):
        raise ConfigError(f"curve index {i} out of range")
    t_i = curve.entries[i].point
    shifted = tuple(int(p) + c for p, c in zip(probe, t_i))
    k = curve.first_visit_index(shifted)
    return k is not None and k <= i


def curve_to_csv(curve: EnumerationCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["index"] + [f"t{k + 1}" for k in range(curve.dim)] + ["level", "face", "zone", "first_visit"]
        )
        for e in curve.entries:
            writer.writerow([e.index, *e.point, e.level, e.face, e.zone, int(e.first_visit)])
