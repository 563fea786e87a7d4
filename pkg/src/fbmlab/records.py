"""Record functional of a field realization read along an enumeration curve.

For values xi_0 = 0, xi_1, xi_2, ... the running maximum is M_i =
max(M_{i-1}, xi_i) with M_0 = 0, and the record functional accumulates the
positive record increments (xi_i - M_{i-1})_+.  The functional telescopes to
the running maximum itself, which is the identity everything downstream
leans on.  Revisited curve entries repeat an earlier value, so their
increment is exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import EnumerationCurve
from .errors import ConfigError


@dataclass
class RecordTrace:
    """Values along a curve with running maxima and record increments.

    increments[i] is the record increment at entry i (index 0, the origin,
    has increment 0 by convention).  total is the exactly rounded sum of all
    increments (math.fsum), which must agree with the final running maximum.
    """

    values: np.ndarray
    running_max: np.ndarray
    increments: np.ndarray
    total: float

    def functional_at(self, i: int) -> float:
        """Record functional after entry i (exactly rounded partial sum)."""
        return math.fsum(self.increments[: i + 1])


def record_trace(values) -> RecordTrace:
    """Build the record trace of one realization (index 0 must be the origin)."""
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or vals.size == 0:
        raise ConfigError("record_trace needs a nonempty 1-d value sequence")
    padded = vals.copy()
    padded[0] = 0.0  # pinned origin
    m = np.maximum.accumulate(padded)
    m[0] = 0.0
    inc = np.zeros_like(padded)
    inc[1:] = np.maximum(padded[1:] - m[:-1], 0.0)
    return RecordTrace(padded, m, inc, math.fsum(inc))


def batch_increments(values: np.ndarray):
    """Running maxima and record increments for a (count, n) batch of traces."""
    vals = np.asarray(values, dtype=float)
    m = np.maximum.accumulate(vals, axis=1)
    inc = np.zeros_like(vals)
    inc[:, 1:] = np.maximum(vals[:, 1:] - m[:, :-1], 0.0)
    return m, inc


def level_sums(curve: EnumerationCurve, trace: RecordTrace, n: int):
    """Record-increment mass of shell n split into (edge zone, bulk zone).

    Both sums are exactly rounded (fsum), so identities against functional
    differences hold independently of summation order.  Revisited entries
    contribute exactly zero and may be included freely.
    """
    if len(trace.values) != len(curve.entries):
        raise ConfigError("trace and curve have different lengths")
    s1 = math.fsum(
        trace.increments[e.index] for e in curve.entries if e.level == n and e.zone == 1
    )
    s2 = math.fsum(
        trace.increments[e.index] for e in curve.entries if e.level == n and e.zone == 2
    )
    return s1, s2


def shell_increment_bound_check(curve: EnumerationCurve, trace: RecordTrace, n: int):
    """Per-realization check that the shell-n functional increment is at most
    twice the bulk-zone record mass.

    Returns (holds, slack) with slack = 2 * bulk sum - shell increment; the
    shell increment equals edge sum + bulk sum, so slack = bulk - edge.  The
    check fails exactly when the edge zone carries more record mass than the
    bulk zone in this realization.
    """
    if not 1 <= n <= curve.n_max:
        raise ConfigError(f"shell {n} outside curve range")
    s1, s2 = level_sums(curve, trace, n)
    lhs = trace.functional_at(curve.level_end_index(n)) - trace.functional_at(
        curve.level_end_index(n - 1)
    )
    slack = 2.0 * s2 - lhs
    return slack >= 0.0, slack


def level_sums_to_csv(curve: EnumerationCurve, trace: RecordTrace, path) -> None:
    """Per-shell record sums: n, edge sum, bulk sum, functional at shell end."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "edge_sum", "bulk_sum", "functional"])
        for n in range(1, curve.n_max + 1):
            s1, s2 = level_sums(curve, trace, n)
            writer.writerow([n, repr(s1), repr(s2), repr(trace.functional_at(curve.level_end_index(n)))])
