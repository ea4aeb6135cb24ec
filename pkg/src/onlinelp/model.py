"""Sparse LP data model, instance statistics and solution-quality metrics.

The package works on inequality-form linear programs

    max  <c, x>   subject to   A x <= b,   0 <= x <= u,

with the constraint matrix held in compressed sparse-column form so that
single columns can be visited in time proportional to their nonzero count.
All metric functions here are pure; nothing is cached on the instance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "LpInstance",
    "InstanceStats",
    "Metrics",
    "compute_stats",
    "constraint_violation",
    "optimality_gap",
    "relative_optimality",
    "dual_objective",
    "stopping_residual",
    "evaluate_solution",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LpInstance:
    """Immutable inequality-form LP: max <c,x> s.t. Ax <= b, 0 <= x <= u.

    A is stored column-major: column j owns the slice
    ``row_idx[col_ptr[j]:col_ptr[j+1]]`` / ``values[...]`` with strictly
    increasing row indices and no explicit zeros.  Instances are safe to
    share across threads/processes; the backing arrays are read-only.
    """

    num_rows: int
    num_cols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray
    rhs: np.ndarray
    obj: np.ndarray
    upper: np.ndarray
    meta: dict | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        m, n = int(self.num_rows), int(self.num_cols)
        if m < 1 or n < 1:
            raise ValueError(f"degenerate instance: m={m}, n={n}")
        object.__setattr__(self, "num_rows", m)
        object.__setattr__(self, "num_cols", n)
        cp = np.asarray(self.col_ptr, dtype=np.int64)
        ri = np.asarray(self.row_idx, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        rhs = np.asarray(self.rhs, dtype=np.float64)
        obj = np.asarray(self.obj, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)

        if cp.shape != (n + 1,):
            raise ValueError(f"col_ptr must have length n+1={n + 1}, got {cp.shape}")
        if cp[0] != 0 or cp[-1] != ri.size or np.any(np.diff(cp) < 0):
            raise ValueError("col_ptr must be nondecreasing with col_ptr[0]=0, col_ptr[n]=nnz")
        if ri.shape != vals.shape:
            raise ValueError("row_idx and values must have equal length")
        if ri.size and (ri.min() < 0 or ri.max() >= m):
            raise ValueError("row indices out of range")
        # strictly increasing rows within each column (canonical CSC)
        if ri.size > 1:
            interior = np.ones(ri.size, dtype=bool)
            starts = cp[1:-1]
            interior[starts[starts < ri.size]] = False  # column starts are unconstrained
            if np.any(np.diff(ri)[interior[1:]] <= 0):
                raise ValueError("row indices must be strictly increasing within a column")
        if np.any(vals == 0.0):
            raise ValueError("explicit zeros are not allowed; drop them before construction")
        if rhs.shape != (m,):
            raise ValueError(f"rhs must have shape ({m},)")
        if obj.shape != (n,) or upper.shape != (n,):
            raise ValueError(f"obj and upper must have shape ({n},)")
        if not np.all(upper > 0):
            raise ValueError("upper bounds must be strictly positive")
        if not (np.all(np.isfinite(rhs)) and np.all(np.isfinite(obj)) and np.all(np.isfinite(vals))):
            raise ValueError("matrix, rhs and objective entries must be finite")

        object.__setattr__(self, "col_ptr", _freeze(cp))
        object.__setattr__(self, "row_idx", _freeze(ri))
        object.__setattr__(self, "values", _freeze(vals))
        object.__setattr__(self, "rhs", _freeze(rhs))
        object.__setattr__(self, "obj", _freeze(obj))
        object.__setattr__(self, "upper", _freeze(upper))

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_dense(cls, A, b, c, upper=None, meta=None) -> "LpInstance":
        """Build an instance from a dense (m, n) matrix, dropping zeros."""
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        m, n = A.shape
        M = sp.csc_matrix(A)
        M.sort_indices()
        M.eliminate_zeros()
        if upper is None:
            upper = np.ones(n)
        return cls(m, n, M.indptr.astype(np.int64), M.indices.astype(np.int64),
                   M.data, b, c, upper, meta=meta)

    @classmethod
    def from_scipy(cls, A, b, c, upper=None, meta=None) -> "LpInstance":
        """Build an instance from any scipy sparse matrix."""
        M = sp.csc_matrix(A)
        M.sort_indices()
        M.sum_duplicates()
        M.eliminate_zeros()
        m, n = M.shape
        if upper is None:
            upper = np.ones(n)
        return cls(m, n, M.indptr.astype(np.int64), M.indices.astype(np.int64),
                   M.data, b, c, upper, meta=meta)

    # -- accessors ---------------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self.row_idx.size)

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Row indices and values of column j (views, zero-copy)."""
        lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
        return self.row_idx[lo:hi], self.values[lo:hi]

    def to_scipy(self) -> sp.csc_matrix:
        """Fresh scipy CSC view of A (constructed per call, never cached)."""
        return sp.csc_matrix(
            (self.values, self.row_idx, self.col_ptr),
            shape=(self.num_rows, self.num_cols),
        )

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def restrict_columns(self, cols: np.ndarray, meta=None) -> "LpInstance":
        """Sub-instance over the given column ids (order preserved)."""
        cols = np.asarray(cols, dtype=np.int64)
        counts = self.col_ptr[cols + 1] - self.col_ptr[cols]
        cp = np.zeros(cols.size + 1, dtype=np.int64)
        np.cumsum(counts, out=cp[1:])
        ri = np.empty(cp[-1], dtype=np.int64)
        vals = np.empty(cp[-1], dtype=np.float64)
        for k, j in enumerate(cols):
            lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
            ri[cp[k]:cp[k + 1]] = self.row_idx[lo:hi]
            vals[cp[k]:cp[k + 1]] = self.values[lo:hi]
        return LpInstance(self.num_rows, cols.size, cp, ri, vals,
                          self.rhs, self.obj[cols], self.upper[cols], meta=meta)


@dataclass(frozen=True)
class InstanceStats:
    """Single-pass data summaries used by stepsize rules and dual bounds."""

    a_bar: float      # max_j ||a_j||_inf
    c_bar: float      # max_j |c_j|
    d_lo: float       # min_i b_i / n
    d_hi: float       # max_i b_i / n
    nnz: int
    assumptions_ok: bool


def compute_stats(instance: LpInstance) -> InstanceStats:
    """Exact maxima/minima of the instance data in one sparse traversal."""
    a_bar = float(np.max(np.abs(instance.values))) if instance.nnz else 0.0
    c_bar = float(np.max(np.abs(instance.obj)))
    d = instance.rhs / instance.num_cols
    d_lo = float(d.min())
    d_hi = float(d.max())
    return InstanceStats(a_bar, c_bar, d_lo, d_hi, instance.nnz, d_lo > 0.0)


@dataclass(frozen=True)
class Metrics:
    """Quality measures of a primal estimate (and optionally a dual point)."""

    gap: float | None
    violation: float
    relative_opt: float | None
    dual_bound: float | None


def _check_x(instance: LpInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (instance.num_cols,):
        raise ValueError(f"x must have shape ({instance.num_cols},), got {x.shape}")
    return x


def _check_y(instance: LpInstance, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (instance.num_rows,):
        raise ValueError(f"y must have shape ({instance.num_rows},), got {y.shape}")
    return y


def constraint_violation(instance: LpInstance, x) -> float:
    """Euclidean norm of the positive part of Ax - b."""
    x = _check_x(instance, x)
    r = instance.to_scipy() @ x - instance.rhs
    np.maximum(r, 0.0, out=r)
    return float(np.linalg.norm(r))


def optimality_gap(instance: LpInstance, x, opt_value: float) -> float:
    """Shortfall of <c, x> against the exact optimum supplied by the caller."""
    x = _check_x(instance, x)
    return float(opt_value - instance.obj @ x)


def relative_optimality(instance: LpInstance, x, opt_value: float) -> float:
    """|<c, x> / opt_value|; raises when the reference optimum is zero."""
    x = _check_x(instance, x)
    if opt_value == 0.0:
        raise ZeroDivisionError("relative optimality undefined for a zero optimum")
    return float(abs((instance.obj @ x) / opt_value))


def dual_objective(instance: LpInstance, y) -> float:
    """Upper bound <b,y> + <u, [c - A^T y]_+>, valid for any y >= 0.

    Negative entries of y are clamped to zero (with a warning) rather than
    rejected, so the returned value is always a valid bound.
    """
    y = _check_y(instance, y)
    if np.any(y < 0):
        warnings.warn("dual_objective: negative multipliers clamped to 0", RuntimeWarning)
        y = np.maximum(y, 0.0)
    reduced = instance.obj - instance.to_scipy().T @ y
    np.maximum(reduced, 0.0, out=reduced)
    pos = reduced > 0
    # avoid inf * 0 for unbounded variables with zero reduced cost
    box_term = float(instance.upper[pos] @ reduced[pos]) if np.any(pos) else 0.0
    return float(instance.rhs @ y) + box_term


def stopping_residual(instance: LpInstance, x, y) -> float:
    """Max of scaled primal infeasibility and scaled primal/dual gap.

    Infeasibility is scaled by ||b||_1 + 1 and the gap between
    ``dual_objective(y)`` and <c,x> by |dual| + |primal| + 1.
    """
    x = _check_x(instance, x)
    y = _check_y(instance, y)
    primal = float(instance.obj @ x)
    dual = dual_objective(instance, y)
    infeas = constraint_violation(instance, x) / (np.abs(instance.rhs).sum() + 1.0)
    if not np.isfinite(dual):
        return float("inf")
    gap = abs(dual - primal) / (abs(dual) + abs(primal) + 1.0)
    return float(max(infeas, gap))


def evaluate_solution(instance: LpInstance, x, opt_value: float | None = None,
                      y=None) -> Metrics:
    """Assemble the standard metric set for a primal (and optional dual) point."""
    violation = constraint_violation(instance, x)
    gap = None if opt_value is None else optimality_gap(instance, x, opt_value)
    rel = None
    if opt_value is not None and opt_value != 0.0:
        rel = relative_optimality(instance, x, opt_value)
    bound = None if y is None else dual_objective(instance, y)
    return Metrics(gap=gap, violation=violation, relative_opt=rel, dual_bound=bound)
