"""Single-pass online-learning solvers for offline LPs.

Two dual updates are provided for the finite-sum dual

    min_{y >= 0}  (1/n) sum_j  <d, y> + [c_j - <a_j, y>]_+,      d = b/n:

* the explicit (subgradient) step prices column j against the current dual,
  sets x_j = 1{c_j > <a_j, y>} and moves y along gamma * (a_j x_j - d),
  projected onto the nonnegative orthant;
* the implicit (proximal point) step solves the one-column prox subproblem
  exactly by a three-case analysis, recovering a possibly fractional x_j
  as the Lagrange multiplier of the kink.

A pass visits every column exactly once in a seeded uniformly random order.
``run_duplicated`` repeats each column K times against capacity K*b and
averages the K estimates, which tightens both the optimality gap and the
constraint violation by roughly sqrt(K).

The explicit pass also comes in a lazy O(nnz(A)) variant: between touches a
coordinate only drifts by -gamma*d_i per iteration, so its value after k
untouched iterations is [y_i - k*gamma*d_i]_+ and never needs to be formed
until the column support demands it.  The dense and lazy passes share the
same per-coordinate arithmetic, so their outputs agree bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .model import LpInstance, InstanceStats, compute_stats
from .projection import project_weighted_simplex

__all__ = [
    "RunConfig",
    "OnlineSolution",
    "ProximalSolution",
    "ProxCase",
    "default_stepsize",
    "explicit_step",
    "implicit_step",
    "run_pass",
    "lazy_explicit_pass",
    "run_duplicated",
    "solve_online",
    "explicit_dual_norm_bound",
    "implicit_dual_norm_bound",
    "implicit_step_norm_bound",
    "unit_box_rescaled",
]

KKT_TOL = 1e-8

_METHODS = ("explicit", "implicit")
_STEPSIZE_MODES = ("simple", "theorem")
_STARTS = ("zero", "ones")


class ProxCase(Enum):
    """Which region of the piecewise prox subproblem produced the solution."""

    KINK_INACTIVE_HIGH = "kink_inactive_high"   # c_j - <a_j, y+> > 0, x = 1
    KINK_INACTIVE_LOW = "kink_inactive_low"     # c_j - <a_j, y+> < 0, x = 0
    KINK_ACTIVE = "kink_active"                 # c_j = <a_j, y+>, x in [0, 1]


@dataclass(frozen=True)
class ProximalSolution:
    """Exact solution of one implicit (proximal point) column subproblem."""

    y_plus: np.ndarray
    x_k: float
    case_tag: ProxCase
    kkt_residual: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    """Configuration of a single online pass (or a K-duplicated pass).

    ``stepsize`` is either the literal step length (a positive float), or
    "simple" for 1/sqrt(K*m*n), or "theorem" for the gap/violation-balancing
    value derived from the instance statistics.
    """

    method: str = "explicit"
    stepsize: float | str = "simple"
    duplication: int = 1
    seed: int = 0
    enforce_feasibility: bool = False
    start: str | np.ndarray = "zero"
    lazy: bool = False
    block_layout: bool = False
    check_assumptions: bool = True
    check_dual_bounds: bool = False

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if isinstance(self.stepsize, str):
            if self.stepsize not in _STEPSIZE_MODES:
                raise ValueError(f"stepsize mode must be one of {_STEPSIZE_MODES} or a float")
        elif not (float(self.stepsize) > 0):
            raise ValueError("fixed stepsize must be positive")
        if self.duplication < 1:
            raise ValueError("duplication must be >= 1")
        if isinstance(self.start, str) and self.start not in _STARTS:
            raise ValueError(f"start must be one of {_STARTS} or an explicit vector")
        if self.lazy and self.method != "explicit":
            raise ValueError("the lazy pass exists only for the explicit update")


@dataclass(frozen=True)
class OnlineSolution:
    """Output of one online pass: primal estimate, final dual, diagnostics."""

    x_hat: np.ndarray
    y_final: np.ndarray
    objective: float
    violation: float
    max_dual_norm: float
    elapsed_columns: int


def default_stepsize(stats: InstanceStats, num_rows: int, num_cols: int,
                     duplication: int = 1, method: str = "explicit",
                     mode: float | str = "simple") -> float:
    """Resolve the step length gamma for a pass.

    "simple" gives 1/sqrt(K*m*n).  "theorem" gives the constant that
    balances the gap and violation bounds: sqrt(2 c_bar / (d_lo *
    (a_bar + d_hi)^2 * m * nK)) for the explicit update and the same value
    divided by sqrt(5) for the implicit one.  A fixed float is returned
    unchanged.
    """
    if not isinstance(mode, str):
        gamma = float(mode)
        if gamma <= 0:
            raise ValueError("fixed stepsize must be positive")
        return gamma
    if mode == "simple":
        return 1.0 / math.sqrt(duplication * num_rows * num_cols)
    if mode != "theorem":
        raise ValueError(f"unknown stepsize mode {mode!r}")
    if stats.d_lo <= 0:
        raise ValueError("theorem stepsize needs d_lo > 0 (b must be strictly positive)")
    n_eff = num_cols * duplication
    base = 2.0 * stats.c_bar / (stats.d_lo * (stats.a_bar + stats.d_hi) ** 2
                                * num_rows * n_eff)
    gamma = math.sqrt(base)
    if method == "implicit":
        gamma /= math.sqrt(5.0)
    return gamma


# -- dual-iterate bounds (used as runtime invariants in tests) --------------

def explicit_dual_norm_bound(stats: InstanceStats, num_rows: int, gamma: float) -> float:
    """Uniform bound on ||y^k|| along an explicit pass with constant gamma."""
    ad = stats.a_bar + stats.d_hi
    return (num_rows * ad ** 2 * gamma / stats.d_lo
            + math.sqrt(num_rows) * ad * gamma + stats.c_bar / stats.d_lo)


def implicit_dual_norm_bound(stats: InstanceStats, num_rows: int, gamma: float) -> float:
    """Uniform bound on ||y^k|| along an implicit pass with constant gamma."""
    ad = stats.a_bar + stats.d_hi
    return (3.0 * num_rows * ad ** 2 * gamma / stats.d_lo
            + math.sqrt(num_rows) * ad * gamma + stats.c_bar / stats.d_lo)


def implicit_step_norm_bound(stats: InstanceStats, num_rows: int, gamma: float) -> float:
    """Bound on a single implicit dual move ||y^{k+1} - y^k||."""
    return math.sqrt(num_rows) * (stats.a_bar + stats.d_hi) * gamma


def _entry_norm_bound(stats: InstanceStats, num_rows: int, gamma: float) -> float:
    # the norm bound holds for every iterate provided the start is below this
    ad = stats.a_bar + stats.d_hi
    return (num_rows * ad ** 2 * gamma + 2.0 * stats.c_bar) / (2.0 * stats.d_lo)


# -- single-step operations --------------------------------------------------

def explicit_step(instance: LpInstance, y, j: int, gamma: float,
                  remaining_capacity=None, d=None):
    """One explicit subgradient step on column j.

    Returns ``(y_next, x_k)`` with x_k = 1{c_j > <a_j, y>} (forced to 0 when
    a remaining-capacity vector is supplied and column j does not fit) and
    y_next = [y + gamma * (a_j x_k - d)]_+.
    """
    y = np.asarray(y, dtype=np.float64)
    if d is None:
        d = instance.rhs / instance.num_cols
    rows, vals = instance.column(j)
    x = 1.0 if instance.obj[j] > vals @ y[rows] else 0.0
    if x == 1.0 and remaining_capacity is not None:
        if not np.all(remaining_capacity[rows] >= vals):
            x = 0.0
    y_next = y - gamma * d
    if x == 1.0:
        y_next[rows] += gamma * vals
    np.maximum(y_next, 0.0, out=y_next)
    return y_next, x


def _prox_objective(y_point, y_center, rows, vals, c_j, d, gamma):
    """Value of the implicit subproblem objective at y_point."""
    lin = float(d @ y_point)
    kink = max(c_j - float(vals @ y_point[rows]), 0.0)
    prox = float(np.sum((y_point - y_center) ** 2)) / (2.0 * gamma)
    return lin + kink + prox


def _kkt_residual(y_plus, z, rows, vals, c_j, gamma, x):
    """Scaled stationarity + complementarity residual of a prox candidate."""
    stat = z.copy()
    if x != 0.0 and rows.size:
        stat[rows] += (gamma * x) * vals
    np.maximum(stat, 0.0, out=stat)
    stat_res = float(np.max(np.abs(stat - y_plus))) if stat.size else 0.0
    g = c_j - float(vals @ y_plus[rows]) if rows.size else c_j
    comp_res = (1.0 - x) * max(g, 0.0) + x * max(-g, 0.0)
    scale_y = 1.0 + float(np.max(y_plus)) if y_plus.size else 1.0
    return max(stat_res / scale_y, comp_res / (1.0 + abs(c_j)))


def _implicit_step_core(y, rows, vals, c_j, gd, gamma) -> ProximalSolution:
    z = y - gd
    # Case 1: kink inactive from above, x = 1
    y1 = z.copy()
    if rows.size:
        y1[rows] += gamma * vals
    np.maximum(y1, 0.0, out=y1)
    g1 = c_j - float(vals @ y1[rows]) if rows.size else c_j
    if g1 > 0.0:
        return ProximalSolution(y1, 1.0, ProxCase.KINK_INACTIVE_HIGH, 0.0)
    # Case 2: kink inactive from below, x = 0
    y2 = np.maximum(z, 0.0)
    g2 = c_j - float(vals @ y2[rows]) if rows.size else c_j
    if g2 < 0.0:
        return ProximalSolution(y2, 0.0, ProxCase.KINK_INACTIVE_LOW, 0.0)
    # Case 3: kink active; off-support coordinates keep the case-2 formula,
    # the support solves a weighted-simplex projection of z.
    if rows.size == 0:
        # c_j is exactly at the kink (measure zero); any x in [0,1] is optimal
        return ProximalSolution(y2, 0.0, ProxCase.KINK_ACTIVE, 0.0)
    y3 = y2.copy()
    y_s, theta = project_weighted_simplex(z[rows], vals, c_j, return_multiplier=True)
    y3[rows] = y_s
    x = min(max(-theta / gamma, 0.0), 1.0)
    resid = _kkt_residual(y3, z, rows, vals, c_j, gamma, x)
    if resid > KKT_TOL:
        raise ArithmeticError(
            f"implicit subproblem failed KKT verification (residual {resid:.3e})"
        )
    return ProximalSolution(y3, x, ProxCase.KINK_ACTIVE, resid)


def implicit_step(instance: LpInstance, y, j: int, gamma: float, d=None) -> ProximalSolution:
    """Solve the proximal-point subproblem for column j exactly.

    Minimizes <d,y'> + [c_j - <a_j,y'>]_+ + ||y' - y||^2 / (2 gamma) over
    y' >= 0 by trying the two kink-inactive closed forms first and falling
    back to the weighted-simplex projection when the kink is active.
    """
    y = np.asarray(y, dtype=np.float64)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if d is None:
        d = instance.rhs / instance.num_cols
    rows, vals = instance.column(j)
    return _implicit_step_core(y, rows, vals, float(instance.obj[j]), gamma * d, gamma)


# -- pass engines ------------------------------------------------------------

def _resolve_start(start, num_rows: int) -> np.ndarray:
    if isinstance(start, str):
        if start == "zero":
            return np.zeros(num_rows)
        return np.ones(num_rows)
    y0 = np.asarray(start, dtype=np.float64).copy()
    if y0.shape != (num_rows,):
        raise ValueError(f"start vector must have shape ({num_rows},)")
    if np.any(y0 < 0):
        raise ValueError("start vector must be nonnegative")
    return y0


def _column_sequence(num_cols: int, duplication: int, seed: int,
                     block_layout: bool) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if duplication == 1:
        return rng.permutation(num_cols)
    if block_layout:
        return np.concatenate([rng.permutation(num_cols) for _ in range(duplication)])
    return rng.permutation(num_cols * duplication) % num_cols


@dataclass
class LazyDualState:
    """Per-coordinate drift bookkeeping for the explicit dual update.

    Between touches coordinate i only loses ``step * d_i`` per iteration
    (projected at zero), so its dense value at iteration k is recovered on
    demand as [y_base_i - (k - last_update_i) * step * d_i]_+.  Both the
    dense and the lazy explicit passes evolve their duals through this one
    kernel, which is what makes their outputs agree bitwise.
    """

    y_base: np.ndarray        # value at each coordinate's last touch
    last_update: np.ndarray   # iteration count at that touch
    step: float               # gamma
    d: np.ndarray
    step_d: np.ndarray        # precomputed gamma * d

    @classmethod
    def from_start(cls, y0: np.ndarray, gamma: float, d: np.ndarray) -> "LazyDualState":
        return cls(y0.copy(), np.zeros(d.size, dtype=np.int64), gamma, d, gamma * d)

    def materialize(self, rows: np.ndarray, k: int) -> np.ndarray:
        return np.maximum(
            self.y_base[rows] - (k - self.last_update[rows]) * self.step_d[rows], 0.0)

    def materialize_all(self, k: int) -> np.ndarray:
        return np.maximum(self.y_base - (k - self.last_update) * self.step_d, 0.0)

    def commit(self, rows: np.ndarray, k: int, values: np.ndarray) -> None:
        self.y_base[rows] = values
        self.last_update[rows] = k + 1


def _explicit_pass(instance: LpInstance, seq: np.ndarray, gamma: float,
                   start_y: np.ndarray, enforce: bool, duplication: int,
                   lazy: bool, norm_bound: float | None) -> OnlineSolution:
    """Shared engine for the dense and lazy explicit passes.

    The dense variant materializes the full dual vector every iteration
    (O(mn) work, exact norm tracking); the lazy one materializes only the
    visited column supports (O(nnz) work, norm tracked as an upper bound
    since stale entries only shrink under the drift).
    """
    m, n = instance.num_rows, instance.num_cols
    d = instance.rhs / n
    if lazy and np.any(d < 0):
        raise ValueError("lazy explicit pass requires b >= 0")
    cp, ri, vals_all = instance.col_ptr, instance.row_idx, instance.values
    c = instance.obj
    state = LazyDualState.from_start(start_y, gamma, d)
    gd = state.step_d
    x_sum = np.zeros(n)
    remaining = duplication * instance.rhs.astype(np.float64) if enforce else None

    if lazy:
        stale_sq = float(start_y @ start_y)
        max_norm_sq = stale_sq
    else:
        max_norm = float(np.linalg.norm(start_y))

    for k, j in enumerate(seq):
        lo, hi = cp[j], cp[j + 1]
        rows = ri[lo:hi]
        vals = vals_all[lo:hi]
        if lazy:
            ym = state.materialize(rows, k)
        else:
            y_full = state.materialize_all(k)
            norm = float(np.linalg.norm(y_full))
            max_norm = max(max_norm, norm)
            if norm_bound is not None and norm > norm_bound * (1.0 + 1e-9):
                raise RuntimeError(
                    f"explicit dual iterate escaped its norm bound at step {k}: "
                    f"{norm:.6g} > {norm_bound:.6g}"
                )
            ym = y_full[rows]
        x = 1.0 if c[j] > vals @ ym else 0.0
        if x == 1.0 and remaining is not None and not np.all(remaining[rows] >= vals):
            x = 0.0
        if x == 1.0:
            new_vals = np.maximum(ym + gamma * vals - gd[rows], 0.0)
            if remaining is not None:
                remaining[rows] -= vals
            x_sum[j] += 1.0
        else:
            new_vals = np.maximum(ym - gd[rows], 0.0)
        if lazy:
            stale_sq += float(new_vals @ new_vals) - float(state.y_base[rows] @ state.y_base[rows])
            max_norm_sq = max(max_norm_sq, stale_sq)
        state.commit(rows, k, new_vals)

    n_iter = seq.size
    y_final = state.materialize_all(n_iter)
    if lazy:
        max_norm = math.sqrt(max(max_norm_sq, 0.0))
    else:
        max_norm = max(max_norm, float(np.linalg.norm(y_final)))
        if norm_bound is not None and max_norm > norm_bound * (1.0 + 1e-9):
            raise RuntimeError("explicit dual iterate escaped its norm bound at the end")

    x_hat = x_sum / duplication
    return _finish(instance, x_hat, y_final, max_norm, n_iter)


def _implicit_pass(instance: LpInstance, seq: np.ndarray, gamma: float,
                   start_y: np.ndarray, enforce: bool, duplication: int,
                   norm_bound: float | None, step_bound: float | None) -> OnlineSolution:
    m, n = instance.num_rows, instance.num_cols
    d = instance.rhs / n
    gd = gamma * d
    c = instance.obj
    cp, ri, vals_all = instance.col_ptr, instance.row_idx, instance.values
    y = start_y.copy()
    x_sum = np.zeros(n)
    remaining = duplication * instance.rhs.astype(np.float64) if enforce else None
    max_norm = float(np.linalg.norm(y))

    for k, j in enumerate(seq):
        lo, hi = cp[j], cp[j + 1]
        rows = ri[lo:hi]
        vals = vals_all[lo:hi]
        sol = _implicit_step_core(y, rows, vals, float(c[j]), gd, gamma)
        if step_bound is not None:
            move = float(np.linalg.norm(sol.y_plus - y))
            if move > step_bound * (1.0 + 1e-9):
                raise RuntimeError(
                    f"implicit dual move escaped its bound at step {k}: "
                    f"{move:.6g} > {step_bound:.6g}"
                )
        y = sol.y_plus
        norm = float(np.linalg.norm(y))
        max_norm = max(max_norm, norm)
        if norm_bound is not None and norm > norm_bound * (1.0 + 1e-9):
            raise RuntimeError(
                f"implicit dual iterate escaped its norm bound at step {k}: "
                f"{norm:.6g} > {norm_bound:.6g}"
            )
        x = sol.x_k
        if remaining is not None and x > 0.0:
            pos = vals > 0
            if np.any(pos):
                x = min(x, float(np.min(remaining[rows][pos] / vals[pos])))
            x = max(x, 0.0)
            remaining[rows] -= x * vals
        x_sum[j] += x

    x_hat = x_sum / duplication
    return _finish(instance, x_hat, y, max_norm, seq.size)


def _finish(instance, x_hat, y_final, max_norm, elapsed) -> OnlineSolution:
    np.clip(x_hat, 0.0, instance.upper, out=x_hat)
    r = instance.to_scipy() @ x_hat - instance.rhs
    np.maximum(r, 0.0, out=r)
    return OnlineSolution(
        x_hat=x_hat,
        y_final=y_final,
        objective=float(instance.obj @ x_hat),
        violation=float(np.linalg.norm(r)),
        max_dual_norm=max_norm,
        elapsed_columns=int(elapsed),
    )


def _run(instance: LpInstance, config: RunConfig, duplication: int) -> OnlineSolution:
    if not np.all(instance.upper == 1.0):
        raise ValueError(
            "online passes require unit upper bounds; rescale with unit_box_rescaled()"
        )
    stats = compute_stats(instance)
    if config.check_assumptions and not stats.assumptions_ok:
        raise ValueError(
            "instance violates d = b/n > 0; pass check_assumptions=False to override"
        )
    gamma = default_stepsize(stats, instance.num_rows, instance.num_cols,
                             duplication, config.method, config.stepsize)
    start_y = _resolve_start(config.start, instance.num_rows)
    seq = _column_sequence(instance.num_cols, duplication, config.seed,
                           config.block_layout)

    norm_bound = step_bound = None
    if config.check_dual_bounds:
        if not stats.assumptions_ok:
            raise ValueError("dual-iterate bounds require d_lo > 0")
        entry = _entry_norm_bound(stats, instance.num_rows, gamma)
        if float(np.linalg.norm(start_y)) > entry:
            raise ValueError("start point too large for the dual-iterate bound to apply")
        if config.method == "explicit":
            norm_bound = explicit_dual_norm_bound(stats, instance.num_rows, gamma)
        else:
            norm_bound = implicit_dual_norm_bound(stats, instance.num_rows, gamma)
            step_bound = implicit_step_norm_bound(stats, instance.num_rows, gamma)

    if config.method == "explicit":
        return _explicit_pass(instance, seq, gamma, start_y,
                              config.enforce_feasibility, duplication,
                              config.lazy, norm_bound)
    return _implicit_pass(instance, seq, gamma, start_y,
                          config.enforce_feasibility, duplication,
                          norm_bound, step_bound)


def run_pass(instance: LpInstance, config: RunConfig) -> OnlineSolution:
    """One online pass over all columns in seeded random order (K = 1)."""
    return _run(instance, config, duplication=1)


def lazy_explicit_pass(instance: LpInstance, config: RunConfig) -> OnlineSolution:
    """O(nnz(A)) explicit pass; bitwise-identical x_hat/y_final to run_pass."""
    if config.method != "explicit":
        raise ValueError("lazy pass exists only for the explicit update")
    if config.check_dual_bounds:
        raise ValueError("per-iterate bound checks need the dense pass")
    return _run(instance, replace(config, lazy=True), duplication=1)


def run_duplicated(instance: LpInstance, config: RunConfig) -> OnlineSolution:
    """Single pass over K virtual copies of each column against capacity K*b.

    No physical copies are formed: virtual index t maps to column t mod n,
    and the K per-copy estimates of a column are averaged into x_hat.
    """
    return _run(instance, config, duplication=config.duplication)


def unit_box_rescaled(instance: LpInstance) -> tuple[LpInstance, np.ndarray]:
    """Equivalent unit-box instance (columns scaled by u) plus the scale.

    Online passes assume 0 <= x <= 1.  For a general finite u, substituting
    x = u * x' gives A' = A diag(u), c' = c * u, u' = 1; a primal estimate
    for the original instance is recovered as u * x_hat'.  Duals coincide.
    """
    u = instance.upper
    if not np.all(np.isfinite(u)):
        raise ValueError("unit-box rescaling needs finite upper bounds")
    if np.all(u == 1.0):
        return instance, u
    scale = np.repeat(u, np.diff(instance.col_ptr))
    scaled = LpInstance(
        instance.num_rows, instance.num_cols, instance.col_ptr, instance.row_idx,
        instance.values * scale, instance.rhs, instance.obj * u,
        np.ones(instance.num_cols),
    )
    return scaled, u


def solve_online(instance: LpInstance, config: RunConfig) -> OnlineSolution:
    """Run the configured (possibly duplicated) pass on any finite-box instance.

    Instances with non-unit upper bounds are rescaled to the unit box for
    the pass and the primal estimate is mapped back, so the returned
    solution lives in the original coordinates.
    """
    scaled, u = unit_box_rescaled(instance)
    if scaled is instance:
        return run_duplicated(instance, config)
    sol = run_duplicated(scaled, config)
    x_hat = sol.x_hat * u
    r = instance.to_scipy() @ x_hat - instance.rhs
    np.maximum(r, 0.0, out=r)
    return OnlineSolution(
        x_hat=x_hat,
        y_final=sol.y_final,
        objective=float(instance.obj @ x_hat),
        violation=float(np.linalg.norm(r)),
        max_dual_norm=sol.max_dual_norm,
        elapsed_columns=sol.elapsed_columns,
    )
