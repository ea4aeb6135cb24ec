"""Sifting: column generation for n >> m LPs, seeded by an online pass.

The working problem restricted to a column set W is solved exactly, its
dual is blended with the online pass's final dual (the "anchor") for
pricing only, dual-infeasible columns are added to W, and the loop repeats
until a full pricing sweep with the *exact* working dual certifies global
optimality.  Columns are never removed, so the working objective is
nondecreasing across rounds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .model import LpInstance
from .online import OnlineSolution
from .simplex import SimplexResult, SolveStatus, solve_lp

__all__ = [
    "SiftConfig",
    "SiftRound",
    "SiftResult",
    "SiftRoundLimit",
    "init_working_set",
    "price",
    "stabilize",
    "sift",
    "basis_metrics",
]

SUPPORT_TOL = 1e-9  # x entries above this count as basic for acc purposes


class SiftRoundLimit(RuntimeError):
    """Round cap hit before certification; `partial` holds the best result."""

    def __init__(self, message: str, partial: "SiftResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class SiftConfig:
    """Knobs of the sifting loop.

    ``init_threshold`` of None resolves to 1/K, where K is the duplication
    factor recovered from the online solution.  ``stabilization_alpha`` is
    the weight on the exact working dual in the pricing blend; 1.0 turns
    stabilization off.
    """

    init_threshold: float | None = None
    stabilization_alpha: float = 0.4
    use_online_anchor: bool = True
    pricing_tolerance: float = 1e-7
    max_new_columns_per_round: int | None = None
    max_rounds: int = 200
    acc_reference_limit: int = 20_000

    def __post_init__(self):
        if not (0.0 < self.stabilization_alpha <= 1.0):
            raise ValueError("stabilization_alpha must lie in (0, 1]")
        if self.init_threshold is not None and self.init_threshold < 0:
            raise ValueError("init_threshold must be nonnegative")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


@dataclass(frozen=True)
class SiftRound:
    round: int
    working_size: int
    priced: int
    objective: float
    wall_time_s: float


@dataclass(frozen=True)
class SiftResult:
    final_working_set: np.ndarray
    exact: SimplexResult            # solve of the final working problem (local ids)
    x: np.ndarray                   # optimal primal embedded in full length n
    y: np.ndarray                   # exact dual of the final working problem
    objective: float
    rounds: int
    acc: float | None
    rdc: float
    initial_working_set: np.ndarray | None = field(repr=False, default=None)
    trace: tuple[SiftRound, ...] = ()


def init_working_set(x_hat, threshold: float, fallback_count: int) -> np.ndarray:
    """Columns scored at or above the threshold; top-k fallback when empty."""
    x_hat = np.asarray(x_hat, dtype=np.float64)
    picked = np.flatnonzero(x_hat >= threshold)
    if picked.size == 0:
        k = min(fallback_count, x_hat.size)
        order = np.lexsort((np.arange(x_hat.size), -x_hat))  # value desc, index asc
        picked = np.sort(order[:k])
    return picked.astype(np.int64)


def price(instance: LpInstance, working_set, y, tol: float = 1e-7,
          max_new: int | None = None) -> np.ndarray:
    """Non-working columns with reduced cost c_j - <a_j, y> above tol.

    One sparse sweep; optionally truncated to the most violated columns.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (instance.num_rows,):
        raise ValueError(f"y must have shape ({instance.num_rows},)")
    reduced = instance.obj - instance.to_scipy().T @ y
    outside = np.ones(instance.num_cols, dtype=bool)
    outside[np.asarray(list(working_set), dtype=np.int64)] = False
    violated = np.flatnonzero(outside & (reduced > tol))
    if max_new is not None and violated.size > max_new:
        worst = np.argsort(reduced[violated])[::-1][:max_new]
        violated = np.sort(violated[worst])
    return violated.astype(np.int64)


def stabilize(y_working, y_anchor, alpha: float) -> np.ndarray:
    """Convex combination alpha * y_working + (1 - alpha) * y_anchor."""
    y_working = np.asarray(y_working, dtype=np.float64)
    y_anchor = np.asarray(y_anchor, dtype=np.float64)
    if y_working.shape != y_anchor.shape:
        raise ValueError("dual vectors must share a shape")
    return alpha * y_working + (1.0 - alpha) * y_anchor


def basis_metrics(reference_basis, initial_working_set, n: int) -> tuple[float, float]:
    """(acc, rdc): basic-column recall of the seed set, and its size over n."""
    ref = set(int(j) for j in reference_basis)
    if not ref:
        raise ValueError("reference basis is empty")
    seed = set(int(j) for j in initial_working_set)
    acc = len(ref & seed) / len(ref)
    rdc = len(seed) / n
    return acc, rdc


def _map_warm_basis(prev: SimplexResult, w_prev: np.ndarray, w_new: np.ndarray,
                    m: int) -> tuple[list[int], set[int]]:
    n_prev, n_new = w_prev.size, w_new.size
    basis = []
    for j in prev.basis:
        if j < n_prev:
            basis.append(int(np.searchsorted(w_new, w_prev[j])))
        else:
            basis.append(n_new + (j - n_prev))
    at_upper = set()
    for j in prev.at_upper:
        if j < n_prev:
            at_upper.add(int(np.searchsorted(w_new, w_prev[j])))
        else:
            at_upper.add(n_new + (j - n_prev))
    return basis, at_upper


def sift(instance: LpInstance, online_solution: OnlineSolution,
         config: SiftConfig | None = None) -> SiftResult:
    """Run the sifting loop from an online warm start.

    The initial working set keeps columns whose online estimate clears the
    threshold; the online final dual serves as a fixed pricing anchor for
    the whole run.  Terminates only with a global pricing certificate (no
    column anywhere has reduced cost above the tolerance against the exact
    working dual) or raises SiftRoundLimit.
    """
    if config is None:
        config = SiftConfig()
    m, n = instance.num_rows, instance.num_cols
    if np.any(instance.rhs < 0):
        raise ValueError("sifting requires b >= 0 (all-slack start must be feasible)")

    x_hat = online_solution.x_hat
    k_dup = max(1, round(online_solution.elapsed_columns / n))
    threshold = config.init_threshold if config.init_threshold is not None else 1.0 / k_dup
    anchor = np.maximum(online_solution.y_final, 0.0)

    w = init_working_set(x_hat, threshold, m)
    w0 = w.copy()
    prev_res = None
    prev_w = None
    trace: list[SiftRound] = []
    certified = False
    res = None

    for round_no in range(1, config.max_rounds + 1):
        t0 = time.perf_counter()
        sub = instance.restrict_columns(w)
        warm = None
        if prev_res is not None:
            warm = _map_warm_basis(prev_res, prev_w, w, m)
        res = solve_lp(sub, warm_basis=warm)
        if res.status is not SolveStatus.OPTIMAL:
            raise RuntimeError(f"working problem solve failed: {res.status.value}")
        y_exact = res.y_star
        if config.use_online_anchor:
            y_price = stabilize(y_exact, anchor, config.stabilization_alpha)
        else:
            y_price = y_exact
        priced = price(instance, w, y_price, config.pricing_tolerance,
                       config.max_new_columns_per_round)
        if priced.size == 0:
            # a blended dual cannot certify optimality: confirm with the
            # exact working dual over every column before terminating
            priced = price(instance, w, y_exact, config.pricing_tolerance, None)
            certified = priced.size == 0
        trace.append(SiftRound(round_no, w.size, priced.size, res.obj,
                               time.perf_counter() - t0))
        if certified:
            break
        prev_res, prev_w = res, w
        w = np.union1d(w, priced)

    acc = None
    if n <= config.acc_reference_limit:
        full = solve_lp(instance)
        if full.status is SolveStatus.OPTIMAL:
            reference = np.flatnonzero(full.x_star > SUPPORT_TOL)
            if reference.size:
                acc, _ = basis_metrics(reference, w0, n)
    rdc = w0.size / n

    x = np.zeros(n)
    x[w] = res.x_star
    result = SiftResult(
        final_working_set=w,
        exact=res,
        x=x,
        y=res.y_star,
        objective=res.obj,
        rounds=len(trace),
        acc=acc,
        rdc=rdc,
        initial_working_set=w0,
        trace=tuple(trace),
    )
    if not certified:
        raise SiftRoundLimit(
            f"no certificate after {config.max_rounds} rounds", result
        )
    return result
