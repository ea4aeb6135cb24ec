"""Euclidean projection onto a weighted simplex via breakpoint search.

Solves  min ||y - v||^2  s.t.  <w, y> = target,  y >= 0.  The KKT system
gives y = [v - theta * w]_+ for a scalar multiplier theta, and
g(theta) = <w, [v - theta*w]_+> is piecewise linear and nonincreasing for
any sign pattern of w, so theta is located by sorting the breakpoints
v_i / w_i and interpolating on the bracketing segment.
"""

from __future__ import annotations

import numpy as np

__all__ = ["project_weighted_simplex", "ProjectionInfeasibleError"]

TARGET_RTOL = 1e-9


class ProjectionInfeasibleError(ValueError):
    """The hyperplane section {<w,y> = target, y >= 0} is empty."""


def _solve_multiplier(v: np.ndarray, w: np.ndarray, target: float) -> float:
    """Multiplier theta with <w, [v - theta*w]_+> = target (w has no zeros)."""
    theta = v / w
    order = np.argsort(theta, kind="stable")
    t_sorted = theta[order]
    w_s = w[order]
    v_s = v[order]
    pos = w_s > 0

    # g evaluated exactly at each breakpoint: positive-weight coordinates are
    # active at t_k iff theta_i >= t_k, negative-weight ones iff theta_i < t_k
    # (the coordinate whose breakpoint is t_k contributes zero either way).
    wv = w_s * v_s
    ww = w_s * w_s
    pos_wv_suffix = np.cumsum((wv * pos)[::-1])[::-1]
    pos_ww_suffix = np.cumsum((ww * pos)[::-1])[::-1]
    neg_wv_prefix = np.concatenate(([0.0], np.cumsum(wv * ~pos)))
    neg_ww_prefix = np.concatenate(([0.0], np.cumsum(ww * ~pos)))
    # for ties, every index with the same breakpoint must use the group start
    first_of_group = np.searchsorted(t_sorted, t_sorted, side="left")
    s1_at = pos_wv_suffix[first_of_group] + neg_wv_prefix[first_of_group]
    s2_at = pos_ww_suffix[first_of_group] + neg_ww_prefix[first_of_group]
    g_at = s1_at - t_sorted * s2_at

    k = int(np.searchsorted(-g_at, -target, side="left"))  # first g_at[k] <= target
    if k < t_sorted.size:
        # segment (t_{k-1}, t_k]: actives are positives with theta_i >= t_k
        # and negatives with theta_i <= t_{k-1} (strictly below group k).
        s1 = pos_wv_suffix[first_of_group[k]] + neg_wv_prefix[first_of_group[k]]
        s2 = pos_ww_suffix[first_of_group[k]] + neg_ww_prefix[first_of_group[k]]
        if s2 <= 0.0:
            return float(t_sorted[k])  # flat segment, g == target throughout
        return float((s1 - target) / s2)

    # beyond the last breakpoint only negative-weight coordinates are active
    s1 = neg_wv_prefix[-1]
    s2 = neg_ww_prefix[-1]
    if s2 <= 0.0:
        return float(t_sorted[-1])  # g is identically 0 past the end
    return float((s1 - target) / s2)


def project_weighted_simplex(v, w, target: float, return_multiplier: bool = False):
    """Project v onto {y : <w, y> = target, y >= 0}.

    Parameters
    ----------
    v, w : array_like, same length
        Point to project and (possibly mixed-sign) weight vector.
    target : float
        Right-hand side of the equality constraint.
    return_multiplier : bool
        When True, also return the equality multiplier theta of the KKT
        form y = [v - theta*w]_+.

    Raises
    ------
    ProjectionInfeasibleError
        When no multiplier attains the target (the feasible set is empty,
        e.g. w >= 0 with a negative target).
    """
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if v.shape != w.shape or v.ndim != 1:
        raise ValueError("v and w must be 1-d arrays of equal length")
    target = float(target)

    nz = w != 0.0
    if not np.any(nz):
        if abs(target) <= TARGET_RTOL:
            y = np.maximum(v, 0.0)
            return (y, 0.0) if return_multiplier else y
        raise ProjectionInfeasibleError("all weights are zero but target is nonzero")

    theta = _solve_multiplier(v[nz], w[nz], target)
    y = np.maximum(v - theta * w, 0.0)
    y[~nz] = np.maximum(v[~nz], 0.0)

    attained = float(w @ y)
    if abs(attained - target) > TARGET_RTOL * (1.0 + abs(target)):
        raise ProjectionInfeasibleError(
            f"target {target} unreachable (best residual {attained - target:.3e})"
        )
    return (y, theta) if return_multiplier else y
