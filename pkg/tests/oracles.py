"""Independent reference implementations used to check the production code.

Everything here is deliberately naive (plain Python loops, brute-force
enumeration, grids) and shares no code path with the package.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def entropy_bits(p) -> float:
    return -sum(x * math.log2(x) for x in p if x > 0.0)


def _rows_entropy(rows: np.ndarray) -> np.ndarray:
    safe = np.where(rows > 0.0, rows, 1.0)
    return -(np.where(rows > 0.0, rows * np.log2(safe), 0.0)).sum(axis=-1)


# ---------------------------------------------------------------- minimum entropy


def brute_force_min_entropy(lower, upper, feas_tol=1e-12):
    """Enumerate all vertex candidates with itertools; returns (value, point)."""
    lower = [float(x) for x in lower]
    upper = [float(x) for x in upper]
    c = len(lower)
    best_val, best_point = math.inf, None
    for slack in range(c):
        others = [k for k in range(c) if k != slack]
        for pattern in itertools.product((False, True), repeat=c - 1):
            p = [0.0] * c
            total = 0.0
            for k, at_upper in zip(others, pattern):
                p[k] = upper[k] if at_upper else lower[k]
                total += p[k]
            forced = 1.0 - total
            if forced < lower[slack] - feas_tol or forced > upper[slack] + feas_tol:
                continue
            p[slack] = min(max(forced, lower[slack]), upper[slack])
            h = entropy_bits(p)
            if h < best_val:
                best_val, best_point = h, p
    return best_val, best_point


# ---------------------------------------------------------------- maximum entropy


def _axis_points(lo: float, up: float, step: float) -> np.ndarray:
    pts = np.arange(lo, up, step)
    return np.unique(np.clip(np.append(pts, up), lo, up))


def grid_max_entropy(lower, upper, step=1e-3, slack=1e-9):
    """Best entropy over a regular grid of the first C-1 coordinates (C <= 4)."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    c = lower.shape[0]
    if c not in (2, 3, 4):
        raise ValueError("grid oracle supports C in {2, 3, 4}")
    best = -np.inf

    def _close_last(partial_sum: float | np.ndarray, free: np.ndarray):
        last = 1.0 - partial_sum - free
        ok = (last >= lower[c - 1] - slack) & (last <= upper[c - 1] + slack)
        return free[ok], np.clip(last[ok], lower[c - 1], upper[c - 1])

    if c == 2:
        free, last = _close_last(0.0, _axis_points(lower[0], upper[0], step))
        if free.size:
            best = float(_rows_entropy(np.stack([free, last], axis=1)).max())
    elif c == 3:
        axis1 = _axis_points(lower[1], upper[1], step)
        for v0 in _axis_points(lower[0], upper[0], step):
            free, last = _close_last(v0, axis1)
            if free.size:
                pts = np.stack([np.full(free.size, v0), free, last], axis=1)
                best = max(best, float(_rows_entropy(pts).max()))
    else:
        axis1 = _axis_points(lower[1], upper[1], step)
        axis2 = _axis_points(lower[2], upper[2], step)
        for v0 in _axis_points(lower[0], upper[0], step):
            for v1 in axis1:
                free, last = _close_last(v0 + v1, axis2)
                if free.size:
                    pts = np.stack(
                        [
                            np.full(free.size, v0),
                            np.full(free.size, v1),
                            free,
                            last,
                        ],
                        axis=1,
                    )
                    best = max(best, float(_rows_entropy(pts).max()))
    return best


def _project_box_simplex(v: np.ndarray, lower: np.ndarray, upper: np.ndarray):
    """Batched Euclidean projection onto {lower <= p <= upper, sum p = 1}."""
    tau_lo = (v - upper).min(axis=1)
    tau_hi = (v - lower).max(axis=1)
    for _ in range(100):
        tau = 0.5 * (tau_lo + tau_hi)
        s = np.clip(v - tau[:, None], lower, upper).sum(axis=1)
        tau_lo = np.where(s > 1.0, tau, tau_lo)
        tau_hi = np.where(s <= 1.0, tau, tau_hi)
    tau = 0.5 * (tau_lo + tau_hi)
    return np.clip(v - tau[:, None], lower, upper)


def projected_ascent_max_entropy(lower, upper, n_starts=10, iters=600, seed=0):
    """Projected gradient ascent with backtracking from random starts."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rng = np.random.default_rng(seed)
    v = rng.uniform(lower, upper, size=(n_starts, lower.shape[0]))
    p = _project_box_simplex(v, lower, upper)
    h = _rows_entropy(p)
    step = np.full(n_starts, 0.25)
    inv_ln2 = 1.0 / math.log(2.0)
    for _ in range(iters):
        grad = -(np.log2(np.maximum(p, 1e-300)) + inv_ln2)
        cand = _project_box_simplex(p + step[:, None] * grad, lower, upper)
        hc = _rows_entropy(cand)
        improved = hc >= h
        p = np.where(improved[:, None], cand, p)
        h = np.where(improved, hc, h)
        step = np.where(improved, np.minimum(step * 1.2, 1.0), step * 0.5)
        step = np.maximum(step, 1e-9)
    return float(h.max())


# ---------------------------------------------------------------- set functions


def lower_probability_naive(lower, upper, subset) -> float:
    c = len(lower)
    inside = sum(lower[k] for k in subset)
    outside = sum(upper[k] for k in range(c) if k not in subset)
    return max(inside, 1.0 - outside)


def mobius_masses_naive(lower, upper) -> dict:
    """Double loop over subsets: m(B) = sum_{A subseteq B} (-1)^{|B\\A|} nu(A)."""
    c = len(lower)
    classes = list(range(c))
    masses = {}
    for size in range(c + 1):
        for b in itertools.combinations(classes, size):
            b_set = frozenset(b)
            total = 0.0
            for inner in range(size + 1):
                for a in itertools.combinations(b, inner):
                    sign = (-1) ** (size - inner)
                    total += sign * lower_probability_naive(lower, upper, set(a))
            masses[b_set] = total
    return masses


def generalized_hartley_naive(lower, upper) -> float:
    masses = mobius_masses_naive(lower, upper)
    return sum(m * math.log2(len(b)) for b, m in masses.items() if len(b) > 0)


# ---------------------------------------------------------------- metrics


def auroc_all_pairs(id_scores, ood_scores) -> float:
    wins = ties = 0
    for o in ood_scores:
        for i in id_scores:
            if o > i:
                wins += 1
            elif o == i:
                ties += 1
    return (wins + 0.5 * ties) / (len(id_scores) * len(ood_scores))


def average_precision_stepwise(id_scores, ood_scores) -> float:
    """Walk unique thresholds descending; each positive contributes the precision
    measured after its whole tie group is included."""
    scored = [(s, 0) for s in id_scores] + [(s, 1) for s in ood_scores]
    scored.sort(key=lambda t: -t[0])
    n_pos = sum(1 for _, y in scored if y == 1)
    ap = 0.0
    tp = fp = 0
    index = 0
    while index < len(scored):
        j = index
        group_tp = group_fp = 0
        while j < len(scored) and scored[j][0] == scored[index][0]:
            if scored[j][1] == 1:
                group_tp += 1
            else:
                group_fp += 1
            j += 1
        tp += group_tp
        fp += group_fp
        if group_tp:
            ap += group_tp * (tp / (tp + fp))
        index = j
    return ap / n_pos


def ece_naive(confidences, corrects, bins) -> float:
    """Per-bin loop over ceil(conf * bins) with conf = 0 in bin 1."""
    n = len(confidences)
    total = 0.0
    for g in range(1, bins + 1):
        members = [
            (c, ok)
            for c, ok in zip(confidences, corrects)
            if max(1, math.ceil(c * bins)) == g or min(math.ceil(c * bins), bins) == g
            and max(1, math.ceil(c * bins)) == g
        ]
        members = [
            (c, ok)
            for c, ok in zip(confidences, corrects)
            if min(max(1, math.ceil(c * bins)), bins) == g
        ]
        if not members:
            continue
        acc = sum(ok for _, ok in members) / len(members)
        conf = sum(c for c, _ in members) / len(members)
        total += (len(members) / n) * abs(acc - conf)
    return total


# ---------------------------------------------------------------- feasible sampling


def sample_feasible(lower, upper, rng) -> np.ndarray:
    """Draw a random member of the credal set, feasible by construction.

    Classes are visited in random order; each coordinate is drawn uniformly
    from its conditional range given the remaining budget and what the still
    unvisited coordinates can absorb.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    c = lower.shape[0]
    perm = rng.permutation(c)
    lo_p, up_p = lower[perm], upper[perm]
    suffix_lo = np.append(np.cumsum(lo_p[::-1])[::-1], 0.0)[1:]
    suffix_up = np.append(np.cumsum(up_p[::-1])[::-1], 0.0)[1:]
    out = np.zeros(c)
    remaining = 1.0
    for k in range(c - 1):
        lo_k = max(lo_p[k], remaining - suffix_up[k])
        up_k = min(up_p[k], remaining - suffix_lo[k])
        up_k = max(up_k, lo_k)
        out[k] = rng.uniform(lo_k, up_k)
        remaining -= out[k]
    out[c - 1] = min(max(remaining, lo_p[c - 1]), up_p[c - 1])
    result = np.zeros(c)
    result[perm] = out
    return result
