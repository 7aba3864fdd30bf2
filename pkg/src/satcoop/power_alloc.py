"""Sum-rate power allocation under a per-gateway sum-power budget.

Projected gradient ascent on {p >= 0, sum(p) <= P_T} with Armijo
backtracking, so the objective is nondecreasing at every accepted step.
A batched code path solves the 19 per-gateway problems of one trial in
lockstep; the public single-table entry point wraps batch size 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_LN2 = math.log(2.0)
_ARMIJO = 1e-4
_MAX_HALVINGS = 60


@dataclass(frozen=True)
class EffectiveGainTable:
    """Post-beamforming power gains a gateway's solver sees.

    gains[j, l] = |w_j^H h_l|^2 (stream j into user l), noise_w = W*N0 per
    user, p_total the gateway budget.  Only in-set interference appears
    here; out-of-set interference is accounted for at evaluation time.
    """

    gains: np.ndarray
    noise_w: float
    p_total: float

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("gain table must be square (streams x users)")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("gains must be finite and nonnegative")
        if self.noise_w <= 0:
            raise ValueError("noise power must be positive")
        if self.p_total <= 0:
            raise ValueError("total power must be positive")
        object.__setattr__(self, "gains", g)


@dataclass
class PowerVector:
    """Solver output: powers plus convergence bookkeeping."""

    p: np.ndarray
    converged: bool
    iterations: int
    objective_history: np.ndarray | None = None
    iterate_history: np.ndarray | None = None


def _objective(gains, noise, p):
    """Sum log2(1 + SINR_k) for stacked tables; gains (..., K, K), p (..., K)."""
    received = np.einsum("...jl,...j->...l", gains, p)
    diag = np.diagonal(gains, axis1=-2, axis2=-1)
    signal = p * diag
    interference = received - signal
    return np.log2(1.0 + signal / (interference + noise)).sum(axis=-1)


def _gradient(gains, noise, p):
    diag = np.diagonal(gains, axis1=-2, axis2=-1)
    received = np.einsum("...jl,...j->...l", gains, p)
    interf = received - p * diag + noise
    total = interf + p * diag
    delta = 1.0 / total - 1.0 / interf
    grad = diag / total + np.einsum("...jl,...l->...j", gains, delta) - diag * delta
    return grad / _LN2


def project_power(v: np.ndarray, p_total: float) -> np.ndarray:
    """Euclidean projection of stacked vectors onto {p >= 0, sum(p) <= P_T}."""
    v = np.asarray(v, dtype=float)
    clipped = np.maximum(v, 0.0)
    over = clipped.sum(axis=-1) > p_total
    if not np.any(over):
        return clipped
    # Over-budget rows coincide with the projection onto the equality simplex.
    u = np.sort(v, axis=-1)[..., ::-1]
    css = np.cumsum(u, axis=-1) - p_total
    ranks = np.arange(1, v.shape[-1] + 1, dtype=float)
    rho = np.count_nonzero(u * ranks > css, axis=-1)
    theta = np.take_along_axis(css, rho[..., None] - 1, axis=-1)[..., 0] / rho
    simplex = np.maximum(v - theta[..., None], 0.0)
    return np.where(over[..., None], simplex, clipped)


def _ascend(gains: np.ndarray, noise_w: float, p_total: float, p0: np.ndarray,
            tol: float, max_iters: int, record_history: bool):
    """Projected gradient ascent from the given starting points.

    gains is (B, K, K), p0 (B, K).  Returns (p, f, converged, iterations,
    objective history (iters+1, B), iterate snapshots or None).  Each
    accepted step satisfies an Armijo condition, so every element's
    objective history is nondecreasing.
    """
    n_batch, k, _ = gains.shape
    p = p0.copy()
    f = _objective(gains, noise_w, p)
    obj_history = [f.copy()]
    iter_history = [p.copy()] if record_history else None

    step = np.full(n_batch, np.nan)
    active = np.ones(n_batch, dtype=bool)
    converged = np.zeros(n_batch, dtype=bool)
    iterations = np.zeros(n_batch, dtype=int)
    last_rel = np.zeros(n_batch)

    for it in range(1, max_iters + 1):
        if not active.any():
            break
        grad = _gradient(gains, noise_w, p)
        if np.isnan(step).any():
            scale = np.maximum(np.abs(grad).max(axis=-1), 1e-300)
            step = np.where(np.isnan(step), p_total / scale, step)

        t = step.copy()
        cand_p = p.copy()
        cand_f = f.copy()
        improved = np.zeros(n_batch, dtype=bool)
        undecided = active.copy()
        for _ in range(_MAX_HALVINGS):
            if not undecided.any():
                break
            idx = np.flatnonzero(undecided)
            q = project_power(p[idx] + t[idx, None] * grad[idx], p_total)
            fq = _objective(gains[idx], noise_w, q)
            ascent = np.einsum("ij,ij->i", grad[idx], q - p[idx])
            ok = (ascent > 0) & (fq >= f[idx] + _ARMIJO * ascent)
            stationary = ascent <= 0
            acc = idx[ok]
            cand_p[acc] = q[ok]
            cand_f[acc] = fq[ok]
            improved[acc] = True
            undecided[idx[ok | stationary]] = False
            shrink = idx[~(ok | stationary)]
            t[shrink] *= 0.5
        # anything still undecided after all halvings is numerically stationary

        iterations[active] = it
        rel = np.zeros(n_batch)
        rel[improved] = (cand_f[improved] - f[improved]) / np.maximum(
            np.abs(f[improved]), 1e-300)
        last_rel[improved] = rel[improved]

        stalled = active & ~improved
        done = stalled | (improved & (rel < tol))
        converged |= done
        active &= ~done

        p = cand_p
        f = cand_f
        step[improved] = 2.0 * t[improved]
        obj_history.append(f.copy())
        if record_history:
            iter_history.append(p.copy())

    # elements that ran out of iterations: flag only a clearly unsettled run
    converged |= last_rel <= 100.0 * tol
    return p, f, converged, iterations, np.array(obj_history), iter_history


def allocate_sumrate_batch(gains: np.ndarray, noise_w: float, p_total: float,
                           tol: float = 1e-6, max_iters: int = 500,
                           record_history: bool = False):
    """Solve a stack of allocation problems sharing noise and budget.

    gains is (B, K, K).  Starts from the uniform split; if any all-power
    corner of the simplex then scores above the stationary point found, the
    ascent restarts from that corner (the landscape is multimodal when
    cross-gains are strong) and the best result per element is kept.
    Returns (p, converged, iterations, history, snapshots) where history is
    the winning run's per-iteration objective array (iters+1, B).
    """
    gains = np.asarray(gains, dtype=float)
    n_batch, k, _ = gains.shape
    uniform = np.full((n_batch, k), p_total / k)
    p, f, converged, iterations, obj_history, iter_history = _ascend(
        gains, noise_w, p_total, uniform, tol, max_iters, record_history)
    if record_history:
        iter_history = np.array(iter_history)   # (rows, B, K)

    # restart candidates: full power on one stream, or split over a pair
    candidates = [np.eye(k)[j] for j in range(k)]
    candidates += [0.5 * (np.eye(k)[i] + np.eye(k)[j])
                   for i in range(k) for j in range(i + 1, k)]
    candidates = p_total * np.array(candidates)             # (C, K)

    for _ in range(len(candidates)):
        cand_f = np.stack(
            [_objective(gains, noise_w, np.broadcast_to(c, (n_batch, k)))
             for c in candidates], axis=1)                  # (B, C)
        margin = 1e-12 * np.maximum(1.0, np.abs(f))
        retry = cand_f.max(axis=1) > f + margin
        if not retry.any():
            break
        idx = np.flatnonzero(retry)
        starts = candidates[cand_f[idx].argmax(axis=1)]
        p2, f2, conv2, it2, hist2, snaps2 = _ascend(
            gains[idx], noise_w, p_total, starts, tol, max_iters,
            record_history)
        better = f2 > f[idx]
        if not better.any():
            break
        win = idx[better]
        sub = np.flatnonzero(better)
        p[win] = p2[sub]
        f[win] = f2[sub]
        converged[win] = conv2[sub]
        iterations[win] = it2[sub]
        # the reported record becomes the winning run's own (monotone) history,
        # padded at the tail with its final value
        obj_history = _splice(obj_history, hist2, win, sub)
        if record_history:
            iter_history = _splice(iter_history, np.array(snaps2), win, sub)
    if record_history:
        iter_history = list(iter_history)
    return p, converged, iterations, obj_history, iter_history


def _splice(base: np.ndarray, update: np.ndarray, cols, sub) -> np.ndarray:
    rows = max(base.shape[0], update.shape[0])
    merged = np.concatenate(
        [base] + [base[-1:]] * (rows - base.shape[0]), axis=0)
    for j, b in zip(sub, cols):
        merged[:update.shape[0], b] = update[:, j]
        merged[update.shape[0]:, b] = update[-1, j]
    return merged


def allocate_sumrate(gains: EffectiveGainTable, p_total: float | None = None,
                     tol: float = 1e-6, max_iters: int = 500,
                     record_history: bool = False) -> PowerVector:
    """Sum-rate power allocation for one gain table.

    Starts from the uniform split, ascends with projected gradients, and
    stops when the relative objective change drops below tol.  The result
    is always returned; converged=False marks a run that hit max_iters
    while still moving by more than 100*tol per iteration.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    budget = gains.p_total if p_total is None else float(p_total)
    if budget <= 0:
        raise ValueError("total power must be positive")
    p, conv, iters, obj, snaps = allocate_sumrate_batch(
        gains.gains[None, :, :], gains.noise_w, budget,
        tol=tol, max_iters=max_iters, record_history=record_history)
    return PowerVector(
        p=p[0],
        converged=bool(conv[0]),
        iterations=int(iters[0]),
        objective_history=obj[:, 0],
        iterate_history=None if snaps is None else np.array([s[0] for s in snaps]),
    )


def sum_rate_objective(gains: EffectiveGainTable, p) -> float:
    """Sum over streams of log2(1 + in-set SINR) in bits/s/Hz."""
    vec = p.p if isinstance(p, PowerVector) else np.asarray(p, dtype=float)
    if np.any(vec < 0) or vec.sum() > gains.p_total * (1.0 + 1e-9):
        raise ValueError("power vector is infeasible")
    return float(_objective(gains.gains, gains.noise_w, vec))


def per_stream_rates(gains: EffectiveGainTable, p) -> np.ndarray:
    """log2(1 + SINR_k) per stream under the table's in-set interference."""
    vec = p.p if isinstance(p, PowerVector) else np.asarray(p, dtype=float)
    g = gains.gains
    received = g.T @ vec
    diag = np.diagonal(g)
    signal = vec * diag
    return np.log2(1.0 + signal / (received - signal + gains.noise_w))
