"""Unit-norm beamformer construction.

Two families: per-cluster regularized zero-forcing, and the closed-form
leakage-minimizing solution whose direction is the dominant generalized
eigenvector of the signal/leakage pencil.  Both produce columns normalized
to unit 2-norm; transmit power is applied separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .channel import ChannelRealization

UserId = tuple[int, int]  # (cluster, local user index)


@dataclass
class BeamformerSet:
    """Beamformers per (gateway, served user), plus the serving bookkeeping.

    vectors[(c, (g, l))] -- unit-norm length-K vector gateway c uses for
                            user l of cluster g
    served[c]            -- ordered list of user ids gateway c transmits to
    leakage[c]           -- user ids outside cluster c whose channels
                            gateway c knows and suppresses leakage toward
    """

    vectors: dict[tuple[int, UserId], np.ndarray] = field(default_factory=dict)
    served: dict[int, list[UserId]] = field(default_factory=dict)
    leakage: dict[int, list[UserId]] = field(default_factory=dict)

    def max_norm_error(self) -> float:
        if not self.vectors:
            return 0.0
        return max(abs(np.linalg.norm(w) - 1.0) for w in self.vectors.values())


def rzf_precoder(H: np.ndarray, beta: float) -> np.ndarray:
    """Regularized zero-forcing columns for the row-channel matrix H.

    H is (K, N) with row k the conjugate transpose of user k's channel;
    returns the K unit-norm columns of (H^H H + beta I)^-1 H^H.  beta = 0
    requires full-rank H and raises LinAlgError otherwise.
    """
    H = np.asarray(H, dtype=complex)
    if not np.all(np.isfinite(H)):
        raise ValueError("channel matrix must be finite")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    k, n = H.shape
    if beta == 0 and np.linalg.matrix_rank(H) < k:
        raise np.linalg.LinAlgError("rank-deficient channel with beta = 0")
    gram = H.conj().T @ H + beta * np.eye(n)
    cols = np.linalg.solve(gram, H.conj().T)
    norms = np.linalg.norm(cols, axis=0)
    if np.any(norms == 0):
        raise np.linalg.LinAlgError("degenerate precoder column")
    return cols / norms


def optimal_beta(n0: float, bandwidth: float, k_users: int, p_total: float) -> float:
    """Large-system regularizer N0*W*K / P_T."""
    if min(n0, bandwidth, k_users) <= 0:
        raise ValueError("n0, bandwidth and k_users must be positive")
    if p_total <= 0:
        raise ValueError("total power must be positive")
    return n0 * bandwidth * k_users / p_total


def slnr_beamformer(h_target: np.ndarray, intra_leakage, inter_leakage,
                    noise_power: float) -> np.ndarray:
    """Closed-form maximizer of signal over leakage-plus-noise.

    Returns M^-1 h / ||M^-1 h|| with
    M = sum_intra h h^H + sum_inter h h^H + noise_power * I, which is the
    dominant generalized eigenvector of (h h^H, M); M is positive definite
    for any noise_power > 0 so no rank condition is needed.
    """
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    h = np.asarray(h_target, dtype=complex)
    m = noise_power * np.eye(h.shape[0], dtype=complex)
    for vec in list(intra_leakage) + list(inter_leakage):
        v = np.asarray(vec, dtype=complex)
        m += np.outer(v, v.conj())
    w = scipy.linalg.solve(m, h, assume_a="pos")
    return w / np.linalg.norm(w)


def slnr_value(w: np.ndarray, h_target: np.ndarray, leakage, noise_power: float) -> float:
    """Signal-to-leakage-and-noise ratio of a candidate unit vector."""
    w = np.asarray(w, dtype=complex)
    num = abs(np.vdot(w, h_target)) ** 2
    den = noise_power * float(np.vdot(w, w).real)
    for vec in leakage:
        den += abs(np.vdot(w, vec)) ** 2
    return num / den


def select_edge_users(channels: ChannelRealization, gw: int, neighbours,
                      m_per_neighbour: int) -> list[UserId]:
    """Strongest-channel users of each neighbouring cluster, as seen by gw.

    For each neighbour cluster b, picks the m users j with the largest
    ||h_{gw,b,j}||^2; ties break toward the lowest user index.  Neighbours
    are visited in sorted order so the result is deterministic.
    """
    k = channels.k_per_cluster
    if m_per_neighbour < 0:
        raise ValueError("m_per_neighbour must be nonnegative")
    if m_per_neighbour > k:
        raise ValueError(f"m_per_neighbour={m_per_neighbour} exceeds the "
                         f"{k} users of a cluster")
    selected: list[UserId] = []
    row = slice(gw * k, (gw + 1) * k)
    for b in sorted(neighbours):
        block = channels.gains[row, b * k:(b + 1) * k]
        norms = np.sum(np.abs(block) ** 2, axis=0)
        order = np.lexsort((np.arange(k), -norms))
        selected.extend((b, int(j)) for j in order[:m_per_neighbour])
    return selected
