"""Distribution evolution over module orientations.

A probability matrix has shape ``(4, n)``; column ``j`` holds non-negative
amplitudes whose squares are the sampling probabilities of the four
orientation codes of module ``j``. A population is stacked as ``(np, 4, n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

N_CODES = 4


@dataclass(frozen=True)
class DeaParams:
    np: int = 5
    alpha0: float = 0.2
    lambda_d: float = 0.5
    p0: float = 0.85
    r_inherit: float = 0.5
    dtheta_max: float = math.pi / 18

    def __post_init__(self) -> None:
        if self.np < 1:
            raise ValueError("population size must be >= 1")
        if not 0 < self.alpha0 < 1:
            raise ValueError("alpha0 must lie in (0, 1)")
        if not 0 < self.lambda_d < 1:
            raise ValueError("lambda_d must lie in (0, 1)")
        if not 0 <= self.p0 <= 1:
            raise ValueError("p0 must lie in [0, 1]")
        if not 0 < self.r_inherit <= 1:
            raise ValueError("r_inherit must lie in (0, 1]")
        if not 0 <= self.dtheta_max <= math.pi:
            raise ValueError("dtheta_max must lie in [0, pi]")


def member_rng(seed: int, generation: int, member: int, stream: int = 0) -> np.random.Generator:
    """Independent stream per (seed, generation, member, purpose)."""
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, generation, member, stream])


def normalize_columns(q: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.sum(q * q, axis=-2, keepdims=True))
    return q / norms


def init_distribution(n: int, np_: int) -> np.ndarray:
    if n < 1 or np_ < 1:
        raise ValueError("n and np must be >= 1")
    return np.full((np_, N_CODES, n), 0.5)


def sample_column(column: np.ndarray, rng: np.random.Generator) -> int:
    p = np.asarray(column, float) ** 2
    return int(rng.choice(N_CODES, p=p / p.sum()))


def sample_matrix(q: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One code per column of a ``(4, n)`` matrix, code l with probability q[l]**2."""
    p = q * q
    cdf = np.cumsum(p / p.sum(axis=0, keepdims=True), axis=0)
    u = rng.random(q.shape[1])
    codes = np.sum(u[None, :] >= cdf[:-1], axis=0)
    return codes.astype(np.int8)


def random_orthogonal(rng: np.random.Generator, size: int = N_CODES) -> np.ndarray:
    """Haar-distributed rotation: QR of a Gaussian matrix, sign-fixed, det +1."""
    z = rng.standard_normal((size, size))
    qm, rm = np.linalg.qr(z)
    qm = qm * np.sign(np.diag(rm))
    if np.linalg.det(qm) < 0:
        qm[:, 0] = -qm[:, 0]
    return qm


def exploration_counts(np_: int, n: int) -> tuple[int, int]:
    """Inclusive upper bounds for the number of members ``m`` and columns ``c``."""
    return np_ // 2, max(1, n // 10)


def orth_exp_q(Q: np.ndarray, fitness, rng: np.random.Generator) -> np.ndarray:
    """Rotate ``c`` random columns of the ``m`` worst members by random orthogonal maps.

    ``fitness`` is lower-is-better, one value per member; ties rank by member
    index. The best member is never touched (with ``np == 1`` nothing is).
    """
    Q = np.array(Q, dtype=float, copy=True)
    np_, _, n = Q.shape
    m_hi, c_hi = exploration_counts(np_, n)
    if m_hi < 1:
        return Q
    m = int(rng.integers(1, m_hi + 1))
    order = sorted(range(np_), key=lambda i: (fitness[i], i))
    for i in order[np_ - m :]:
        c = int(rng.integers(1, c_hi + 1))
        cols = rng.choice(n, size=c, replace=False)
        for j in cols:
            col = random_orthogonal(rng) @ Q[i, :, j]
            col = np.abs(col)
            Q[i, :, j] = col / np.linalg.norm(col)
    return Q


def sample_p(Q: np.ndarray, P: np.ndarray, rate: float, rngs) -> np.ndarray:
    """Resample each position with probability ``rate``, else inherit the incumbent code."""
    out = np.array(P, dtype=np.int8, copy=True)
    for i, rng in enumerate(rngs):
        fresh = sample_matrix(Q[i], rng)
        pick = rng.random(out.shape[1]) <= rate
        out[i] = np.where(pick, fresh, out[i])
    return out


def exploit_column(col: np.ndarray, code: int, alpha0: float) -> np.ndarray:
    """Shift probability mass toward ``code``; preserves a unit column norm."""
    sq = (1.0 - alpha0) * col * col
    sq[code] += alpha0
    return np.sqrt(sq)


def rotate_pair(col: np.ndarray, l1: int, l2: int, theta: float) -> np.ndarray:
    """Planar rotation acting on rows (l1, l2); a no-op when they coincide."""
    out = col.copy()
    if l1 == l2:
        return out
    c, s = math.cos(theta), math.sin(theta)
    a, b = col[l1], col[l2]
    out[l1] = c * a - s * b
    out[l2] = s * a + c * b
    return np.abs(out)


def disturb_squares(col: np.ndarray, code: int, lambda_d: float) -> np.ndarray:
    """New *squared* entries after damping ``code``; they sum to 1 for a unit column."""
    sq = col * col
    denom = 1.0 - (1.0 - lambda_d) * sq[code]
    out = sq / denom
    out[code] = lambda_d * sq[code] / denom
    return out


def disturb_column(col: np.ndarray, code: int, lambda_d: float) -> np.ndarray:
    return np.sqrt(disturb_squares(col, code, lambda_d))


def refine_q(P_new: np.ndarray, P: np.ndarray, Q: np.ndarray, params: DeaParams, rngs) -> np.ndarray:
    """Per member and column: exploitation with probability ``p0``, else disturbance.

    ``P_new`` holds the sampled orientations of this generation and ``P`` the
    retained ones; exploitation pulls toward ``P`` and rotates between the
    two codes.
    """
    Q = np.array(Q, dtype=float, copy=True)
    np_, _, n = Q.shape
    for i, rng in enumerate(rngs):
        rnd = rng.random(n)
        thetas = rng.uniform(-params.dtheta_max, params.dtheta_max, size=n)
        for j in range(n):
            col = Q[i, :, j]
            keep = int(P[i, j])
            if rnd[j] <= params.p0:
                col = exploit_column(col, keep, params.alpha0)
                col = rotate_pair(col, int(P_new[i, j]), keep, thetas[j])
            else:
                col = disturb_column(col, keep, params.lambda_d)
            Q[i, :, j] = col / np.linalg.norm(col)
    return Q
