"""Conjugate sub-gradient minimizer with a geometrically decaying step control."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Oracle = Callable[[np.ndarray], tuple[float, np.ndarray]]


class CsaError(RuntimeError):
    pass


@dataclass(frozen=True)
class CsaConfig:
    k_max: int = 50
    s0: float = 1.0
    q: float = 0.997
    stall_limit: int = 30
    min_improvement: float = 1e-12
    target: float = -math.inf

    def __post_init__(self) -> None:
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not self.s0 > 0:
            raise ValueError("s0 must be > 0")
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        if self.stall_limit < 1:
            raise ValueError("stall_limit must be >= 1")


@dataclass
class CsaTrace:
    best_point: np.ndarray
    best_value: float
    initial_value: float
    iterations: int
    values: list[float] = field(default_factory=list)
    best_values: list[float] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)


def polak_ribiere(g: np.ndarray, g_prev: np.ndarray) -> float:
    """Conjugacy weight; 0 (a steepest-descent restart) when ``g_prev`` vanishes."""
    denom = float(np.dot(g_prev, g_prev))
    if denom == 0.0:
        return 0.0
    return float(np.dot(g, g - g_prev)) / denom


def _checked(value: float, k: int) -> float:
    if not math.isfinite(value):
        raise CsaError(f"objective returned non-finite value {value!r} at iteration {k}")
    return value


def csa_minimize(oracle: Oracle, u0, config: CsaConfig, record: bool = False) -> CsaTrace:
    """Minimize a (possibly non-smooth) function from ``u0``.

    Each iteration moves a distance of exactly ``s0 * q**(k-1)`` along the
    conjugate direction ``d_k = -g_k + eta_k d_{k-1}``. The best point seen is
    returned; the iterate itself is not monotone. Stops after ``k_max``
    iterations or ``stall_limit`` consecutive iterations without improving the
    best value by more than ``min_improvement``, or once the best value reaches
    ``target`` (a known lower bound, such as 0 for a sum of penalties).
    """
    u = np.array(u0, dtype=float, copy=True)
    if not np.all(np.isfinite(u)):
        raise CsaError("initial point is not finite")
    value, g = oracle(u)
    value = _checked(value, 0)
    trace = CsaTrace(best_point=u.copy(), best_value=value, initial_value=value, iterations=0)
    if record:
        trace.values.append(value)
        trace.best_values.append(value)
    if value <= config.target:
        return trace

    g_prev = g
    d = np.zeros_like(u)
    stall = 0
    for k in range(1, config.k_max + 1):
        s = config.s0 * config.q ** (k - 1)
        eta = polak_ribiere(g, g_prev)
        d = -g + eta * d
        norm = float(np.linalg.norm(d))
        if norm > 0.0:
            u = u + (s / norm) * d
        g_prev = g
        value, g = oracle(u)
        value = _checked(value, k)
        trace.iterations = k
        if value < trace.best_value - config.min_improvement:
            trace.best_value = value
            trace.best_point = u.copy()
            stall = 0
        else:
            stall += 1
        if record:
            trace.values.append(value)
            trace.best_values.append(trace.best_value)
            trace.steps.append(s)
        if stall >= config.stall_limit or trace.best_value <= config.target:
            break
    return trace
