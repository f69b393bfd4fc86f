"""Brute-force geometric checks on placed rectangles."""

from __future__ import annotations

import numpy as np

from .model import Floorplan, OutlineSpec, ProblemInstance, effective_dim_arrays


def default_tolerance(instance: ProblemInstance, plan: Floorplan) -> float:
    w, h = effective_dim_arrays(instance, plan.r)
    scale = max(
        1.0,
        float(np.max(np.abs(plan.x)) + np.max(w)),
        float(np.max(np.abs(plan.y)) + np.max(h)),
    )
    return 1e-9 * scale


def pairwise_intersections(instance: ProblemInstance, plan: Floorplan) -> tuple[np.ndarray, np.ndarray]:
    """Geometric intersection lengths (x, y) for every pair i < j, shape (n, n) upper triangle."""
    w, h = effective_dim_arrays(instance, plan.r)
    x0, x1 = plan.x - w / 2, plan.x + w / 2
    y0, y1 = plan.y - h / 2, plan.y + h / 2
    ix = np.minimum(x1[:, None], x1[None, :]) - np.maximum(x0[:, None], x0[None, :])
    iy = np.minimum(y1[:, None], y1[None, :]) - np.maximum(y0[:, None], y0[None, :])
    mask = np.triu(np.ones((plan.n, plan.n), dtype=bool), k=1)
    return np.where(mask, np.maximum(ix, 0.0), 0.0), np.where(mask, np.maximum(iy, 0.0), 0.0)


def overlapping_pairs(instance: ProblemInstance, plan: Floorplan, tol: float | None = None) -> list[tuple[int, int]]:
    tol = default_tolerance(instance, plan) if tol is None else tol
    ix, iy = pairwise_intersections(instance, plan)
    i, j = np.nonzero((ix > tol) & (iy > tol))
    return list(zip(i.tolist(), j.tolist()))


def outline_violations(
    instance: ProblemInstance, plan: Floorplan, outline: OutlineSpec, tol: float | None = None
) -> list[int]:
    tol = default_tolerance(instance, plan) if tol is None else tol
    w, h = effective_dim_arrays(instance, plan.r)
    bad = (
        (plan.x - w / 2 < -tol)
        | (plan.x + w / 2 > outline.width + tol)
        | (plan.y - h / 2 < -tol)
        | (plan.y + h / 2 > outline.height + tol)
    )
    return np.nonzero(bad)[0].tolist()


def is_legal(instance: ProblemInstance, plan: Floorplan, outline: OutlineSpec | None, tol: float | None = None) -> bool:
    if overlapping_pairs(instance, plan, tol):
        return False
    return outline is None or not outline_violations(instance, plan, outline, tol)
