"""Constraint-graph legalization: build left-of / below relations, then pack toward the origin."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Floorplan, ProblemInstance, effective_dim_arrays


@dataclass(frozen=True)
class RelationSets:
    """``left[i]`` are the modules left of ``i``; ``below[i]`` the modules below it."""

    left: tuple[frozenset[int], ...]
    below: tuple[frozenset[int], ...]

    @property
    def x_edges(self) -> set[tuple[int, int]]:
        return {(a, b) for b, preds in enumerate(self.left) for a in preds}

    @property
    def y_edges(self) -> set[tuple[int, int]]:
        return {(a, b) for b, preds in enumerate(self.below) for a in preds}


def _tolerance(xl, yl, w, h) -> float:
    return 1e-9 * max(1.0, float(np.max(np.abs(xl)) + np.max(w)), float(np.max(np.abs(yl)) + np.max(h)))


def _relation_edges(xl, yl, w, h):
    """Directed (first, second) pairs on each axis for all i < j."""
    n = xl.size
    i, j = np.triu_indices(n, k=1)
    tol = _tolerance(xl, yl, w, h)
    ox = np.minimum(xl[i] + w[i], xl[j] + w[j]) - np.maximum(xl[i], xl[j])
    oy = np.minimum(yl[i] + h[i], yl[j] + h[j]) - np.maximum(yl[i], yl[j])
    over_x, over_y = ox > tol, oy > tol

    # axis order: by lower-left coordinate, then id (i < j here)
    i_first_x = xl[i] <= xl[j]
    i_first_y = yl[i] <= yl[j]

    use_x = over_y & ~over_x
    use_y = over_x & ~over_y

    both = over_x & over_y
    if both.any():
        ax, bx = np.where(i_first_x, i, j), np.where(i_first_x, j, i)
        ay, by = np.where(i_first_y, i, j), np.where(i_first_y, j, i)
        push_x = xl[ax] + w[ax] - xl[bx]
        push_y = yl[ay] + h[ay] - yl[by]
        pick_x = push_x <= push_y
        use_x |= both & pick_x
        use_y |= both & ~pick_x

    neither = ~over_x & ~over_y
    if neither.any():
        cx, cy = xl + w / 2, yl + h / 2
        half_w, half_h = (w[i] + w[j]) / 2, (h[i] + h[j]) / 2
        gap_x = np.abs(cx[i] - cx[j]) - half_w
        gap_y = np.abs(cy[i] - cy[j]) - half_h
        ratio_x = np.abs(cx[i] - cx[j]) / half_w
        ratio_y = np.abs(cy[i] - cy[j]) / half_h
        corner = (np.abs(gap_x) <= tol) & (np.abs(gap_y) <= tol)
        pick_x = ratio_x <= ratio_y
        use_x |= neither & (pick_x | corner)
        use_y |= neither & (~pick_x | corner)

    x_src = np.where(i_first_x, i, j)[use_x]
    x_dst = np.where(i_first_x, j, i)[use_x]
    y_src = np.where(i_first_y, i, j)[use_y]
    y_dst = np.where(i_first_y, j, i)[use_y]
    return (x_src, x_dst), (y_src, y_dst)


def _as_sets(n, src, dst) -> tuple[frozenset[int], ...]:
    preds: list[set[int]] = [set() for _ in range(n)]
    for a, b in zip(src.tolist(), dst.tolist()):
        preds[b].add(a)
    return tuple(frozenset(p) for p in preds)


def build_relations(instance: ProblemInstance, plan: Floorplan) -> RelationSets:
    """Left-of / below relations from lower-left corners.

    Pairs overlapping on exactly one axis are related on the other axis.
    Pairs overlapping on both axes go on the axis needing the smaller push to
    separate; pairs overlapping on neither go on the tighter axis (smaller
    center-distance-to-extent ratio), or on both axes when they touch at a
    corner. Keeping touching contacts makes a packed plan a fixed point.
    Every relation is oriented by (lower-left coordinate, id), so both
    graphs are acyclic.
    """
    w, h = effective_dim_arrays(instance, plan.r)
    xl, yl = plan.x - w / 2, plan.y - h / 2
    (xs, xd), (ys, yd) = _relation_edges(xl, yl, w, h)
    return RelationSets(left=_as_sets(plan.n, xs, xd), below=_as_sets(plan.n, ys, yd))


def _longest_path(n, preds: list[list[int]], key, size) -> np.ndarray:
    order = sorted(range(n), key=lambda k: (key[k], k))
    pos = np.zeros(n)
    for v in order:
        if preds[v]:
            pos[v] = max(pos[a] + size[a] for a in preds[v])
    return pos


def _pred_lists(n, src, dst) -> list[list[int]]:
    preds: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(src.tolist(), dst.tolist()):
        preds[b].append(a)
    return preds


def legalize_graph(instance: ProblemInstance, plan: Floorplan) -> Floorplan:
    """Remove all overlaps by packing toward the origin along the relation graphs.

    Modules are visited in ascending lower-left x (then id) and placed right
    of their left-set; then likewise in y. Unconstrained modules land at 0.
    """
    w, h = effective_dim_arrays(instance, plan.r)
    xl, yl = plan.x - w / 2, plan.y - h / 2
    (xs, xd), (ys, yd) = _relation_edges(xl, yl, w, h)
    nx = _longest_path(plan.n, _pred_lists(plan.n, xs, xd), xl, w)
    ny = _longest_path(plan.n, _pred_lists(plan.n, ys, yd), yl, h)
    return Floorplan(nx + w / 2, ny + h / 2, plan.r)
