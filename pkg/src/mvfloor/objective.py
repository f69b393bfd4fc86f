"""Wirelength, overlap and outline terms, the penalized objectives and their subgradients.

All evaluations treat the orientation vector as fixed. :class:`Evaluator`
binds an instance, an orientation vector and an outline once and then serves
``(value, subgradient)`` pairs over the stacked coordinate vector
``u = [x, y]``, which is the oracle shape :func:`mvfloor.csa.csa_minimize`
expects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .model import (
    Floorplan,
    OutlineSpec,
    ProblemInstance,
    effective_dim_arrays,
)


@dataclass(frozen=True)
class PenaltyWeights:
    alpha: float = 1.0
    lam: float = 20.0
    mu: float = 100.0
    lam0: float = 1.0
    mu0: float = 10.0

    def __post_init__(self) -> None:
        for name in ("alpha", "lam", "mu", "lam0", "mu0"):
            if getattr(self, name) < 0:
                raise ValueError(f"penalty weight {name} must be >= 0")


@dataclass(frozen=True)
class ObjectiveBreakdown:
    wirelength: float
    overlap: float
    boundary: float
    boundary_smooth: float
    f: float
    f_tilde: float


def overlap_x(wi, wj, dx):
    """Piecewise overlap length along one axis for center distance ``dx``.

    The containment branch returns ``max(wi, wj)``, verbatim from the model
    (it is not the geometric overlap ``min(wi, wj)``).
    """
    wi, wj, dx = np.asarray(wi, float), np.asarray(wj, float), np.abs(np.asarray(dx, float))
    half_diff = np.abs(wi - wj) / 2
    half_sum = (wi + wj) / 2
    out = np.where(
        dx <= half_diff,
        np.maximum(wi, wj),
        np.where(dx <= half_sum, half_sum - dx, 0.0),
    )
    return out.item() if out.ndim == 0 else out


overlap_y = overlap_x


def _overlap_slope(wi, wj, delta):
    """d overlap / d (coordinate of i), with ``delta = c_i - c_j``.

    Containment interior and separated pairs have slope 0; the middle branch
    and both of its boundary points use ``-sign(delta)``.
    """
    d = np.abs(delta)
    half_diff = np.abs(wi - wj) / 2
    half_sum = (wi + wj) / 2
    middle = (d >= half_diff) & (d <= half_sum)
    return np.where(middle, -np.sign(delta), 0.0)


@lru_cache(maxsize=32)
def _pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=1)
    i.flags.writeable = False
    j.flags.writeable = False
    return i, j


def _rotate_offsets(ox: np.ndarray, oy: np.ndarray, r: np.ndarray):
    # one clockwise quarter turn maps (a, b) -> (b, -a)
    for _ in range(3):
        turn = r > 0
        if not turn.any():
            break
        ox, oy = np.where(turn, oy, ox), np.where(turn, -ox, oy)
        r = r - turn
    return ox, oy


class NetTable:
    """Padded pin matrix over the combined [modules, pads] coordinate space.

    Within each net, pad pins come first and module pins follow by ascending
    id, so a first-occurrence argmax/argmin lets pads absorb ties and
    otherwise picks the lowest module id.
    """

    def __init__(self, instance: ProblemInstance):
        n = instance.n
        nets = instance.nets
        self.n = n
        self.m = len(nets)
        degree = max((len(e.pins) for e in nets), default=0)
        self.index = np.zeros((self.m, max(degree, 1)), dtype=np.intp)
        self.valid = np.zeros((self.m, max(degree, 1)), dtype=bool)
        self.pct = np.zeros((self.m, max(degree, 1), 2))
        for e, net in enumerate(nets):
            ordered = sorted(net.pins, key=lambda p: (not p.is_pad, p.ref))
            for k, pin in enumerate(ordered):
                self.index[e, k] = n + pin.ref if pin.is_pad else pin.ref
                self.valid[e, k] = True
                if not pin.is_pad:
                    self.pct[e, k] = pin.offset
        self.has_offsets = bool(np.any(self.pct))
        # compressed (CSR) layout of the same pins for the compiled kernels
        self.ptr = np.concatenate([[0], np.cumsum(self.valid.sum(axis=1))]).astype(np.int64)
        self.flat_pin = self.index[self.valid].astype(np.int64)
        self.pad_xy = instance.pad_xy
        self._w = instance.widths
        self._h = instance.heights

    def pin_offsets(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if not self.has_offsets:
            return np.zeros(self.index.shape), np.zeros(self.index.shape)
        idx = np.minimum(self.index, self.n - 1)
        is_module = self.index < self.n
        ox = self.pct[..., 0] / 100.0 * self._w[idx] / 2
        oy = self.pct[..., 1] / 100.0 * self._h[idx] / 2
        rr = np.where(is_module, np.asarray(r)[idx], 0).astype(int)
        ox, oy = _rotate_offsets(ox, oy, rr)
        keep = is_module & self.valid
        return np.where(keep, ox, 0.0), np.where(keep, oy, 0.0)

    def _axis(self, coords: np.ndarray, offsets: np.ndarray):
        vals = coords[self.index] + offsets
        hi = np.where(self.valid, vals, -np.inf)
        lo = np.where(self.valid, vals, np.inf)
        return hi, lo

    def length(self, x, y, offsets) -> float:
        if self.m == 0:
            return 0.0
        total = 0.0
        for coords, off in ((x, offsets[0]), (y, offsets[1])):
            hi, lo = self._axis(coords, off)
            total += float(np.sum(hi.max(axis=1) - lo.min(axis=1)))
        return total

    def length_and_grad(self, x, y, offsets):
        n = self.n
        if self.m == 0:
            return 0.0, np.zeros(n), np.zeros(n)
        total = 0.0
        grads = []
        rows = np.arange(self.m)
        for coords, off in ((x, offsets[0]), (y, offsets[1])):
            hi, lo = self._axis(coords, off)
            amax = hi.argmax(axis=1)
            amin = lo.argmin(axis=1)
            total += float(np.sum(hi[rows, amax] - lo[rows, amin]))
            top = self.index[rows, amax]
            bot = self.index[rows, amin]
            g = np.bincount(top[top < n], minlength=n).astype(float)
            g -= np.bincount(bot[bot < n], minlength=n)
            grads.append(g)
        return total, grads[0], grads[1]


class Evaluator:
    """Objective oracle for one (instance, orientation, outline) triple."""

    def __init__(
        self,
        instance: ProblemInstance,
        r,
        outline: OutlineSpec | None,
        weights: PenaltyWeights | None = None,
        nets: NetTable | None = None,
    ):
        self.instance = instance
        self.n = instance.n
        self.r = np.asarray(r, dtype=np.int8)
        self.w, self.h = effective_dim_arrays(instance, self.r)
        self.outline = outline
        self.weights = weights or PenaltyWeights()
        self.nets = nets if nets is not None else NetTable(instance)
        self.offsets = self.nets.pin_offsets(self.r)
        valid = self.nets.valid
        self._flat_off = (
            np.ascontiguousarray(self.offsets[0][valid]),
            np.ascontiguousarray(self.offsets[1][valid]),
        )
        self._padx = np.ascontiguousarray(instance.pad_xy[:, 0]) if instance.pad_xy.size else np.zeros(0)
        self._pady = np.ascontiguousarray(instance.pad_xy[:, 1]) if instance.pad_xy.size else np.zeros(0)
        if outline is None:
            self._box = (-1.0, -1.0)
        else:
            self._box = (float(outline.width), float(outline.height))
        self._coords_pad = instance.pad_xy
        self.pi, self.pj = _pairs(self.n)
        self._wsum = (self.w[self.pi] + self.w[self.pj]) / 2
        self._hsum = (self.h[self.pi] + self.h[self.pj]) / 2
        self._wdiff = np.abs(self.w[self.pi] - self.w[self.pj]) / 2
        self._hdiff = np.abs(self.h[self.pi] - self.h[self.pj]) / 2
        self._wmax = np.maximum(self.w[self.pi], self.w[self.pj])
        self._hmax = np.maximum(self.h[self.pi], self.h[self.pj])

    def with_weights(self, weights: PenaltyWeights) -> "Evaluator":
        clone = object.__new__(Evaluator)
        clone.__dict__.update(self.__dict__)
        clone.weights = weights
        return clone

    # -- raw terms ---------------------------------------------------------

    def _full(self, x, y):
        pad = self._coords_pad
        return np.concatenate([x, pad[:, 0]]), np.concatenate([y, pad[:, 1]])

    def wirelength(self, x, y) -> float:
        cx, cy = self._full(x, y)
        return self.nets.length(cx, cy, self.offsets)

    def _pair_overlaps(self, x, y):
        dxs = x[self.pi] - x[self.pj]
        dys = y[self.pi] - y[self.pj]
        dx, dy = np.abs(dxs), np.abs(dys)
        ox = np.where(dx <= self._wdiff, self._wmax, np.where(dx <= self._wsum, self._wsum - dx, 0.0))
        oy = np.where(dy <= self._hdiff, self._hmax, np.where(dy <= self._hsum, self._hsum - dy, 0.0))
        return dxs, dys, dx, dy, ox, oy

    def overlap(self, x, y) -> float:
        if self.n < 2:
            return 0.0
        *_, ox, oy = self._pair_overlaps(x, y)
        return float(np.dot(ox, oy))

    def overlap_and_grad(self, x, y):
        n = self.n
        if n < 2:
            return 0.0, np.zeros(n), np.zeros(n)
        dxs, dys, dx, dy, ox, oy = self._pair_overlaps(x, y)
        value = float(np.dot(ox, oy))
        sx = np.where((dx >= self._wdiff) & (dx <= self._wsum), -np.sign(dxs), 0.0) * oy
        sy = np.where((dy >= self._hdiff) & (dy <= self._hsum), -np.sign(dys), 0.0) * ox
        gx = np.bincount(self.pi, sx, minlength=n) - np.bincount(self.pj, sx, minlength=n)
        gy = np.bincount(self.pi, sy, minlength=n) - np.bincount(self.pj, sy, minlength=n)
        return value, gx, gy

    def hinges(self, x, y) -> np.ndarray:
        """Per-module (b1(x), b2(x), b1(y), b2(y)); zeros without an outline."""
        if self.outline is None:
            return np.zeros((self.n, 4))
        W, H = self.outline.width, self.outline.height
        return np.stack(
            [
                np.maximum(0.0, self.w / 2 - x),
                np.maximum(0.0, self.w / 2 + x - W),
                np.maximum(0.0, self.h / 2 - y),
                np.maximum(0.0, self.h / 2 + y - H),
            ],
            axis=1,
        )

    # -- combined objectives -------------------------------------------------

    def breakdown(self, x, y) -> ObjectiveBreakdown:
        wl = self.wirelength(x, y)
        d = self.overlap(x, y)
        b = self.hinges(x, y)
        bsum, bsq = float(b.sum()), float(np.sum(b * b))
        wt = self.weights
        return ObjectiveBreakdown(
            wirelength=wl,
            overlap=d,
            boundary=bsum,
            boundary_smooth=bsq,
            f=wt.alpha * wl + wt.lam * math.sqrt(d) + wt.mu * bsum,
            f_tilde=wt.lam0 * d + wt.mu0 * bsq,
        )

    def f(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        """Global objective and a subgradient at ``u = [x, y]``."""
        n = self.n
        u = np.ascontiguousarray(u, dtype=float)
        g = np.empty(2 * n)
        wt = self.weights
        value = _kernels.f_eval(
            u[:n], u[n:], self.w, self.h, self._padx, self._pady,
            self.nets.ptr, self.nets.flat_pin, self._flat_off[0], self._flat_off[1],
            self._box[0], self._box[1], wt.alpha, wt.lam, wt.mu, g,
        )
        return float(value), g

    def f_tilde(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        """Legalization objective and its gradient at ``u = [x, y]``."""
        n = self.n
        u = np.ascontiguousarray(u, dtype=float)
        g = np.empty(2 * n)
        wt = self.weights
        value = _kernels.f_tilde_eval(u[:n], u[n:], self.w, self.h, self._box[0], self._box[1], wt.lam0, wt.mu0, g)
        return float(value), g

    def f_reference(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        """Vectorized numpy version of :meth:`f`, kept as a cross-check."""
        n = self.n
        x, y = u[:n], u[n:]
        wt = self.weights
        cx, cy = self._full(x, y)
        wl, gwx, gwy = self.nets.length_and_grad(cx, cy, self.offsets)
        d, gdx, gdy = self.overlap_and_grad(x, y)
        b = self.hinges(x, y)
        value = wt.alpha * wl + wt.lam * math.sqrt(d) + wt.mu * float(b.sum())
        gx = wt.alpha * gwx
        gy = wt.alpha * gwy
        if d > 0:
            scale = wt.lam / (2.0 * math.sqrt(d))
            gx = gx + scale * gdx
            gy = gy + scale * gdy
        gx = gx + wt.mu * (np.where(b[:, 1] > 0, 1.0, 0.0) - np.where(b[:, 0] > 0, 1.0, 0.0))
        gy = gy + wt.mu * (np.where(b[:, 3] > 0, 1.0, 0.0) - np.where(b[:, 2] > 0, 1.0, 0.0))
        return value, np.concatenate([gx, gy])

    def f_tilde_reference(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        """Vectorized numpy version of :meth:`f_tilde`."""
        n = self.n
        x, y = u[:n], u[n:]
        wt = self.weights
        d, gdx, gdy = self.overlap_and_grad(x, y)
        b = self.hinges(x, y)
        value = wt.lam0 * d + wt.mu0 * float(np.sum(b * b))
        gx = wt.lam0 * gdx + wt.mu0 * 2.0 * (b[:, 1] - b[:, 0])
        gy = wt.lam0 * gdy + wt.mu0 * 2.0 * (b[:, 3] - b[:, 2])
        return value, np.concatenate([gx, gy])


# -- functional surface ------------------------------------------------------


def _r_of(instance, r):
    return np.zeros(instance.n, dtype=np.int8) if r is None else np.asarray(r)


def hpwl(instance: ProblemInstance, x, y, r=None) -> float:
    """Total half-perimeter wirelength, pads included at their fixed positions."""
    ev = Evaluator(instance, _r_of(instance, r), None)
    return ev.wirelength(np.asarray(x, float), np.asarray(y, float))


def total_overlap(instance: ProblemInstance, plan: Floorplan) -> float:
    return Evaluator(instance, plan.r, None).overlap(plan.x, plan.y)


def boundary_terms(instance: ProblemInstance, plan: Floorplan, outline: OutlineSpec) -> np.ndarray:
    return Evaluator(instance, plan.r, outline).hinges(plan.x, plan.y)


def boundary_sum(instance: ProblemInstance, plan: Floorplan, outline: OutlineSpec) -> float:
    return float(boundary_terms(instance, plan, outline).sum())


def smooth_boundary(instance: ProblemInstance, plan: Floorplan, outline: OutlineSpec) -> float:
    b = boundary_terms(instance, plan, outline)
    return float(np.sum(b * b))


def global_objective(
    instance: ProblemInstance,
    plan: Floorplan,
    weights: PenaltyWeights,
    outline: OutlineSpec,
) -> ObjectiveBreakdown:
    return Evaluator(instance, plan.r, outline, weights).breakdown(plan.x, plan.y)


def legalization_objective(
    instance: ProblemInstance,
    plan: Floorplan,
    weights: PenaltyWeights,
    outline: OutlineSpec,
) -> float:
    return global_objective(instance, plan, weights, outline).f_tilde


def subgradient_f(instance, plan: Floorplan, weights, outline):
    ev = Evaluator(instance, plan.r, outline, weights)
    _, g = ev.f(np.concatenate([plan.x, plan.y]))
    return g[: instance.n], g[instance.n :]


def subgradient_f_tilde(instance, plan: Floorplan, weights, outline):
    ev = Evaluator(instance, plan.r, outline, weights)
    _, g = ev.f_tilde(np.concatenate([plan.x, plan.y]))
    return g[: instance.n], g[instance.n :]
