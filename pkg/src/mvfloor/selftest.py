"""Built-in invariant checks, runnable from the command line.

Each check returns a :class:`CheckResult`; :func:`run_selftest` runs them all.
The checks compare the production code against small independent oracles
(direct formula evaluation, finite differences, brute-force geometry).
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import dea, objective
from .geometry import pairwise_intersections
from .legalize import build_relations, legalize_graph
from .model import Floorplan, Module, Net, OutlineSpec, Pad, Pin, ProblemInstance, effective_dim_arrays
from .objective import Evaluator, PenaltyWeights

MUTATIONS = ("overlap-branch",)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _overlap_oracle(wi: float, wj: float, d: float) -> float:
    d = abs(d)
    if d <= abs(wi - wj) / 2:
        return max(wi, wj)
    if d <= (wi + wj) / 2:
        return (wi + wj) / 2 - d
    return 0.0


def random_instance(n: int, rng: np.random.Generator, pads: int = 6, nets: int | None = None) -> ProblemInstance:
    modules = tuple(Module(i, float(rng.uniform(1, 10)), float(rng.uniform(1, 10)), f"m{i}") for i in range(n))
    pad_list = tuple(Pad(k, float(rng.uniform(-5, 60)), float(rng.uniform(-5, 60)), f"p{k}") for k in range(pads))
    net_list = []
    for e in range(nets if nets is not None else 2 * n):
        k = int(rng.integers(min(2, n), min(n, 5) + 1))
        pins = [Pin(int(m)) for m in rng.choice(n, size=k, replace=False)]
        if pads and rng.random() < 0.4:
            pins.append(Pin(int(rng.integers(pads)), is_pad=True))
        net_list.append(Net(tuple(pins), f"e{e}"))
    return ProblemInstance(modules, pad_list, tuple(net_list), f"rand{n}")


def _smooth(ev: Evaluator, x: np.ndarray, y: np.ndarray, margin: float) -> bool:
    """True when no tie, branch boundary or hinge kink lies within ``margin``."""
    w, h = ev.w, ev.h
    i, j = ev.pi, ev.pj
    for c, s in ((x, w), (y, h)):
        d = np.abs(c[i] - c[j])
        diff, tot = np.abs(s[i] - s[j]) / 2, (s[i] + s[j]) / 2
        if np.any(np.abs(d - diff) < margin) or np.any(np.abs(d - tot) < margin):
            return False
    if ev.overlap(x, y) <= 0:
        return False
    if ev.outline is not None:
        for hinge in (w / 2 - x, w / 2 + x - ev.outline.width, h / 2 - y, h / 2 + y - ev.outline.height):
            if np.any(np.abs(hinge) < margin):
                return False
    cx = np.concatenate([x, ev.instance.pad_xy[:, 0]])
    cy = np.concatenate([y, ev.instance.pad_xy[:, 1]])
    for coords in (cx, cy):
        vals = np.where(ev.nets.valid, coords[ev.nets.index], np.nan)
        for row, ok in zip(vals, ev.nets.valid):
            v = np.sort(row[ok])
            if v.size > 1 and (v[-1] - v[-2] < margin or v[1] - v[0] < margin):
                return False
    return True


def smooth_points(ev: Evaluator, count: int, rng: np.random.Generator, margin: float = 1e-3) -> Iterator[np.ndarray]:
    W = ev.outline.width if ev.outline else 50.0
    H = ev.outline.height if ev.outline else 50.0
    made = 0
    while made < count:
        x = rng.uniform(-0.1 * W, 1.1 * W, ev.n)
        y = rng.uniform(-0.1 * H, 1.1 * H, ev.n)
        if _smooth(ev, x, y, margin):
            made += 1
            yield np.concatenate([x, y])


def finite_difference_error(oracle: Callable, u: np.ndarray, h: float = 1e-6) -> float:
    """Largest relative gap between the oracle's subgradient and central differences."""
    _, g = oracle(u)
    worst = 0.0
    for k in range(u.size):
        up, dn = u.copy(), u.copy()
        up[k] += h
        dn[k] -= h
        fd = (oracle(up)[0] - oracle(dn)[0]) / (2 * h)
        worst = max(worst, abs(fd - g[k]) / max(1.0, abs(g[k])))
    return worst


# -- individual checks ----------------------------------------------------------


def check_overlap_formula(rng: np.random.Generator, trials: int = 200) -> CheckResult:
    """Overlap totals (numpy and compiled paths) against direct evaluation of the piecewise formula."""
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 8))
        inst = random_instance(n, rng, pads=0, nets=0)
        r = rng.integers(0, 4, n)
        ev = Evaluator(inst, r, None, PenaltyWeights(alpha=0.0, lam=1.0, mu=0.0))
        x, y = rng.uniform(0, 12, n), rng.uniform(0, 12, n)
        # force some containment pairs
        x[1], y[1] = x[0], y[0]
        w, hh = effective_dim_arrays(inst, r)
        expect = sum(
            _overlap_oracle(w[i], w[j], x[i] - x[j]) * _overlap_oracle(hh[i], hh[j], y[i] - y[j])
            for i in range(n)
            for j in range(i + 1, n)
        )
        got_np = ev.overlap(x, y)
        got_f = ev.f(np.concatenate([x, y]))[0] ** 2
        worst = max(worst, abs(got_np - expect) / max(1.0, expect), abs(got_f - expect) / max(1.0, expect))
    return CheckResult("overlap formula vs direct oracle", worst < 1e-9, f"max rel err {worst:.2e}")


def check_subgradients(rng: np.random.Generator, points: int = 1000, sizes=(10, 50)) -> CheckResult:
    worst = 0.0
    for n in sizes:
        inst = random_instance(n, rng)
        side = math.sqrt(1.2 * float(np.sum(inst.widths * inst.heights)))
        outline = OutlineSpec(side, side)
        r = rng.integers(0, 4, n)
        ev = Evaluator(inst, r, outline, PenaltyWeights(alpha=1.0, lam=20.0, mu=100.0, lam0=1.0, mu0=10.0))
        for u in smooth_points(ev, points, rng):
            worst = max(worst, finite_difference_error(ev.f, u), finite_difference_error(ev.f_tilde, u))
    return CheckResult(
        f"subgradients vs finite differences ({points} points, n={list(sizes)})", worst < 1e-4, f"max rel err {worst:.2e}"
    )


def check_kernels(rng: np.random.Generator, trials: int = 50) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 40))
        inst = random_instance(n, rng)
        ev = Evaluator(inst, rng.integers(0, 4, n), OutlineSpec(40.0, 40.0), PenaltyWeights(lam=37.0))
        u = rng.uniform(-5, 45, 2 * n)
        if rng.random() < 0.5:
            u = np.round(u / 4) * 4  # ties and branch boundaries
        for fast, ref in ((ev.f, ev.f_reference), (ev.f_tilde, ev.f_tilde_reference)):
            (a, ga), (b, gb) = fast(u), ref(u)
            worst = max(worst, abs(a - b) / max(1.0, abs(b)), float(np.max(np.abs(ga - gb))))
    return CheckResult("compiled oracles vs numpy reference", worst < 1e-9, f"max diff {worst:.2e}")


def check_norms(rng: np.random.Generator, operations: int = 10_000) -> CheckResult:
    params = dea.DeaParams()
    np_, n = 4, 12
    Q = dea.normalize_columns(rng.random((np_, 4, n)) + 1e-3)
    done = 0
    identity = 0.0
    while done < operations:
        if rng.random() < 0.5:
            Q = dea.orth_exp_q(Q, rng.random(np_), rng)
        else:
            P_new = rng.integers(0, 4, (np_, n))
            P = rng.integers(0, 4, (np_, n))
            Q = dea.refine_q(P_new, P, Q, params, [rng] * np_)
        col = dea.normalize_columns(rng.random((4, 1)))[:, 0]
        identity = max(identity, abs(float(np.sum(dea.disturb_squares(col, int(rng.integers(4)), params.lambda_d))) - 1))
        done += 1
    dev = float(np.max(np.abs(np.sqrt(np.sum(Q * Q, axis=1)) - 1)))
    ok = dev <= 1e-9 and identity <= 1e-12 and bool(np.all(Q >= 0))
    return CheckResult(
        f"probability columns after {operations} updates", ok, f"norm dev {dev:.1e}, squared-sum identity {identity:.1e}"
    )


def _near_legal(rng: np.random.Generator, n: int = 20) -> tuple[ProblemInstance, Floorplan]:
    inst = random_instance(n, rng, pads=0, nets=0)
    r = rng.integers(0, 4, n)
    w, h = effective_dim_arrays(inst, r)
    cols = 5
    cell = float(max(w.max(), h.max()))
    k = np.arange(n)
    x = (k % cols) * cell + w / 2 + rng.normal(0, 0.3 * cell, n)
    y = (k // cols) * cell + h / 2 + rng.normal(0, 0.3 * cell, n)
    return inst, Floorplan(x, y, r)


def check_legalizer(rng: np.random.Generator, trials: int = 1000) -> CheckResult:
    failures = {"overlap": 0, "idempotence": 0, "order": 0}
    for _ in range(trials):
        inst, plan = _near_legal(rng)
        out = legalize_graph(inst, plan)
        ix, iy = pairwise_intersections(inst, out)
        if np.any((ix > 1e-9) & (iy > 1e-9)):
            failures["overlap"] += 1
        again = legalize_graph(inst, out)
        if not (np.allclose(again.x, out.x, atol=1e-9) and np.allclose(again.y, out.y, atol=1e-9)):
            failures["idempotence"] += 1
        rel = build_relations(inst, plan)
        w, h = effective_dim_arrays(inst, out.r)
        xl, yl = out.x - w / 2, out.y - h / 2
        if any(xl[a] + w[a] > xl[b] + 1e-9 for a, b in rel.x_edges) or any(
            yl[a] + h[a] > yl[b] + 1e-9 for a, b in rel.y_edges
        ):
            failures["order"] += 1
    ok = not any(failures.values())
    detail = ", ".join(f"{k} failures {v}" for k, v in failures.items())
    return CheckResult(f"legalizer oracle ({trials} near-legal 20-module plans)", ok, detail)


# -- driver ---------------------------------------------------------------------


@contextmanager
def mutation(name: str | None):
    """Temporarily corrupt production code, to show that the checks catch it."""
    if name is None:
        yield
        return
    if name != "overlap-branch":
        raise ValueError(f"unknown mutation {name!r}; choose from {MUTATIONS}")
    original = objective.Evaluator._pair_overlaps

    def corrupted(self, x, y):
        dxs, dys, dx, dy, ox, oy = original(self, x, y)
        wmin = np.minimum(self.w[self.pi], self.w[self.pj])
        ox = np.where(dx <= self._wdiff, wmin, ox)
        return dxs, dys, dx, dy, ox, oy

    objective.Evaluator._pair_overlaps = corrupted
    try:
        yield
    finally:
        objective.Evaluator._pair_overlaps = original


def run_selftest(seed: int = 0, quick: bool = False, mutate: str | None = None) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    plan = [
        (check_overlap_formula, {}),
        (check_kernels, {}),
        (check_subgradients, {"points": 100 if quick else 1000}),
        (check_norms, {"operations": 1000 if quick else 10_000}),
        (check_legalizer, {"trials": 100 if quick else 1000}),
    ]
    results = []
    with mutation(mutate):
        for fn, kwargs in plan:
            started = time.perf_counter()
            try:
                res = fn(rng, **kwargs)
            except Exception as exc:  # a crashing check is a failing check
                res = CheckResult(fn.__name__, False, f"raised {type(exc).__name__}: {exc}")
            res.seconds = time.perf_counter() - started
            results.append(res)
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  time    detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.seconds:5.2f}s  {r.detail}")
    return "\n".join(lines)
