"""Fixed-outline floorplanning: orientation populations evolved by DEA-PPM,
coordinates optimized by CSA, residual overlap removed by graph legalization."""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import dea
from .csa import CsaConfig, csa_minimize
from .geometry import is_legal
from .legalize import legalize_graph
from .model import Floorplan, OutlineSpec, ProblemInstance, effective_dim_arrays, module_fits, total_module_area
from .objective import Evaluator, NetTable, PenaltyWeights

log = logging.getLogger(__name__)

THREADS_ENV = "MVFLOOR_THREADS"

# stream ids for member_rng
_ORTH, _SAMPLE, _REFINE, _LHS = 1, 2, 3, 4
_POPULATION_STREAM = 1 << 20


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class FfaConfig:
    outline: OutlineSpec
    weights: PenaltyWeights = PenaltyWeights()
    dea: dea.DeaParams = dea.DeaParams()
    k_max: int = 50
    k_max_later: int | None = None
    s0: float | None = None
    s_min: float = 1.0
    s_decay: float = 0.95
    q: float = 0.997
    stall_limit: int = 30
    legal_k_max: int = 1000
    legal_step_floor: float = 50.0
    legal_stall_limit: int | None = None
    delta1: float = 0.1
    delta2: float = 0.1
    max_generations: int = 200
    patience: int = 10
    stall_reinit: int = 5
    threads: int | None = None

    def __post_init__(self) -> None:
        if self.delta1 < 0 or self.delta2 < 0:
            raise ValueError("thresholds must be >= 0")
        if not self.s_min > 0:
            raise ValueError("s_min must be > 0")
        if self.s0 is not None and self.s0 < self.s_min:
            raise ValueError("s0 must be >= s_min")
        if self.max_generations < 1 or self.patience < 1 or self.stall_reinit < 1:
            raise ValueError("generation budgets must be >= 1")

    @property
    def initial_step(self) -> float:
        if self.s0 is not None:
            return self.s0
        return max(self.outline.width, self.outline.height) / 2


@dataclass
class GenerationRecord:
    generation: int
    best_score: tuple[int, float]
    best_hpwl: float
    legal_members: int
    lam: float
    mu: float
    step: float
    reinitialized: bool


@dataclass
class FfaResult:
    plan: Floorplan
    legal: bool
    hpwl: float
    f: float
    generations: int
    seconds: float
    outline: OutlineSpec
    weights: PenaltyWeights
    feasible_instance: bool = True
    history: list[GenerationRecord] = field(default_factory=list)


@dataclass
class _Member:
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    fitness: float = math.inf


@dataclass
class _Outcome:
    x: np.ndarray
    y: np.ndarray
    overlap_ratio: float
    outline_ratio: float
    legalized: bool


def escalate_lambda(lam: float) -> float:
    return min(1.5 * lam, lam + 30.0)


def escalate_mu(mu: float) -> float:
    return min(1.1 * mu, mu + 10.0)


def decay_step(s: float, s_min: float, factor: float = 0.95) -> float:
    return max(factor * s, s_min)


def init_coordinates(
    instance: ProblemInstance, outline: OutlineSpec, np_: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Latin hypercube coordinates, shape (np, n) per axis.

    Per module and axis the range ``[margin, extent - margin]`` (margin = half
    the module's larger side) is cut into ``np`` strata, one sample each,
    assigned to members in a random order. Modules too large for the range
    sit at the outline center on that axis.
    """
    n = instance.n
    margin = np.maximum(instance.widths, instance.heights) / 2
    out = []
    for extent in (outline.width, outline.height):
        lo = np.minimum(margin, extent / 2)
        hi = np.maximum(extent - margin, extent / 2)
        strata = np.argsort(rng.random((np_, n)), axis=0)
        u = (strata + rng.random((np_, n))) / np_
        out.append(lo + u * (hi - lo))
    return out[0], out[1]


def _fit_to_outline(instance: ProblemInstance, plan: Floorplan, outline: OutlineSpec) -> tuple[np.ndarray, np.ndarray]:
    """Scale a plan's centers into ``outline`` so its bounding box matches the outline."""
    w, h = effective_dim_arrays(instance, plan.r)
    x0, y0 = float(np.min(plan.x - w / 2)), float(np.min(plan.y - h / 2))
    span_x = max(float(np.max(plan.x + w / 2)) - x0, 1e-12)
    span_y = max(float(np.max(plan.y + h / 2)) - y0, 1e-12)
    return (plan.x - x0) * outline.width / span_x, (plan.y - y0) * outline.height / span_y


class FixedOutlinePlanner:
    """One seeded run of the fixed-outline population loop."""

    def __init__(self, instance: ProblemInstance, config: FfaConfig, seed: int, initial: Floorplan | None = None):
        self.instance = instance
        self.initial = initial
        self.config = config
        self.seed = int(seed)
        self.outline = config.outline
        self.area = total_module_area(instance)
        self.nets = NetTable(instance)
        self.weights = config.weights
        self.np = config.dea.np
        self.threads = config.threads if config.threads is not None else default_threads()
        self.step = config.initial_step
        self.generation = 0
        self.best: tuple[tuple[int, float], Floorplan, float] | None = None
        self.history: list[GenerationRecord] = []

    # -- evaluation helpers ----------------------------------------------------

    def evaluator(self, r, weights: PenaltyWeights | None = None) -> Evaluator:
        return Evaluator(self.instance, r, self.outline, weights or self.weights, self.nets)

    def f_value(self, member_x, member_y, r) -> float:
        ev = self.evaluator(r)
        return ev.breakdown(member_x, member_y).f

    def _score(self, plan: Floorplan) -> tuple[tuple[int, float], float]:
        bd = self.evaluator(plan.r).breakdown(plan.x, plan.y)
        if is_legal(self.instance, plan, self.outline):
            return (0, bd.wirelength), bd.f
        # weights escalate over time, so illegal plans are ranked by a
        # weight-free violation measure rather than by f
        violation = bd.overlap / self.area + bd.boundary / self.outline.half_perimeter
        return (1, violation), bd.f

    def _offer(self, plan: Floorplan) -> bool:
        score, fval = self._score(plan)
        if self.best is None or score < self.best[0]:
            self.best = (score, plan, fval)
            return True
        return False

    # -- phases ---------------------------------------------------------------

    def _k_max(self) -> int:
        if self.generation > 1 and self.config.k_max_later is not None:
            return self.config.k_max_later
        return self.config.k_max

    def _optimize(self, x, y, r, weights: PenaltyWeights, step: float, k_max: int) -> _Outcome:
        cfg = self.config
        ev = self.evaluator(r, weights)
        u0 = np.concatenate([x, y])
        trace = csa_minimize(ev.f, u0, CsaConfig(k_max=k_max, s0=step, q=cfg.q, stall_limit=cfg.stall_limit))
        u = trace.best_point
        n = self.instance.n
        bd = ev.breakdown(u[:n], u[n:])
        d0 = bd.overlap / self.area
        c0 = bd.boundary / self.outline.half_perimeter
        if d0 > cfg.delta1:
            return _Outcome(u[:n], u[n:], d0, c0, False)
        legal_step = max(step / 2, cfg.legal_step_floor)
        trace = csa_minimize(
            ev.f_tilde,
            u,
            CsaConfig(
                k_max=cfg.legal_k_max,
                s0=legal_step,
                q=cfg.q,
                stall_limit=cfg.legal_stall_limit or cfg.legal_k_max,
                target=0.0,
            ),
        )
        u = trace.best_point
        plan = legalize_graph(self.instance, Floorplan(u[:n], u[n:], r))
        return _Outcome(plan.x.copy(), plan.y.copy(), d0, c0, True)

    def update_xy(self, members: list[_Member], sampled: np.ndarray) -> np.ndarray:
        """Optimize every member under its sampled orientations; returns the kept orientations."""
        cfg = self.config
        snapshot = self.weights
        step = self.step
        k_max = self._k_max()

        def work(i: int) -> _Outcome:
            m = members[i]
            return self._optimize(m.x, m.y, sampled[i], snapshot, step, k_max)

        if self.threads > 1 and self.np > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                outcomes = list(pool.map(work, range(self.np)))
        else:
            outcomes = [work(i) for i in range(self.np)]

        weights = self.weights
        for out in outcomes:
            if out.overlap_ratio > cfg.delta1:
                weights = replace(weights, lam=escalate_lambda(weights.lam))
                if out.outline_ratio > cfg.delta2:
                    weights = replace(weights, mu=escalate_mu(weights.mu))
        self.weights = weights

        kept = np.empty_like(sampled)
        for i, (m, out) in enumerate(zip(members, outcomes)):
            new_f = self.f_value(out.x, out.y, sampled[i])
            old_f = self.f_value(m.x, m.y, m.r)
            if new_f <= old_f:
                m.x, m.y, m.r, m.fitness = out.x, out.y, sampled[i].copy(), new_f
            else:
                m.fitness = old_f
            kept[i] = m.r
        self.step = decay_step(self.step, cfg.s_min, cfg.s_decay)
        return kept

    def _reinitialize(self, members: list[_Member]) -> None:
        keep = min(range(self.np), key=lambda i: (members[i].fitness, i))
        rng = dea.member_rng(self.seed, self.generation, _POPULATION_STREAM, _LHS)
        X, Y = init_coordinates(self.instance, self.outline, self.np, rng)
        for i, m in enumerate(members):
            if i == keep:
                continue
            m.x, m.y = X[i], Y[i]
            m.fitness = self.f_value(m.x, m.y, m.r)

    # -- main loop ------------------------------------------------------------

    def run(self) -> FfaResult:
        cfg = self.config
        params = cfg.dea
        inst = self.instance
        n = inst.n
        started = time.perf_counter()
        feasible = all(module_fits(m, self.outline) for m in inst.modules)
        if not feasible:
            log.warning("%s: some module does not fit the outline in any orientation", inst.name or "instance")

        Q = dea.init_distribution(n, self.np)
        P = np.stack(
            [dea.sample_matrix(Q[i], dea.member_rng(self.seed, 0, i, _SAMPLE)) for i in range(self.np)]
        )
        X, Y = init_coordinates(inst, self.outline, self.np, dea.member_rng(self.seed, 0, _POPULATION_STREAM, _LHS))
        if self.initial is not None:
            # warm start: member 0 inherits a previous plan, rescaled to this outline
            P[0] = self.initial.r
            X[0], Y[0] = _fit_to_outline(inst, self.initial, self.outline)
        members = [_Member(X[i], Y[i], P[i]) for i in range(self.np)]
        for m in members:
            m.fitness = self.f_value(m.x, m.y, m.r)
            self._offer(Floorplan(m.x, m.y, m.r))

        since_improved = 0
        since_hpwl = 0
        while True:
            self.generation += 1
            t = self.generation
            fitness = [m.fitness for m in members]
            Qp = dea.orth_exp_q(Q, fitness, dea.member_rng(self.seed, t, _POPULATION_STREAM, _ORTH))
            sample_rngs = [dea.member_rng(self.seed, t, i, _SAMPLE) for i in range(self.np)]
            Pp = dea.sample_p(Qp, P, params.r_inherit, sample_rngs)
            P = self.update_xy(members, Pp)
            refine_rngs = [dea.member_rng(self.seed, t, i, _REFINE) for i in range(self.np)]
            Q = dea.refine_q(Pp, P, Qp, params, refine_rngs)

            had_legal = self.best is not None and self.best[0][0] == 0
            improved = False
            legal_members = 0
            for m in members:
                plan = Floorplan(m.x, m.y, m.r)
                improved |= self._offer(plan)
            for m in members:
                if is_legal(inst, Floorplan(m.x, m.y, m.r), self.outline):
                    legal_members += 1

            reinit = False
            if improved:
                since_improved = 0
            else:
                since_improved += 1
                if since_improved >= cfg.stall_reinit:
                    self._reinitialize(members)
                    since_improved = 0
                    reinit = True
            has_legal = self.best[0][0] == 0
            if has_legal and had_legal and not improved:
                since_hpwl += 1
            else:
                since_hpwl = 0

            self.history.append(
                GenerationRecord(
                    generation=t,
                    best_score=self.best[0],
                    best_hpwl=self.best[0][1] if has_legal else math.nan,
                    legal_members=legal_members,
                    lam=self.weights.lam,
                    mu=self.weights.mu,
                    step=self.step,
                    reinitialized=reinit,
                )
            )
            log.debug("gen %d best=%s lam=%.1f mu=%.1f s=%.2f", t, self.best[0], self.weights.lam, self.weights.mu, self.step)
            if has_legal and since_hpwl >= cfg.patience:
                break
            if t >= cfg.max_generations:
                break

        score, plan, fval = self.best
        legal = score[0] == 0
        ev = self.evaluator(plan.r)
        return FfaResult(
            plan=plan,
            legal=legal,
            hpwl=ev.wirelength(plan.x, plan.y),
            f=fval,
            generations=self.generation,
            seconds=time.perf_counter() - started,
            outline=self.outline,
            weights=self.weights,
            feasible_instance=feasible,
            history=self.history,
        )


def ffa_cd(instance: ProblemInstance, config: FfaConfig, seed: int, initial: Floorplan | None = None) -> FfaResult:
    """Run the fixed-outline loop once; ``initial`` optionally warm-starts one member."""
    return FixedOutlinePlanner(instance, config, seed, initial).run()
