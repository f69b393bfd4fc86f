"""Outline-free floorplanning: golden-section search over the whitespace ratio.

Each trial fixes an outline from ``(A, R, gamma)`` and runs the fixed-outline
loop on it. A legal result makes ``gamma`` feasible and becomes the new upper
end of the bracket; otherwise ``gamma`` becomes the lower end.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np

from .dea import DeaParams
from .ffa import FfaConfig, ffa_cd
from .model import (
    Floorplan,
    OutlineSpec,
    ProblemInstance,
    bounding_area,
    outline_from_ratio,
    total_module_area,
)
from .objective import PenaltyWeights

log = logging.getLogger(__name__)

GOLDEN = 0.618


class GssInfeasible(RuntimeError):
    """No legal plan was found even at the largest whitespace ratio tried."""


@dataclass(frozen=True)
class GssParams:
    ratio: float = 1.0
    epsilon: float = 0.002
    gamma_start: float = 0.15
    gamma_cap: float = 2.0
    trial_generations: int = 60
    k_max: int = 50
    k_max_later: int = 35
    warm_start: bool = False
    weights: PenaltyWeights = PenaltyWeights()
    dea: DeaParams = DeaParams()
    ffa_overrides: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.ratio > 0:
            raise ValueError("aspect ratio must be > 0")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not 0 < self.gamma_start <= self.gamma_cap:
            raise ValueError("need 0 < gamma_start <= gamma_cap")
        if self.trial_generations < 1:
            raise ValueError("trial_generations must be >= 1")

    def ffa_config(self, outline: OutlineSpec) -> FfaConfig:
        options = dict(
            outline=outline,
            weights=self.weights,
            dea=self.dea,
            k_max=self.k_max,
            k_max_later=self.k_max_later,
            max_generations=self.trial_generations,
        )
        options.update(self.ffa_overrides)
        return FfaConfig(**options)


@dataclass(frozen=True)
class GssState:
    gamma_min: float
    gamma_max: float
    epsilon: float = 0.002
    ratio: float = 1.0

    def __post_init__(self) -> None:
        if not self.gamma_min < self.gamma_max:
            raise ValueError("bracket needs gamma_min < gamma_max")

    @property
    def width(self) -> float:
        return self.gamma_max - self.gamma_min

    @property
    def gamma_m(self) -> float:
        return GOLDEN * (self.gamma_max - self.gamma_min) + self.gamma_min

    @property
    def converged(self) -> bool:
        return self.width < self.epsilon

    def contract(self, feasible: bool) -> "GssState":
        if feasible:
            return replace(self, gamma_max=self.gamma_m)
        return replace(self, gamma_min=self.gamma_m)


@dataclass
class GssTrial:
    index: int
    gamma: float
    feasible: bool
    hpwl: float
    area: float
    outline: OutlineSpec
    plan: Floorplan | None = None
    generations: int = 0
    seconds: float = 0.0


@dataclass
class GssResult:
    plan: Floorplan
    gamma: float
    gamma_max: float
    gamma_min: float
    outline: OutlineSpec
    hpwl: float
    area: float
    trials: list[GssTrial]
    seconds: float

    @property
    def bracket_width(self) -> float:
        return self.gamma_max - self.gamma_min


def cost(W: float, W_min: float, S: float, S_min: float) -> float:
    """Equal-weight blend of wirelength and area, each relative to its best observed value."""
    if not (W_min > 0 and S_min > 0):
        raise ValueError("W_min and S_min must be > 0")
    return 0.5 * W / W_min + 0.5 * S / S_min


def max_outer_iterations(width0: float, epsilon: float) -> int:
    """Contractions needed when every step keeps the larger (0.618) part."""
    if width0 < epsilon:
        return 0
    return math.ceil(math.log(epsilon / width0) / math.log(GOLDEN)) + 1


def trial_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, index, 0x655]).generate_state(1)[0])


class GoldenSectionSearch:
    """One seeded min-area run; see :func:`fa_gss`."""

    def __init__(self, instance: ProblemInstance, params: GssParams, seed: int):
        self.instance = instance
        self.params = params
        self.seed = int(seed)
        self.area = total_module_area(instance)
        self.trials: list[GssTrial] = []
        self._incumbent: GssTrial | None = None

    def trial(self, gamma: float) -> GssTrial:
        outline = outline_from_ratio(self.area, self.params.ratio, gamma)
        warm = None
        if self.params.warm_start and self._incumbent is not None:
            warm = self._incumbent.plan
        index = len(self.trials)
        res = ffa_cd(self.instance, self.params.ffa_config(outline), trial_seed(self.seed, index), warm)
        record = GssTrial(
            index=index,
            gamma=gamma,
            feasible=res.legal,
            hpwl=res.hpwl,
            area=bounding_area(self.instance, res.plan),
            outline=outline,
            plan=res.plan if res.legal else None,
            generations=res.generations,
            seconds=res.seconds,
        )
        self.trials.append(record)
        if record.feasible:
            self._incumbent = record
        log.info("trial %d gamma=%.5f feasible=%s hpwl=%.1f", index, gamma, record.feasible, record.hpwl)
        return record

    def bracket(self) -> GssState:
        p = self.params
        gamma_min, gamma = 0.0, p.gamma_start
        while True:
            if self.trial(gamma).feasible:
                return GssState(gamma_min, gamma, p.epsilon, p.ratio)
            # an infeasible verdict is also a valid lower end
            gamma_min, gamma = gamma, 2 * gamma
            if gamma > p.gamma_cap:
                raise GssInfeasible(
                    f"no legal plan for whitespace ratios up to {gamma_min:g} (cap {p.gamma_cap:g})"
                )

    def run(self) -> GssResult:
        started = time.perf_counter()
        state = self.bracket()
        while not state.converged:
            state = state.contract(self.trial(state.gamma_m).feasible)
        best = self._incumbent
        assert best is not None and best.plan is not None
        return GssResult(
            plan=best.plan,
            gamma=(best.area - self.area) / self.area,
            gamma_max=state.gamma_max,
            gamma_min=state.gamma_min,
            outline=best.outline,
            hpwl=best.hpwl,
            area=best.area,
            trials=self.trials,
            seconds=time.perf_counter() - started,
        )


def fa_gss(instance: ProblemInstance, params: GssParams | None = None, seed: int = 0) -> GssResult:
    """Shrink the outline by golden-section steps until the bracket is narrower than ``epsilon``.

    Returns the legal plan of the smallest feasible trial ratio. ``gamma`` of
    the result is the achieved whitespace of that plan's bounding box, which
    can be below the trial ratio.
    """
    return GoldenSectionSearch(instance, params or GssParams(), seed).run()
