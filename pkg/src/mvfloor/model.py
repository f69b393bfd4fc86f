"""Domain types for hard-module floorplanning instances and placements.

Coordinates in a :class:`Floorplan` are module *centers*. Lower-left corners
only show up in legalization and file I/O, and the conversion is always
explicit (:func:`lower_left` / :func:`centers_from_lower_left`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# Clockwise quarter turns: code r means a rotation of r * pi/2.
ORIENTATIONS = (0, 1, 2, 3)


class InstanceError(ValueError):
    """An instance, floorplan or outline violates its invariants."""


@dataclass(frozen=True)
class Module:
    id: int
    width: float
    height: float
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))
        if not (self.width > 0 and self.height > 0):
            raise InstanceError(
                f"module {self.name or self.id}: dimensions must be positive, "
                f"got {self.width}x{self.height}"
            )

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Pad:
    id: int
    x: float
    y: float
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InstanceError(f"pad {self.name or self.id}: non-finite coordinates")


@dataclass(frozen=True)
class Pin:
    """One net endpoint: a module or a pad, with an optional pin offset.

    ``offset`` is given in percent of the module's half width / half height in
    its unrotated frame (the GSRC ``%x %y`` convention); pads ignore it.
    """

    ref: int
    is_pad: bool = False
    offset: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class Net:
    pins: tuple[Pin, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if not self.pins:
            raise InstanceError(f"net {self.name!r} has no pins")
        seen = set()
        for pin in self.pins:
            key = (pin.is_pad, pin.ref)
            if key in seen:
                raise InstanceError(f"net {self.name!r} lists an endpoint twice")
            seen.add(key)


@dataclass(frozen=True)
class ProblemInstance:
    modules: tuple[Module, ...]
    pads: tuple[Pad, ...] = ()
    nets: tuple[Net, ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "modules", tuple(self.modules))
        object.__setattr__(self, "pads", tuple(self.pads))
        object.__setattr__(self, "nets", tuple(self.nets))
        if not self.modules:
            raise InstanceError("instance has no modules")
        for k, m in enumerate(self.modules):
            if m.id != k:
                raise InstanceError(f"module ids must be 0..n-1, found {m.id} at {k}")
        for k, p in enumerate(self.pads):
            if p.id != k:
                raise InstanceError(f"pad ids must be 0..p-1, found {p.id} at {k}")
        n, npads = len(self.modules), len(self.pads)
        for e, net in enumerate(self.nets):
            for pin in net.pins:
                limit = npads if pin.is_pad else n
                if not 0 <= pin.ref < limit:
                    kind = "pad" if pin.is_pad else "module"
                    raise InstanceError(f"net {e}: unknown {kind} reference {pin.ref}")

    @property
    def n(self) -> int:
        return len(self.modules)

    @cached_property
    def widths(self) -> np.ndarray:
        w = np.array([m.width for m in self.modules], dtype=float)
        w.flags.writeable = False
        return w

    @cached_property
    def heights(self) -> np.ndarray:
        h = np.array([m.height for m in self.modules], dtype=float)
        h.flags.writeable = False
        return h

    @cached_property
    def pad_xy(self) -> np.ndarray:
        xy = np.array([(p.x, p.y) for p in self.pads], dtype=float).reshape(-1, 2)
        xy.flags.writeable = False
        return xy

    def module_index(self, name: str) -> int:
        return self._module_names[name]

    @cached_property
    def _module_names(self) -> dict[str, int]:
        return {m.name: m.id for m in self.modules}


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Floorplan:
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        x = _frozen(self.x, float)
        y = _frozen(self.y, float)
        r = np.zeros(x.shape, dtype=np.int8) if self.r is None else _frozen(self.r, np.int8)
        if not (x.shape == y.shape == r.shape):
            raise InstanceError(
                f"floorplan vectors differ in length: {x.size}, {y.size}, {r.size}"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InstanceError("floorplan has non-finite coordinates")
        if np.any((r < 0) | (r > 3)):
            raise InstanceError("orientation codes must be in {0,1,2,3}")
        r.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class OutlineSpec:
    width: float
    height: float
    ratio: float = float("nan")
    gamma: float = float("nan")

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise InstanceError(f"outline must be positive, got {self.width}x{self.height}")

    @property
    def half_perimeter(self) -> float:
        return self.width + self.height

    @property
    def area(self) -> float:
        return self.width * self.height


def effective_dims(module: Module, r: int) -> tuple[float, float]:
    """Width and height of ``module`` after ``r`` clockwise quarter turns."""
    if r % 2:
        return module.height, module.width
    return module.width, module.height


def effective_dim_arrays(instance: ProblemInstance, r) -> tuple[np.ndarray, np.ndarray]:
    odd = (np.asarray(r) % 2).astype(bool)
    w, h = instance.widths, instance.heights
    return np.where(odd, h, w), np.where(odd, w, h)


def total_module_area(instance: ProblemInstance) -> float:
    return float(np.sum(instance.widths * instance.heights))


def bounding_box(instance: ProblemInstance, plan: Floorplan) -> tuple[float, float, float, float]:
    """(xmin, ymin, xmax, ymax) of all module rectangles."""
    w, h = effective_dim_arrays(instance, plan.r)
    return (
        float(np.min(plan.x - w / 2)),
        float(np.min(plan.y - h / 2)),
        float(np.max(plan.x + w / 2)),
        float(np.max(plan.y + h / 2)),
    )


def bounding_area(instance: ProblemInstance, plan: Floorplan) -> float:
    x0, y0, x1, y1 = bounding_box(instance, plan)
    return (x1 - x0) * (y1 - y0)


def whitespace_ratio(instance: ProblemInstance, plan: Floorplan) -> float:
    area = total_module_area(instance)
    return (bounding_area(instance, plan) - area) / area


def outline_from_ratio(area: float, ratio: float, gamma: float) -> OutlineSpec:
    """Fixed outline of area ``(1+gamma)*area`` with height/width = ``ratio``."""
    if not area > 0:
        raise InstanceError(f"total module area must be positive, got {area}")
    if not ratio > 0:
        raise InstanceError(f"aspect ratio must be positive, got {ratio}")
    if gamma < 0:
        raise InstanceError(f"whitespace ratio must be non-negative, got {gamma}")
    scaled = (1.0 + gamma) * area
    return OutlineSpec(
        width=math.sqrt(scaled / ratio),
        height=math.sqrt(scaled * ratio),
        ratio=ratio,
        gamma=gamma,
    )


def lower_left(instance: ProblemInstance, plan: Floorplan) -> tuple[np.ndarray, np.ndarray]:
    w, h = effective_dim_arrays(instance, plan.r)
    return plan.x - w / 2, plan.y - h / 2


def centers_from_lower_left(instance: ProblemInstance, xl, yl, r) -> Floorplan:
    w, h = effective_dim_arrays(instance, r)
    return Floorplan(np.asarray(xl) + w / 2, np.asarray(yl) + h / 2, r)


def module_fits(module: Module, outline: OutlineSpec) -> bool:
    """True if the module fits inside the outline under some orientation."""
    return any(
        ew <= outline.width and eh <= outline.height
        for ew, eh in (effective_dims(module, 0), effective_dims(module, 1))
    )
