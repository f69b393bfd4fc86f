"""Seeded synthetic instances shaped like the GSRC hard-block suite.

These are *not* the GSRC benchmarks: block sizes, pad rings and net degrees
are drawn to resemble them so the solver and harness can be exercised when
the real files are unavailable.
"""

from __future__ import annotations

import math

import numpy as np

from .model import Module, Net, Pad, Pin, ProblemInstance

# GSRC totals sit around 2.2e5-2.7e5 area units at every size
TOTAL_AREA = 230_000.0

# (blocks, pads, nets) per GSRC size class
GSRC_LIKE_COUNTS = {
    10: (10, 69, 118),
    30: (30, 212, 224),
    50: (50, 209, 320),
    100: (100, 334, 885),
    200: (200, 564, 1585),
    300: (300, 569, 1893),
}


def synthetic_instance(
    n: int,
    seed: int = 0,
    pads: int | None = None,
    nets: int | None = None,
    name: str | None = None,
) -> ProblemInstance:
    rng = np.random.default_rng([seed, n, 0xF100])
    default_pads, default_nets = GSRC_LIKE_COUNTS.get(n, (n, 2 * n, 3 * n))[1:]
    npads = default_pads if pads is None else pads
    nnets = default_nets if nets is None else nets

    # log-normal areas, aspect ratios within [1/3, 3], integer sides as in GSRC
    areas = np.exp(rng.normal(0.0, 0.8, size=n))
    areas *= TOTAL_AREA / areas.sum()
    aspect = np.exp(rng.uniform(math.log(1 / 3), math.log(3), size=n))
    widths = np.maximum(1, np.round(np.sqrt(areas * aspect)))
    heights = np.maximum(1, np.round(np.sqrt(areas / aspect)))
    modules = tuple(Module(i, float(widths[i]), float(heights[i]), f"sb{i}") for i in range(n))

    side = math.sqrt(1.15 * float(np.sum(widths * heights)))
    t = rng.uniform(0, 4, size=npads)
    pad_list = []
    for k, tk in enumerate(t):
        edge, frac = int(tk), tk - int(tk)
        px, py = [(frac * side, 0.0), (side, frac * side), ((1 - frac) * side, side), (0.0, (1 - frac) * side)][edge]
        pad_list.append(Pad(k, round(px, 1), round(py, 1), f"p{k + 1}"))

    net_list = []
    for e in range(nnets):
        degree = int(min(2 + rng.geometric(0.45) - 1, max(2, n)))
        n_mod = int(min(max(1, degree - int(rng.random() < 0.35)), n))
        anchor = int(rng.integers(n))
        # locality: draw partners near the anchor id so nets form clusters
        others = (anchor + rng.integers(-max(3, n // 8), max(3, n // 8) + 1, size=4 * n_mod)) % n
        mods = list(dict.fromkeys([anchor, *others.tolist()]))[:n_mod]
        pins = [Pin(int(m)) for m in mods]
        if npads and degree > len(pins):
            pins.append(Pin(int(rng.integers(npads)), is_pad=True))
        net_list.append(Net(tuple(pins), f"net{e}"))
    return ProblemInstance(modules, tuple(pad_list), tuple(net_list), name or f"synth{n}")
