import os
from pathlib import Path

import numpy as np
import pytest

from mvfloor.model import Floorplan, Module, Net, Pad, Pin, ProblemInstance

DATA = Path(__file__).parent / "data"
GSRC_SIZES = (10, 30, 50, 100, 200, 300)


def instance_of(dims, nets=(), pads=(), name="t"):
    """Build an instance from (w, h) pairs, nets as tuples of module ids or ("p", k) pads."""
    modules = tuple(Module(i, float(w), float(h), f"m{i}") for i, (w, h) in enumerate(dims))
    pad_list = tuple(Pad(k, float(x), float(y), f"p{k}") for k, (x, y) in enumerate(pads))
    net_list = []
    for e, ends in enumerate(nets):
        pins = []
        for end in ends:
            if isinstance(end, tuple):
                pins.append(Pin(end[1], is_pad=True))
            else:
                pins.append(Pin(end))
        net_list.append(Net(tuple(pins), f"n{e}"))
    return ProblemInstance(modules, pad_list, tuple(net_list), name)


def plan_of(xs, ys, rs=None):
    return Floorplan(np.array(xs, float), np.array(ys, float), None if rs is None else np.array(rs))


def gsrc_dir() -> Path | None:
    """Directory holding the GSRC hard-block benchmarks, or None when absent."""
    for candidate in (os.environ.get("GSRC_DIR"), DATA / "gsrc"):
        if candidate and Path(candidate).is_dir():
            return Path(candidate)
    return None


def gsrc_files(n: int) -> tuple[Path, Path, Path]:
    """(.blocks, .nets, .pl) of GSRC n<n>; raises FileNotFoundError naming what is missing."""
    root = gsrc_dir()
    if root is None:
        raise FileNotFoundError(
            "GSRC benchmarks not found: set GSRC_DIR or place n10..n300 files in tests/data/gsrc"
        )
    stem = f"n{n}"
    paths = tuple(root / f"{stem}{ext}" for ext in (".blocks", ".nets", ".pl"))
    missing = [str(p) for p in paths if not p.is_file()]
    if missing:
        raise FileNotFoundError(f"GSRC files missing: {', '.join(missing)}")
    return paths


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
