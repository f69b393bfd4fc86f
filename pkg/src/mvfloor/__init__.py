"""Mixed-variable floorplanning of hard rectangular modules.

Positions are continuous and orientations are one of four quarter turns.
The fixed-outline planner combines a conjugate-subgradient search over
positions with a discrete evolutionary search over orientations; a
golden-section search on the whitespace ratio drives it toward minimum area.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    Floorplan,
    InstanceError,
    Module,
    Net,
    OutlineSpec,
    Pad,
    Pin,
    ProblemInstance,
    outline_from_ratio,
)
from .objective import Evaluator, PenaltyWeights  # noqa: E402
from .dea import DeaParams  # noqa: E402
from .ffa import FfaConfig, FfaResult, ffa_cd  # noqa: E402
from .gss import GssParams, GssResult, fa_gss  # noqa: E402
from .legalize import legalize_graph  # noqa: E402

__all__ = [
    "DeaParams",
    "Evaluator",
    "FfaConfig",
    "FfaResult",
    "Floorplan",
    "GssParams",
    "GssResult",
    "InstanceError",
    "Module",
    "Net",
    "OutlineSpec",
    "Pad",
    "PenaltyWeights",
    "Pin",
    "ProblemInstance",
    "__version__",
    "fa_gss",
    "ffa_cd",
    "legalize_graph",
    "outline_from_ratio",
]
