"""File formats: Bookshelf benchmarks, SVG drawings and CSV metrics."""

from .bookshelf import (
    BenchmarkFiles,
    BlocksData,
    BookshelfError,
    PlEntry,
    build_instance,
    load_aux,
    load_instance,
    parse_aux,
    parse_blocks,
    parse_nets,
    parse_pl,
    plan_from_pl,
    write_blocks,
    write_nets,
    write_pl,
)
from .metrics import (
    HEADER,
    TRIAL_HEADER,
    RunRecord,
    TrialRecord,
    fill_costs,
    read_metrics_csv,
    success_rate,
    write_metrics_csv,
    write_trials_csv,
)
from .svg import render_svg

__all__ = [
    "BenchmarkFiles",
    "BlocksData",
    "BookshelfError",
    "HEADER",
    "PlEntry",
    "RunRecord",
    "TRIAL_HEADER",
    "TrialRecord",
    "build_instance",
    "fill_costs",
    "load_aux",
    "load_instance",
    "parse_aux",
    "parse_blocks",
    "parse_nets",
    "parse_pl",
    "plan_from_pl",
    "read_metrics_csv",
    "render_svg",
    "success_rate",
    "write_blocks",
    "write_metrics_csv",
    "write_nets",
    "write_pl",
    "write_trials_csv",
]
