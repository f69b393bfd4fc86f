"""Command-line entry point: fixed-outline and min-area batches, self-test, rendering.

Settings come from three layers, highest first: command-line flags, a JSON
file given with ``--config``, built-in defaults. Every flag has a key of the
same name in the file (without the leading dashes); namespaced overrides
such as ``--dea.alpha0`` may be written either as ``"dea.alpha0": 0.3`` or
nested as ``"dea": {"alpha0": 0.3}``.

Exit codes: 0 success, 1 usage, 2 input/parse error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .dea import DeaParams
from .ffa import FfaConfig, ffa_cd
from .gss import GssInfeasible, GssParams, fa_gss
from .io import (
    BookshelfError,
    RunRecord,
    TrialRecord,
    fill_costs,
    load_aux,
    load_instance,
    plan_from_pl,
    render_svg,
    write_blocks,
    write_metrics_csv,
    write_nets,
    write_pl,
    write_trials_csv,
)
from .model import InstanceError, ProblemInstance, bounding_area, outline_from_ratio, total_module_area
from .objective import PenaltyWeights

log = logging.getLogger("mvfloor")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- namespaced overrides ---------------------------------------------------------

# namespace -> (dataclass, fields exposed, mapping to FfaConfig field when not nested)
_CSA_FIELDS = {"k_max": "k_max", "q": "q", "stall_limit": "stall_limit"}
_FFA_EXCLUDE = {"outline", "weights", "dea", "threads", "k_max", "q", "stall_limit", "max_generations"}
_GSS_EXCLUDE = {"ratio", "epsilon", "weights", "dea", "ffa_overrides"}


def _field_type(f: dataclasses.Field):
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    if "bool" in kind:
        return _boolean
    if "int" in kind and "float" not in kind:
        return int
    return float


def _boolean(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _override_specs() -> list[tuple[str, str, Any]]:
    """(namespace, field, converter) for every overridable constant."""
    specs = []
    ffa_fields = {f.name: f for f in dataclasses.fields(FfaConfig)}
    for name in _CSA_FIELDS:
        specs.append(("csa", name, _field_type(ffa_fields[name])))
    for f in dataclasses.fields(FfaConfig):
        if f.name not in _FFA_EXCLUDE:
            specs.append(("ffa", f.name, _field_type(f)))
    for f in dataclasses.fields(DeaParams):
        if f.name != "np":
            specs.append(("dea", f.name, _field_type(f)))
    for f in dataclasses.fields(PenaltyWeights):
        specs.append(("weights", f.name, _field_type(f)))
    for f in dataclasses.fields(GssParams):
        if f.name not in _GSS_EXCLUDE:
            specs.append(("gss", f.name, _field_type(f)))
    return specs


OVERRIDES = _override_specs()

# top-level settings shared by the batch commands, with their defaults
DEFAULTS: dict[str, Any] = {
    "aux": None,
    "blocks": None,
    "nets": None,
    "pl": None,
    "ratio": [1.0],
    "gamma": 0.15,
    "np": 5,
    "seed": 0,
    "runs": 1,
    "csv": None,
    "svg": None,
    "pl_out": None,
    "epsilon": 0.002,
    "max_generations": None,
    "threads": None,
    "timing": True,
    "pad_shift": [0.0, 0.0],
    "trials": None,
}


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("instance")
    g.add_argument("--aux", help="Bookshelf .aux file naming the .blocks/.nets/.pl trio")
    g.add_argument("--blocks", help=".blocks file")
    g.add_argument("--nets", help=".nets file")
    g.add_argument("--pl", help=".pl file with terminal positions")
    g.add_argument(
        "--pad-shift",
        dest="pad_shift",
        type=float,
        nargs=2,
        metavar=("DX", "DY"),
        help="translate all pad coordinates after reading (default: keep verbatim)",
    )


def _add_batch_flags(p: argparse.ArgumentParser, min_area: bool) -> None:
    _add_input_flags(p)
    p.add_argument("--config", help="JSON file with settings (flags take precedence)")
    p.add_argument("--ratio", type=float, action="append", help="outline aspect ratio H/W; repeatable (default 1)")
    if not min_area:
        p.add_argument("--gamma", type=float, help="whitespace ratio of the fixed outline (default 0.15)")
    else:
        p.add_argument("--epsilon", type=float, help="bracket width to stop at (default 0.002)")
        p.add_argument("--trials", help="write the per-trial golden-section log as CSV here ('-' for stdout)")
    p.add_argument("--np", type=int, help="population size (default 5)")
    p.add_argument("--seed", type=int, help="master seed; run k uses seed + k (default 0)")
    p.add_argument("--runs", type=int, help="runs per instance and ratio (default 1)")
    p.add_argument("--max-generations", dest="max_generations", type=int, help="generation budget per run")
    p.add_argument("--threads", type=int, help="worker threads per run (default: $MVFLOOR_THREADS or 1)")
    p.add_argument("--csv", help="write per-run metrics CSV here ('-' for stdout)")
    p.add_argument("--svg", help="write an SVG of the best plan of each run (directory or file)")
    p.add_argument("--pl-out", dest="pl_out", help="write a .pl of the best plan of each run (directory or file)")
    p.add_argument(
        "--no-timing",
        dest="timing",
        action="store_const",
        const=False,
        help="leave the seconds column empty so repeated runs give byte-identical CSV",
    )
    g = p.add_argument_group("parameter overrides")
    for ns, name, conv in OVERRIDES:
        if ns == "gss" and not min_area:
            continue
        flags = [f"--{ns}.{name}"]
        if "_" in name:
            flags.append(f"--{ns}.{name.replace('_', '-')}")
        g.add_argument(*flags, dest=f"{ns}.{name}", type=conv, metavar="V")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvfloor", description="Mixed-variable floorplanning of hard modules.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fixed = sub.add_parser("fixed-outline", help="wirelength under a fixed outline")
    _add_batch_flags(fixed, min_area=False)
    area = sub.add_parser("min-area", help="golden-section search for the smallest feasible outline")
    _add_batch_flags(area, min_area=True)

    st = sub.add_parser("selftest", help="run the built-in invariant checks")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--quick", action="store_true", help="smaller sample sizes")
    st.add_argument("--mutate", choices=["overlap-branch"], help=argparse.SUPPRESS)

    rd = sub.add_parser("render", help="draw a .pl placement as SVG")
    _add_input_flags(rd)
    rd.add_argument("--plan", required=True, help=".pl file with block positions to draw")
    rd.add_argument("--svg", required=True, help="output SVG path ('-' for stdout)")
    rd.add_argument("--ratio", type=float, help="draw the outline for this aspect ratio")
    rd.add_argument("--gamma", type=float, default=0.15, help="whitespace ratio of the drawn outline")

    sy = sub.add_parser("synth", help="write a seeded synthetic GSRC-like instance (not GSRC data)")
    sy.add_argument("n", type=int, help="number of blocks")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--out", required=True, help="output directory")
    sy.add_argument("--name", help="file stem (default synthN)")
    return parser


# -- settings resolution ---------------------------------------------------------


def _flatten(data: dict, prefix: str = "") -> dict[str, Any]:
    out = {}
    for key, value in data.items():
        key = key.replace("-", "_") if not prefix else key
        full = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, f"{full}."))
        else:
            out[full] = value
    return out


def _normalize_key(key: str) -> str:
    if "." in key:
        ns, name = key.split(".", 1)
        return f"{ns}.{name.replace('-', '_')}"
    return key.replace("-", "_")


def resolve_settings(args: argparse.Namespace, min_area: bool) -> dict[str, Any]:
    """Merge defaults, the optional config file and explicit flags."""
    settings = dict(DEFAULTS)
    known_overrides = {f"{ns}.{name}": conv for ns, name, conv in OVERRIDES if min_area or ns != "gss"}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise BookshelfError(f"invalid JSON: {exc}", None, str(path)) from None
        if not isinstance(data, dict):
            raise UsageError(f"{path}: top level must be an object")
        for key, value in _flatten(data).items():
            key = _normalize_key(key)
            if key == "no_timing":
                settings["timing"] = not value
            elif key in settings:
                settings[key] = value
            elif key in known_overrides:
                settings[key] = known_overrides[key](value) if isinstance(value, str) else value
            else:
                raise UsageError(f"{path}: unknown setting {key!r}")
    for key, value in vars(args).items():
        if key in ("command", "config", "verbose") or value is None:
            continue
        settings[key] = value
    if isinstance(settings["ratio"], (int, float)):
        settings["ratio"] = [settings["ratio"]]
    if settings["runs"] < 1:
        raise UsageError("--runs must be >= 1")
    if settings["np"] < 1:
        raise UsageError("--np must be >= 1")
    if any(r <= 0 for r in settings["ratio"]):
        raise UsageError("--ratio must be > 0")
    if settings["gamma"] < 0:
        raise UsageError("--gamma must be >= 0")
    if settings["epsilon"] <= 0:
        raise UsageError("--epsilon must be > 0")
    for key in ("max_generations", "threads"):
        if settings[key] is not None and settings[key] < 1:
            raise UsageError(f"--{key.replace('_', '-')} must be >= 1")
    return settings


def _overrides(settings: dict[str, Any], ns: str) -> dict[str, Any]:
    prefix = f"{ns}."
    return {k[len(prefix):]: v for k, v in settings.items() if k.startswith(prefix)}


def _weights(settings) -> PenaltyWeights:
    return PenaltyWeights(**_overrides(settings, "weights"))


def _dea(settings) -> DeaParams:
    return DeaParams(np=settings["np"], **_overrides(settings, "dea"))


def ffa_config(settings: dict[str, Any], outline) -> FfaConfig:
    options: dict[str, Any] = dict(outline=outline, weights=_weights(settings), dea=_dea(settings))
    options.update(_overrides(settings, "csa"))
    options.update(_overrides(settings, "ffa"))
    if settings["max_generations"] is not None:
        options["max_generations"] = settings["max_generations"]
    if settings["threads"] is not None:
        options["threads"] = settings["threads"]
    return FfaConfig(**options)


def gss_params(settings: dict[str, Any], ratio: float) -> GssParams:
    ffa = _overrides(settings, "csa")
    ffa.update(_overrides(settings, "ffa"))
    if settings["threads"] is not None:
        ffa["threads"] = settings["threads"]
    options: dict[str, Any] = dict(
        ratio=ratio,
        epsilon=settings["epsilon"],
        weights=_weights(settings),
        dea=_dea(settings),
        ffa_overrides=ffa,
    )
    options.update(_overrides(settings, "gss"))
    if settings["max_generations"] is not None:
        options["trial_generations"] = settings["max_generations"]
    return GssParams(**options)


# -- input / output helpers --------------------------------------------------------------


def load_input(settings: dict[str, Any]) -> ProblemInstance:
    shift = tuple(settings.get("pad_shift") or (0.0, 0.0))
    if settings.get("aux"):
        if any(settings.get(k) for k in ("blocks", "nets", "pl")):
            raise UsageError("give either --aux or --blocks/--nets/--pl, not both")
        instance, _ = load_aux(settings["aux"], shift)
        return instance
    missing = [f"--{k}" for k in ("blocks", "nets", "pl") if not settings.get(k)]
    if missing:
        raise UsageError(f"missing instance input: {' '.join(missing)} (or --aux)")
    instance, _ = load_instance(settings["blocks"], settings["nets"], settings["pl"], pad_shift=shift)
    return instance


def _artifact_path(target: str, instance: str, ratio: float, seed: int, suffix: str, many: bool) -> Path:
    path = Path(target)
    if path.is_dir() or target.endswith(("/", "\\")) or (many and path.suffix != suffix):
        path.mkdir(parents=True, exist_ok=True)
        return path / f"{instance}_R{ratio:g}_s{seed}{suffix}"
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _emit(text: str, target: str | None) -> None:
    if target is None:
        return
    if target == "-":
        sys.stdout.write(text)
        return
    path = Path(target)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _save_plan(settings, instance, plan, outline, ratio, seed, many) -> None:
    name = instance.name or "instance"
    if settings.get("svg"):
        path = _artifact_path(settings["svg"], name, ratio, seed, ".svg", many)
        path.write_text(render_svg(plan, instance, outline, title=f"{name} R={ratio:g} seed={seed}"))
    if settings.get("pl_out"):
        path = _artifact_path(settings["pl_out"], name, ratio, seed, ".pl", many)
        path.write_text(write_pl(plan, instance))


# -- commands ----------------------------------------------------------------------------


def run_fixed_outline(settings: dict[str, Any]) -> list[RunRecord]:
    instance = load_input(settings)
    area = total_module_area(instance)
    records = []
    many = settings["runs"] * len(settings["ratio"]) > 1
    for ratio in settings["ratio"]:
        outline = outline_from_ratio(area, ratio, settings["gamma"])
        config = ffa_config(settings, outline)
        for k in range(settings["runs"]):
            seed = settings["seed"] + k
            res = ffa_cd(instance, config, seed)
            log.info("%s R=%g seed=%d legal=%s hpwl=%.1f %.2fs", instance.name, ratio, seed, res.legal, res.hpwl, res.seconds)
            records.append(
                RunRecord(
                    instance=instance.name,
                    mode="fixed-outline",
                    ratio=ratio,
                    gamma=settings["gamma"],
                    seed=seed,
                    legal=res.legal,
                    hpwl=res.hpwl,
                    area=bounding_area(instance, res.plan),
                    cost=None,
                    seconds=res.seconds,
                )
            )
            _save_plan(settings, instance, res.plan, outline, ratio, seed, many)
    _emit(write_metrics_csv(records, timing=settings["timing"]), settings["csv"])
    return records


def run_min_area(settings: dict[str, Any]) -> list[RunRecord]:
    instance = load_input(settings)
    records = []
    trials: list[TrialRecord] = []
    many = settings["runs"] * len(settings["ratio"]) > 1
    for ratio in settings["ratio"]:
        params = gss_params(settings, ratio)
        for k in range(settings["runs"]):
            seed = settings["seed"] + k
            res = fa_gss(instance, params, seed)
            log.info(
                "%s R=%g seed=%d gamma=%.4f trials=%d hpwl=%.1f area=%.1f",
                instance.name, ratio, seed, res.gamma, len(res.trials), res.hpwl, res.area,
            )
            for t in res.trials:
                log.debug("  trial %d gamma=%.5f feasible=%s hpwl=%.1f area=%.1f", t.index, t.gamma, t.feasible, t.hpwl, t.area)
                trials.append(
                    TrialRecord(instance.name, ratio, seed, t.index, t.gamma, t.feasible, t.hpwl, t.area, t.generations, t.seconds)
                )
            records.append(
                RunRecord(
                    instance=instance.name,
                    mode="min-area",
                    ratio=ratio,
                    gamma=res.gamma,
                    seed=seed,
                    legal=True,
                    hpwl=res.hpwl,
                    area=res.area,
                    seconds=res.seconds,
                )
            )
            _save_plan(settings, instance, res.plan, res.outline, ratio, seed, many)
    records = fill_costs(records)
    _emit(write_metrics_csv(records, timing=settings["timing"]), settings["csv"])
    if settings["trials"] is not None:
        _emit(write_trials_csv(trials, timing=settings["timing"]), settings["trials"])
    return records


def run_selftest_command(args) -> int:
    from .selftest import format_table, run_selftest

    results = run_selftest(seed=args.seed, quick=args.quick, mutate=args.mutate)
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def run_render(args) -> int:
    settings = {k: getattr(args, k) for k in ("aux", "blocks", "nets", "pl", "pad_shift")}
    instance = load_input(settings)
    plan_path = Path(args.plan)
    if not plan_path.is_file():
        raise FileNotFoundError(f"plan file not found: {plan_path}")
    plan = plan_from_pl(plan_path.read_text(), instance, str(plan_path))
    outline = None
    if args.ratio is not None:
        outline = outline_from_ratio(total_module_area(instance), args.ratio, args.gamma)
    _emit(render_svg(plan, instance, outline, title=instance.name), args.svg)
    return EXIT_OK


def run_synth(args) -> int:
    from .synth import synthetic_instance

    instance = synthetic_instance(args.n, args.seed, name=args.name)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = instance.name
    (out / f"{stem}.blocks").write_text(write_blocks(instance))
    (out / f"{stem}.nets").write_text(write_nets(instance))
    pads = "\n".join(f"{p.name}\t{float(p.x)!r}\t{float(p.y)!r}" for p in instance.pads)
    (out / f"{stem}.pl").write_text(f"UCSC pl 1.0\n\n{pads}\n")
    (out / f"{stem}.aux").write_text(f"RowBasedPlacement : {stem}.blocks {stem}.nets {stem}.pl\n")
    print(out / f"{stem}.aux")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * args.verbose
    logging.basicConfig(level=max(level, logging.DEBUG), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fixed-outline":
            run_fixed_outline(resolve_settings(args, min_area=False))
        elif args.command == "min-area":
            run_min_area(resolve_settings(args, min_area=True))
        elif args.command == "selftest":
            return run_selftest_command(args)
        elif args.command == "render":
            return run_render(args)
        elif args.command == "synth":
            return run_synth(args)
    except UsageError as exc:
        print(f"mvfloor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, BookshelfError, InstanceError) as exc:
        print(f"mvfloor: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, TypeError) as exc:
        # invalid parameter values surface from the config dataclasses
        print(f"mvfloor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GssInfeasible, RuntimeError, OSError) as exc:
        print(f"mvfloor: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())


def main_entry() -> None:
    sys.exit(main())
