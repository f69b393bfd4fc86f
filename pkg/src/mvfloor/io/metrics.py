"""Per-run metrics as CSV, with a success-rate summary row per group."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

HEADER = ("instance", "mode", "R", "gamma", "seed", "legal", "hpwl", "area", "cost", "seconds")
TRIAL_HEADER = ("instance", "R", "seed", "trial", "gamma", "feasible", "hpwl", "area", "generations", "seconds")
SUMMARY_SEED = "SR"


@dataclass(frozen=True)
class RunRecord:
    instance: str
    mode: str
    ratio: float
    gamma: float
    seed: int
    legal: bool
    hpwl: float
    area: float
    cost: float | None = None
    seconds: float | None = None


def _num(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def _seconds(value: float | None, timing: bool) -> str:
    if not timing or value is None:
        return ""
    return f"{value:.2f}"


def success_rate(records: Sequence[RunRecord]) -> float:
    """Percentage of legal runs."""
    if not records:
        raise ValueError("success rate of an empty group")
    return 100.0 * sum(r.legal for r in records) / len(records)


def _relative(value: float, best: float) -> float:
    # a netless instance has zero wirelength everywhere; treat 0 / 0 as a perfect ratio
    if best == 0:
        return 1.0 if value == 0 else math.inf
    return value / best


def fill_costs(records: Sequence[RunRecord]) -> list[RunRecord]:
    """Cost of every legal run relative to the best HPWL and area of its instance in this batch."""
    best: dict[str, tuple[float, float]] = {}
    for r in records:
        if r.legal:
            w, s = best.get(r.instance, (math.inf, math.inf))
            best[r.instance] = (min(w, r.hpwl), min(s, r.area))
    out = []
    for r in records:
        if r.legal and r.instance in best:
            w_min, s_min = best[r.instance]
            out.append(replace(r, cost=0.5 * _relative(r.hpwl, w_min) + 0.5 * _relative(r.area, s_min)))
        else:
            out.append(r)
    return out


def _mean(values: Iterable[float]) -> float | None:
    vals = list(values)
    return sum(vals) / len(vals) if vals else None


def write_metrics_csv(records: Sequence[RunRecord], timing: bool = True, summary: bool = True) -> str:
    """CSV text: one row per run, then (optionally) one ``SR`` row per (instance, mode, R) group.

    In a summary row ``legal`` holds the success rate in percent and
    ``hpwl``/``area``/``cost`` are means over the legal runs. Absent values
    are empty cells, never 0.
    """
    if not records:
        raise ValueError("no run records")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    groups: dict[tuple[str, str, float], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.instance, r.mode, r.ratio), []).append(r)
        writer.writerow(
            [
                r.instance,
                r.mode,
                _num(r.ratio),
                _num(r.gamma),
                str(r.seed),
                "1" if r.legal else "0",
                _num(r.hpwl),
                _num(r.area),
                _num(r.cost),
                _seconds(r.seconds, timing),
            ]
        )
    if summary:
        for (inst, mode, ratio), rows in groups.items():
            legal = [r for r in rows if r.legal]
            costs = [r.cost for r in legal if r.cost is not None]
            writer.writerow(
                [
                    inst,
                    mode,
                    _num(ratio),
                    _num(_mean(r.gamma for r in rows)),
                    SUMMARY_SEED,
                    _num(success_rate(rows)),
                    _num(_mean(r.hpwl for r in legal)),
                    _num(_mean(r.area for r in legal)),
                    _num(_mean(costs)),
                    _seconds(_mean(r.seconds for r in rows if r.seconds is not None), timing),
                ]
            )
    return buf.getvalue()


@dataclass(frozen=True)
class TrialRecord:
    """One golden-section trial: the whitespace ratio tried and what the inner loop returned."""

    instance: str
    ratio: float
    seed: int
    trial: int
    gamma: float
    feasible: bool
    hpwl: float
    area: float
    generations: int
    seconds: float | None = None


def write_trials_csv(records: Sequence[TrialRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRIAL_HEADER)
    for t in records:
        writer.writerow(
            [
                t.instance,
                _num(t.ratio),
                str(t.seed),
                str(t.trial),
                _num(t.gamma),
                "1" if t.feasible else "0",
                _num(t.hpwl),
                _num(t.area),
                str(t.generations),
                _seconds(t.seconds, timing),
            ]
        )
    return buf.getvalue()


def read_metrics_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))
