"""Reader and writer for the Bookshelf floorplanning files (.blocks, .nets, .pl, .aux).

Only hard rectangular blocks are accepted. Every rejection raises
:class:`BookshelfError` carrying the source name and line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from ..model import (
    Floorplan,
    InstanceError,
    Module,
    Net,
    Pad,
    Pin,
    ProblemInstance,
    centers_from_lower_left,
    lower_left,
)

ORIENT_TO_CODE = {"N": 0, "E": 1, "S": 2, "W": 3}
CODE_TO_ORIENT = {v: k for k, v in ORIENT_TO_CODE.items()}

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_VERTEX = re.compile(rf"\(\s*({_NUM})\s*,\s*({_NUM})\s*\)")
_COUNT = re.compile(r"^(\w+)\s*:\s*(\d+)\s*$")
_DEGREE = re.compile(r"^NetDegree\s*:\s*(\d+)(?:\s+(\S+))?\s*$")
_OFFSET = re.compile(rf"^%\s*({_NUM})\s+%\s*({_NUM})$")


class BookshelfError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<text>"):
        self.message = message
        self.line = line
        self.source = source
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class BlocksData:
    modules: tuple[Module, ...]
    terminals: tuple[str, ...]


@dataclass(frozen=True)
class PlEntry:
    x: float
    y: float
    orient: str | None = None
    line: int = 0


@dataclass(frozen=True)
class BenchmarkFiles:
    blocks: Path
    nets: Path
    pl: Path
    aux: Path | None = None

    def check(self) -> None:
        for path in (self.blocks, self.nets, self.pl):
            if not path.is_file():
                raise FileNotFoundError(f"benchmark file not found: {path}")


def _lines(text: str):
    """Yield (line number, stripped content), dropping blanks, comments and format headers."""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith(("UCSC", "UCLA")):
            continue
        yield number, line


def _float(token: str, number: int, source: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise BookshelfError(f"invalid {what} {token!r}", number, source) from None


# -- .blocks ------------------------------------------------------------------


def _rectangle(vertices, number: int, source: str, name: str) -> tuple[float, float]:
    xs = sorted({x for x, _ in vertices})
    ys = sorted({y for _, y in vertices})
    corners = {(x, y) for x in xs for y in ys}
    if len(xs) != 2 or len(ys) != 2 or set(vertices) != corners:
        raise BookshelfError(f"block {name}: vertices do not form an axis-aligned rectangle", number, source)
    return xs[1] - xs[0], ys[1] - ys[0]


def parse_blocks(text: str, source: str = "<blocks>") -> BlocksData:
    counts: dict[str, tuple[int, int]] = {}
    modules: list[Module] = []
    terminals: list[str] = []
    seen: set[str] = set()
    for number, line in _lines(text):
        m = _COUNT.match(line)
        if m:
            counts[m.group(1)] = (int(m.group(2)), number)
            continue
        parts = line.split(None, 2)
        if len(parts) < 2:
            raise BookshelfError(f"cannot parse block line {line!r}", number, source)
        name, kind = parts[0], parts[1]
        if name in seen:
            raise BookshelfError(f"duplicate block name {name!r}", number, source)
        seen.add(name)
        if kind == "terminal":
            terminals.append(name)
        elif kind == "hardrectilinear":
            rest = parts[2] if len(parts) > 2 else ""
            head = rest.split("(", 1)[0].strip()
            vertices = [(float(a), float(b)) for a, b in _VERTEX.findall(rest)]
            if not head.isdigit():
                raise BookshelfError(f"block {name}: missing vertex count", number, source)
            if int(head) != len(vertices) or _VERTEX.sub("", rest[len(head):]).strip():
                raise BookshelfError(
                    f"block {name}: malformed vertex list (declared {head}, parsed {len(vertices)})", number, source
                )
            if len(vertices) != 4:
                raise BookshelfError(
                    f"block {name}: only rectangular hard blocks are supported, got {len(vertices)} vertices",
                    number,
                    source,
                )
            w, h = _rectangle(vertices, number, source, name)
            if w <= 0 or h <= 0:
                raise BookshelfError(f"block {name}: degenerate rectangle {w}x{h}", number, source)
            modules.append(Module(len(modules), w, h, name))
        elif kind.startswith("soft"):
            raise BookshelfError(f"block {name}: soft blocks are not supported", number, source)
        else:
            raise BookshelfError(f"block {name}: unknown block type {kind!r}", number, source)

    for key, found in (("NumHardRectilinearBlocks", len(modules)), ("NumTerminals", len(terminals))):
        if key in counts and counts[key][0] != found:
            declared, number = counts[key]
            raise BookshelfError(f"{key} declares {declared} but {found} were parsed", number, source)
    if "NumSoftRectangularBlocks" in counts and counts["NumSoftRectangularBlocks"][0] != 0:
        raise BookshelfError("soft blocks are not supported", counts["NumSoftRectangularBlocks"][1], source)
    if not modules:
        raise BookshelfError("no hard blocks found", None, source)
    return BlocksData(tuple(modules), tuple(terminals))


# -- .pl ----------------------------------------------------------------------


def parse_pl(text: str, source: str = "<pl>") -> dict[str, PlEntry]:
    """Map of object name to its (lower-left for blocks, verbatim for pads) position."""
    out: dict[str, PlEntry] = {}
    for number, line in _lines(text):
        body, _, tail = line.partition(":")
        parts = body.split()
        if len(parts) != 3:
            raise BookshelfError(f"expected 'name x y', got {line!r}", number, source)
        name = parts[0]
        x = _float(parts[1], number, source, "x coordinate")
        y = _float(parts[2], number, source, "y coordinate")
        orient = None
        tail_parts = tail.split()
        if tail_parts:
            orient = tail_parts[0]
            if orient not in ORIENT_TO_CODE:
                raise BookshelfError(f"unsupported orientation {orient!r}", number, source)
        if name in out:
            raise BookshelfError(f"duplicate placement for {name!r}", number, source)
        out[name] = PlEntry(x, y, orient, number)
    return out


# -- .nets --------------------------------------------------------------------


def parse_nets(
    text: str,
    modules: Mapping[str, int],
    pads: Mapping[str, int],
    source: str = "<nets>",
) -> tuple[Net, ...]:
    """Nets resolved against module and pad name tables.

    Pin lines are ``name dir`` with an optional ``: %x %y`` offset in percent
    of the block's half extent.
    """
    counts: dict[str, tuple[int, int]] = {}
    nets: list[Net] = []
    current: list[Pin] | None = None
    expected = 0
    header = 0
    name = ""
    total_pins = 0

    def close() -> None:
        if current is None:
            return
        if len(current) != expected:
            raise BookshelfError(
                f"net {len(nets)} ({name}) declares degree {expected} but lists {len(current)} pins", header, source
            )
        try:
            nets.append(Net(tuple(current), name))
        except InstanceError as exc:
            raise BookshelfError(f"net {len(nets)}: {exc}", header, source) from None

    for number, line in _lines(text):
        deg = _DEGREE.match(line)
        if deg:
            close()
            current, expected, header = [], int(deg.group(1)), number
            name = deg.group(2) or f"net{len(nets)}"
            continue
        m = _COUNT.match(line)
        if m and m.group(1) in ("NumNets", "NumPins"):
            counts[m.group(1)] = (int(m.group(2)), number)
            continue
        if current is None:
            raise BookshelfError(f"pin line before any NetDegree: {line!r}", number, source)
        body, colon, tail = line.partition(":")
        parts = body.split()
        if not parts or len(parts) > 2:
            raise BookshelfError(f"cannot parse pin line {line!r}", number, source)
        ref = parts[0]
        offset = (0.0, 0.0)
        if colon:
            om = _OFFSET.match(tail.strip())
            if not om:
                raise BookshelfError(f"pin offset must read '%x %y', got {tail.strip()!r}", number, source)
            offset = (float(om.group(1)), float(om.group(2)))
        if ref in modules:
            current.append(Pin(modules[ref], False, offset))
        elif ref in pads:
            current.append(Pin(pads[ref], True))
        else:
            raise BookshelfError(f"net {len(nets)} ({name}) names undeclared block or terminal {ref!r}", number, source)
        total_pins += 1
    close()

    if "NumNets" in counts and counts["NumNets"][0] != len(nets):
        raise BookshelfError(f"NumNets declares {counts['NumNets'][0]} but {len(nets)} were parsed", counts["NumNets"][1], source)
    if "NumPins" in counts and counts["NumPins"][0] != total_pins:
        raise BookshelfError(f"NumPins declares {counts['NumPins'][0]} but {total_pins} were parsed", counts["NumPins"][1], source)
    return tuple(nets)


# -- assembly -----------------------------------------------------------------


def build_instance(
    blocks_text: str,
    nets_text: str,
    pl_text: str,
    name: str = "",
    sources: tuple[str, str, str] = ("<blocks>", "<nets>", "<pl>"),
    pad_shift: tuple[float, float] = (0.0, 0.0),
) -> tuple[ProblemInstance, Floorplan | None]:
    """Instance plus the module placement found in the .pl text, if it places every block.

    Pads are the terminals of the .blocks file followed by any further
    non-block names in the .pl file, in file order. Pad coordinates are kept
    verbatim and then translated by ``pad_shift``.
    """
    blocks = parse_blocks(blocks_text, sources[0])
    placement = parse_pl(pl_text, sources[2])
    module_ids = {m.name: m.id for m in blocks.modules}
    pad_names = list(blocks.terminals)
    pad_names += [k for k in placement if k not in module_ids and k not in set(blocks.terminals)]
    pads = []
    for k, pname in enumerate(pad_names):
        if pname not in placement:
            raise BookshelfError(f"terminal {pname!r} has no position in the placement file", None, sources[2])
        entry = placement[pname]
        pads.append(Pad(k, entry.x + pad_shift[0], entry.y + pad_shift[1], pname))
    nets = parse_nets(nets_text, module_ids, {p: k for k, p in enumerate(pad_names)}, sources[1])
    instance = ProblemInstance(blocks.modules, tuple(pads), nets, name)

    seeds = None
    if all(m.name in placement for m in blocks.modules):
        entries = [placement[m.name] for m in blocks.modules]
        r = [ORIENT_TO_CODE[e.orient] if e.orient else 0 for e in entries]
        seeds = centers_from_lower_left(instance, [e.x for e in entries], [e.y for e in entries], r)
    return instance, seeds


def load_instance(
    blocks: str | Path,
    nets: str | Path,
    pl: str | Path,
    name: str | None = None,
    pad_shift: tuple[float, float] = (0.0, 0.0),
) -> tuple[ProblemInstance, Floorplan | None]:
    files = BenchmarkFiles(Path(blocks), Path(nets), Path(pl))
    files.check()
    return build_instance(
        files.blocks.read_text(),
        files.nets.read_text(),
        files.pl.read_text(),
        name if name is not None else files.blocks.stem,
        (str(files.blocks), str(files.nets), str(files.pl)),
        pad_shift,
    )


def parse_aux(text: str, base: str | Path = ".", source: str = "<aux>") -> BenchmarkFiles:
    """Resolve the .blocks/.nets/.pl names listed after the colon of an .aux file."""
    base = Path(base)
    for number, line in _lines(text):
        _, colon, names = line.partition(":")
        if not colon:
            continue
        found: dict[str, Path] = {}
        for token in names.split():
            suffix = Path(token).suffix
            if suffix in (".blocks", ".nets", ".pl"):
                found[suffix] = base / token
        missing = [s for s in (".blocks", ".nets", ".pl") if s not in found]
        if missing:
            raise BookshelfError(f"aux file does not name a {', '.join(missing)} file", number, source)
        return BenchmarkFiles(found[".blocks"], found[".nets"], found[".pl"])
    raise BookshelfError("no file list found", None, source)


def load_aux(path: str | Path, pad_shift: tuple[float, float] = (0.0, 0.0)):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"benchmark file not found: {path}")
    files = parse_aux(path.read_text(), path.parent, str(path))
    return load_instance(files.blocks, files.nets, files.pl, path.stem, pad_shift)


# -- writing ------------------------------------------------------------------


def write_pl(plan: Floorplan, instance: ProblemInstance) -> str:
    """Placement text with lower-left block corners and orientations; pads follow verbatim."""
    xl, yl = lower_left(instance, plan)
    lines = ["UCSC pl 1.0", ""]
    for m in instance.modules:
        i = m.id
        lines.append(f"{m.name}\t{float(xl[i])!r}\t{float(yl[i])!r}\t: {CODE_TO_ORIENT[int(plan.r[i])]}")
    for p in instance.pads:
        lines.append(f"{p.name}\t{float(p.x)!r}\t{float(p.y)!r}")
    return "\n".join(lines) + "\n"


def plan_from_pl(text: str, instance: ProblemInstance, source: str = "<pl>") -> Floorplan:
    """Module placement from .pl text; every block must be present."""
    placement = parse_pl(text, source)
    missing = [m.name for m in instance.modules if m.name not in placement]
    if missing:
        raise BookshelfError(f"placement lacks {len(missing)} block(s), first {missing[0]!r}", None, source)
    entries = [placement[m.name] for m in instance.modules]
    r = [ORIENT_TO_CODE[e.orient] if e.orient else 0 for e in entries]
    return centers_from_lower_left(instance, [e.x for e in entries], [e.y for e in entries], r)


def write_blocks(instance: ProblemInstance) -> str:
    lines = [
        "UCSC blocks 1.0",
        "",
        "NumSoftRectangularBlocks : 0",
        f"NumHardRectilinearBlocks : {instance.n}",
        f"NumTerminals : {len(instance.pads)}",
        "",
    ]
    for m in instance.modules:
        w, h = m.width, m.height
        lines.append(f"{m.name} hardrectilinear 4 (0, 0) (0, {h:g}) ({w:g}, {h:g}) ({w:g}, 0)")
    lines.append("")
    lines += [f"{p.name} terminal" for p in instance.pads]
    return "\n".join(lines) + "\n"


def write_nets(instance: ProblemInstance) -> str:
    pins = sum(len(net.pins) for net in instance.nets)
    lines = ["UCLA nets 1.0", "", f"NumNets : {len(instance.nets)}", f"NumPins : {pins}"]
    for net in instance.nets:
        lines.append(f"NetDegree : {len(net.pins)}")
        for pin in net.pins:
            if pin.is_pad:
                lines.append(f"{instance.pads[pin.ref].name} B")
            elif pin.offset != (0.0, 0.0):
                lines.append(f"{instance.modules[pin.ref].name} B : %{pin.offset[0]!r} %{pin.offset[1]!r}")
            else:
                lines.append(f"{instance.modules[pin.ref].name} B")
    return "\n".join(lines) + "\n"
