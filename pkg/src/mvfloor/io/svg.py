"""SVG 1.1 drawing of a floorplan."""

from __future__ import annotations

from xml.sax.saxutils import escape

from ..model import Floorplan, OutlineSpec, ProblemInstance, bounding_box, effective_dim_arrays


def render_svg(
    plan: Floorplan,
    instance: ProblemInstance,
    outline: OutlineSpec | None = None,
    size: float = 640.0,
    title: str | None = None,
) -> str:
    """One ``rect`` per module with its name and an orientation tick, plus an outline frame.

    The tick is a short line from the module center toward the side that the
    module's unrotated top edge faces after rotation. The y axis points up.
    """
    w, h = effective_dim_arrays(instance, plan.r)
    x0, y0, x1, y1 = bounding_box(instance, plan)
    x0, y0 = min(x0, 0.0), min(y0, 0.0)
    if outline is not None:
        x1, y1 = max(x1, outline.width), max(y1, outline.height)
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 0.03 * span
    scale = size / (span + 2 * pad)
    width = (x1 - x0 + 2 * pad) * scale
    height = (y1 - y0 + 2 * pad) * scale

    def sx(x):
        return (x - x0 + pad) * scale

    def sy(y):
        return height - (y - y0 + pad) * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2f}" height="{height:.2f}" '
        f'viewBox="0 0 {width:.2f} {height:.2f}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    if outline is not None:
        out.append(
            f'<rect class="outline" x="{sx(0):.2f}" y="{sy(outline.height):.2f}" '
            f'width="{outline.width * scale:.2f}" height="{outline.height * scale:.2f}" '
            'fill="none" stroke="#c00" stroke-width="1.5" stroke-dasharray="6 3"/>'
        )
    font = max(6.0, min(12.0, 0.02 * size))
    # direction of the unrotated "up" after r clockwise quarter turns
    up = {0: (0, 1), 1: (1, 0), 2: (0, -1), 3: (-1, 0)}
    for m in instance.modules:
        i = m.id
        left, bottom = plan.x[i] - w[i] / 2, plan.y[i] - h[i] / 2
        out.append(
            f'<rect class="module" x="{sx(left):.2f}" y="{sy(bottom + h[i]):.2f}" '
            f'width="{w[i] * scale:.2f}" height="{h[i] * scale:.2f}" '
            'fill="#9cc3e6" fill-opacity="0.7" stroke="#1f4e79" stroke-width="1"/>'
        )
        dx, dy = up[int(plan.r[i])]
        reach = 0.4 * min(w[i], h[i])
        out.append(
            f'<line class="tick" x1="{sx(plan.x[i]):.2f}" y1="{sy(plan.y[i]):.2f}" '
            f'x2="{sx(plan.x[i] + dx * reach):.2f}" y2="{sy(plan.y[i] + dy * reach):.2f}" '
            'stroke="#1f4e79" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{sx(plan.x[i]):.2f}" y="{sy(plan.y[i]) + font:.2f}" font-size="{font:.1f}" '
            f'text-anchor="middle" font-family="sans-serif">{escape(m.name or str(i))}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
