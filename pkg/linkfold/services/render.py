"""Deterministic SVG drawings of configurations."""
from typing import Iterable, Optional, Sequence

from linkfold.services.linkage import Configuration

GADGET_STROKE = "#c0392b"
BASE_STROKE = "#7f8c8d"
JOINT_FILL = "#2c3e50"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def render_svg(
    config: Configuration,
    highlight_bars: Iterable[int] = (),
    width: int = 480,
    title: Optional[str] = None,
) -> str:
    """Bars as lines (highlighted bars in red), joints as dots, y pointing up."""
    pts = config.points()
    xs = [p[0] for p in pts]
    ys = [-p[1] for p in pts]
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1e-9)
    pad = 0.05 * span
    x0, y0 = min(xs) - pad, min(ys) - pad
    w, h = max(xs) - min(xs) + 2 * pad, max(ys) - min(ys) + 2 * pad
    height = max(1, int(round(width * h / w)))
    stroke = 0.006 * span
    dot = 0.012 * span
    highlight = set(highlight_bars)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}">'
    ]
    if title:
        out.append(f"  <title>{title}</title>")
    n = len(pts)
    for i in range(n):
        (ax, ay), (bx, by) = pts[i], pts[(i + 1) % n]
        color = GADGET_STROKE if i in highlight else BASE_STROKE
        out.append(
            f'  <line x1="{_fmt(ax)}" y1="{_fmt(-ay)}" x2="{_fmt(bx)}" y2="{_fmt(-by)}" '
            f'stroke="{color}" stroke-width="{_fmt(stroke)}" stroke-linecap="round"/>'
        )
    for x, y in pts:
        out.append(f'  <circle cx="{_fmt(x)}" cy="{_fmt(-y)}" r="{_fmt(dot)}" fill="{JOINT_FILL}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def gadget_bars(edge_index_triples: Sequence[Sequence[int]]) -> set:
    return {e for triple in edge_index_triples for e in triple}
