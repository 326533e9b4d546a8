"""Minimal deterministic SVG line plots, no external dependencies.

The output is a pure function of the inputs: same series, same bytes.
Intended for quick visual inspection of experiment tables and simulated
paths, not for publication graphics.
"""

from __future__ import annotations

import math

__all__ = ["emit_svg"]

_PALETTE = (
    "#1f6fb2",
    "#c24d2c",
    "#3a7d44",
    "#7b4fa6",
    "#b08b2e",
    "#5b5b5b",
)

_MARGIN_LEFT = 64.0
_MARGIN_RIGHT = 16.0
_MARGIN_TOP = 34.0
_MARGIN_BOTTOM = 46.0


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if not hi > lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = 10.0 * mag
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _esc(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def emit_svg(
    series,
    *,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    width: int = 720,
    height: int = 440,
    step: bool = False,
    description: str = "",
) -> str:
    """Render labeled (x, y) series as a self-contained SVG document.

    `series` is a list of (label, points) pairs, points an iterable of
    (x, y). With step=True each series is drawn as a right-continuous
    staircase (the value holds until the next point), which is the correct
    rendering for jump processes sampled at their jump times.

    Raises ValueError when no series or an empty series is supplied.
    """
    series = list(series)
    if not series:
        raise ValueError("need at least one series")
    cleaned = []
    for label, points in series:
        pts = [(float(x), float(y)) for x, y in points]
        if not pts:
            raise ValueError(f"series {label!r} has no points")
        for x, y in pts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"series {label!r} has non-finite points")
        cleaned.append((str(label), pts))

    x_lo = min(x for _, pts in cleaned for x, _ in pts)
    x_hi = max(x for _, pts in cleaned for x, _ in pts)
    y_lo = min(y for _, pts in cleaned for _, y in pts)
    y_hi = max(y for _, pts in cleaned for _, y in pts)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad_y = 0.05 * (y_hi - y_lo)
    y_lo -= pad_y
    y_hi += pad_y

    plot_w = width - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM

    def sx(x: float) -> float:
        return _MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return _MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}" '
        f'font-family="sans-serif" font-size="12">'
    )
    if description:
        out.append(f"<desc>{_esc(description)}</desc>")
    out.append(f'<rect width="{width}" height="{height}" fill="#ffffff"/>')
    out.append(
        f'<rect x="{_fmt(_MARGIN_LEFT)}" y="{_fmt(_MARGIN_TOP)}" '
        f'width="{_fmt(plot_w)}" height="{_fmt(plot_h)}" fill="none" '
        f'stroke="#444444" stroke-width="1"/>'
    )
    if title:
        out.append(
            f'<text x="{_fmt(width / 2)}" y="20" text-anchor="middle" '
            f'font-size="14">{_esc(title)}</text>'
        )

    for tick in _nice_ticks(x_lo, x_hi):
        if not x_lo <= tick <= x_hi:
            continue
        px = sx(tick)
        out.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(_MARGIN_TOP)}" '
            f'x2="{_fmt(px)}" y2="{_fmt(_MARGIN_TOP + plot_h)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(_MARGIN_TOP + plot_h)}" '
            f'x2="{_fmt(px)}" y2="{_fmt(_MARGIN_TOP + plot_h + 5)}" '
            f'stroke="#444444" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{_fmt(_MARGIN_TOP + plot_h + 18)}" '
            f'text-anchor="middle">{tick:g}</text>'
        )
    for tick in _nice_ticks(y_lo, y_hi):
        if not y_lo <= tick <= y_hi:
            continue
        py = sy(tick)
        out.append(
            f'<line x1="{_fmt(_MARGIN_LEFT)}" y1="{_fmt(py)}" '
            f'x2="{_fmt(_MARGIN_LEFT + plot_w)}" y2="{_fmt(py)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<line x1="{_fmt(_MARGIN_LEFT - 5)}" y1="{_fmt(py)}" '
            f'x2="{_fmt(_MARGIN_LEFT)}" y2="{_fmt(py)}" '
            f'stroke="#444444" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(_MARGIN_LEFT - 8)}" y="{_fmt(py + 4)}" '
            f'text-anchor="end">{tick:g}</text>'
        )
    if x_label:
        out.append(
            f'<text x="{_fmt(_MARGIN_LEFT + plot_w / 2)}" '
            f'y="{_fmt(height - 10.0)}" text-anchor="middle">'
            f"{_esc(x_label)}</text>"
        )
    if y_label:
        cx = 16.0
        cy = _MARGIN_TOP + plot_h / 2
        out.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" text-anchor="middle" '
            f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">'
            f"{_esc(y_label)}</text>"
        )

    for idx, (label, pts) in enumerate(cleaned):
        color = _PALETTE[idx % len(_PALETTE)]
        if step and len(pts) > 1:
            walked = [pts[0]]
            for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
                walked.append((x1, y0))
                walked.append((x1, y1))
            pts = walked
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )

    legend_x = _MARGIN_LEFT + plot_w - 150.0
    legend_y = _MARGIN_TOP + 10.0
    for idx, (label, _) in enumerate(cleaned):
        color = _PALETTE[idx % len(_PALETTE)]
        ly = legend_y + 16.0 * idx
        out.append(
            f'<line x1="{_fmt(legend_x)}" y1="{_fmt(ly)}" '
            f'x2="{_fmt(legend_x + 22)}" y2="{_fmt(ly)}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{_fmt(legend_x + 28)}" y="{_fmt(ly + 4)}">'
            f"{_esc(label)}</text>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
