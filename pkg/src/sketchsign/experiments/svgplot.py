"""Tiny SVG polyline plotter: readable comparison curves, no plot runtime.

Output is deterministic for identical input (coordinates are printed with
fixed precision), so plots regenerated from the same CSV are byte-equal.
"""

from __future__ import annotations

import math

__all__ = ["render_line_svg"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64.0, 16.0, 34.0, 44.0


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1.0, 2.0, 5.0, 10.0) if s * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


def _decade_ticks(lo: float, hi: float) -> list[float]:
    ticks = []
    e = math.floor(math.log10(lo))
    while 10.0**e <= hi * (1 + 1e-12):
        if 10.0**e >= lo * (1 - 1e-12):
            ticks.append(10.0**e)
        e += 1
    return ticks or [lo]


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def render_line_svg(
    series: list[tuple[str, list[float], list[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    ylog: bool = False,
    width: int = 720,
    height: int = 440,
) -> str:
    """Render labeled (x, y) polylines; ylog drops non-positive y values."""
    pts = []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y) and (not ylog or y > 0):
                pts.append((x, y))
    if not pts:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(p[0] for p in pts), max(p[0] for p in pts)
    y_lo, y_hi = min(p[1] for p in pts), max(p[1] for p in pts)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + (abs(y_lo) or 1.0)

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        if ylog:
            frac = (math.log10(y) - math.log10(y_lo)) / (
                math.log10(y_hi) - math.log10(y_lo)
            )
        else:
            frac = (y - y_lo) / (y_hi - y_lo)
        return _MARGIN_T + (1.0 - frac) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#444444"/>',
    ]
    if title:
        out.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-size="13" fill="#111111">{title}</text>'
        )

    for t in _nice_ticks(x_lo, x_hi):
        px = sx(t)
        out.append(
            f'<line x1="{px:.2f}" y1="{_MARGIN_T + plot_h:.2f}" x2="{px:.2f}" '
            f'y2="{_MARGIN_T + plot_h + 4:.2f}" stroke="#444444"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{_MARGIN_T + plot_h + 16:.2f}" '
            f'text-anchor="middle" fill="#333333">{_fmt(t)}</text>'
        )
    y_ticks = _decade_ticks(y_lo, y_hi) if ylog else _nice_ticks(y_lo, y_hi)
    for t in y_ticks:
        py = sy(t)
        out.append(
            f'<line x1="{_MARGIN_L - 4:.2f}" y1="{py:.2f}" x2="{_MARGIN_L:.2f}" '
            f'y2="{py:.2f}" stroke="#444444"/>'
        )
        label = f"1e{round(math.log10(t))}" if ylog else _fmt(t)
        out.append(
            f'<text x="{_MARGIN_L - 7:.2f}" y="{py + 3.5:.2f}" '
            f'text-anchor="end" fill="#333333">{label}</text>'
        )
    if xlabel:
        out.append(
            f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{height - 10}" '
            f'text-anchor="middle" fill="#111111">{xlabel}</text>'
        )
    if ylabel:
        cy = _MARGIN_T + plot_h / 2
        out.append(
            f'<text x="14" y="{cy:.1f}" text-anchor="middle" fill="#111111" '
            f'transform="rotate(-90 14 {cy:.1f})">{ylabel}</text>'
        )

    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        coords = [
            f"{sx(x):.2f},{sy(y):.2f}"
            for x, y in zip(xs, ys)
            if math.isfinite(x) and math.isfinite(y) and (not ylog or y > 0)
        ]
        if coords:
            out.append(
                f'<polyline points="{" ".join(coords)}" fill="none" '
                f'stroke="{color}" stroke-width="1.6"/>'
            )
        ly = _MARGIN_T + 14 + 15 * i
        lx = _MARGIN_L + plot_w - 150
        out.append(
            f'<line x1="{lx:.1f}" y1="{ly - 4:.1f}" x2="{lx + 18:.1f}" '
            f'y2="{ly - 4:.1f}" stroke="{color}" stroke-width="2"/>'
        )
        out.append(f'<text x="{lx + 23:.1f}" y="{ly:.1f}" fill="#111111">{label}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
