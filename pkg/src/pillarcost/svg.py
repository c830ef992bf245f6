"""Deterministic SVG scatter plots of mAP versus GMAdd.

The output is plain text with no timestamps, random ids or environment
dependence: identical inputs produce byte-identical documents.
"""
from __future__ import annotations

from fractions import Fraction

from .analysis import DesignPoint, map_of, pareto_front, round2

WIDTH = 800
HEIGHT = 600
MARGIN_L = 70
MARGIN_R = 25
MARGIN_T = 45
MARGIN_B = 55

_POINT_STYLE = 'fill="#4878a8" stroke="none"'
_FRONT_STYLE = 'fill="#d05030" stroke="#802010" stroke-width="2"'


def _fmt(value: float) -> str:
    # fixed decimals keep coordinates stable across platforms
    return f"{value:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    step = 1.0
    while step < raw:
        step *= 10.0
    while step / 10.0 >= raw:
        step /= 10.0
    if step / 2.0 >= raw:
        step /= 2.0
    first = int(lo / step) * step
    ticks = []
    value = first
    while value <= hi + step / 2:
        if value >= lo - step / 2:
            ticks.append(round(value, 10))
        value += step
    return ticks


def render_scatter(points: list[DesignPoint], scope: str = "overall",
                   front: list[str] | None = None) -> str:
    """Render labeled design points, highlighting the Pareto front."""
    if front is None:
        front = pareto_front(points, scope)
    front_set = set(front)
    coords = [(float(p.gmadds), float(map_of(p, scope)), p.name) for p in points]

    xs = [c[0] for c in coords]
    ys = [c[1] for c in coords]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_pad = (x_hi - x_lo) * 0.08 or 1.0
    y_pad = (y_hi - y_lo) * 0.08 or 1.0
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x: float) -> float:
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h

    title = "mAP (%s) vs multiply-add operations" % (
        "overall" if scope == "overall" else scope)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH // 2}" y="25" text-anchor="middle" '
        f'font-family="sans-serif" font-size="18">{title}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#404040"/>',
    ]

    for tick in _nice_ticks(x_lo, x_hi):
        px = sx(tick)
        lines.append(
            f'<line x1="{_fmt(px)}" y1="{MARGIN_T}" x2="{_fmt(px)}" '
            f'y2="{MARGIN_T + plot_h}" stroke="#d8d8d8"/>')
        lines.append(
            f'<text x="{_fmt(px)}" y="{MARGIN_T + plot_h + 20}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f'{_fmt(tick)}</text>')
    for tick in _nice_ticks(y_lo, y_hi):
        py = sy(tick)
        lines.append(
            f'<line x1="{MARGIN_L}" y1="{_fmt(py)}" x2="{MARGIN_L + plot_w}" '
            f'y2="{_fmt(py)}" stroke="#d8d8d8"/>')
        lines.append(
            f'<text x="{MARGIN_L - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{_fmt(tick)}</text>')

    lines.append(
        f'<text x="{MARGIN_L + plot_w // 2}" y="{HEIGHT - 12}" '
        'text-anchor="middle" font-family="sans-serif" font-size="14">'
        'GMAdd (10^9 multiply-add operations)</text>')
    lines.append(
        f'<text x="18" y="{MARGIN_T + plot_h // 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14" '
        f'transform="rotate(-90 18 {MARGIN_T + plot_h // 2})">mAP [%]</text>')

    for x, y, name in sorted(coords, key=lambda c: (c[0], c[2])):
        style = _FRONT_STYLE if name in front_set else _POINT_STYLE
        lines.append(
            f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="6" {style}/>')
        lines.append(
            f'<text x="{_fmt(sx(x) + 9)}" y="{_fmt(sy(y) - 7)}" '
            f'font-family="sans-serif" font-size="12">{name} '
            f'({_fmt(round2(Fraction(str(y))))})</text>')

    lines.append("</svg>")
    return "\n".join(lines) + "\n"
