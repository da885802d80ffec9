"""Minimal static SVG line charts.

The solver's optional plot output only needs a handful of curves on a
labeled pair of axes, so this module hand-rolls the markup instead of
pulling in a plotting stack.  Output is a pure function of the input
series: no timestamps, random ids, or locale-dependent formatting, which
keeps the bytes reproducible across runs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidData

__all__ = ["line_chart"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f")

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 34, 46


def _fmt(value: float) -> str:
    """Compact coordinate/tick text with a dot decimal separator."""
    out = f"{value:.6g}"
    return "0" if out == "-0" else out


def _ticks(lo: float, hi: float, target: int = 6) -> list:
    """Round tick positions covering [lo, hi] with a 1-2-5 step."""
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if mult * mag >= raw:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def line_chart(series, title: str = "", x_label: str = "",
               y_label: str = "", width: int = 720,
               height: int = 480) -> str:
    """Render labeled (x, y) polylines as an SVG document string.

    ``series`` is a sequence of (label, x_values, y_values) triples drawn
    in order with a fixed palette; a legend appears when any label is
    non-empty.  Raises InvalidData on empty or ragged input.
    """
    if not series:
        raise InvalidData("line_chart needs at least one series")
    cleaned = []
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.shape != ys.shape:
            raise InvalidData(
                f"series {label!r} needs matching 1-D arrays of length >= 2")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise InvalidData(f"series {label!r} contains non-finite values")
        cleaned.append((str(label), xs, ys))

    x_lo = min(float(xs.min()) for _, xs, _ in cleaned)
    x_hi = max(float(xs.max()) for _, xs, _ in cleaned)
    y_lo = min(float(ys.min()) for _, _, ys in cleaned)
    y_hi = max(float(ys.max()) for _, _, ys in cleaned)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        pad = 1.0 if y_lo == 0.0 else 0.1 * abs(y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = 0.05 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def px(v: float) -> float:
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v: float) -> float:
        return _MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        '<g font-family="sans-serif" font-size="12" fill="#333">',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
                   f'font-size="14">{title}</text>')

    for v in _ticks(x_lo, x_hi):
        gx = px(v)
        out.append(f'<line x1="{gx:.2f}" y1="{_MARGIN_T}" x2="{gx:.2f}" '
                   f'y2="{_MARGIN_T + plot_h}" stroke="#ddd"/>')
        out.append(f'<text x="{gx:.2f}" y="{_MARGIN_T + plot_h + 16}" '
                   f'text-anchor="middle">{_fmt(v)}</text>')
    for v in _ticks(y_lo, y_hi):
        gy = py(v)
        out.append(f'<line x1="{_MARGIN_L}" y1="{gy:.2f}" '
                   f'x2="{_MARGIN_L + plot_w}" y2="{gy:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{_MARGIN_L - 6}" y="{gy + 4:.2f}" '
                   f'text-anchor="end">{_fmt(v)}</text>')

    out.append(f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" '
               f'height="{plot_h}" fill="none" stroke="#333"/>')
    if x_label:
        out.append(f'<text x="{_MARGIN_L + plot_w / 2:.1f}" '
                   f'y="{height - 10}" text-anchor="middle">{x_label}</text>')
    if y_label:
        cy = _MARGIN_T + plot_h / 2
        out.append(f'<text x="16" y="{cy:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {cy:.1f})">{y_label}</text>')

    for i, (label, xs, ys) in enumerate(cleaned):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(float(u)):.2f},{py(float(v)):.2f}"
                       for u, v in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')

    if any(label for label, _, _ in cleaned):
        ly = _MARGIN_T + 8
        for i, (label, _, _) in enumerate(cleaned):
            color = _PALETTE[i % len(_PALETTE)]
            y0 = ly + 16 * i
            out.append(f'<line x1="{_MARGIN_L + plot_w - 130}" y1="{y0 + 4}" '
                       f'x2="{_MARGIN_L + plot_w - 106}" y2="{y0 + 4}" '
                       f'stroke="{color}" stroke-width="1.5"/>')
            out.append(f'<text x="{_MARGIN_L + plot_w - 100}" y="{y0 + 8}">'
                       f'{label}</text>')

    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
