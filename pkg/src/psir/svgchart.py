"""Minimal standalone SVG line charts for simulation output."""

from __future__ import annotations

import math

from .dataio import TimeSeries

WIDTH, HEIGHT = 960, 540
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 30, 50

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _extent(lo: float, hi: float) -> tuple[float, float]:
    """Data extent with 5% margins; degenerate extents get a unit pad."""
    if hi < lo:
        lo, hi = hi, lo
    span = hi - lo
    if span == 0.0:
        pad = 1.0 if lo == 0.0 else 0.05 * abs(lo)
        return lo - pad, hi + pad
    return lo - 0.05 * span, hi + 0.05 * span


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1.0, 2.0, 2.5, 5.0, 10.0) if s * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def render_svg(series_list, path) -> None:
    """Write a line chart of labeled series as a standalone SVG 1.1 file.

    series_list: iterable of (label, TimeSeries). Deterministic output for
    identical input.
    """
    series_list = [(str(label), s) for label, s in series_list]
    if not series_list:
        raise ValueError("need at least one series")
    for label, s in series_list:
        if not isinstance(s, TimeSeries):
            raise ValueError(f"series {label!r} is not a TimeSeries")
        if not (s.times.size and math.isfinite(s.values.min())
                and math.isfinite(s.values.max())):
            raise ValueError(f"series {label!r} must be non-empty and finite")

    x_lo, x_hi = _extent(min(s.times.min() for _, s in series_list),
                         max(s.times.max() for _, s in series_list))
    y_lo, y_hi = _extent(min(s.values.min() for _, s in series_list),
                         max(s.values.max() for _, s in series_list))
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(x: float) -> float:
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        x = px(t)
        parts.append(f'<line x1="{x:.2f}" y1="{MARGIN_T + plot_h}" x2="{x:.2f}" '
                     f'y2="{MARGIN_T + plot_h + 5}" stroke="#333"/>')
        parts.append(f'<text x="{x:.2f}" y="{MARGIN_T + plot_h + 20}" '
                     f'font-size="12" text-anchor="middle">{t:.6g}</text>')
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        parts.append(f'<line x1="{MARGIN_L - 5}" y1="{y:.2f}" x2="{MARGIN_L}" '
                     f'y2="{y:.2f}" stroke="#333"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{y + 4:.2f}" font-size="12" '
                     f'text-anchor="end">{t:.6g}</text>')
    for idx, (label, s) in enumerate(series_list):
        color = PALETTE[idx % len(PALETTE)]
        pts = " ".join(f"{px(t):.2f},{py(v):.2f}"
                       for t, v in zip(s.times, s.values))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{pts}"/>')
        ly = MARGIN_T + 16 + 16 * idx
        parts.append(f'<line x1="{MARGIN_L + 10}" y1="{ly - 4}" '
                     f'x2="{MARGIN_L + 34}" y2="{ly - 4}" stroke="{color}" '
                     'stroke-width="1.5"/>')
        parts.append(f'<text x="{MARGIN_L + 40}" y="{ly}" font-size="12">'
                     f'{_escape(label)}</text>')
    parts.append("</svg>")
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
