"""Minimal SVG 1.1 line-chart writer (no external assets)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape


@dataclass
class Series:
    label: str
    xs: list[float]
    ys: list[float]
    dashed: bool = False
    color: str = "#000000"


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Round tick values covering ``[lo, hi]``."""
    if hi == lo:
        pad = abs(lo) * 0.05 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step - 1e-9)
    last = math.floor(hi / step + 1e-9)
    return [round(i * step, 12) for i in range(first, last + 1)]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.6g}"


def line_chart(
    series: list[Series],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    width: int = 640,
    height: int = 420,
    metadata: str | None = None,
) -> str:
    """Render ``series`` as polylines with axes, ticks and a legend."""
    margin_l, margin_r, margin_t, margin_b = 80, 20, 40, 55
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    xs = [x for s in series for x in s.xs]
    ys = [y for s in series for y in s.ys]
    x_ticks = nice_ticks(min(xs), max(xs))
    y_ticks = nice_ticks(min(ys), max(ys))
    x_lo, x_hi = min(x_ticks[0], min(xs)), max(x_ticks[-1], max(xs))
    y_lo, y_hi = min(y_ticks[0], min(ys)), max(y_ticks[-1], max(ys))
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def px(x):
        return margin_l + (x - x_lo) / x_span * plot_w

    def py(y):
        return margin_t + plot_h - (y - y_lo) / y_span * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
    ]
    if metadata is not None:
        out.append(f"<metadata>{escape(metadata)}</metadata>")
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>')
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')

    x0, y0 = margin_l, margin_t + plot_h
    out.append('<g id="axes" stroke="#000000" stroke-width="1">')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}"/>')
    out.append(f'<line x1="{x0}" y1="{margin_t}" x2="{x0}" y2="{y0}"/>')
    for t in x_ticks:
        out.append(f'<line x1="{_fmt(px(t))}" y1="{y0}" x2="{_fmt(px(t))}" y2="{y0 + 5}"/>')
    for t in y_ticks:
        out.append(f'<line x1="{x0 - 5}" y1="{_fmt(py(t))}" x2="{x0}" y2="{_fmt(py(t))}"/>')
    out.append("</g>")

    out.append('<g id="tick-labels" fill="#000000">')
    for t in x_ticks:
        out.append(f'<text x="{_fmt(px(t))}" y="{y0 + 18}" text-anchor="middle">{_tick_label(t)}</text>')
    for t in y_ticks:
        out.append(f'<text x="{x0 - 8}" y="{_fmt(py(t) + 4)}" text-anchor="end">{_tick_label(t)}</text>')
    out.append("</g>")
    if x_label:
        out.append(f'<text x="{x0 + plot_w / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(x_label)}</text>')
    if y_label:
        cy = margin_t + plot_h / 2
        out.append(
            f'<text x="18" y="{cy:.1f}" text-anchor="middle" transform="rotate(-90 18 {cy:.1f})">{escape(y_label)}</text>'
        )

    out.append('<g id="series" fill="none" stroke-width="2">')
    for s in series:
        points = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(s.xs, s.ys))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<polyline points="{points}" stroke="{s.color}"{dash}><title>{escape(s.label)}</title></polyline>')
    out.append("</g>")

    lx, ly = x0 + 12, margin_t + 10
    out.append('<g id="legend">')
    for i, s in enumerate(series):
        y = ly + i * 18
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 28}" y2="{y}" stroke="{s.color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 34}" y="{y + 4}">{escape(s.label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def sweep_chart(result, metadata: str | None = None) -> str:
    """Figure-style chart of a :class:`~liesym.simulate.SweepResult`."""
    ks = [r.k for r in result.rows]
    return line_chart(
        [
            Series("SMD, measurement equivalence holds", ks, [r.smd_baseline for r in result.rows], dashed=True, color="#555555"),
            Series("SMD, P2 linked by gamma*tau^k", ks, [r.smd_broken for r in result.rows], color="#1f4e9c"),
        ],
        title="Population true-score SMD under a broken linkage",
        x_label="k",
        y_label="SMD",
        metadata=metadata,
    )
