"""Minimal deterministic SVG plots for congruence results.

Hand-written SVG keeps output byte-identical across runs (no timestamps or
renderer metadata).
"""
from __future__ import annotations

from typing import Sequence

from .congruence import DeltaRecord, Dot

COLORS = {Dot.BLUE: "#1f5fbf", Dot.GREEN: "#2e9e44", Dot.RED: "#d62728", Dot.YELLOW: "#e6b800"}
SIZE = 420
PAD = 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    def __init__(self, xlim: tuple[float, float], ylim: tuple[float, float]) -> None:
        self.xlim = xlim
        self.ylim = ylim
        self.span = SIZE - 2 * PAD

    def x(self, v: float) -> float:
        lo, hi = self.xlim
        return PAD + (v - lo) / (hi - lo) * self.span

    def y(self, v: float) -> float:
        lo, hi = self.ylim
        return SIZE - PAD - (v - lo) / (hi - lo) * self.span


def _header(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<text x="{SIZE / 2}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<text x="{SIZE / 2}" y="{SIZE - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{SIZE / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {SIZE / 2})">{ylabel}</text>',
    ]


def _axes(f: _Frame) -> list[str]:
    out = [
        f'<rect x="{PAD}" y="{PAD}" width="{f.span}" height="{f.span}" fill="none" stroke="black"/>'
    ]
    for v in (f.xlim[0], 0.0, f.xlim[1]):
        out.append(f'<text x="{_fmt(f.x(v))}" y="{SIZE - PAD + 14}" text-anchor="middle">{v:.2f}</text>')
    for v in (f.ylim[0], 0.0, f.ylim[1]):
        out.append(f'<text x="{PAD - 4}" y="{_fmt(f.y(v) + 4)}" text-anchor="end">{v:.2f}</text>')
    return out


def _limit(values: Sequence[float], tau: float) -> float:
    m = max([abs(v) for v in values] + [tau, 0.1])
    return round(m * 1.1, 6)


def scatter_svg(records: Sequence[DeltaRecord], tau: float, metric: str) -> str:
    """Delta-metric vs delta-CCS scatter with the tau bands and the y = x line."""
    lim = _limit([r.delta_metric for r in records] + [r.delta_ccs for r in records], tau)
    f = _Frame((-lim, lim), (-lim, lim))
    out = _header(f"Delta {metric} vs Delta CCS", f"Delta {metric}", "Delta CCS")
    band = 'fill="#e6b800" fill-opacity="0.15" stroke="none"'
    out.append(
        f'<rect x="{_fmt(f.x(-tau))}" y="{PAD}" width="{_fmt(f.x(tau) - f.x(-tau))}" '
        f'height="{f.span}" {band}/>'
    )
    out.append(
        f'<rect x="{PAD}" y="{_fmt(f.y(tau))}" width="{f.span}" '
        f'height="{_fmt(f.y(-tau) - f.y(tau))}" {band}/>'
    )
    out += _axes(f)
    out.append(
        f'<line x1="{_fmt(f.x(-lim))}" y1="{_fmt(f.y(-lim))}" x2="{_fmt(f.x(lim))}" '
        f'y2="{_fmt(f.y(lim))}" stroke="grey" stroke-dasharray="4 3"/>'
    )
    for r in records:
        out.append(
            f'<circle cx="{_fmt(f.x(r.delta_metric))}" cy="{_fmt(f.y(r.delta_ccs))}" r="2.5" '
            f'fill="{COLORS[r.dot]}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def trend_svg(trend: Sequence[tuple[float, float]], metric: str) -> str:
    """Decisive images sorted by delta-metric, both deltas plotted against rank."""
    n = len(trend)
    lim = _limit([v for p in trend for v in p], 0.0)
    f = _Frame((0.0, max(1.0, n - 1.0)), (-lim, lim))
    out = _header(f"Sorted trend: {metric} and CCS", "rank by Delta " + metric, "delta")
    out += _axes(f)
    for k, (series, color) in enumerate(((0, "#444444"), (1, "#1f5fbf"))):
        pts = " ".join(f"{_fmt(f.x(i))},{_fmt(f.y(p[series]))}" for i, p in enumerate(trend))
        if pts:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        out.append(
            f'<text x="{PAD + 6}" y="{PAD + 14 + 14 * k}" fill="{color}">'
            f'{"Delta " + metric if series == 0 else "Delta CCS"}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
