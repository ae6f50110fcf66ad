"""Bare-bones SVG figures of tracker runs: HNR, relative fc and strobes."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import Trace

WIDTH, PANEL_H, MARGIN = 720, 220, 50
COLORS = ("#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b9770e")


def _polyline(t, y, x_range, y_range, top, color, dash=False) -> str:
    (x0, x1), (y0, y1) = x_range, y_range
    if y1 <= y0:
        y1 = y0 + 1.0
    px = MARGIN + (np.asarray(t) - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)
    py = top + PANEL_H - (np.clip(y, y0, y1) - y0) / (y1 - y0) * PANEL_H
    pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(px, py))
    style = ' stroke-dasharray="4 3"' if dash else ""
    return f'<polyline fill="none" stroke="{color}" stroke-width="1"{style} points="{pts}"/>'


def _axes(top, label, y_range) -> list[str]:
    x0, x1 = MARGIN, WIDTH - MARGIN
    return [
        f'<rect x="{x0}" y="{top}" width="{x1 - x0}" height="{PANEL_H}" fill="none" stroke="#444"/>',
        f'<text x="{x0}" y="{top - 6}" font-size="12">{label}</text>',
        f'<text x="{x0 - 4}" y="{top + 10}" font-size="10" text-anchor="end">{y_range[1]:.3g}</text>',
        f'<text x="{x0 - 4}" y="{top + PANEL_H}" font-size="10" text-anchor="end">{y_range[0]:.3g}</text>',
    ]


def render_run(
    traces: Sequence[Trace],
    f0: Sequence[np.ndarray] | None = None,
    reference: Sequence[float] | None = None,
    title: str = "",
) -> str:
    """SVG text: top panel ``fc - reference`` (with ``f0`` dashed and strobe
    ticks), bottom panel HNR in dB.

    ``reference`` defaults to 96 Hz for every trace.
    """
    if reference is None:
        reference = [96.0] * len(traces)
    t_end = max(len(tr) / tr.fs for tr in traces)
    rel = [tr.fc_hz - ref for tr, ref in zip(traces, reference)]
    series = list(rel)
    if f0 is not None:
        series += [np.asarray(f) - ref for f, ref in zip(f0, reference)]
    lo = min(float(np.min(s)) for s in series) - 1.0
    hi = max(float(np.max(s)) for s in series) + 1.0
    hnr_range = (-20.0, max(20.0, max(float(np.max(tr.hnr_db)) for tr in traces)))

    top1, top2 = 40, 40 + PANEL_H + 50
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{top2 + PANEL_H + 40}">',
        f'<text x="{MARGIN}" y="20" font-size="14">{title}</text>',
    ]
    out += _axes(top1, "fc - reference / Hz", (lo, hi))
    out += _axes(top2, "HNR / dB", hnr_range)
    for k, tr in enumerate(traces):
        color = COLORS[k % len(COLORS)]
        t = tr.t_s
        out.append(_polyline(t, rel[k], (0, t_end), (lo, hi), top1, color))
        if f0 is not None and k < len(f0):
            out.append(_polyline(t, np.asarray(f0[k]) - reference[k], (0, t_end), (lo, hi), top1, "#000", dash=True))
        tick = 8 - 2 * k
        for ts in t[tr.strobe]:
            px = MARGIN + ts / t_end * (WIDTH - 2 * MARGIN)
            out.append(f'<line x1="{px:.1f}" y1="{top1 + PANEL_H}" x2="{px:.1f}" y2="{top1 + PANEL_H - tick}" stroke="{color}"/>')
        out.append(_polyline(t, tr.hnr_db, (0, t_end), hnr_range, top2, color))
    zero = top2 + PANEL_H - (0 - hnr_range[0]) / (hnr_range[1] - hnr_range[0]) * PANEL_H
    out.append(f'<line x1="{MARGIN}" y1="{zero:.1f}" x2="{WIDTH - MARGIN}" y2="{zero:.1f}" stroke="#999" stroke-dasharray="2 2"/>')
    out.append(f'<text x="{WIDTH // 2}" y="{top2 + PANEL_H + 30}" font-size="12">time 0 to {t_end * 1000:.0f} ms</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_run(path, *args, **kwargs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_run(*args, **kwargs))
