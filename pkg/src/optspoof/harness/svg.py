"""Minimal log-log DET plots written as standalone SVG."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
WIDTH, HEIGHT = 640, 520
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 60
LOG_MIN = -4  # axes span 1e-4 .. 1


def _xy(alpha, beta):
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM
    x = LEFT + (math.log10(alpha) - LOG_MIN) / -LOG_MIN * plot_w
    y = TOP + (1 - (math.log10(beta) - LOG_MIN) / -LOG_MIN) * plot_h
    return x, y


def _polyline(alphas, betas, color, dash=None, width=1.8):
    pts = []
    lo = 10.0**LOG_MIN
    for a, b in zip(alphas, betas):
        if a >= lo and b >= lo:
            x, y = _xy(min(a, 1.0), min(b, 1.0))
            pts.append(f"{x:.2f},{y:.2f}")
    if len(pts) < 2:
        return ""
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{dash_attr} '
            f'points="{" ".join(pts)}"/>')


def _display_points(curve, count=200):
    grid = np.logspace(LOG_MIN, 0, count)
    betas, _ = curve.beta_at(grid)
    idx = np.searchsorted(-curve.alpha, -grid, side="left").clip(0, len(curve.alpha) - 1)
    return curve.alpha[idx], betas


def det_svg(curves, title: str = "") -> str:
    """SVG for ``[(label, DetCurve), ...]``.

    Each DET curve is solid and its divergence bound dashed in the same
    colour; the grey dashed diagonal is the chance line ``beta = 1 - alpha``.
    """
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    x0, y0 = _xy(10.0**LOG_MIN, 10.0**LOG_MIN)
    x1, y1 = _xy(1.0, 1.0)
    for e in range(LOG_MIN, 1):
        gx, _ = _xy(10.0**e, 1.0)
        _, gy = _xy(1.0, 10.0**e)
        parts.append(f'<line x1="{gx:.2f}" y1="{y1:.2f}" x2="{gx:.2f}" y2="{y0:.2f}" stroke="#e5e5e5"/>')
        parts.append(f'<line x1="{x0:.2f}" y1="{gy:.2f}" x2="{x1:.2f}" y2="{gy:.2f}" stroke="#e5e5e5"/>')
        parts.append(f'<text x="{gx:.2f}" y="{y0 + 18:.2f}" text-anchor="middle">1e{e}</text>')
        parts.append(f'<text x="{x0 - 8:.2f}" y="{gy + 4:.2f}" text-anchor="end">1e{e}</text>')
    parts.append(f'<rect x="{x0:.2f}" y="{y1:.2f}" width="{x1 - x0:.2f}" height="{y0 - y1:.2f}" '
                 f'fill="none" stroke="black"/>')
    chance = np.logspace(LOG_MIN, 0, 200)
    parts.append(_polyline(chance, 1 - chance, "#888888", dash="6,4", width=1.2))
    for i, (label, curve) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        a, b = _display_points(curve)
        parts.append(_polyline(a, b, color))
        if curve.bound is not None:
            parts.append(_polyline(curve.bound[:, 0], curve.bound[:, 1], color, dash="4,3", width=1.2))
        ly = TOP + 16 + 18 * i
        parts.append(f'<line x1="{WIDTH - RIGHT + 12}" y1="{ly - 4}" x2="{WIDTH - RIGHT + 36}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{WIDTH - RIGHT + 42}" y="{ly}">{escape(str(label))}</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 18}" text-anchor="middle">'
                 f'false alarm α</text>')
    parts.append(f'<text x="18" y="{(y0 + y1) / 2:.2f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {(y0 + y1) / 2:.2f})">missed detection β</text>')
    if title:
        parts.append(f'<text x="{(x0 + x1) / 2:.2f}" y="22" text-anchor="middle" '
                     f'font-size="14">{escape(title)}</text>')
    parts.append("</svg>")
    return "\n".join(p for p in parts if p) + "\n"
