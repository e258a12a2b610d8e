"""Minimal deterministic SVG line/scatter plots.

Output depends only on the input numbers: fixed formatting, no timestamps,
no random ids.
"""

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f5fa8", "#c23b22", "#2e8b57", "#7b4ea3", "#d98a00", "#555555")

W, H = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 60


def _fmt(v):
    return f"{v:.2f}"


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(t) for t in np.arange(start, hi + 0.5 * step, step)]


def plot(path, title, xlabel, ylabel, scatter=(), curves=()):
    """Write an SVG with scatter series and polyline curves.

    ``scatter`` and ``curves`` are sequences of ``(name, x, y)``.
    """
    xs = [np.asarray(x, float) for _, x, _ in (*scatter, *curves)]
    ys = [np.asarray(y, float) for _, _, y in (*scatter, *curves)]
    allx = np.concatenate(xs) if xs else np.array([0.0, 1.0])
    ally = np.concatenate(ys) if ys else np.array([0.0, 1.0])
    allx, ally = allx[np.isfinite(allx)], ally[np.isfinite(ally)]
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    padx = 0.05 * (x1 - x0 or 1.0)
    pady = 0.05 * (y1 - y0 or 1.0)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        if x0 <= t <= x1:
            out.append(f'<line x1="{_fmt(sx(t))}" y1="{TOP + ph}" x2="{_fmt(sx(t))}" '
                       f'y2="{TOP + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(sx(t))}" y="{TOP + ph + 18}" '
                       f'text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        if y0 <= t <= y1:
            out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(sy(t))}" x2="{LEFT}" '
                       f'y2="{_fmt(sy(t))}" stroke="black"/>')
            out.append(f'<text x="{LEFT - 8}" y="{_fmt(sy(t) + 4)}" '
                       f'text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.0f}" y="{H - 18}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.0f})">{escape(ylabel)}</text>')

    legend = []
    for k, (name, x, y) in enumerate(curves):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, y)
                       if np.isfinite(a) and np.isfinite(b))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5" stroke-dasharray="5,3"/>')
        legend.append((name, color, "line"))
    for k, (name, x, y) in enumerate(scatter):
        color = PALETTE[k % len(PALETTE)]
        for a, b in zip(x, y):
            if np.isfinite(a) and np.isfinite(b):
                out.append(f'<circle cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="4" fill="{color}"/>')
        legend.append((name, color, "dot"))
    for k, (name, color, kind) in enumerate(legend):
        y = TOP + 14 + 16 * k
        if kind == "dot":
            out.append(f'<circle cx="{LEFT + 14}" cy="{y - 4}" r="4" fill="{color}"/>')
        else:
            out.append(f'<line x1="{LEFT + 6}" y1="{y - 4}" x2="{LEFT + 22}" y2="{y - 4}" '
                       f'stroke="{color}" stroke-dasharray="5,3"/>')
        out.append(f'<text x="{LEFT + 28}" y="{y}">{escape(name)}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    Path(path).write_text(text)
    return text
