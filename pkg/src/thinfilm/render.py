"""Dependency-free plot emission: SVG polylines and PPM heatmaps.

Line plots (dispersion curves, bifurcation diagrams) are written as
self-contained SVG with axes, tick labels, and optional event markers.
Field snapshots are written as binary PPM (P6) heatmaps with a diverging
blue-white-red map centred at zero.  Output is byte-deterministic.
"""

from __future__ import annotations

import numpy as np

__all__ = ["svg_line_plot", "ppm_heatmap"]

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 64, 16, 24, 44
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min(x for x in (1 * mag, 2 * mag, 5 * mag, 10 * mag) if x >= raw)
    start = np.ceil(lo / step) * step
    return [float(start + i * step) for i in range(int((hi - start) / step) + 1)]


def svg_line_plot(
    path,
    curves: list[tuple[np.ndarray, np.ndarray, str]],
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    markers: list[tuple[float, float, str]] | None = None,
) -> None:
    """Write polyline curves ``(x, y, label)`` with axes and markers."""
    xs = np.concatenate([np.asarray(c[0], dtype=float) for c in curves])
    ys = np.concatenate([np.asarray(c[1], dtype=float) for c in curves])
    xlo, xhi = float(xs.min()), float(xs.max())
    ylo, yhi = float(ys.min()), float(ys.max())
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    def px(x):
        return _ML + (x - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (y - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="16" text-anchor="middle" '
            f'font-size="13" font-family="sans-serif">{title}</text>'
        )
    # axes box and ticks
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>'
    )
    for tx in _ticks(xlo, xhi):
        if xlo <= tx <= xhi:
            parts.append(
                f'<line x1="{px(tx):.1f}" y1="{_H - _MB}" x2="{px(tx):.1f}" '
                f'y2="{_H - _MB + 4}" stroke="black"/>'
            )
            parts.append(
                f'<text x="{px(tx):.1f}" y="{_H - _MB + 16}" text-anchor="middle" '
                f'font-size="10" font-family="sans-serif">{tx:g}</text>'
            )
    for ty in _ticks(ylo, yhi):
        if ylo <= ty <= yhi:
            parts.append(
                f'<line x1="{_ML - 4}" y1="{py(ty):.1f}" x2="{_ML}" '
                f'y2="{py(ty):.1f}" stroke="black"/>'
            )
            parts.append(
                f'<text x="{_ML - 7}" y="{py(ty) + 3:.1f}" text-anchor="end" '
                f'font-size="10" font-family="sans-serif">{ty:g}</text>'
            )
    if xlabel:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="{_H - 8}" text-anchor="middle" '
            f'font-size="12" font-family="sans-serif">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="14" y="{_H / 2:.1f}" text-anchor="middle" font-size="12" '
            f'font-family="sans-serif" transform="rotate(-90 14 {_H / 2:.1f})">{ylabel}</text>'
        )
    for i, (x, y, label) in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(
            f"{px(a):.2f},{py(b):.2f}" for a, b in zip(np.asarray(x), np.asarray(y))
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        if label:
            parts.append(
                f'<text x="{_W - _MR - 6}" y="{_MT + 14 + 14 * i}" text-anchor="end" '
                f'font-size="11" font-family="sans-serif" fill="{color}">{label}</text>'
            )
    for mx, my, mlabel in markers or []:
        parts.append(
            f'<circle cx="{px(mx):.1f}" cy="{py(my):.1f}" r="4" fill="none" '
            f'stroke="black" stroke-width="1.2"/>'
        )
        if mlabel:
            parts.append(
                f'<text x="{px(mx) + 6:.1f}" y="{py(my) - 6:.1f}" font-size="10" '
                f'font-family="sans-serif">{mlabel}</text>'
            )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def ppm_heatmap(path, values: np.ndarray) -> None:
    """Binary PPM heatmap, diverging blue-white-red centred at zero."""
    v = np.asarray(values, dtype=float)
    vmax = np.abs(v).max()
    if vmax == 0:
        vmax = 1.0
    t = np.clip(v / vmax, -1.0, 1.0)
    r = np.where(t >= 0, 255, 255 * (1 + t)).astype(np.uint8)
    g = (255 * (1 - np.abs(t))).astype(np.uint8)
    b = np.where(t <= 0, 255, 255 * (1 - t)).astype(np.uint8)
    rgb = np.stack([r, g, b], axis=-1)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{v.shape[1]} {v.shape[0]}\n255\n".encode())
        fh.write(rgb.tobytes())
