"""Deterministic SVG line plots: same rows in, same bytes out.

No timestamps, no ids, no external renderer; numbers are formatted with
repr-style shortest round-trip decimals so output is locale-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ConfigError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#17becf", "#7f7f7f")


@dataclass(frozen=True)
class PlotSpec:
    x: str
    y: str
    series: str | None = None
    title: str = ""
    xlabel: str | None = None
    ylabel: str | None = None
    width: int = 640
    height: int = 420


def _fmt(v: float) -> str:
    return repr(round(float(v), 10))


def _ticks(lo: float, hi: float, n: int = 6) -> list:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-15 * step else t)
        t += step
    return ticks


def render_plot(rows: list, spec: PlotSpec) -> str:
    """Render parsed CSV rows (list of dicts) to an SVG document string."""
    for col in (spec.x, spec.y) + ((spec.series,) if spec.series else ()):
        if rows and col not in rows[0]:
            raise ConfigError(f"plot column {col!r} missing from CSV header")
    if not rows:
        raise ConfigError("no rows to plot")

    groups: dict = {}
    for row in rows:
        key = str(row[spec.series]) if spec.series else ""
        try:
            x, y = float(row[spec.x]), float(row[spec.y])
        except ValueError as exc:
            raise ConfigError(f"non-numeric plot data: {exc}") from exc
        if math.isfinite(x) and math.isfinite(y):
            groups.setdefault(key, []).append((x, y))
    if not groups:
        raise ConfigError("no finite points to plot")

    xs = [p[0] for pts in groups.values() for p in pts]
    ys = [p[1] for pts in groups.values() for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad_y = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad_y, y1 + pad_y

    wpx, hpx = spec.width, spec.height
    ml, mr, mt, mb = 62, 16, 28, 46
    iw, ih = wpx - ml - mr, hpx - mt - mb

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * iw

    def sy(v):
        return mt + (y1 - v) / (y1 - y0) * ih

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{wpx}" height="{hpx}" '
           f'viewBox="0 0 {wpx} {hpx}">',
           f'<rect x="0" y="0" width="{wpx}" height="{hpx}" fill="white"/>']
    if spec.title:
        out.append(f'<text x="{wpx // 2}" y="18" text-anchor="middle" '
                   f'font-family="monospace" font-size="13">{_esc(spec.title)}</text>')

    for t in _ticks(x0, x1):
        px = _fmt(sx(t))
        out.append(f'<line x1="{px}" y1="{mt}" x2="{px}" y2="{mt + ih}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{px}" y="{mt + ih + 16}" text-anchor="middle" '
                   f'font-family="monospace" font-size="11">{_num(t)}</text>')
    for t in _ticks(y0, y1):
        py = _fmt(sy(t))
        out.append(f'<line x1="{ml}" y1="{py}" x2="{ml + iw}" y2="{py}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{ml - 6}" y="{py}" text-anchor="end" dy="4" '
                   f'font-family="monospace" font-size="11">{_num(t)}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{iw}" height="{ih}" fill="none" '
               f'stroke="#333333" stroke-width="1"/>')

    for idx, key in enumerate(sorted(groups)):
        pts = sorted(groups[key])
        color = PALETTE[idx % len(PALETTE)]
        path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.6" '
                   f'points="{path}"/>')
        for x, y in pts:
            out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2.4" '
                       f'fill="{color}"/>')
        ly = mt + 16 + 16 * idx
        out.append(f'<line x1="{ml + iw - 130}" y1="{ly - 4}" x2="{ml + iw - 106}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + iw - 100}" y="{ly}" font-family="monospace" '
                   f'font-size="11">{_esc(key) or spec.y}</text>')

    out.append(f'<text x="{ml + iw // 2}" y="{hpx - 10}" text-anchor="middle" '
               f'font-family="monospace" font-size="12">{_esc(spec.xlabel or spec.x)}</text>')
    out.append(f'<text x="14" y="{mt + ih // 2}" text-anchor="middle" '
               f'font-family="monospace" font-size="12" '
               f'transform="rotate(-90 14 {mt + ih // 2})">{_esc(spec.ylabel or spec.y)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _num(t: float) -> str:
    if t == int(t) and abs(t) < 1e12:
        return str(int(t))
    return f"{t:.6g}"


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
