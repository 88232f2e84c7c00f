"""Minimal deterministic SVG charts: lines, shaded bands, points, log axes.

Output depends only on the data (coordinates are printed with fixed
precision), so identical inputs give byte-identical files.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["Chart", "nice_ticks"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    """Tick positions (in log10 units) for a log axis spanning ``[lo, hi]``."""
    decades = list(range(math.ceil(lo), math.floor(hi) + 1))
    if len(decades) >= 2:
        return [float(d) for d in decades]
    return [math.log10(t) for t in nice_ticks(10.0**lo, 10.0**hi) if t > 0]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    if v != 0 and (abs(v) >= 1e5 or abs(v) < 1e-3):
        return f"{v:.0e}"
    return f"{v:g}"


@dataclass
class Chart:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    xlog: bool = False
    ylog: bool = False
    width: int = 480
    height: int = 360
    _layers: list = field(default_factory=list, repr=False)

    def line(self, x, y, color: str | None = None, dashed: bool = False):
        self._layers.append(("line", np.asarray(x, float), np.asarray(y, float), color, dashed))
        return self

    def band(self, x, lo, hi, color: str | None = None):
        self._layers.append(("band", np.asarray(x, float), (np.asarray(lo, float), np.asarray(hi, float)), color, False))
        return self

    def points(self, x, y, color: str | None = None):
        self._layers.append(("points", np.asarray(x, float), np.asarray(y, float), color, False))
        return self

    def diagonal(self):
        self._layers.append(("diagonal", None, None, "#888888", True))
        return self

    def _transform(self, v, log):
        v = np.asarray(v, float)
        if log:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(v > 0, np.log10(np.where(v > 0, v, 1.0)), np.nan)
        return v

    def _extent(self):
        xs, ys = [], []
        for kind, x, y, _, _ in self._layers:
            if kind == "diagonal":
                continue
            xs.append(self._transform(x, self.xlog))
            if kind == "band":
                ys.extend([self._transform(y[0], self.ylog), self._transform(y[1], self.ylog)])
            else:
                ys.append(self._transform(y, self.ylog))
        xa = np.concatenate(xs) if xs else np.array([0.0, 1.0])
        ya = np.concatenate(ys) if ys else np.array([0.0, 1.0])
        xa, ya = xa[np.isfinite(xa)], ya[np.isfinite(ya)]
        if xa.size == 0:
            xa = np.array([0.0, 1.0])
        if ya.size == 0:
            ya = np.array([0.0, 1.0])
        x0, x1 = float(xa.min()), float(xa.max())
        y0, y1 = float(ya.min()), float(ya.max())
        if any(k == "diagonal" for k, *_ in self._layers):
            x0 = y0 = min(x0, y0)
            x1 = y1 = max(x1, y1)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        xpad, ypad = 0.02 * (x1 - x0), 0.04 * (y1 - y0)
        return x0 - xpad, x1 + xpad, y0 - ypad, y1 + ypad

    def render(self) -> str:
        left, right, top, bottom = 64, 16, 32, 48
        pw, ph = self.width - left - right, self.height - top - bottom
        x0, x1, y0, y1 = self._extent()

        def px(v):
            return left + (v - x0) / (x1 - x0) * pw

        def py(v):
            return top + ph - (v - y0) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="11">',
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>',
            f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        ]
        for axis, lo, hi, log in (("x", x0, x1, self.xlog), ("y", y0, y1, self.ylog)):
            ticks = _log_ticks(lo, hi) if log else nice_ticks(lo, hi)
            for t in ticks:
                label = _label(10.0**t if log else t)
                if axis == "x":
                    p = px(t)
                    out.append(f'<line x1="{_fmt(p)}" y1="{top + ph}" x2="{_fmt(p)}" y2="{top + ph + 4}" stroke="black"/>')
                    out.append(f'<text x="{_fmt(p)}" y="{top + ph + 16}" text-anchor="middle">{label}</text>')
                else:
                    p = py(t)
                    out.append(f'<line x1="{left - 4}" y1="{_fmt(p)}" x2="{left}" y2="{_fmt(p)}" stroke="black"/>')
                    out.append(f'<text x="{left - 6}" y="{_fmt(p + 4)}" text-anchor="end">{label}</text>')
        color_i = 0
        for kind, x, y, color, dashed in self._layers:
            if color is None:
                color = _PALETTE[color_i % len(_PALETTE)]
                color_i += 1
            dash = ' stroke-dasharray="4 3"' if dashed else ""
            if kind == "diagonal":
                lo, hi = max(x0, y0), min(x1, y1)
                out.append(f'<line x1="{_fmt(px(lo))}" y1="{_fmt(py(lo))}" x2="{_fmt(px(hi))}" y2="{_fmt(py(hi))}" '
                           f'stroke="{color}"{dash}/>')
                continue
            tx = self._transform(x, self.xlog)
            if kind == "band":
                lo_, hi_ = self._transform(y[0], self.ylog), self._transform(y[1], self.ylog)
                ok = np.isfinite(tx) & np.isfinite(lo_) & np.isfinite(hi_)
                if ok.sum() >= 2:
                    pts = [(px(a), py(b)) for a, b in zip(tx[ok], hi_[ok])]
                    pts += [(px(a), py(b)) for a, b in zip(tx[ok][::-1], lo_[ok][::-1])]
                    path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
                    out.append(f'<polygon points="{path}" fill="{color}" fill-opacity="0.25" stroke="none"/>')
                continue
            ty = self._transform(y, self.ylog)
            ok = np.isfinite(tx) & np.isfinite(ty)
            if kind == "line":
                path = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(tx[ok], ty[ok]))
                out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
            else:
                for a, b in zip(tx[ok], ty[ok]):
                    out.append(f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="2" fill="{color}"/>')
        out.append(f'<text x="{left + pw / 2}" y="{top - 12}" text-anchor="middle" font-size="13">{escape(self.title)}</text>')
        out.append(f'<text x="{left + pw / 2}" y="{self.height - 10}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="14" y="{top + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {top + ph / 2})">{escape(self.ylabel)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
