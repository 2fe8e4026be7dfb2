"""Self-contained SVG 1.1 rendering of sweeps and contour grids.

No plotting library is needed: a line plot is one ``<polyline>`` per series
and a contour plot is a grid of filled cells (colour-banded) with iso-lines
traced by marching squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["EmptyDataError", "LineSeries", "emit_plot", "line_svg", "contour_svg", "marching_squares"]

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=70, right=20, top=30, bottom=55)
PALETTE = ("#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d68910")


class EmptyDataError(ValueError):
    pass


@dataclass(frozen=True)
class LineSeries:
    label: str
    x: np.ndarray
    y: np.ndarray


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, log: bool, n: int = 5) -> list[float]:
    if log:
        return [10.0**k for k in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)
                if lo <= 10.0**k <= hi] or [lo, hi]
    if hi == lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= n:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step + 1e-9) + 1)]


class _Frame:
    def __init__(self, xlim, ylim, xlog=False):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.y1 == self.y0:
            pad = abs(self.y0) * 0.05 or 0.05
            self.y0, self.y1 = self.y0 - pad, self.y1 + pad
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        self.xlog = xlog
        self.left, self.top = MARGIN["left"], MARGIN["top"]
        self.w = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def _tx(self, x):
        return math.log10(x) if self.xlog else x

    def px(self, x):
        a, b = self._tx(self.x0), self._tx(self.x1)
        return self.left + (self._tx(x) - a) / (b - a) * self.w

    def py(self, y):
        return self.top + (self.y1 - y) / (self.y1 - self.y0) * self.h

    def axes(self, xlabel, ylabel, title) -> list[str]:
        out = [f'<rect x="{self.left}" y="{self.top}" width="{self.w}" height="{self.h}" '
               'fill="none" stroke="#000" stroke-width="1"/>']
        for t in _ticks(self.x0, self.x1, self.xlog):
            x = self.px(t)
            out.append(f'<line x1="{x:.2f}" y1="{self.top + self.h}" x2="{x:.2f}" y2="{self.top + self.h + 5}" stroke="#000"/>')
            out.append(f'<text x="{x:.2f}" y="{self.top + self.h + 18}" text-anchor="middle">{_fmt(t)}</text>')
        for t in _ticks(self.y0, self.y1, False):
            y = self.py(t)
            out.append(f'<line x1="{self.left - 5}" y1="{y:.2f}" x2="{self.left}" y2="{y:.2f}" stroke="#000"/>')
            out.append(f'<text x="{self.left - 8}" y="{y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
        out.append(f'<text x="{self.left + self.w / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
        out.append(f'<text x="16" y="{self.top + self.h / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {self.top + self.h / 2})">{escape(ylabel)}</text>')
        if title:
            out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
        return out


def _document(body: list[str]) -> str:
    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>', *body, "</svg>"]) + "\n"


def _marker(frame, x, y, kind, color) -> str:
    cx, cy = frame.px(x), frame.py(y)
    if kind == "max":
        pts = f"{cx:.2f},{cy - 7:.2f} {cx - 6:.2f},{cy + 4:.2f} {cx + 6:.2f},{cy + 4:.2f}"
        return f'<polygon class="argmax" points="{pts}" fill="{color}" data-x="{_fmt(x)}" data-y="{_fmt(y)}"/>'
    return (f'<rect class="argmin" x="{cx - 4:.2f}" y="{cy - 4:.2f}" width="8" height="8" fill="none" '
            f'stroke="{color}" stroke-width="1.5" data-x="{_fmt(x)}" data-y="{_fmt(y)}"/>')


def line_svg(series, xlabel="omega / nu", ylabel="eta", title="", log_x=False,
             markers=None, reference=None) -> str:
    """Line plot; ``markers`` is a list of ``(x, y, 'max'|'min', series_index)``.

    ``reference`` draws a dashed horizontal line (e.g. the undriven baseline).
    """
    series = [s for s in series if len(s.x)]
    if not series:
        raise EmptyDataError("nothing to plot")
    xs = np.concatenate([s.x for s in series])
    ys = np.concatenate([s.y for s in series])
    ys = ys[np.isfinite(ys)]
    if ys.size == 0:
        raise EmptyDataError("all values are non-finite")
    lo, hi = float(ys.min()), float(ys.max())
    if reference is not None:
        lo, hi = min(lo, reference), max(hi, reference)
    pad = 0.05 * (hi - lo)
    frame = _Frame((float(xs.min()), float(xs.max())), (lo - pad, hi + pad), xlog=log_x)
    body = frame.axes(xlabel, ylabel, title)
    if reference is not None:
        y = frame.py(reference)
        body.append(f'<line x1="{frame.left}" y1="{y:.2f}" x2="{frame.left + frame.w}" y2="{y:.2f}" '
                    'stroke="#777" stroke-dasharray="4 3"/>')
    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        ok = np.isfinite(s.y)
        pts = " ".join(f"{frame.px(x):.2f},{frame.py(y):.2f}" for x, y in zip(s.x[ok], s.y[ok]))
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        body.append(f'<text x="{frame.left + frame.w - 6}" y="{frame.top + 14 + 14 * k}" text-anchor="end" '
                    f'fill="{color}">{escape(s.label)}</text>')
    for x, y, kind, idx in markers or []:
        body.append(_marker(frame, x, y, kind, PALETTE[idx % len(PALETTE)]))
    return _document(body)


# ---------------------------------------------------------------------------
# contours

_EDGES = {  # case -> list of edge pairs; edges 0 bottom, 1 right, 2 top, 3 left
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)], 5: [(3, 2), (0, 1)], 6: [(0, 2)], 7: [(3, 2)],
    8: [(2, 3)], 9: [(0, 2)], 10: [(0, 3), (1, 2)], 11: [(1, 2)], 12: [(1, 3)], 13: [(0, 1)], 14: [(3, 0)],
}


def marching_squares(x, y, z, level: float) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Iso-line segments of ``z[i, j]`` (at ``x[j]``, ``y[i]``) for one level."""
    z = np.asarray(z, dtype=float)
    segs = []
    for i in range(z.shape[0] - 1):
        for j in range(z.shape[1] - 1):
            c = (z[i, j], z[i, j + 1], z[i + 1, j + 1], z[i + 1, j])
            if not all(map(math.isfinite, c)):
                continue
            case = sum(1 << k for k, v in enumerate(c) if v > level)
            if case in (0, 15):
                continue
            corners = ((x[j], y[i]), (x[j + 1], y[i]), (x[j + 1], y[i + 1]), (x[j], y[i + 1]))

            def edge(e):
                a, b = e, (e + 1) % 4
                t = (level - c[a]) / (c[b] - c[a])
                (xa, ya), (xb, yb) = corners[a], corners[b]
                return (xa + t * (xb - xa), ya + t * (yb - ya))

            for e1, e2 in _EDGES[case]:
                segs.append((edge(e1), edge(e2)))
    return segs


def _colour(t: float) -> str:
    # white to deep blue
    t = min(max(t, 0.0), 1.0)
    r, g, b = (int(round(255 + (c - 255) * t)) for c in (31, 78, 156))
    return f"#{r:02x}{g:02x}{b:02x}"


def contour_svg(x, y, z, xlabel="kappa / nu", ylabel="mu / nu", title="", levels: int = 8,
                markers=None) -> str:
    """Filled contour of ``z[i, j]`` over ``x[j]`` (horizontal) and ``y[i]``.

    Cells are coloured by band; iso-lines are drawn only where ``z`` varies,
    so constant data gives a single flat band and just the frame.
    """
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    if x.size == 0 or y.size == 0 or z.size == 0:
        raise EmptyDataError("nothing to plot")
    if z.shape != (y.size, x.size):
        raise ValueError(f"z has shape {z.shape}, expected {(y.size, x.size)}")
    finite = z[np.isfinite(z)]
    if finite.size == 0:
        raise EmptyDataError("all values are non-finite")
    zlo, zhi = float(finite.min()), float(finite.max())
    frame = _Frame((float(x.min()), float(x.max())), (float(y.min()), float(y.max())))
    body = []
    edges_x = np.concatenate([[x[0]], 0.5 * (x[1:] + x[:-1]), [x[-1]]]) if x.size > 1 else np.array([x[0], x[0] + 1])
    edges_y = np.concatenate([[y[0]], 0.5 * (y[1:] + y[:-1]), [y[-1]]]) if y.size > 1 else np.array([y[0], y[0] + 1])
    flat = zhi == zlo
    bands = np.linspace(zlo, zhi, levels + 1)
    for i in range(y.size):
        for j in range(x.size):
            v = z[i, j]
            if not math.isfinite(v):
                continue
            band = 0 if flat else min(int(np.searchsorted(bands, v, side="right")) - 1, levels - 1)
            fill = _colour(0.5 if flat else (band + 0.5) / levels)
            px0, px1 = frame.px(edges_x[j]), frame.px(edges_x[j + 1])
            py0, py1 = frame.py(edges_y[i + 1]), frame.py(edges_y[i])
            body.append(f'<rect x="{px0:.2f}" y="{py0:.2f}" width="{px1 - px0:.2f}" height="{py1 - py0:.2f}" '
                        f'fill="{fill}" stroke="none"/>')
    if not flat and x.size > 1 and y.size > 1:
        for level in bands[1:-1]:
            segs = marching_squares(x, y, z, level)
            if not segs:
                continue
            d = " ".join(f"M{frame.px(a[0]):.2f},{frame.py(a[1]):.2f} L{frame.px(b[0]):.2f},{frame.py(b[1]):.2f}"
                         for a, b in segs)
            body.append(f'<path class="contour" d="{d}" fill="none" stroke="#000" stroke-width="0.8" '
                        f'data-level="{_fmt(level)}"/>')
    body += frame.axes(xlabel, ylabel, title)
    body.append(f'<text x="{WIDTH - MARGIN["right"]}" y="18" text-anchor="end">range {_fmt(zlo)} to {_fmt(zhi)}</text>')
    for px_, py_, kind in markers or []:
        body.append(_marker(frame, px_, py_, kind, "#c0392b"))
    return _document(body)


def emit_plot(data, style: str = "line", target=None, **kwargs) -> str:
    """Render a sweep or grid as SVG text (written to ``target`` if given).

    ``style='line'`` takes a :class:`~qtransport.efficiency.SweepResult` (the
    refined argmax and argmin are marked) or a list of :class:`LineSeries`.
    ``style='contour'`` takes a ContourResult (``daoqt`` over kappa and mu)
    or an ``(x, y, z)`` triple.
    """
    if style == "line":
        if hasattr(data, "values") and hasattr(data, "eta"):
            if len(data.values) == 0:
                raise EmptyDataError("empty sweep")
            series = [LineSeries(data.method.value, data.values, data.eta)]
            markers = []
            if np.any(np.isfinite(data.eta)):
                markers = [(data.opt_value, data.opt_eta, "max", 0), (data.min_value, data.min_eta, "min", 0)]
            kwargs.setdefault("xlabel", f"{data.axis} / nu")
            eta0 = np.asarray(data.eta0)
            if np.ptp(eta0) == 0:
                kwargs.setdefault("reference", float(eta0[0]))
            svg = line_svg(series, markers=markers, **kwargs)
        else:
            svg = line_svg(list(data), **kwargs)
    elif style == "contour":
        if hasattr(data, "kappa") and hasattr(data, "mu"):
            kwargs.setdefault("title", f"eta - eta0 at omega = {_fmt(data.omega)} nu")
            svg = contour_svg(data.kappa, data.mu, data.daoqt, **kwargs)
        else:
            x, y, z = data
            svg = contour_svg(x, y, z, **kwargs)
    else:
        raise ValueError(f"unknown plot style {style!r}")
    if target is not None:
        Path(target).write_text(svg)
    return svg
