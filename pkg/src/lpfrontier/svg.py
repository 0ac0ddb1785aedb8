"""A small self-contained SVG emitter for the two study figures."""

import math
from xml.sax.saxutils import escape

import numpy as np

_W, _H = 640, 420
_PAD = 56


class Figure:
    """Axes with linear data coordinates; callers take logs themselves."""

    def __init__(self, xlim, ylim, title="", xlabel="", ylabel="", width=_W, height=_H):
        self.xlim = tuple(float(v) for v in xlim)
        self.ylim = tuple(float(v) for v in ylim)
        self.width, self.height = width, height
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self._items = []

    def px(self, x):
        a, b = self.xlim
        return _PAD + (np.asarray(x, dtype=float) - a) / (b - a) * (self.width - 2 * _PAD)

    def py(self, y):
        a, b = self.ylim
        return self.height - _PAD - (np.asarray(y, dtype=float) - a) / (b - a) * (self.height - 2 * _PAD)

    def polyline(self, x, y, color="black", width=1.5, cls="", dash=None):
        pts = " ".join(f"{u:.3f},{v:.3f}" for u, v in zip(self.px(x), self.py(y)))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self._items.append(
            f'<polyline class="{cls}" fill="none" stroke="{color}" stroke-width="{width}"{extra} points="{pts}"/>'
        )

    def points(self, x, y, color="black", r=1.6, cls=""):
        for u, v in zip(self.px(x), self.py(y)):
            self._items.append(f'<circle class="{cls}" cx="{u:.3f}" cy="{v:.3f}" r="{r}" fill="{color}"/>')

    def text(self, x, y, s, size=12, anchor="start"):
        self._items.append(
            f'<text x="{x:.1f}" y="{y:.1f}" font-size="{size}" text-anchor="{anchor}">{escape(s)}</text>'
        )

    def _axes(self):
        x0, x1 = _PAD, self.width - _PAD
        y0, y1 = self.height - _PAD, _PAD
        out = [
            f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#444"/>'
        ]
        for v in np.linspace(*self.xlim, 5):
            u = float(self.px(v))
            out.append(f'<line x1="{u:.1f}" y1="{y0}" x2="{u:.1f}" y2="{y0 + 4}" stroke="#444"/>')
            out.append(f'<text x="{u:.1f}" y="{y0 + 16}" font-size="10" text-anchor="middle">{v:.3g}</text>')
        for v in np.linspace(*self.ylim, 5):
            u = float(self.py(v))
            out.append(f'<line x1="{x0 - 4}" y1="{u:.1f}" x2="{x0}" y2="{u:.1f}" stroke="#444"/>')
            out.append(f'<text x="{x0 - 6}" y="{u + 3:.1f}" font-size="10" text-anchor="end">{v:.3g}</text>')
        out.append(f'<text x="{self.width / 2}" y="{_PAD / 2}" font-size="14" text-anchor="middle">{escape(self.title)}</text>')
        out.append(f'<text x="{self.width / 2}" y="{self.height - 12}" font-size="12" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(
            f'<text x="14" y="{self.height / 2}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 14 {self.height / 2})">{escape(self.ylabel)}</text>'
        )
        return out

    def to_string(self):
        body = "\n".join(self._axes() + self._items)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n'
        )


def fit_figure(sample, frontier, estimate, grid=800):
    """Sample points, true frontier and the fitted frontier.

    The estimate is drawn through a grid that includes every X_i, so the
    cover property is visible at the points themselves.
    """
    xs = np.union1d(np.linspace(0.0, 1.0, grid + 1), sample.x)
    fh = estimate.eval(xs)
    ft = frontier(xs)
    top = max(float(fh.max()), float(ft.max()), float(sample.y.max(initial=0.0)))
    fig = Figure((0.0, 1.0), (0.0, 1.1 * top), title=f"Frontier fit, N = {sample.n}", xlabel="x", ylabel="y")
    fig.points(sample.x, sample.y, color="#888", cls="sample")
    fig.polyline(xs, ft, color="#1b7837", cls="truth", dash="6,4")
    fig.polyline(xs, fh, color="#b2182b", cls="estimate")
    fig.text(_PAD + 8, _PAD + 16, "dashed: true frontier, solid: estimate", size=11)
    return fig.to_string()


def rate_figure(levels, slope, intercept, theory_slope):
    """log mean L1 against log(log N / N) with the fitted and theoretical lines."""
    n = np.array([lv[0] for lv in levels], dtype=float)
    m = np.array([lv[1] for lv in levels])
    u = np.log(np.log(n) / n)
    v = np.log(m)
    line_u = np.array([u.min(), u.max()])
    fitted = intercept + slope * line_u
    # theory line anchored at the centroid of the data
    theory = v.mean() + theory_slope * (line_u - u.mean())
    lo = min(v.min(), fitted.min(), theory.min())
    hi = max(v.max(), fitted.max(), theory.max())
    pad = 0.1 * (hi - lo if hi > lo else 1.0)
    span = u.max() - u.min() if u.max() > u.min() else 1.0
    fig = Figure(
        (u.min() - 0.05 * span, u.max() + 0.05 * span), (lo - pad, hi + pad),
        title="L1 error rate", xlabel="log(log N / N)", ylabel="log mean L1 error",
    )
    fig.points(u, v, r=3.5, cls="level")
    fig.polyline(line_u, fitted, color="#b2182b", cls="fitted")
    fig.polyline(line_u, theory, color="#2166ac", cls="theory", dash="6,4")
    label = f"fitted slope {slope:.3f}, theory {theory_slope:.3f}" if math.isfinite(slope) else "no fit"
    fig.text(_PAD + 8, _PAD + 16, label, size=11)
    return fig.to_string()
