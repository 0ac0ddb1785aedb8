"""The fitted frontier ``f_hat(x) = sum_i alpha_i K_h(x, X_i)`` and its diagnostics."""

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .kernel import QUADRIWEIGHT, CorrectedKernel
from .quadrature import panel_nodes, subdivide

_EDGE_PIECES = 16
_AUDIT_GRID = 10_000


@dataclass(frozen=True)
class FrontierEstimate:
    centers: np.ndarray
    alpha: np.ndarray
    kernel: CorrectedKernel

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        a = np.asarray(self.alpha, dtype=float)
        if c.shape != a.shape or c.ndim != 1:
            raise ValueError("centers and alpha must be 1-d arrays of equal length")
        if np.any(np.diff(c) < 0):
            raise ValueError("centers must be sorted")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "alpha", a)
        active = a != 0.0
        object.__setattr__(self, "_c", c[active])
        object.__setattr__(self, "_a", a[active])

    @property
    def h(self):
        return self.kernel.h

    @property
    def n(self):
        return self.centers.shape[0]

    @classmethod
    def from_solution(cls, prob, sol):
        return cls(prob.x, sol.alpha, prob.kernel)

    def eval(self, x, order=0):
        """f_hat (order 0) or f_hat' (order 1) at x in [0, 1]."""
        if order not in (0, 1):
            raise ValueError("order must be 0 or 1")
        return self.kernel.weighted_sum(x, self._c, self._a, order)

    __call__ = eval

    def breakpoints(self):
        """Points where f_hat may lose smoothness, plus a fine split of the corrected edges."""
        h = self.h
        pts = [np.array([0.0, 1.0, h, 1.0 - h])]
        pts.append(np.clip(np.concatenate((self._c - h, self._c + h)), 0.0, 1.0))
        pts.append(subdivide(0.0, h, _EDGE_PIECES))
        pts.append(subdivide(1.0 - h, 1.0, _EDGE_PIECES))
        return np.concatenate(pts)

    def to_csv(self):
        buf = io.StringIO()
        buf.write("x,alpha\n")
        for c, a in zip(self.centers, self.alpha):
            buf.write(f"{c:.17g},{a:.17g}\n")
        return buf.getvalue()

    def sidecar(self, objective):
        return {
            "h": self.h,
            "kernel": self.kernel.base.name,
            "N": int(self.n),
            "objective": float(objective),
        }

    @classmethod
    def from_csv(cls, text, h, base=QUADRIWEIGHT):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["x", "alpha"]:
            raise ValueError("estimate CSV must start with header 'x,alpha'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
        return cls(data[:, 0], data[:, 1], CorrectedKernel(base, h))


def evaluate(e, x, order=0):
    return e.eval(x, order)


def surface(e, order=8):
    """(sum of alpha, integral of f_hat over [0, 1])."""
    if e._a.size == 0:
        return 0.0, 0.0
    x, w = panel_nodes(e.breakpoints(), order)
    return float(np.sum(e.alpha)), float(np.dot(w, e.eval(x)))


def surface_bounds(c_alpha, K_max, g_max, h):
    """Admissible range of integral - sum(alpha) for a fit obeying the bin constraints."""
    return -2.0 * c_alpha * K_max * h, 4.0 * c_alpha * (g_max - 1.0) * K_max * h


@dataclass(frozen=True)
class L1Split:
    l1: float
    signed: float
    negative_part: float

    @property
    def residual(self):
        """l1 - (signed + 2 * negative_part); zero up to rounding."""
        return self.l1 - (self.signed + 2.0 * self.negative_part)


def l1_decomposition(e, f, order=5, min_panels=None):
    """``int |f_hat - f|`` with its split ``int (f_hat - f) + 2 int (f - f_hat) 1{f_hat < f}``.

    Uses at least ``20 * max(N, 1/h)`` uniform panels, merged with kernel and
    frontier breakpoints; all three integrals share the same nodes.
    """
    if min_panels is None:
        min_panels = 20 * max(e.n, int(np.ceil(1.0 / e.h)))
    pts = np.concatenate((np.linspace(0.0, 1.0, min_panels + 1), e.breakpoints(),
                          np.asarray(getattr(f, "kinks", ()), dtype=float)))
    x, w = panel_nodes(pts, order)
    # |f_hat - f| has a kink at each sign change; make those panel edges too
    pts = np.concatenate((pts, _sign_changes(lambda t: e.eval(t) - f(t), np.union1d(pts, x))))
    x, w = panel_nodes(pts, order)
    u = e.eval(x) - f(x)
    l1 = float(np.dot(w, np.abs(u)))
    signed = float(np.dot(w, u))
    neg = float(np.dot(w, np.where(u < 0.0, -u, 0.0)))
    return L1Split(l1, signed, neg)


def _sign_changes(u, pts):
    """Roots of ``u`` between consecutive sorted ``pts`` where it changes sign."""
    v = u(pts)
    idx = np.nonzero(v[:-1] * v[1:] < 0.0)[0]
    return np.array([optimize.brentq(u, pts[i], pts[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
                     for i in idx])


def l1_error(e, f, **kwargs):
    return l1_decomposition(e, f, **kwargs).l1


@dataclass(frozen=True)
class LipschitzAudit:
    grid_max: float
    violation_fraction: float
    constraint_max: float
    bound: float


def lipschitz_audit(e, bound, grid=_AUDIT_GRID):
    """Compare max |f_hat'| against ``bound``.

    The grid is ``grid`` + 1 uniform points plus every center; the constraint
    points are 0, the centers and 1.
    """
    cpts = np.concatenate(([0.0], e.centers, [1.0]))
    xs = np.concatenate((np.linspace(0.0, 1.0, grid + 1), e.centers))
    d = np.abs(e.eval(xs, 1))
    dc = np.abs(e.eval(cpts, 1))
    return LipschitzAudit(
        grid_max=float(d.max()),
        violation_fraction=float(np.mean(d > bound)),
        constraint_max=float(dc.max()),
        bound=float(bound),
    )


def lipschitz_bound(L_f_beta, g_max, c_beta_KKp, n, h):
    """2 L g_max C_beta(K,K') log N / (N h^2), the asymptotic slope bound of the fit."""
    return 2.0 * L_f_beta * g_max * c_beta_KKp * np.log(n) / (n * h**2)


def interval_max_bound(g0, g1, width, max_second_deriv):
    """Upper bound on max |g| over an interval from its end values and sup |g''|."""
    if width <= 0:
        raise ValueError("width must be positive")
    if max_second_deriv < 0:
        raise ValueError("max_second_deriv must be nonnegative")
    return max(abs(g0), abs(g1)) + width**2 / 8.0 * max_second_deriv


def write_estimate(e, objective, csv_fh, json_fh):
    csv_fh.write(e.to_csv())
    json.dump(e.sidecar(objective), json_fh, indent=2, sort_keys=True)
