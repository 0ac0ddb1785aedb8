"""Compactly supported basic kernel, boundary corrector and corrected kernel.

The basic kernel ``K`` is a polynomial on ``[-1, 1]`` and zero outside.  The
corrected kernel on ``[0, 1]`` is

    K_h(x, t) = g(x) / h * K((x - t) / h),
    g(x) = 1 / integral_{(x-1)/h}^{x/h} K(s) ds,

so that ``integral_0^1 K_h(x, u) du == 1`` for every ``x``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize, sparse

from . import _backend

MAX_ORDER = 3
_SUP_GRID = 10_000


def _sup_abs(poly, lo=-1.0, hi=1.0):
    """sup of |poly| on [lo, hi]: dense grid, then bounded refinement at the grid max."""
    t = np.linspace(lo, hi, _SUP_GRID + 1)
    v = np.abs(poly(t))
    i = int(np.argmax(v))
    a, b = t[max(i - 1, 0)], t[min(i + 1, len(t) - 1)]
    best = float(v[i])
    if b > a:
        res = optimize.minimize_scalar(
            lambda s: -abs(poly(s)), bounds=(a, b), method="bounded",
            options={"xatol": 1e-14},
        )
        best = max(best, -float(res.fun))
    return best


@dataclass(frozen=True)
class BasicKernel:
    """Polynomial kernel on [-1, 1], zero outside.

    ``coeffs`` are increasing-power coefficients of K on the support.
    """

    coeffs: tuple
    name: str = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @cached_property
    def poly(self):
        return Polynomial(self.coeffs)

    @cached_property
    def derivs(self):
        """K, K', K'', K''' as polynomials."""
        return tuple(self.poly.deriv(m) if m else self.poly for m in range(MAX_ORDER + 1))

    @cached_property
    def deriv_coeffs(self):
        """(MAX_ORDER+1, deg+1) coefficient table, zero padded, for the compiled core."""
        deg = len(self.coeffs) - 1
        table = np.zeros((MAX_ORDER + 1, deg + 1))
        for m, p in enumerate(self.derivs):
            c = p.coef
            table[m, : len(c)] = c
        return table

    @cached_property
    def antiderivative(self):
        # P(-1) == 0 so P(t) is the mass on [-1, t]
        return self.poly.integ(lbnd=-1.0)

    @cached_property
    def K_max(self):
        return _sup_abs(self.poly)

    @cached_property
    def L_K(self):
        """Lipschitz constant of K (sup |K'|)."""
        return _sup_abs(self.derivs[1])

    @cached_property
    def L_K1(self):
        """Lipschitz constant of K' (sup |K''|)."""
        return _sup_abs(self.derivs[2])

    @cached_property
    def L_K2(self):
        """Lipschitz constant of K'' (sup |K'''|)."""
        return _sup_abs(self.derivs[3])

    def __call__(self, t, order=0):
        return self.eval(t, order)

    def eval(self, t, order=0):
        if order not in range(MAX_ORDER + 1):
            raise ValueError(f"order must be in 0..{MAX_ORDER}, got {order}")
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) < 1.0
        out = np.where(inside, self.derivs[order](np.where(inside, t, 0.0)), 0.0)
        if order == 0:
            # the expanded polynomial can round slightly below zero near |t| = 1
            out = np.maximum(out, 0.0)
        return float(out) if out.ndim == 0 else out

    def integral(self, a, b):
        """Mass of K on [a, b]; the integrand is clipped to [-1, 1]."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if np.any(a > b):
            raise ValueError("integral bounds must satisfy a <= b")
        P = self.antiderivative
        out = P(np.clip(b, -1.0, 1.0)) - P(np.clip(a, -1.0, 1.0))
        return float(out) if out.ndim == 0 else out


def quadriweight():
    """K(t) = 315/256 (1 - t^2)^4, the lowest-degree even polynomial kernel that is C^3 on R."""
    base = Polynomial([1.0, 0.0, -1.0]) ** 4 * (315.0 / 256.0)
    return BasicKernel(tuple(base.coef), name="quadriweight")


QUADRIWEIGHT = quadriweight()


@dataclass(frozen=True)
class KernelFunctionals:
    beta: float
    c_beta_K: float
    c_beta_Kp: float
    c_beta_KKp: float
    g_max: float
    K_max: float
    L_K: float
    L_K1: float
    L_K2: float
    L_Ktilde: float
    L_Ktilde1: float
    L_Ktilde2: float

    def to_dict(self):
        return dict(self.__dict__)


def _weighted_moment(poly, beta):
    """integral_{-1}^{1} |t|^beta |poly(t)| dt, split at the sign changes of poly."""
    roots = [r.real for r in poly.roots() if abs(r.imag) < 1e-12 and -1 < r.real < 1]
    pts = sorted(set([-1.0, 0.0, 1.0] + roots))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(
            lambda t: abs(t) ** beta * abs(poly(t)), a, b, epsabs=1e-14, epsrel=1e-12,
            limit=200,
        )
        total += val
    return total


def compute_functionals(base=QUADRIWEIGHT, beta=1.0, h_ref=0.25):
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    c_k = _weighted_moment(base.derivs[0], beta)
    c_kp = _weighted_moment(base.derivs[1], beta)
    ck = CorrectedKernel(base, h_ref)
    xs = np.concatenate(([0.0, 1.0], np.linspace(0.0, 1.0, _SUP_GRID + 1)))
    g_max = float(np.max(ck.g(xs)))
    K_max, L_K, L_K1, L_K2 = base.K_max, base.L_K, base.L_K1, base.L_K2
    L_Kt = L_K1 + L_K * g_max * K_max
    L_Kt1 = L_K2 + L_K1 * g_max * K_max
    L_Kt2 = g_max * (
        L_K2
        + 3.0 * L_K1 * K_max * g_max
        + 3.0 * L_K * g_max * K_max**2 * (1.0 + 3.0 * g_max)
        + (L_K**2 + 2.0 * g_max**2 * K_max**4) * (1.0 + 2.0 * g_max)
    )
    return KernelFunctionals(
        beta=float(beta),
        c_beta_K=c_k,
        c_beta_Kp=c_kp,
        c_beta_KKp=g_max * K_max * c_k + c_kp,
        g_max=g_max,
        K_max=K_max,
        L_K=L_K,
        L_K1=L_K1,
        L_K2=L_K2,
        L_Ktilde=L_Kt,
        L_Ktilde1=L_Kt1,
        L_Ktilde2=L_Kt2,
    )


@dataclass(frozen=True)
class CorrectedKernel:
    """Boundary-corrected kernel K_h on [0, 1] for bandwidth ``h``."""

    base: BasicKernel = field(default=QUADRIWEIGHT)
    h: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.h < 0.5:
            raise ValueError(f"bandwidth h must lie in (0, 1/2), got {self.h}")

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < 0.0) | (x > 1.0)) or np.any(np.isnan(x)):
            raise ValueError("x must lie in [0, 1]")
        return x

    def mass(self, x):
        """integral_{(x-1)/h}^{x/h} K, the kernel mass kept inside [0, 1]."""
        h = self.h
        return self.base.integral((x - 1.0) / h, x / h)

    def g(self, x):
        x = self._check_x(x)
        return 1.0 / self.mass(x)

    def g_derivs(self, x, upto=MAX_ORDER):
        """[g, g', g'', g'''][: upto + 1] evaluated at x."""
        x = self._check_x(x)
        h, K = self.h, self.base
        g0 = 1.0 / self.mass(x)
        out = [g0]
        if upto == 0:
            return out
        lo, hi = (x - 1.0) / h, x / h
        q0 = (K.eval(lo, 0) - K.eval(hi, 0)) / h
        g1 = g0**2 * q0
        out.append(g1)
        if upto == 1:
            return out
        q1 = (K.eval(lo, 1) - K.eval(hi, 1)) / h**2
        g2 = 2.0 * g0 * g1 * q0 + g0**2 * q1
        out.append(g2)
        if upto == 2:
            return out
        q2 = (K.eval(lo, 2) - K.eval(hi, 2)) / h**3
        g3 = 2.0 * g1**2 * q0 + 2.0 * g0 * g2 * q0 + 4.0 * g0 * g1 * q1 + g0**2 * q2
        out.append(g3)
        return out

    def eval(self, x, t, x_order=0, t_order=0):
        """d^x_order/dx d^t_order/dt of K_h(x, t); total order at most 3."""
        if x_order < 0 or t_order < 0 or x_order + t_order > MAX_ORDER:
            raise ValueError("derivative orders must be nonnegative with sum <= 3")
        x = self._check_x(x)
        t = np.asarray(t, dtype=float)
        h = self.h
        gd = self.g_derivs(x, x_order)
        s = (x - t) / h
        total = 0.0
        for k in range(x_order + 1):
            m = x_order - k + t_order
            phi = self.base.eval(s, m) / h ** (m + 1)
            total = total + comb(x_order, k) * gd[k] * phi
        if t_order % 2:
            total = -total
        return float(total) if np.ndim(total) == 0 else total

    def __call__(self, x, t, x_order=0):
        return self.eval(x, t, x_order)

    def matrix(self, rows_x, centers, x_orders=(0,)):
        """Sparse matrices ``[d^n/dx^n K_h(rows_x[i], centers[j])]`` for each n in x_orders.

        ``centers`` must be sorted ascending.
        """
        rows_x = self._check_x(rows_x)
        centers = np.asarray(centers, dtype=float)
        top = max(x_orders)
        indptr, indices, data = _backend.band_matrix(
            rows_x, centers, self.h, self.base.deriv_coeffs[: top + 1]
        )
        gd = self.g_derivs(rows_x, top)
        counts = np.diff(indptr)
        shape = (rows_x.shape[0], centers.shape[0])
        mats = []
        h = self.h
        for n in x_orders:
            vals = np.zeros(indices.shape[0])
            for k in range(n + 1):
                m = n - k
                gk = np.repeat(gd[k], counts)
                vals = vals + comb(n, k) * gk * data[:, m] / h ** (m + 1)
            mats.append(sparse.csr_matrix((vals, indices, indptr), shape=shape))
        return mats if len(mats) > 1 else mats[0]

    def weighted_sum(self, xs, centers, weights, x_order=0):
        """``sum_j weights_j * d^n/dx^n K_h(xs, centers_j)``; centers sorted ascending."""
        xs = self._check_x(xs)
        scalar = xs.ndim == 0
        xs = np.atleast_1d(xs)
        sums = _backend.window_sums(
            xs, centers, weights, self.h, self.base.deriv_coeffs[: x_order + 1]
        )
        gd = self.g_derivs(xs, x_order)
        h = self.h
        out = np.zeros(xs.shape[0])
        for k in range(x_order + 1):
            m = x_order - k
            out = out + comb(x_order, k) * gd[k] * sums[:, m] / h ** (m + 1)
        return float(out[0]) if scalar else out


# module-level conveniences on the default kernel

def eval_K(t, order=0, base=QUADRIWEIGHT):
    return base.eval(t, order)


def integral_K(a, b, base=QUADRIWEIGHT):
    return base.integral(a, b)


def eval_g(x, h, base=QUADRIWEIGHT):
    return CorrectedKernel(base, h).g(x)


def eval_Kh(x, t, h, x_order=0, base=QUADRIWEIGHT):
    return CorrectedKernel(base, h).eval(x, t, x_order)
