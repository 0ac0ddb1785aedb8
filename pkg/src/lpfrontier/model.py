"""True frontier functions and uniform samples from their hypographs."""

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FRONTIER_KINDS = ("constant", "sine", "piecewise_linear")


@dataclass(frozen=True)
class FrontierFunction:
    """Positive boundary f on [0, 1] with certified constants.

    ``kinks`` lists interior points where f is not smooth; quadrature panels
    are aligned to them.
    """

    kind: str
    params: tuple
    func: Callable = field(repr=False, compare=False)
    f_min: float
    f_max: float
    beta: float
    L_f_beta: float
    C_f: float
    kinks: tuple = ()

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def spec(self):
        return {"kind": self.kind, "params": list(self.params)}

    def constants(self):
        return {
            "f_min": self.f_min,
            "f_max": self.f_max,
            "beta": self.beta,
            "L_f_beta": self.L_f_beta,
            "C_f": self.C_f,
        }


def make_frontier(kind, params=()):
    """Build a test frontier.

    Parameters
    ----------
    kind : {"constant", "sine", "piecewise_linear"}
    params :
        constant -- ``[c]``;
        sine -- ``[a, b]`` or ``[a, b, k]`` for ``a + b sin(2 pi k x)``, k a positive integer;
        piecewise_linear -- knot values ``[y_0, ..., y_m]`` on an equispaced grid of [0, 1].
    """
    params = tuple(float(p) for p in params)
    if kind == "constant":
        if len(params) != 1:
            raise ValueError("constant frontier takes one parameter [c]")
        (c,) = params
        if c <= 0:
            raise ValueError("frontier must be positive")
        return FrontierFunction(
            kind, params, lambda x: np.full(np.shape(x), c) if np.ndim(x) else c,
            f_min=c, f_max=c, beta=1.0, L_f_beta=0.0, C_f=c,
        )
    if kind == "sine":
        if len(params) not in (2, 3):
            raise ValueError("sine frontier takes [a, b] or [a, b, k]")
        a, b = params[:2]
        k = params[2] if len(params) == 3 else 1.0
        if k != int(k) or k < 1:
            raise ValueError("sine frequency k must be a positive integer")
        if a - abs(b) <= 0:
            raise ValueError("frontier must be positive: need a > |b|")
        w = 2.0 * np.pi * k
        return FrontierFunction(
            kind, params, lambda x: a + b * np.sin(w * x),
            f_min=a - abs(b), f_max=a + abs(b), beta=1.0, L_f_beta=w * abs(b), C_f=a,
        )
    if kind == "piecewise_linear":
        if len(params) < 2:
            raise ValueError("piecewise_linear frontier needs at least two knot values")
        ys = np.array(params)
        if np.any(ys <= 0):
            raise ValueError("frontier must be positive")
        knots = np.linspace(0.0, 1.0, len(ys))
        slopes = np.diff(ys) / np.diff(knots)
        C_f = float(np.sum((ys[1:] + ys[:-1]) / 2.0 * np.diff(knots)))
        return FrontierFunction(
            kind, params, lambda x: np.interp(x, knots, ys),
            f_min=float(ys.min()), f_max=float(ys.max()), beta=1.0,
            L_f_beta=float(np.max(np.abs(slopes))), C_f=C_f,
            kinks=tuple(float(k) for k in knots[1:-1]),
        )
    raise ValueError(f"unknown frontier kind {kind!r}; expected one of {FRONTIER_KINDS}")


def frontier_from_spec(spec):
    return make_frontier(spec["kind"], spec.get("params", ()))


@dataclass(frozen=True)
class Sample:
    """Observations sorted by x; virtual endpoints X_0 = 0, X_{N+1} = 1 are implicit."""

    x: np.ndarray
    y: np.ndarray
    seed: int = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        order = np.argsort(x, kind="stable")
        object.__setattr__(self, "x", x[order])
        object.__setattr__(self, "y", y[order])

    def __len__(self):
        return self.x.shape[0]

    @property
    def n(self):
        return self.x.shape[0]

    def padded_x(self):
        """x with the virtual endpoints 0 and 1 attached."""
        return np.concatenate(([0.0], self.x, [1.0]))

    def to_csv(self):
        buf = io.StringIO()
        buf.write("x,y\n")
        for xi, yi in zip(self.x, self.y):
            buf.write(f"{xi:.17g},{yi:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, seed=None):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["x", "y"]:
            raise ValueError("sample CSV must start with header 'x,y'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float).reshape(-1, 2)
        return cls(data[:, 0], data[:, 1], seed=seed)


def make_rng(seed):
    """Counter-based Philox stream keyed by an unsigned 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


def sample_support(f, n, seed, return_stats=False):
    """Draw ``n`` points uniformly on {(x, y): 0 <= x <= 1, 0 <= y <= f(x)}.

    Rejection from the box [0, 1] x [0, f_max]; exact for any frontier and
    deterministic in ``seed``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = make_rng(seed)
    xs, ys = [], []
    got = drawn = 0
    batch = max(64, int(1.2 * n * f.f_max / f.C_f) + 16)
    while got < n:
        u = rng.random((batch, 2))
        x = u[:, 0]
        y = u[:, 1] * f.f_max
        keep = y <= f(x)
        drawn += batch
        xs.append(x[keep])
        ys.append(y[keep])
        got += int(keep.sum())
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    if return_stats:
        # acceptance over the full stream drawn, before truncation to n
        accepted = x.shape[0]
    x, y = x[:n], y[:n]
    s = Sample(x, y, seed=seed)
    if return_stats:
        return s, accepted, drawn
    return s


def max_spacing(s):
    """Largest gap between consecutive points of {0, X_1, ..., X_N, 1}."""
    if len(s) == 0:
        raise ValueError("sample is empty")
    return float(np.max(np.diff(s.padded_x())))


def spacing_constant(f):
    """C_X = 5 f_max / f_min, the default constant in the max-spacing law."""
    return 5.0 * f.f_max / f.f_min
