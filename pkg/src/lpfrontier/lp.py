"""Assembly and solution of the frontier linear program.

Given a sorted sample (X_i, Y_i), the coefficients alpha of
``f_hat(x) = sum_i alpha_i K_h(x, X_i)`` solve

    minimize    sum_i alpha_i
    subject to  A alpha >= Y                                (cover)
                |B alpha| <= L g_max C_beta(K,K') log N / (N h^2)  (slope at 0, X_1..X_N, 1)
                D^T alpha <= C_alpha h                      (mass per bin of width 1/m_h)
                alpha >= 0
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .kernel import QUADRIWEIGHT, CorrectedKernel, KernelFunctionals, compute_functionals
from .simplex import NumericalBreakdown, Status, dual_simplex

__all__ = [
    "LPBuildParams",
    "LPProblem",
    "LPSolution",
    "NumericalBreakdown",
    "Status",
    "build_frontier_lp",
    "solve",
    "brute_force_solve",
    "deriv_bound",
    "dump_lp",
    "load_lp",
]

C_ALPHA_RULE = 6.5


@dataclass(frozen=True)
class LPBuildParams:
    h: float
    c_alpha: float
    L_f_beta: float
    beta: float
    f_max: float
    functionals: KernelFunctionals = None

    def __post_init__(self):
        if not 0.0 < self.h < 0.5:
            raise ValueError(f"bandwidth h must lie in (0, 1/2), got {self.h}")
        if not self.c_alpha > 6.0 * self.f_max:
            raise ValueError(
                f"c_alpha={self.c_alpha} must exceed 6*f_max={6.0 * self.f_max}"
            )
        if self.m_h < 2:
            raise ValueError("need floor(1/h) >= 2 bins")
        if self.L_f_beta < 0:
            raise ValueError("Lipschitz constant must be nonnegative")
        if self.functionals is None:
            object.__setattr__(self, "functionals", compute_functionals(QUADRIWEIGHT, self.beta))

    @property
    def m_h(self):
        return int(np.floor(1.0 / self.h))

    @classmethod
    def for_frontier(cls, f, h, c_alpha=None, lipschitz=None, functionals=None):
        """Parameters for frontier ``f``; ``c_alpha`` defaults to 6.5 f_max."""
        return cls(
            h=h,
            c_alpha=C_ALPHA_RULE * f.f_max if c_alpha is None else c_alpha,
            L_f_beta=f.L_f_beta if lipschitz is None else lipschitz,
            beta=f.beta,
            f_max=f.f_max,
            functionals=functionals,
        )


def deriv_bound(p, n):
    """Two-sided slope bound L g_max C_beta(K,K') log N / (N h^2)."""
    fn = p.functionals
    return p.L_f_beta * fn.g_max * fn.c_beta_KKp * np.log(n) / (n * p.h**2)


@dataclass
class LPProblem:
    x: np.ndarray
    Y: np.ndarray
    A: sparse.csr_matrix
    B: sparse.csr_matrix
    D: sparse.csr_matrix
    deriv_bound: float
    bin_bound: float
    h: float
    kernel: CorrectedKernel = None
    params: LPBuildParams = None

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def objective(self):
        return np.ones(self.n)

    @property
    def m_h(self):
        return self.D.shape[1]

    @property
    def n_rows(self):
        return self.A.shape[0] + 2 * self.B.shape[0] + self.D.shape[1]

    def stacked(self):
        """(M, lo, hi) with rows ordered cover, slope, bins."""
        M = sparse.vstack([self.A, self.B, self.D.T.tocsr()], format="csr")
        nb, nd = self.B.shape[0], self.D.shape[1]
        lo = np.concatenate((self.Y, np.full(nb, -self.deriv_bound), np.full(nd, -np.inf)))
        hi = np.concatenate((np.full(self.n, np.inf), np.full(nb, self.deriv_bound),
                             np.full(nd, self.bin_bound)))
        return M, lo, hi

    def residuals(self, alpha):
        """Constraint violations (positive = violated) for each family."""
        alpha = np.asarray(alpha, dtype=float)
        return {
            "cover": float(np.max(self.Y - self.A @ alpha, initial=0.0)),
            "slope": float(np.max(np.abs(self.B @ alpha) - self.deriv_bound, initial=-np.inf)),
            "bins": float(np.max(self.D.T @ alpha - self.bin_bound, initial=-np.inf)),
            "sign": float(np.max(-alpha, initial=0.0)),
        }

    def is_feasible(self, alpha, tol=1e-9):
        alpha = np.asarray(alpha, dtype=float)
        return bool(
            np.all(self.A @ alpha >= self.Y - tol * (1.0 + np.abs(self.Y)))
            and np.all(np.abs(self.B @ alpha) <= self.deriv_bound + tol * (1.0 + self.deriv_bound))
            and np.all(self.D.T @ alpha <= self.bin_bound + tol * (1.0 + self.bin_bound))
            and np.all(alpha >= -tol)
        )


@dataclass
class LPSolution:
    alpha: np.ndarray
    objective_value: float
    status: Status
    iterations: int
    dual_objective: float = float("nan")
    certificate: dict = None
    info: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status == Status.OPTIMAL


def bin_matrix(x, m_h):
    """N x m_h indicators of (j-1)/m_h <= x < j/m_h; x == 1 joins the last bin."""
    x = np.asarray(x, dtype=float)
    j = np.minimum(np.floor(x * m_h).astype(int), m_h - 1)
    n = x.shape[0]
    return sparse.csr_matrix((np.ones(n), (np.arange(n), j)), shape=(n, m_h))


def build_frontier_lp(sample, params, kernel=None, deriv_bound_override=None):
    """Assemble the frontier LP for a sorted sample.

    The slope rows are evaluated at X_0 = 0, X_1, ..., X_N, X_{N+1} = 1.
    """
    n = len(sample)
    if n == 0:
        raise ValueError("sample is empty")
    x = np.asarray(sample.x, dtype=float)
    if np.any(np.diff(x) < 0):
        raise ValueError("sample must be sorted by x")
    if kernel is None:
        kernel = CorrectedKernel(QUADRIWEIGHT, params.h)
    elif kernel.h != params.h:
        raise ValueError("kernel bandwidth does not match params.h")
    A = kernel.matrix(x, x, (0,))
    B = kernel.matrix(sample.padded_x(), x, (1,))
    D = bin_matrix(x, params.m_h)
    db = deriv_bound(params, n) if deriv_bound_override is None else float(deriv_bound_override)
    return LPProblem(
        x=x,
        Y=np.asarray(sample.y, dtype=float),
        A=A,
        B=B,
        D=D,
        deriv_bound=db,
        bin_bound=params.c_alpha * params.h,
        h=params.h,
        kernel=kernel,
        params=params,
    )


def solve(prob, tol=1e-9, max_iter=None, **kwargs):
    """Solve the frontier LP with the revised dual simplex.

    Raises :class:`NumericalBreakdown` on an ill-conditioned basis.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M, lo, hi = prob.stacked()
    res = dual_simplex(prob.objective, M, lo, hi, tol=tol, max_iter=max_iter, **kwargs)
    if res.status == Status.OPTIMAL:
        alpha = np.maximum(res.x, 0.0)
    else:
        alpha = res.x
    return LPSolution(
        alpha=alpha,
        objective_value=float(np.sum(alpha)),
        status=res.status,
        iterations=res.iterations,
        dual_objective=res.dual_objective,
        certificate=res.certificate,
        info={
            "bland_iterations": res.bland_iterations,
            "basis_size": res.basis_size,
            "max_condition": res.max_condition,
        },
    )


def brute_force_solve(prob, tol=1e-9):
    """Exhaustive vertex enumeration for tiny instances (N <= 3).

    Every vertex of {alpha >= 0, constraints} is the solution of N active
    constraints; all subsets are tried and the cheapest feasible vertex is
    returned.  The feasible set lies in the nonnegative orthant, so it is empty
    exactly when no vertex is feasible.
    """
    n = prob.n
    if n > 3:
        raise ValueError("brute force is limited to N <= 3")
    A, B, D = prob.A.toarray(), prob.B.toarray(), prob.D.toarray()
    rows = [A, B, B, D.T, np.eye(n)]
    rhs = [prob.Y, np.full(B.shape[0], prob.deriv_bound), np.full(B.shape[0], -prob.deriv_bound),
           np.full(D.shape[1], prob.bin_bound), np.zeros(n)]
    G = np.vstack(rows)
    b = np.concatenate(rhs)
    best = None
    for idx in itertools.combinations(range(G.shape[0]), n):
        sub = G[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12 * max(1.0, np.abs(sub).max()) ** n:
            continue
        cand = np.linalg.solve(sub, b[list(idx)])
        if prob.is_feasible(cand, tol=1e-8):
            val = float(cand.sum())
            if best is None or val < best[0] - 1e-15:
                best = (val, cand)
    if best is None:
        return LPSolution(np.zeros(n), float("nan"), Status.INFEASIBLE, 0)
    return LPSolution(np.maximum(best[1], 0.0), best[0], Status.OPTIMAL, 0)


def brute_force_grid(prob, resolution=41, refinements=2, tol=1e-9):
    """Grid search over alpha in [0, cap]^N, refined around the best cell.

    ``cap`` is twice the objective of the diagonal covering alpha_i = Y_i / A_ii.
    Agrees with the exact optimum only up to the final grid spacing.
    """
    n = prob.n
    if n > 3:
        raise ValueError("brute force is limited to N <= 3")
    diag = prob.A.diagonal()
    pos = diag > 0
    if not np.any(pos):
        cap = 1.0
    else:
        cap = 2.0 * float(np.sum(np.maximum(prob.Y[pos], 0.0) / diag[pos])) + 1e-12
    lo, hi = np.zeros(n), np.full(n, cap)
    A, B, Dt = prob.A.toarray(), prob.B.toarray(), prob.D.T.toarray()
    best = None
    for _ in range(refinements + 1):
        axes = [np.linspace(lo[i], hi[i], resolution) for i in range(n)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        ok = (
            np.all(grid @ A.T >= prob.Y - tol * (1 + np.abs(prob.Y)), axis=1)
            & np.all(np.abs(grid @ B.T) <= prob.deriv_bound * (1 + tol) + tol, axis=1)
            & np.all(grid @ Dt.T <= prob.bin_bound * (1 + tol) + tol, axis=1)
        )
        if not ok.any():
            break
        feas = grid[ok]
        i = int(np.argmin(feas.sum(axis=1)))
        best = feas[i]
        step = (hi - lo) / (resolution - 1)
        lo = np.maximum(best - 2 * step, 0.0)
        hi = best + 2 * step
    if best is None:
        return LPSolution(np.zeros(n), float("nan"), Status.INFEASIBLE, 0)
    return LPSolution(best, float(best.sum()), Status.OPTIMAL, 0)


def dump_lp(prob, fh):
    """Write the LP as plain text.

    Layout: a ``min`` line with the objective coefficients, then one line per
    constraint ``<sense> <rhs> <coeff_1> ... <coeff_N>`` with sense ``>=`` or
    ``<=``; variables are implicitly nonnegative.  Two-sided slope rows are
    written as one ``<=`` and one ``>=`` line.
    """
    fmt = lambda v: f"{v:.17g}"
    fh.write("min " + " ".join(fmt(v) for v in prob.objective) + "\n")
    A, B, Dt = prob.A.toarray(), prob.B.toarray(), prob.D.T.toarray()
    for row, y in zip(A, prob.Y):
        fh.write(f">= {fmt(y)} " + " ".join(fmt(v) for v in row) + "\n")
    for row in B:
        fh.write(f"<= {fmt(prob.deriv_bound)} " + " ".join(fmt(v) for v in row) + "\n")
        fh.write(f">= {fmt(-prob.deriv_bound)} " + " ".join(fmt(v) for v in row) + "\n")
    for row in Dt:
        fh.write(f"<= {fmt(prob.bin_bound)} " + " ".join(fmt(v) for v in row) + "\n")


def load_lp(fh):
    """Read a :func:`dump_lp` file into ``(c, G, senses, rhs)``."""
    lines = [ln.split() for ln in fh if ln.strip()]
    if not lines or lines[0][0] != "min":
        raise ValueError("LP file must start with a 'min' line")
    c = np.array([float(v) for v in lines[0][1:]])
    senses, rhs, rows = [], [], []
    for parts in lines[1:]:
        if parts[0] not in (">=", "<="):
            raise ValueError(f"bad sense {parts[0]!r}")
        senses.append(parts[0])
        rhs.append(float(parts[1]))
        rows.append([float(v) for v in parts[2:]])
    return c, np.array(rows).reshape(len(rows), c.shape[0]), senses, np.array(rhs)
