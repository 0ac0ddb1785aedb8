"""Revised dual simplex for ``min c.x  s.t.  lo <= M x <= hi,  x >= 0`` with ``c >= 0``.

Every row carries a logical variable ``s_r = M_r x`` bounded by ``[lo_r, hi_r]``.
With ``S`` the basic structural columns and ``R`` the rows whose logical is
nonbasic (at one of its bounds), the basis reduces to the square block
``M[R, S]``.  Its inverse is kept densely and updated by rank-one formulas for
the four pivot shapes (border, shrink, row swap, column swap), with a full
refactorization every ``refactor_every`` pivots.

Since ``c >= 0`` the all-logical basis is dual feasible, so no phase one is
needed: the dual simplex either reaches a primal feasible basis (optimal) or
finds a row whose tableau proves infeasibility.  Pricing is largest scaled
infeasibility with a Harris ratio test; after ``stall_limit`` pivots without
objective progress it switches to Bland's smallest-index rule, which cannot
cycle.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import sparse


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"


class NumericalBreakdown(RuntimeError):
    """Basis became too ill-conditioned to continue."""


@dataclass
class SimplexResult:
    x: np.ndarray
    status: Status
    iterations: int
    objective: float
    duals: np.ndarray
    dual_objective: float
    certificate: dict = None
    bland_iterations: int = 0
    max_condition: float = 1.0
    basis_size: int = 0
    info: dict = field(default_factory=dict)


class _Basis:
    """Inverse of M[R, S] plus dense caches of M[R, :] and M[:, S].

    Rows of ``inv`` follow S, columns follow R.  Removing an entry moves the
    last one into its slot so the caches never shift.
    """

    def __init__(self, csr, csc, cond_limit):
        self.csr = csr
        self.csc = csc
        m, n = csr.shape
        self.S = []
        self.R = []
        self.upper = []
        self.inv = np.zeros((0, 0))
        self._MR = np.zeros((8, n))
        self._MS = np.zeros((m, 8), order="F")
        self.cond_limit = cond_limit
        self.max_cond = 1.0
        self.updates = 0

    @property
    def MR(self):
        return self._MR[: len(self.R)]

    @property
    def MS(self):
        return self._MS[:, : len(self.S)]

    def row(self, p):
        out = np.zeros(self.csr.shape[1])
        lo, hi = self.csr.indptr[p], self.csr.indptr[p + 1]
        out[self.csr.indices[lo:hi]] = self.csr.data[lo:hi]
        return out

    def column(self, q):
        out = np.zeros(self.csc.shape[0])
        lo, hi = self.csc.indptr[q], self.csc.indptr[q + 1]
        out[self.csc.indices[lo:hi]] = self.csc.data[lo:hi]
        return out

    def _grow(self):
        k = len(self.S)
        if k >= self._MR.shape[0]:
            self._MR = np.vstack((self._MR, np.zeros_like(self._MR)))
            self._MS = np.asfortranarray(np.hstack((self._MS, np.zeros_like(self._MS))))

    def refactor(self):
        k = len(self.S)
        self.updates = 0
        if k == 0:
            self.inv = np.zeros((0, 0))
            return
        B = self.MR[:, self.S]
        try:
            inv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown("singular basis") from exc
        cond = np.linalg.norm(B, 1) * np.linalg.norm(inv, 1)
        self.max_cond = max(self.max_cond, cond)
        if not np.isfinite(cond) or cond > self.cond_limit:
            raise NumericalBreakdown(f"basis condition estimate {cond:.3g} exceeds limit")
        self.inv = inv

    def border(self, p, q, rho, at_upper, pivot, w):
        # rho = M[p, S] inv, pivot = M[p, q] - rho . M[R, q], w = M[p, :]
        k = len(self.S)
        u = self.inv @ self.MR[:, q]
        new = np.empty((k + 1, k + 1))
        new[:k, :k] = self.inv + np.outer(u, rho) / pivot
        new[:k, k] = -u / pivot
        new[k, :k] = -rho / pivot
        new[k, k] = 1.0 / pivot
        self.inv = new
        self._grow()
        self._MR[k] = w
        self._MS[:, k] = self.column(q)
        self.S.append(q)
        self.R.append(p)
        self.upper.append(at_upper)
        self.updates += 1

    def swap_row(self, a, p, rho, at_upper, w):
        # row R[a] replaced by row p; pivot rho[a]
        col_a = self.inv[:, a].copy()
        delta = rho.copy()
        delta[a] -= 1.0
        self.inv -= np.outer(col_a, delta) / rho[a]
        self._MR[a] = w
        self.R[a] = p
        self.upper[a] = at_upper
        self.updates += 1

    def swap_col(self, b, q):
        u = self.inv @ self.MR[:, q]
        row_b = self.inv[b, :] / u[b]
        self.inv -= np.outer(u, row_b)
        self.inv[b, :] = row_b
        self._MS[:, b] = self.column(q)
        self.S[b] = q
        self.updates += 1

    def shrink(self, b, a):
        piv = self.inv[b, a]
        f = self.inv[:, a].copy()
        g = self.inv[b, :].copy()
        self.inv -= np.outer(f, g) / piv
        last = len(self.S) - 1
        # move the last S entry into slot b and the last R entry into slot a
        self.inv[b, :] = self.inv[last, :]
        self.inv[:, a] = self.inv[:, last]
        self.inv = self.inv[:last, :last].copy()
        self._MS[:, b] = self._MS[:, last]
        self._MR[a] = self._MR[last]
        self.S[b] = self.S[last]
        self.R[a] = self.R[last]
        self.upper[a] = self.upper[last]
        del self.S[last], self.R[last], self.upper[last]
        self.updates += 1


def dual_simplex(
    c,
    M,
    lo,
    hi,
    tol=1e-9,
    max_iter=None,
    refactor_every=64,
    stall_limit=50,
    cond_limit=1e14,
    bland=False,
):
    """Solve ``min c.x  s.t.  lo <= M x <= hi,  x >= 0``.

    Parameters
    ----------
    c : (n,) array, must be nonnegative
    M : (m, n) sparse or dense matrix
    lo, hi : (m,) arrays, ``-inf`` / ``inf`` for absent sides
    tol : feasibility (relative) and optimality tolerance
    max_iter : pivot budget, default ``50 * (m + n)``
    bland : start in Bland's rule instead of switching on stall

    Raises
    ------
    NumericalBreakdown
        if a refactorized basis has condition estimate above ``cond_limit``.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("dual simplex start requires c >= 0")
    csr = sparse.csr_matrix(M, dtype=float)
    csc = csr.tocsc()
    m, n = csr.shape
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        return SimplexResult(np.zeros(n), Status.INFEASIBLE, 0, 0.0, np.zeros(m), 0.0,
                             certificate={"reason": "row with lo > hi",
                                          "rows": np.nonzero(lo > hi)[0].tolist()})
    if max_iter is None:
        max_iter = 50 * (m + n)
    fixed = lo == hi
    row_norm = np.sqrt(np.asarray(csr.multiply(csr).sum(axis=1)).ravel())
    row_norm[row_norm == 0] = 1.0
    lo_tol = tol * (1.0 + np.abs(np.where(np.isfinite(lo), lo, 0.0)))
    hi_tol = tol * (1.0 + np.abs(np.where(np.isfinite(hi), hi, 0.0)))

    basis = _Basis(csr, csc, cond_limit)
    in_S = np.zeros(n, dtype=bool)
    in_R = np.zeros(m, dtype=bool)
    use_bland = bland
    best_obj = -np.inf
    stall = 0
    bland_iters = 0
    verified = False
    it = 0

    while True:
        if basis.updates >= refactor_every:
            basis.refactor()
        S, R = basis.S, basis.R
        k = len(S)
        bR = np.array([hi[r] if up else lo[r] for r, up in zip(R, basis.upper)])
        xS = basis.inv @ bR if k else np.zeros(0)
        act = basis.MS @ xS if k else np.zeros(m)
        obj = float(c[S] @ xS) if k else 0.0

        below = (lo - act > lo_tol) & ~in_R
        above = (act - hi > hi_tol) & ~in_R
        neg = xS < -tol
        if not (below.any() or above.any() or neg.any()):
            if basis.updates and not verified:
                # confirm on a fresh factorization before declaring optimality
                basis.refactor()
                verified = True
                continue
            status = Status.OPTIMAL
            break
        verified = False
        if it >= max_iter:
            status = Status.ITERATION_LIMIT
            break

        if obj > best_obj + 1e-12 * (1.0 + abs(obj)):
            best_obj = obj
            stall = 0
            if not bland:
                use_bland = False
        else:
            stall += 1
            if stall >= stall_limit:
                use_bland = True

        # leaving variable
        if use_bland:
            bland_iters += 1
            cand_rows = np.nonzero(below | above)[0]
            cand_struct = [S[b] for b in np.nonzero(neg)[0]]
            best_row = n + cand_rows[0] if cand_rows.size else np.inf
            best_col = min(cand_struct) if cand_struct else np.inf
            if best_col < best_row:
                leave_kind, b = "struct", S.index(best_col)
            else:
                leave_kind, p = "row", int(cand_rows[0])
        else:
            score_rows = np.where(below, (lo - act), 0.0) + np.where(above, (act - hi), 0.0)
            score_rows = score_rows / row_norm
            score_struct = np.where(neg, -xS, 0.0)
            pr = int(np.argmax(score_rows))
            if k and score_struct.max() > score_rows[pr]:
                leave_kind, b = "struct", int(np.argmax(score_struct))
            else:
                leave_kind, p = "row", pr

        if leave_kind == "row":
            delta = 1.0 if below[p] else -1.0
        else:
            delta = 1.0

        # duals and reduced costs
        cS = c[S]
        yR = basis.inv.T @ cS if k else np.zeros(0)
        MR = basis.MR
        d = c - (yR @ MR if k else 0.0)

        # tableau row of the leaving variable
        if leave_kind == "row":
            w = basis.row(p)
            rho = basis.MS[p] @ basis.inv if k else np.zeros(0)
            alpha = w - (rho @ MR if k else 0.0)
        else:
            rho = basis.inv[b, :].copy()
            alpha = -(rho @ MR)

        # ratio test over nonbasic structurals and nonbasic logicals
        sigma = np.array([-1.0 if up else 1.0 for up in basis.upper]) if k else np.zeros(0)
        movable = ~fixed[R] if k else np.zeros(0, dtype=bool)
        a_struct = np.where(in_S, 0.0, delta * alpha)
        a_log = delta * sigma * rho
        scale = max(1.0, np.max(np.abs(alpha)) if n else 0.0, np.max(np.abs(rho)) if k else 0.0)
        piv_tol = 1e-9 * scale
        js = np.nonzero(a_struct > piv_tol)[0]
        ls = np.nonzero((a_log > piv_tol) & movable)[0] if k else np.zeros(0, dtype=int)
        if js.size == 0 and ls.size == 0:
            status = Status.INFEASIBLE
            certificate = _certificate(leave_kind, p if leave_kind == "row" else S[b],
                                       delta, R, rho, alpha, in_S, lo, hi, basis.upper,
                                       act if leave_kind == "row" else xS[b])
            break
        dj = np.maximum(d[js], 0.0)
        dl = np.maximum(sigma[ls] * yR[ls], 0.0) if k else np.zeros(0)
        ratios = np.concatenate((dj / a_struct[js], dl / a_log[ls]))
        pivots = np.concatenate((a_struct[js], a_log[ls]))
        ids = np.concatenate((js, n + np.asarray(R, dtype=int)[ls] if k else np.zeros(0, dtype=int)))
        if use_bland:
            rmin = ratios.min()
            ties = np.nonzero(ratios <= rmin + 1e-12 * (1.0 + rmin))[0]
            pick = ties[np.argmin(ids[ties])]
        else:
            slack = np.concatenate((dj + tol, dl + tol))
            theta = np.min(slack / pivots)
            ok = np.nonzero(ratios <= theta)[0]
            pick = ok[np.argmax(pivots[ok])]

        # pivot
        if pick < js.size:
            q = int(js[pick])
            if leave_kind == "row":
                basis.border(p, q, rho, delta < 0, alpha[q], w)
                in_R[p] = True
            else:
                in_S[S[b]] = False
                basis.swap_col(b, q)
            in_S[q] = True
        else:
            a = int(ls[pick - js.size])
            r_out = R[a]
            if leave_kind == "row":
                basis.swap_row(a, p, rho, delta < 0, w)
                in_R[p] = True
            else:
                in_S[S[b]] = False
                basis.shrink(b, a)
            in_R[r_out] = False
        it += 1

    x = np.zeros(n)
    if basis.S:
        x[basis.S] = xS
    y = np.zeros(m)
    dual_obj = 0.0
    if status == Status.OPTIMAL and basis.S:
        yR = basis.inv.T @ c[basis.S]
        y[basis.R] = yR
        dual_obj = float(yR @ bR)
    res = SimplexResult(
        x=x,
        status=status,
        iterations=it,
        objective=float(c @ x),
        duals=y,
        dual_objective=dual_obj,
        bland_iterations=bland_iters,
        max_condition=basis.max_cond,
        basis_size=len(basis.S),
    )
    if status == Status.INFEASIBLE:
        res.certificate = certificate
    return res


def _certificate(kind, var, delta, R, rho, alpha, in_S, lo, hi, upper, current):
    """Row combination proving that ``var`` cannot be brought within its bounds.

    The leaving variable equals ``rho . s_R + alpha . x_N`` plus a constant; every
    admissible move of a nonbasic variable pushes it the wrong way, so its best
    attainable value is the current one.
    """
    if kind == "row":
        value = float(current[var])
        required = float(lo[var] if delta > 0 else hi[var])
    else:
        value = float(current)
        required = 0.0
    return {
        "leaving": ("row", int(var)) if kind == "row" else ("column", int(var)),
        "direction": "increase" if delta > 0 else "decrease",
        "rows": [int(r) for r in R] + ([int(var)] if kind == "row" else []),
        "row_weights": [float(v) for v in rho],
        "max_attainable" if delta > 0 else "min_attainable": value,
        "required": required,
        "infeasibility": abs(required - value),
    }
