"""Seeded convergence experiments over a grid of sample sizes."""

import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from .estimator import FrontierEstimate, l1_error
from .kernel import QUADRIWEIGHT, compute_functionals
from .lp import C_ALPHA_RULE, LPBuildParams, build_frontier_lp, solve
from .model import frontier_from_spec, sample_support
from .simplex import NumericalBreakdown

U64 = 0xFFFF_FFFF_FFFF_FFFF
H_MAX = 0.49
CSV_HEADER = "n,h,rep,seed,l1,objective,status,ms"
DEFAULT_GRID = (250, 500, 1000, 2000, 4000)
DEFAULT_FRONTIER = {"kind": "sine", "params": [1.0, 0.3]}


def bandwidth_schedule(n, rho_tilde, beta):
    """h = rho_tilde (log n / n)^(1/(1+beta)), clipped to 0.49."""
    if n < 3:
        raise ValueError("bandwidth schedule needs n >= 3")
    if rho_tilde <= 0:
        raise ValueError("rho_tilde must be positive")
    h = rho_tilde * (math.log(n) / n) ** (1.0 / (1.0 + beta))
    return min(h, H_MAX)


def default_rho_tilde(rho, beta):
    return 0.8 * rho ** (-1.0 / (1.0 + beta))


@dataclass(frozen=True)
class TheoryConstants:
    c12: float
    c4: float
    rate_bound: float

    def to_dict(self):
        return asdict(self)


def theory_constants(p, f, rho, rho_tilde):
    """Leading constants of the L1 rate for build parameters ``p`` and frontier ``f``.

    ``p.L_f_beta`` must be positive; callers with a constant frontier pass a
    floored Lipschitz constant through ``p``.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    L = p.L_f_beta
    if L <= 0:
        raise ValueError("Lipschitz constant must be positive (use a floor for constant frontiers)")
    fn = p.functionals
    beta = p.beta
    c12 = 2.0 * L * fn.g_max * fn.c_beta_KKp
    if beta == 1.0:
        c12 += 4.0 * p.c_alpha * (fn.g_max - 1.0) * fn.K_max
    r = 2.0 * f.C_f / L
    c4 = 2.0 * L * (
        r ** (beta / (1.0 + beta)) * (1.0 / rho) ** (2.0 / (1.0 + beta))
        + fn.g_max * fn.c_beta_KKp * r ** (1.0 / (1.0 + beta))
    )
    rate = c12 * rho_tilde**beta + 2.0 * c4 * rho_tilde**-2.0
    return TheoryConstants(c12, c4, rate)


@dataclass(frozen=True)
class StudyConfig:
    n_grid: tuple = DEFAULT_GRID
    replications: int = 20
    rho: float = 0.5
    rho_tilde: float = None
    beta: float = 1.0
    frontier: dict = field(default_factory=lambda: dict(DEFAULT_FRONTIER))
    c_alpha_rule: float = C_ALPHA_RULE
    base_seed: int = 0
    lipschitz_floor: float = 1e-6
    tol: float = 1e-9
    jobs: int = 1
    record_timing: bool = False

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if len(grid) < 4:
            raise ValueError("n_grid needs at least 4 sample sizes")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if grid[0] < 3:
            raise ValueError("sample sizes must be >= 3")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.rho_tilde is None:
            object.__setattr__(self, "rho_tilde", default_rho_tilde(self.rho, self.beta))
        limit = self.rho ** (-1.0 / (1.0 + self.beta))
        if not 0.0 < self.rho_tilde < limit:
            raise ValueError(f"rho_tilde must lie in (0, {limit:.6g}) for rho={self.rho}")
        if self.c_alpha_rule <= 6.0:
            raise ValueError("c_alpha_rule must exceed 6")
        if self.lipschitz_floor <= 0:
            raise ValueError("lipschitz_floor must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if not 0 <= int(self.base_seed) <= U64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "frontier", dict(self.frontier))
        # fail fast on a bad frontier spec
        self.make_frontier()

    def make_frontier(self):
        return frontier_from_spec(self.frontier)

    def lipschitz(self):
        return max(self.make_frontier().L_f_beta, self.lipschitz_floor)

    def to_dict(self):
        d = asdict(self)
        d["n_grid"] = list(self.n_grid)
        return d


def cell_seed(base_seed, n, rep):
    """base_seed XOR a 64-bit digest of (n, rep)."""
    digest = hashlib.blake2b(f"{n}:{rep}".encode(), digest_size=8).digest()
    return (int(base_seed) ^ int.from_bytes(digest, "little")) & U64


@lru_cache(maxsize=None)
def _functionals(beta):
    return compute_functionals(QUADRIWEIGHT, beta)


def build_params(cfg, n):
    f = cfg.make_frontier()
    return LPBuildParams(
        h=bandwidth_schedule(n, cfg.rho_tilde, cfg.beta),
        c_alpha=cfg.c_alpha_rule * f.f_max,
        L_f_beta=cfg.lipschitz(),
        beta=cfg.beta,
        f_max=f.f_max,
        functionals=_functionals(cfg.beta),
    )


@dataclass(frozen=True)
class StudyRow:
    n: int
    h: float
    rep: int
    seed: int
    l1: float
    objective: float
    status: str
    ms: float = None

    @property
    def ok(self):
        return self.status == "optimal"


@dataclass(frozen=True)
class CellResult:
    row: StudyRow
    sample: object
    problem: object
    solution: object
    estimate: object


def run_cell(cfg, n, rep, keep=False):
    """Sample, fit and score one (n, rep) cell; failures are recorded, never raised."""
    f = cfg.make_frontier()
    seed = cell_seed(cfg.base_seed, n, rep)
    p = build_params(cfg, n)
    t0 = time.perf_counter()
    s = sample_support(f, n, seed)
    prob = build_frontier_lp(s, p)
    sol = est = None
    try:
        sol = solve(prob, tol=cfg.tol)
        status = sol.status.value
    except NumericalBreakdown:
        status = "numerical_breakdown"
    l1 = objective = math.nan
    if status == "optimal":
        est = FrontierEstimate.from_solution(prob, sol)
        l1 = l1_error(est, f)
        objective = sol.objective_value
    ms = (time.perf_counter() - t0) * 1e3 if cfg.record_timing else None
    row = StudyRow(n, p.h, rep, seed, l1, objective, status, ms)
    if keep:
        return CellResult(row, s, prob, sol, est)
    return row


def _run_cell_args(args):
    return run_cell(*args)


def check_bandwidth_window(cfg):
    """Assert the rate conditions on h over the configured grid.

    log N / (N h^(1+beta)) must stay above rho, and log N / (N h^(1+beta/2))
    must decrease along the grid.
    """
    b = cfg.beta
    hs = [bandwidth_schedule(n, cfg.rho_tilde, b) for n in cfg.n_grid]
    lower = [math.log(n) / (n * h ** (1.0 + b)) for n, h in zip(cfg.n_grid, hs)]
    upper = [math.log(n) / (n * h ** (1.0 + b / 2.0)) for n, h in zip(cfg.n_grid, hs)]
    if min(lower) <= cfg.rho:
        raise AssertionError(f"bandwidth too large: log N/(N h^(1+beta)) = {min(lower):.6g} <= rho")
    if any(v >= u for u, v in zip(upper, upper[1:])):
        raise AssertionError("log N/(N h^(1+beta/2)) is not decreasing over the grid")
    return hs


@dataclass(frozen=True)
class StudyReport:
    rows: tuple
    slope: float
    stderr: float
    theory: TheoryConstants
    config: StudyConfig

    @property
    def failures(self):
        return [r for r in self.rows if not r.ok]

    def level_means(self):
        return level_means(self.rows)

    def to_csv(self):
        return rows_to_csv(self.rows)

    def summary(self):
        return {
            "slope": self.slope,
            "stderr": self.stderr,
            "theory": self.theory.to_dict(),
            "failures": len(self.failures),
            "levels": [{"n": n, "mean_l1": m, "runs": k} for n, m, k in self.level_means()],
            "config": self.config.to_dict(),
        }


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in (r.n, r.h, r.rep, r.seed, r.l1, r.objective, r.status, r.ms)))
        buf.write("\n")
    return buf.getvalue()


def level_means(rows):
    """(n, mean l1, count) over optimal rows, by increasing n."""
    by_n = {}
    for r in rows:
        if r.ok:
            by_n.setdefault(r.n, []).append(r.l1)
    # sorted values make the mean independent of row order
    return [(n, float(np.mean(sorted(v))), len(v)) for n, v in sorted(by_n.items())]


def rate_regression(rows):
    """scipy linregress of log(mean L1) on log(log N / N) over optimal rows."""
    if isinstance(rows, StudyReport):
        rows = rows.rows
    levels = level_means(rows)
    if len(levels) < 4:
        raise ValueError(f"rate fit needs >= 4 sample sizes with optimal runs, got {len(levels)}")
    n = np.array([lv[0] for lv in levels], dtype=float)
    m = np.array([lv[1] for lv in levels])
    return stats.linregress(np.log(np.log(n) / n), np.log(m))


def fit_rate(rows):
    """OLS slope and standard error of log(mean L1) on log(log N / N).

    Accepts a StudyReport or an iterable of rows; non-optimal rows are skipped.
    """
    res = rate_regression(rows)
    return float(res.slope), float(res.stderr)


def run_study(cfg):
    check_bandwidth_window(cfg)
    cells = [(cfg, n, rep) for n in cfg.n_grid for rep in range(cfg.replications)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_run_cell_args, cells, chunksize=1))
    else:
        rows = [run_cell(*c) for c in cells]
    rows = tuple(sorted(rows, key=lambda r: (r.n, r.rep)))
    try:
        slope, stderr = fit_rate(rows)
    except ValueError:
        slope = stderr = math.nan
    # the constants do not depend on h, so any grid point serves
    p = build_params(cfg, cfg.n_grid[-1])
    theory = theory_constants(p, cfg.make_frontier(), cfg.rho, cfg.rho_tilde)
    return StudyReport(rows, slope, stderr, theory, cfg)
