"""The ten acceptance criteria, each at its stated tolerance and runtime budget.

Under pytest every criterion records one PASS/FAIL line that is printed in the
terminal summary. Running this file as a script prints the same lines.
"""

import functools
import json
import math
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from lpfrontier.estimator import (
    FrontierEstimate,
    l1_decomposition,
    lipschitz_audit,
    lipschitz_bound,
    surface,
    surface_bounds,
)
from lpfrontier.kernel import QUADRIWEIGHT, CorrectedKernel, compute_functionals
from lpfrontier.lp import LPBuildParams, brute_force_solve, build_frontier_lp, solve
from lpfrontier.model import Sample, make_frontier, max_spacing, sample_support, spacing_constant
from lpfrontier.study import StudyConfig, bandwidth_schedule, cell_seed, run_study

SINE = make_frontier("sine", [1.0, 0.3])
RHO_TILDE = StudyConfig().rho_tilde
FN = compute_functionals(QUADRIWEIGHT, 1.0)
JOBS = min(4, os.cpu_count() or 1)

CRITERIA = []


def criterion(num, title, budget):
    """Register a check returning (ok, detail); the runtime budget is part of the verdict."""

    def deco(check):
        def run():
            t0 = time.perf_counter()
            try:
                ok, detail = check()
            except Exception as exc:
                ok, detail = False, f"raised {exc!r}"
            secs = time.perf_counter() - t0
            if budget is not None and secs > budget:
                ok, detail = False, f"{detail}; over budget"
            verdict = "PASS" if ok else "FAIL"
            limit = "no limit" if budget is None else f"of {budget:g}s"
            return ok, f"criterion {num:2d} {verdict}  {title}: {detail} [{secs:.1f}s {limit}]"

        def test(acceptance_log):
            ok, line = run()
            acceptance_log[num] = line
            print(line)
            assert ok, line

        test.__doc__ = check.__doc__
        CRITERIA.append((num, run))
        return test

    return deco


@functools.lru_cache(maxsize=None)
def fit(n, rep, base_seed):
    """Seeded sine-frontier fit at the scheduled bandwidth."""
    h = bandwidth_schedule(n, RHO_TILDE, 1.0)
    s = sample_support(SINE, n, cell_seed(base_seed, n, rep))
    p = LPBuildParams.for_frontier(SINE, h, functionals=FN)
    prob = build_frontier_lp(s, p)
    sol = solve(prob)
    est = FrontierEstimate.from_solution(prob, sol) if sol.optimal else None
    return s, prob, sol, est


def sandwich_fits():
    return [fit(n, r, 4) for n in (500, 1000) for r in range(15)]


def upper_bound_fits():
    return [fit(2000, r, 8) for r in range(40)]


def _gauss_legendre(a, b, func, pieces=8, order=10):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, pieces + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        total += half * np.dot(w, func(mid + half * t))
    return total


@criterion(1, "kernel identities", budget=5)
def test_criterion_01_kernel_identities():
    rng = np.random.default_rng(1)
    worst0 = worst1 = 0.0
    for h in (0.05, 0.1, 0.25):
        ck = CorrectedKernel(QUADRIWEIGHT, h)
        for x in rng.random(50):
            # K_h(x, .) is a polynomial in u on its support, so this rule is exact
            a, b = max(0.0, x - h), min(1.0, x + h)
            i0 = _gauss_legendre(a, b, lambda u: ck.eval(x, u))
            i1 = _gauss_legendre(a, b, lambda u: ck.eval(x, u, 1))
            worst0 = max(worst0, abs(i0 - 1.0))
            worst1 = max(worst1, abs(i1))
    ok = worst0 < 1e-8 and worst1 < 1e-6
    return ok, f"max |int K_h - 1| = {worst0:.2e} (< 1e-8), max |int d/dx K_h| = {worst1:.2e} (< 1e-6)"


@criterion(2, "corrected-kernel derivative bounds", budget=30)
def test_criterion_02_derivative_bounds():
    g = np.linspace(0.0, 1.0, 2000)
    ratios = []
    for h in (0.05, 0.1, 0.25):
        ck = CorrectedKernel(QUADRIWEIGHT, h)
        du = np.abs(ck.eval(g[:, None], g[None, :], 1, 1)).max()
        d3 = np.abs(ck.eval(g[:, None], g[None, :], 3, 0)).max()
        ratios.append(du / (FN.g_max * h**-3 * FN.L_Ktilde))
        ratios.append(d3 / (FN.g_max * h**-4 * FN.L_Ktilde2))
    ok = max(ratios) <= 1.0
    return ok, f"worst sup/bound ratio {max(ratios):.3f} over h in {{0.05, 0.1, 0.25}} on 2000^2 grid"


@criterion(3, "LP oracle equivalence", budget=10)
def test_criterion_03_lp_oracle():
    rng = np.random.default_rng(3)
    worst = 0.0
    mismatched = 0
    compared = 0
    for i in range(50):
        n = int(rng.integers(1, 4))
        s = sample_support(SINE, n, seed=1000 + i)
        h = float(rng.uniform(0.15, 0.45))
        p = LPBuildParams.for_frontier(SINE, h, functionals=FN)
        scale = float(rng.choice([1.0, 10.0, 100.0]))
        base = build_frontier_lp(s, p).deriv_bound
        prob = build_frontier_lp(s, p, deriv_bound_override=scale * base if n > 1 else None)
        a, b = solve(prob), brute_force_solve(prob)
        if a.status != b.status:
            mismatched += 1
        elif a.optimal:
            compared += 1
            worst = max(worst, abs(a.objective_value - b.objective_value))
    hand = build_frontier_lp(Sample(np.array([0.5]), np.array([0.5])),
                             LPBuildParams(h=0.25, c_alpha=6.5, L_f_beta=1.0, beta=1.0, f_max=1.0))
    sol = solve(hand)
    # one interior point: the cover row is active and g = 1 there
    expected = 0.5 * 0.25 / QUADRIWEIGHT.eval(0.0)
    hand_err = abs(sol.alpha[0] - expected)
    ok = mismatched == 0 and worst <= 1e-4 and hand_err <= 1e-9 and compared > 0
    return ok, (f"{compared} optimal / {50 - compared - mismatched} infeasible agree, "
                f"{mismatched} status mismatches, max gap {worst:.1e} (<= 1e-4); hand alpha error {hand_err:.1e}")


@criterion(4, "surface sandwich", budget=120)
def test_criterion_04_surface_sandwich():
    worst_lo = worst_hi = np.inf
    bad = 0
    fits = [f for f in sandwich_fits() if f[1] is not None]
    for s, prob, sol, est in fits:
        if not sol.optimal:
            bad += 1
            continue
        s_sum, s_int = surface(est)
        lo, hi = surface_bounds(prob.params.c_alpha, FN.K_max, FN.g_max, prob.h)
        d = s_int - s_sum
        worst_lo = min(worst_lo, d - lo)
        worst_hi = min(worst_hi, hi - d)
        if not (lo - 1e-8 <= d <= hi + 1e-8):
            bad += 1
    ok = bad == 0 and len(fits) == 30
    return ok, f"{30 - bad}/30 fits inside; min slack below {worst_lo:.3g}, above {worst_hi:.3g}"


@criterion(5, "cover and derivative feasibility", budget=None)
def test_criterion_05_feasibility():
    worst_cover = worst_slope = -np.inf
    count = 0
    for s, prob, sol, est in sandwich_fits() + upper_bound_fits():
        if not sol.optimal:
            continue
        count += 1
        worst_cover = max(worst_cover, float(np.max(s.y - est.eval(s.x))))
        audit = lipschitz_audit(est, prob.deriv_bound)
        worst_slope = max(worst_slope, audit.constraint_max - prob.deriv_bound)
    ok = count > 0 and worst_cover <= 1e-8 and worst_slope <= 1e-8
    return ok, (f"{count} optimal fits; max cover shortfall {worst_cover:.1e}, "
                f"max slope excess at constraint points {worst_slope:.1e} (both <= 1e-8)")


@criterion(6, "spacing law", budget=60)
def test_criterion_06_spacing():
    f = make_frontier("constant", [1.0])
    n = 5000
    limit = spacing_constant(f) * math.log(n) / n
    hits = sum(max_spacing(sample_support(f, n, cell_seed(6, n, r))) <= limit for r in range(200))
    ok = hits >= 0.99 * 200
    return ok, f"{hits}/200 replications within C_X log N / N (need >= 198)"


_STUDY = {}


def default_study():
    if "report" not in _STUDY:
        _STUDY["report"] = run_study(StudyConfig(jobs=JOBS))
    return _STUDY["report"]


@criterion(7, "convergence rate", budget=1800)
def test_criterion_07_rate():
    rep = default_study()
    big = [r for r in rep.rows if r.n >= 1000]
    failed = sum(not r.ok for r in big)
    ok = 0.35 <= rep.slope <= 0.65 and failed <= 0.05 * len(big)
    return ok, (f"slope {rep.slope:.3f} +/- {rep.stderr:.3f} (in [0.35, 0.65]); "
                f"{failed}/{len(big)} failed solves at N >= 1000; {JOBS} worker(s)")


@criterion(8, "objective upper bound", budget=300)
def test_criterion_08_objective_bound():
    gamma = 2 * SINE.L_f_beta * FN.g_max * FN.c_beta_K
    hits = 0
    worst = -np.inf
    for s, prob, sol, est in upper_bound_fits():
        if sol.optimal:
            bound = SINE.C_f + gamma * prob.h
            hits += sol.objective_value <= bound
            worst = max(worst, sol.objective_value - bound)
    ok = hits >= 0.95 * 40
    return ok, f"{hits}/40 runs with J* <= C_f + gamma h (need >= 38); max J* - bound {worst:.3g}"


@criterion(9, "L1 split identity", budget=None)
def test_criterion_09_l1_split():
    worst = 0.0
    count = 0
    for s, prob, sol, est in sandwich_fits() + upper_bound_fits():
        if est is None:
            continue
        split = l1_decomposition(est, SINE)
        worst = max(worst, abs(split.residual))
        count += 1
    ok = count > 0 and worst < 1e-10
    return ok, f"max |l1 - (signed + 2 neg)| = {worst:.1e} over {count} fits (< 1e-10)"


@criterion(10, "determinism of study outputs", budget=None)
def test_criterion_10_determinism():
    cfg = {"n_grid": [100, 200, 400, 800], "replications": 3, "base_seed": 10}
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "study.json").write_text(json.dumps(cfg))
        outputs = []
        for run in ("a", "b"):
            proc = subprocess.run(
                [sys.executable, "-m", "lpfrontier.cli", "study", "--config", str(tmp / "study.json"),
                 "--out", str(tmp / run), "--plot"],
                capture_output=True, text=True,
            )
            if proc.returncode != 0:
                return False, f"study exited {proc.returncode}: {proc.stderr.strip()}"
            outputs.append({p.name: p.read_bytes() for p in sorted((tmp / run).iterdir())})
    same = outputs[0] == outputs[1]
    return same, f"files {sorted(outputs[0])} byte-identical across two invocations: {same}"


def test_mean_error_below_rate_bound():
    rep = default_study()
    for n, mean, _ in rep.level_means():
        if n >= 2000:
            bound = rep.theory.rate_bound * (math.log(n) / n) ** 0.5 * 1.5
            assert mean < bound


def test_derivative_audit_between_constraint_points():
    # the slope bound of the fit holds on a fine grid in most runs at N = 2000
    runs = [f for f in upper_bound_fits() if f[3] is not None]
    good = 0
    for s, prob, sol, est in runs:
        bound = lipschitz_bound(SINE.L_f_beta, FN.g_max, FN.c_beta_KKp, s.n, prob.h)
        good += lipschitz_audit(est, bound).grid_max <= bound
    assert good >= 0.95 * len(runs)


if __name__ == "__main__":
    results = [run() for _, run in sorted(CRITERIA)]
    for _, line in results:
        print(line, flush=True)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
