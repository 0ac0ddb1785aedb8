import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpfrontier.estimator import (
    FrontierEstimate,
    interval_max_bound,
    l1_decomposition,
    l1_error,
    lipschitz_audit,
    surface,
    surface_bounds,
)
from lpfrontier.kernel import QUADRIWEIGHT, CorrectedKernel
from lpfrontier.lp import LPBuildParams, build_frontier_lp, solve
from lpfrontier.model import make_frontier, sample_support

K0 = 315 / 256


def estimate(centers, alpha, h):
    return FrontierEstimate(np.asarray(centers, float), np.asarray(alpha, float), CorrectedKernel(QUADRIWEIGHT, h))


@pytest.fixture(scope="module")
def fitted():
    f = make_frontier("sine", [1.0, 0.3])
    n = 400
    h = 1.1313708498984762 * (math.log(n) / n) ** 0.5
    s = sample_support(f, n, seed=21)
    prob = build_frontier_lp(s, LPBuildParams.for_frontier(f, h))
    sol = solve(prob)
    assert sol.optimal
    return f, s, prob, sol, FrontierEstimate.from_solution(prob, sol)


def test_zero_coefficients():
    e = estimate([0.2, 0.5, 0.9], [0, 0, 0], 0.1)
    xs = np.linspace(0, 1, 50)
    assert np.all(e.eval(xs) == 0)
    assert surface(e) == (0.0, 0.0)
    assert lipschitz_audit(e, 1.0).grid_max == 0.0


def test_single_interior_center():
    e = estimate([0.5], [0.3], 0.2)
    assert e.eval(0.5) == pytest.approx(0.3 * K0 / 0.2, rel=1e-14)


def test_derivative_matches_finite_difference():
    rng = np.random.default_rng(0)
    c = np.sort(rng.random(30))
    e = estimate(c, rng.random(30), 0.15)
    xs = rng.uniform(1e-3, 1 - 1e-3, 100)
    step = 1e-6
    fd = (e.eval(xs + step) - e.eval(xs - step)) / (2 * step)
    d = e.eval(xs, 1)
    assert np.allclose(d, fd, rtol=1e-5, atol=1e-5 * np.abs(d).max())


def test_bad_order():
    with pytest.raises(ValueError):
        estimate([0.5], [1.0], 0.2).eval(0.5, 2)


def test_surface_interior_equals_sum():
    h = 0.1
    rng = np.random.default_rng(2)
    # every kernel support stays inside [h, 1 - h] where g = 1
    c = np.sort(rng.uniform(2 * h + 0.01, 1 - 2 * h - 0.01, 25))
    a = rng.random(25)
    s_sum, s_int = surface(estimate(c, a, h))
    assert s_int == pytest.approx(s_sum, abs=1e-12)


@pytest.mark.parametrize("h", [0.05, 0.2, 0.4])
def test_surface_of_edge_kernel(h):
    # with mass M(x) = int_{(x-1)/h}^{x/h} K, K_h(x, 0) = M'(x) / M(x) on [0, h],
    # so the integral is log M(h) - log M(0) = log 2
    s_sum, s_int = surface(estimate([0.0], [1.0], h))
    assert s_sum == 1.0
    assert s_int == pytest.approx(math.log(2.0), abs=1e-12)
    s_sum, s_int = surface(estimate([1.0], [1.0], h))
    assert s_int == pytest.approx(math.log(2.0), abs=1e-12)


def _antiderivative(t):
    # int_0^t 315/256 (1 - s^2)^4 ds, expanded by hand
    return 315 / 256 * (t - 4 * t**3 / 3 + 6 * t**5 / 5 - 4 * t**7 / 7 + t**9 / 9)


@pytest.mark.parametrize("alpha,c", [(0.2, 0.5), (0.1, 0.3), (0.05, 0.2)])
def test_l1_closed_form_with_crossing(alpha, c):
    h = 0.25
    e = estimate([0.5], [alpha], h)
    f = make_frontier("constant", [c])
    a = alpha / h
    assert c < a * K0
    ts = math.sqrt(1 - (c / (a * K0)) ** 0.25)
    # on the support: int |a K - c| dt = int (a K - c) + 2 int_{aK<c} (c - a K)
    over_support = (a - 2 * c) + 2 * (2 * (1 - ts) * c - 2 * a * (_antiderivative(1.0) - _antiderivative(ts)))
    exact = c * (1 - 2 * h) + h * over_support
    split = l1_decomposition(e, f)
    assert split.l1 == pytest.approx(exact, abs=1e-8)
    assert split.signed == pytest.approx(alpha - c, abs=1e-12)
    assert abs(split.residual) < 1e-12


def test_l1_identical_and_offset():
    rng = np.random.default_rng(4)
    c = np.sort(rng.random(20))
    e = estimate(c, rng.random(20), 0.12)
    assert l1_error(e, e.eval) == 0.0
    split = l1_decomposition(e, lambda x: e.eval(x) - 0.3)
    assert split.l1 == pytest.approx(0.3, abs=1e-12)
    assert split.negative_part == 0.0


def test_l1_split_identity_on_fit(fitted):
    f, _, _, _, e = fitted
    split = l1_decomposition(e, f)
    assert abs(split.residual) < 1e-10
    assert 0 < split.l1 < 0.2


def test_l1_respects_frontier_kinks():
    f = make_frontier("piecewise_linear", [0.5, 1.0, 0.5])
    e = estimate([0.5], [0.0], 0.2)
    assert l1_error(e, f) == pytest.approx(f.C_f, abs=1e-14)


def test_fit_properties(fitted):
    f, s, prob, sol, e = fitted
    assert np.all(e.eval(s.x) >= s.y - 1e-8)
    audit = lipschitz_audit(e, prob.deriv_bound)
    assert audit.constraint_max <= prob.deriv_bound + 1e-8
    assert 0.0 <= audit.violation_fraction <= 1.0
    grid = np.linspace(0, 1, 10_001)
    assert e.eval(grid).min() >= 0.0
    fn = prob.params.functionals
    s_sum, s_int = surface(e)
    lo, hi = surface_bounds(prob.params.c_alpha, fn.K_max, fn.g_max, prob.h)
    assert lo - 1e-8 <= s_int - s_sum <= hi + 1e-8
    assert s_sum == pytest.approx(sol.objective_value, abs=1e-12)


def test_compact_support_is_bit_exact(fitted):
    _, _, prob, sol, e = fitted
    x = 0.5
    far = np.abs(e.centers - x) > e.h
    alpha = sol.alpha.copy()
    alpha[far] += 1.0
    e2 = FrontierEstimate(e.centers, alpha, e.kernel)
    assert e2.eval(x) == e.eval(x)
    assert e2.eval(x, 1) == e.eval(x, 1)


def test_serialization_round_trip(fitted):
    _, _, _, sol, e = fitted
    e2 = FrontierEstimate.from_csv(e.to_csv(), e.h)
    assert np.array_equal(e2.centers, e.centers) and np.array_equal(e2.alpha, e.alpha)
    side = json.loads(json.dumps(e.sidecar(sol.objective_value)))
    assert side == {"h": e.h, "kernel": "quadriweight", "N": e.n, "objective": sol.objective_value}
    with pytest.raises(ValueError):
        FrontierEstimate.from_csv("x,y\n", 0.1)


def test_interval_max_bound_examples():
    assert interval_max_bound(1, 1, 0.3, 0) == 1
    assert interval_max_bound(0, 0, 2, 8) == 4
    # witness: g(x) = 2 x (2 - x) on [0, 2], g'' = -4, max 2
    xs = np.linspace(0, 2, 1001)
    assert np.max(2 * xs * (2 - xs)) <= interval_max_bound(0, 0, 2, 8)
    assert interval_max_bound(3, 5, 1, 10) == pytest.approx(6.25)
    with pytest.raises(ValueError):
        interval_max_bound(0, 0, 0, 1)
    with pytest.raises(ValueError):
        interval_max_bound(0, 0, 1, -1)


@settings(max_examples=200, deadline=None)
@given(
    a=st.floats(-5, 5), b=st.floats(-5, 5), q=st.floats(-5, 5),
    width=st.floats(0.01, 3),
)
def test_interval_max_bound_covers_quadratics(a, b, q, width):
    xs = np.linspace(0, width, 401)
    g = a + b * xs + q * xs**2
    bound = interval_max_bound(g[0], g[-1], width, 2 * abs(q))
    assert np.abs(g).max() <= bound + 1e-9 * (1 + bound)
