"""Command-line front end: ``lpfrontier {gen,fit,study}``.

Each invocation reads one JSON config; ``--out``, ``--seed``, ``--jobs`` and
``--plot`` override the matching top-level keys. Exit codes: 0 success,
2 config error, 3 infeasible or failed solve, 4 I/O error.
"""

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import svg
from .estimator import FrontierEstimate, lipschitz_audit, surface, surface_bounds
from .lp import C_ALPHA_RULE, LPBuildParams, build_frontier_lp, solve
from .model import Sample, frontier_from_spec, sample_support
from .simplex import NumericalBreakdown
from .study import (
    DEFAULT_FRONTIER,
    StudyConfig,
    bandwidth_schedule,
    default_rho_tilde,
    rate_regression,
    run_cell,
    run_study,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

GEN_KEYS = {"frontier", "n", "seed", "out"}
FIT_KEYS = {"sample", "h", "c_alpha", "lipschitz", "beta", "f_max", "rho", "rho_tilde", "tol", "out"}
STUDY_KEYS = {f.name for f in dataclasses.fields(StudyConfig)} | {"out", "plot", "plot_cell"}
# keys that locate outputs rather than parametrize them; not echoed
_PLACEMENT = {"out"}


class ConfigError(ValueError):
    pass


class SolverFailure(RuntimeError):
    pass


def _clean(obj):
    """Make ``obj`` strict-JSON: NaN and inf become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the result the usual umask-derived mode
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write(path, json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n")


def load_config(path, allowed, overrides):
    cfg = {}
    if path is not None:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    for k, v in overrides.items():
        if v is not None:
            cfg[k] = v
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}")
    return cfg


def _echo(cfg):
    return {k: v for k, v in sorted(cfg.items()) if k not in _PLACEMENT}


def _number(cfg, key, default=None, kind=float):
    v = cfg.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number")
    if kind is int and v != int(v):
        raise ConfigError(f"{key} must be an integer")
    return kind(v)


def cmd_gen(cfg):
    spec = cfg.setdefault("frontier", dict(DEFAULT_FRONTIER))
    n = _number(cfg, "n", 1000, int)
    seed = _number(cfg, "seed", 0, int)
    cfg["n"], cfg["seed"] = n, seed
    try:
        f = frontier_from_spec(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad frontier spec: {exc}") from None
    if n < 1:
        raise ConfigError("n must be positive")
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    out = Path(cfg.get("out", "."))
    s = sample_support(f, n, seed)
    atomic_write(out / "sample.csv", s.to_csv())
    side = {"frontier": f.spec(), "n": n, "seed": seed, "config": _echo(cfg)}
    side.update(f.constants())
    write_json(out / "sample.json", side)
    return EXIT_OK


def _read_sample(path):
    text = Path(path).read_text()
    try:
        return Sample.from_csv(text)
    except ValueError as exc:
        raise OSError(f"cannot parse sample file {path}: {exc}") from None


def cmd_fit(cfg):
    if "sample" not in cfg:
        raise ConfigError("fit needs a 'sample' path")
    sample_path = Path(cfg["sample"])
    s = _read_sample(sample_path)
    side_path = sample_path.with_suffix(".json")
    side = {}
    if side_path.exists():
        try:
            side = json.loads(side_path.read_text())
        except json.JSONDecodeError as exc:
            raise OSError(f"cannot parse sidecar {side_path}: {exc}") from None
    if s.n < 1:
        raise ConfigError("sample is empty")

    f_max = _number(cfg, "f_max", side.get("f_max"))
    if f_max is None:
        raise ConfigError("f_max must be given in the config or the sample sidecar")
    L = _number(cfg, "lipschitz", side.get("L_f_beta"))
    if L is None:
        raise ConfigError("lipschitz must be given in the config or the sample sidecar")
    beta = _number(cfg, "beta", side.get("beta", 1.0))
    rho = _number(cfg, "rho", 0.5)
    h = _number(cfg, "h")
    if h is None:
        rho_tilde = _number(cfg, "rho_tilde", default_rho_tilde(rho, beta))
        if s.n < 3:
            raise ConfigError("h must be given for samples with fewer than 3 points")
        h = bandwidth_schedule(s.n, rho_tilde, beta)
    c_alpha = _number(cfg, "c_alpha", C_ALPHA_RULE * f_max)
    tol = _number(cfg, "tol", 1e-9)
    try:
        p = LPBuildParams(h=h, c_alpha=c_alpha, L_f_beta=L, beta=beta, f_max=f_max)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    prob = build_frontier_lp(s, p)
    out = Path(cfg.get("out", "."))
    summary = {
        "n": s.n,
        "h": h,
        "c_alpha": c_alpha,
        "deriv_bound": prob.deriv_bound,
        "config": _echo(cfg),
    }
    try:
        sol = solve(prob, tol=tol)
        status = sol.status.value
    except NumericalBreakdown:
        sol, status = None, "numerical_breakdown"
    summary["status"] = status
    if status != "optimal":
        summary.update(objective=None, surface_sum=None, surface_integral=None, max_deriv_at_constraints=None)
        if sol is not None and sol.certificate is not None:
            summary["certificate"] = sol.certificate
        write_json(out / "fit.json", summary)
        raise SolverFailure(f"solver status {status}")

    est = FrontierEstimate.from_solution(prob, sol)
    s_sum, s_int = surface(est)
    fn = p.functionals
    audit = lipschitz_audit(est, prob.deriv_bound)
    summary.update(
        objective=sol.objective_value,
        surface_sum=s_sum,
        surface_integral=s_int,
        surface_bounds=list(surface_bounds(c_alpha, fn.K_max, fn.g_max, h)),
        max_deriv_at_constraints=audit.constraint_max,
        max_deriv_on_grid=audit.grid_max,
        iterations=sol.iterations,
    )
    atomic_write(out / "estimate.csv", est.to_csv())
    write_json(out / "estimate.json", est.sidecar(sol.objective_value))
    write_json(out / "fit.json", summary)
    return EXIT_OK


def cmd_study(cfg):
    study_kw = {k: v for k, v in cfg.items() if k not in {"out", "plot", "plot_cell"}}
    try:
        scfg = StudyConfig(**study_kw)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid study config: {exc}") from None
    plot = bool(cfg.get("plot", False))
    cell = cfg.get("plot_cell", [scfg.n_grid[0], 0])
    if not (isinstance(cell, list) and len(cell) == 2 and cell[0] in scfg.n_grid
            and 0 <= cell[1] < scfg.replications):
        raise ConfigError("plot_cell must be [n, rep] with n in n_grid and 0 <= rep < replications")

    rep = run_study(scfg)
    out = Path(cfg.get("out", "."))
    atomic_write(out / "study.csv", rep.to_csv())
    summary = rep.summary()
    summary["config"] = dict(_echo(cfg), **scfg.to_dict())
    write_json(out / "study.json", summary)
    if plot:
        res = run_cell(scfg, cell[0], cell[1], keep=True)
        if res.estimate is not None:
            atomic_write(out / "fit.svg", svg.fit_figure(res.sample, scfg.make_frontier(), res.estimate))
        if math.isfinite(rep.slope):
            reg = rate_regression(rep)
            theory_slope = scfg.beta / (1.0 + scfg.beta)
            atomic_write(out / "rate.svg",
                         svg.rate_figure(rep.level_means(), reg.slope, reg.intercept, theory_slope))
    return EXIT_OK


COMMANDS = {
    "gen": (cmd_gen, GEN_KEYS),
    "fit": (cmd_fit, FIT_KEYS),
    "study": (cmd_study, STUDY_KEYS),
}


def build_parser():
    ap = argparse.ArgumentParser(prog="lpfrontier", description="L1-optimal frontier estimation by linear programming")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("gen", "sample points under a frontier"),
                        ("fit", "fit a frontier to a sample"),
                        ("study", "run a convergence study")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="seed (gen) or base seed (study)")
        p.add_argument("--jobs", type=int, help="worker processes (study)")
        p.add_argument("--plot", action="store_true", default=None, help="write SVG figures (study)")
    return ap


def _overrides(args):
    ov = {"out": args.out, "jobs": args.jobs, "plot": args.plot}
    ov["base_seed" if args.command == "study" else "seed"] = args.seed
    return ov


def main(argv=None):
    args = build_parser().parse_args(argv)
    func, allowed = COMMANDS[args.command]
    try:
        cfg = load_config(args.config, allowed, _overrides(args))
        return func(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
