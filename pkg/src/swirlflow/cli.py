"""Command-line entry point.

Every subcommand writes its CSV artifacts, ``summary.txt`` (one line per
assertion) and ``config.json`` (the effective settings) to the output
directory.  Settings come from defaults, then flags, then an optional TOML
``--config`` file whose ``[<subcommand>]`` table wins over flags.

Exit codes: 0 success, 1 invalid input or a failed assertion, 2 a
numerical non-convergence flag.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

__all__ = ["main"]

OUT_ENV = "SWIRLFLOW_OUT"
DEFAULT_OUT = "swirlflow_out"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for non-convergence here
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    if text == "default":
        from .experiments import DEFAULT_NUS

        return list(DEFAULT_NUS)
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"not a comma-separated number list: {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="swirlflow", description="Boundary-driven swirl flows in the disk and annulus.")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="TOML file; its [<command>] table overrides flags")
        sp.add_argument("--out", default=argparse.SUPPRESS, help="output directory")

    def geometry(sp):
        sp.add_argument("--geometry", choices=("disk", "annulus"), default="disk")
        sp.add_argument("--rho", type=float, default=0.5, help="inner radius of the annulus")

    sp = sub.add_parser("spectrum", help="Dirichlet swirl eigenvalues")
    common(sp)
    geometry(sp)
    sp.add_argument("--modes", type=int, default=8)

    sp = sub.add_parser("simulate", help="solve one (nu, t) and write the velocity profile")
    common(sp)
    geometry(sp)
    sp.add_argument("--alpha", default="step", help="disk motion: step, zero, ramp:s, jumps:[(t,J),...]")
    sp.add_argument("--alpha1", default=None, help="outer motion on the annulus (defaults to --alpha)")
    sp.add_argument("--alpha2", default="zero", help="inner motion on the annulus")
    sp.add_argument("--u0", default="zero", help="initial profile: zero, f1, f2 or csv:PATH")
    sp.add_argument("--nu", type=float, default=1e-3)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--grid", type=int, default=1024)

    sp = sub.add_parser("rates", help="log-log slopes of the forced flow norm in nu")
    common(sp)
    sp.add_argument("--alpha", default="step")
    sp.add_argument("--sigma", type=float, default=0.0)
    sp.add_argument("--nu-grid", default="default")
    sp.add_argument("--t", default="0.1,1.0", help="comma-separated times")

    sp = sub.add_parser("concentration", help="boundary atoms of the vanishing-viscosity vorticity")
    common(sp)
    geometry(sp)
    sp.add_argument("--alpha", default="step")
    sp.add_argument("--alpha1", default=None)
    sp.add_argument("--alpha2", default="zero")
    sp.add_argument("--u0", default="zero")
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--nu-grid", default="default")
    sp.add_argument("--exponent", type=float, default=0.4)

    sp = sub.add_parser("layer", help="double-layer potentials against the spectral solution")
    common(sp)
    sp.add_argument("--t-min", type=float, default=1e-4)
    sp.add_argument("--t-max", type=float, default=1e-2)
    sp.add_argument("--order", type=int, default=6)
    sp.add_argument("--mode", choices=("series", "stepping"), default="stepping")

    sp = sub.add_parser("stochastic", help="Monte-Carlo check of the Ito variance identity")
    common(sp)
    sp.add_argument("--nu", default="1e-2,1e-3")
    sp.add_argument("--t", default="0.5,1.0")
    sp.add_argument("--n-paths", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sigma", type=float, default=0.0)

    sp = sub.add_parser("pressure", help="pressure of a solved flow")
    common(sp)
    geometry(sp)
    sp.add_argument("--alpha", default="zero")
    sp.add_argument("--alpha1", default=None)
    sp.add_argument("--alpha2", default="zero")
    sp.add_argument("--u0", default="f1")
    sp.add_argument("--nu", type=float, default=1e-3)
    sp.add_argument("--t", type=float, default=0.0)

    sp = sub.add_parser("experiments", help="run a TOML plan of experiments")
    sp.add_argument("--config", required=True, help="TOML plan with [experiments.<name>] tables")
    sp.add_argument("--out", default=argparse.SUPPRESS)
    sp.add_argument("--workers", type=int, default=1)
    return p


def _read_toml(path) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"invalid config {path!r}: {exc}") from None


def _effective(args: argparse.Namespace) -> dict:
    cfg = dict(vars(args))
    if getattr(args, "config", None) and args.command != "experiments":
        table = _read_toml(args.config).get(args.command, {})
        if not isinstance(table, dict):
            raise UsageError(f"[{args.command}] in the config must be a table")
        for k, v in table.items():
            key = k.replace("-", "_")
            if key not in cfg:
                raise UsageError(f"unknown setting {k!r} for {args.command}")
            cfg[key] = v
    return cfg


def _outdir(cfg: dict) -> str:
    out = cfg.get("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out!r}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory {out!r} is not writable")
    return out


def _geometry(cfg):
    from .basis import DISK, annulus

    if cfg["geometry"] == "annulus":
        rho = float(cfg["rho"])
        if not (0.0 < rho < 1.0):
            raise UsageError("--rho must lie in (0, 1)")
        return annulus(rho)
    return DISK


def _bc(cfg, geometry, horizon):
    from .driving import parse_alpha
    from .duhamel import SwirlBoundaryData

    if geometry.is_annulus:
        a1 = parse_alpha(cfg["alpha1"] or cfg["alpha"], horizon)
        a2 = parse_alpha(cfg["alpha2"], horizon)
        return SwirlBoundaryData(geometry, (a1, a2))
    return SwirlBoundaryData(geometry, (parse_alpha(cfg["alpha"], horizon),))


def _u0(spec: str, geometry, n: int = 1024):
    from .duhamel import f1_profile, f2_profile
    from .field import default_grid, read_profile_csv

    grid = default_grid(geometry, n)
    if spec == "zero":
        return None
    if spec == "f1":
        return f1_profile(geometry, grid)
    if spec == "f2":
        if not geometry.is_annulus:
            raise UsageError("f2 is singular at the origin; use it on the annulus only")
        return f2_profile(geometry, grid)
    if spec.startswith("csv:"):
        try:
            return read_profile_csv(spec[4:], geometry)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read initial profile: {exc}") from None
    raise UsageError(f"unknown initial profile {spec!r}")


def _cmd_spectrum(cfg, out):
    from .basis import basis_for

    if int(cfg["modes"]) < 1:
        raise UsageError("--modes must be >= 1")
    b = basis_for(_geometry(cfg), int(cfg["modes"]))
    rows = [dict(k=k + 1, sqrt_lambda=float(s), eigenvalue=float(s * s)) for k, s in enumerate(b.sqrt_lam)]
    return {"spectrum": rows}, []


def _cmd_simulate(cfg, out):
    from .duhamel import solve_flow
    from .experiments import _check
    from .field import default_grid, write_profile_csv
    from .vorticity import _alpha_total, total_mass

    nu, t = float(cfg["nu"]), float(cfg["t"])
    if nu <= 0 or t < 0:
        raise UsageError("need --nu > 0 and --t >= 0")
    geometry = _geometry(cfg)
    bc = _bc(cfg, geometry, max(t, 1.0))
    u0 = _u0(cfg["u0"], geometry)
    form = "stieltjes" if all(a.is_measure for a in bc.alphas) else "lp"
    sol = solve_flow(u0, bc, nu, t, form=form)
    grid = default_grid(geometry, int(cfg["grid"]))
    prof = sol.profile(grid)
    write_profile_csv(os.path.join(out, "profile.csv"), prof)
    mass = total_mass(sol.vorticity_profile(grid))
    # for t > 0 the traces are set by the motions: alpha(t), or alpha1(t) - rho^2 alpha2(t)
    if t > 0 or u0 is None:
        want = _alpha_total(bc, t) if t > 0 else 0.0
    else:
        want = 2 * np.pi * (float(u0(1.0)) - (float(u0(geometry.rmin)) if geometry.is_annulus else 0.0))
    checks = [_check("simulate: |total vorticity - predicted mass|", abs(mass - want), "<", 1e-6)]
    return {}, checks


def _cmd_rates(cfg, out):
    from .experiments import measure_rates

    sigma = float(cfg["sigma"])
    if not (-2.0 <= sigma < 2.5):
        raise UsageError("--sigma must lie in [-2, 2.5)")
    nus = cfg["nu_grid"] if isinstance(cfg["nu_grid"], list) else _floats(cfg["nu_grid"])
    ts = cfg["t"] if isinstance(cfg["t"], list) else _floats(str(cfg["t"]))
    if len(nus) < 3:
        raise UsageError("rate fits need at least 3 viscosities")
    rows, checks = measure_rates(nus=nus, ts=ts, sigmas=(sigma,), alpha=cfg["alpha"])
    return {"rates": rows}, checks


def _cmd_concentration(cfg, out):
    from .experiments import _check
    from .vorticity import concentration_limit, write_concentration_csv

    geometry = _geometry(cfg)
    t = float(cfg["t"])
    nus = cfg["nu_grid"] if isinstance(cfg["nu_grid"], list) else _floats(cfg["nu_grid"])
    exponent = float(cfg["exponent"])
    if not (0.0 < exponent < 0.5):
        raise UsageError("--exponent must lie in (0, 1/2)")
    rep = concentration_limit(_u0(cfg["u0"], geometry), _bc(cfg, geometry, max(t, 1.0)), nus, t, exponent=exponent)
    write_concentration_csv(os.path.join(out, "concentration.csv"), rep)
    checks = [
        _check(f"concentration: {lab} atom error", abs(g - w), "<", 5e-2)
        for lab, g, w in zip(("outer", "inner"), rep.extrapolated_atoms, rep.predicted_atoms)
    ]
    checks.append(_check("concentration: interior L1 discrepancy", rep.interior_l1_discrepancy, "<", 5e-2))
    checks.append(_check("concentration: total mass defect", rep.mass_defect, "<", 1e-6))
    flags = [] if rep.converged else ["shell masses are not monotone in nu: not converged"]
    return {}, checks, flags


def _cmd_layer(cfg, out):
    from .experiments import measure_layer
    from .layerpot import write_layer_csv

    t_min, t_max = float(cfg["t_min"]), float(cfg["t_max"])
    if not (0 < t_min < t_max):
        raise UsageError("need 0 < --t-min < --t-max")
    if not (0 <= int(cfg["order"]) <= 6):
        raise UsageError("--order must lie in [0, 6]")
    rows, checks = measure_layer(t_min=t_min, t_max=t_max, mode=cfg["mode"], order=int(cfg["order"]))
    write_layer_csv(os.path.join(out, "layer.csv"), rows)
    return {}, checks


def _cmd_stochastic(cfg, out):
    from .experiments import measure_stochastic

    nus = cfg["nu"] if isinstance(cfg["nu"], list) else _floats(str(cfg["nu"]))
    ts = cfg["t"] if isinstance(cfg["t"], list) else _floats(str(cfg["t"]))
    if int(cfg["n_paths"]) < 100:
        raise UsageError("--n-paths must be >= 100")
    rows, checks = measure_stochastic(nus=nus, ts=ts, n_paths=int(cfg["n_paths"]), seed=int(cfg["seed"]), sigma=float(cfg["sigma"]))
    return {"mc": rows}, checks


def _cmd_pressure(cfg, out):
    from .duhamel import solve_flow
    from .experiments import _check
    from .pressure import gradient_identity_residual, pressure_from_velocity, write_pressure_csv

    geometry = _geometry(cfg)
    nu, t = float(cfg["nu"]), float(cfg["t"])
    if nu <= 0 or t < 0:
        raise UsageError("need --nu > 0 and --t >= 0")
    sol = solve_flow(_u0(cfg["u0"], geometry), _bc(cfg, geometry, max(t, 1.0)), nu, t)
    u = sol.profile()
    p = pressure_from_velocity(u)
    write_pressure_csv(os.path.join(out, "pressure.csv"), p)
    return {}, [_check("pressure: gradient identity residual", gradient_identity_residual(u, p), "<", 1e-6)]


def _cmd_experiments(cfg, out):
    from .experiments import load_config, run_plan

    try:
        plan = load_config(cfg["config"])
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if int(cfg["workers"]) < 1:
        raise UsageError("--workers must be >= 1")
    results = run_plan(plan, out, workers=int(cfg["workers"]))
    checks = [c for r in results for c in r.checks]
    flags = [f"{r.name}: {r.error or 'not converged'}" for r in results if r.flagged]
    return None, checks, flags


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "simulate": _cmd_simulate,
    "rates": _cmd_rates,
    "concentration": _cmd_concentration,
    "layer": _cmd_layer,
    "stochastic": _cmd_stochastic,
    "pressure": _cmd_pressure,
    "experiments": _cmd_experiments,
}


def main(argv=None) -> int:
    """Run one subcommand and return its exit code."""
    from .experiments import write_rows_csv
    from .layerpot import BIEDivergence
    from .semigroup import EmbeddingTooSmall

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand; choose one of " + ", ".join(_COMMANDS))
        cfg = _effective(args)
        out = _outdir(cfg)
        with open(os.path.join(out, "config.json") if args.command != "experiments" else os.devnull, "w") as fh:
            json.dump(cfg, fh, indent=2, sort_keys=True)
        result = _COMMANDS[args.command](cfg, out)
    except UsageError as exc:
        print(f"swirlflow: error: {exc}", file=sys.stderr)
        return 1
    except (BIEDivergence, EmbeddingTooSmall) as exc:
        print(f"swirlflow: not converged: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"swirlflow: invalid input: {exc}", file=sys.stderr)
        return 1
    tables, checks = result[0], result[1]
    flags = result[2] if len(result) > 2 else []
    for name, rows in (tables or {}).items():
        write_rows_csv(os.path.join(out, f"{name}.csv"), rows)
    if args.command != "experiments":
        with open(os.path.join(out, "summary.txt"), "w") as fh:
            for f in flags:
                fh.write(f"FLAG  {f}\n")
            for c in checks:
                fh.write(c.line() + "\n")
    for f in flags:
        print(f"FLAG  {f}")
    for c in checks:
        print(c.line())
    if flags:
        return 2
    return 0 if all(c.passed for c in checks) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
