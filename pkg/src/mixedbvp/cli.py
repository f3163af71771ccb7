"""Command-line front end: configuration, solves, certification, export.

Exit codes: 0 success, 1 usage or configuration error, 2 non-convergence,
3 hypothesis or verdict failure.  Reports are written even when the exit
code is 2 or 3.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

os.environ.setdefault("MPLBACKEND", "Agg")

import numpy as np

from . import plots
from .certification import (
    CertificationOptions,
    check_positivity,
    degree_report,
    kernel_h,
    kernel_interval_halfwidth,
)
from .coincidence import BoundaryCondition, CoincidenceFrame
from .corpus import get_problem, logistic_family, manufactured_problem, problem_names
from .nonlinearity import ProbePlan, extend_tilde, verify_growth_conditions
from .numerics import Grid, GridFunction, SampledDensity, make_grid
from .solver import (
    HomotopyParams,
    SolveOptions,
    continuation,
    default_initial,
    solve_fixed_point,
)

__all__ = ["RunConfig", "main", "console_main", "write_solution_csv", "read_solution_csv"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOCONV = 2
EXIT_HYPOTHESIS = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


@dataclass
class RunConfig:
    """Flat run configuration; JSON files carry the same key names."""

    problem: object = "logistic-bc1"
    bc: str | None = None
    T: float = 1.0
    n: int = 1000
    tol: float | None = None
    theta: float = 1.0
    r: float | None = None
    R: float | None = None
    alpha0: float | None = None
    v: str = "one"
    theta_steps: int = 5
    alpha_steps: int = 6
    out: str | None = None
    plot: bool = True
    in_path: str | None = None


_PROFILES = ("one", "sin", "hat")


def forcing_profile(name: str, grid: Grid) -> SampledDensity:
    t = grid.nodes
    if name == "one":
        return SampledDensity(grid, np.ones(grid.n + 1))
    if name == "sin":
        return SampledDensity(grid, np.sin(np.pi * t / grid.T))
    if name == "hat":
        return SampledDensity(grid, 1.0 - np.abs(2.0 * t / grid.T - 1.0))
    raise UsageError(f"unknown forcing profile {name!r}; use one of {_PROFILES}")


def write_solution_csv(path, gf: GridFunction) -> None:
    """t,u,du columns, LF endings, 17 significant digits (round-trip safe)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,u,du\n")
        for t, u, du in zip(gf.grid.nodes, gf.u, gf.du):
            fh.write(f"{t:.17g},{u:.17g},{du:.17g}\n")


def read_solution_csv(path) -> GridFunction:
    ts: list[float] = []
    us: list[float] = []
    dus: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "t,u,du":
            raise ValueError(f"unexpected CSV header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b, c = line.split(",")
            ts.append(float(a))
            us.append(float(b))
            dus.append(float(c))
    if len(ts) < 3:
        raise ValueError("solution CSV needs at least 3 rows")
    grid = make_grid(ts[-1], len(ts) - 1)
    return GridFunction(grid, np.asarray(us), np.asarray(dus))


def to_jsonable(obj):
    """Recursive conversion to plain JSON types; non-finite floats map to None."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return to_jsonable(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, GridFunction):
        return {
            "T": obj.grid.T,
            "n": obj.grid.n,
            "sup_norm": obj.sup_norm,
            "deriv_sup_norm": obj.deriv_sup_norm,
        }
    if isinstance(obj, SampledDensity):
        return {"T": obj.grid.T, "n": obj.grid.n, "sup_norm": obj.sup_norm}
    if isinstance(obj, Grid):
        return {"T": obj.T, "n": obj.n}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if callable(obj):
        return getattr(obj, "__name__", "callable")
    return str(obj)


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_jsonable(payload), fh, indent=2, allow_nan=False)
        fh.write("\n")


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if getattr(args, "config", None):
        data.update(load_config(args.config))
    for f in dataclasses.fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            data[f.name] = val
    cfg = RunConfig(**data)
    if cfg.n < 2:
        raise UsageError(f"grid needs n >= 2 subintervals, got {cfg.n}")
    if cfg.T <= 0:
        raise UsageError(f"horizon T must be positive, got {cfg.T}")
    return cfg


def build_problem(cfg: RunConfig):
    if isinstance(cfg.problem, str):
        spec = get_problem(cfg.problem, T=cfg.T)
    elif isinstance(cfg.problem, dict):
        params = dict(cfg.problem)
        family = params.pop("family", None)
        bc_name = params.pop("bc", cfg.bc)
        if family is None or bc_name is None:
            raise UsageError("inline problem needs 'family' and 'bc' keys")
        bc = BoundaryCondition.from_name(bc_name)
        if family == "logistic":
            spec = logistic_family(
                params.pop("lam", 1.0), params.pop("c", 0.0), cfg.T, bc
            )
        elif family == "mms":
            spec = manufactured_problem(
                bc,
                cfg.T,
                c=params.pop("c", 1.0),
                d=params.pop("d", 1.0),
                beta=params.pop("beta", 1.0),
            )
        else:
            raise UsageError(f"unknown problem family {family!r}")
        if params:
            raise UsageError(f"unknown problem parameters: {sorted(params)}")
    else:
        raise UsageError("problem must be a corpus name or an inline object")
    if cfg.bc is not None and BoundaryCondition.from_name(cfg.bc) is not spec.bc:
        raise UsageError(
            f"--bc {cfg.bc} conflicts with the boundary condition of {spec.name}"
        )
    return spec


def _out_dir(cfg: RunConfig) -> Path | None:
    if cfg.out is None:
        return None
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _claimed_verdict(bc: BoundaryCondition) -> str:
    return "positive-on-(0,T]" if bc is BoundaryCondition.BC2 else "positive-on-[0,T]"


def _initial_guess(cfg: RunConfig, frame: CoincidenceFrame) -> GridFunction:
    if cfg.r is not None and cfg.R is not None:
        mid = 0.5 * (cfg.r + cfg.R) / frame.sup_factor
        return frame.embed(0.5 * mid)
    if cfg.r is not None:
        return frame.embed(0.5 * cfg.r / frame.sup_factor)
    return default_initial(frame)


def cmd_solve(cfg: RunConfig) -> int:
    spec = build_problem(cfg)
    frame = CoincidenceFrame(spec.bc, make_grid(spec.T, cfg.n))
    ft = extend_tilde(spec.f)
    opts = SolveOptions(tol=cfg.tol)
    report = solve_fixed_point(_initial_guess(cfg, frame), ft, frame,
                               HomotopyParams(theta=cfg.theta), opts)
    out = _out_dir(cfg)
    if out is not None:
        write_solution_csv(out / "solution.csv", report.solution)
        _write_json(out / "report.json", {"problem": spec.name, "report": report})
        if cfg.plot:
            fig = plots.solution_figure(report.solution, title=spec.name)
            plots.save_figure(fig, out / "solution.png")
    print(
        f"{spec.name}: converged={report.converged} residual={report.residual:.3e} "
        f"boundary={report.boundary_defect:.3e} sup={report.sup_norm:.6g}"
    )
    return EXIT_OK if report.converged else EXIT_NOCONV


def cmd_verify(cfg: RunConfig) -> int:
    spec = build_problem(cfg)
    frame = CoincidenceFrame(spec.bc, make_grid(spec.T, cfg.n))
    ft = extend_tilde(spec.f)
    growth = verify_growth_conditions(spec.f, ProbePlan(T=spec.T))
    report = solve_fixed_point(_initial_guess(cfg, frame), ft, frame,
                               HomotopyParams(theta=cfg.theta), SolveOptions(tol=cfg.tol))
    cert_tol = cfg.tol if cfg.tol is not None else 1e-8
    cert = check_positivity(report.solution, spec.bc, tol=cert_tol)
    out = _out_dir(cfg)
    if out is not None:
        write_solution_csv(out / "solution.csv", report.solution)
        _write_json(out / "verify.json", {
            "problem": spec.name,
            "growth": growth,
            "solve": report,
            "positivity": cert,
        })
        if cfg.plot:
            fig = plots.solution_figure(report.solution, title=f"{spec.name} ({cert.verdict})")
            plots.save_figure(fig, out / "solution.png")
    print(f"{spec.name}: growth={'ok' if growth.all_passed else 'FAIL'} "
          f"positivity={cert.verdict} converged={report.converged}")
    if not report.converged:
        return EXIT_NOCONV
    if not growth.all_passed or cert.verdict != _claimed_verdict(spec.bc):
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_degree(cfg: RunConfig) -> int:
    if cfg.r is None or cfg.R is None:
        raise UsageError("degree needs both --r and --R")
    spec = build_problem(cfg)
    frame = CoincidenceFrame(spec.bc, make_grid(spec.T, cfg.n))
    ft = extend_tilde(spec.f)
    alpha0 = cfg.alpha0 if cfg.alpha0 is not None else 2.0
    opts = CertificationOptions(
        theta_schedule=tuple(np.linspace(1.0, 0.2, max(cfg.theta_steps, 2))),
        alpha_schedule=tuple(np.linspace(0.0, alpha0, max(cfg.alpha_steps, 2))),
        alpha0=alpha0,
        v=forcing_profile(cfg.v, frame.grid),
        solve=SolveOptions(tol=cfg.tol),
        initial=_initial_guess(cfg, frame),
    )
    report = degree_report(cfg.r, cfg.R, ft, frame, opts)
    out = _out_dir(cfg)
    if out is not None:
        _write_json(out / "degree.json", {"problem": spec.name, "report": report})
        if cfg.plot:
            aw = kernel_interval_halfwidth(cfg.r, spec.bc, spec.T)
            a_vals = np.linspace(-aw, aw, 101)
            h_vals = [kernel_h(a, ft, spec.bc, frame.grid) for a in a_vals]
            plots.save_figure(
                plots.kernel_sign_figure(a_vals, h_vals, aw, title=f"{spec.name}: kernel sign map"),
                out / "kernel_sign.png",
            )
            sweeps = report.hr.sweep_norms
            plots.save_figure(
                plots.sweep_figure(
                    [s for s, _ in sweeps], [n for _, n in sweeps],
                    [True] * len(sweeps), "theta", target=cfg.r,
                    title=f"{spec.name}: deformation sweep",
                ),
                out / "sweep_theta.png",
            )
    print(
        f"{spec.name}: deg(kernel)={report.deg_kernel} "
        f"deg(small box)={report.deg_omega_r} deg(forced box)={report.deg_omega_R} "
        f"deg(annulus)={report.deg_annulus} applicable={report.theorem_applicable}"
    )
    return EXIT_OK if report.theorem_applicable else EXIT_HYPOTHESIS


def _cmd_sweep(cfg: RunConfig, family: str) -> int:
    spec = build_problem(cfg)
    frame = CoincidenceFrame(spec.bc, make_grid(spec.T, cfg.n))
    ft = extend_tilde(spec.f)
    if family == "theta":
        schedule = list(np.linspace(1.0, 0.2, max(cfg.theta_steps, 2)))
        v = None
        label = "theta"
    else:
        alpha0 = cfg.alpha0 if cfg.alpha0 is not None else 2.0
        schedule = list(np.linspace(0.0, alpha0, max(cfg.alpha_steps, 2)))
        v = forcing_profile(cfg.v, frame.grid)
        label = "alpha"
    reports = continuation(family, schedule, ft, frame, SolveOptions(tol=cfg.tol),
                           v=v, initial=_initial_guess(cfg, frame))
    out = _out_dir(cfg)
    if out is not None:
        with open(out / f"sweep_{label}.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(f"{label},sup_norm,deriv_sup_norm,residual,converged\n")
            for val, rep in zip(schedule, reports):
                res = rep.residual if np.isfinite(rep.residual) else float("nan")
                fh.write(
                    f"{val:.17g},{rep.sup_norm:.17g},{rep.deriv_sup_norm:.17g},"
                    f"{res:.17g},{int(rep.converged)}\n"
                )
        _write_json(out / f"sweep_{label}.json", {
            "problem": spec.name,
            "family": label,
            "schedule": schedule,
            "steps": reports,
        })
        if cfg.plot:
            target = cfg.r if family == "theta" else cfg.R
            fig = plots.sweep_figure(
                schedule, [rep.sup_norm for rep in reports],
                [rep.converged for rep in reports], label, target=target,
                title=f"{spec.name}: {label} sweep",
            )
            plots.save_figure(fig, out / f"sweep_{label}.png")
    n_ok = sum(rep.converged for rep in reports)
    print(f"{spec.name}: {label} sweep, {n_ok}/{len(reports)} steps converged")
    return EXIT_OK if n_ok > 0 else EXIT_NOCONV


def cmd_export(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    if out is None:
        raise UsageError("export needs --out")
    if cfg.in_path is not None:
        gf = read_solution_csv(cfg.in_path)
        write_solution_csv(out / "solution.csv", gf)
        print(f"round-tripped {cfg.in_path} ({gf.grid.n + 1} rows)")
        return EXIT_OK
    spec = build_problem(cfg)
    if spec.known_solution is None:
        raise UsageError(f"{spec.name} has no closed-form solution; use --in or solve")
    gf = spec.known_solution(make_grid(spec.T, cfg.n))
    write_solution_csv(out / "solution.csv", gf)
    if cfg.plot:
        plots.save_figure(plots.solution_figure(gf, title=spec.name), out / "solution.png")
    print(f"exported {spec.name} at n={cfg.n}")
    return EXIT_OK


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its keys")
    sub.add_argument("--problem", help=f"corpus name ({', '.join(problem_names())})")
    sub.add_argument("--bc", choices=["bc1", "bc2", "bc3"])
    sub.add_argument("--T", type=float, dest="T")
    sub.add_argument("--n", type=int)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--theta", type=float)
    sub.add_argument("--r", type=float, dest="r")
    sub.add_argument("--R", type=float, dest="R")
    sub.add_argument("--alpha0", type=float)
    sub.add_argument("--v", choices=list(_PROFILES))
    sub.add_argument("--theta-steps", type=int, dest="theta_steps")
    sub.add_argument("--alpha-steps", type=int, dest="alpha_steps")
    sub.add_argument("--out")
    sub.add_argument("--plot", dest="plot", action="store_true", default=None)
    sub.add_argument("--no-plot", dest="plot", action="store_false", default=None)


def main(argv=None) -> int:
    parser = _Parser(prog="mixedbvp", description=__doc__)
    subs = parser.add_subparsers(dest="command")
    for name in ("solve", "verify", "degree", "sweep-theta", "sweep-alpha", "export"):
        sub = subs.add_parser(name, add_help=True)
        sub.error = parser.error  # type: ignore[method-assign]
        _add_common(sub)
        if name == "export":
            sub.add_argument("--in", dest="in_path", help="solution CSV to round-trip")
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: solve, verify, degree, "
                             "sweep-theta, sweep-alpha or export")
        cfg = build_config(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "degree":
            return cmd_degree(cfg)
        if args.command == "sweep-theta":
            return _cmd_sweep(cfg, "theta")
        if args.command == "sweep-alpha":
            return _cmd_sweep(cfg, "alpha")
        return cmd_export(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
