"""Fixed-point solver for the coincidence formulation of the boundary value
problem.

The operator Phi(u) = Pu + JQN u + theta * KP(Id - Q)N u is iterated with
damped Picard steps; when Picard stalls, a Newton-Krylov pass on the
fixed-point defect (finite-difference directional derivatives, no assembled
Jacobian) takes over.  Theta scales only the right-inverse term, so fixed
points satisfy both QNu = 0 and the theta-scaled equation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coincidence import (
    BoundaryCondition,
    CoincidenceFrame,
    KernelElement,
    boundary_map,
    kernel_embed,
    kernel_parameter,
    project_Q,
    right_inverse_KP,
)
from .nonlinearity import EvaluationError, ExtendedFn, nemytskii
from .numerics import GridFunction, SampledDensity

__all__ = [
    "DivergenceError",
    "HomotopyParams",
    "SolveOptions",
    "SolveReport",
    "phi_operator",
    "residual",
    "solve_fixed_point",
    "continuation",
    "default_initial",
    "default_tolerance",
]


class DivergenceError(RuntimeError):
    """Iterates escaped the configured norm ceiling."""


@dataclass(frozen=True)
class HomotopyParams:
    """Deformation knobs: theta in (0, 1] scales the nonlinearity, alpha >= 0
    the nonnegative forcing profile v."""

    theta: float = 1.0
    alpha: float = 0.0
    v: SampledDensity | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.theta <= 1.0):
            raise ValueError(f"theta must lie in (0, 1], got {self.theta!r}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha!r}")
        if self.alpha > 0.0:
            if self.v is None:
                raise ValueError("forcing with alpha > 0 requires a profile v")
            if np.any(self.v.w < 0.0):
                raise ValueError("forcing profile v must be nonnegative")
            if not np.any(self.v.w > 0.0):
                raise ValueError("forcing profile v must not vanish identically")


@dataclass(frozen=True)
class SolveOptions:
    """Iteration controls.

    tol is the residual acceptance threshold (defaults to 25 h^2, matching
    the second-order discretization); fp_tol is the fixed-point defect target
    of the inner iteration.
    """

    max_iters: int = 400
    damping: float = 0.5
    tol: float | None = None
    fp_tol: float | None = None
    ceiling: float = 1e8
    stall_window: int = 10
    stall_rtol: float = 1e-3
    quasi_newton: bool = True
    qn_maxiter: int = 40


@dataclass(frozen=True, eq=False)
class SolveReport:
    solution: GridFunction
    residual: float
    boundary_defect: float
    sup_norm: float
    deriv_sup_norm: float
    iterations: int
    converged: bool
    method: str = "picard"
    tol: float = float("nan")


def default_tolerance(grid, load_scale: float = 1.0) -> float:
    """Residual acceptance threshold matching the order-2 discretization.

    The interior residual of an exact discrete fixed point is O(h^2) with a
    constant proportional to the curvature of the load, hence the scale
    factor (1 + sup |load|)."""
    return 25.0 * grid.h**2 * (1.0 + max(load_scale, 0.0))


def default_initial(frame: CoincidenceFrame, scale: float = 0.1) -> GridFunction:
    """Small positive kernel embedding with the given sup norm."""
    return frame.embed(scale / frame.sup_factor)


def _forced_load(ft: ExtendedFn, u: GridFunction, frame: CoincidenceFrame,
                 hp: HomotopyParams) -> SampledDensity:
    w = nemytskii(ft, u)
    if hp.alpha > 0.0:
        if hp.v.grid != frame.grid:
            raise ValueError("forcing profile lives on a different grid")
        return SampledDensity(frame.grid, w.w + hp.alpha * hp.v.w)
    return w


def phi_operator(u: GridFunction, ft: ExtendedFn, frame: CoincidenceFrame,
                 hp: HomotopyParams | None = None) -> GridFunction:
    """One application of Pu + JQ(Nu + alpha v) + theta * KP(Id - Q)(Nu + alpha v)."""
    hp = hp or HomotopyParams()
    w = _forced_load(ft, u, frame, hp)
    qc = project_Q(w, frame.bc)
    a_p = kernel_parameter(u, frame.bc)
    # P u and the embedded JQ coordinate live in the same kernel ray.
    ker = kernel_embed(KernelElement(a_p + qc, frame.bc), frame.grid)
    wc = SampledDensity(frame.grid, w.w - qc)
    # The shifted density is in the image up to accumulation roundoff, which
    # scales with the pre-shift magnitude rather than with |w - qc|.
    grid = frame.grid
    img_tol = 10.0 * grid.h**2 * wc.sup_norm + 64.0 * np.finfo(float).eps * (
        grid.n + 1
    ) * (1.0 + w.sup_norm + abs(qc))
    kp = right_inverse_KP(wc, frame.bc, tol=img_tol)
    th = hp.theta
    return GridFunction(frame.grid, ker.u + th * kp.u, ker.du + th * kp.du)


def residual(u: GridFunction, ft: ExtendedFn, bc: BoundaryCondition,
             hp: HomotopyParams | None = None) -> tuple[float, float]:
    """Interior equation residual and boundary/consistency defect.

    Returns (max interior |D2 u + theta f~ + alpha v|, 1-norm of the boundary
    rows plus the worst |du - D1 u| mismatch), with D1, D2 the second-order
    difference stencils.
    """
    hp = hp or HomotopyParams()
    grid = u.grid
    if grid.n < 4:
        raise ValueError("residual evaluation needs at least 4 subintervals")
    h = grid.h
    w = nemytskii(ft, u).w
    load = hp.theta * w
    if hp.alpha > 0.0:
        if hp.v.grid != grid:
            raise ValueError("forcing profile lives on a different grid")
        load = load + hp.alpha * hp.v.w
    d2 = np.diff(u.u, 2) / (h * h)
    interior = float(np.max(np.abs(d2 + load[1:-1])))
    b1, b2 = boundary_map(u, bc)
    d1 = np.empty_like(u.u)
    d1[1:-1] = (u.u[2:] - u.u[:-2]) / (2.0 * h)
    d1[0] = (-3.0 * u.u[0] + 4.0 * u.u[1] - u.u[2]) / (2.0 * h)
    d1[-1] = (3.0 * u.u[-1] - 4.0 * u.u[-2] + u.u[-3]) / (2.0 * h)
    consistency = float(np.max(np.abs(u.du - d1)))
    return interior, abs(b1) + abs(b2) + consistency


def _defect(a: GridFunction, b: GridFunction) -> float:
    return max(float(np.max(np.abs(a.u - b.u))), float(np.max(np.abs(a.du - b.du))))


def _check_ceiling(u: GridFunction, ceiling: float) -> None:
    if u.sup_norm > ceiling or u.deriv_sup_norm > ceiling:
        raise DivergenceError(f"iterate norm exceeded the ceiling {ceiling:g}")


def solve_fixed_point(initial: GridFunction, ft: ExtendedFn, frame: CoincidenceFrame,
                      hp: HomotopyParams | None = None,
                      opts: SolveOptions | None = None) -> SolveReport:
    """Damped Picard iteration on Phi with a Newton-Krylov fallback.

    Raises DivergenceError when iterates escape the ceiling; exhaustion of
    the budget yields a report with converged = False, not an error.
    """
    hp = hp or HomotopyParams()
    opts = opts or SolveOptions()
    if initial.grid != frame.grid:
        raise ValueError("initial guess lives on a different grid")
    if not (0.0 < opts.damping <= 1.0):
        raise ValueError(f"damping must lie in (0, 1], got {opts.damping!r}")
    grid = frame.grid
    fp_target = opts.fp_tol if opts.fp_tol is not None else 1e-12 * max(1.0, initial.sup_norm)

    nfev = 0

    def phi(g: GridFunction) -> GridFunction:
        nonlocal nfev
        nfev += 1
        return phi_operator(g, ft, frame, hp)

    u = initial
    best_u, best_d = initial, np.inf
    history: list[float] = []
    lam = opts.damping
    method = "picard"
    reached_target = False

    for _ in range(opts.max_iters):
        _check_ceiling(u, opts.ceiling)
        pu = phi(u)
        d = _defect(pu, u)
        if d < best_d:
            best_u, best_d = u, d
        if d <= fp_target:
            reached_target = True
            break
        history.append(d)
        if len(history) > opts.stall_window and history[-1] > (1.0 - opts.stall_rtol) * history[-1 - opts.stall_window]:
            break
        u = GridFunction(grid, u.u + lam * (pu.u - u.u), u.du + lam * (pu.du - u.du))

    if not reached_target and opts.quasi_newton and best_d > fp_target:
        candidate = _newton_krylov(phi, best_u, fp_target, opts)
        if candidate is not None:
            d_cand = _defect(phi(candidate), candidate)
            if d_cand < best_d:
                best_u, best_d = candidate, d_cand
            method = "picard+newton-krylov"
        u = best_u
    elif not reached_target:
        u = best_u

    _check_ceiling(u, opts.ceiling)
    rres, bres = residual(u, ft, frame.bc, hp)
    if opts.tol is not None:
        tol = opts.tol
    else:
        load = _forced_load(ft, u, frame, hp)
        tol = default_tolerance(grid, hp.theta * load.sup_norm)
    converged = rres <= tol and bres <= tol
    return SolveReport(
        solution=u,
        residual=rres,
        boundary_defect=bres,
        sup_norm=u.sup_norm,
        deriv_sup_norm=u.deriv_sup_norm,
        iterations=nfev,
        converged=converged,
        method=method,
        tol=tol,
    )


def _newton_krylov(phi, start: GridFunction, fp_target: float,
                   opts: SolveOptions) -> GridFunction | None:
    from scipy.optimize import root

    try:
        from scipy.optimize import NoConvergence
    except ImportError:  # older scipy layout
        from scipy.optimize.nonlin import NoConvergence

    grid = start.grid
    m = grid.n + 1

    def G(x: np.ndarray) -> np.ndarray:
        g = GridFunction(grid, x[:m], x[m:])
        p = phi(g)
        return np.concatenate((g.u - p.u, g.du - p.du))

    x0 = np.concatenate((start.u, start.du))
    try:
        res = root(
            G,
            x0,
            method="krylov",
            options={"fatol": max(fp_target, 1e-13), "maxiter": opts.qn_maxiter, "disp": False},
        )
        x = np.asarray(res.x, dtype=float)
    except NoConvergence as exc:
        x = np.asarray(exc.args[0], dtype=float) if exc.args else None
    except (EvaluationError, ValueError):
        return None
    if x is None or x.shape != (2 * m,) or not np.all(np.isfinite(x)):
        return None
    return GridFunction(grid, x[:m], x[m:])


def continuation(family: str, schedule, ft: ExtendedFn, frame: CoincidenceFrame,
                 opts: SolveOptions | None = None,
                 v: SampledDensity | None = None,
                 initial: GridFunction | None = None) -> list[SolveReport]:
    """Parameter sweep with warm starts.

    family is "theta" or "alpha".  Each step starts from the previous
    converged solution; a failed step is recorded with converged = False and
    the sweep continues from the last converged iterate.
    """
    values = [float(s) for s in schedule]
    if not values:
        raise ValueError("empty continuation schedule")
    diffs = np.diff(values)
    if diffs.size and not (np.all(diffs >= 0.0) or np.all(diffs <= 0.0)):
        raise ValueError("continuation schedule must be monotone")
    if family not in ("theta", "alpha"):
        raise ValueError(f"unknown continuation family {family!r}")
    if family == "alpha" and any(val > 0.0 for val in values) and v is None:
        raise ValueError("alpha sweep with positive steps needs a forcing profile v")

    opts = opts or SolveOptions()
    u = initial if initial is not None else default_initial(frame)
    reports: list[SolveReport] = []
    for val in values:
        if family == "theta":
            hp = HomotopyParams(theta=val)
        else:
            hp = HomotopyParams(theta=1.0, alpha=val, v=v)
        try:
            rep = solve_fixed_point(u, ft, frame, hp, opts)
        except (DivergenceError, EvaluationError) as exc:
            rep = SolveReport(
                solution=u,
                residual=float("inf"),
                boundary_defect=float("inf"),
                sup_norm=u.sup_norm,
                deriv_sup_norm=u.deriv_sup_norm,
                iterations=0,
                converged=False,
                method=f"failed:{type(exc).__name__}",
            )
        reports.append(rep)
        if rep.converged:
            u = rep.solution
    return reports
