"""Kernel-reduced degree bookkeeping, a-priori derivative bounds, positivity
certificates, and the r/R hypothesis sweeps.

The degree over the norm boxes is represented entirely through the sign map
induced on the one-dimensional kernel; sweeps provide sampled evidence for
the norm-avoidance clauses and are flagged as such in the reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coincidence import (
    BoundaryCondition,
    CoincidenceFrame,
    KernelElement,
    kernel_embed,
    kernel_sup_factor,
)
from .nonlinearity import ExtendedFn, NagumoPair, nemytskii
from .numerics import Grid, GridFunction, SampledDensity, integrate, make_grid
from .coincidence import project_Q
from .solver import SolveOptions, SolveReport, continuation, solve_fixed_point, HomotopyParams

__all__ = [
    "DegenerateEndpointError",
    "NagumoBoundNotFound",
    "PositivityCertificate",
    "HypothesisReport",
    "DegreeReport",
    "CertificationOptions",
    "kernel_h",
    "kernel_interval_halfwidth",
    "brouwer_degree_1d",
    "nagumo_bound",
    "check_positivity",
    "zero_propagation_margin",
    "check_Hr",
    "check_HR",
    "degree_report",
]


class DegenerateEndpointError(ValueError):
    """Sign map vanishes (within tolerance) at an interval endpoint."""


class NagumoBoundNotFound(RuntimeError):
    """Search ceiling reached before the bound inequality was satisfied."""


def kernel_h(a: float, ft: ExtendedFn, bc: BoundaryCondition, grid: Grid) -> float:
    """Sign map on the kernel coordinate: h(a) = -(JQN) of the embedded ray."""
    u = kernel_embed(KernelElement(float(a), bc), grid)
    return -project_Q(nemytskii(ft, u), bc)


def kernel_interval_halfwidth(r: float, bc: BoundaryCondition, T: float) -> float:
    """Half-width of the kernel slice of the radius-r norm box."""
    return r / kernel_sup_factor(bc, T)


def brouwer_degree_1d(h: Callable[[float], float], interval: tuple[float, float],
                      zero_tol: float = 1e-12) -> int:
    """Sign-based one-dimensional degree: (sign h(hi) - sign h(lo)) / 2."""
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"interval must satisfy lo < hi, got ({lo!r}, {hi!r})")
    hl, hh = float(h(lo)), float(h(hi))
    if min(abs(hl), abs(hh)) <= zero_tol:
        raise DegenerateEndpointError(
            f"sign map within {zero_tol:g} of zero at an endpoint: h({lo:g}) = {hl:.3g}, "
            f"h({hi:g}) = {hh:.3g}"
        )
    return int((np.sign(hh) - np.sign(hl)) / 2)


def nagumo_bound(r: float, pair: NagumoPair, T: float, *, resolution: float = 5e-4,
                 ceiling: float = 1e12, quad_n: int = 2000) -> float:
    """Smallest grid M > r with int_{2r/T}^{M} xi^((p-1)/p) / phi(xi) dxi
    exceeding ||psi||_{L^p} (2r)^((p-1)/p).

    The search grid is geometric with the given relative resolution; reaching
    the ceiling without satisfying the inequality raises NagumoBoundNotFound
    (the majorant phi grows too fast for the surrogate).
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r!r}")
    if not T > 0:
        raise ValueError(f"interval length must be positive, got {T!r}")
    expo = (pair.p - 1.0) / pair.p
    tq = make_grid(T, quad_n)
    psiv = np.asarray(pair.psi(tq.nodes), dtype=float)
    if psiv.shape != tq.nodes.shape:
        psiv = np.array(np.broadcast_to(psiv, tq.nodes.shape), dtype=float)
    if np.any(psiv < 0.0):
        raise ValueError("psi must be nonnegative on [0, T]")
    psi_norm = integrate(SampledDensity(tq, psiv**pair.p)) ** (1.0 / pair.p)
    rhs = psi_norm * (2.0 * r) ** expo

    nu = 2.0 * r / T
    count = int(np.ceil(np.log(ceiling / nu) / np.log1p(resolution)))
    count = min(max(count, 8), 400_000)
    xs = nu * (1.0 + resolution) ** np.arange(count + 1)
    phis = np.asarray(pair.phi(xs), dtype=float)
    if phis.shape != xs.shape:
        phis = np.array(np.broadcast_to(phis, xs.shape), dtype=float)
    if np.any(phis <= 0.0):
        raise ValueError("phi must be positive on the search range")
    ys = xs**expo / phis
    cum = np.empty_like(xs)
    cum[0] = 0.0
    np.cumsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs), out=cum[1:])
    satisfied = cum > rhs
    if not np.any(satisfied):
        raise NagumoBoundNotFound(
            f"running integral only reached {cum[-1]:.4g} (target {rhs:.4g}) at {xs[-1]:.4g}"
        )
    idx = int(np.argmax(satisfied))
    # The running integral is nondecreasing, so raising the index keeps the
    # inequality; lift the bound strictly above r when needed.
    while xs[idx] <= r:
        idx += 1
        if idx > count:
            raise NagumoBoundNotFound(f"search ceiling {ceiling:g} reached while enforcing M > r")
    return float(xs[idx])


@dataclass(frozen=True)
class PositivityCertificate:
    """Strength of positivity achieved by a candidate solution.

    Verdicts: positive-on-[0,T], positive-on-(0,T], nonnegative-only, fails.
    margin_interior is the minimum of u over the frame's claimed positivity
    set (all nodes, or nodes past the pinned left endpoint).
    """

    verdict: str
    min_value: float
    min_location: float
    margin_interior: float


def check_positivity(u: GridFunction, bc: BoundaryCondition, tol: float = 1e-8) -> PositivityCertificate:
    vals = u.u
    i_min = int(np.argmin(vals))
    min_value = float(vals[i_min])
    min_location = float(u.grid.nodes[i_min])
    if bc is BoundaryCondition.BC2:
        interior = float(np.min(vals[1:]))
        if abs(float(vals[0])) <= tol and interior > tol:
            verdict = "positive-on-(0,T]"
        elif min_value > tol:
            verdict = "positive-on-[0,T]"
        elif min_value >= -tol:
            verdict = "nonnegative-only"
        else:
            verdict = "fails"
        return PositivityCertificate(verdict, min_value, min_location, interior)
    interior = min_value
    if min_value > tol:
        verdict = "positive-on-[0,T]"
    elif min_value >= -tol:
        verdict = "nonnegative-only"
    else:
        verdict = "fails"
    return PositivityCertificate(verdict, min_value, min_location, interior)


def zero_propagation_margin(u: GridFunction) -> float:
    """Minimum of |u| + |u'| over interior nodes.

    A nontrivial solution cannot have state and derivative vanish at the same
    interior time; this margin quantifies the distance from that degeneracy.
    """
    return float(np.min(np.abs(u.u[1:-1]) + np.abs(u.du[1:-1])))


@dataclass(frozen=True, eq=False)
class HypothesisReport:
    """Evidence record for one of the two norm-bracket hypotheses.

    integral_value / integral_passes concern the small-radius hypothesis
    only; nonexistence_at_alpha0 concerns the forced (large-radius) one.
    Sweeps are finite samples: norm_avoidance is evidence, not proof.
    """

    target: float
    band: float
    integral_value: float
    integral_passes: bool
    sweep_norms: tuple[tuple[float, float], ...]
    norm_avoidance: bool
    nonexistence_at_alpha0: bool | None = None
    note: str = ""


@dataclass(frozen=True, eq=False)
class DegreeReport:
    r: float
    R: float
    M_r: float
    M_R: float
    h_left: float
    h_right: float
    deg_kernel: int
    deg_omega_r: int | None
    deg_omega_R: int | None
    deg_annulus: int | None
    theorem_applicable: bool
    hr: HypothesisReport
    hR: HypothesisReport


@dataclass(frozen=True, eq=False)
class CertificationOptions:
    """Shared knobs for the hypothesis sweeps and the degree report."""

    theta_schedule: tuple[float, ...] = (1.0, 0.8, 0.6, 0.4, 0.2)
    alpha_schedule: tuple[float, ...] | None = None
    alpha0: float | None = None
    v: SampledDensity | None = None
    band_rel: float = 0.01
    restart_fractions: tuple[float, ...] = (0.3, 0.6, 0.9)
    solve: SolveOptions = field(default_factory=SolveOptions)
    initial: GridFunction | None = None


def _paper_integral(hval: float, bc: BoundaryCondition, T: float) -> float:
    if bc is BoundaryCondition.BC3:
        return -(T * T / 2.0) * hval
    return -T * hval


def check_Hr(r: float, ft: ExtendedFn, frame: CoincidenceFrame,
             theta_schedule=None, opts: CertificationOptions | None = None) -> HypothesisReport:
    """Small-radius hypothesis: sign condition on the kernel integral plus a
    sampled theta-sweep checking that computed solution norms avoid r."""
    if not r > 0:
        raise ValueError(f"radius r must be positive, got {r!r}")
    opts = opts or CertificationOptions()
    schedule = tuple(theta_schedule) if theta_schedule is not None else opts.theta_schedule
    bc, grid, T = frame.bc, frame.grid, frame.grid.T
    a_r = kernel_interval_halfwidth(r, bc, T)
    hval = kernel_h(a_r, ft, bc, grid)
    integral_value = _paper_integral(hval, bc, T)
    integral_passes = integral_value < 0.0

    initial = opts.initial if opts.initial is not None else frame.embed(0.5 * a_r)
    reports = continuation("theta", schedule, ft, frame, opts.solve, initial=initial)
    band = opts.band_rel * r
    sweep = tuple((float(s), rep.sup_norm) for s, rep in zip(schedule, reports))
    avoid = all(abs(rep.sup_norm - r) > band for rep in reports if rep.converged)
    note = (
        "sampled-theta evidence only; the avoidance clause is checked at "
        f"{len(schedule)} deformation values, band {band:.3g}"
    )
    return HypothesisReport(
        target=float(r),
        band=band,
        integral_value=integral_value,
        integral_passes=integral_passes,
        sweep_norms=sweep,
        norm_avoidance=avoid,
        nonexistence_at_alpha0=None,
        note=note,
    )


def check_HR(R: float, v: SampledDensity, alpha0: float, ft: ExtendedFn,
             frame: CoincidenceFrame, alpha_schedule=None,
             opts: CertificationOptions | None = None) -> HypothesisReport:
    """Forced-problem hypothesis: sampled alpha-sweep up to alpha0 with a
    restart search for solutions of norm at most R at the terminal forcing.

    Nonexistence at alpha0 is a semi-decision: it is reported true when no
    restart produces a solution inside the R ball and the computed branch
    escaped past R (either by convergence to larger norms or by failure after
    escape).
    """
    if not R > 0:
        raise ValueError(f"radius R must be positive, got {R!r}")
    if not alpha0 > 0:
        raise ValueError(f"alpha0 must be positive, got {alpha0!r}")
    if v is None:
        raise ValueError("forced hypothesis needs a profile v")
    if np.any(v.w < 0.0):
        raise ValueError("forcing profile v must be nonnegative")
    if not np.any(v.w > 0.0):
        raise ValueError("forcing profile v must not vanish identically")
    opts = opts or CertificationOptions()
    if alpha_schedule is not None:
        schedule = tuple(float(a) for a in alpha_schedule)
    elif opts.alpha_schedule is not None:
        schedule = tuple(float(a) for a in opts.alpha_schedule)
    else:
        schedule = tuple(np.linspace(0.0, alpha0, 6))
    tiny = 1e-12 * max(1.0, alpha0)
    if schedule[-1] < alpha0 - tiny or any(a < -tiny or a > alpha0 + tiny for a in schedule):
        raise ValueError("alpha schedule must stay in [0, alpha0] and end at alpha0")
    diffs = np.diff(schedule)
    if diffs.size and not np.all(diffs >= 0.0):
        raise ValueError("alpha schedule must be nondecreasing")

    bc, T = frame.bc, frame.grid.T
    initial = opts.initial if opts.initial is not None else None
    reports = continuation("alpha", schedule, ft, frame, opts.solve, v=v, initial=initial)
    band = opts.band_rel * R
    sweep = tuple((float(a), rep.sup_norm) for a, rep in zip(schedule, reports))
    avoid = all(abs(rep.sup_norm - R) > band for rep in reports if rep.converged)
    last_converged = next((rep for rep in reversed(reports) if rep.converged), None)

    hp0 = HomotopyParams(theta=1.0, alpha=alpha0, v=v)
    factor = kernel_sup_factor(bc, T)
    restart_results: list[tuple[bool, float]] = []
    for frac in opts.restart_fractions:
        start = frame.embed(frac * R / factor)
        try:
            rep = solve_fixed_point(start, ft, frame, hp0, opts.solve)
            restart_results.append((rep.converged, rep.sup_norm))
        except Exception:
            restart_results.append((False, float("nan")))
    found_small = any(ok and norm <= R * (1.0 + opts.band_rel) for ok, norm in restart_results)
    escaped = (last_converged is not None and last_converged.sup_norm > R) or any(
        ok and norm > R * (1.0 + opts.band_rel) for ok, norm in restart_results
    )
    nonexistence = (not found_small) and escaped
    note = (
        "semi-decision: restarts at fractions "
        f"{tuple(opts.restart_fractions)} of R found "
        f"{'a' if found_small else 'no'} solution inside the R ball at alpha0; "
        f"branch escape past R: {escaped}"
    )
    return HypothesisReport(
        target=float(R),
        band=band,
        integral_value=math.nan,
        integral_passes=False,
        sweep_norms=sweep,
        norm_avoidance=avoid,
        nonexistence_at_alpha0=nonexistence,
        note=note,
    )


def degree_report(r: float, R: float, ft: ExtendedFn, frame: CoincidenceFrame,
                  opts: CertificationOptions,
                  nagumo: Callable[[float], NagumoPair] | None = None) -> DegreeReport:
    """Full bookkeeping: kernel degree over the small box, zero degree over
    the forced box when its hypothesis holds, and the annulus value by
    additivity.  Derivative bounds come from nagumo_bound, with the larger
    radius forced to carry the larger bound."""
    if not (r > 0 and R > 0):
        raise ValueError("both radii must be positive")
    if r == R:
        raise ValueError("the two radii must differ")
    if opts.v is None or opts.alpha0 is None:
        raise ValueError("degree report needs a forcing profile v and alpha0 in the options")
    nag = nagumo if nagumo is not None else ft.base.nagumo

    bc, grid, T = frame.bc, frame.grid, frame.grid.T
    hr = check_Hr(r, ft, frame, opts.theta_schedule, opts)
    hR = check_HR(R, opts.v, opts.alpha0, ft, frame, opts.alpha_schedule, opts)

    aw = kernel_interval_halfwidth(r, bc, T)
    h_left = kernel_h(-aw, ft, bc, grid)
    h_right = kernel_h(aw, ft, bc, grid)
    deg_kernel = brouwer_degree_1d(lambda a: kernel_h(a, ft, bc, grid), (-aw, aw))
    deg_omega_r = deg_kernel

    hR_ok = hR.norm_avoidance and bool(hR.nonexistence_at_alpha0)
    deg_omega_R: int | None = 0 if hR_ok else None
    if deg_omega_R is not None:
        deg_annulus: int | None = (
            deg_omega_R - deg_omega_r if r < R else deg_omega_r - deg_omega_R
        )
    else:
        deg_annulus = None
    applicable = (
        hr.integral_passes and hr.norm_avoidance and hR_ok and deg_kernel == 1
    )

    M_r = nagumo_bound(r, nag(r), T)
    M_R = nagumo_bound(R, nag(R), T)
    # Nesting of the norm boxes: the larger radius carries the larger bound.
    if r < R:
        M_R = max(M_R, M_r * (1.0 + 1e-9))
    else:
        M_r = max(M_r, M_R * (1.0 + 1e-9))

    return DegreeReport(
        r=float(r),
        R=float(R),
        M_r=M_r,
        M_R=M_R,
        h_left=h_left,
        h_right=h_right,
        deg_kernel=deg_kernel,
        deg_omega_r=deg_omega_r,
        deg_omega_R=deg_omega_R,
        deg_annulus=deg_annulus,
        theorem_applicable=applicable,
        hr=hr,
        hR=hR,
    )
