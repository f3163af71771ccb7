"""Concrete problem instances and an independent shooting oracle.

The logistic family f = s(lam - s) - c s xi covers the growth conditions with
explicit metadata.  Manufactured problems reverse-engineer a nonlinearity
from a closed-form target: f = g1(t) s - beta s^2, where g1 is chosen so the
target solves the equation exactly.  The quadratic stabilizer (beta > 0)
keeps the target an isolated solution; with beta = 0 the problem is linear
and every multiple of the target solves it, which also degenerates the
shooting map.

The oracle integrates the state equation with the classical fourth-order
one-step method and locates the free initial coordinate by bisection on the
remaining boundary row; it shares no machinery with the fixed-point solver
beyond the grid containers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coincidence import BoundaryCondition
from .nonlinearity import CarathFn, NagumoPair, extend_tilde
from .numerics import Grid, GridFunction, make_grid

__all__ = [
    "ProblemSpec",
    "NoBracketError",
    "logistic_family",
    "allee_family",
    "manufactured_problem",
    "get_problem",
    "problem_names",
    "oracle_shoot",
]


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """A named instance: boundary frame, horizon, nonlinearity, and (when
    manufactured) the closed-form solution generator."""

    name: str
    bc: BoundaryCondition
    T: float
    f: CarathFn
    known_solution: Callable[[Grid], GridFunction] | None = None
    suggested_r_R: tuple[float, float] | None = None


class NoBracketError(RuntimeError):
    """The boundary-row map had no sign change on the configured bracket."""

    def __init__(self, bracket: tuple[float, float], degenerate: bool, detail: str = ""):
        kind = "degenerate bracket" if degenerate else "no sign change"
        msg = f"{kind} on [{bracket[0]:g}, {bracket[1]:g}]"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)
        self.bracket = (float(bracket[0]), float(bracket[1]))
        self.degenerate = bool(degenerate)


def logistic_family(lam: float, c: float, T: float, bc: BoundaryCondition) -> ProblemSpec:
    """f(t, s, xi) = s(lam - s) - c s xi with metadata.

    With rho = 1 the linear box holds with the constant density
    k = lam + rho + |c| rho, and for s in [0, eta] the derivative majorant
    holds with phi(xi) = 1 + xi, psi = eta (lam + eta + |c|) and exponent 1.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam!r}")
    lam = float(lam)
    c = float(c)
    rho = 1.0
    k_const = lam + rho + abs(c) * rho

    def f(t, s, xi):
        return s * (lam - s) - c * s * xi

    def k(t):
        t = np.asarray(t, dtype=float)
        return np.full(t.shape, k_const)

    def nagumo(eta: float) -> NagumoPair:
        level = eta * (lam + eta + abs(c))

        def psi(t):
            t = np.asarray(t, dtype=float)
            return np.full(t.shape, level)

        return NagumoPair(eta=eta, phi=lambda xi: 1.0 + np.asarray(xi, dtype=float), psi=psi, p=1.0)

    fn = CarathFn(f=f, k=k, rho=rho, nagumo=nagumo)
    return ProblemSpec(name=f"logistic-{bc.value}", bc=bc, T=float(T), f=fn)


def allee_family(lam: float, b: float, T: float, bc: BoundaryCondition) -> ProblemSpec:
    """Cubic growth with a lower threshold: f(t, s, xi) = s(s - b)(lam - s),
    0 < b < lam.

    Negative for s in (0, b), positive on (b, lam), negative beyond lam; the
    small-radius sign condition therefore holds at radii below the threshold
    while nontrivial solutions live near the upper equilibrium.  Metadata as
    for the logistic: rho = 1, constant density k, and a xi-free derivative
    majorant (phi identically 1, exponent 1).
    """
    if not 0 < b < lam:
        raise ValueError(f"need 0 < b < lam, got b={b!r}, lam={lam!r}")
    lam, b = float(lam), float(b)
    rho = 1.0
    k_const = (rho + b) * (lam + rho)

    def f(t, s, xi):
        return s * (s - b) * (lam - s)

    def k(t):
        t = np.asarray(t, dtype=float)
        return np.full(t.shape, k_const)

    def nagumo(eta: float) -> NagumoPair:
        level = eta * (eta + b) * (lam + eta)

        def psi(t):
            t = np.asarray(t, dtype=float)
            return np.full(t.shape, level)

        return NagumoPair(
            eta=eta,
            phi=lambda xi: np.ones_like(np.asarray(xi, dtype=float)),
            psi=psi,
            p=1.0,
        )

    fn = CarathFn(f=f, k=k, rho=rho, nagumo=nagumo)
    return ProblemSpec(name=f"allee-{bc.value}", bc=bc, T=float(T), f=fn)


def _mms_forms(bc: BoundaryCondition, T: float, c: float, d: float):
    """Closed-form target u*, u*' and u*'' for the given frame.

    Bump terms are written in tau = t / T so the boundary rows hold for every
    horizon; the affine/linear parts are left unscaled for the same reason.
    """

    if bc is BoundaryCondition.BC1:
        # u* = c (1 + t) + d tau^2 (1 - tau)^2

        def u(t):
            tau = np.asarray(t, dtype=float) / T
            return c * (1.0 + np.asarray(t, dtype=float)) + d * tau**2 * (1.0 - tau) ** 2

        def up(t):
            tau = np.asarray(t, dtype=float) / T
            return c + (d / T) * (2.0 * tau - 6.0 * tau**2 + 4.0 * tau**3)

        def upp(t):
            tau = np.asarray(t, dtype=float) / T
            return (d / T**2) * (2.0 - 12.0 * tau + 12.0 * tau**2)

    elif bc is BoundaryCondition.BC2:
        # u* = c t + d tau^3 (1 - tau)^2

        def u(t):
            t = np.asarray(t, dtype=float)
            tau = t / T
            return c * t + d * tau**3 * (1.0 - tau) ** 2

        def up(t):
            tau = np.asarray(t, dtype=float) / T
            return c + (d / T) * (3.0 * tau**2 - 8.0 * tau**3 + 5.0 * tau**4)

        def upp(t):
            tau = np.asarray(t, dtype=float) / T
            return (d / T**2) * (6.0 * tau - 24.0 * tau**2 + 20.0 * tau**3)

    else:
        # u* = c + d tau^2 (1 - tau)^2; the quartic bump keeps the load
        # outside the quadrature's polynomial exactness set, so the solve
        # error carries a genuine second-order term.

        def u(t):
            tau = np.asarray(t, dtype=float) / T
            return c + d * tau**2 * (1.0 - tau) ** 2

        def up(t):
            tau = np.asarray(t, dtype=float) / T
            return (d / T) * (2.0 * tau - 6.0 * tau**2 + 4.0 * tau**3)

        def upp(t):
            tau = np.asarray(t, dtype=float) / T
            return (d / T**2) * (2.0 - 12.0 * tau + 12.0 * tau**2)

    return u, up, upp


def manufactured_problem(bc: BoundaryCondition, T: float = 1.0, c: float = 1.0,
                         d: float = 1.0, beta: float = 1.0) -> ProblemSpec:
    """Problem with the closed-form solution u* baked in.

    The nonlinearity is f(t, s, xi) = g1(t) s - beta s^2 with
    g1 = -u*''/u* + beta u*, so u* solves the equation exactly and f
    vanishes at s = 0 by construction.  beta = 0 gives the bare gain form
    (linear problem; the solution is then only determined up to scale).
    """
    T, c, d, beta = float(T), float(c), float(d), float(beta)
    u_fn, up_fn, upp_fn = _mms_forms(bc, T, c, d)

    probe = np.linspace(0.0, T, 4097)
    uprobe = np.asarray(u_fn(probe), dtype=float)
    if bc is BoundaryCondition.BC2:
        if c <= 0:
            raise ValueError("the second frame needs c > 0 for positivity on (0, T]")
        if np.min(uprobe[1:]) <= 0:
            raise ValueError("target vanishes inside (0, T]; adjust c or d")
        limit0 = -6.0 * d / (c * T**3)
    else:
        if np.min(uprobe) <= 0:
            raise ValueError("target vanishes on [0, T]; adjust c or d")
        limit0 = 0.0

    floor = 1e-9 * max(1.0, float(np.max(np.abs(uprobe))))

    def gain(t):
        t = np.asarray(t, dtype=float)
        uu = np.asarray(u_fn(t), dtype=float)
        small = np.abs(uu) <= floor
        safe = np.where(small, 1.0, uu)
        out = -np.asarray(upp_fn(t), dtype=float) / safe
        out = np.where(small, limit0, out)
        return out + beta * uu

    def f(t, s, xi):
        return gain(t) * s - beta * s * s

    rho = 1.0

    def k(t):
        return np.abs(gain(t)) + beta * rho

    def nagumo(eta: float) -> NagumoPair:
        def psi(t):
            return eta * (np.abs(gain(t)) + beta * eta)

        return NagumoPair(
            eta=eta,
            phi=lambda xi: np.ones_like(np.asarray(xi, dtype=float)),
            psi=psi,
            p=1.0,
        )

    fn = CarathFn(f=f, k=k, rho=rho, nagumo=nagumo)

    def known(grid: Grid) -> GridFunction:
        return GridFunction(grid, u_fn(grid.nodes), up_fn(grid.nodes))

    return ProblemSpec(name=f"mms-{bc.value}", bc=bc, T=T, f=fn, known_solution=known)


_FACTORIES: dict[str, Callable[[float], ProblemSpec]] = {
    "logistic-bc1": lambda T: logistic_family(1.0, 0.0, T, BoundaryCondition.BC1),
    "logistic-bc2": lambda T: logistic_family(1.0, 0.0, T, BoundaryCondition.BC2),
    "logistic-bc3": lambda T: logistic_family(1.0, 0.0, T, BoundaryCondition.BC3),
    "allee-bc3": lambda T: allee_family(2.0, 0.5, T, BoundaryCondition.BC3),
    "mms-bc1": lambda T: manufactured_problem(BoundaryCondition.BC1, T, c=1.0, d=1.0),
    "mms-bc2": lambda T: manufactured_problem(BoundaryCondition.BC2, T, c=1.0, d=2.0),
    "mms-bc3": lambda T: manufactured_problem(BoundaryCondition.BC3, T, c=1.0, d=1.0),
}


def problem_names() -> list[str]:
    return sorted(_FACTORIES)


def get_problem(name: str, T: float = 1.0) -> ProblemSpec:
    try:
        factory = _FACTORIES[str(name)]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; available: {', '.join(problem_names())}") from None
    return factory(float(T))


def _initial_state(bc: BoundaryCondition, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if bc is BoundaryCondition.BC1:
        return a.copy(), a.copy()
    if bc is BoundaryCondition.BC2:
        return np.zeros_like(a), a.copy()
    return a.copy(), np.zeros_like(a)


def oracle_shoot(spec: ProblemSpec, n_dense: int, grid: Grid | None = None,
                 theta: float = 1.0, alpha: float = 0.0,
                 v: Callable[[float], float] | None = None,
                 bracket: tuple[float, float] = (0.05, 8.0),
                 root_tol: float = 1e-12, scan_points: int = 33) -> GridFunction:
    """Shooting cross-check: integrate u'' = -(theta f~ + alpha v) from the
    frame's parameterized initial data and bisect the free coordinate on the
    remaining boundary row.

    Root isolation runs at a reduced step count (the bias between the coarse
    and dense shooting maps sits far below root_tol for smooth data); the
    returned trajectory is integrated with n_dense steps and restricted to
    the working grid.  Raises NoBracketError when the boundary map has no
    sign change on the bracket, flagging the degenerate all-zero case.
    """
    if n_dense < 10_000:
        raise ValueError(f"need n_dense >= 10000, got {n_dense!r}")
    if grid is None:
        grid = make_grid(spec.T, 1000)
    if grid.T != spec.T:
        raise ValueError("working grid horizon differs from the problem horizon")
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    if alpha > 0.0 and v is None:
        raise ValueError("forcing alpha > 0 needs a profile callable v")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")

    bc, T = spec.bc, spec.T
    base_f = spec.f.f
    n_steps = int(np.ceil(n_dense / grid.n)) * grid.n
    stride = n_steps // grid.n
    theta = float(theta)
    alpha = float(alpha)

    def accel(t: float, uarr: np.ndarray, parr: np.ndarray) -> np.ndarray:
        fv = np.where(uarr >= 0.0, base_f(t, np.maximum(uarr, 0.0), parr), -uarr)
        out = -theta * fv
        if alpha > 0.0:
            out = out - alpha * float(v(t))
        return out

    def boundary_gap(avec: np.ndarray, steps: int) -> np.ndarray:
        h = T / steps
        u, p = _initial_state(bc, np.asarray(avec, dtype=float))
        t = 0.0
        for i in range(steps):
            t = i * h
            k1p = accel(t, u, p)
            u2 = u + 0.5 * h * p
            p2 = p + 0.5 * h * k1p
            k2p = accel(t + 0.5 * h, u2, p2)
            u3 = u + 0.5 * h * p2
            p3 = p + 0.5 * h * k2p
            k3p = accel(t + 0.5 * h, u3, p3)
            u4 = u + h * p3
            p4 = p + h * k3p
            k4p = accel(t + h, u4, p4)
            u = u + (h / 6.0) * (p + 2.0 * p2 + 2.0 * p3 + p4)
            p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(p))):
                u = np.where(np.isfinite(u), u, 1e30)
                p = np.where(np.isfinite(p), p, 1e30)
                break
        if bc is BoundaryCondition.BC3:
            return u - avec
        return p - avec

    steps_root = min(n_steps, 4000)
    a_scan = np.linspace(lo, hi, scan_points)
    g = boundary_gap(a_scan, steps_root)
    scale = max(1.0, float(np.max(np.abs(a_scan))))
    if float(np.max(np.abs(g))) <= 1e-9 * scale:
        raise NoBracketError(
            (lo, hi), degenerate=True,
            detail="boundary map vanishes on the whole bracket (one-parameter solution family)",
        )
    products = g[:-1] * g[1:]
    hits = np.nonzero(products <= 0.0)[0]
    if hits.size == 0:
        raise NoBracketError((lo, hi), degenerate=False)
    i0 = int(hits[0])
    a_lo, a_hi = float(a_scan[i0]), float(a_scan[i0 + 1])
    g_lo, g_hi = float(g[i0]), float(g[i0 + 1])

    # Bisection by uniform subdivision: pure sign logic, batched integration.
    for _ in range(24):
        width = a_hi - a_lo
        if width <= max(root_tol, 8.0 * np.finfo(float).eps * max(1.0, abs(a_hi))):
            break
        inner = np.linspace(a_lo, a_hi, 17)[1:-1]
        gi = boundary_gap(inner, steps_root)
        gall = np.concatenate(([g_lo], gi, [g_hi]))
        aall = np.concatenate(([a_lo], inner, [a_hi]))
        prods = gall[:-1] * gall[1:]
        sub = np.nonzero(prods <= 0.0)[0]
        if sub.size == 0:
            break
        j = int(sub[0])
        a_lo, a_hi = float(aall[j]), float(aall[j + 1])
        g_lo, g_hi = float(gall[j]), float(gall[j + 1])
    a_star = 0.5 * (a_lo + a_hi)

    return _dense_trajectory(spec, a_star, n_steps, stride, grid, theta, alpha, v)


def _dense_trajectory(spec: ProblemSpec, a: float, steps: int, stride: int,
                      grid: Grid, theta: float, alpha: float,
                      v: Callable[[float], float] | None) -> GridFunction:
    bc, T = spec.bc, spec.T
    base_f = spec.f.f
    h = T / steps
    if bc is BoundaryCondition.BC1:
        u, p = a, a
    elif bc is BoundaryCondition.BC2:
        u, p = 0.0, a
    else:
        u, p = a, 0.0

    def acc(t: float, uu: float, pp: float) -> float:
        fv = float(base_f(t, uu, pp)) if uu >= 0.0 else -uu
        out = -theta * fv
        if alpha > 0.0:
            out -= alpha * float(v(t))
        return out

    us = np.empty(grid.n + 1)
    ps = np.empty(grid.n + 1)
    us[0], ps[0] = u, p
    j = 0
    for i in range(steps):
        t = i * h
        k1p = acc(t, u, p)
        u2 = u + 0.5 * h * p
        p2 = p + 0.5 * h * k1p
        k2p = acc(t + 0.5 * h, u2, p2)
        u3 = u + 0.5 * h * p2
        p3 = p + 0.5 * h * k2p
        k3p = acc(t + 0.5 * h, u3, p3)
        u4 = u + h * p3
        p4 = p + h * k3p
        k4p = acc(t + h, u4, p4)
        u = u + (h / 6.0) * (p + 2.0 * p2 + 2.0 * p3 + p4)
        p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        if abs(u) > 1e15 or abs(p) > 1e15:
            raise NoBracketError((a, a), degenerate=False, detail="trajectory blew up")
        if (i + 1) % stride == 0:
            j += 1
            us[j] = u
            ps[j] = p
    return GridFunction(grid, us, ps)
