"""Nonlinearities with growth metadata, their two-branch extension, and the
substitution (Nemytskii) operator.

Almost-everywhere growth conditions are checked on finite probe lattices; the
divergence requirement on the derivative majorant is replaced by a cutoff
surrogate.  Reports state the probe density used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import GridFunction, SampledDensity

__all__ = [
    "NagumoPair",
    "CarathFn",
    "ExtendedFn",
    "EvaluationError",
    "ProbePlan",
    "ConditionCheck",
    "GrowthReport",
    "extend_tilde",
    "nemytskii",
    "verify_growth_conditions",
]


class EvaluationError(RuntimeError):
    """A user-supplied nonlinearity produced a non-finite value."""

    def __init__(self, node: int, t: float, value: float):
        super().__init__(
            f"non-finite nonlinearity value {value!r} at node {node} (t = {t:.6g})"
        )
        self.node = int(node)
        self.t = float(t)


@dataclass(frozen=True)
class NagumoPair:
    """Derivative growth majorant |f(t, s, xi)| <= psi(t) * phi(|xi|),
    valid for 0 <= s <= eta.

    phi maps [0, inf) into [0, inf), psi is a nonnegative density on [0, T],
    and p is the integrability exponent of psi.  Both callables must accept
    numpy arrays.
    """

    eta: float
    phi: Callable
    psi: Callable
    p: float = 1.0

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValueError(f"range bound eta must be positive, got {self.eta!r}")
        if not (1.0 <= self.p < np.inf):
            raise ValueError(f"exponent p must lie in [1, inf), got {self.p!r}")


@dataclass(frozen=True)
class CarathFn:
    """Nonlinearity f(t, s, xi) defined for s >= 0, with growth metadata.

    f(t, 0, xi) must vanish, |f| must be dominated by k(t)(|s| + |xi|) on the
    box s in [0, rho], |xi| <= rho, and ``nagumo`` maps a range bound eta to a
    NagumoPair.  All callables must accept and broadcast numpy arrays.
    """

    f: Callable
    k: Callable
    rho: float
    nagumo: Callable[[float], NagumoPair]

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho!r}")


@dataclass(frozen=True)
class ExtendedFn:
    """Two-branch extension: the base f for s >= 0 and -s for s <= 0.

    The branches agree at s = 0 because the base vanishes there.
    """

    base: CarathFn

    def __call__(self, t, s, xi):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        xi = np.asarray(xi, dtype=float)
        # The base is only defined for s >= 0; clamp before evaluating so the
        # discarded branch cannot produce stray non-finite values.
        pos = self.base.f(t, np.maximum(s, 0.0), xi)
        return np.where(s >= 0.0, pos, -s)


def extend_tilde(base: CarathFn) -> ExtendedFn:
    """Extension of the nonlinearity to all real states."""
    return ExtendedFn(base)


def nemytskii(ft: ExtendedFn, u: GridFunction) -> SampledDensity:
    """Substitution operator: w_i = f~(t_i, u_i, u'_i)."""
    t = u.grid.nodes
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.asarray(ft(t, u.u, u.du), dtype=float)
    if w.shape != t.shape:
        w = np.array(np.broadcast_to(w, t.shape), dtype=float)
    bad = ~np.isfinite(w)
    if bad.any():
        i = int(np.argmax(bad))
        raise EvaluationError(i, float(t[i]), float(w[i]))
    return SampledDensity(u.grid, w)


@dataclass(frozen=True)
class ProbePlan:
    """Finite probe lattice for the growth checks.

    nt, ns and nxi are node counts along t, s and xi; divergence_cutoff is
    the upper limit X of the divergence surrogate and divergence_threshold
    the value the surrogate integral has to exceed at X.
    """

    T: float = 1.0
    nt: int = 33
    ns: int = 21
    nxi: int = 21
    xi_max: float = 1e3
    liminf_floor: float = 1e-6
    divergence_cutoff: float = 1e6
    divergence_threshold: float = 1e3
    tol: float = 1e-9


@dataclass(frozen=True)
class ConditionCheck:
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class GrowthReport:
    """Outcome of the probe-set growth verification.

    Margins are worst-case violation magnitudes (negative or tiny values mean
    slack).  A pass here is finite-probe evidence, not a proof.
    """

    f1: ConditionCheck
    f2: ConditionCheck
    f3_bound: ConditionCheck
    f3_liminf: ConditionCheck
    f3_divergence: ConditionCheck
    plan: ProbePlan

    @property
    def f3_passed(self) -> bool:
        return self.f3_bound.passed and self.f3_liminf.passed and self.f3_divergence.passed

    @property
    def all_passed(self) -> bool:
        return self.f1.passed and self.f2.passed and self.f3_passed


def _symmetric_xi(nxi: int, xi_max: float) -> np.ndarray:
    half = max(nxi // 2, 2)
    mags = np.concatenate(([0.0], np.logspace(-3, np.log10(xi_max), half)))
    return np.unique(np.concatenate((-mags, mags)))


def verify_growth_conditions(base: CarathFn, plan: ProbePlan | None = None) -> GrowthReport:
    """Check the zero-at-zero, linear-box, and derivative-majorant conditions
    on a probe lattice.

    The divergence half of the majorant condition is only a surrogate: the
    integral of xi^((p-1)/p) / phi(xi) must exceed the configured threshold
    at the cutoff X.  Failures come back as report entries, never as errors.
    """
    plan = plan or ProbePlan()
    t = np.linspace(0.0, plan.T, plan.nt)
    xi = _symmetric_xi(plan.nxi, plan.xi_max)

    # f vanishes at s = 0
    vals = np.abs(np.asarray(base.f(t[:, None], np.zeros((1, 1)), xi[None, :]), dtype=float))
    m1 = float(np.max(vals))
    f1 = ConditionCheck(m1 <= plan.tol, m1, f"max |f(t, 0, xi)| over {plan.nt}x{xi.size} probes")

    # |f| <= k(t)(|s| + |xi|) on the rho box
    s_box = np.linspace(0.0, base.rho, plan.ns)
    xi_box = np.linspace(-base.rho, base.rho, plan.nxi)
    t3 = t[:, None, None]
    s3 = s_box[None, :, None]
    x3 = xi_box[None, None, :]
    fv = np.abs(np.asarray(base.f(t3, s3, x3), dtype=float))
    kv = np.asarray(base.k(t), dtype=float)
    if kv.shape != t.shape:
        kv = np.array(np.broadcast_to(kv, t.shape), dtype=float)
    bound = kv[:, None, None] * (np.abs(s3) + np.abs(x3))
    m2 = float(np.max(fv - bound))
    tol2 = plan.tol * max(1.0, float(np.max(bound)))
    f2 = ConditionCheck(m2 <= tol2, m2, f"worst |f| - k(|s|+|xi|) on the rho = {base.rho:g} box")

    # derivative majorant at eta = rho
    pair = base.nagumo(base.rho)
    s_eta = np.linspace(0.0, pair.eta, plan.ns)
    fv3 = np.abs(np.asarray(base.f(t3, s_eta[None, :, None], xi[None, None, :]), dtype=float))
    psiv = np.asarray(pair.psi(t), dtype=float)
    if psiv.shape != t.shape:
        psiv = np.array(np.broadcast_to(psiv, t.shape), dtype=float)
    phiv = np.asarray(pair.phi(np.abs(xi)), dtype=float)
    if phiv.shape != xi.shape:
        phiv = np.array(np.broadcast_to(phiv, xi.shape), dtype=float)
    majorant = psiv[:, None, None] * phiv[None, None, :]
    m3 = float(np.max(fv3 - majorant))
    tol3 = plan.tol * max(1.0, float(np.max(np.abs(majorant))))
    f3_bound = ConditionCheck(m3 <= tol3, m3, f"worst |f| - psi*phi on the eta = {pair.eta:g} box")

    xs = np.logspace(0.0, np.log10(plan.divergence_cutoff), 4001)
    phis = np.asarray(pair.phi(xs), dtype=float)
    if phis.shape != xs.shape:
        phis = np.array(np.broadcast_to(phis, xs.shape), dtype=float)
    tail_min = float(np.min(phis))
    f3_liminf = ConditionCheck(
        tail_min > plan.liminf_floor,
        tail_min,
        f"min phi on [1, {plan.divergence_cutoff:g}] (floor {plan.liminf_floor:g})",
    )

    expo = (pair.p - 1.0) / pair.p
    with np.errstate(divide="ignore", over="ignore"):
        ys = np.where(phis > 0.0, xs**expo / np.where(phis > 0.0, phis, 1.0), np.inf)
    if np.all(np.isfinite(ys)):
        surrogate = float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))
    else:
        surrogate = float("inf")
    f3_div = ConditionCheck(
        surrogate >= plan.divergence_threshold and tail_min > 0.0,
        surrogate,
        f"surrogate integral {surrogate:.4g} at cutoff {plan.divergence_cutoff:g}",
    )

    return GrowthReport(f1, f2, f3_bound, f3_liminf, f3_div, plan)
