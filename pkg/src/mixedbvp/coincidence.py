"""Projection frames for the three mixed boundary conditions.

Each frame supplies a one-dimensional kernel embedding, the image-defect
functional, projections onto the kernel and cokernel coordinates, an explicit
right inverse of -u'' on the image, and the identity isomorphism between the
two real coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .numerics import (
    Grid,
    GridFunction,
    SampledDensity,
    cumulative_integral,
    double_cumulative,
    integrate,
)

__all__ = [
    "BoundaryCondition",
    "KernelElement",
    "CoincidenceFrame",
    "NotInImageError",
    "boundary_map",
    "boundary_defect",
    "kernel_embed",
    "kernel_parameter",
    "kernel_sup_factor",
    "image_defect",
    "project_P",
    "project_Q",
    "right_inverse_KP",
    "iso_J",
]


class BoundaryCondition(Enum):
    """The three boundary frames for u'' + f(t, u, u') = 0 on [0, T]."""

    BC1 = "bc1"  # u'(0) = u'(T) = u(0)
    BC2 = "bc2"  # u'(0) = u'(T) and u(0) = 0
    BC3 = "bc3"  # u(0) = u(T) and u'(0) = 0

    @classmethod
    def from_name(cls, name: str) -> "BoundaryCondition":
        key = str(name).strip().lower()
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown boundary condition {name!r}; use bc1, bc2 or bc3")


class NotInImageError(ValueError):
    """Density handed to the right inverse misses the image by more than tol."""

    def __init__(self, defect: float, tol: float):
        super().__init__(
            f"density not in the image of -u'': defect {defect:.6g} exceeds tolerance {tol:.6g}"
        )
        self.defect = float(defect)
        self.tol = float(tol)


@dataclass(frozen=True)
class KernelElement:
    """Kernel coordinate a; embeds as a(1+t), a*t, or the constant a."""

    a: float
    bc: BoundaryCondition


def boundary_map(u: GridFunction, bc: BoundaryCondition) -> tuple[float, float]:
    """The two boundary rows of the frame, evaluated from the samples."""
    u0, uT = float(u.u[0]), float(u.u[-1])
    p0, pT = float(u.du[0]), float(u.du[-1])
    if bc is BoundaryCondition.BC1:
        return (pT - u0, p0 - u0)
    if bc is BoundaryCondition.BC2:
        return (pT - p0, u0)
    return (uT - u0, p0)


def boundary_defect(u: GridFunction, bc: BoundaryCondition) -> float:
    """1-norm of the boundary rows."""
    b1, b2 = boundary_map(u, bc)
    return abs(b1) + abs(b2)


def kernel_embed(e: KernelElement, grid: Grid) -> GridFunction:
    """Closed-form embedding of a kernel coordinate on the grid."""
    t = grid.nodes
    a = float(e.a)
    if e.bc is BoundaryCondition.BC1:
        return GridFunction(grid, a * (1.0 + t), np.full(grid.n + 1, a))
    if e.bc is BoundaryCondition.BC2:
        return GridFunction(grid, a * t, np.full(grid.n + 1, a))
    return GridFunction(grid, np.full(grid.n + 1, a), np.zeros(grid.n + 1))


def kernel_sup_factor(bc: BoundaryCondition, T: float) -> float:
    """Sup norm of the kernel embedding with unit coordinate."""
    if bc is BoundaryCondition.BC1:
        return 1.0 + T
    if bc is BoundaryCondition.BC2:
        return T
    return 1.0


def image_defect(w: SampledDensity, bc: BoundaryCondition) -> float:
    """Scalar functional vanishing exactly on the discrete image of -u''.

    Single integral for the first two frames, iterated integral for the third.
    """
    if bc is BoundaryCondition.BC3:
        return integrate(cumulative_integral(w))
    return integrate(w)


def kernel_parameter(u: GridFunction, bc: BoundaryCondition) -> float:
    """Kernel coordinate of the projection P applied to u."""
    T = u.grid.T
    if bc is BoundaryCondition.BC1:
        return (float(u.u[-1]) - float(u.u[0])) / T
    if bc is BoundaryCondition.BC2:
        return float(u.du[0])
    return integrate(SampledDensity(u.grid, u.u)) / T


def project_P(u: GridFunction, bc: BoundaryCondition) -> GridFunction:
    """Projection onto the kernel: slope-matched affine part, initial slope
    ray, or mean value, depending on the frame."""
    return kernel_embed(KernelElement(kernel_parameter(u, bc), bc), u.grid)


def project_Q(w: SampledDensity, bc: BoundaryCondition) -> float:
    """Cokernel coordinate of w: the normalized image-defect functional."""
    T = w.grid.T
    if bc is BoundaryCondition.BC3:
        return 2.0 / (T * T) * image_defect(w, bc)
    return image_defect(w, bc) / T


def iso_J(c: float, bc: BoundaryCondition) -> KernelElement:
    """Identity on the real coordinates of cokernel and kernel
    (orientation preserving)."""
    return KernelElement(float(c), bc)


def right_inverse_KP(
    w: SampledDensity, bc: BoundaryCondition, tol: float | None = None
) -> GridFunction:
    """Unique preimage of w under -u'' lying in dom L and ker P.

    The caller must hand in a density with (numerically) vanishing image
    defect; apply Id - Q first otherwise.  Default tolerance is 10 h^2 scaled
    by the sup norm of w, plus a machine-noise floor so that near-zero
    densities with pure roundoff defects still pass.
    """
    grid = w.grid
    defect = image_defect(w, bc)
    if tol is None:
        tol = 10.0 * grid.h**2 * w.sup_norm + 1e-13 * (1.0 + w.sup_norm)
    if abs(defect) > tol:
        raise NotInImageError(defect, tol)
    V = cumulative_integral(w).w
    W = double_cumulative(w).w
    T = grid.T
    t = grid.nodes
    if bc is BoundaryCondition.BC1:
        D = float(W[-1])
        u = (D / T) * (1.0 + t) - W
        du = (D / T) - V
    elif bc is BoundaryCondition.BC2:
        u = -W
        du = -V
    else:
        mean = integrate(SampledDensity(grid, W)) / T
        u = mean - W
        du = -V
    return GridFunction(grid, u, du)


@dataclass(frozen=True)
class CoincidenceFrame:
    """A boundary frame bound to a working grid."""

    bc: BoundaryCondition
    grid: Grid

    def embed(self, a: float) -> GridFunction:
        return kernel_embed(KernelElement(a, self.bc), self.grid)

    def project_P(self, u: GridFunction) -> GridFunction:
        return project_P(u, self.bc)

    def project_Q(self, w: SampledDensity) -> float:
        return project_Q(w, self.bc)

    def image_defect(self, w: SampledDensity) -> float:
        return image_defect(w, self.bc)

    def right_inverse(self, w: SampledDensity, tol: float | None = None) -> GridFunction:
        return right_inverse_KP(w, self.bc, tol)

    def boundary_defect(self, u: GridFunction) -> float:
        return boundary_defect(u, self.bc)

    @property
    def sup_factor(self) -> float:
        return kernel_sup_factor(self.bc, self.grid.T)
