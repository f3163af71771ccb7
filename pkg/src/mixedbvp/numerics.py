"""Uniform-grid sampling and quadrature primitives.

Composite Simpson is the reference quadrature (with a trapezoid fallback when
the number of subintervals is odd).  Running integrals use the cumulative
trapezoid rule, which keeps the whole discrete solve machinery at second
order; the iterated integral's outer pass is Simpson-consistent so that its
right endpoint agrees with ``integrate`` applied to the inner running
integral.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "SampledDensity",
    "make_grid",
    "integrate",
    "cumulative_integral",
    "double_cumulative",
]


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [0, T] into n subintervals (nodes t_i = i T / n)."""

    T: float
    n: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError(f"interval length must be positive and finite, got {self.T!r}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need an integer number of subintervals >= 2, got {self.n!r}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        """Constant node spacing T / n."""
        return self.T / self.n

    @property
    def nodes(self) -> np.ndarray:
        """Node array; the first node is exactly 0 and the last exactly T."""
        return np.linspace(0.0, self.T, self.n + 1)


def make_grid(T: float, n: int) -> Grid:
    """Uniform grid on [0, T] with n >= 2 subintervals."""
    return Grid(T, n)


def _samples(grid: Grid, values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.shape != (grid.n + 1,):
        raise ValueError(f"{name} must carry {grid.n + 1} samples, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal samples (u, u') of a C^1 candidate solution.

    Derivative samples are carried explicitly rather than differenced from u;
    the fixed-point machinery produces both channels from running integrals.
    """

    grid: Grid
    u: np.ndarray
    du: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "u", _samples(self.grid, self.u, "u"))
        object.__setattr__(self, "du", _samples(self.grid, self.du, "du"))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.u)))

    @property
    def deriv_sup_norm(self) -> float:
        return float(np.max(np.abs(self.du)))

    @property
    def c1_norm(self) -> float:
        """Discrete analogue of the norm sup|u| + sup|u'|."""
        return self.sup_norm + self.deriv_sup_norm


@dataclass(frozen=True, eq=False)
class SampledDensity:
    """Nodal samples of an integrable right-hand side on a grid."""

    grid: Grid
    w: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", _samples(self.grid, self.w, "w"))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.w)))


@lru_cache(maxsize=256)
def _quad_weights(T: float, n: int) -> np.ndarray:
    h = T / n
    if n % 2 == 0:
        w = np.full(n + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        w *= h / 3.0
    else:
        w = np.full(n + 1, h)
        w[0] = w[-1] = 0.5 * h
    w.setflags(write=False)
    return w


def integrate(w: SampledDensity) -> float:
    """Integral of w over [0, T].

    Composite Simpson for even n (exact on polynomials of degree <= 3),
    composite trapezoid when n is odd.
    """
    return float(_quad_weights(w.grid.T, w.grid.n) @ w.w)


def _cumtrapz(values: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum(0.5 * h * (values[:-1] + values[1:]), out=out[1:])
    return out


def _cumulative_matching_integrate(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Running integral whose right endpoint reproduces ``integrate`` exactly.

    Even n: per-pair quadratic increments that telescope to composite Simpson.
    Odd n: plain cumulative trapezoid, matching the trapezoid fallback.
    """
    h = grid.h
    if grid.n % 2 != 0:
        return _cumtrapz(values, h)
    a = values[:-2:2]
    b = values[1:-1:2]
    c = values[2::2]
    first = (h / 12.0) * (5.0 * a + 8.0 * b - c)
    second = (h / 12.0) * (-a + 8.0 * b + 5.0 * c)
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum(first + second, out=out[2::2])
    out[1::2] = out[:-1:2] + first
    return out


def cumulative_integral(w: SampledDensity) -> SampledDensity:
    """Running integral s -> int_0^s w by the cumulative trapezoid rule.

    Value 0 at the first node; node values agree with the prefix integrals to
    second order in the spacing.
    """
    return SampledDensity(w.grid, _cumtrapz(w.w, w.grid.h))


def double_cumulative(w: SampledDensity) -> SampledDensity:
    """Iterated integral s -> int_0^s ( int_0^t w ) dt.

    Built from two running passes over the inner cumulative trapezoid; the
    outer pass is Simpson-consistent so the value at the last node equals
    ``integrate(cumulative_integral(w))`` up to roundoff.
    """
    inner = _cumtrapz(w.w, w.grid.h)
    return SampledDensity(w.grid, _cumulative_matching_integrate(inner, w.grid))
