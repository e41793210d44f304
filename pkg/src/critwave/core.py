"""System definition: parameters, grids, discrete fields and residual operators.

The model is the two-species competition-diffusion system

    u_t = u_xx     + u (1 - u - a v)
    v_t = d v_xx   + r v (1 - v - b u)

on the line.  The critical case a = b = 1 makes every point of the segment
u + v = 1 an equilibrium of the reaction, which is what the rest of the
package probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StructuralError, ValidationError

BOUNDS_SLACK = 1e-12  # roundoff tolerance on the 0 <= u,v <= 1 box


@dataclass(frozen=True)
class CompetitionParams:
    """Coefficients (a, b, d, r) of the competition-diffusion system.

    a, b are the competition strengths felt by u and v respectively, d the
    diffusivity ratio and r the growth-rate ratio of the second species.
    """

    a: float = 1.0
    b: float = 1.0
    d: float = 1.0
    r: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "d", "r"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ValidationError(f"{name} must be strictly positive, got {value!r}")

    @property
    def is_critical(self) -> bool:
        return self.a == 1.0 and self.b == 1.0

    def require_critical(self):
        if not self.is_critical:
            raise ValidationError(f"critical case requires a = b = 1 exactly, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class DerivedSpeeds:
    """Spreading speeds and central-decay exponents derived from (d, r)."""

    c_u: float
    c_v: float
    k_star: float
    d_star: float

    def __post_init__(self):
        if self.c_u <= 0 or self.c_v <= 0:
            raise ValidationError("speeds must be positive")
        if not 0.0 < self.k_star <= 0.5:
            raise ValidationError(f"k_star must lie in (0, 1/2], got {self.k_star}")
        if self.d_star < 1.0:
            raise ValidationError(f"d_star must be >= 1, got {self.d_star}")


def wave_speeds(p: CompetitionParams) -> DerivedSpeeds:
    """Return c_u = 2, c_v = 2 sqrt(d r), k* = min(1/2d, d/2), d* = max(1, d)."""
    return DerivedSpeeds(
        c_u=2.0,
        c_v=2.0 * math.sqrt(p.d * p.r),
        k_star=min(1.0 / (2.0 * p.d), p.d / 2.0),
        d_star=max(1.0, p.d),
    )


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [x_min, x_max] with n nodes (endpoints included)."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValidationError(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")
        if self.n < 3:
            raise ValidationError(f"grid needs at least 3 nodes, got n={self.n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def __eq__(self, other):
        if not isinstance(other, Grid1D):
            return NotImplemented
        return (self.x_min, self.x_max, self.n) == (other.x_min, other.x_max, other.n)

    def __hash__(self):
        return hash((self.x_min, self.x_max, self.n))


@dataclass(frozen=True)
class FieldState:
    """Snapshot of both species on a grid at one time.

    Samples are stored as contiguous float64 arrays and must stay inside
    [0, 1]; violations up to BOUNDS_SLACK are clipped, anything larger is
    rejected.
    """

    t: float
    grid: Grid1D
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.t < 0.0 or not np.isfinite(self.t):
            raise ValidationError(f"time must be finite and >= 0, got {self.t}")
        for name in ("u", "v"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1 or arr.size != self.grid.n:
                raise ValidationError(f"{name} must have {self.grid.n} samples, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite samples")
            lo, hi = arr.min(), arr.max()
            if lo < -BOUNDS_SLACK or hi > 1.0 + BOUNDS_SLACK:
                raise ValidationError(
                    f"{name} leaves [0, 1] beyond roundoff (min={lo:.3e}, max={hi:.3e})"
                )
            object.__setattr__(self, name, np.clip(arr, 0.0, 1.0))


def reaction_rhs(u, v, p: CompetitionParams):
    """Reaction terms (du, dv) = (u(1-u-av), r v(1-v-bu)); accepts scalars or arrays."""
    du = u * (1.0 - u - p.a * v)
    dv = p.r * v * (1.0 - v - p.b * u)
    return du, dv


def residual_operators(states, p: CompetitionParams):
    """Discrete residuals of both equations at the middle of three snapshots.

    Applies second-order central differences in time and space; the boundary
    cells are excluded rather than extrapolated, so the returned arrays have
    grid.n - 2 entries.  Raises StructuralError on mismatched grids or
    non-uniform time spacing.
    """
    if len(states) != 3:
        raise StructuralError(f"need exactly 3 consecutive snapshots, got {len(states)}")
    s0, s1, s2 = states
    if not (s0.grid == s1.grid == s2.grid):
        raise StructuralError("snapshots live on different grids")
    dt1 = s1.t - s0.t
    dt2 = s2.t - s1.t
    if dt1 <= 0 or dt2 <= 0:
        raise StructuralError("snapshot times must be strictly increasing")
    if abs(dt2 - dt1) > 1e-9 * max(dt1, dt2):
        raise StructuralError(f"snapshots not equally spaced in time ({dt1} vs {dt2})")

    dt = 0.5 * (dt1 + dt2)
    dx = s1.grid.dx
    u, v = s1.u, s1.v

    u_t = (s2.u[1:-1] - s0.u[1:-1]) / (2.0 * dt)
    v_t = (s2.v[1:-1] - s0.v[1:-1]) / (2.0 * dt)
    u_xx = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx**2
    v_xx = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dx**2
    du, dv = reaction_rhs(u[1:-1], v[1:-1], p)

    n1 = u_t - u_xx - du
    n2 = v_t - p.d * v_xx - dv
    return n1, n2
