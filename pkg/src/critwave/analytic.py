"""Closed-form building blocks: heat-kernel solutions, KPP wave profiles, weights.

Everything here is evaluable at arbitrary (t, x) and differentiable in closed
form, which is what the envelope residual scans in :mod:`critwave.bounds`
rely on.  The error-function formulas are rearranged around erfcx so that
terms like exp(q^2 D t) * erfc(...) never overflow at t ~ 1e3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.special import erfc, erfcx

from .errors import NoMonotoneWaveError, StiffnessError, ValidationError

SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# heat kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpTailKernel:
    """Initial datum B exp(-q|x|) diffused with diffusivity D."""

    B: float
    q: float
    D: float = 1.0

    def __post_init__(self):
        if self.B <= 0:
            raise ValidationError(f"B must be > 0, got {self.B}")
        if self.q <= 0:
            raise ValidationError(f"q must be > 0, got {self.q}")
        if self.D <= 0:
            raise ValidationError(f"D must be > 0, got {self.D}")


@dataclass(frozen=True)
class IndicatorKernel:
    """Initial datum B * 1_(-w, w) diffused with unit diffusivity."""

    B: float
    half_width: float = 1.0

    def __post_init__(self):
        if self.B <= 0:
            raise ValidationError(f"B must be > 0, got {self.B}")
        if self.half_width <= 0:
            raise ValidationError(f"half_width must be > 0, got {self.half_width}")


def _halfline_term(t, x, q, D):
    """Stable evaluation of (1/2) exp(q^2 D t - q x) erfc((2 q D t - x) / (2 sqrt(D t)))."""
    sigma = np.sqrt(D * t)
    arg = (2.0 * q * D * t - x) / (2.0 * sigma)
    # For arg >= 0 write exp(a) erfc(arg) = exp(a - arg^2) erfcx(arg) with
    # a - arg^2 = -x^2 / (4 D t); for arg < 0 the exponent a itself is negative,
    # so the plain product cannot overflow.  Select the exponent first so the
    # unused branch is never exponentiated.
    neg = arg < 0.0
    expo = np.where(neg, q * q * D * t - q * x, -(x * x) / (4.0 * D * t))
    factor = np.where(neg, erfc(np.minimum(arg, 0.0)), erfcx(np.maximum(arg, 0.0)))
    return 0.5 * np.exp(expo) * factor


def exp_tail_heat(t, x, kernel: ExpTailKernel):
    """Exact heat solution from B exp(-q|x|) at time t >= 0."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t must be >= 0")
    B, q, D = kernel.B, kernel.q, kernel.D
    with np.errstate(divide="ignore", invalid="ignore"):
        val = B * (_halfline_term(t, x, q, D) + _halfline_term(t, -x, q, D))
    initial = B * np.exp(-q * np.abs(x))
    out = np.where(t > 0.0, val, initial)
    return out if out.ndim else float(out)


def exp_tail_heat_dt(t, x, kernel: ExpTailKernel):
    """Closed-form time derivative of exp_tail_heat (t > 0)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(t <= 0):
        raise ValidationError("time derivative requires t > 0")
    B, q, D = kernel.B, kernel.q, kernel.D
    s = exp_tail_heat(t, x, kernel)
    gauss = np.exp(-(x * x) / (4.0 * D * t))
    out = q * q * D * s - B * q * D * gauss / np.sqrt(math.pi * D * t)
    return out if out.ndim else float(out)


def indicator_heat(t, x, kernel: IndicatorKernel):
    """Exact heat solution from B * 1_(-w, w) at time t >= 0 (unit diffusivity).

    Written as a difference of complementary error functions of |x| so the
    deep tail does not cancel catastrophically (erf saturates at 1 there).
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t must be >= 0")
    B, w = kernel.B, kernel.half_width
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        root = 2.0 * np.sqrt(np.where(t > 0, t, 1.0))
        val = 0.5 * B * (erfc((ax - w) / root) - erfc((ax + w) / root))
    # at t = 0 return the t -> 0+ limit, which takes the half value at the jump
    initial = np.where(ax < w, B, np.where(ax == w, 0.5 * B, 0.0))
    out = np.where(t > 0.0, val, initial)
    return out if out.ndim else float(out)


def indicator_heat_dt(t, x, kernel: IndicatorKernel):
    """Closed-form time derivative of indicator_heat (t > 0)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(t <= 0):
        raise ValidationError("time derivative requires t > 0")
    B, w = kernel.B, kernel.half_width
    pref = B / (4.0 * SQRT_PI * t**1.5)
    out = pref * ((x - w) * np.exp(-((x - w) ** 2) / (4.0 * t))
                  - (x + w) * np.exp(-((x + w) ** 2) / (4.0 * t)))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# slowly decaying weight
# ---------------------------------------------------------------------------

def g_weight(t, delta: float):
    """Weight exp(1 / (delta (1+t)^delta)): strictly decreasing to 1."""
    if delta <= 0:
        raise ValidationError(f"delta must be > 0, got {delta}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t must be >= 0")
    out = np.exp(1.0 / (delta * (1.0 + t) ** delta))
    return out if out.ndim else float(out)


def g_weight_dt(t, delta: float):
    """Time derivative of g_weight: g'(t) = -g(t) (1+t)^{-(1+delta)}."""
    g = g_weight(t, delta)
    t = np.asarray(t, dtype=float)
    out = -g * (1.0 + t) ** (-(1.0 + delta))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WeightG:
    """Weight parameter record; the envelope constructions need delta in (0, 1/2)."""

    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise ValidationError(f"delta must lie in (0, 1/2), got {self.delta}")

    def value(self, t):
        return g_weight(t, self.delta)

    def derivative(self, t):
        return g_weight_dt(t, self.delta)


# ---------------------------------------------------------------------------
# KPP traveling-wave profiles
# ---------------------------------------------------------------------------

def kpp_decay_rate(d: float, r_eff: float, c: float) -> float:
    """Decay rate of 1 - V at the back of a KPP wave.

    Positive root of d L^2 + c L - r_eff = 0, from the linearization of the
    profile equation at V = 1.
    """
    if d <= 0 or r_eff <= 0 or c <= 0:
        raise ValidationError("d, r_eff, c must all be > 0")
    return (-c + math.sqrt(c * c + 4.0 * d * r_eff)) / (2.0 * d)


@dataclass(frozen=True, eq=False)
class KppWave:
    """Monotone traveling-wave profile of d V'' + c V' + r_eff V (1 - V) = 0.

    Normalized so V(0) = 1/2, with limits 1 at -inf and 0 at +inf.  The
    profile is stored on a grid dense near the front and sparse in the
    tails; evaluation between samples uses monotone cubic interpolation and
    the tails are continued exponentially.
    """

    d: float
    r_eff: float
    c: float
    xi: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    Vp: np.ndarray = field(repr=False)
    lam: float
    M: float
    _interp_V: PchipInterpolator = field(repr=False, compare=False)
    _interp_Vp: PchipInterpolator = field(repr=False, compare=False)

    def value(self, xi):
        xi = np.asarray(xi, dtype=float)
        left = 1.0 - (1.0 - self.V[0]) * np.exp(self.lam * (np.minimum(xi, self.xi[0]) - self.xi[0]))
        mu_end = -self.Vp[-1] / max(self.V[-1], 1e-300)
        right = self.V[-1] * np.exp(-mu_end * (np.maximum(xi, self.xi[-1]) - self.xi[-1]))
        mid = self._interp_V(np.clip(xi, self.xi[0], self.xi[-1]))
        out = np.where(xi < self.xi[0], left, np.where(xi > self.xi[-1], right, mid))
        return out if out.ndim else float(out)

    def derivative(self, xi):
        xi = np.asarray(xi, dtype=float)
        left = -(1.0 - self.V[0]) * self.lam * np.exp(self.lam * (np.minimum(xi, self.xi[0]) - self.xi[0]))
        mu_end = -self.Vp[-1] / max(self.V[-1], 1e-300)
        right = self.Vp[-1] * np.exp(-mu_end * (np.maximum(xi, self.xi[-1]) - self.xi[-1]))
        mid = self._interp_Vp(np.clip(xi, self.xi[0], self.xi[-1]))
        out = np.where(xi < self.xi[0], left, np.where(xi > self.xi[-1], right, mid))
        return out if out.ndim else float(out)

    def second_derivative(self, xi):
        """V'' recovered from the profile equation (exact given V, V')."""
        V = self.value(xi)
        Vp = self.derivative(xi)
        return -(self.c * Vp + self.r_eff * V * (1.0 - V)) / self.d


def kpp_profile(d: float, r_eff: float, c: float,
                tail_value: float = 1e-8,
                seed_amplitude: float = 1e-9,
                front_step: float = 2e-3,
                tail_step: float = 2e-2) -> KppWave:
    """Compute the monotone KPP wave of speed c by shooting off V = 1.

    Requires c >= 2 sqrt(d r_eff); below that threshold the profile would
    oscillate around 0 and NoMonotoneWaveError is raised.
    """
    if d <= 0 or r_eff <= 0:
        raise ValidationError("d and r_eff must be > 0")
    c_min = 2.0 * math.sqrt(d * r_eff)
    if c < c_min * (1.0 - 1e-12):
        raise NoMonotoneWaveError(
            f"no monotone wave at speed {c:.6g} < minimal speed {c_min:.6g}"
        )
    c = max(c, c_min)
    lam = kpp_decay_rate(d, r_eff, c)

    def rhs(_xi, y):
        V, W = y
        return (W, -(c * W + r_eff * V * (1.0 - V)) / d)

    def reached_tail(_xi, y):
        return y[0] - tail_value
    reached_tail.terminal = True
    reached_tail.direction = -1

    # decay rate at the front (double root c/2d at the minimal speed)
    mu = c / (2.0 * d)
    span = 1.5 * (math.log(1.0 / seed_amplitude) / lam + (math.log(1.0 / tail_value) + 10.0) / mu) + 50.0
    y0 = (1.0 - seed_amplitude, -lam * seed_amplitude)
    sol = solve_ivp(rhs, (0.0, span), y0, method="RK45", rtol=1e-10, atol=1e-13,
                    events=reached_tail, dense_output=True)
    if not sol.success:
        raise StiffnessError(f"profile integration failed: {sol.message}")
    if sol.status != 1:
        raise NoMonotoneWaveError(
            f"profile did not reach the leading tail within span {span:.1f}; speed {c:.6g} too close to oscillatory regime"
        )
    xi_end = float(sol.t_events[0][0])

    # two-level sampling: dense where the profile is away from both limits
    dense = sol.sol
    probe = np.linspace(0.0, xi_end, 4097)
    V_probe = dense(probe)[0]
    inner = np.abs(V_probe - 0.5) < 0.5 - 1e-4  # min(V, 1-V) > 1e-4
    if inner.any():
        xi_lo = probe[inner][0]
        xi_hi = probe[inner][-1]
    else:
        xi_lo, xi_hi = 0.0, xi_end
    pieces = [np.arange(0.0, xi_lo, tail_step),
              np.arange(xi_lo, xi_hi, front_step),
              np.arange(xi_hi, xi_end, tail_step),
              np.array([xi_end])]
    xi = np.unique(np.concatenate(pieces))
    V, Vp = dense(xi)

    # enforce strict monotonicity; integration jitter only shows up at tail scale
    keep = np.concatenate(([True], np.diff(V) < 0.0))
    xi, V, Vp = xi[keep], V[keep], Vp[keep]

    # anchor V(0) = 1/2 at the interpolated half-level crossing
    i = int(np.searchsorted(-V, -0.5))
    frac = (V[i - 1] - 0.5) / (V[i - 1] - V[i])
    xi_half = xi[i - 1] + frac * (xi[i] - xi[i - 1])
    xi = xi - xi_half

    # back-tail amplitude of 1 - V ~ M exp(lam xi), fitted where linear in logs
    tail = (1.0 - V > 1e-7) & (1.0 - V < 1e-4)
    if np.count_nonzero(tail) >= 4:
        coeffs = np.polyfit(xi[tail], np.log(1.0 - V[tail]), 1)
        M = float(np.exp(coeffs[1]))
    else:
        M = float((1.0 - V[0]) * np.exp(-lam * xi[0]))

    return KppWave(
        d=d, r_eff=r_eff, c=c, xi=xi, V=V, Vp=Vp, lam=lam, M=M,
        _interp_V=PchipInterpolator(xi, V, extrapolate=False),
        _interp_Vp=PchipInterpolator(xi, Vp, extrapolate=False),
    )
