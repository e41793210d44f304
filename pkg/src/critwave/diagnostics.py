"""Quantitative front behavior: level sets, speeds, log shift, bump exponents.

All fits are plain least squares on series extracted from simulation traces;
synthetic fixtures recover their slopes exactly, so the regression layer adds
no tolerance of its own.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import KppWave
from .core import FieldState
from .errors import StructuralError, ValidationError

BUMP_FLOOR = 1e-14


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual_norm: float
    window: tuple

    def __post_init__(self):
        if not np.isfinite(self.residual_norm):
            raise ValidationError("fit residual must be finite")


@dataclass(frozen=True)
class FrontTrace:
    """Positions of one level crossing of one species over time."""

    species: str
    level: float
    side: str
    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValidationError(f"level must lie in (0, 1), got {self.level}")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("front times must be strictly increasing")
        if self.times.shape != self.positions.shape:
            raise ValidationError("times and positions must have matching shapes")

    def restricted(self, t_min: float, t_max: float) -> "FrontTrace":
        keep = (self.times >= t_min) & (self.times <= t_max) & np.isfinite(self.positions)
        return FrontTrace(self.species, self.level, self.side,
                          self.times[keep], self.positions[keep])


@dataclass(frozen=True)
class BumpTrace:
    """Center values u(t, 0) and 1 - v(t, 0) past the transient."""

    times: np.ndarray
    u_center: np.ndarray
    one_minus_v_center: np.ndarray
    cone_slope: float = 0.1

    def __post_init__(self):
        for name in ("u_center", "one_minus_v_center"):
            arr = getattr(self, name)
            if arr.size and (arr.min() < -1e-12 or arr.max() > 1.0 + 1e-12):
                raise ValidationError(f"{name} must lie in [0, 1]")


# ---------------------------------------------------------------------------
# level sets and traces
# ---------------------------------------------------------------------------

def level_set(state: FieldState, species: str, m: float) -> np.ndarray:
    """All crossings of field = m, located by linear interpolation.

    Returns an array of positions (possibly empty); the rightmost entry is
    the front position.
    """
    if not 0.0 < m < 1.0:
        raise ValidationError(f"level must lie in (0, 1), got {m}")
    if species not in ("u", "v"):
        raise ValidationError(f"species must be 'u' or 'v', got {species!r}")
    f = getattr(state, species) - m
    x = state.grid.x
    crossings = []
    exact = np.flatnonzero(f == 0.0)
    crossings.extend(x[exact])
    idx = np.flatnonzero(f[:-1] * f[1:] < 0.0)
    frac = f[idx] / (f[idx] - f[idx + 1])
    crossings.extend(x[idx] + frac * (x[idx + 1] - x[idx]))
    return np.sort(np.array(crossings))


def front_trace(trace, species: str, level: float, side: str = "right") -> FrontTrace:
    """Front positions over time, preferring the recorded observer series."""
    key = f"front_{species}_{level}_{side}"
    if key in trace.series:
        times, positions = trace.series[key]
    else:
        times, positions = [], []
        for snap in trace.snapshots:
            crossings = level_set(snap, species, level)
            times.append(snap.t)
            if crossings.size:
                positions.append(crossings.max() if side == "right" else crossings.min())
            else:
                positions.append(math.nan)
        times, positions = np.array(times), np.array(positions)
    keep = np.isfinite(positions)
    return FrontTrace(species=species, level=level, side=side,
                      times=times[keep], positions=positions[keep])


def bump_trace(trace, onset: float = 50.0) -> BumpTrace:
    """Center series of a trace, truncated to t >= onset."""
    tu, u0 = trace.series["u_center"]
    tv, v0 = trace.series["v_center"]
    if tu.shape != tv.shape or np.any(tu != tv):
        raise StructuralError("center observers recorded on different time grids")
    keep = tu >= onset
    return BumpTrace(times=tu[keep], u_center=u0[keep],
                     one_minus_v_center=1.0 - v0[keep])


# ---------------------------------------------------------------------------
# fits
# ---------------------------------------------------------------------------

def _least_squares(x: np.ndarray, y: np.ndarray, window) -> FitResult:
    coeffs, residuals, *_ = np.polyfit(x, y, 1, full=True)
    rnorm = float(np.sqrt(residuals[0])) if residuals.size else 0.0
    return FitResult(slope=float(coeffs[0]), intercept=float(coeffs[1]),
                     residual_norm=rnorm, window=tuple(window))


def fit_speed(front: FrontTrace, window) -> FitResult:
    """Least-squares front speed (position against time) over the window."""
    t_min, t_max = window
    sub = front.restricted(t_min, t_max)
    if sub.times.size < 10:
        raise StructuralError(
            f"need at least 10 front points in window {window}, got {sub.times.size}")
    return _least_squares(sub.times, sub.positions, window)


def fit_front_asymptotics(front: FrontTrace, window) -> dict:
    """Simultaneous fit of position ~ c t + A ln t + b over the window.

    Pulled fronts lag their asymptotic speed by a logarithmic term, and the
    single-predictor fits are mutually biased: an error dc in the speed
    leaks into the ln t slope amplified by Cov(t, ln t)/Var(ln t) (several
    hundred on a decade-wide window).  The joint fit removes that leak; its
    speed is exactly the value for which fit_log_shift returns the joint
    logarithmic slope.
    """
    t_min, t_max = window
    if t_min <= 0 or t_max / t_min < 5.0:
        raise StructuralError(
            f"asymptotics window must satisfy t_max/t_min >= 5, got {window}")
    sub = front.restricted(t_min, t_max)
    if sub.times.size < 10:
        raise StructuralError(
            f"need at least 10 front points in window {window}, got {sub.times.size}")
    t = sub.times
    design = np.vstack([t, np.log(t), np.ones_like(t)]).T
    coef, residuals, *_ = np.linalg.lstsq(design, sub.positions, rcond=None)
    rnorm = float(np.sqrt(residuals[0])) if residuals.size else 0.0
    return {"speed": float(coef[0]), "log_slope": float(coef[1]),
            "intercept": float(coef[2]), "residual_norm": rnorm,
            "window": tuple(window)}


def fit_log_shift(front: FrontTrace, c: float, window) -> FitResult:
    """Slope of (position - c t) against ln t: the logarithmic front delay.

    The window must span at least a factor 5 in time so ln t varies enough
    to separate the logarithmic term from the constant.
    """
    t_min, t_max = window
    if t_min <= 0 or t_max / t_min < 5.0:
        raise StructuralError(
            f"log-shift window must satisfy t_max/t_min >= 5, got {window}")
    sub = front.restricted(t_min, t_max)
    if sub.times.size < 10:
        raise StructuralError(
            f"need at least 10 front points in window {window}, got {sub.times.size}")
    return _least_squares(np.log(sub.times), sub.positions - c * sub.times, window)


# ---------------------------------------------------------------------------
# bump metrics
# ---------------------------------------------------------------------------

def bump_metrics(bump: BumpTrace, d: float) -> dict:
    """Log-log central-decay slopes and fitted envelope constants.

    Values below BUMP_FLOOR are dropped (with a warning) before taking logs.
    Returns slopes for u(t,0) and 1-v(t,0), the constants bracketing
    u(t,0) between C_low t^{-1/2} and C_high t^{-k*}, and the max/min ratio
    of u(t,0) sqrt(t) over the window.
    """
    k_star = min(1.0 / (2.0 * d), d / 2.0)
    out = {"k_star": k_star}
    for label, values in (("u0", bump.u_center), ("one_minus_v0", bump.one_minus_v_center)):
        keep = values > BUMP_FLOOR
        if not np.all(keep):
            warnings.warn(f"bump series {label} truncated below {BUMP_FLOOR:g}")
        t, y = bump.times[keep], values[keep]
        if t.size < 10:
            raise StructuralError(f"bump series {label} too short after truncation")
        fit = _least_squares(np.log(t), np.log(y), (t[0], t[-1]))
        out[f"slope_{label}"] = fit.slope
    keep = bump.u_center > BUMP_FLOOR
    t, u0 = bump.times[keep], bump.u_center[keep]
    scaled = u0 * np.sqrt(t)
    out["C_low"] = float(scaled.min())
    out["C_high"] = float((u0 * t**k_star).max())
    out["sqrt_band_ratio"] = float(scaled.max() / scaled.min())
    return out


def gaussian_factor_fit(trace, species: str = "u", window: Optional[tuple] = None) -> dict:
    """Spatial Gaussian-factor exponent of the central bump.

    For each snapshot in the window, regress ln f(t,x) - ln f(t,0) against
    -x^2/(4t) over |x| <= 2 sqrt(t) (through the origin).  The asymptotic
    envelopes put the slope between 1/max(1,d) and 1.
    """
    slopes = []
    for snap in trace.snapshots:
        if snap.t <= 0:
            continue
        if window and not (window[0] <= snap.t <= window[1]):
            continue
        f = snap.u if species == "u" else 1.0 - snap.v
        x = snap.grid.x
        center = f[snap.grid.n // 2]
        if center <= BUMP_FLOOR:
            continue
        mask = (np.abs(x) <= 2.0 * math.sqrt(snap.t)) & (f > BUMP_FLOOR) & (np.abs(x) > 0)
        if np.count_nonzero(mask) < 8:
            continue
        z = -x[mask] ** 2 / (4.0 * snap.t)
        y = np.log(f[mask] / center)
        slopes.append(float(np.dot(z, y) / np.dot(z, z)))
    if not slopes:
        raise StructuralError("no usable snapshots for the Gaussian-factor fit")
    slopes = np.array(slopes)
    return {"slope_median": float(np.median(slopes)),
            "slope_min": float(slopes.min()),
            "slope_max": float(slopes.max()),
            "n_snapshots": int(slopes.size)}


# ---------------------------------------------------------------------------
# profile comparison
# ---------------------------------------------------------------------------

def _refine_crossing(x: np.ndarray, f: np.ndarray, x0: float, m: float) -> float:
    """Sharpen a linearly interpolated level crossing with a local cubic root.

    The sampled field is smooth through the front, so a monotone cubic on a
    few neighboring samples locates the crossing to O(dx^4) instead of the
    O(dx^2) of linear interpolation.
    """
    from scipy.interpolate import PchipInterpolator
    from scipy.optimize import brentq

    i = int(np.clip(np.searchsorted(x, x0), 2, x.size - 3))
    sl = slice(max(0, i - 3), min(x.size, i + 3))
    local = PchipInterpolator(x[sl], f[sl] - m, extrapolate=False)
    lo, hi = x[i - 1], x[i]
    if local(lo) * local(hi) > 0:
        return x0
    return float(brentq(local, lo, hi, xtol=1e-12))


def profile_distance(state: FieldState, wave: KppWave, species: str = "v") -> float:
    """Sup-norm distance on x >= 0 after anchoring the wave at the half level.

    The wave is shifted so its 1/2 level sits at the field's rightmost 1/2
    crossing; raises StructuralError when the field never crosses 1/2.
    """
    crossings = level_set(state, species, 0.5)
    if crossings.size == 0:
        raise StructuralError(f"species {species} has no 1/2-level front to anchor at")
    x = state.grid.x
    field = getattr(state, species)
    x_front = _refine_crossing(x, field, crossings.max(), 0.5)
    mask = x >= 0.0
    w = wave.value(x[mask] - x_front)
    return float(np.abs(field[mask] - w).max())


# ---------------------------------------------------------------------------
# replacement-front speed selection (strong-weak competition)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StrongWeakSpeeds:
    """Speed-selection data for the strong-weak regime a < 1 < b."""

    a: float
    d: float
    r: float
    c_nlp: Optional[float]
    c_llw_estimate: Optional[float]
    regime: Optional[str]
    selected: Optional[float]

    def f(self, c):
        """Decreasing map f(c) = c - sqrt(c^2 - 4(1-a)) + 2 sqrt(a) on c >= 2 sqrt(1-a)."""
        c = np.asarray(c, dtype=float)
        if np.any(c < 2.0 * math.sqrt(1.0 - self.a) - 1e-9):
            raise ValidationError(f"f is defined for c >= 2 sqrt(1-a) = {2*math.sqrt(1-self.a):.6g}")
        out = c - np.sqrt(np.maximum(c * c - 4.0 * (1.0 - self.a), 0.0)) + 2.0 * math.sqrt(self.a)
        return out if out.ndim else float(out)

    def f_inverse(self, y):
        """Inverse of f on its range (2 sqrt(a), 2(sqrt(1-a) + sqrt(a))]."""
        y = np.asarray(y, dtype=float)
        root_a = math.sqrt(self.a)
        lo, hi = 2.0 * root_a, 2.0 * (math.sqrt(1.0 - self.a) + root_a)
        if np.any(y <= lo) or np.any(y > hi + 1e-12):
            raise ValidationError(f"f_inverse needs values in ({lo:.6g}, {hi:.6g}]")
        z = y - 2.0 * root_a
        out = 0.5 * z + 2.0 * (1.0 - self.a) / z
        return out if out.ndim else float(out)


def strongweak_speeds(a: float, d: float, r: float,
                      c_llw_estimate: Optional[float] = None) -> StrongWeakSpeeds:
    """Evaluate the replacement-speed selection for the strong-weak system.

    c_nlp = sqrt(rd) - sqrt(a) + (1-a)/(sqrt(rd) - sqrt(a)) when the fast
    species satisfies 2 sqrt(rd) > 2; given a measured c_llw_estimate the
    selected speed is c_nlp when 2 < 2 sqrt(rd) < f(c_llw_estimate)
    (acceleration) and the estimate itself otherwise.
    """
    if not 0.0 < a < 1.0:
        raise ValidationError(f"a must lie in (0, 1), got {a}")
    if d <= 0 or r <= 0:
        raise ValidationError("d and r must be > 0")
    c_v = 2.0 * math.sqrt(r * d)
    root_a = math.sqrt(a)

    c_nlp = None
    if c_v > 2.0:
        c_nlp = math.sqrt(r * d) - root_a + (1.0 - a) / (math.sqrt(r * d) - root_a)

    regime = None
    selected = None
    if c_llw_estimate is not None:
        lo, hi = 2.0 * math.sqrt(1.0 - a), 2.0
        if not lo - 1e-9 <= c_llw_estimate <= hi + 1e-9:
            raise ValidationError(
                f"c_llw_estimate must lie in [2 sqrt(1-a), 2] = [{lo:.6g}, {hi:.6g}]")
        if r * d <= 1.0:
            raise ValidationError("regime selection requires d r > 1")
        probe = StrongWeakSpeeds(a, d, r, c_nlp, c_llw_estimate, None, None)
        if 2.0 < c_v < probe.f(c_llw_estimate):
            regime, selected = "acceleration", c_nlp
        else:
            regime, selected = "replacement", c_llw_estimate

    return StrongWeakSpeeds(a=a, d=d, r=r, c_nlp=c_nlp,
                            c_llw_estimate=c_llw_estimate,
                            regime=regime, selected=selected)
