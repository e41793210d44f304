"""Time integration of the Cauchy problem on an auto-sized symmetric domain.

Scheme: Strang splitting with a Heun (RK2) reaction half-step on either side
of a Crank-Nicolson diffusion step, solved tridiagonally per species.  The
enforced stability rule is the reaction bound dt <= 0.2 / max(1, r); it is
independent of dx so that long runs (t ~ 1e3) stay affordable.  The shipped
presets additionally keep dt <= dx^2 / max(1, d), which makes the
Crank-Nicolson update a convex combination of neighbor values: fields then
stay inside [0, 1] to machine precision even for indicator initial data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .core import (BOUNDS_SLACK, CompetitionParams, FieldState, Grid1D,
                   reaction_rhs, wave_speeds)
from .errors import (ConfigError, DomainTooSmallError, NumericalBlowupError,
                     ValidationError)

BOUNDARY_KINDS = ("no-flux", "absorbing")


@dataclass(frozen=True)
class SolverConfig:
    """Run controls: step sizes, horizon, boundary treatment, storage strides.

    observer_stride defaults to snapshot_stride; set it smaller to record
    scalar series (front positions, center values) at a finer cadence than
    full field snapshots.  reaction=False freezes the reaction terms, which
    turns the run into two decoupled heat equations for oracle comparisons.
    """

    dt: float = 0.05
    t_end: float = 100.0
    dx: float = 0.25
    boundary: str = "no-flux"
    snapshot_stride: int = 100
    observer_stride: Optional[int] = None
    domain_margin: float = 20.0
    x_max: Optional[float] = None
    reaction: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError(f"dt must be > 0, got {self.dt}")
        if self.t_end <= 0:
            raise ValidationError(f"t_end must be > 0, got {self.t_end}")
        if self.dx <= 0:
            raise ValidationError(f"dx must be > 0, got {self.dx}")
        if self.boundary not in BOUNDARY_KINDS:
            raise ValidationError(f"boundary must be one of {BOUNDARY_KINDS}, got {self.boundary!r}")
        if self.snapshot_stride < 1:
            raise ValidationError(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")
        if self.observer_stride is not None and self.observer_stride < 1:
            raise ValidationError(f"observer_stride must be >= 1, got {self.observer_stride}")
        if self.domain_margin < 0:
            raise ValidationError(f"domain_margin must be >= 0, got {self.domain_margin}")
        if self.x_max is not None and self.x_max <= 0:
            raise ValidationError(f"x_max must be > 0, got {self.x_max}")


def stability_limit(p: CompetitionParams) -> float:
    """Largest admissible dt for the explicit reaction step."""
    return 0.2 / max(1.0, p.r)


def default_dt(p: CompetitionParams, dx: float) -> float:
    """Preset dt: reaction bound, further capped so diffusion stays monotone."""
    return min(stability_limit(p), dx * dx / max(1.0, p.d))


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    """One species' initial profile: indicator sum, exponential tail or samples."""

    kind: str
    intervals: tuple = ()
    height: float = 1.0
    B: float = 0.0
    q: float = 0.0
    x_ref: Optional[np.ndarray] = field(default=None, repr=False)
    values: Optional[np.ndarray] = field(default=None, repr=False)

    @staticmethod
    def indicator(intervals=((-1.0, 1.0),), height: float = 1.0) -> "FieldSpec":
        intervals = tuple((float(a), float(b)) for a, b in intervals)
        for a, b in intervals:
            if not a < b:
                raise ValidationError(f"indicator interval must have a < b, got ({a}, {b})")
        if not 0.0 <= height <= 1.0:
            raise ValidationError(f"indicator height must lie in [0, 1], got {height}")
        return FieldSpec(kind="indicator", intervals=intervals, height=height)

    @staticmethod
    def zero() -> "FieldSpec":
        return FieldSpec.indicator(intervals=(), height=0.0)

    @staticmethod
    def exp_tail(B: float, q: float) -> "FieldSpec":
        if not 0.0 < B <= 1.0:
            raise ValidationError(f"exp_tail amplitude must lie in (0, 1], got {B}")
        if q <= 0:
            raise ValidationError(f"exp_tail rate must be > 0, got {q}")
        return FieldSpec(kind="exp_tail", B=B, q=q)

    @staticmethod
    def samples(x_ref, values) -> "FieldSpec":
        x_ref = np.asarray(x_ref, dtype=float)
        values = np.asarray(values, dtype=float)
        if x_ref.ndim != 1 or x_ref.shape != values.shape or x_ref.size < 2:
            raise ValidationError("samples need matching 1-d x and value arrays (>= 2 points)")
        if np.any(np.diff(x_ref) <= 0):
            raise ValidationError("sample positions must be strictly increasing")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValidationError("sample values must lie in [0, 1]")
        return FieldSpec(kind="samples", x_ref=x_ref, values=values)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "indicator":
            # half-value convention at the jumps keeps the sampled mass exact
            out = np.zeros_like(x)
            for a, b in self.intervals:
                out[(x > a) & (x < b)] = self.height
                out[np.isclose(x, a, rtol=0.0, atol=1e-12)] = 0.5 * self.height
                out[np.isclose(x, b, rtol=0.0, atol=1e-12)] = 0.5 * self.height
            return out
        if self.kind == "exp_tail":
            return self.B * np.exp(-self.q * np.abs(x))
        if self.kind == "samples":
            return np.interp(x, self.x_ref, self.values, left=0.0, right=0.0)
        raise ValidationError(f"unknown initial-data kind {self.kind!r}")

    def support_radius(self) -> float:
        if self.kind == "indicator":
            return max((max(abs(a), abs(b)) for a, b in self.intervals), default=0.0)
        if self.kind == "samples":
            nz = self.values > 0
            return float(np.abs(self.x_ref[nz]).max()) if nz.any() else 0.0
        # exponential tails have no compact support; cover a few e-foldings
        return 40.0 / self.q if self.q > 0 else 0.0


@dataclass(frozen=True)
class InitialData:
    """Initial profiles for u and v (independent specs)."""

    u: FieldSpec
    v: FieldSpec

    @staticmethod
    def default() -> "InitialData":
        return InitialData(u=FieldSpec.indicator(), v=FieldSpec.indicator())


# ---------------------------------------------------------------------------
# trace
# ---------------------------------------------------------------------------

@dataclass
class SimulationTrace:
    """Time-ordered snapshots plus scalar observer series for one run."""

    params: CompetitionParams
    config: SolverConfig
    grid: Grid1D
    snapshots: list
    series: dict

    def __post_init__(self):
        times = [s.t for s in self.snapshots]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValidationError("snapshot times must be strictly increasing")
        if times and times[0] != 0.0:
            raise ValidationError("first snapshot must be the initial data at t = 0")

    def snapshot_at(self, t: float) -> FieldState:
        """Snapshot closest to time t."""
        times = np.array([s.t for s in self.snapshots])
        return self.snapshots[int(np.argmin(np.abs(times - t)))]


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

class _Diffuser:
    """Crank-Nicolson step for one diffusivity on a fixed grid."""

    def __init__(self, n: int, dx: float, dt: float, D: float, boundary: str):
        self.n, self.dx, self.dt, self.D, self.boundary = n, dx, dt, D, boundary
        lam = 0.5 * dt * D / dx**2
        self.lam = lam
        ab = np.zeros((3, n))
        ab[1, :] = 1.0 + 2.0 * lam
        ab[0, 1:] = -lam
        ab[2, :-1] = -lam
        if boundary == "no-flux":
            # mirror ghost node: u_{-1} = u_1
            ab[0, 1] = -2.0 * lam
            ab[2, -2] = -2.0 * lam
        else:  # absorbing: pin endpoints to zero
            ab[1, 0] = ab[1, -1] = 1.0
            ab[0, 1] = ab[2, -2] = 0.0
        self.ab = ab

    def explicit_half(self, u: np.ndarray) -> np.ndarray:
        lam = self.lam
        rhs = u.copy()
        rhs[1:-1] += lam * (u[2:] - 2.0 * u[1:-1] + u[:-2])
        if self.boundary == "no-flux":
            rhs[0] += 2.0 * lam * (u[1] - u[0])
            rhs[-1] += 2.0 * lam * (u[-2] - u[-1])
        else:
            rhs[0] = 0.0
            rhs[-1] = 0.0
        return rhs

    def step(self, u: np.ndarray) -> np.ndarray:
        return solve_banded((1, 1), self.ab, self.explicit_half(u), check_finite=False)


class _Stepper:
    """One full Strang step: half reaction, CN diffusion, half reaction."""

    def __init__(self, p: CompetitionParams, grid: Grid1D, cfg: SolverConfig):
        if cfg.dt > stability_limit(p) * (1.0 + 1e-12):
            raise ConfigError(
                f"dt={cfg.dt} violates the stability rule dt <= 0.2/max(1, r) = {stability_limit(p):.6g}"
            )
        self.p = p
        self.cfg = cfg
        self.diff_u = _Diffuser(grid.n, grid.dx, cfg.dt, 1.0, cfg.boundary)
        self.diff_v = _Diffuser(grid.n, grid.dx, cfg.dt, p.d, cfg.boundary)

    def _react_half(self, u, v):
        h = 0.5 * self.cfg.dt
        k1u, k1v = reaction_rhs(u, v, self.p)
        k2u, k2v = reaction_rhs(u + h * k1u, v + h * k1v, self.p)
        return u + 0.5 * h * (k1u + k2u), v + 0.5 * h * (k1v + k2v)

    def advance(self, u, v):
        if self.cfg.reaction:
            u, v = self._react_half(u, v)
        u = self.diff_u.step(u)
        v = self.diff_v.step(v)
        if self.cfg.reaction:
            u, v = self._react_half(u, v)
        return u, v


def _check_fields(u, v, t):
    for name, arr in (("u", u), ("v", v)):
        if not np.all(np.isfinite(arr)):
            raise NumericalBlowupError(f"{name} became non-finite at t={t:.6g}", t=t)
        lo, hi = arr.min(), arr.max()
        if lo < -BOUNDS_SLACK or hi > 1.0 + BOUNDS_SLACK:
            raise NumericalBlowupError(
                f"{name} left [0, 1] beyond the clamping tolerance at t={t:.6g} "
                f"(min={lo:.3e}, max={hi:.3e})", t=t)
    return np.clip(u, 0.0, 1.0), np.clip(v, 0.0, 1.0)


def step(state: FieldState, p: CompetitionParams, cfg: SolverConfig) -> FieldState:
    """Advance a single snapshot by one dt (one-off; runs use the loop in run())."""
    stepper = _Stepper(p, state.grid, cfg)
    u, v = stepper.advance(state.u, state.v)
    t_new = state.t + cfg.dt
    u, v = _check_fields(u, v, t_new)
    return FieldState(t=t_new, grid=state.grid, u=u, v=v)


# ---------------------------------------------------------------------------
# observers
# ---------------------------------------------------------------------------

def default_observers() -> dict:
    return {
        "sup_u": lambda s: float(s.u.max()),
        "sup_v": lambda s: float(s.v.max()),
        "u_center": lambda s: float(s.u[s.grid.n // 2]),
        "v_center": lambda s: float(s.v[s.grid.n // 2]),
    }


def front_observer(species: str, level: float, side: str = "right") -> Callable[[FieldState], float]:
    """Observer returning the outermost level crossing of one species (NaN if none)."""
    from .diagnostics import level_set

    def _obs(state: FieldState) -> float:
        crossings = level_set(state, species, level)
        if crossings.size == 0:
            return math.nan
        return float(crossings.max() if side == "right" else crossings.min())

    return _obs


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def build_grid(p: CompetitionParams, init: InitialData, cfg: SolverConfig) -> Grid1D:
    """Symmetric grid sized so fronts cannot reach the boundary before t_end.

    The fastest front speed gets a 2% allowance on top of max(c_u, c_v):
    the discrete pulled front travels slightly faster than the continuum
    speed and would otherwise eat a fixed margin on t ~ 1e3 horizons.
    """
    c_v = wave_speeds(p).c_v
    need = 1.02 * max(2.0, c_v) * cfg.t_end + cfg.domain_margin
    need = max(need, init.u.support_radius() + cfg.domain_margin,
               init.v.support_radius() + cfg.domain_margin, 10.0)
    x_max = cfg.x_max if cfg.x_max is not None else need
    half = int(math.ceil(x_max / cfg.dx))
    return Grid1D(x_min=-half * cfg.dx, x_max=half * cfg.dx, n=2 * half + 1)


def run(p: CompetitionParams, init: InitialData, cfg: SolverConfig,
        observers: Optional[dict] = None) -> SimulationTrace:
    """Integrate the Cauchy problem and collect snapshots plus observer series.

    Deterministic: identical inputs produce bit-identical traces.  Raises
    DomainTooSmallError if a noticeable amount of either species gets within
    10 dx of the boundary.
    """
    grid = build_grid(p, init, cfg)
    x = grid.x
    u = np.clip(init.u.evaluate(x), 0.0, 1.0)
    v = np.clip(init.v.evaluate(x), 0.0, 1.0)

    n_steps = int(round(cfg.t_end / cfg.dt))
    if abs(n_steps * cfg.dt - cfg.t_end) > 1e-9 * cfg.t_end:
        n_steps = int(math.ceil(cfg.t_end / cfg.dt))
        cfg = replace(cfg, dt=cfg.t_end / n_steps)
    stepper = _Stepper(p, grid, cfg)

    obs = dict(default_observers())
    if observers:
        obs.update(observers)
    obs_stride = cfg.observer_stride or cfg.snapshot_stride
    series = {name: ([], []) for name in obs}

    def record_observers(state):
        for name, fn in obs.items():
            times, vals = series[name]
            times.append(state.t)
            vals.append(fn(state))

    edge_base = max(u[:10].max(), u[-10:].max(), v[:10].max(), v[-10:].max())

    def check_boundary(uu, vv, t):
        # no-flux runs emulate the whole line, so fronts must never get near
        # the walls; absorbing runs interact with them on purpose
        if cfg.boundary != "no-flux":
            return
        edge = max(uu[:10].max(), uu[-10:].max(), vv[:10].max(), vv[-10:].max())
        if edge > edge_base + 1e-3:
            raise DomainTooSmallError(
                f"front within 10 dx of the boundary at t={t:.6g}; enlarge x_max or domain_margin", t=t)

    state0 = FieldState(t=0.0, grid=grid, u=u, v=v)
    snapshots = [state0]
    record_observers(state0)

    u, v = state0.u, state0.v
    for k in range(1, n_steps + 1):
        u, v = stepper.advance(u, v)
        t = k * cfg.dt
        want_obs = (k % obs_stride == 0) or (k == n_steps)
        want_snap = (k % cfg.snapshot_stride == 0) or (k == n_steps)
        if want_obs or want_snap:
            u, v = _check_fields(u, v, t)
            check_boundary(u, v, t)
            state = FieldState(t=t, grid=grid, u=u, v=v)
            if want_obs:
                record_observers(state)
            if want_snap:
                snapshots.append(state)

    series = {name: (np.array(ts), np.array(vs)) for name, (ts, vs) in series.items()}
    return SimulationTrace(params=p, config=cfg, grid=grid, snapshots=snapshots, series=series)


def run_scalar_kpp(p: CompetitionParams, u0: FieldSpec, cfg: SolverConfig,
                   observers: Optional[dict] = None) -> SimulationTrace:
    """Run with the second species identically zero (decoupled KPP problem)."""
    return run(p, InitialData(u=u0, v=FieldSpec.zero()), cfg, observers)
