"""Closed-form super/sub-solution envelopes and their numerical verification.

A super envelope is a pair (U, V) with N1[U, V] >= 0 and N2[U, V] <= 0 on an
expanding cone |x| < c1 t, t > T; the competitive comparison principle then
pins the true solution under U and over V there.  A sub envelope reverses
the signs on a wider cone |x| < c2 t.  Both are built from heat-kernel
solutions, KPP wave profiles and the slowly decaying weight g, so N1 and N2
are evaluated from analytic derivatives: the only numerical tolerance in the
scans is wave-profile interpolation, which is why the default eps stays at
1e-5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .analytic import (ExpTailKernel, IndicatorKernel, KppWave, exp_tail_heat,
                       exp_tail_heat_dt, g_weight, g_weight_dt, indicator_heat,
                       indicator_heat_dt, kpp_decay_rate, kpp_profile)
from .core import CompetitionParams
from .errors import DomainError, StructuralError, ValidationError

EPS_NUM = 1e-5
SQRT_4PI = math.sqrt(4.0 * math.pi)


@dataclass(frozen=True)
class ExpandingCone:
    """Space-time cone t > T, |x| < c_edge * t."""

    T: float
    c_edge: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValidationError(f"T_star must be > 0, got {self.T}")
        if self.c_edge <= 0:
            raise ValidationError(f"cone slope must be > 0, got {self.c_edge}")

    def contains(self, t, x) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return (t > self.T) & (np.abs(x) < self.c_edge * t)


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuperSolParams:
    """Constants of the super envelope; see default_super_params for a picker.

    Constraints (checked unless validate=False): 1/d < r1 < r,
    c_u < c1 < c_v_star = 2 sqrt(d r1), 0 < q < min(1, 1/d) with
    max(q c1 - q^2, q c1 - d q^2) < c1 - c_u, 0 < tau < lambda1 (c_v_star - c1),
    B1 > 0 and optionally q c1 - q^2 < mu.
    """

    d: float
    r: float
    r1: float
    c1: float
    q: float
    tau: float
    B1: float = 1.0
    T_star: float = 1.0
    mu: Optional[float] = None
    validate: bool = True

    @property
    def c_v_star(self) -> float:
        return 2.0 * math.sqrt(self.d * self.r1)

    @property
    def lambda1(self) -> float:
        return kpp_decay_rate(self.d, self.r1, self.c_v_star)

    def __post_init__(self):
        if self.d <= 0 or self.r <= 0:
            raise ValidationError("d and r must be > 0")
        if not self.validate:
            return
        if not 1.0 / self.d < self.r1 < self.r:
            raise ValidationError(f"r1 must lie in (1/d, r) = ({1.0/self.d:.6g}, {self.r:.6g}), got {self.r1}")
        if not 2.0 < self.c1 < self.c_v_star:
            raise ValidationError(f"c1 must lie in (c_u, c_v_star) = (2, {self.c_v_star:.6g}), got {self.c1}")
        if not 0.0 < self.q < min(1.0, 1.0 / self.d):
            raise ValidationError(f"q must be < min(1, 1/d) = {min(1.0, 1.0/self.d):.6g} (and > 0), got {self.q}")
        if max(self.q * self.c1 - self.q**2, self.q * self.c1 - self.d * self.q**2) >= self.c1 - 2.0:
            raise ValidationError(
                "q fails the tail condition max(q*c1 - q^2, q*c1 - d*q^2) < c1 - c_u")
        tau_max = self.lambda1 * (self.c_v_star - self.c1)
        if not 0.0 < self.tau < tau_max:
            raise ValidationError(f"tau must be < lambda1*(c_v_star - c1) = {tau_max:.6g} (and > 0), got {self.tau}")
        if self.B1 <= 0:
            raise ValidationError(f"B1 must be > 0, got {self.B1}")
        if self.T_star <= 0:
            raise ValidationError(f"T_star must be > 0, got {self.T_star}")
        if self.mu is not None and self.q * self.c1 - self.q**2 >= self.mu:
            raise ValidationError("q*c1 - q^2 must be < mu")


@dataclass(frozen=True)
class SubSolParams:
    """Constants of the sub envelope; see default_sub_params for a picker.

    Constraints: r2 > r, c_v < c2 < c_v_dstar = 2 sqrt(d r2),
    0 < delta < theta < 1/2, k = c2/2, gamma in (0, 1), B2 in (0, 1),
    zeta0 > 0.  B3 = gamma * B2.
    """

    d: float
    r: float
    r2: float
    c2: float
    delta: float
    theta: float
    gamma: float
    B2: float = 0.5
    zeta0: float = 20.0
    T_star: float = 1.0
    validate: bool = True

    @property
    def c_v_dstar(self) -> float:
        return 2.0 * math.sqrt(self.d * self.r2)

    @property
    def lambda2(self) -> float:
        return kpp_decay_rate(self.d, self.r2, self.c_v_dstar)

    @property
    def k(self) -> float:
        return self.c2 / 2.0

    @property
    def B3(self) -> float:
        return self.gamma * self.B2

    def __post_init__(self):
        if self.d <= 0 or self.r <= 0:
            raise ValidationError("d and r must be > 0")
        if not self.validate:
            return
        c_v = 2.0 * math.sqrt(self.d * self.r)
        if not self.r2 > self.r:
            raise ValidationError(f"r2 must be > r = {self.r}, got {self.r2}")
        if not c_v < self.c2 < self.c_v_dstar:
            raise ValidationError(f"c2 must lie in (c_v, c_v_dstar) = ({c_v:.6g}, {self.c_v_dstar:.6g}), got {self.c2}")
        if self.delta <= 0:
            raise ValidationError(f"delta must be > 0, got {self.delta}")
        if not self.delta < self.theta:
            raise ValidationError(f"delta must be < theta, got delta={self.delta}, theta={self.theta}")
        if not self.theta < 0.5:
            raise ValidationError(f"theta must be < 1/2, got {self.theta}")
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 < self.B2 < 1.0:
            raise ValidationError(f"B2 must lie in (0, 1), got {self.B2}")
        if self.zeta0 <= 0:
            raise ValidationError(f"zeta0 must be > 0, got {self.zeta0}")
        if self.T_star <= 0:
            raise ValidationError(f"T_star must be > 0, got {self.T_star}")


def default_super_params(p: CompetitionParams, T_star: float = 1.0,
                         B1: float = 1.0) -> SuperSolParams:
    """Midpoint picker keeping every strict inequality slack (requires d r > 1)."""
    if p.d * p.r <= 1.0:
        raise ValidationError("super envelope requires d*r > 1 so that (1/d, r) is nonempty")
    r1 = 0.5 * (1.0 / p.d + p.r)
    c_v_star = 2.0 * math.sqrt(p.d * r1)
    c1 = 0.5 * (2.0 + c_v_star)
    q = 0.9 * min(1.0, 1.0 / p.d, (c1 - 2.0) / c1)
    while max(q * c1 - q**2, q * c1 - p.d * q**2) >= c1 - 2.0 and q > 1e-12:
        q *= 0.7
    lam1 = kpp_decay_rate(p.d, r1, c_v_star)
    tau = 0.5 * lam1 * (c_v_star - c1)
    return SuperSolParams(d=p.d, r=p.r, r1=r1, c1=c1, q=q, tau=tau,
                          B1=B1, T_star=T_star)


def default_sub_params(p: CompetitionParams, T_star: float = 1.0,
                       B2: float = 0.5, zeta0: float = 20.0) -> SubSolParams:
    """Midpoint picker for the sub envelope (valid for any d, r > 0)."""
    r2 = 2.0 * p.r
    c_v = 2.0 * math.sqrt(p.d * p.r)
    c_v_dstar = 2.0 * math.sqrt(p.d * r2)
    c2 = 0.5 * (c_v + c_v_dstar)
    return SubSolParams(d=p.d, r=p.r, r2=r2, c2=c2, delta=0.1, theta=0.3,
                        gamma=0.01, B2=B2, zeta0=zeta0, T_star=T_star)


# ---------------------------------------------------------------------------
# envelopes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoundEnvelope:
    """A fully parameterized envelope, evaluable (with derivatives) anywhere."""

    kind: str  # "super" | "sub"
    p: CompetitionParams
    params: object
    wave: KppWave
    cone: ExpandingCone

    def __post_init__(self):
        expected = self.params.c_v_star if self.kind == "super" else self.params.c_v_dstar
        if abs(self.wave.c - expected) > 1e-9:
            raise StructuralError("wave speed does not match the envelope construction")

    def with_onset(self, T_star: float) -> "BoundEnvelope":
        return BoundEnvelope(kind=self.kind, p=self.p,
                             params=replace(self.params, T_star=T_star),
                             wave=self.wave,
                             cone=ExpandingCone(T=T_star, c_edge=self.cone.c_edge))

    # -- evaluation -------------------------------------------------------

    def evaluate(self, t, x):
        """(U, V) of the envelope; no cone check (scans manage their own domain)."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if self.kind == "super":
            U = self._super_prefactor(t) * exp_tail_heat(t, x, self._s_kernel())
            xi_p = x - self.params.c_v_star * t
            xi_m = -x - self.params.c_v_star * t
            V = self.wave.value(xi_p) + self.wave.value(xi_m) - 1.0 - U
        else:
            pr = self.params
            U = (g_weight(t, pr.delta) * indicator_heat(t, x, self._f_kernel())
                 - exp_tail_heat(t, x, self._h_kernel()))
            xi_p = x - pr.c_v_dstar * t - pr.zeta0
            xi_m = -x - pr.c_v_dstar * t - pr.zeta0
            V = (self.wave.value(xi_p) + self.wave.value(xi_m) - 1.0 - U
                 + t ** (-(1.0 + pr.theta)))
        return U, V

    def residuals(self, t, x):
        """(N1, N2) from analytic time and space derivatives of the closed forms."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        pr = self.params
        if self.kind == "super":
            ker = self._s_kernel()
            s = exp_tail_heat(t, x, ker)
            s_t = exp_tail_heat_dt(t, x, ker)
            A = self._super_prefactor(t)
            A_t = self._super_prefactor_dt(t)
            U = A * s
            U_t = A_t * s + A * s_t
            U_xx = A * s_t / ker.D
            c_w = pr.c_v_star
            xi_p, xi_m = x - c_w * t, -x - c_w * t
        else:
            fk, hk = self._f_kernel(), self._h_kernel()
            g = g_weight(t, pr.delta)
            g_t = g_weight_dt(t, pr.delta)
            f = indicator_heat(t, x, fk)
            f_t = indicator_heat_dt(t, x, fk)
            h = exp_tail_heat(t, x, hk)
            h_t = exp_tail_heat_dt(t, x, hk)
            U = g * f - h
            U_t = g_t * f + g * f_t - h_t
            U_xx = g * f_t - h_t  # both kernels diffuse with unit diffusivity
            c_w = pr.c_v_dstar
            xi_p, xi_m = x - c_w * t - pr.zeta0, -x - c_w * t - pr.zeta0

        Vw_p, Vw_m = self.wave.value(xi_p), self.wave.value(xi_m)
        Vp_p, Vp_m = self.wave.derivative(xi_p), self.wave.derivative(xi_m)
        Vpp_p, Vpp_m = self.wave.second_derivative(xi_p), self.wave.second_derivative(xi_m)

        V = Vw_p + Vw_m - 1.0 - U
        V_t = -c_w * (Vp_p + Vp_m) - U_t
        V_xx = Vpp_p + Vpp_m - U_xx
        if self.kind == "sub":
            V = V + t ** (-(1.0 + pr.theta))
            V_t = V_t - (1.0 + pr.theta) * t ** (-(2.0 + pr.theta))

        n1 = U_t - U_xx - U * (1.0 - U - V)
        n2 = V_t - self.p.d * V_xx - self.p.r * V * (1.0 - V - U)
        return n1, n2

    # -- construction helpers ----------------------------------------------

    def _s_kernel(self) -> ExpTailKernel:
        D = self.p.d if self.p.d >= 1.0 else 1.0
        return ExpTailKernel(B=self.params.B1, q=self.params.q, D=D)

    def _f_kernel(self) -> IndicatorKernel:
        return IndicatorKernel(B=self.params.B2, half_width=1.0)

    def _h_kernel(self) -> ExpTailKernel:
        return ExpTailKernel(B=self.params.B3, q=self.params.k, D=1.0)

    def _super_power(self) -> float:
        d = self.p.d
        return (d - 1.0) / (2.0 * d) if d >= 1.0 else (1.0 - d) / 2.0

    def _super_prefactor(self, t):
        pwr = self._super_power()
        return t**pwr * (1.0 - np.exp(-self.params.tau * t))

    def _super_prefactor_dt(self, t):
        pwr = self._super_power()
        tau = self.params.tau
        return (pwr * t ** (pwr - 1.0) * (1.0 - np.exp(-tau * t))
                + t**pwr * tau * np.exp(-tau * t))


def build_super_envelope(p: CompetitionParams, params: Optional[SuperSolParams] = None) -> BoundEnvelope:
    params = params if params is not None else default_super_params(p)
    if (params.d, params.r) != (p.d, p.r):
        raise StructuralError("envelope parameters built for different (d, r)")
    wave = kpp_profile(p.d, params.r1, params.c_v_star)
    return BoundEnvelope(kind="super", p=p, params=params, wave=wave,
                         cone=ExpandingCone(T=params.T_star, c_edge=params.c1))


def build_sub_envelope(p: CompetitionParams, params: Optional[SubSolParams] = None) -> BoundEnvelope:
    params = params if params is not None else default_sub_params(p)
    if (params.d, params.r) != (p.d, p.r):
        raise StructuralError("envelope parameters built for different (d, r)")
    wave = kpp_profile(p.d, params.r2, params.c_v_dstar)
    return BoundEnvelope(kind="sub", p=p, params=params, wave=wave,
                         cone=ExpandingCone(T=params.T_star, c_edge=params.c2))


def super_eval(t: float, x: float, env: BoundEnvelope):
    """Pointwise (U, V) of a super envelope; DomainError outside its cone."""
    if env.kind != "super":
        raise StructuralError("super_eval needs a super envelope")
    if not bool(env.cone.contains(t, x)):
        raise DomainError(f"(t={t}, x={x}) outside the cone t > {env.cone.T}, |x| < {env.cone.c_edge} t")
    U, V = env.evaluate(float(t), float(x))
    return float(U), float(V)


def sub_eval(t: float, x: float, env: BoundEnvelope):
    """Pointwise (U, V) of a sub envelope; DomainError outside its cone."""
    if env.kind != "sub":
        raise StructuralError("sub_eval needs a sub envelope")
    if not bool(env.cone.contains(t, x)):
        raise DomainError(f"(t={t}, x={x}) outside the cone t > {env.cone.T}, |x| < {env.cone.c_edge} t")
    U, V = env.evaluate(float(t), float(x))
    return float(U), float(V)


def super_eval_both_branches(t, x, params: SuperSolParams, p: CompetitionParams):
    """U of both prefactor branches (diffusivity min(d,1) vs max(d,1)); they agree at d = 1."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    out = []
    for pwr, D in (((1.0 - p.d) / 2.0, 1.0), ((p.d - 1.0) / (2.0 * p.d), p.d)):
        ker = ExpTailKernel(B=params.B1, q=params.q, D=D)
        out.append(t**pwr * (1.0 - np.exp(-params.tau * t)) * exp_tail_heat(t, x, ker))
    return tuple(out)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanReport:
    kind: str
    t_range: tuple
    n_t: int
    n_x: int
    min_n1: float
    max_n1: float
    min_n2: float
    max_n2: float
    eps: float
    violations: tuple  # up to 32 worst entries (t, x, operator, value)

    @property
    def passed(self) -> bool:
        if self.kind == "super":
            return self.min_n1 >= -self.eps and self.max_n2 <= self.eps
        return self.max_n1 <= self.eps and self.min_n2 >= -self.eps


def _scan_grids(env: BoundEnvelope, t_min: float, t_max: float,
                n_t: int, n_x: int, edge_fraction: float):
    t = np.linspace(t_min, t_max, n_t)
    frac = np.linspace(-edge_fraction, edge_fraction, n_x)
    T = np.repeat(t[:, None], n_x, axis=1)
    X = T * frac[None, :] * env.cone.c_edge
    return T, X


def residual_sign_scan(env: BoundEnvelope, t_min: Optional[float] = None,
                       t_max: Optional[float] = None, n_t: int = 200, n_x: int = 400,
                       edge_fraction: float = 0.999, eps: float = EPS_NUM) -> ScanReport:
    """Evaluate N1, N2 over a rectangle of the cone and report sign violations.

    Super envelopes must satisfy N1 >= -eps and N2 <= eps, sub envelopes
    the reverse; the report carries the worst offending locations.
    """
    t_min = env.cone.T if t_min is None else t_min
    t_max = 4.0 * env.cone.T if t_max is None else t_max
    if t_max <= t_min:
        raise DomainError(f"empty scan window [{t_min}, {t_max}]")
    T, X = _scan_grids(env, t_min, t_max, n_t, n_x, edge_fraction)
    n1, n2 = env.residuals(T, X)

    if env.kind == "super":
        bad = (n1 < -eps) | (n2 > eps)
        severity = np.maximum(-eps - n1, n2 - eps)
    else:
        bad = (n1 > eps) | (n2 < -eps)
        severity = np.maximum(n1 - eps, -eps - n2)
    violations = []
    if bad.any():
        flat = np.argsort(severity, axis=None)[::-1][:32]
        for idx in flat:
            i, j = np.unravel_index(idx, severity.shape)
            if not bad[i, j]:
                break
            op = "N1" if ((n1[i, j] < -eps) if env.kind == "super" else (n1[i, j] > eps)) else "N2"
            violations.append((float(T[i, j]), float(X[i, j]), op,
                               float(n1[i, j] if op == "N1" else n2[i, j])))
    return ScanReport(kind=env.kind, t_range=(t_min, t_max), n_t=n_t, n_x=n_x,
                      min_n1=float(n1.min()), max_n1=float(n1.max()),
                      min_n2=float(n2.min()), max_n2=float(n2.max()),
                      eps=eps, violations=tuple(violations))


def find_onset(env: BoundEnvelope, eps: float = EPS_NUM, t_start: float = 4.0,
               t_cap: float = 131072.0, n_t: int = 60, n_x: int = 81) -> BoundEnvelope:
    """Scan forward (doubling) for the time from which the sign conditions hold.

    Probes [T, 8T] on a coarse grid (odd point count so the cone axis x = 0,
    where the kernels peak, is always sampled); once clean, returns the
    envelope with onset 2T, so the doubled window [2T, 8T] stays inside the
    probed range.  Raises DomainError when no onset is found below t_cap.
    """
    T = t_start
    while T <= t_cap:
        probe = env.with_onset(T)
        rep = residual_sign_scan(probe, t_min=T, t_max=8.0 * T, n_t=n_t, n_x=n_x, eps=eps)
        if rep.passed:
            return env.with_onset(2.0 * T)
        T *= 2.0
    raise DomainError(f"no onset time below {t_cap} satisfies the sign conditions")


# ---------------------------------------------------------------------------
# ordering against simulation traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderingReport:
    kind: str
    tolerance: float
    times: tuple
    violations_u: tuple
    violations_v: tuple
    onset_time: Optional[float]

    @property
    def passed(self) -> bool:
        return self.onset_time is not None

    def max_violation_after(self, t0: float) -> float:
        out = 0.0
        for t, vu, vv in zip(self.times, self.violations_u, self.violations_v):
            if t >= t0:
                out = max(out, vu, vv)
        return out


def ordering_scan(trace, env: BoundEnvelope, tolerance: float = 1e-2,
                  edge_fraction: float = 1.0) -> OrderingReport:
    """Compare a simulation trace against an envelope on the cone cross-sections.

    For a super envelope the orderings are u <= U and V <= v, for a sub
    envelope U <= u and v <= V.  The onset time is the earliest snapshot
    from which every later violation stays within tolerance.
    """
    if (trace.params.d, trace.params.r) != (env.p.d, env.p.r):
        raise StructuralError("trace and envelope parameters disagree")
    times, v_u, v_v = [], [], []
    for snap in trace.snapshots:
        if snap.t <= env.cone.T:
            continue
        x = snap.grid.x
        mask = np.abs(x) <= edge_fraction * env.cone.c_edge * snap.t
        if not mask.any():
            continue
        U, V = env.evaluate(np.full(mask.sum(), snap.t), x[mask])
        if env.kind == "super":
            viol_u = float((snap.u[mask] - U).max())
            viol_v = float((V - snap.v[mask]).max())
        else:
            viol_u = float((U - snap.u[mask]).max())
            viol_v = float((snap.v[mask] - V).max())
        times.append(snap.t)
        v_u.append(viol_u)
        v_v.append(viol_v)
    if not times:
        raise DomainError("no snapshot lies inside the envelope cone")

    onset = None
    worst_tail = -math.inf
    for i in range(len(times) - 1, -1, -1):
        worst_tail = max(worst_tail, v_u[i], v_v[i])
        if worst_tail <= tolerance:
            onset = times[i]
    return OrderingReport(kind=env.kind, tolerance=tolerance, times=tuple(times),
                          violations_u=tuple(v_u), violations_v=tuple(v_v),
                          onset_time=onset)


def tune_super_amplitude(trace, env: BoundEnvelope, t_anchor: float,
                         margin: float = 1.3) -> BoundEnvelope:
    """Scale B1 so u <= U holds with margin at the anchor snapshot.

    U is linear in B1 and V decreases with it, so enlarging B1 helps both
    orderings at once.
    """
    if env.kind != "super":
        raise StructuralError("tune_super_amplitude needs a super envelope")
    snap = trace.snapshot_at(t_anchor)
    x = snap.grid.x
    mask = np.abs(x) <= env.cone.c_edge * snap.t
    U, _ = env.evaluate(np.full(mask.sum(), snap.t), x[mask])
    unit = U / env.params.B1
    ratio = np.max(snap.u[mask] / np.maximum(unit, 1e-300))
    B1 = margin * float(ratio)
    return build_super_envelope(env.p, replace(env.params, B1=B1))


def tune_sub_amplitude(trace, env: BoundEnvelope, t_anchor: float,
                       margin: float = 0.5, zeta0: Optional[float] = None) -> BoundEnvelope:
    """Shrink B2 (and optionally push zeta0) so U <= u holds with margin."""
    if env.kind != "sub":
        raise StructuralError("tune_sub_amplitude needs a sub envelope")
    pr = env.params
    snap = trace.snapshot_at(t_anchor)
    x = snap.grid.x
    mask = np.abs(x) <= env.cone.c_edge * snap.t
    U, _ = env.evaluate(np.full(mask.sum(), snap.t), x[mask])
    unit = np.maximum(U / pr.B2, 1e-300)  # U scales linearly with B2 (B3 = gamma B2)
    ratio = np.min(snap.u[mask] / unit)
    B2 = min(margin * float(ratio), 0.99)
    if B2 <= 0:
        raise DomainError("cannot tune B2: trace already below the envelope shape")
    new = replace(pr, B2=B2) if zeta0 is None else replace(pr, B2=B2, zeta0=zeta0)
    return build_sub_envelope(env.p, new)


# ---------------------------------------------------------------------------
# heat-kernel comparison checks used alongside the sub envelope
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelComparisonReport:
    j: float
    gaussian_bound_margin: float       # min of (bound - h)/bound; bound is tight at the edge
    interior_positivity_min: float     # min over grid of g f - h          (want > 0)
    edge_onset: float                  # first time g f - h <= 0 at |x| = 2 k t
    edge_nonpositive_after_onset: float  # max of g f - h there for t >= onset (want <= 0)
    amplitude_const: float             # sup (|f| + |h|) sqrt(t)    for t >= 1
    amplitude_bound: float             # (||f0||_1 + ||h0||_1)/sqrt(4 pi)
    rate_const: float                  # sup (|df/dt| + |dh/dt|) t^{3/2}  for t >= 1
    rate_bound: float                  # amplitude_bound / 2

    @property
    def passed(self) -> bool:
        return (self.gaussian_bound_margin >= -1e-9
                and self.interior_positivity_min > 0.0
                and self.edge_nonpositive_after_onset <= 0.0
                and self.amplitude_const <= self.amplitude_bound * (1.0 + 1e-9)
                and self.rate_const <= self.rate_bound * (1.0 + 1e-9))


def kernel_comparison_report(params: SubSolParams, t_min: float = 1.0, t_max: float = 400.0,
                      n_t: int = 120, n_x: int = 160, j: Optional[float] = None) -> KernelComparisonReport:
    """Numerical check of the kernel comparison facts behind the sub envelope.

    On |x| <= 2 j t (j < k): h is under the Gaussian envelope
    (B3/sqrt(pi)) k/(k^2-j^2) t^{-1/2} exp(-x^2/4t), and g f - h stays
    positive for small gamma.  On |x| = 2 k t, g f - h turns nonpositive
    past some onset >= 1/(2k).  Finally (|f|+|h|) sqrt(t) and the analytic
    time derivatives against t^{3/2} stay under their convolution bounds.
    """
    k = params.k
    j = k / 2.0 if j is None else j
    if not 0.0 < j < k:
        raise ValidationError(f"j must lie in (0, k) = (0, {k:.6g}), got {j}")
    fk = IndicatorKernel(B=params.B2, half_width=1.0)
    hk = ExpTailKernel(B=params.B3, q=k, D=1.0)

    t = np.linspace(t_min, t_max, n_t)
    frac = np.linspace(0.0, 1.0, n_x)
    T = np.repeat(t[:, None], n_x, axis=1)
    X = T * frac[None, :] * 2.0 * j

    h = exp_tail_heat(T, X, hk)
    f = indicator_heat(T, X, fk)
    g = g_weight(T, params.delta)
    bound = (params.B3 / math.sqrt(math.pi)) * k / (k * k - j * j) * T**-0.5 * np.exp(-X**2 / (4.0 * T))
    gaussian_margin = float(((bound - h) / bound).min())
    interior_min = float((g * f - h).min())

    # cone edge |x| = 2 k t
    te = np.linspace(max(t_min, 0.05 / k), t_max, 4 * n_t)
    ue = g_weight(te, params.delta) * indicator_heat(te, 2.0 * k * te, fk) - exp_tail_heat(te, 2.0 * k * te, hk)
    nonpos = ue <= 0.0
    onset_idx = None
    for i in range(te.size):
        if nonpos[i:].all():
            onset_idx = i
            break
    edge_onset = float(te[onset_idx]) if onset_idx is not None else math.inf
    edge_onset = max(edge_onset, 1.0 / (2.0 * k))
    after = te >= edge_onset
    edge_max = float(ue[after].max()) if after.any() else math.inf

    tt = np.linspace(max(1.0, t_min), t_max, 4 * n_t)
    xx = np.linspace(0.0, 2.0 * k * t_max, 400)
    TT = np.repeat(tt[:, None], xx.size, axis=1)
    XX = np.repeat(xx[None, :], tt.size, axis=0)
    amp = (np.abs(indicator_heat(TT, XX, fk)) + np.abs(exp_tail_heat(TT, XX, hk))) * np.sqrt(TT)
    rate = (np.abs(indicator_heat_dt(TT, XX, fk)) + np.abs(exp_tail_heat_dt(TT, XX, hk))) * TT**1.5
    mass = 2.0 * params.B2 + 2.0 * params.B3 / k
    return KernelComparisonReport(
        j=j,
        gaussian_bound_margin=gaussian_margin,
        interior_positivity_min=interior_min,
        edge_onset=edge_onset,
        edge_nonpositive_after_onset=edge_max,
        amplitude_const=float(amp.max()),
        amplitude_bound=mass / SQRT_4PI,
        rate_const=float(rate.max()),
        rate_bound=mass / (2.0 * SQRT_4PI),
    )
