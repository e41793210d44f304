"""Command-line surface: configuration, experiment orchestration, serialization.

Configs are flat ``key = value`` lines with ``#`` comments.  Every run writes
into its output directory: the resolved config, CSV series with header rows
naming columns and units, PNG figures, and a ``summary.txt`` in the same
key=value format (so summaries are re-parseable by this module).  Writes are
atomic (temp file + rename).

Exit codes: 0 success, 2 when the run completed but a check failed, 1 on
configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import bounds as bounds_mod
from . import figures
from .core import CompetitionParams, wave_speeds
from .diagnostics import (bump_metrics, bump_trace, fit_front_asymptotics,
                          fit_log_shift, fit_speed, front_trace,
                          gaussian_factor_fit, level_set, profile_distance)
from .errors import ConfigError, CritwaveError
from .analytic import kpp_profile
from .phase_plane import TwParams, monotone_wave_search
from .solver import (FieldSpec, InitialData, SolverConfig, default_dt,
                     front_observer, run)

COMMANDS = ("simulate", "verify-super", "verify-sub", "bump", "bramson",
            "wave-profile", "phase-search", "sweep")

_OPEN_CASE_WARNING = ("WARNING: d*r = 1 is the open borderline case; "
                      "long-time behavior is delicate there and none of the "
                      "shipped checks apply.")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


# ---------------------------------------------------------------------------
# configuration schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "simulate"
    # system coefficients
    a: float = 1.0
    b: float = 1.0
    d: float = 1.0
    r: float = 1.0
    # solver controls
    t_end: float = 200.0
    dt: Optional[float] = None          # None: min(reaction bound, dx^2/max(1,d))
    dx: float = 0.25
    boundary: str = "no-flux"
    snapshot_stride: int = 800
    observer_stride: Optional[int] = 40
    domain_margin: float = 20.0
    x_max: Optional[float] = None
    reaction: bool = True
    u0: str = "indicator(-1,1,1)"
    v0: str = "indicator(-1,1,1)"
    # diagnostics
    level: float = 0.5
    species: str = "v"
    window_start: Optional[float] = None
    window_end: Optional[float] = None
    bump_onset: float = 50.0
    bump_slope_lo: Optional[float] = None
    bump_slope_hi: Optional[float] = None
    bramson_rtol: float = 0.25
    profile_times: str = ""
    profile_tol: float = 0.05
    # envelope scans
    scan_nt: int = 200
    scan_nx: int = 400
    scan_t_min: Optional[float] = None
    scan_t_max: Optional[float] = None
    eps: float = 1e-5
    allow_invalid_params: bool = False
    with_ordering: bool = False
    ordering_tolerance: float = 1e-2
    tune_anchor: Optional[float] = None
    r1: Optional[float] = None
    c1: Optional[float] = None
    q: Optional[float] = None
    tau: Optional[float] = None
    B1: Optional[float] = None
    r2: Optional[float] = None
    c2: Optional[float] = None
    delta: Optional[float] = None
    theta: Optional[float] = None
    gamma: Optional[float] = None
    B2: Optional[float] = None
    zeta0: Optional[float] = None
    T_star: Optional[float] = None
    mu: Optional[float] = None
    # phase-plane search
    alpha: float = 1.0
    beta: float = 0.0
    c_min: float = 0.25
    c_max: float = 3.0
    c_step: float = 0.25
    ensemble: int = 64
    span: float = 80.0
    seed: int = 0
    candidate_threshold: float = 0.05
    # sweep
    sweep_command: str = "simulate"
    sweep_key: str = "d"
    sweep_values: str = ""
    # orchestration
    out: str = "critwave-out"
    jobs: int = 1

    def competition_params(self) -> CompetitionParams:
        return CompetitionParams(a=self.a, b=self.b, d=self.d, r=self.r)

    def solver_config(self) -> SolverConfig:
        dt = self.dt if self.dt is not None else default_dt(self.competition_params(), self.dx)
        return SolverConfig(dt=dt, t_end=self.t_end, dx=self.dx, boundary=self.boundary,
                            snapshot_stride=self.snapshot_stride,
                            observer_stride=self.observer_stride,
                            domain_margin=self.domain_margin, x_max=self.x_max,
                            reaction=self.reaction)

    def initial_data(self) -> InitialData:
        return InitialData(u=parse_field_spec(self.u0), v=parse_field_spec(self.v0))

    def fit_window(self) -> tuple:
        lo = self.window_start if self.window_start is not None else 0.5 * self.t_end
        hi = self.window_end if self.window_end is not None else self.t_end
        return (lo, hi)

    def super_params(self) -> bounds_mod.SuperSolParams:
        p = self.competition_params()
        base = bounds_mod.default_super_params(p)
        over = {k: getattr(self, k) for k in ("r1", "c1", "q", "tau", "B1", "T_star", "mu")
                if getattr(self, k) is not None}
        if self.allow_invalid_params:
            over["validate"] = False
            over.setdefault("T_star", 20.0)
        return replace(base, **over)

    def sub_params(self) -> bounds_mod.SubSolParams:
        p = self.competition_params()
        base = bounds_mod.default_sub_params(p)
        over = {k: getattr(self, k) for k in ("r2", "c2", "delta", "theta", "gamma",
                                              "B2", "zeta0", "T_star")
                if getattr(self, k) is not None}
        if self.allow_invalid_params:
            over["validate"] = False
            over.setdefault("T_star", 20.0)
        return replace(base, **over)


_OPTIONAL_FLOATS = {"dt", "x_max", "window_start", "window_end", "scan_t_min",
                    "scan_t_max", "tune_anchor", "r1", "c1", "q", "tau", "B1",
                    "r2", "c2", "delta", "theta", "gamma", "B2", "zeta0",
                    "T_star", "mu", "bump_slope_lo", "bump_slope_hi"}
_OPTIONAL_INTS = {"observer_stride"}
_FLOATS = {"a", "b", "d", "r", "t_end", "dx", "domain_margin", "level",
           "bump_onset", "bramson_rtol", "profile_tol", "eps",
           "ordering_tolerance", "alpha", "beta", "c_min", "c_max", "c_step",
           "span", "candidate_threshold"}
_INTS = {"snapshot_stride", "scan_nt", "scan_nx", "ensemble", "seed", "jobs"}
_BOOLS = {"reaction", "allow_invalid_params", "with_ordering"}
_STRINGS = {"command", "boundary", "u0", "v0", "species", "profile_times",
            "sweep_command", "sweep_key", "sweep_values", "out"}


def parse_field_spec(text: str) -> FieldSpec:
    """Parse an initial-profile literal: zero | indicator(a,b,h) | exp_tail(B,q)."""
    text = text.strip()
    if text == "zero":
        return FieldSpec.zero()
    if text.startswith("indicator(") and text.endswith(")"):
        args = [float(v) for v in text[len("indicator("):-1].split(",")]
        if len(args) != 3:
            raise ConfigError(f"indicator takes (x_left, x_right, height), got {text!r}")
        return FieldSpec.indicator(intervals=((args[0], args[1]),), height=args[2])
    if text.startswith("exp_tail(") and text.endswith(")"):
        args = [float(v) for v in text[len("exp_tail("):-1].split(",")]
        if len(args) != 2:
            raise ConfigError(f"exp_tail takes (B, q), got {text!r}")
        return FieldSpec.exp_tail(args[0], args[1])
    raise ConfigError(f"unknown initial-data spec {text!r} "
                      "(expected zero, indicator(a,b,h) or exp_tail(B,q))")


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _BOOLS:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"key {key}: expected a boolean, got {raw!r}")
    if key in _INTS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"key {key}: expected an integer, got {raw!r}") from None
    if key in _FLOATS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"key {key}: expected a number, got {raw!r}") from None
    if key in _OPTIONAL_FLOATS:
        if raw.lower() in ("none", ""):
            return None
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"key {key}: expected a number or 'none', got {raw!r}") from None
    if key in _OPTIONAL_INTS:
        if raw.lower() in ("none", ""):
            return None
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"key {key}: expected an integer or 'none', got {raw!r}") from None
    if key in _STRINGS:
        return raw
    raise ConfigError(f"unknown configuration key {key!r}")


def parse_config(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse a flat key=value document into a validated ExperimentConfig.

    One assignment per line is canonical; several space-separated
    assignments on one line (``command=simulate d=2 r=1``) are accepted too.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        tokens = line.split()
        if len(tokens) > 1 and all("=" in tok and not tok.startswith("=") for tok in tokens):
            pairs = [tok.split("=", 1) for tok in tokens]
        else:
            pairs = [line.split("=", 1)]
        for key, raw in pairs:
            key = key.strip()
            values[key] = _parse_value(key, raw)
    for key, raw in (overrides or {}).items():
        values[key] = _parse_value(key, raw) if isinstance(raw, str) else raw

    cfg = ExperimentConfig(**values)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig):
    """Eager validation: every module-level invariant the run would hit."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {cfg.command!r}")
    cfg.competition_params()
    cfg.solver_config()
    cfg.initial_data()
    if not 0.0 < cfg.level < 1.0:
        raise ConfigError(f"level must lie in (0, 1), got {cfg.level}")
    if cfg.species not in ("u", "v"):
        raise ConfigError(f"species must be 'u' or 'v', got {cfg.species!r}")
    if cfg.jobs < 1:
        raise ConfigError(f"jobs (parallelism) must be >= 1, got {cfg.jobs}")
    if cfg.command == "verify-super":
        cfg.super_params()
    if cfg.command == "verify-sub":
        cfg.sub_params()
    if cfg.command == "sweep":
        if cfg.sweep_command not in COMMANDS or cfg.sweep_command == "sweep":
            raise ConfigError(f"sweep_command must be a non-sweep command, got {cfg.sweep_command!r}")
        if cfg.sweep_key not in _FLOATS and cfg.sweep_key not in _OPTIONAL_FLOATS:
            raise ConfigError(f"sweep_key must name a numeric key, got {cfg.sweep_key!r}")
        if not _parse_list(cfg.sweep_values):
            raise ConfigError("sweep_values must be a nonempty comma-separated list")


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical key=value rendering; parse_config(serialize_config(c)) == c."""
    lines = ["# critwave experiment configuration"]
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        lines.append(f"{f.name} = {'none' if value is None else _fmt(value)}")
    return "\n".join(lines) + "\n"


def _parse_list(text: str):
    return [float(v) for v in text.split(",") if v.strip() != ""]


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def atomic_write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


class Summary:
    """Flat key=value summary document, re-parseable and atomic."""

    def __init__(self):
        self.items = []

    def add(self, key: str, value):
        self.items.append((key, value))

    def add_params(self, cfg: ExperimentConfig):
        p = cfg.competition_params()
        sp = wave_speeds(p)
        for key in ("command", "a", "b", "d", "r", "t_end", "dx"):
            self.add(key, getattr(cfg, key))
        self.add("dt", cfg.solver_config().dt)
        self.add("c_u", sp.c_u)
        self.add("c_v", sp.c_v)
        self.add("k_star", sp.k_star)
        self.add("d_star", sp.d_star)
        if abs(p.d * p.r - 1.0) < 1e-6:
            self.add("open_case_warning", _OPEN_CASE_WARNING)

    def write(self, path: Path):
        text = "\n".join(f"{k} = {_fmt(v)}" for k, v in self.items) + "\n"
        atomic_write_text(path, text)


def parse_summary(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, raw = line.split("=", 1)
        out[key.strip()] = raw.strip()
    return out


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _standard_run(cfg: ExperimentConfig, extra_levels=()):
    p = cfg.competition_params()
    observers = {}
    for species in ("u", "v"):
        observers[f"front_{species}_{cfg.level}_right"] = front_observer(species, cfg.level)
    for species, level in extra_levels:
        observers[f"front_{species}_{level}_right"] = front_observer(species, level)
    return run(p, cfg.initial_data(), cfg.solver_config(), observers)


def _write_snapshots(trace, path: Path):
    rows = []
    for snap in trace.snapshots:
        x = snap.grid.x
        for i in range(snap.grid.n):
            rows.append((snap.t, x[i], snap.u[i], snap.v[i]))
    write_csv(path, ["t [time]", "x [length]", "u [density]", "v [density]"], rows)


def _write_series(trace, path: Path):
    names = sorted(trace.series)
    times = trace.series[names[0]][0]
    header = ["t [time]"] + [f"{n} [mixed]" for n in names]
    rows = []
    for i, t in enumerate(times):
        rows.append((t, *(trace.series[n][1][i] for n in names)))
    write_csv(path, header, rows)


def cmd_simulate(cfg: ExperimentConfig, out: Path, summary: Summary) -> int:
    trace = _standard_run(cfg)
    _write_snapshots(trace, out / "snapshots.csv")
    _write_series(trace, out / "series.csv")
    final = trace.snapshots[-1]
    summary.add("final_time", final.t)
    summary.add("final_sup_u", float(final.u.max()))
    summary.add("final_sup_v", float(final.v.max()))
    fronts, fits = [], []
    for species in ("u", "v"):
        ft = front_trace(trace, species, cfg.level)
        if ft.times.size:
            fronts.append(ft)
            try:
                fit = fit_speed(ft, cfg.fit_window())
                summary.add(f"front_speed_{species}", fit.slope)
                fits.append(fit)
            except CritwaveError:
                fits.append(None)
    figures.fields_figure(final, out / "fields_final.png")
    figures.space_time_figure(trace, out / "space_time.png", species=cfg.species)
    if fronts:
        figures.fronts_figure(fronts, fits, out / "fronts.png")
    summary.add("check.simulate.pass", True)
    return 0


def cmd_bump(cfg: ExperimentConfig, out: Path, summary: Summary) -> int:
    trace = _standard_run(cfg)
    bt = bump_trace(trace, onset=cfg.bump_onset)
    metrics = bump_metrics(bt, cfg.d)
    gauss = gaussian_factor_fit(trace, "u", window=(cfg.bump_onset, cfg.t_end))
    write_csv(out / "bump.csv",
              ["t [time]", "u_center [density]", "one_minus_v_center [density]"],
              zip(bt.times, bt.u_center, bt.one_minus_v_center))
    for key, value in sorted(metrics.items()):
        summary.add(f"bump.{key}", value)
    for key, value in sorted(gauss.items()):
        summary.add(f"gauss.{key}", value)
    k_star = metrics["k_star"]
    lo = cfg.bump_slope_lo if cfg.bump_slope_lo is not None else -0.6
    hi = cfg.bump_slope_hi if cfg.bump_slope_hi is not None else -k_star + 0.1
    ok = lo <= metrics["slope_u0"] <= hi and lo <= metrics["slope_one_minus_v0"] <= hi
    summary.add("bump.slope_band_lo", lo)
    summary.add("bump.slope_band_hi", hi)
    summary.add("check.bump_slopes.pass", ok)
    figures.bump_figure(bt, metrics, out / "bump.png")
    figures.fields_figure(trace.snapshots[-1], out / "fields_final.png")
    return 0 if ok else 2


def cmd_bramson(cfg: ExperimentConfig, out: Path, summary: Summary) -> int:
    trace = _standard_run(cfg)
    ft = front_trace(trace, cfg.species, cfg.level)
    window = cfg.fit_window()
    joint = fit_front_asymptotics(ft, window)
    shift = fit_log_shift(ft, joint["speed"], window)
    write_csv(out / "front.csv", ["t [time]", "position [length]"],
              zip(ft.times, ft.positions))
    sp = wave_speeds(cfg.competition_params())
    expected = -3.0 * cfg.d / sp.c_v
    summary.add("front_speed_joint", joint["speed"])
    summary.add("log_shift_slope", shift.slope)
    summary.add("log_shift_expected", expected)
    ok = abs(shift.slope - expected) <= cfg.bramson_rtol * abs(expected)
    summary.add("check.bramson_slope.pass", ok)
    figures.bramson_figure(ft, joint["speed"], shift, out / "bramson.png")
    figures.fronts_figure([ft], [None], out / "fronts.png")
    return 0 if ok else 2


def cmd_wave_profile(cfg: ExperimentConfig, out: Path, summary: Summary) -> int:
    p = cfg.competition_params()
    sp = wave_speeds(p)
    d_eff, r_eff, c = (p.d, p.r, sp.c_v) if cfg.species == "v" else (1.0, 1.0, sp.c_u)
    wave = kpp_profile(d_eff, r_eff, c)
    write_csv(out / "profile.csv",
              ["xi [length]", "V [density]", "dV_dxi [density/length]"],
              zip(wave.xi, wave.V, wave.Vp))
    summary.add("wave_speed", wave.c)
    summary.add("tail_rate_lambda", wave.lam)
    summary.add("tail_amplitude_M", wave.M)
    figures.wave_profile_figure(wave, out / "wave_profile.png")

    trace = _standard_run(cfg)
    times = _parse_list(cfg.profile_times) or [cfg.t_end / 4, cfg.t_end / 2, cfg.t_end]
    rows, dists = [], []
    for t in times:
        snap = trace.snapshot_at(t)
        dist = profile_distance(snap, wave, cfg.species)
        rows.append((snap.t, dist))
        dists.append(dist)
        summary.add(f"profile_distance_t{snap.t:g}", dist)
    write_csv(out / "profile_distance.csv", ["t [time]", "sup_distance [density]"], rows)
    snap = trace.snapshot_at(times[-1])
    anchor = float(level_set(snap, cfg.species, 0.5).max())
    figures.profile_overlay_figure(snap, wave, cfg.species, anchor, out / "profile_overlay.png")
    ok = all(d2 < d1 for d1, d2 in zip(dists, dists[1:])) and dists[-1] < cfg.profile_tol
    summary.add("check.profile_convergence.pass", ok)
    return 0 if ok else 2


def _verify_envelope(cfg: ExperimentConfig, out: Path, summary: Summary, kind: str) -> int:
    p = cfg.competition_params()
    if kind == "super":
        env = bounds_mod.build_super_envelope(p, cfg.super_params())
    else:
        env = bounds_mod.build_sub_envelope(p, cfg.sub_params())
    if cfg.T_star is None and not cfg.allow_invalid_params:
        env = bounds_mod.find_onset(env, eps=cfg.eps)
    summary.add("onset_T_star", env.cone.T)
    summary.add("cone_slope", env.cone.c_edge)
    report = bounds_mod.residual_sign_scan(
        env, t_min=cfg.scan_t_min, t_max=cfg.scan_t_max,
        n_t=cfg.scan_nt, n_x=cfg.scan_nx, eps=cfg.eps)
    for key in ("min_n1", "max_n1", "min_n2", "max_n2"):
        summary.add(f"scan.{key}", getattr(report, key))
    summary.add("scan.t_min", report.t_range[0])
    summary.add("scan.t_max", report.t_range[1])
    summary.add("check.residual_signs.pass", report.passed)
    write_csv(out / "violations.csv",
              ["t [time]", "x [length]", "operator [-]", "value [rate]"],
              report.violations)
    figures.scan_figure(env, report, out / "residual_scan.png")
    status = 0 if report.passed else 2

    if kind == "sub":
        kc = bounds_mod.kernel_comparison_report(env.params)
        summary.add("kernel.gaussian_bound_margin", kc.gaussian_bound_margin)
        summary.add("kernel.interior_positivity_min", kc.interior_positivity_min)
        summary.add("kernel.edge_onset", kc.edge_onset)
        summary.add("kernel.edge_nonpositive_after_onset", kc.edge_nonpositive_after_onset)
        summary.add("kernel.amplitude_const", kc.amplitude_const)
        summary.add("kernel.amplitude_bound", kc.amplitude_bound)
        summary.add("kernel.rate_const", kc.rate_const)
        summary.add("kernel.rate_bound", kc.rate_bound)
        summary.add("check.kernel_comparison.pass", kc.passed)
        if not kc.passed:
            status = 2

    if cfg.with_ordering:
        trace = _standard_run(cfg)
        anchor = cfg.tune_anchor if cfg.tune_anchor is not None else 0.2 * cfg.t_end
        env_ord = env.with_onset(min(env.cone.T, anchor / 2.0))
        if kind == "super":
            env_ord = bounds_mod.tune_super_amplitude(trace, env_ord, anchor)
        else:
            env_ord = bounds_mod.tune_sub_amplitude(trace, env_ord, anchor)
        ordering = bounds_mod.ordering_scan(trace, env_ord, tolerance=cfg.ordering_tolerance)
        write_csv(out / "ordering.csv",
                  ["t [time]", "violation_u [density]", "violation_v [density]"],
                  zip(ordering.times, ordering.violations_u, ordering.violations_v))
        summary.add("ordering.onset_time", ordering.onset_time if ordering.onset_time is not None else "none")
        summary.add("check.ordering.pass", ordering.passed)
        figures.ordering_figure(ordering, out / "ordering.png")
        if not ordering.passed:
            status = 2
    return status


def cmd_verify_super(cfg, out, summary) -> int:
    return _verify_envelope(cfg, out, summary, "super")


def cmd_verify_sub(cfg, out, summary) -> int:
    return _verify_envelope(cfg, out, summary, "sub")


def cmd_phase_search(cfg: ExperimentConfig, out: Path, summary: Summary) -> int:
    speeds = []
    c = cfg.c_min
    while c <= cfg.c_max + 1e-12:
        speeds.extend((c, -c))
        c += cfg.c_step
    rows, residuals, cs = [], [], []
    any_candidate = False
    best = (math.inf, None, None)
    for c in speeds:
        res = monotone_wave_search(
            TwParams(alpha=cfg.alpha, beta=cfg.beta, c=c, d=cfg.d, r=cfg.r),
            span=cfg.span, ensemble=cfg.ensemble, seed=cfg.seed,
            candidate_threshold=cfg.candidate_threshold)
        rows.append((c, res.verdict, res.best_residual, res.n_shots))
        residuals.append(res.best_residual)
        cs.append(c)
        any_candidate |= res.verdict == "candidate-found"
        if res.best_residual < best[0] and res.best_trajectory is not None:
            best = (res.best_residual, c, res.best_trajectory)
    write_csv(out / "search.csv",
              ["c [speed]", "verdict [-]", "best_residual [-]", "n_shots [count]"],
              rows)
    summary.add("n_speeds", len(speeds))
    summary.add("min_residual", min(residuals) if residuals else math.inf)
    summary.add("any_candidate_found", any_candidate)
    summary.add("check.no_candidate.pass", not any_candidate)
    figures.phase_search_figure(cs, residuals, cfg.candidate_threshold,
                                out / "phase_search.png")
    traj = best[2]
    if traj is None and speeds:
        # nothing passed the filters; dump one representative shot anyway so
        # the oscillation of W - R is inspectable
        from .phase_plane import equilibrium_jacobian, shoot
        c0 = speeds[0]
        p0 = TwParams(alpha=cfg.alpha, beta=cfg.beta, c=abs(c0), d=cfg.d, r=cfg.r)
        lin = equilibrium_jacobian(p0.alpha, p0.c, p0.d, p0.r)
        idx = int(np.argmax(np.real(lin.eigenvalues)))
        direction = np.real(lin.eigenvectors[:, idx])
        traj = shoot(p0, 1e-4 * direction / np.linalg.norm(direction), span=cfg.span)
    if traj is not None:
        write_csv(out / "best_trajectory.csv",
                  ["xi [length]", "W [-]", "P [-]", "R [-]", "Q [-]"],
                  ((traj.xi[i], *traj.states[i]) for i in range(traj.xi.size)))
        figures.trajectory_figure(traj, out / "best_trajectory.png")
    if any_candidate:
        print("NOTE: candidate connection found; this is a reportable finding, "
              "not a confirmation of existence.", file=sys.stderr)
        return 2
    return 0


def cmd_sweep(cfg: ExperimentConfig, out: Path, summary: Summary) -> int:
    values = _parse_list(cfg.sweep_values)
    tasks = []
    for value in values:
        sub = replace(cfg, command=cfg.sweep_command, sweep_values="",
                      **{cfg.sweep_key: value})
        sub_out = out / f"{cfg.sweep_key}={_fmt(value)}"
        tasks.append((sub, sub_out))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            codes = list(pool.map(_run_task, tasks))
    else:
        codes = [_run_task(task) for task in tasks]
    for (sub, sub_out), code in zip(tasks, codes):
        summary.add(f"job.{sub_out.name.replace('=', '_')}.exit", code)
    summary.add("check.sweep.pass", all(code == 0 for code in codes))
    return max(codes) if codes else 0


def _run_task(task) -> int:
    sub, sub_out = task
    return run_command(sub, out_dir=sub_out)


_DISPATCH = {
    "simulate": cmd_simulate,
    "bump": cmd_bump,
    "bramson": cmd_bramson,
    "wave-profile": cmd_wave_profile,
    "verify-super": cmd_verify_super,
    "verify-sub": cmd_verify_sub,
    "phase-search": cmd_phase_search,
    "sweep": cmd_sweep,
}


def run_command(cfg: ExperimentConfig, out_dir: Optional[Path] = None) -> int:
    """Execute a validated config; writes artifacts and returns the exit code."""
    out = Path(out_dir) if out_dir is not None else Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "config.txt", serialize_config(cfg))
    summary = Summary()
    summary.add_params(cfg)
    if abs(cfg.d * cfg.r - 1.0) < 1e-6:
        print(_OPEN_CASE_WARNING, file=sys.stderr)
    try:
        status = _DISPATCH[cfg.command](cfg, out, summary)
    except CritwaveError as exc:
        summary.add("error", f"{type(exc).__name__}: {exc}")
        summary.write(out / "summary.txt")
        raise
    summary.add("exit_code", status)
    summary.write(out / "summary.txt")
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="critwave",
        description="Numerical laboratory for critical competition-diffusion dynamics.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, default=None,
                        help="key=value configuration file")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--jobs", type=int, default=None,
                        help="parallelism for sweeps (default: CRITWAVE_JOBS or 1)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a single configuration key")
    args = parser.parse_args(argv)

    overrides = {}
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 1
        key, raw = item.split("=", 1)
        overrides[key.strip()] = raw
    if args.out is not None:
        overrides["out"] = str(args.out)
    jobs = args.jobs if args.jobs is not None else os.environ.get("CRITWAVE_JOBS")
    if jobs is not None:
        overrides["jobs"] = str(jobs)

    try:
        text = args.config.read_text() if args.config else ""
        file_keys = {line.split("#", 1)[0].split("=", 1)[0].strip()
                     for line in text.splitlines() if "=" in line.split("#", 1)[0]}
        if "command" in file_keys:
            file_cfg = parse_config(text)
            if file_cfg.command != args.command and "command" not in overrides:
                raise ConfigError(
                    f"config file sets command={file_cfg.command!r} but {args.command!r} was requested")
        overrides["command"] = args.command
        cfg = parse_config(text, overrides)
        return run_command(cfg)
    except CritwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
