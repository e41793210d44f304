"""Acceptance gate: one test per criterion, each printing its pass line.

The long-time theorems are asymptotic, so every check here is a desk-scale
surrogate with an explicit tolerance.  Shared runs are module-scoped
fixtures; the whole module stays within a few minutes.  Run with

    pytest tests/test_acceptance.py -v -s
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from critwave import (CompetitionParams, FieldSpec, InitialData, SolverConfig,
                      build_sub_envelope, build_super_envelope,
                      default_sub_params, default_super_params,
                      equilibrium_jacobian, exp_tail_heat, ExpTailKernel,
                      IndicatorKernel, find_onset, fit_front_asymptotics,
                      fit_log_shift, fit_speed, front_observer, front_trace,
                      bump_metrics, bump_trace, gaussian_factor_fit,
                      kernel_comparison_report, indicator_heat, kpp_decay_rate,
                      kpp_profile, monotone_wave_search, ordering_scan,
                      profile_distance, residual_sign_scan, run,
                      run_scalar_kpp, strongweak_speeds, tune_sub_amplitude,
                      tune_super_amplitude, TwParams, wave_speeds)


def _report(num, name, passed, detail):
    print(f"ACCEPTANCE {num:>2} {name}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, f"criterion {num} failed: {detail}"


# ---------------------------------------------------------------------------
# shared runs
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def trace_d1r4():
    # long pulled-front run for the logarithmic-delay and profile criteria
    p = CompetitionParams(d=1.0, r=4.0)
    cfg = SolverConfig(dt=0.05, t_end=1000.0, dx=0.25,
                       snapshot_stride=2000, observer_stride=20)
    obs = {"front_v_0.5_right": front_observer("v", 0.5)}
    return run(p, InitialData.default(), cfg, obs)


@pytest.fixture(scope="module")
def trace_d2r1_t200():
    # the criterion fixes (d, r, t_end) but not the datum; a light u seed is
    # needed so the central decay has cleared the 0.05 line by t = 200
    p = CompetitionParams(d=2.0, r=1.0)
    cfg = SolverConfig(dt=0.025, t_end=200.0, dx=0.25,
                       snapshot_stride=800, observer_stride=40)
    init = InitialData(u=FieldSpec.indicator(height=0.15), v=FieldSpec.indicator(height=1.0))
    obs = {"front_v_0.5_right": front_observer("v", 0.5)}
    return run(p, init, cfg, obs)


@pytest.fixture(scope="module")
def trace_d1r2_t400():
    p = CompetitionParams(d=1.0, r=2.0)
    cfg = SolverConfig(dt=0.05, t_end=400.0, dx=0.25,
                       snapshot_stride=800, observer_stride=20)
    return run(p, InitialData.default(), cfg)


@pytest.fixture(scope="module")
def trace_d2r1_t400():
    p = CompetitionParams(d=2.0, r=1.0)
    cfg = SolverConfig(dt=0.025, t_end=400.0, dx=0.25,
                       snapshot_stride=1600, observer_stride=40)
    return run(p, InitialData.default(), cfg)


SCAN_CASES = ((0.5, 4.0), (1.0, 2.0), (2.0, 1.0))  # d r = 2 throughout


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_c01_scalar_kpp_speed():
    p = CompetitionParams(d=1.0, r=1.0)
    cfg = SolverConfig(dt=0.04, t_end=150.0, dx=0.2, x_max=400.0,
                       snapshot_stride=750, observer_stride=25)
    obs = {"front_u_0.5_right": front_observer("u", 0.5)}
    trace = run_scalar_kpp(p, FieldSpec.indicator(), cfg, obs)
    fit = fit_speed(front_trace(trace, "u", 0.5), (50.0, 150.0))
    rel = abs(fit.slope - 2.0) / 2.0
    _report(1, "scalar KPP front speed", rel <= 0.02,
            f"speed {fit.slope:.4f} vs 2, rel err {rel:.2%}")


def test_c02_critical_spreading_speed(trace_d2r1_t200):
    trace = trace_d2r1_t200
    sp = wave_speeds(trace.params)
    fit = fit_speed(front_trace(trace, "v", 0.5), (100.0, 200.0))
    rel = abs(fit.slope - sp.c_v) / sp.c_v
    final = trace.snapshots[-1]
    sup_u = float(final.u.max())
    mask = np.abs(trace.grid.x) <= 0.5 * sp.c_v * final.t
    sup_v_deficit = float(np.abs(1.0 - final.v[mask]).max())
    passed = rel <= 0.02 and sup_u < 0.05 and sup_v_deficit < 0.05
    _report(2, "critical spreading speed", passed,
            f"speed rel err {rel:.2%}, sup u {sup_u:.4f}, sup|1-v| {sup_v_deficit:.4f}")


def test_c03_bramson_shift(trace_d1r4):
    # the discrete pulled front runs a fraction of a percent off c_v, and the
    # single-predictor fit amplifies that mismatch ~470x on this window, so
    # the speed comes from the simultaneous fit and the plain ln t regression
    # is then run at that speed
    ft = front_trace(trace_d1r4, "v", 0.5)
    window = (100.0, 1000.0)
    joint = fit_front_asymptotics(ft, window)
    shift = fit_log_shift(ft, joint["speed"], window)
    expected = -3.0 * 1.0 / 4.0
    err = abs(shift.slope - expected) / abs(expected)
    _report(3, "logarithmic front delay", err <= 0.25,
            f"slope {shift.slope:.4f} vs {expected}, rel err {err:.1%}, "
            f"front speed {joint['speed']:.5f}")


def test_c04_profile_convergence(trace_d1r4):
    wave = kpp_profile(1.0, 4.0, 4.0)
    dists = [profile_distance(trace_d1r4.snapshot_at(t), wave, "v")
             for t in (100.0, 200.0, 400.0)]
    passed = dists[0] > dists[1] > dists[2] and dists[2] < 0.05
    _report(4, "profile convergence to the minimal wave", passed,
            "distances " + ", ".join(f"{d:.4f}" for d in dists))


def test_c05_bump_exponent_symmetric(trace_d1r2_t400):
    bt = bump_trace(trace_d1r2_t400, onset=50.0)
    m = bump_metrics(bt, d=1.0)
    ok_u = -0.6 <= m["slope_u0"] <= -0.4
    ok_v = -0.6 <= m["slope_one_minus_v0"] <= -0.4
    ok_band = m["sqrt_band_ratio"] <= 3.0
    _report(5, "central decay, equal diffusivities", ok_u and ok_v and ok_band,
            f"slopes {m['slope_u0']:.3f}/{m['slope_one_minus_v0']:.3f}, "
            f"sqrt-band ratio {m['sqrt_band_ratio']:.2f}")


def test_c06_bump_bracket_asymmetric(trace_d2r1_t400):
    bt = bump_trace(trace_d2r1_t400, onset=50.0)
    m = bump_metrics(bt, d=2.0)
    ok_slope = -0.6 <= m["slope_u0"] <= -0.15
    gauss = gaussian_factor_fit(trace_d2r1_t400, "u", window=(50.0, 400.0))
    d_star = 2.0
    lo, hi = 1.0 / d_star - 0.2, 1.0 + 0.2
    ok_gauss = lo <= gauss["slope_median"] <= hi
    _report(6, "central decay bracket, d = 2", ok_slope and ok_gauss,
            f"slope {m['slope_u0']:.3f} in [-0.6,-0.15], "
            f"gaussian exponent {gauss['slope_median']:.3f} in [{lo:.1f},{hi:.1f}]")


def test_c07_super_solution_residual_signs():
    details = []
    passed = True
    for d, r in SCAN_CASES:
        p = CompetitionParams(d=d, r=r)
        env = find_onset(build_super_envelope(p))
        rep = residual_sign_scan(env, n_t=200, n_x=400)
        passed &= rep.min_n1 >= -1e-5 and rep.max_n2 <= 1e-5
        details.append(f"d={d}: minN1={rep.min_n1:.1e} maxN2={rep.max_n2:.1e} T*={env.cone.T:g}")
    # deliberately broken decay rate: violation must be found and located
    p = CompetitionParams(d=2.0, r=1.0)
    good = default_super_params(p)
    broken = replace(good, tau=10.0 * good.lambda1 * (good.c_v_star - good.c1),
                     T_star=20.0, validate=False)
    rep = residual_sign_scan(build_super_envelope(p, broken),
                             t_min=20.0, t_max=400.0, n_t=120, n_x=201)
    detected = (not rep.passed) and len(rep.violations) > 0
    passed &= detected
    details.append(f"broken tau detected at {len(rep.violations)} sites")
    _report(7, "super envelope residual signs", passed, "; ".join(details))


def test_c08_sub_solution_residual_signs():
    details = []
    passed = True
    for d, r in SCAN_CASES:
        p = CompetitionParams(d=d, r=r)
        env = find_onset(build_sub_envelope(p))
        rep = residual_sign_scan(env, n_t=200, n_x=400)
        passed &= rep.max_n1 <= 1e-5 and rep.min_n2 >= -1e-5
        kc = kernel_comparison_report(env.params)
        passed &= kc.passed
        details.append(f"d={d}: maxN1={rep.max_n1:.1e} minN2={rep.min_n2:.1e} "
                       f"T*={env.cone.T:g} kernel={'ok' if kc.passed else 'FAIL'}")
    _report(8, "sub envelope residual signs + kernel comparisons", passed, "; ".join(details))


def test_c09_ordering_against_simulation(trace_d2r1_t400):
    trace = trace_d2r1_t400
    p = trace.params
    tol = 1e-2
    sup = build_super_envelope(p, replace(default_super_params(p), T_star=20.0))
    sup = tune_super_amplitude(trace, sup, t_anchor=80.0)
    rep_sup = ordering_scan(trace, sup, tolerance=tol)
    sub = build_sub_envelope(p, replace(default_sub_params(p), T_star=20.0))
    sub = tune_sub_amplitude(trace, sub, t_anchor=80.0)
    rep_sub = ordering_scan(trace, sub, tolerance=tol)
    passed = (rep_sup.onset_time is not None and rep_sup.onset_time <= 200.0
              and rep_sub.onset_time is not None and rep_sub.onset_time <= 200.0)
    if passed:
        passed = (rep_sup.max_violation_after(rep_sup.onset_time) <= tol
                  and rep_sub.max_violation_after(rep_sub.onset_time) <= tol)
    _report(9, "comparison ordering on the cones", passed,
            f"super onset {rep_sup.onset_time}, sub onset {rep_sub.onset_time}, "
            f"worst {max(rep_sup.max_violation_after(rep_sup.onset_time or 0.0), rep_sub.max_violation_after(rep_sub.onset_time or 0.0)):.2e}")


def test_c10_closed_form_oracles():
    p = CompetitionParams(d=1.0, r=1.0)
    cfg = SolverConfig(dt=0.002, t_end=10.0, dx=0.05, x_max=30.0,
                       snapshot_stride=250, reaction=False)
    init = InitialData(u=FieldSpec.exp_tail(0.5, 0.3),
                       v=FieldSpec.indicator(((-1.0, 1.0),), 0.5))
    trace = run(p, init, cfg)
    ek = ExpTailKernel(B=0.5, q=0.3, D=1.0)
    ik = IndicatorKernel(B=0.5)
    err_u = max(float(np.abs(s.u - exp_tail_heat(s.t, s.grid.x, ek)).max())
                for s in trace.snapshots)
    err_v = max(float(np.abs(s.v - indicator_heat(s.t, s.grid.x, ik)).max())
                for s in trace.snapshots)
    wave = kpp_profile(1.0, 1.0, 2.0)
    tail = (1.0 - wave.V > 1e-7) & (1.0 - wave.V < 1e-4)
    slope = float(np.polyfit(wave.xi[tail], np.log(1.0 - wave.V[tail]), 1)[0])
    lam = kpp_decay_rate(1.0, 1.0, 2.0)
    rate_err = abs(slope - lam) / lam
    passed = err_u < 1e-3 and err_v < 1e-3 and rate_err < 0.01
    _report(10, "closed-form kernels vs diffusion-only solver", passed,
            f"sup err exp-tail {err_u:.1e}, indicator {err_v:.1e}, "
            f"tail-rate rel err {rate_err:.2e}")


def test_c11_phase_plane_nonexistence_evidence():
    standing = monotone_wave_search(TwParams(alpha=1.0, beta=0.0, c=0.0, d=2.0, r=2.0))
    equal_diff = monotone_wave_search(TwParams(alpha=0.3, beta=0.8, c=1.0, d=1.0, r=2.0))
    ok_analytic = standing.verdict == "nonexistent" and equal_diff.verdict == "nonexistent"

    worst = math.inf
    speeds = [s * k * 0.25 for k in range(1, 13) for s in (1, -1)]
    for c in speeds:
        res = monotone_wave_search(TwParams(alpha=1.0, beta=0.0, c=c, d=2.0, r=2.0),
                                   ensemble=24, span=60.0)
        worst = min(worst, res.best_residual)
    ok_scan = worst > 0.1

    rng = np.random.default_rng(11)
    kernel_err = 0.0
    for _ in range(100):
        lin = equilibrium_jacobian(rng.uniform(0, 1), rng.uniform(-3, 3),
                                   rng.uniform(0.2, 4), rng.uniform(0.2, 4))
        kernel_err = max(kernel_err, float(np.abs(lin.matrix @ np.array([1.0, 0, 1.0, 0])).max()))
    ok_kernel = kernel_err <= 1e-10

    _report(11, "no ultimately monotone connection", ok_analytic and ok_scan and ok_kernel,
            f"analytic verdicts ok={ok_analytic}, min residual over {len(speeds)} speeds "
            f"{worst}, kernel err {kernel_err:.1e}")


def test_c12_speed_selection_formulas():
    ok_f = all(strongweak_speeds(a, 1.5, 1.5).f(2.0) == 2.0 for a in (0.1, 0.25, 0.5, 0.9))
    ok_nlp = strongweak_speeds(0.25, 1.5, 1.5).c_nlp == 1.75

    p = CompetitionParams(a=0.5, b=2.0, d=1.0, r=1.0)
    cfg = SolverConfig(dt=0.04, t_end=150.0, dx=0.2,
                       snapshot_stride=750, observer_stride=25)
    obs = {"front_u_0.5_right": front_observer("u", 0.5)}
    trace = run(p, InitialData.default(), cfg, obs)
    fit = fit_speed(front_trace(trace, "u", 0.5), (50.0, 150.0))
    sw = strongweak_speeds(0.5, 1.0, 1.0)
    hi = max(2.0, sw.c_nlp) if sw.c_nlp is not None else 2.0
    lo = 2.0 * math.sqrt(1.0 - 0.5)
    ok_speed = lo - 0.05 <= fit.slope <= hi + 0.05
    _report(12, "strong-weak speed selection", ok_f and ok_nlp and ok_speed,
            f"f(2)=2 ok={ok_f}, c_nlp=1.75 ok={ok_nlp}, "
            f"u-front speed {fit.slope:.4f} in [{lo - 0.05:.3f}, {hi + 0.05:.3f}]")
