import numpy as np
import pytest

from critwave import (Trajectory, TwParams, TwState, equilibrium_jacobian,
                      monotone_wave_search, shoot, sign_changes, tw_field)
from critwave.phase_plane import (connection_residual, respects_apriori_bounds,
                                  ultimately_monotone_tail)
from critwave.errors import ValidationError


def test_params_validation():
    with pytest.raises(ValidationError):
        TwParams(alpha=0.5, beta=0.5, c=1.0, d=2.0, r=1.0)
    with pytest.raises(ValidationError):
        TwParams(alpha=1.5, beta=0.0, c=1.0, d=2.0, r=1.0)
    with pytest.raises(ValidationError):
        TwParams(alpha=1.0, beta=0.0, c=1.0, d=-2.0, r=1.0)


def test_field_equilibria():
    p = TwParams(alpha=1.0, beta=0.0, c=1.0, d=2.0, r=1.0)
    assert np.all(tw_field(np.zeros(4), p) == 0.0)
    # the whole line W = R, P = Q = 0 is at rest
    for eps in (0.1, -0.3, 0.7):
        assert np.all(tw_field(np.array([eps, 0.0, eps, 0.0]), p) == 0.0)


def test_field_hand_value():
    # state (0.1, 0, 0, 0) with alpha=1: U = 0.9, V = 0, so P' = -0.9*0.1 and
    # Q' = 0 because the V prefactor R + 1 - alpha vanishes
    p = TwParams(alpha=1.0, beta=0.0, c=1.0, d=2.0, r=1.0)
    out = tw_field(np.array([0.1, 0.0, 0.0, 0.0]), p)
    assert out == pytest.approx([0.0, -0.09, 0.0, 0.0], abs=1e-15)


def test_field_state_container():
    p = TwParams(alpha=0.5, beta=0.2, c=0.5, d=1.0, r=1.0)
    s = TwState(0.1, 0.02, -0.05, 0.01)
    out = tw_field(s, p)
    assert isinstance(out, TwState)
    assert out.W == -0.02
    assert np.allclose(TwState.from_array(s.as_array()).as_array(), s.as_array())


def test_jacobian_kernel_and_trace():
    rng = np.random.default_rng(42)
    for _ in range(100):
        a = rng.uniform(0.0, 1.0)
        c = rng.uniform(-3.0, 3.0)
        d = rng.uniform(0.2, 4.0)
        r = rng.uniform(0.2, 4.0)
        lin = equilibrium_jacobian(a, c, d, r)
        assert np.abs(lin.matrix @ np.array([1.0, 0.0, 1.0, 0.0])).max() <= 1e-10
        assert np.trace(lin.matrix) == pytest.approx(-c - c / d, rel=1e-12)
        assert np.min(np.abs(lin.eigenvalues)) < 1e-8  # the rest-state direction


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(3)
    eps = 1e-7
    for _ in range(20):
        a = rng.uniform(0.0, 1.0)
        p = TwParams(alpha=a, beta=(a + 0.5) % 1.0 if abs((a + 0.5) % 1.0 - a) > 1e-3 else 0.99,
                     c=rng.uniform(0.2, 3.0), d=rng.uniform(0.3, 3.0), r=rng.uniform(0.3, 3.0))
        J_fd = np.zeros((4, 4))
        for j in range(4):
            e = np.zeros(4)
            e[j] = eps
            J_fd[:, j] = (tw_field(e, p) - tw_field(-e, p)) / (2.0 * eps)
        lin = equilibrium_jacobian(p.alpha, p.c, p.d, p.r)
        assert np.abs(J_fd - lin.matrix).max() < 1e-8


def test_shoot_constant_on_rest_line():
    p = TwParams(alpha=0.6, beta=0.2, c=1.0, d=2.0, r=1.0)
    traj = shoot(p, np.array([0.05, 0.0, 0.05, 0.0]), span=10.0)
    assert traj.reason == "span_end"
    assert np.abs(traj.states - traj.states[0]).max() < 1e-9


def test_shoot_reversal_consistency():
    # Y(xi) solves speed c iff (W, -P, R, -Q)(-xi) solves speed -c: running
    # the flipped endpoint backward recovers the flipped start
    p = TwParams(alpha=0.8, beta=0.2, c=0.7, d=2.0, r=1.5)
    init = np.array([0.01, 0.003, -0.004, 0.002])
    fwd = shoot(p, init, span=6.0, rtol=1e-11, atol=1e-13)
    end = fwd.states[-1]
    pm = TwParams(alpha=0.8, beta=0.2, c=-0.7, d=2.0, r=1.5)
    back = shoot(pm, np.array([end[0], -end[1], end[2], -end[3]]),
                 span=float(fwd.xi[-1]), rtol=1e-11, atol=1e-13)
    got = back.states[-1]
    expect = np.array([init[0], -init[1], init[2], -init[3]])
    assert np.abs(got - expect).max() < 1e-8


def test_shoot_invariant_manifold_d_one():
    # for d = 1 the set {W = R, P = -Q} is invariant and P decays as
    # P0 exp(-c xi) (the summed equation is linear there)
    p = TwParams(alpha=0.6, beta=0.4, c=1.2, d=1.0, r=2.0)
    traj = shoot(p, np.array([0.05, 0.02, 0.05, -0.02]), span=5.0,
                 rtol=1e-11, atol=1e-13)
    assert np.abs(traj.w_minus_r).max() < 1e-10
    P = traj.states[:, 1]
    assert np.abs(P - 0.02 * np.exp(-1.2 * traj.xi)).max() < 1e-10
    assert np.abs(traj.states[:, 1] + traj.states[:, 3]).max() < 1e-10


def test_shoot_blowup_detected():
    p = TwParams(alpha=1.0, beta=0.0, c=1.0, d=2.0, r=1.0)
    traj = shoot(p, np.array([50.0, 50.0, 0.0, 0.0]), span=50.0)
    assert traj.reason == "blowup"
    assert traj.xi[-1] < 50.0
    assert np.linalg.norm(traj.states[-1]) >= 1e3 * (1.0 - 1e-6)


def test_sign_changes_fixtures():
    xi = np.linspace(0.0, 4.0 * np.pi, 2001)
    states = np.zeros((xi.size, 4))
    states[:, 0] = np.sin(xi)  # W - R = sin since R stays 0
    traj = Trajectory(xi=xi, states=states, reason="span_end")
    # three strict alternations: the dead band filters the zeros at the ends
    assert sign_changes(traj) == 3
    # rest-line trajectory: W - R identically zero, everything filtered
    states2 = np.zeros((11, 4))
    states2[:, 0] = states2[:, 2] = 0.3
    traj2 = Trajectory(xi=np.linspace(0, 1, 11), states=states2, reason="span_end")
    assert sign_changes(traj2) == 0
    # noise below the dead band never counts
    states3 = np.zeros((101, 4))
    states3[:, 0] = 1e-13 * np.sin(np.linspace(0, 20, 101))
    traj3 = Trajectory(xi=np.linspace(0, 1, 101), states=states3, reason="span_end")
    assert sign_changes(traj3) == 0


def test_monotone_tail_classifier():
    xi = np.linspace(0.0, 10.0, 101)
    states = np.zeros((xi.size, 4))
    states[:, 1] = -1e-3  # P < 0
    states[:, 3] = 1e-3   # Q > 0: P Q < 0 throughout
    assert ultimately_monotone_tail(Trajectory(xi=xi, states=states, reason="span_end"))
    states[:, 3] = -1e-3  # P Q > 0: rejected
    assert not ultimately_monotone_tail(Trajectory(xi=xi, states=states, reason="span_end"))


def test_apriori_bound_filter():
    xi = np.linspace(0.0, 1.0, 11)
    states = np.zeros((xi.size, 4))
    assert respects_apriori_bounds(Trajectory(xi=xi, states=states, reason="span_end"), alpha=0.5)
    states[:, 0] = 0.8  # U = alpha - W = -0.3 < 0
    assert not respects_apriori_bounds(Trajectory(xi=xi, states=states, reason="span_end"), alpha=0.5)


def test_connection_residual_geometry():
    p = TwParams(alpha=1.0, beta=0.0, c=1.0, d=2.0, r=1.0)
    xi = np.linspace(0.0, 10.0, 101)
    states = np.tile(p.target, (xi.size, 1))
    traj = Trajectory(xi=xi, states=states, reason="span_end")
    assert connection_residual(traj, p) == 0.0


def test_search_analytic_verdicts():
    res = monotone_wave_search(TwParams(alpha=1.0, beta=0.0, c=0.0, d=2.0, r=2.0))
    assert res.verdict == "nonexistent"
    assert "standing" in res.reason
    res = monotone_wave_search(TwParams(alpha=1.0, beta=0.0, c=1.3, d=1.0, r=2.0))
    assert res.verdict == "nonexistent"
    assert "equal diffusivities" in res.reason


def test_search_numeric_no_candidate():
    res = monotone_wave_search(TwParams(alpha=1.0, beta=0.0, c=1.0, d=2.0, r=2.0),
                               ensemble=16, span=50.0)
    assert res.verdict == "no-candidate-found"
    assert res.best_residual > 0.1
    assert res.n_shots == 16


def test_search_negative_speed_uses_reversal():
    res = monotone_wave_search(TwParams(alpha=1.0, beta=0.0, c=-0.5, d=2.0, r=2.0),
                               ensemble=8, span=40.0)
    assert res.reversed_problem
    assert res.verdict in ("no-candidate-found", "candidate-found")
    assert res.verdict == "no-candidate-found"


def test_bounded_ensemble_contains_oscillations():
    # shooting 100 random rest-line-transverse perturbations: a reproducible
    # fraction of the bounded trajectories alternates the sign of W - R
    # (measured ~16-20% across parameter draws; the mechanism exists, it is
    # not a majority behavior)
    rng = np.random.default_rng(7)
    p = TwParams(alpha=0.7, beta=0.3, c=1.0, d=2.0, r=1.0)
    kernel = np.array([1.0, 0.0, 1.0, 0.0]) / np.sqrt(2.0)
    bounded = oscillating = 0
    for _ in range(100):
        v = rng.standard_normal(4)
        v -= kernel * np.dot(v, kernel)
        v *= 0.02 / np.linalg.norm(v)
        traj = shoot(p, v, span=50.0)
        if traj.reason == "span_end":
            bounded += 1
            if sign_changes(traj) >= 1:
                oscillating += 1
    assert bounded >= 30
    assert oscillating >= 5
