"""Matplotlib figure rendering for the CLI report path.

Every command writes PNG figures next to its CSV output.  The Agg backend
is forced so rendering works headless and deterministically.
"""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _save(fig, path):
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def fields_figure(state, path, title=""):
    """Final u and v profiles over x."""
    fig, ax = plt.subplots(figsize=(7, 3.2))
    x = state.grid.x
    ax.plot(x, state.u, label="u", lw=1.0)
    ax.plot(x, state.v, label="v", lw=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_ylim(-0.05, 1.1)
    ax.set_title(title or f"fields at t = {state.t:g}")
    ax.legend(loc="center right")
    ax.grid(alpha=0.25)
    return _save(fig, path)


def space_time_figure(trace, path, species="v"):
    """Heatmap of one species over (t, x) from the stored snapshots."""
    fig, ax = plt.subplots(figsize=(7, 3.6))
    data = np.array([getattr(s, species) for s in trace.snapshots])
    times = [s.t for s in trace.snapshots]
    x = trace.grid.x
    pcm = ax.pcolormesh(x, times, data, shading="nearest", cmap="viridis",
                        vmin=0.0, vmax=1.0)
    fig.colorbar(pcm, ax=ax, label=species)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(f"{species}(t, x)")
    return _save(fig, path)


def fronts_figure(fronts, fits, path):
    """Front positions over time with fitted speeds."""
    fig, ax = plt.subplots(figsize=(7, 3.2))
    for front, fit in zip(fronts, fits):
        label = f"{front.species} level {front.level:g}"
        if fit is not None:
            label += f" (speed {fit.slope:.4g})"
        ax.plot(front.times, front.positions, lw=1.0, label=label)
        if fit is not None:
            tt = np.array(fit.window)
            ax.plot(tt, fit.intercept + fit.slope * tt, "k--", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("front position")
    ax.legend()
    ax.grid(alpha=0.25)
    return _save(fig, path)


def bump_figure(bump, metrics, path):
    """Central decay of u(t,0) and 1 - v(t,0) on log-log axes."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(bump.times, bump.u_center, label=f"u(t,0), slope {metrics['slope_u0']:.3f}")
    ax.loglog(bump.times, bump.one_minus_v_center,
              label=f"1-v(t,0), slope {metrics['slope_one_minus_v0']:.3f}")
    t = bump.times
    ax.loglog(t, metrics["C_low"] * t**-0.5, "k:", lw=0.8, label="t^{-1/2} floor")
    ax.loglog(t, metrics["C_high"] * t**(-metrics["k_star"]), "k--", lw=0.8,
              label=f"t^{{-{metrics['k_star']:g}}} cap")
    ax.set_xlabel("t")
    ax.set_ylabel("central value")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.25, which="both")
    return _save(fig, path)


def bramson_figure(front, c, log_fit, path):
    """Front delay behind c t against ln t with the fitted logarithmic slope."""
    fig, ax = plt.subplots(figsize=(6, 4))
    keep = front.times > 0
    t = front.times[keep]
    y = front.positions[keep] - c * t
    ax.plot(np.log(t), y - y[0], lw=1.0, label=f"x(t) - {c:.5g} t (shifted)")
    lt = np.log(np.array(log_fit.window))
    ax.plot(lt, log_fit.slope * lt + log_fit.intercept - y[0], "k--",
            label=f"slope {log_fit.slope:.4f} ln t")
    ax.set_xlabel("ln t")
    ax.set_ylabel("front delay")
    ax.legend()
    ax.grid(alpha=0.25)
    return _save(fig, path)


def profile_overlay_figure(state, wave, species, anchor, path):
    """Simulated profile against the anchored traveling wave."""
    fig, ax = plt.subplots(figsize=(7, 3.2))
    x = state.grid.x
    mask = x >= 0
    ax.plot(x[mask], getattr(state, species)[mask], lw=1.2, label=f"{species}(t={state.t:g})")
    ax.plot(x[mask], wave.value(x[mask] - anchor), "k--", lw=1.0, label="traveling wave")
    ax.set_xlabel("x")
    ax.set_ylabel(species)
    ax.grid(alpha=0.25)
    ax.legend()
    return _save(fig, path)


def scan_figure(env, report, path, n_t=120, n_x=201):
    """Per-time extrema of the envelope residuals across the scan window."""
    t_min, t_max = report.t_range
    t = np.linspace(t_min, t_max, n_t)
    frac = np.linspace(-0.999, 0.999, n_x)
    T = np.repeat(t[:, None], n_x, axis=1)
    X = T * frac[None, :] * env.cone.c_edge
    n1, n2 = env.residuals(T, X)
    fig, ax = plt.subplots(figsize=(6.5, 4))
    if env.kind == "super":
        ax.plot(t, n1.min(axis=1), label="min N1 (want >= 0)")
        ax.plot(t, n2.max(axis=1), label="max N2 (want <= 0)")
    else:
        ax.plot(t, n1.max(axis=1), label="max N1 (want <= 0)")
        ax.plot(t, n2.min(axis=1), label="min N2 (want >= 0)")
    ax.axhline(0.0, color="k", lw=0.6)
    ax.axhline(report.eps, color="r", lw=0.5, ls=":")
    ax.axhline(-report.eps, color="r", lw=0.5, ls=":")
    ax.set_xlabel("t")
    ax.set_ylabel("residual")
    ax.set_yscale("symlog", linthresh=report.eps)
    ax.set_title(f"{env.kind} envelope residual signs")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.25)
    return _save(fig, path)


def ordering_figure(report, path):
    """Ordering violations per snapshot time."""
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    t = np.array(report.times)
    ax.plot(t, report.violations_u, "o-", ms=3, label="u ordering violation")
    ax.plot(t, report.violations_v, "s-", ms=3, label="v ordering violation")
    ax.axhline(report.tolerance, color="r", lw=0.6, ls=":", label="tolerance")
    if report.onset_time is not None:
        ax.axvline(report.onset_time, color="k", lw=0.8, ls="--",
                   label=f"onset {report.onset_time:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("max signed violation")
    ax.set_yscale("symlog", linthresh=max(report.tolerance * 1e-4, 1e-16))
    ax.legend(fontsize=8)
    ax.grid(alpha=0.25)
    return _save(fig, path)


def wave_profile_figure(wave, path):
    """Traveling-wave profile and its derivative."""
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    ax.plot(wave.xi, wave.V, label="V")
    ax.plot(wave.xi, wave.Vp, label="V'")
    ax.set_xlabel("moving coordinate")
    ax.set_title(f"speed {wave.c:.5g}, tail rate {wave.lam:.5g}")
    ax.legend()
    ax.grid(alpha=0.25)
    return _save(fig, path)


def phase_search_figure(c_values, residuals, threshold, path):
    """Connection residual against wave speed (cap stands in for 'no candidate')."""
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    cap = 10.0
    shown = [min(r, cap) if math.isfinite(r) else cap for r in residuals]
    ax.plot(c_values, shown, "o", ms=4)
    ax.axhline(threshold, color="r", lw=0.8, ls=":", label=f"candidate threshold {threshold:g}")
    ax.axhline(cap, color="k", lw=0.5, ls="--", label="no qualifying trajectory (capped)")
    ax.set_xlabel("wave speed c")
    ax.set_ylabel("best connection residual")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.25)
    return _save(fig, path)


def trajectory_figure(traj, path):
    """Oscillation coordinate W - R and phase projection of a shot trajectory."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(traj.xi, traj.w_minus_r, lw=1.0)
    ax1.axhline(0.0, color="k", lw=0.5)
    ax1.set_xlabel("xi")
    ax1.set_ylabel("W - R")
    ax1.grid(alpha=0.25)
    ax2.plot(traj.states[:, 0], traj.states[:, 2], lw=1.0)
    ax2.set_xlabel("W")
    ax2.set_ylabel("R")
    ax2.grid(alpha=0.25)
    fig.suptitle(f"terminated: {traj.reason}")
    return _save(fig, path)
