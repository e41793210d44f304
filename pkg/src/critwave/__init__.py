"""critwave: numerical laboratory for critical competition-diffusion dynamics.

The package has three legs: a Cauchy solver for the two-species system on
the line (solver), closed-form super/sub-solution envelopes with residual
and ordering verification (analytic, bounds), and front diagnostics plus a
traveling-wave phase-plane explorer (diagnostics, phase_plane).  The cli
module wires them into the `critwave` command.
"""

from .core import (CompetitionParams, DerivedSpeeds, FieldState, Grid1D,
                   reaction_rhs, residual_operators, wave_speeds)
from .analytic import (ExpTailKernel, IndicatorKernel, KppWave, WeightG,
                       exp_tail_heat, exp_tail_heat_dt, g_weight, g_weight_dt,
                       indicator_heat, indicator_heat_dt, kpp_decay_rate,
                       kpp_profile)
from .solver import (FieldSpec, InitialData, SimulationTrace, SolverConfig,
                     default_dt, front_observer, run, run_scalar_kpp, step)
from .bounds import (BoundEnvelope, ExpandingCone, SubSolParams, SuperSolParams,
                     build_sub_envelope, build_super_envelope,
                     default_sub_params, default_super_params, find_onset,
                     kernel_comparison_report, ordering_scan, residual_sign_scan,
                     sub_eval, super_eval, super_eval_both_branches,
                     tune_sub_amplitude, tune_super_amplitude)
from .diagnostics import (BumpTrace, FitResult, FrontTrace, StrongWeakSpeeds,
                          bump_metrics, bump_trace, fit_front_asymptotics,
                          fit_log_shift, fit_speed, front_trace,
                          gaussian_factor_fit, level_set, profile_distance,
                          strongweak_speeds)
from .phase_plane import (EquilibriumLinearization, Trajectory, TwParams,
                          TwState, WaveSearchResult, equilibrium_jacobian,
                          monotone_wave_search, shoot, sign_changes, tw_field)
from . import errors

__version__ = "0.1.0"
