"""Excitation transport in periodically driven, dissipative qubit chains.

Exact time-ordered Lindblad propagation, the second-order Floquet-Magnus
effective generator, transport efficiency solvers and parameter sweeps.
"""

from .dynamics import Trajectory, propagate_exact, propagate_stroboscopic, propagator, trace_distance
from .efficiency import (EfficiencyResult, Method, SweepResult, amplitude_sweep, baseline_eta0, contour_grid,
                         daoqt_sweep, efficiency, efficiency_exact, efficiency_fmm, efficiency_static,
                         efficiency_steady_state, eta0_closed_form, homogeneous_drive_check, parameter_sweep)
from .floquet_magnus import (FloquetGenerator, floquet_generator, magnus_term0, magnus_term1,
                             magnus_term2_closed_form, magnus_term2_quadrature, micromotion_kick)
from .liouvillian import SplitLiouvillian, assemble
from .model import (DensityMatrix, DriveKind, DriveSpec, InvalidConfigError, NetworkSpec, NoiseSpec,
                    SimulationConfig, Tolerances, load_config, localized_state, make_linear_chain)
from .presets import PRESETS, offdiag_config, onsite_config

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix", "DriveKind", "DriveSpec", "InvalidConfigError", "NetworkSpec", "NoiseSpec",
    "SimulationConfig", "Tolerances", "load_config", "localized_state", "make_linear_chain",
    "SplitLiouvillian", "assemble",
    "Trajectory", "propagate_exact", "propagate_stroboscopic", "propagator", "trace_distance",
    "FloquetGenerator", "floquet_generator", "magnus_term0", "magnus_term1", "magnus_term2_closed_form",
    "magnus_term2_quadrature", "micromotion_kick",
    "EfficiencyResult", "Method", "SweepResult", "amplitude_sweep", "baseline_eta0", "contour_grid",
    "daoqt_sweep", "efficiency", "efficiency_exact", "efficiency_fmm", "efficiency_static",
    "efficiency_steady_state", "eta0_closed_form", "homogeneous_drive_check", "parameter_sweep",
    "PRESETS", "offdiag_config", "onsite_config",
]
