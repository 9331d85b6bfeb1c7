"""supercl: GSNR and throughput engine for super-(C+L) WDM links.

Models frequency-dependent fiber, inter-channel stimulated Raman
scattering, optional backward Raman pumping, closed-form nonlinear
interference with a numerically integrated reference, and derivative-free
launch-power optimization.
"""

__version__ = "0.1.0"

from .fiber import (
    FiberSpan, Link, RamanPumpSet, SampledCurve, alpha_linear, beta2, beta3,
    build_link, default_nf_curve, make_default_smf, raman_coupling,
)
from .grid import (
    Band, ChannelGrid, DEFAULT_BANDS, PowerSpectrum, SUPER_C, SUPER_L,
    build_grid, default_grid,
)
from .linkbudget import (
    GsnrReport, LinkOptions, OverAmplifiedSpanError, TransponderCurve,
    ase_power, default_transponder_curve, run_link, throughput_of,
)
from .nli import NliContribution, accumulate_link_nli, nli_cfm, nli_numeric_gn
from .optimize import (
    CUBIC, CompareCase, FLAT_ALL_BANDS, FLAT_PER_BAND, LaunchPolicy,
    OptimizationResult, OptimizeOptions, THREE_DB, compare_scenarios,
    maximize_throughput, nelder_mead, policy_to_spectrum, solve_three_db,
)
from .propagation import (
    ConvergenceError, PowerEvolution, evolve_signals, evolve_with_counterpumps,
    normalized_profile, normalized_profiles,
)
from .scenario import Scenario, ScenarioError, build_system, parse_scenario, scenario_to_toml
from .units import dbm_to_mw, mw_to_dbm
