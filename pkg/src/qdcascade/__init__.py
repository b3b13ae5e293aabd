"""Polarization-entangled photon pairs from a driven quantum-dot cascade.

Simulates a four-level biexciton cascade coupled to two degenerate
polarized cavity modes and a thermal phonon environment, propagates the
polaron-transformed master equation through a two-photon excitation
pulse, and reduces two-time photon correlations to the 4x4 polarization
density matrix of the emitted pair with its entanglement figures.
"""

from .correlations import (DegenerateSignalError, PairGrids, TwoPhotonMatrix,
                           build_tpdm, compute_pair_grids, ettocf_series,
                           integrate_tpdm, two_time_correlator)
from .dynamics import EvolutionDiagnostics, Trajectory, evolve, propagate_from
from .liouvillian import (CascadeGenerator, ModelConfig, PulseShape,
                          build_generator, build_liouvillian_terms,
                          coefficient_table)
from .metrics import (EntanglementReport, StarkReport, concurrence,
                      entanglement_report, qber, spin_flip_spectrum,
                      stark_shifts)
from .operators import HilbertLayout, OperatorSet, build_elementary_ops
from .params import (ConfigError, PhysicalParams, ValidationError,
                     ValidityReport, check_polaron_validity, default_params,
                     from_config_dict, load_config, loads_config, run_id,
                     serialize)
from .phonon import (PhononCorrelation, PhononKernel, RateSet, SpectralDensity,
                     build_kernel, rate_curve, tabulate_phi)
from .runner import (RunResult, RunStageError, SweepSpec, compute_run,
                     run_single, run_sweep, write_artifacts)

__version__ = "0.1.0"

__all__ = [
    "CascadeGenerator", "ConfigError", "DegenerateSignalError",
    "EntanglementReport", "EvolutionDiagnostics", "HilbertLayout",
    "ModelConfig", "OperatorSet", "PairGrids", "PhononCorrelation",
    "PhononKernel", "PhysicalParams", "PulseShape", "RateSet", "RunResult",
    "RunStageError", "SpectralDensity", "StarkReport", "SweepSpec",
    "Trajectory", "TwoPhotonMatrix", "ValidationError", "ValidityReport",
    "build_elementary_ops", "build_generator", "build_kernel",
    "build_liouvillian_terms", "build_tpdm", "check_polaron_validity",
    "coefficient_table", "compute_pair_grids", "compute_run", "concurrence",
    "default_params", "entanglement_report", "ettocf_series",
    "evolve", "from_config_dict", "integrate_tpdm", "load_config",
    "loads_config", "propagate_from", "qber", "rate_curve", "run_id",
    "run_single", "run_sweep", "serialize", "spin_flip_spectrum",
    "stark_shifts", "tabulate_phi", "two_time_correlator",
    "write_artifacts",
]
