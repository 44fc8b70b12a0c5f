"""Variational coherent-state ground-state solver for the Ohmic spin-boson model."""

from .ansatz import (
    ModelParams,
    VariationalState,
    energy,
    energy_and_gradient,
    gradient,
    norm_squared,
    overlap,
    pair_kernels,
    sh_displacements,
    sh_solve,
)
from .bath import (
    DiscretizedBath,
    SpectralDensity,
    default_num_modes,
    discretize,
    spectral_density,
)
from .kernels import BACKEND
from .observables import (
    MomentTable,
    WignerCurve,
    coherence,
    default_x_grid,
    mode_moments,
    sigma_z,
    wigner_diag,
    wigner_from_moments,
    wigner_offdiag,
)
from .optimizer import OptimizerConfig, SolveReport, grow, optimize, solve_sequence
from .oracles import (
    EDProblem,
    EDResult,
    ToulouseParams,
    ed_ground,
    onepolaron_thermal,
    toulouse_coherence,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DiscretizedBath",
    "EDProblem",
    "EDResult",
    "ModelParams",
    "MomentTable",
    "OptimizerConfig",
    "SolveReport",
    "SpectralDensity",
    "ToulouseParams",
    "VariationalState",
    "WignerCurve",
    "coherence",
    "default_num_modes",
    "default_x_grid",
    "discretize",
    "ed_ground",
    "energy",
    "energy_and_gradient",
    "gradient",
    "grow",
    "mode_moments",
    "norm_squared",
    "onepolaron_thermal",
    "optimize",
    "overlap",
    "pair_kernels",
    "sh_displacements",
    "sh_solve",
    "spectral_density",
    "sigma_z",
    "solve_sequence",
    "toulouse_coherence",
    "wigner_diag",
    "wigner_from_moments",
    "wigner_offdiag",
]
