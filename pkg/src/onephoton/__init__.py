"""One-photon molecular absorption from quantized radiation fields."""

from .absorption import (
    EXACT,
    PLAIN,
    AmplitudeTable,
    MolecularDensityMatrix,
    OverlapMatrix,
    coherent_rho_mol,
    evolve_rho,
    excitation_amplitudes,
    overlap_matrix,
    thermal_rho_mol,
)
from .field import (
    CoefficientTable,
    ModeGrid,
    ThermalWeights,
    coherent_coefficients,
    enumerate_number_states,
    field_amplitude,
    thermal_mean_occupation,
    thermal_n_cut,
    thermal_weights,
)
from .molecule import (
    EigenSystem,
    MolecularModel,
    TransitionDipoles,
    build_bright_dark_model,
    eigensystem,
    resonant_mode_grid,
    transition_dipoles,
)

__version__ = "0.1.0"
