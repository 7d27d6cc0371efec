import math

import numpy as np
import pytest

from onephoton.absorption import (
    EXACT,
    coherent_rho_mol,
    excitation_amplitudes,
    frobenius_relative_error,
    overlap_matrix,
    representative_occupations,
    thermal_rho_mol,
)
from onephoton.field import CoefficientTable, ModeGrid, ThermalWeights, coherent_coefficients, thermal_weights
from onephoton.molecule import MolecularModel, eigensystem, transition_dipoles
from onephoton.oracle import (
    joint_density_matrix,
    joint_final_state,
    partial_trace_field,
    schmidt_rank,
    thermal_oracle_rho,
)


def single_state():
    model = MolecularModel(0.0, [[1.0]], [1.0], ("S2",))
    eig = eigensystem(model)
    return transition_dipoles(eig, model), ModeGrid([1.0])


def test_vacuum_gives_zero_state(make_system):
    s = make_system()
    psi = joint_final_state(coherent_coefficients([0, 0, 0], 2), s.dipoles, s.grid)
    assert psi.norm_squared == 0
    assert np.all(partial_trace_field(psi).matrix == 0)
    assert schmidt_rank(psi) == 0


def test_single_photon_single_state():
    dip, grid = single_state()
    psi = joint_final_state(CoefficientTable.number_state((1,)), dip, grid)
    terms = psi.as_dict()
    assert list(terms) == [(0, (0,))]
    assert abs(terms[(0, (0,))]) == pytest.approx(2 * math.pi)


def test_norm_equals_trace(make_system):
    s = make_system()
    psi = joint_final_state(coherent_coefficients([0.7, 1.1j, 0.4], 3), s.dipoles, s.grid)
    assert psi.norm_squared == pytest.approx(partial_trace_field(psi).trace, rel=1e-12)


def test_explicit_joint_density_trace(make_system):
    s = make_system()
    psi = joint_final_state(coherent_coefficients([0.7, 1.1j, 0.4], 2), s.dipoles, s.grid)
    rho_f = joint_density_matrix(psi)
    traced = np.einsum("jmlm->jl", rho_f)
    np.testing.assert_allclose(traced, partial_trace_field(psi).matrix, atol=1e-12)


def test_single_mode_is_product_state():
    dip, grid = single_state()
    psi = joint_final_state(coherent_coefficients([1.3], 12), dip, grid)
    assert schmidt_rank(psi) == 1
    rho = partial_trace_field(psi)
    m = rho.normalized()
    assert np.real(np.trace(m @ m)) == pytest.approx(1.0, abs=1e-12)


def test_two_mode_coherent_is_entangled(make_system):
    s = make_system(n_dark=1, offset=0.0)
    psi = joint_final_state(coherent_coefficients([1.0, 1.0], 4), s.dipoles, s.grid)
    assert schmidt_rank(psi) == 2


def test_distinguishable_single_photons_leave_no_cross_mode_coherence(make_system):
    s = make_system(n_dark=1, offset=0.0)
    psi = joint_final_state(CoefficientTable.number_state((1, 1)), s.dipoles, s.grid)
    rho = partial_trace_field(psi)
    assert rho.matrix[0, 1] == 0
    assert rho.trace > 0


def test_coherent_three_modes_match_closed_form(make_system):
    s = make_system()
    c = coherent_coefficients([1.0, 0.5 + 0.5j, 0.8], 2)
    oracle = partial_trace_field(joint_final_state(c, s.dipoles, s.grid))
    closed = coherent_rho_mol(excitation_amplitudes(s.dipoles, s.grid), overlap_matrix(c, EXACT))
    assert frobenius_relative_error(closed, oracle) < 1e-10
    assert oracle.hermiticity_error() < 1e-12 * oracle.trace
    assert oracle.min_eigenvalue() > -1e-10 * oracle.trace


def test_thermal_concentrated_weights(make_system):
    s = make_system()
    occ = (1, 2, 0)
    probs = np.zeros((3, 3, 3))
    probs[occ] = 1.0
    w = ThermalWeights(probs, 2, float("nan"), occ)
    direct = partial_trace_field(joint_final_state(CoefficientTable.number_state(occ, 2), s.dipoles, s.grid))
    np.testing.assert_allclose(thermal_oracle_rho(w, s.dipoles, s.grid).matrix, direct.matrix, atol=1e-13)


def test_thermal_matches_closed_form_two_modes(make_system):
    s = make_system(n_dark=1, offset=0.02)
    w = thermal_weights(s.grid, 1.1, 3)
    oracle = thermal_oracle_rho(w, s.dipoles, s.grid)
    closed = thermal_rho_mol(w, excitation_amplitudes(s.dipoles, s.grid))
    assert frobenius_relative_error(closed, oracle) < 1e-10
    assert oracle.matrix[0, 1] == 0


def test_representative_discrepancy_shrinks_with_alpha():
    dip, grid = single_state()
    errors = []
    for alpha in (2.0, 4.0, 8.0):
        c = coherent_coefficients([alpha], 160)
        oracle = partial_trace_field(joint_final_state(c, dip, grid))
        amps = excitation_amplitudes(dip, grid, representative_occupations([alpha**2]))
        errors.append(frobenius_relative_error(coherent_rho_mol(amps, overlap_matrix(c)), oracle))
    assert errors[0] > errors[1] > errors[2]
    # single mode: the only gap is the missing vacuum term, exp(-|alpha|^2)
    np.testing.assert_allclose(errors, np.exp(-np.array([4.0, 16.0, 64.0])), rtol=1e-6, atol=1e-15)


def test_multimode_representative_discrepancy_shrinks(make_system):
    s = make_system(n_dark=1, offset=0.0)
    errors = []
    for alpha in (1.0, 2.0, 3.0):
        c = coherent_coefficients([alpha, alpha], 30)
        oracle = coherent_rho_mol(excitation_amplitudes(s.dipoles, s.grid), overlap_matrix(c, EXACT))
        amps = excitation_amplitudes(s.dipoles, s.grid, representative_occupations([alpha**2] * 2))
        errors.append(frobenius_relative_error(coherent_rho_mol(amps, overlap_matrix(c)), oracle))
    assert errors[0] > errors[1] > errors[2]
