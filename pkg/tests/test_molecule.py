import numpy as np
import pytest

from onephoton.molecule import (
    MolecularModel,
    build_bright_dark_model,
    eigensystem,
    resonant_mode_grid,
    transition_dipoles,
)


def random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def test_single_bright_state():
    m = build_bright_dark_model(2.0, 0.1, 0, 0.0, 1.0)
    eig = eigensystem(m)
    assert m.dim == 1
    assert eig.energies.tolist() == [2.0]
    assert abs(eig.vectors[0, 0]) == 1


def test_two_level_splitting():
    delta, v = 0.3, 0.07
    m = build_bright_dark_model(1.0, v, 1, 0.0, 1.0, dark_offset=delta)
    e = eigensystem(m).energies
    assert e[1] - e[0] == pytest.approx(np.sqrt(delta**2 + 4 * v**2), abs=1e-14)


def test_resonant_pair():
    e = eigensystem(build_bright_dark_model(1.0, 0.1, 1, 0.0, 1.0)).energies
    np.testing.assert_allclose(e, [0.9, 1.1], atol=1e-14)


def test_coupling_mixes_every_eigenstate():
    m = build_bright_dark_model(1.0, 0.1, 3, 0.3, 1.0, dark_offset=0.05)
    u = eigensystem(m).vectors
    bright = np.abs(u[m.tag_mask("S2")]) ** 2
    dark = np.abs(u[m.tag_mask("S1")]) ** 2
    assert np.all(bright.sum(axis=0) > 1e-6)
    assert np.all(dark.sum(axis=0) > 1e-6)


def test_require_mixing_flag():
    with pytest.raises(ValueError):
        build_bright_dark_model(1.0, 0.0, 2, 0.1, 1.0, require_mixing=True)
    build_bright_dark_model(1.0, 0.0, 2, 0.1, 1.0)


def test_rejects_zero_dipole():
    with pytest.raises(ValueError):
        build_bright_dark_model(1.0, 0.1, 1, 0.0, 0.0)
    with pytest.raises(ValueError):
        MolecularModel(0.0, np.eye(2), [0, 0], ("S2", "S1"))


def test_jitter_is_seeded():
    a = build_bright_dark_model(1.0, 0.1, 3, 0.2, 1.0, dark_jitter=0.01, seed=7)
    b = build_bright_dark_model(1.0, 0.1, 3, 0.2, 1.0, dark_jitter=0.01, seed=7)
    c = build_bright_dark_model(1.0, 0.1, 3, 0.2, 1.0, dark_jitter=0.01, seed=8)
    np.testing.assert_array_equal(a.hamiltonian, b.hamiltonian)
    assert not np.array_equal(a.hamiltonian, c.hamiltonian)


def test_diagonal_input():
    m = MolecularModel(0.0, np.diag([1.0, 2.0, 3.5]), [1, 0.5, 0], ("S2", "S2", "S1"))
    eig = eigensystem(m)
    np.testing.assert_array_equal(eig.energies, [1.0, 2.0, 3.5])
    np.testing.assert_array_equal(eig.vectors, np.eye(3))


def test_rejects_non_hermitian():
    h = np.array([[1.0, 0.2], [0.1, 2.0]])
    with pytest.raises(ValueError, match="Hermitian"):
        eigensystem(MolecularModel(0.0, h, [1, 0], ("S2", "S1")))


@pytest.mark.parametrize("seed", range(5))
def test_random_reconstruction(seed):
    h = random_hermitian(6, seed)
    m = MolecularModel(-10.0, h, np.ones(6), ("S2",) * 6)
    eig = eigensystem(m)
    u = eig.vectors
    assert np.max(np.abs(u.conj().T @ u - np.eye(6))) < 1e-10
    assert np.max(np.abs(eig.reconstruct() - h)) < 1e-10
    assert np.all(np.diff(eig.energies) > 0)


def test_degenerate_cluster_shares_one_mode():
    h = np.diag([1.0, 1.0, 2.0])
    m = MolecularModel(0.0, h, [0.2, 1.0, 0.5], ("S1", "S2", "S2"))
    eig = eigensystem(m)
    assert eig.n_clusters == 2
    assert eig.labels == [(0, 0), (0, 1), (1, 0)]
    grid = resonant_mode_grid(eig, 0.0)
    np.testing.assert_array_equal(grid.frequencies, [1.0, 2.0])
    # both cluster-0 states carry dipole; larger weight on the dipole basis goes first
    dip = transition_dipoles(eig, m)
    assert abs(dip.elements[0]) == pytest.approx(1.0)
    assert abs(dip.elements[1]) == pytest.approx(0.2)


def test_near_degenerate_chain_is_transitive():
    tol = 1e-9
    h = np.diag([1.0, 1.0 + 0.8 * tol, 1.0 + 1.6 * tol, 1.5])
    m = MolecularModel(0.0, h, [1, 1, 1, 1], ("S2",) * 4)
    eig = eigensystem(m, tol)
    assert eig.cluster.tolist() == [0, 0, 0, 1]
    # every state belongs to exactly one cluster
    assert sorted(eig.labels) == sorted(set(eig.labels))


def test_identity_eigenvectors_give_raw_dipoles():
    d = np.array([0.3, 1.2j, 0.0])
    m = MolecularModel(0.0, np.diag([1.0, 2.0, 3.0]), d, ("S2", "S2", "S1"))
    np.testing.assert_allclose(transition_dipoles(eigensystem(m), m).elements, d)


def test_uncoupled_dark_states_are_dark():
    m = build_bright_dark_model(1.0, 0.0, 2, 0.3, 1.0)
    eig = eigensystem(m)
    dip = transition_dipoles(eig, m)
    assert np.count_nonzero(np.abs(dip.elements) > 1e-15) == 1


@pytest.mark.parametrize("v", [0.01, 0.1, 0.5])
def test_dipole_norm_conserved(v):
    m = build_bright_dark_model(1.0, v, 4, 0.4, 0.8 + 0.3j, dark_offset=0.02)
    dip = transition_dipoles(eigensystem(m), m)
    assert np.all(np.abs(dip.elements) > 0)
    assert dip.norm_squared == pytest.approx(abs(0.8 + 0.3j) ** 2, abs=1e-10)


def test_mode_grid_matches_cluster_energies():
    m = build_bright_dark_model(1.0, 0.1, 1, 0.0, 1.0, ground_energy=-0.5)
    eig = eigensystem(m)
    grid = resonant_mode_grid(eig, m.ground_energy, volume=2.0, z=0.1)
    np.testing.assert_allclose(grid.frequencies, eig.cluster_energies + 0.5, atol=1e-12)
    np.testing.assert_allclose(grid.frequencies, [0.9, 1.1], atol=1e-12)
    assert grid.volume == 2.0 and grid.z == 0.1


def test_mode_grid_rejects_states_below_ground():
    m = MolecularModel(0.0, np.diag([-0.1, 1.0]), [1, 1], ("S2", "S2"))
    with pytest.raises(ValueError, match="above the ground"):
        resonant_mode_grid(eigensystem(m), 0.0)
