"""Closed-form one-photon excitation of a molecule by a quantized field.

The molecular density matrix after absorbing one photon is assembled from
per-eigenstate amplitudes and a mode-overlap matrix built from shifted field
coefficients, without ever forming the joint field-molecule state.

Two occupation conventions exist for the sqrt(N_k) carried by the field
amplitude:

* ``"plain"`` overlap + representative occupations in the amplitude table;
  one sqrt(N_k) per mode, the same for every field configuration.
* ``"exact"`` overlap, which folds the per-configuration sqrt(N_k) into the
  overlap sums and uses the per-photon amplitudes. This reproduces the
  literal joint-state partial trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import CoefficientTable, ModeGrid, ThermalWeights, field_amplitude
from .molecule import EigenSystem, TransitionDipoles

PLAIN = "plain"
EXACT = "exact"


def representative_occupations(means) -> np.ndarray:
    """Mean occupation per mode, raised to 1 where it is positive but below 1."""
    means = np.asarray(means, dtype=float)
    return np.where((means > 0) & (means < 1), 1.0, means)


@dataclass(frozen=True)
class AmplitudeTable:
    """Excitation amplitudes A(k, m) = 2 pi i eps(N_k, w_k) <E_k, m| eps.d |E_i>.

    ``per_photon`` holds the amplitude at N_k = 1; ``values`` applies the
    stored occupation per mode.
    """

    per_photon: np.ndarray
    occupations: np.ndarray
    cluster: np.ndarray
    convention: str = "representative"

    @property
    def values(self) -> np.ndarray:
        return self.per_photon * np.sqrt(self.occupations[self.cluster])

    @property
    def n_modes(self) -> int:
        return self.occupations.size


def excitation_amplitudes(
    dipoles: TransitionDipoles,
    grid: ModeGrid,
    occupations=None,
    convention: str = "representative",
) -> AmplitudeTable:
    """Amplitudes for every eigenstate, with mode k driving cluster k.

    ``occupations`` defaults to one photon per mode.
    """
    if dipoles.n_clusters != grid.n_modes:
        raise ValueError(
            f"grid has {grid.n_modes} modes but the eigensystem has {dipoles.n_clusters} clusters"
        )
    if occupations is None:
        occupations = np.ones(grid.n_modes)
        convention = "unit"
    occupations = np.asarray(occupations, dtype=float)
    if occupations.shape != (grid.n_modes,):
        raise ValueError(f"need one occupation per mode, got shape {occupations.shape}")
    if np.any(occupations < 0):
        raise ValueError("occupations must be non-negative")

    unit_field = np.array(
        [field_amplitude(1, w, grid.volume, grid.z) for w in grid.frequencies], dtype=complex
    )
    per_photon = 2j * np.pi * unit_field[dipoles.cluster] * dipoles.elements
    return AmplitudeTable(per_photon, occupations, np.asarray(dipoles.cluster), convention)


@dataclass(frozen=True)
class OverlapMatrix:
    """D[k', k] = sum_M v_k(M) conj(v_k'(M)) with v_k(M) = w_k(M) c(M + e_k)."""

    matrix: np.ndarray
    weighting: str = PLAIN

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.matrix)))


def shifted_coefficients(coeffs: CoefficientTable, weighting: str = PLAIN) -> np.ndarray:
    """Stack of v_k(M) = w_k(M) c(M + e_k), one flattened row per mode.

    M runs over the same box as the table; rows vanish where M + e_k leaves it.
    ``weighting="exact"`` sets w_k(M) = sqrt(M_k + 1), otherwise w_k = 1.
    """
    if weighting not in (PLAIN, EXACT):
        raise ValueError(f"unknown weighting {weighting!r}")
    c = coeffs.values
    n = coeffs.n_cut
    rows = []
    for k in range(coeffs.n_modes):
        v = np.zeros_like(c)
        src = [slice(None)] * c.ndim
        dst = [slice(None)] * c.ndim
        src[k] = slice(1, n + 1)
        dst[k] = slice(0, n)
        shifted = c[tuple(src)]
        if weighting == EXACT:
            shape = [1] * c.ndim
            shape[k] = n
            shifted = shifted * np.sqrt(np.arange(1, n + 1)).reshape(shape)
        v[tuple(dst)] = shifted
        rows.append(v.ravel())
    return np.array(rows)


def overlap_matrix(coeffs: CoefficientTable, weighting: str = PLAIN) -> OverlapMatrix:
    v = shifted_coefficients(coeffs, weighting)
    return OverlapMatrix(v.conj() @ v.T, weighting)


@dataclass(frozen=True)
class MolecularDensityMatrix:
    """Excited-state density matrix in the eigenbasis, left unnormalized.

    Its trace is the one-photon excitation weight. ``elapsed`` is the free
    evolution time since the end of the pulse.
    """

    matrix: np.ndarray
    elapsed: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalized(self) -> np.ndarray:
        tr = self.trace
        if not tr > 0:
            raise ZeroDivisionError("density matrix has zero trace: nothing was excited")
        return self.matrix / tr

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])


def coherent_rho_mol(amps: AmplitudeTable, overlap: OverlapMatrix) -> MolecularDensityMatrix:
    """rho[(k,m),(k',m')] = D[k', k] A(k, m) conj(A(k', m')).

    An ``exact`` overlap already carries the sqrt(N_k) factors, so it is
    combined with the per-photon amplitudes instead of ``amps.values``.
    """
    if overlap.matrix.shape != (amps.n_modes, amps.n_modes):
        raise ValueError("overlap matrix and amplitude table disagree on the number of modes")
    a = amps.per_photon if overlap.weighting == EXACT else amps.values
    cl = amps.cluster
    rho = np.outer(a, a.conj()) * overlap.matrix[np.ix_(cl, cl)].T
    return MolecularDensityMatrix(rho)


def occupation_moments(weights: ThermalWeights) -> np.ndarray:
    """Sum_N p_N N_k per mode, over the truncated table."""
    n = np.arange(weights.n_cut + 1)
    return np.array([np.dot(n, weights.marginal(k)) for k in range(weights.n_modes)])


def thermal_rho_mol(weights: ThermalWeights, amps: AmplitudeTable) -> MolecularDensityMatrix:
    """Incoherent sum of number-state excitations; only same-cluster blocks survive.

    Each number state N contributes N_k |a(k,m)><a(k,m')| per mode, with a the
    per-photon amplitude, so the mode-k block carries sum_N p_N N_k.
    """
    if weights.n_modes != amps.n_modes:
        raise ValueError("thermal weights and amplitude table disagree on the number of modes")
    a = amps.per_photon
    cl = amps.cluster
    same = cl[:, None] == cl[None, :]
    factor = np.where(same, occupation_moments(weights)[cl][:, None], 0.0)
    return MolecularDensityMatrix(np.outer(a, a.conj()) * factor)


def evolve_rho(rho: MolecularDensityMatrix, eig: EigenSystem, dt: float) -> MolecularDensityMatrix:
    """Free evolution: element (a, b) picks up exp(-i (E_a - E_b) dt).

    Cluster energies are used, so degenerate blocks are left untouched.
    """
    if dt < 0:
        raise ValueError(f"evolution time must be non-negative, got {dt}")
    e = eig.state_cluster_energies()
    phase = np.exp(-1j * np.subtract.outer(e, e) * dt)
    return MolecularDensityMatrix(rho.matrix * phase, rho.elapsed + dt)


def frobenius_relative_error(a, b) -> float:
    """||a - b||_F / ||b||_F (absolute when b vanishes)."""
    a = a.matrix if isinstance(a, MolecularDensityMatrix) else np.asarray(a)
    b = b.matrix if isinstance(b, MolecularDensityMatrix) else np.asarray(b)
    ref = np.linalg.norm(b)
    diff = np.linalg.norm(a - b)
    return float(diff / ref) if ref > 0 else float(diff)
