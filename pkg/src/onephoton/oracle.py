"""Brute-force referee for the closed-form absorption path.

Builds the joint field-molecule state after one photon is absorbed, term by
term over number states, then traces out the field explicitly. Deliberately
naive: meant for <= 4 modes and n_cut <= 4.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .absorption import MolecularDensityMatrix
from .field import CoefficientTable, ModeGrid, ThermalWeights, field_amplitude
from .molecule import TransitionDipoles


@dataclass(frozen=True)
class JointState:
    """Amplitudes over (eigenstate j, field occupations M left after absorption).

    ``amplitudes[j, col]`` pairs eigenstate j with ``field_states[col]``.
    """

    amplitudes: np.ndarray
    field_states: tuple[tuple[int, ...], ...]
    n_cut: int

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def as_dict(self) -> dict[tuple[int, tuple[int, ...]], complex]:
        return {
            (j, m): complex(self.amplitudes[j, col])
            for j in range(self.amplitudes.shape[0])
            for col, m in enumerate(self.field_states)
            if self.amplitudes[j, col] != 0
        }


def joint_final_state(
    coeffs: CoefficientTable, dipoles: TransitionDipoles, grid: ModeGrid
) -> JointState:
    """Sum over N and k of 2 pi i eps(N_k, w_k) <E_k,m|eps.d|E_i> c(N) |E_k,m>|N - e_k>."""
    if coeffs.n_modes != grid.n_modes or dipoles.n_clusters != grid.n_modes:
        raise ValueError("field table, mode grid and dipole clusters must agree on the mode count")
    states_of_mode = [np.flatnonzero(dipoles.cluster == k) for k in range(grid.n_modes)]
    acc: dict[tuple[int, tuple[int, ...]], complex] = defaultdict(complex)
    for occ, c in coeffs.items():
        if c == 0:
            continue
        for k, n_k in enumerate(occ):
            if n_k == 0:
                continue
            eps = field_amplitude(n_k, grid.frequencies[k], grid.volume, grid.z)
            after = occ[:k] + (n_k - 1,) + occ[k + 1 :]
            for j in states_of_mode[k]:
                acc[(int(j), after)] += 2j * np.pi * eps * dipoles.elements[j] * c

    field_states = tuple(sorted({m for _, m in acc}))
    col = {m: i for i, m in enumerate(field_states)}
    amps = np.zeros((dipoles.elements.size, len(field_states)), dtype=complex)
    for (j, m), value in acc.items():
        amps[j, col[m]] = value
    return JointState(amps, field_states, coeffs.n_cut)


def joint_density_matrix(psi: JointState) -> np.ndarray:
    """|Psi_f><Psi_f| as a tensor indexed [j, M, l, M']."""
    a = psi.amplitudes
    return np.einsum("jm,ln->jmln", a, a.conj())


def partial_trace_field(psi: JointState) -> MolecularDensityMatrix:
    """Sum over shared field configurations M of |psi_M><psi_M|."""
    a = psi.amplitudes
    rho = np.zeros((a.shape[0], a.shape[0]), dtype=complex)
    for col in range(a.shape[1]):
        rho += np.outer(a[:, col], a[:, col].conj())
    return MolecularDensityMatrix(rho)


def thermal_oracle_rho(
    weights: ThermalWeights, dipoles: TransitionDipoles, grid: ModeGrid
) -> MolecularDensityMatrix:
    """Probability-weighted sum of single-number-state excitations.

    Summation runs in lexicographic order of N so results are reproducible.
    """
    dim = dipoles.elements.size
    rho = np.zeros((dim, dim), dtype=complex)
    for occ, p in weights.items():
        if p == 0:
            continue
        single = CoefficientTable.number_state(occ, weights.n_cut)
        rho += p * partial_trace_field(joint_final_state(single, dipoles, grid)).matrix
    return MolecularDensityMatrix(rho)


def schmidt_coefficients(psi: JointState) -> np.ndarray:
    return np.linalg.svd(psi.amplitudes, compute_uv=False)


def schmidt_rank(psi: JointState, rtol: float = 1e-10) -> int:
    """Number of Schmidt coefficients above ``rtol`` times the largest; 0 for the zero state."""
    s = schmidt_coefficients(psi)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))
