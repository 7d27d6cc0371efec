"""Molecular models: excited-manifold Hamiltonian, eigenbasis and transition dipoles.

The ground state |E_i> sits outside the excited-manifold Hamiltonian and
couples to it only through the dipole vector ``d_b`` (one scalar per excited
basis state, already projected on the field polarization).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import ModeGrid

BRIGHT_TAG = "S2"
DARK_TAG = "S1"
DEFAULT_DEGENERACY_TOL = 1e-9
HERMITIAN_TOL = 1e-12


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MolecularModel:
    """Ground energy, excited-state Hamiltonian (absolute energies) and dipoles.

    ``tags`` carries the electronic-state label of each excited basis state.
    """

    ground_energy: float
    hamiltonian: np.ndarray
    dipoles: np.ndarray
    tags: tuple[str, ...]

    def __post_init__(self):
        h = _frozen(np.atleast_2d(self.hamiltonian), complex)
        d = _frozen(np.atleast_1d(self.dipoles), complex)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "dipoles", d)
        object.__setattr__(self, "tags", tuple(self.tags))
        n = h.shape[0]
        if h.shape != (n, n):
            raise ValueError(f"Hamiltonian must be square, got shape {h.shape}")
        if d.shape != (n,) or len(self.tags) != n:
            raise ValueError("dipoles and tags must have one entry per basis state")
        if np.all(d == 0):
            raise ValueError("at least one dipole element must be nonzero")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def hermiticity_error(self) -> float:
        h = self.hamiltonian
        return float(np.max(np.abs(h - h.conj().T)))

    def tag_mask(self, tag: str) -> np.ndarray:
        return np.array([t == tag for t in self.tags])


def build_bright_dark_model(
    detuning: float,
    coupling: float,
    n_dark: int,
    dark_spread: float,
    d_bright: complex,
    *,
    dark_offset: float = 0.0,
    ground_energy: float = 0.0,
    require_mixing: bool = False,
    dark_jitter: float = 0.0,
    seed: int | None = None,
) -> MolecularModel:
    """One bright S2 state coupled with strength ``coupling`` to ``n_dark`` dark S1 states.

    The bright state sits at ``ground_energy + detuning``. Dark states are evenly
    spaced over ``+/- dark_spread`` around ``detuning + dark_offset`` (a single
    dark state sits at the centre), optionally perturbed by a seeded uniform
    jitter of half-width ``dark_jitter``.
    """
    if n_dark < 0:
        raise ValueError(f"n_dark must be >= 0, got {n_dark}")
    if d_bright == 0:
        raise ValueError("d_bright must be nonzero")
    if require_mixing and n_dark > 0 and coupling == 0:
        raise ValueError("mixed eigenstates requested but the bright-dark coupling is zero")

    centre = ground_energy + detuning + dark_offset
    if n_dark == 1:
        dark = np.array([centre])
    else:
        dark = np.linspace(centre - dark_spread, centre + dark_spread, n_dark)
    if dark_jitter and n_dark:
        rng = np.random.default_rng(seed)
        dark = dark + rng.uniform(-dark_jitter, dark_jitter, n_dark)

    h = np.diag(np.concatenate([[ground_energy + detuning], dark])).astype(complex)
    h[0, 1:] = coupling
    h[1:, 0] = np.conj(coupling)
    dipoles = np.zeros(n_dark + 1, dtype=complex)
    dipoles[0] = d_bright
    return MolecularModel(ground_energy, h, dipoles, (BRIGHT_TAG,) + (DARK_TAG,) * n_dark)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs of the excited manifold grouped into degeneracy clusters.

    Column ``j`` of ``vectors`` is eigenstate ``j``; ``cluster[j]`` is its
    cluster index k and ``member[j]`` its index m within the cluster.
    """

    energies: np.ndarray
    vectors: np.ndarray
    cluster: np.ndarray
    member: np.ndarray
    cluster_energies: np.ndarray
    tolerance: float

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def n_clusters(self) -> int:
        return self.cluster_energies.size

    @property
    def labels(self) -> list[tuple[int, int]]:
        return list(zip(self.cluster.tolist(), self.member.tolist()))

    def state_cluster_energies(self) -> np.ndarray:
        """Energy of each eigenstate's cluster (exactly equal within a cluster)."""
        return self.cluster_energies[self.cluster]

    def reconstruct(self) -> np.ndarray:
        u = self.vectors
        return u @ np.diag(self.energies) @ u.conj().T

    def to_eigenbasis(self, operator: np.ndarray) -> np.ndarray:
        u = self.vectors
        return u.conj().T @ operator @ u


def _cluster_ascending(energies: np.ndarray, tol: float) -> np.ndarray:
    labels = np.zeros(energies.size, dtype=int)
    for j in range(1, energies.size):
        labels[j] = labels[j - 1] + (energies[j] - energies[j - 1] > tol)
    return labels


def eigensystem(model: MolecularModel, degeneracy_tol: float = DEFAULT_DEGENERACY_TOL) -> EigenSystem:
    """Diagonalize the excited manifold and group eigenvalues into clusters.

    Clusters are chains of eigenvalues each within ``degeneracy_tol`` of the
    next. Inside a cluster, states are ordered by descending weight on the
    bright (S2-tagged, else dipole-carrying) basis states, ties broken by
    their dominant basis index.
    Each eigenvector is phased so its largest component is real and positive.
    """
    if model.hermiticity_error() > HERMITIAN_TOL:
        raise ValueError(
            f"Hamiltonian is not Hermitian (max deviation {model.hermiticity_error():.3e})"
        )
    energies, vectors = np.linalg.eigh(model.hamiltonian)
    cluster = _cluster_ascending(energies, degeneracy_tol)

    bright = model.tag_mask(BRIGHT_TAG)
    if not bright.any():
        bright = model.dipoles != 0
    bright_weight = np.sum(np.abs(vectors[bright, :]) ** 2, axis=0)
    dominant = np.argmax(np.abs(vectors), axis=0)
    order = sorted(
        range(energies.size),
        key=lambda j: (cluster[j], -round(float(bright_weight[j]), 12), int(dominant[j])),
    )
    energies = energies[order]
    vectors = vectors[:, order]
    cluster = cluster[order]

    for j in range(vectors.shape[1]):
        top = vectors[np.argmax(np.abs(vectors[:, j])), j]
        vectors[:, j] *= np.conj(top) / abs(top)

    member = np.zeros_like(cluster)
    for k in np.unique(cluster):
        idx = np.flatnonzero(cluster == k)
        member[idx] = np.arange(idx.size)
    cluster_energies = np.array([energies[cluster == k].mean() for k in np.unique(cluster)])

    return EigenSystem(
        energies=_frozen(energies, float),
        vectors=_frozen(vectors, complex),
        cluster=_frozen(cluster, int),
        member=_frozen(member, int),
        cluster_energies=_frozen(cluster_energies, float),
        tolerance=degeneracy_tol,
    )


@dataclass(frozen=True)
class TransitionDipoles:
    """<E_k, m| eps.d |E_i> for every eigenstate, with the cluster map alongside."""

    elements: np.ndarray
    cluster: np.ndarray

    @property
    def n_clusters(self) -> int:
        return int(self.cluster.max()) + 1 if self.cluster.size else 0

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.elements) ** 2))


def transition_dipoles(eig: EigenSystem, model: MolecularModel) -> TransitionDipoles:
    if eig.vectors.shape[0] != model.dim:
        raise ValueError("eigensystem and model dimensions differ")
    elements = eig.vectors.conj().T @ model.dipoles
    return TransitionDipoles(_frozen(elements, complex), eig.cluster)


def resonant_mode_grid(eig: EigenSystem, ground_energy: float, volume: float = 1.0, z: float = 0.0) -> ModeGrid:
    """One mode per degeneracy cluster, with omega_k = E_k - E_i."""
    omegas = eig.cluster_energies - ground_energy
    if np.any(omegas <= 0):
        raise ValueError(
            f"every cluster must lie above the ground state; got excitation energies {omegas.tolist()}"
        )
    return ModeGrid(omegas, volume=volume, z=z)
