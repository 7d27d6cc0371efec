"""Radiation-field states on a discrete set of plane-wave modes.

Natural units throughout (hbar = k_B = eps0 = c = 1), so frequencies,
energies and temperatures share a single unit.

Multimode tables are stored densely as arrays of shape ``(n_cut + 1,) * n_modes``
indexed by the occupation vector ``N = (N_1, ..., N_max)``; row-major order of
that array is the lexicographic order of :func:`enumerate_number_states`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

DEFAULT_ENUMERATION_CAP = 10**6
DEFAULT_N_CUT = 4

# Below this occupation factorials are exact; above it they go through lgamma.
_LOG_FACTORIAL_THRESHOLD = 20


class EnumerationCapError(ValueError):
    """Raised when a number-state table would exceed the enumeration cap."""

    def __init__(self, n_modes: int, n_cut: int, cap: int):
        self.n_modes = n_modes
        self.n_cut = n_cut
        self.cap = cap
        self.suggested_n_cut = max_n_cut_within_cap(n_modes, cap)
        super().__init__(
            f"{(n_cut + 1)}^{n_modes} number states exceeds the cap of {cap}; "
            f"use n_cut <= {self.suggested_n_cut} for {n_modes} modes"
        )


def max_n_cut_within_cap(n_modes: int, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    n_cut = 0
    while (n_cut + 2) ** n_modes <= cap:
        n_cut += 1
    return n_cut


def check_enumeration_size(n_modes: int, n_cut: int, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    if n_cut < 0:
        raise ValueError(f"n_cut must be >= 0, got {n_cut}")
    size = (n_cut + 1) ** n_modes
    if size > cap:
        raise EnumerationCapError(n_modes, n_cut, cap)
    return size


@dataclass(frozen=True)
class ModeGrid:
    """Radiation modes sharing one cavity volume, propagation point and polarization."""

    frequencies: np.ndarray
    volume: float = 1.0
    z: float = 0.0
    polarization: str = "x"

    def __post_init__(self):
        freqs = np.atleast_1d(np.asarray(self.frequencies, dtype=float)).copy()
        freqs.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        if freqs.ndim != 1 or freqs.size < 1:
            raise ValueError("a mode grid needs at least one mode")
        if np.any(freqs <= 0):
            raise ValueError(f"mode frequencies must be positive, got {freqs.tolist()}")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("mode frequencies must be strictly increasing")
        if not self.volume > 0:
            raise ValueError(f"cavity volume must be positive, got {self.volume}")

    @property
    def n_modes(self) -> int:
        return int(self.frequencies.size)


def enumerate_number_states(
    grid: ModeGrid | int, n_cut: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[tuple[int, ...]]:
    """All occupation vectors with every component in ``[0, n_cut]``, lexicographically."""
    n_modes = grid if isinstance(grid, int) else grid.n_modes
    check_enumeration_size(n_modes, n_cut, cap)
    return [tuple(int(n) for n in idx) for idx in np.ndindex(*(n_cut + 1,) * n_modes)]


class _NumberStateTable:
    """Shared behaviour of dense tables over truncated number states."""

    values: np.ndarray
    n_cut: int

    @property
    def n_modes(self) -> int:
        return self.values.ndim

    def __getitem__(self, index: Sequence[int]):
        index = tuple(index)
        if len(index) != self.n_modes:
            raise KeyError(f"expected {self.n_modes} occupations, got {index}")
        if any(n < 0 or n > self.n_cut for n in index):
            return 0.0 * self.values.flat[0]
        return self.values[index]

    def items(self) -> Iterator[tuple[tuple[int, ...], complex | float]]:
        for idx in np.ndindex(*self.values.shape):
            yield tuple(int(n) for n in idx), self.values[idx]

    def __len__(self) -> int:
        return self.values.size


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CoefficientTable(_NumberStateTable):
    """Complex amplitudes c(N) of a pure field state on the truncated number basis."""

    values: np.ndarray
    n_cut: int

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=complex)))
        if self.values.shape != (self.n_cut + 1,) * self.values.ndim:
            raise ValueError(f"table shape {self.values.shape} does not match n_cut={self.n_cut}")
        if self.norm_squared > 1 + 1e-12:
            raise ValueError(f"sum |c|^2 = {self.norm_squared} exceeds 1")

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    @property
    def truncation_deficit(self) -> float:
        return 1.0 - self.norm_squared

    @classmethod
    def number_state(cls, occupations: Sequence[int], n_cut: int | None = None) -> "CoefficientTable":
        """A single number state |N> with unit coefficient."""
        occupations = tuple(int(n) for n in occupations)
        if any(n < 0 for n in occupations):
            raise ValueError(f"occupations must be non-negative, got {occupations}")
        if n_cut is None:
            n_cut = max(occupations)
        if max(occupations) > n_cut:
            raise ValueError(f"occupation {max(occupations)} exceeds n_cut={n_cut}")
        check_enumeration_size(len(occupations), n_cut)
        values = np.zeros((n_cut + 1,) * len(occupations), dtype=complex)
        values[occupations] = 1.0
        return cls(values, n_cut)


@dataclass(frozen=True)
class ThermalWeights(_NumberStateTable):
    """Probabilities p_N of a thermal mixture of number states."""

    values: np.ndarray
    n_cut: int
    temperature: float
    mean_occupations: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))
        object.__setattr__(self, "mean_occupations", _frozen(np.asarray(self.mean_occupations, dtype=float)))
        if np.any(self.values < 0):
            raise ValueError("thermal weights must be non-negative")
        if self.total > 1 + 1e-12:
            raise ValueError(f"thermal weights sum to {self.total} > 1")

    @property
    def total(self) -> float:
        return float(np.sum(self.values))

    @property
    def truncation_deficit(self) -> float:
        return 1.0 - self.total

    def marginal(self, mode: int) -> np.ndarray:
        axes = tuple(ax for ax in range(self.n_modes) if ax != mode)
        return np.sum(self.values, axis=axes)


def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def single_mode_coherent(alpha: complex, n_cut: int) -> np.ndarray:
    """Coherent-state coefficients e^{-|a|^2/2} a^n / sqrt(n!) for n = 0..n_cut."""
    alpha = complex(alpha)
    amp = abs(alpha)
    out = np.zeros(n_cut + 1, dtype=complex)
    if amp == 0.0:
        out[0] = 1.0
        return out
    phase = alpha / amp
    for n in range(n_cut + 1):
        if n <= _LOG_FACTORIAL_THRESHOLD:
            out[n] = math.exp(-amp**2 / 2) * alpha**n / math.sqrt(math.factorial(n))
        else:
            log_mag = n * math.log(amp) - amp**2 / 2 - 0.5 * _log_factorial(n)
            out[n] = math.exp(log_mag) * phase**n
    return out


def _outer_product(vectors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.multiply.outer, vectors)


def coherent_coefficients(
    alphas: Sequence[complex], n_cut: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> CoefficientTable:
    """Coefficients of the product coherent state prod_k |alpha_k>."""
    alphas = list(np.atleast_1d(alphas))
    check_enumeration_size(len(alphas), n_cut, cap)
    values = _outer_product([single_mode_coherent(a, n_cut) for a in alphas])
    return CoefficientTable(np.asarray(values, dtype=complex), n_cut)


def thermal_mean_occupation(omega: float, temperature: float) -> float:
    """Planck mean photon number 1 / (exp(omega/T) - 1); zero at T = 0."""
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if temperature < 0:
        raise ValueError(f"temperature must be non-negative, got {temperature}")
    if temperature == 0:
        return 0.0
    return float(1.0 / math.expm1(omega / temperature))


def geometric_distribution(mean: float, n_cut: int) -> np.ndarray:
    """p(n) = mean^n / (1 + mean)^(n + 1) for n = 0..n_cut."""
    n = np.arange(n_cut + 1)
    if mean == 0:
        return (n == 0).astype(float)
    return np.exp(n * math.log(mean) - (n + 1) * math.log1p(mean))


def thermal_weights(
    grid: ModeGrid, temperature: float, n_cut: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> ThermalWeights:
    check_enumeration_size(grid.n_modes, n_cut, cap)
    means = np.array([thermal_mean_occupation(w, temperature) for w in grid.frequencies])
    values = _outer_product([geometric_distribution(m, n_cut) for m in means])
    return ThermalWeights(np.asarray(values, dtype=float), n_cut, temperature, means)


def thermal_weights_from_means(
    means: Sequence[float], n_cut: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> ThermalWeights:
    """Product geometric weights for given mean occupations (temperature recorded as NaN)."""
    means = np.asarray(means, dtype=float)
    check_enumeration_size(means.size, n_cut, cap)
    values = _outer_product([geometric_distribution(m, n_cut) for m in means])
    return ThermalWeights(np.asarray(values, dtype=float), n_cut, float("nan"), means)


def thermal_n_cut(means: Sequence[float], tolerance: float = 1e-6) -> int:
    """Smallest n_cut whose product geometric table keeps at least ``1 - tolerance`` of the weight."""
    means = [float(m) for m in means]
    n_cut = 0
    while True:
        kept = math.prod(1 - (m / (1 + m)) ** (n_cut + 1) for m in means)
        if kept >= 1 - tolerance:
            return n_cut
        n_cut += 1


def field_amplitude(n_photons: float, omega: float, volume: float = 1.0, z: float = 0.0) -> complex:
    """Field amplitude i sqrt(omega N / V) exp(i omega z)."""
    if n_photons < 0:
        raise ValueError(f"photon number must be non-negative, got {n_photons}")
    return 1j * math.sqrt(omega * n_photons / volume) * complex(np.exp(1j * omega * z))
