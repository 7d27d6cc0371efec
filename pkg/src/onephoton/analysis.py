"""Coherence measures, observable time series, spectra and rate-law populations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks
from scipy.signal.windows import blackmanharris

from .absorption import MolecularDensityMatrix, evolve_rho
from .field import thermal_mean_occupation
from .molecule import BRIGHT_TAG, DARK_TAG, EigenSystem, MolecularModel

# Tag weights below this are treated as exactly unpopulated.
_EMPTY_WEIGHT = 1e-14


def time_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Uniform half-open grid ``start, start + step, ...`` strictly below ``stop``."""
    if not step > 0:
        raise ValueError(f"time step must be positive, got {step}")
    if not stop > start:
        raise ValueError(f"time grid stop ({stop}) must exceed start ({start})")
    n = int(math.ceil((stop - start) / step - 1e-9))
    return start + step * np.arange(n)


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    channels: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("time grid must be a non-empty 1-D array")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        for name, values in self.channels.items():
            if np.shape(values) != t.shape:
                raise ValueError(f"channel {name!r} has {np.size(values)} points, grid has {t.size}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "channels", {k: np.asarray(v, dtype=float) for k, v in self.channels.items()})

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def spread(self, name: str) -> float:
        """max - min of a channel."""
        values = self.channels[name]
        return float(values.max() - values.min())


def l1_coherence(rho: MolecularDensityMatrix, normalized: bool = True) -> float:
    """Sum of |rho_ij| over i != j; on the unit-trace matrix when ``normalized``."""
    m = rho.normalized() if normalized else rho.matrix
    mag = np.abs(m)
    return float(mag.sum() - np.trace(mag))


def purity(rho: MolecularDensityMatrix) -> float:
    m = rho.normalized()
    return float(np.real(np.trace(m @ m)))


def evolve_series(rho0: MolecularDensityMatrix, eig: EigenSystem, times) -> list[MolecularDensityMatrix]:
    return [evolve_rho(rho0, eig, t - rho0.elapsed) for t in np.asarray(times, dtype=float)]


def observable_timeseries(
    rho0: MolecularDensityMatrix,
    eig: EigenSystem,
    observables: dict[str, np.ndarray] | np.ndarray,
    times,
    normalized: bool = False,
) -> TimeSeries:
    """Tr(rho(t) O) on a time grid, for one observable or a named set of them.

    Observables are given in the eigenbasis. Times are absolute, measured
    from the end of the pulse.
    """
    if not isinstance(observables, dict):
        observables = {"observable": observables}
    for name, op in observables.items():
        if np.shape(op) != (rho0.dim, rho0.dim):
            raise ValueError(f"observable {name!r} has shape {np.shape(op)}, expected {(rho0.dim, rho0.dim)}")
    times = np.asarray(times, dtype=float)
    scale = 1.0 / rho0.trace if normalized else 1.0
    channels = {name: np.empty(times.size) for name in observables}
    for i, rho in enumerate(evolve_series(rho0, eig, times)):
        for name, op in observables.items():
            channels[name][i] = scale * np.real(np.sum(rho.matrix * np.transpose(op)))
    return TimeSeries(times, channels)


def frequency_resolution(series: TimeSeries) -> float:
    """Spectral bin width 1 / (n dt) in cycles per time unit."""
    t = series.times
    return 1.0 / (t.size * (t[1] - t[0]))


def amplitude_spectrum(series: TimeSeries, channel: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One-sided amplitude spectrum of a mean-removed, Blackman-Harris windowed channel.

    Scaled so a sinusoid of amplitude a centred on a bin shows a peak of a.
    """
    t = series.times
    if t.size < 2:
        raise ValueError("need at least two time points")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("frequency extraction needs a uniform time grid")
    name = channel if channel is not None else next(iter(series.channels))
    x = series.channels[name] - series.channels[name].mean()
    w = blackmanharris(t.size, sym=False)
    amp = 2 * np.abs(np.fft.rfft(x * w)) / w.sum()
    return np.fft.rfftfreq(t.size, dt[0]), amp


def dominant_frequencies(series: TimeSeries, threshold: float, channel: str | None = None) -> list[float]:
    """Peak frequencies (cycles per time unit) whose amplitude exceeds ``threshold``.

    Frequencies are bin centres; the resolution is :func:`frequency_resolution`.
    """
    freqs, amp = amplitude_spectrum(series, channel)
    peaks, _ = find_peaks(amp, height=threshold)
    return [float(freqs[i]) for i in peaks if i > 0]


def tag_projector(eig: EigenSystem, model: MolecularModel, tag: str) -> np.ndarray:
    """Projector on basis states carrying ``tag``, expressed in the eigenbasis."""
    return eig.to_eigenbasis(np.diag(model.tag_mask(tag).astype(complex)))


def tag_population(rho: MolecularDensityMatrix, eig: EigenSystem, model: MolecularModel, tag: str) -> float:
    return float(np.real(np.sum(rho.normalized() * tag_projector(eig, model, tag).T)))


def electronic_population_ratio(
    rho: MolecularDensityMatrix,
    eig: EigenSystem,
    model: MolecularModel,
    numerator: str = BRIGHT_TAG,
    denominator: str = DARK_TAG,
) -> float | None:
    """S2/S1 population ratio; ``None`` when the denominator manifold is empty."""
    bottom = tag_population(rho, eig, model, denominator)
    if abs(bottom) < _EMPTY_WEIGHT:
        return None
    return tag_population(rho, eig, model, numerator) / bottom


@dataclass(frozen=True)
class RatePopulations:
    """Two-level (ground, excited) populations driven by a thermal field.

    Absorption runs at ``rate * mean_occupation`` and emission at
    ``rate * (mean_occupation + 1)``.
    """

    populations: tuple[float, float]
    omega: float
    mean_occupation: float
    rate: float

    def __post_init__(self):
        p = tuple(float(x) for x in self.populations)
        if len(p) != 2:
            raise ValueError("two-level populations expected")
        if min(p) < 0 or abs(sum(p) - 1) > 1e-12:
            raise ValueError(f"populations must be non-negative and sum to 1, got {p}")
        if self.rate < 0 or self.mean_occupation < 0:
            raise ValueError("rate and mean occupation must be non-negative")
        object.__setattr__(self, "populations", p)

    @classmethod
    def thermal(cls, omega: float, temperature: float, rate: float, populations=(1.0, 0.0)) -> "RatePopulations":
        return cls(populations, omega, thermal_mean_occupation(omega, temperature), rate)

    def steady_excited(self) -> float:
        n = self.mean_occupation
        return n / (2 * n + 1)


def einstein_rate_evolution(init: RatePopulations, times) -> TimeSeries:
    """Closed-form relaxation of the populations toward detailed balance.

    ``init`` holds the populations at t = 0.

    P_e(t) = P_e(inf) + (P_e(0) - P_e(inf)) exp(-rate (2 N + 1) t).
    """
    times = np.asarray(times, dtype=float)
    total_rate = init.rate * (2 * init.mean_occupation + 1)
    steady = init.steady_excited()
    excited = steady + (init.populations[1] - steady) * np.exp(-total_rate * times)
    return TimeSeries(times, {"ground": 1.0 - excited, "excited": excited})
