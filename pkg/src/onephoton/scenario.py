"""Scenario files: parsing, validation, the end-to-end pipeline and its report.

A scenario is a TOML document::

    name = "pulsed-bright-dark"     # optional, defaults to the file stem
    seed = 0                        # optional, drives model.dark_jitter

    [model]                         # all optional
    detuning = 1.0                  # bright state energy above the ground state
    coupling = 0.1                  # bright-dark coupling
    n_dark = 3
    dark_spread = 0.3
    dark_offset = 0.0
    dark_jitter = 0.0
    d_bright = 1.0                  # number or complex string such as "1+0.5j"
    ground_energy = 0.0
    degeneracy_tol = 1e-9

    [field]                         # required
    kind = "coherent"               # coherent | thermal | number
    alpha = 1.0                     # coherent: scalar (every mode) or list
    temperature = 0.91              # thermal
    occupations = [1, 0]            # number: scalar (every mode) or list
    n_cut = 4
    volume = 1.0
    z = 0.0

    [time]                          # optional; half-open grid [start, stop)
    start = 0.0
    stop = 100.0
    step = 0.1

    [analysis]                      # optional
    oracle = true
    frequency_threshold = 1e-3
    einstein_rate = 0.01            # omit to skip the rate-law series

    [output]                        # optional
    dir = "out/pulsed-bright-dark"

Modes are not listed explicitly: one resonant mode is created per
degeneracy cluster of the excited manifold, in ascending energy.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import analysis
from .absorption import (
    EXACT,
    MolecularDensityMatrix,
    coherent_rho_mol,
    evolve_rho,
    excitation_amplitudes,
    frobenius_relative_error,
    overlap_matrix,
    representative_occupations,
    thermal_rho_mol,
)
from .field import (
    CoefficientTable,
    EnumerationCapError,
    check_enumeration_size,
    coherent_coefficients,
    max_n_cut_within_cap,
    thermal_n_cut,
    thermal_weights,
)
from .molecule import build_bright_dark_model, eigensystem, resonant_mode_grid, transition_dipoles
from .oracle import joint_final_state, partial_trace_field, schmidt_rank, thermal_oracle_rho

FIELD_KINDS = ("coherent", "thermal", "number")
ORACLE_MAX_STATES = 5**4
HERMITIAN_TOL = 1e-12
PSD_TOL = -1e-10
STATIONARY_TOL = 1e-12
ORACLE_TOL = 1e-10


class ScenarioError(ValueError):
    """Invalid scenario document."""


class ScenarioSizeError(ScenarioError):
    """The field table would exceed the enumeration cap."""

    def __init__(self, err: EnumerationCapError):
        self.suggested_n_cut = err.suggested_n_cut
        super().__init__(
            f"field.n_cut = {err.n_cut} is too large for {err.n_modes} modes "
            f"({err.n_cut + 1}^{err.n_modes} number states > cap {err.cap}); "
            f"try field.n_cut = {err.suggested_n_cut}"
        )


@dataclass(frozen=True)
class ModelParams:
    detuning: float = 1.0
    coupling: float = 0.0
    n_dark: int = 0
    dark_spread: float = 0.0
    dark_offset: float = 0.0
    dark_jitter: float = 0.0
    d_bright: complex = 1.0
    ground_energy: float = 0.0
    degeneracy_tol: float = 1e-9


@dataclass(frozen=True)
class FieldParams:
    kind: str
    alpha: tuple[complex, ...] | None = None
    temperature: float | None = None
    occupations: tuple[int, ...] | None = None
    n_cut: int = 4
    volume: float = 1.0
    z: float = 0.0


@dataclass(frozen=True)
class TimeParams:
    start: float = 0.0
    stop: float = 100.0
    step: float = 0.1


@dataclass(frozen=True)
class AnalysisParams:
    oracle: bool = True
    frequency_threshold: float = 1e-3
    einstein_rate: float | None = None


@dataclass(frozen=True)
class OutputParams:
    dir: str | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    field: FieldParams
    model: ModelParams = ModelParams()
    time: TimeParams = TimeParams()
    analysis: AnalysisParams = AnalysisParams()
    output: OutputParams = OutputParams()
    seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        """Fully resolved scenario, JSON-serializable (complex numbers as strings)."""
        return _jsonable(asdict(self))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return _complex_str(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _complex_str(z: complex) -> str | float:
    if z.imag == 0:
        return z.real
    return str(z).strip("()")


# ---------------------------------------------------------------------------
# parsing

_SECTIONS = {
    "model": ModelParams,
    "field": FieldParams,
    "time": TimeParams,
    "analysis": AnalysisParams,
    "output": OutputParams,
}
_TOP_LEVEL = {"name", "seed", *_SECTIONS}


def _number(section: str, key: str, value, *, integer=False, allow_complex=False):
    where = f"{section}.{key}"
    if isinstance(value, bool):
        raise ScenarioError(f"{where} must be a number, got {value!r}")
    if integer:
        if not isinstance(value, int):
            raise ScenarioError(f"{where} must be an integer, got {value!r}")
        return value
    if allow_complex and isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ScenarioError(f"{where} is not a complex number: {value!r}") from None
    if not isinstance(value, (int, float)):
        raise ScenarioError(f"{where} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(f"{where} must be finite, got {value!r}")
    return complex(value) if allow_complex else float(value)


def _check_keys(section: str, table: dict, allowed) -> None:
    if not isinstance(table, dict):
        raise ScenarioError(f"[{section}] must be a table")
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ScenarioError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")


def _parse_model(raw: dict) -> ModelParams:
    _check_keys("model", raw, ModelParams.__dataclass_fields__)
    kw = {}
    for key, value in raw.items():
        if key == "n_dark":
            kw[key] = _number("model", key, value, integer=True)
        elif key == "d_bright":
            kw[key] = _number("model", key, value, allow_complex=True)
        else:
            kw[key] = _number("model", key, value)
    m = ModelParams(**kw)
    if m.n_dark < 0:
        raise ScenarioError(f"model.n_dark must be >= 0, got {m.n_dark}")
    if m.d_bright == 0:
        raise ScenarioError("model.d_bright must be nonzero")
    if m.dark_spread < 0 or m.dark_jitter < 0:
        raise ScenarioError("model.dark_spread and model.dark_jitter must be >= 0")
    if m.degeneracy_tol < 0:
        raise ScenarioError(f"model.degeneracy_tol must be >= 0, got {m.degeneracy_tol}")
    return m


def _as_list(value):
    return list(value) if isinstance(value, list) else [value]


def _parse_field(raw: dict | None) -> FieldParams:
    if raw is None:
        raise ScenarioError("missing required section [field]")
    _check_keys("field", raw, FieldParams.__dataclass_fields__)
    if "kind" not in raw:
        raise ScenarioError("missing required key field.kind (one of coherent, thermal, number)")
    kind = raw["kind"]
    if kind not in FIELD_KINDS:
        raise ScenarioError(f"field.kind must be one of {', '.join(FIELD_KINDS)}, got {kind!r}")

    required = {"coherent": "alpha", "thermal": "temperature", "number": "occupations"}[kind]
    if required not in raw:
        label = {"alpha": "alpha (coherent amplitudes)", "temperature": "temperature T",
                 "occupations": "occupations N"}[required]
        raise ScenarioError(f"field.kind = {kind!r} requires field.{label}")
    extra = sorted({"alpha", "temperature", "occupations"} - {required} & set(raw))
    if extra:
        raise ScenarioError(f"field.kind = {kind!r} does not take field.{', field.'.join(extra)}")

    kw: dict[str, Any] = {"kind": kind}
    if kind == "coherent":
        kw["alpha"] = tuple(_number("field", "alpha", a, allow_complex=True) for a in _as_list(raw["alpha"]))
    elif kind == "thermal":
        kw["temperature"] = _number("field", "temperature", raw["temperature"])
        if kw["temperature"] < 0:
            raise ScenarioError(f"field.temperature must be >= 0, got {kw['temperature']}")
    else:
        occ = tuple(_number("field", "occupations", n, integer=True) for n in _as_list(raw["occupations"]))
        if any(n < 0 for n in occ):
            raise ScenarioError(f"field.occupations must be >= 0, got {list(occ)}")
        kw["occupations"] = occ
    if "n_cut" in raw:
        kw["n_cut"] = _number("field", "n_cut", raw["n_cut"], integer=True)
        if kw["n_cut"] < 0:
            raise ScenarioError(f"field.n_cut must be >= 0, got {kw['n_cut']}")
    for key in ("volume", "z"):
        if key in raw:
            kw[key] = _number("field", key, raw[key])
    if kw.get("volume", 1.0) <= 0:
        raise ScenarioError(f"field.volume must be > 0, got {kw['volume']}")
    return FieldParams(**kw)


def _parse_time(raw: dict) -> TimeParams:
    _check_keys("time", raw, TimeParams.__dataclass_fields__)
    t = TimeParams(**{k: _number("time", k, v) for k, v in raw.items()})
    if not t.step > 0:
        raise ScenarioError(f"time grid: time.step must be > 0, got {t.step}")
    if not t.stop > t.start:
        raise ScenarioError(f"time grid: time.stop ({t.stop}) must exceed time.start ({t.start})")
    if t.start < 0:
        raise ScenarioError(f"time grid: time.start must be >= 0 (the pulse ends at t = 0), got {t.start}")
    return t


def _parse_analysis(raw: dict) -> AnalysisParams:
    _check_keys("analysis", raw, AnalysisParams.__dataclass_fields__)
    kw: dict[str, Any] = {}
    if "oracle" in raw:
        if not isinstance(raw["oracle"], bool):
            raise ScenarioError(f"analysis.oracle must be true or false, got {raw['oracle']!r}")
        kw["oracle"] = raw["oracle"]
    for key in ("frequency_threshold", "einstein_rate"):
        if key in raw:
            kw[key] = _number("analysis", key, raw[key])
            if kw[key] < 0:
                raise ScenarioError(f"analysis.{key} must be >= 0, got {kw[key]}")
    return AnalysisParams(**kw)


def _parse_output(raw: dict) -> OutputParams:
    _check_keys("output", raw, OutputParams.__dataclass_fields__)
    if "dir" in raw and not isinstance(raw["dir"], str):
        raise ScenarioError(f"output.dir must be a string, got {raw['dir']!r}")
    return OutputParams(**raw)


def parse_scenario(text: str, default_name: str = "scenario") -> Scenario:
    """Parse and validate a TOML scenario, applying defaults."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"malformed scenario document: {exc}") from None
    _check_keys("top level", doc, _TOP_LEVEL)
    name = doc.get("name", default_name)
    if not isinstance(name, str) or not name:
        raise ScenarioError(f"name must be a non-empty string, got {name!r}")
    seed = _number("top level", "seed", doc.get("seed", 0), integer=True)
    return Scenario(
        name=name,
        field=_parse_field(doc.get("field")),
        model=_parse_model(doc.get("model", {})),
        time=_parse_time(doc.get("time", {})),
        analysis=_parse_analysis(doc.get("analysis", {})),
        output=_parse_output(doc.get("output", {})),
        seed=seed,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), default_name=path.stem)


def example_names() -> list[str]:
    files = resources.files("onephoton").joinpath("scenarios")
    return sorted(p.name[: -len(".toml")] for p in files.iterdir() if p.name.endswith(".toml"))


def example_text(name: str) -> str:
    if name not in example_names():
        raise KeyError(f"no example scenario named {name!r}")
    return resources.files("onephoton").joinpath("scenarios", f"{name}.toml").read_text()


def load_example(name: str) -> Scenario:
    return parse_scenario(example_text(name), default_name=name)


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class Report:
    """Everything a scenario run produces.

    ``scalars`` maps a result name to ``{"value": ..., "operation": ...}``.
    """

    scenario: dict[str, Any]
    scalars: dict[str, dict[str, Any]] = field(default_factory=dict)
    timeseries: analysis.TimeSeries | None = None
    rate_series: analysis.TimeSeries | None = None
    frequencies: list[float] = field(default_factory=list)
    expected_frequencies: list[float] = field(default_factory=list)
    frequency_resolution: float | None = None
    checks: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    # in-memory artefacts for tests and scripts; not serialized
    rho: MolecularDensityMatrix | None = None
    rho_oracle: MolecularDensityMatrix | None = None
    eigensystem: Any = None
    model: Any = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def add(self, name: str, value, operation: str) -> None:
        self.scalars[name] = {"value": value, "operation": operation}

    def value(self, name: str):
        return self.scalars[name]["value"]

    def summary(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "scalars": self.scalars,
            "frequencies": self.frequencies,
            "expected_frequencies": self.expected_frequencies,
            "frequency_resolution": self.frequency_resolution,
            "checks": self.checks,
            "passed": self.passed,
            "notes": self.notes,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2) + "\n"

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "summary.json"]
        written[0].write_text(self.summary_json())
        for fname, series in (("timeseries.csv", self.timeseries), ("rates.csv", self.rate_series)):
            if series is not None:
                path = out / fname
                path.write_text(timeseries_csv(series))
                written.append(path)
        return written


def timeseries_csv(series: analysis.TimeSeries) -> str:
    """CSV with a ``time`` column then one column per channel, floats at full precision."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(series.channels)
    writer.writerow(["time", *names])
    for i, t in enumerate(series.times):
        writer.writerow([repr(float(t)), *(repr(float(series.channels[n][i])) for n in names)])
    return buf.getvalue()


def _broadcast(values: tuple, n_modes: int, key: str) -> list:
    if len(values) == 1:
        return list(values) * n_modes
    if len(values) != n_modes:
        raise ScenarioError(
            f"field.{key} has {len(values)} entries but the model has {n_modes} resonant modes"
        )
    return list(values)


def _check_density_matrix(report: Report, rho: MolecularDensityMatrix, label: str) -> None:
    tr = rho.trace
    report.checks[f"{label}_trace_positive"] = bool(tr > 0)
    scale = max(abs(tr), 1.0)
    report.checks[f"{label}_hermitian"] = bool(rho.hermiticity_error() / scale < HERMITIAN_TOL)
    report.checks[f"{label}_psd"] = bool(rho.min_eigenvalue() / scale > PSD_TOL)


def _populated_gaps(rho: MolecularDensityMatrix, eig) -> list[float]:
    """Angular gaps between clusters that share a nonzero coherence."""
    m = np.abs(rho.matrix) / rho.trace
    gaps = set()
    for a in range(rho.dim):
        for b in range(a + 1, rho.dim):
            ka, kb = eig.cluster[a], eig.cluster[b]
            if ka != kb and m[a, b] > 1e-12:
                gaps.add(float(abs(eig.cluster_energies[ka] - eig.cluster_energies[kb])))
    return sorted(gaps)


def run_scenario(s: Scenario, oracle: bool | None = None) -> Report:
    """Run the pipeline for one scenario; deterministic for a given scenario."""
    use_oracle = s.analysis.oracle if oracle is None else oracle
    report = Report(scenario=s.to_dict())
    m, f = s.model, s.field

    model = build_bright_dark_model(
        m.detuning, m.coupling, m.n_dark, m.dark_spread, m.d_bright,
        dark_offset=m.dark_offset, ground_energy=m.ground_energy,
        dark_jitter=m.dark_jitter, seed=s.seed,
    )
    eig = eigensystem(model, m.degeneracy_tol)
    dipoles = transition_dipoles(eig, model)
    grid = resonant_mode_grid(eig, model.ground_energy, f.volume, f.z)
    report.model, report.eigensystem = model, eig
    report.add("mode_frequencies", grid.frequencies.tolist(), "resonant_mode_grid")
    report.add("eigenvalues", eig.energies.tolist(), "eigensystem")

    try:
        n_cut = f.n_cut
        if f.kind == "number":
            occ = _broadcast(f.occupations, grid.n_modes, "occupations")
            n_cut = max(n_cut, max(occ))
        check_enumeration_size(grid.n_modes, n_cut)
    except EnumerationCapError as err:
        raise ScenarioSizeError(err) from None

    rho_oracle = None
    oracle_fits = (n_cut + 1) ** grid.n_modes <= ORACLE_MAX_STATES
    if use_oracle and not oracle_fits:
        report.notes.append(
            f"oracle skipped: {(n_cut + 1) ** grid.n_modes} field states exceed its limit of "
            f"{ORACLE_MAX_STATES}; n_cut <= {max_n_cut_within_cap(grid.n_modes, ORACLE_MAX_STATES)} "
            f"would enable it"
        )
    run_oracle = use_oracle and oracle_fits

    if f.kind in ("coherent", "number"):
        if f.kind == "coherent":
            alphas = _broadcast(f.alpha, grid.n_modes, "alpha")
            coeffs = coherent_coefficients(alphas, n_cut)
            occupations = representative_occupations(np.abs(alphas) ** 2)
        else:
            coeffs = CoefficientTable.number_state(occ, n_cut)
            occupations = np.asarray(occ, dtype=float)
        report.add("truncation_deficit", coeffs.truncation_deficit, "coherent_coefficients")
        amps = excitation_amplitudes(dipoles, grid, occupations)
        rho = coherent_rho_mol(amps, overlap_matrix(coeffs))
        rho_exact = coherent_rho_mol(amps, overlap_matrix(coeffs, EXACT))
        report.add("raw_trace_exact_n", rho_exact.trace, "coherent_rho_mol")
        if run_oracle:
            psi = joint_final_state(coeffs, dipoles, grid)
            rho_oracle = partial_trace_field(psi)
            report.add("schmidt_rank", schmidt_rank(psi), "joint_final_state")
    else:
        weights = thermal_weights(grid, f.temperature, n_cut)
        report.add("truncation_deficit", weights.truncation_deficit, "thermal_weights")
        report.add("mean_occupations", weights.mean_occupations.tolist(), "thermal_mean_occupation")
        report.add("n_cut_for_1e-6", thermal_n_cut(weights.mean_occupations, 1e-6), "thermal_n_cut")
        amps = excitation_amplitudes(dipoles, grid)
        rho = thermal_rho_mol(weights, amps)
        rho_exact = rho
        if run_oracle:
            rho_oracle = thermal_oracle_rho(weights, dipoles, grid)

    report.rho, report.rho_oracle = rho, rho_oracle
    report.add("raw_trace", rho.trace, f"{'thermal' if f.kind == 'thermal' else 'coherent'}_rho_mol")
    _check_density_matrix(report, rho, "rho")
    if rho_oracle is not None:
        _check_density_matrix(report, rho_oracle, "oracle")
        exact_err = frobenius_relative_error(rho_exact, rho_oracle)
        report.add("oracle_discrepancy_exact_n", exact_err, "partial_trace_field")
        report.add("oracle_discrepancy_representative_n", frobenius_relative_error(rho, rho_oracle),
                   "partial_trace_field")
        report.checks["oracle_agreement"] = bool(exact_err < ORACLE_TOL)

    if not rho.trace > 0:
        report.notes.append("nothing was excited: coherence, purity and time series skipped")
        return report

    report.add("l1_coherence", analysis.l1_coherence(rho), "l1_coherence")
    report.add("purity", analysis.purity(rho), "purity")

    times = analysis.time_grid(s.time.start, s.time.stop, s.time.step)
    tags = sorted(set(model.tags), reverse=True)
    projectors = {f"population_{t}": analysis.tag_projector(eig, model, t) for t in tags}
    series = analysis.observable_timeseries(rho, eig, projectors, times, normalized=True)
    channels = dict(series.channels)
    if "S2" in tags and "S1" in tags and np.all(np.abs(channels["population_S1"]) >= 1e-14):
        channels["ratio_S2_S1"] = channels["population_S2"] / channels["population_S1"]
    else:
        report.notes.append("S2/S1 ratio undefined (no S1 population)")
    series = analysis.TimeSeries(times, channels)
    report.timeseries = series
    for name in series.channels:
        report.add(f"spread_{name}", series.spread(name), "observable_timeseries")

    evolved = [evolve_rho(rho, eig, t) for t in times]
    drift = max(np.linalg.norm(r.matrix - rho.matrix) for r in evolved) / rho.trace
    report.add("max_relative_drift", float(drift), "evolve_rho")
    final = evolved[-1]
    preserved = (
        abs(final.trace - rho.trace) / rho.trace < STATIONARY_TOL
        and np.max(np.abs(np.diag(final.matrix) - np.diag(rho.matrix))) / rho.trace < STATIONARY_TOL
        and abs(analysis.purity(final) - analysis.purity(rho)) < STATIONARY_TOL
        and np.max(np.abs(final.eigenvalues() - rho.eigenvalues())) / rho.trace < STATIONARY_TOL
    )
    report.checks["evolution_unitary"] = bool(preserved)
    if f.kind in ("thermal", "number"):
        report.checks["stationary"] = bool(
            drift < STATIONARY_TOL and all(series.spread(n) < STATIONARY_TOL for n in series.channels)
        )

    report.frequency_resolution = analysis.frequency_resolution(series)
    report.frequencies = analysis.dominant_frequencies(
        series, s.analysis.frequency_threshold, channel="population_S2"
    )
    report.expected_frequencies = [g / (2 * math.pi) for g in _populated_gaps(rho, eig)]

    if s.analysis.einstein_rate is not None and f.kind == "thermal":
        omega = float(m.detuning)
        init = analysis.RatePopulations.thermal(omega, f.temperature, s.analysis.einstein_rate)
        report.rate_series = analysis.einstein_rate_evolution(init, times)
        rates = report.rate_series
        report.add("einstein_final_ratio", float(rates["excited"][-1] / rates["ground"][-1]),
                   "einstein_rate_evolution")
        report.add("einstein_rate_omega", omega, "einstein_rate_evolution")
    return report
