import numpy as np
import pytest

from onephoton.molecule import build_bright_dark_model, eigensystem, resonant_mode_grid, transition_dipoles

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class System:
    """A bright/dark molecule with its eigenbasis, dipoles and resonant grid."""

    def __init__(self, model, tol=1e-9, volume=1.0, z=0.0):
        self.model = model
        self.eig = eigensystem(model, tol)
        self.dipoles = transition_dipoles(self.eig, model)
        self.grid = resonant_mode_grid(self.eig, model.ground_energy, volume, z)


@pytest.fixture(scope="session")
def make_system():
    def make(n_dark=2, coupling=0.1, spread=0.2, offset=0.03, detuning=1.0, d_bright=1.0, **kw):
        model = build_bright_dark_model(detuning, coupling, n_dark, spread, d_bright, dark_offset=offset)
        return System(model, **kw)

    return make


def brute_overlap(coeffs, exact=False):
    """D[k', k] from a plain loop over pre-absorption states N of the table."""
    n_modes = coeffs.n_modes
    d = np.zeros((n_modes, n_modes), dtype=complex)
    for occ, _ in coeffs.items():
        for k in range(n_modes):
            for kp in range(n_modes):
                # field left behind must agree: N - e_k == N' - e_k'
                if occ[k] == 0:
                    continue
                left = list(occ)
                left[k] -= 1
                other = list(left)
                other[kp] += 1
                if other[kp] > coeffs.n_cut:
                    continue
                w = np.sqrt(occ[k] * other[kp]) if exact else 1.0
                d[kp, k] += w * coeffs[occ] * np.conj(coeffs[tuple(other)])
    return d
