"""Independent oracles shared by the test modules.

These deliberately avoid the mode-sum machinery under test: transport is
computed from the resolvent of the non-Hermitian array Hamiltonian, and the
N = 3 spectrum from the explicit symmetric-sector block.
"""

import numpy as np
import pytest

from qmm.core import ArraySpec, ModeBasis, Ports, build_hamiltonian


def green_amplitudes(spec: ArraySpec, ports: Ports, eps: float):
    """(t, r, site amplitudes, qubit amplitude) from (eps - H + iK/2)^-1."""
    h = build_hamiltonian(spec).astype(complex)
    n = spec.n_cavities
    kl = ports.kappa_left / spec.coupling_g
    kr = ports.kappa_right / spec.coupling_g
    h[0, 0] -= 0.5j * kl
    h[n - 1, n - 1] -= 0.5j * kr
    e1 = np.zeros(n + 1)
    e1[0] = 1.0
    col = np.linalg.solve(eps * np.eye(n + 1) - h, e1)
    t = -1j * np.sqrt(kl * kr) * col[n - 1]
    r = 1 - 1j * kl * col[0]
    amps = np.sqrt(kl) * col
    return complex(t), complex(r), amps[:n], complex(amps[n])


def symmetric_sector_energies(j_over_g: float) -> np.ndarray:
    """N = 3 bright-sector block on ((a1 + a3)/sqrt2, a2, qubit), reduced units."""
    block = np.array([[0.0, -np.sqrt(2) * j_over_g, 0.0],
                      [-np.sqrt(2) * j_over_g, 0.0, 1.0],
                      [0.0, 1.0, 0.0]])
    return np.linalg.eigvalsh(block)


def empty_cavity_basis() -> ModeBasis:
    """A single bare cavity with no emitter (qubit amplitude identically 0)."""
    return ModeBasis(np.array([0.0]), np.array([[1.0]]), np.array([0.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
