"""Array description, single-excitation Hamiltonian and its eigenbasis.

All energies handled here are *reduced*: detuning from the cavity frequency
in units of the qubit coupling ``g``.  Absolute values only live on
:class:`ArraySpec` and are converted back at I/O time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class SpecError(ValueError):
    """Raised for an invalid array or port description."""


class DiagonalizationError(RuntimeError):
    """Raised when the dense eigensolver does not converge."""


@dataclass(frozen=True)
class ArraySpec:
    """Coupled-cavity array with one qubit in the central cavity.

    ``hop_j``, ``coupling_g``, ``omega_c`` and ``omega_q`` are absolute
    frequencies in any consistent unit.  ``omega_q`` defaults to ``omega_c``
    and ``qubit_site`` (1-based) defaults to the central site.
    """

    n_cavities: int
    hop_j: float
    coupling_g: float = 1.0
    omega_c: float = 0.0
    omega_q: float | None = None
    qubit_site: int | None = None

    def __post_init__(self):
        if self.omega_q is None:
            object.__setattr__(self, "omega_q", self.omega_c)
        if self.qubit_site is None and isinstance(self.n_cavities, int):
            object.__setattr__(self, "qubit_site", (self.n_cavities + 1) // 2)

    @classmethod
    def from_ratio(cls, n_cavities: int, j_over_g: float, qubit_detuning: float = 0.0):
        """Spec with ``g = 1`` and ``omega_c = 0`` so reduced == absolute."""
        return cls(n_cavities, j_over_g, 1.0, 0.0, qubit_detuning)

    @property
    def j_reduced(self) -> float:
        return self.hop_j / self.coupling_g

    @property
    def qubit_detuning(self) -> float:
        """(omega_q - omega_c) / g."""
        return (self.omega_q - self.omega_c) / self.coupling_g

    def to_reduced(self, energy):
        return (np.asarray(energy) - self.omega_c) / self.coupling_g

    def to_absolute(self, reduced):
        return self.omega_c + np.asarray(reduced) * self.coupling_g


def validate_spec(spec: ArraySpec) -> ArraySpec:
    n = spec.n_cavities
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise SpecError("N must be a positive integer")
    if n % 2 == 0:
        raise SpecError("N must be odd")
    if not spec.coupling_g > 0:
        raise SpecError("g must be positive")
    if not spec.hop_j >= 0:
        raise SpecError("J must be non-negative")
    for name in ("hop_j", "coupling_g", "omega_c", "omega_q"):
        if not math.isfinite(getattr(spec, name)):
            raise SpecError(f"{name} must be finite")
    if spec.qubit_site != (n + 1) // 2:
        raise SpecError("qubit must be central")
    return spec


@dataclass(frozen=True)
class Ports:
    """Waveguide couplings at the two edge cavities."""

    v_left: float
    v_right: float
    group_velocity: float = 1.0

    def __post_init__(self):
        if not self.group_velocity > 0:
            raise SpecError("group velocity must be positive")
        for name in ("v_left", "v_right"):
            v = getattr(self, name)
            if isinstance(v, complex) or not math.isfinite(v):
                raise SpecError(f"{name} must be a finite real number")

    @classmethod
    def from_kappa(cls, kappa_left: float, kappa_right: float | None = None,
                   group_velocity: float = 1.0) -> "Ports":
        if kappa_right is None:
            kappa_right = kappa_left
        if kappa_left < 0 or kappa_right < 0:
            raise SpecError("escape rates must be non-negative")
        return cls(math.sqrt(kappa_left * group_velocity),
                   math.sqrt(kappa_right * group_velocity), group_velocity)

    @property
    def kappa_left(self) -> float:
        return self.v_left ** 2 / self.group_velocity

    @property
    def kappa_right(self) -> float:
        return self.v_right ** 2 / self.group_velocity

    def swapped(self) -> "Ports":
        return Ports(self.v_right, self.v_left, self.group_velocity)


@dataclass(frozen=True)
class ModeBasis:
    """Eigenmodes of the isolated array.

    ``photon_amps[n, j]`` is the amplitude of mode ``n`` on cavity ``j``
    (0-based), ``qubit_amps[n]`` its qubit amplitude.  Energies are reduced
    and ascending; ``energy_unit``/``origin`` convert them back to absolute
    frequencies.
    """

    energies: np.ndarray
    photon_amps: np.ndarray
    qubit_amps: np.ndarray
    energy_unit: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        for name in ("energies", "photon_amps", "qubit_amps"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_modes(self) -> int:
        return len(self.energies)

    @property
    def n_sites(self) -> int:
        return self.photon_amps.shape[1]

    def edge_couplings(self, ports: Ports) -> tuple[np.ndarray, np.ndarray]:
        """Per-mode couplings to the left and right waveguides."""
        return (ports.v_left * self.photon_amps[:, 0],
                ports.v_right * self.photon_amps[:, -1])

    def vectors(self) -> np.ndarray:
        """Eigenvectors as rows, in the ordering (cavity 1..N, qubit)."""
        return np.column_stack([self.photon_amps, self.qubit_amps])

    def absolute_energies(self) -> np.ndarray:
        return self.origin + self.energies * self.energy_unit

    def check(self, hamiltonian: np.ndarray | None = None, tol: float = 1e-12) -> None:
        """Assert orthonormality and, given ``hamiltonian``, the eigen-residual."""
        vecs = self.vectors()
        gram = vecs @ vecs.T
        err = np.max(np.abs(gram - np.eye(self.n_modes)))
        if err > tol:
            raise AssertionError(f"eigenvectors not orthonormal (max error {err:.3e})")
        if hamiltonian is not None:
            res = hamiltonian @ vecs.T - vecs.T * self.energies
            scale = np.maximum(np.abs(self.energies), 1.0)
            worst = np.max(np.linalg.norm(res, axis=0) / scale)
            if worst > 1e-10:
                raise AssertionError(f"eigen-residual {worst:.3e} exceeds 1e-10")


@dataclass(frozen=True)
class BareBand:
    energies: np.ndarray
    site_amplitudes: np.ndarray

    @property
    def bandwidth(self) -> float:
        return float(self.energies[-1] - self.energies[0])


def build_hamiltonian(spec: ArraySpec) -> np.ndarray:
    """Reduced single-excitation Hamiltonian, basis (cavity 1..N, qubit)."""
    validate_spec(spec)
    n = spec.n_cavities
    j = spec.j_reduced
    h = np.zeros((n + 1, n + 1))
    h[n, n] = spec.qubit_detuning
    idx = np.arange(n - 1)
    h[idx, idx + 1] = -j
    h[idx + 1, idx] = -j
    s = spec.qubit_site - 1
    h[s, n] = h[n, s] = 1.0
    return h


def diagonalize(h: np.ndarray, energy_unit: float = 1.0, origin: float = 0.0) -> ModeBasis:
    """Dense symmetric eigendecomposition of a (cavities..., qubit) matrix."""
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("Hamiltonian must be square")
    scale = max(np.max(np.abs(h)), 1.0)
    if np.max(np.abs(h - h.T)) > 1e-14 * scale:
        raise ValueError("Hamiltonian is not symmetric")
    try:
        energies, vecs = scipy.linalg.eigh(h, check_finite=True)
    except np.linalg.LinAlgError as exc:
        # LAPACK reports the number of off-diagonal elements that failed to
        # converge; keep its diagnostic in the message.
        raise DiagonalizationError(f"eigensolver failed on {h.shape[0]}x{h.shape[0]} "
                                   f"matrix: {exc}") from exc
    vecs = _fix_signs(vecs)
    return ModeBasis(energies, vecs[:-1, :].T, vecs[-1, :], energy_unit, origin)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # Deterministic gauge: largest-magnitude component of each column positive.
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def mode_basis(spec: ArraySpec) -> ModeBasis:
    """Eigenbasis of ``spec`` from the dense solver."""
    return diagonalize(build_hamiltonian(spec), spec.coupling_g, spec.omega_c)


def bare_band(spec: ArraySpec) -> BareBand:
    """Bare cavity-array energies (reduced) and amplitudes at the qubit site."""
    validate_spec(spec)
    n = spec.n_cavities
    p = np.arange(1, n + 1)
    energies = -2.0 * spec.j_reduced * np.cos(np.pi * p / (n + 1))
    amps = math.sqrt(2.0 / (n + 1)) * np.sin(np.pi * p * spec.qubit_site / (n + 1))
    # Even p has an exact node at the central site.
    amps[1::2] = 0.0
    return BareBand(energies, amps)


def bare_mode(n: int, p: int) -> np.ndarray:
    """Normalized open-chain standing wave with band index ``p`` (1-based)."""
    j = np.arange(1, n + 1)
    return math.sqrt(2.0 / (n + 1)) * np.sin(np.pi * p * j / (n + 1))
