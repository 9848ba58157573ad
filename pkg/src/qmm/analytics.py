"""Closed-form results for the central-qubit array.

Everything is in reduced units (detuning from omega_c over g) unless a
function says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .core import ArraySpec, ModeBasis, Ports, bare_band, bare_mode, mode_basis, validate_spec


class BracketError(RuntimeError):
    pass


def _secular(omega: float, poles: np.ndarray, weights: np.ndarray, dq: float) -> float:
    # (omega - omega_q) - g^2 sum_p alpha_p^2 / (omega - omega_p), g = 1.
    return (omega - dq) - math.fsum((weights / (omega - poles)).tolist())


def secular_residual(spec: ArraySpec, omega: float) -> float:
    """Residual of the eigenvalue condition, multiplied through by omega - omega_q."""
    band = bare_band(spec)
    odd = band.site_amplitudes != 0
    return _secular(omega, band.energies[odd], band.site_amplitudes[odd] ** 2,
                    spec.qubit_detuning)


def _root(f: Callable[[float], float], lo: float, hi: float) -> float:
    flo, fhi = f(lo), f(hi)
    if not (flo < 0 < fhi):
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}] "
                           f"(f = {flo:.3e}, {fhi:.3e})")
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _inner_bracket(a: float, b: float) -> tuple[float, float]:
    # Step off the poles by a few ulps plus a tiny relative margin.
    gap = b - a
    return a + 1e-13 * gap, b - 1e-13 * gap


def bright_roots(spec: ArraySpec) -> np.ndarray:
    """Roots of the secular equation, one per gap between bright poles plus
    one below and one above them all."""
    validate_spec(spec)
    if spec.j_reduced == 0:
        raise ValueError("secular equation degenerates at J = 0")
    band = bare_band(spec)
    odd = band.site_amplitudes != 0
    poles = band.energies[odd]
    weights = band.site_amplitudes[odd] ** 2
    dq = spec.qubit_detuning

    def f(x):
        return _secular(x, poles, weights, dq)

    roots = []
    # F rises by at least 1 per unit energy, so these outer brackets suffice.
    reach = 2.0 + abs(dq) + 1.0
    lo = poles[0] - reach
    roots.append(_root(f, lo, _inner_bracket(lo, poles[0])[1]))
    for a, b in zip(poles[:-1], poles[1:]):
        roots.append(_root(f, *_inner_bracket(a, b)))
    hi = poles[-1] + reach
    roots.append(_root(f, _inner_bracket(poles[-1], hi)[0], hi))
    return np.array(roots)


def characteristic_roots(spec: ArraySpec) -> np.ndarray:
    """Full spectrum from the secular equation plus the dark modes, ascending."""
    validate_spec(spec)
    n = spec.n_cavities
    dq = spec.qubit_detuning
    if spec.j_reduced == 0:
        half = dq / 2
        split = math.hypot(half, 1.0)
        return np.sort(np.concatenate([[half - split, half + split], np.zeros(n - 1)]))
    band = bare_band(spec)
    dark = band.energies[band.site_amplitudes == 0]
    return np.sort(np.concatenate([bright_roots(spec), dark]))


def secular_basis(spec: ArraySpec) -> ModeBasis:
    """Eigenbasis built from the secular roots.

    Mirror-symmetric modes are generated by the open-chain recurrence from the
    edge towards the qubit, which is the growing direction for out-of-band
    states; this keeps exponentially small edge amplitudes accurate to full
    relative precision, unlike a dense solver.  Antisymmetric modes are the
    bare even-p standing waves.  Falls back to the dense solver at J = 0.
    """
    validate_spec(spec)
    n = spec.n_cavities
    j = spec.j_reduced
    if j == 0 or n == 1:
        return mode_basis(spec)
    s = spec.qubit_site
    band = bare_band(spec)
    energies, photons, qubits = [], [], []
    for omega in bright_roots(spec):
        u = np.empty(s)
        u[0] = 1.0
        prev = 0.0
        for k in range(s - 1):
            nxt = -omega * u[k] / j - prev
            prev = u[k]
            u[k + 1] = nxt
            if abs(nxt) > 1e150:
                u[:k + 2] *= 1e-150
                prev *= 1e-150
        full = np.concatenate([u, u[-2::-1]])
        q = omega * u[-1] + 2 * j * u[-2]
        norm = math.sqrt(math.fsum((full * full).tolist()) + q * q)
        energies.append(omega)
        photons.append(full / norm)
        qubits.append(q / norm)
    for p in range(2, n + 1, 2):
        energies.append(band.energies[p - 1])
        photons.append(bare_mode(n, p))
        qubits.append(0.0)
    order = np.argsort(energies, kind="stable")
    return ModeBasis(np.asarray(energies)[order], np.asarray(photons)[order],
                     np.asarray(qubits)[order], spec.coupling_g, spec.omega_c)


@dataclass(frozen=True)
class BoundStateApprox:
    energy_minus: float
    energy_plus: float
    omega_sq: float
    eta: float
    xi: float
    alpha: float
    norm: float
    f: float
    n_cavities: int

    def amplitudes(self, branch: str) -> tuple[np.ndarray, float]:
        """Photon amplitudes over sites 1..N and the qubit amplitude.

        The upper state carries a staggered sign, as required by the
        open-chain Hamiltonian with hopping -J.
        """
        sign = _branch_sign(branch)
        n = self.n_cavities
        dist = np.abs(np.arange(1, n + 1) - (n + 1) // 2)
        photon = self.alpha * self.eta ** dist / self.norm
        if sign > 0:
            photon = photon * (-1.0) ** dist
        return photon, sign / self.norm

    def log_occupation_slope(self) -> float:
        return -2.0 / self.xi


def _branch_sign(branch: str) -> int:
    if branch in ("B-", "B−", "minus", "-"):
        return -1
    if branch in ("B+", "plus", "+"):
        return 1
    raise ValueError(f"unknown branch {branch!r}; expected 'B-' or 'B+'")


def bound_state_closed_form(spec: ArraySpec) -> BoundStateApprox:
    validate_spec(spec)
    j = spec.j_reduced
    if j <= 0:
        raise ValueError("closed form needs J > 0")
    n = spec.n_cavities
    omega_sq = math.sqrt(4 * j ** 4 + 1.0)
    alpha = math.sqrt(2 * j ** 2 + omega_sq)
    # (Omega^2 - g^2) / (2 J^2) rewritten without cancellation at small J.
    eta = math.sqrt(2 * j ** 2 / (omega_sq + 1.0))
    xi = -1.0 / math.log(eta)
    f = (1 + eta ** 2 - 2 * eta ** (n + 1)) / (1 - eta ** 2)
    norm = math.sqrt(f * alpha ** 2 + 1.0)
    return BoundStateApprox(-alpha, alpha, omega_sq, eta, xi, alpha, norm, f, n)


@dataclass(frozen=True)
class LinewidthPrediction:
    """Half-widths (reduced units) from the weak- and strong-hopping limits."""

    branch: str
    j_over_g: float
    kappa: float
    n_cavities: int
    w_weak: float
    w_strong: float

    @property
    def weak_valid(self) -> bool:
        return self.j_over_g < 1.0

    @property
    def width(self) -> float:
        return self.w_weak if self.weak_valid else self.w_strong

    @property
    def lifetime(self) -> float:
        return 1.0 / self.width

    @property
    def shift(self) -> float:
        """Peak position relative to the bound-state energy."""
        return -_branch_sign(self.branch) * 0.5 * self.kappa * self.width

    def transmission(self, delta):
        """Lorentzian transmission versus offset from the bound-state energy."""
        w = self.width
        return w ** 2 / ((np.asarray(delta) - self.shift) ** 2 + w ** 2)


def weak_hopping_width(n: int, j_over_g: float, kappa: float) -> float:
    return 0.5 * kappa * j_over_g ** (n - 1)


def strong_hopping_width(n: int, kappa: float) -> float:
    return 2 * kappa / (n + 1) * math.sin(math.pi / (n + 1)) ** 2


def lorentzian_prediction(spec: ArraySpec, ports: Ports, branch: str) -> LinewidthPrediction:
    """``kappa`` must be symmetric; the mean of the two rates is used otherwise."""
    validate_spec(spec)
    _branch_sign(branch)
    kappa = 0.5 * (ports.kappa_left + ports.kappa_right) / spec.coupling_g
    n = spec.n_cavities
    j = spec.j_reduced
    return LinewidthPrediction(branch, j, kappa, n, weak_hopping_width(n, j, kappa),
                               strong_hopping_width(n, kappa))


def inband_splitting(spec: ArraySpec) -> float:
    validate_spec(spec)
    m = (spec.n_cavities - 1) // 2
    if m % 2 == 1:
        raise ValueError("doublet degenerate at omega_c, no splitting (M odd)")
    return 2.0 * math.sqrt(2.0 / (spec.n_cavities + 1))
