"""Single-photon scattering through the array between two chiral waveguides.

The mode sums are packed into a real symmetric 2x2 matrix ``K`` (left/right
channel space) so that ``Gamma_l = 1 + i K_ll``, ``Gamma_r = 1 + i K_rr`` and
``beta = K_lr``.  The scattering matrix is then ``S = 2 (1 + iK)^-1 - 1``,
which reproduces ``t = -2i beta / (Gamma_l Gamma_r + beta^2)`` and
``r = (Gamma_l^* Gamma_r - beta^2) / (Gamma_l Gamma_r + beta^2)``.

Near an eigenvalue the pole part of ``K`` is multiplied out analytically so
the result stays finite; probes may also be given as an offset from a chosen
mode energy, which keeps ultra-narrow resonances resolvable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ModeBasis, Ports

POLE_THRESHOLD = 1e-6
DEGENERACY_TOL = 1e-10
_RANK_TOL = 1e-20


class PoleProximityError(ArithmeticError):
    """Probe too close to an eigenvalue for the raw mode sums."""


@dataclass(frozen=True)
class ScatteringResult:
    """Amplitudes at one probe energy.

    ``probe_energy`` is the reduced detuning ``(eps - omega_c)/g``.  When the
    probe was specified relative to a mode, ``about`` is that mode's index and
    ``offset`` the exact reduced offset from its energy.
    """

    probe_energy: float
    t: complex
    r: complex
    gamma_left: complex
    gamma_right: complex
    beta: complex
    wavenumber: float
    regularized: bool
    about: int | None = None
    offset: float | None = None

    @property
    def T(self) -> float:
        return abs(self.t) ** 2

    @property
    def R(self) -> float:
        return abs(self.r) ** 2

    @property
    def phase(self) -> float:
        return math.atan2(self.t.imag, self.t.real)


@dataclass(frozen=True)
class ModeExcitations:
    amplitudes: np.ndarray
    site_amplitudes: np.ndarray
    qubit_amplitude: complex

    @property
    def site_occupation(self) -> np.ndarray:
        return np.abs(self.site_amplitudes) ** 2

    @property
    def qubit_occupation(self) -> float:
        return abs(self.qubit_amplitude) ** 2


@dataclass(frozen=True)
class Spectrum:
    energy: np.ndarray
    T: np.ndarray
    R: np.ndarray
    phase: np.ndarray


@dataclass
class _Solution:
    """Everything the amplitudes and mode excitations need."""

    detunings: np.ndarray
    inv: np.ndarray
    cluster: np.ndarray
    pole_numerator: object
    gamma_left: complex
    gamma_right: complex
    beta: complex
    regularized: bool


def _couplings(basis: ModeBasis, ports: Ports):
    unit = basis.energy_unit * ports.group_velocity
    edge_l = basis.photon_amps[:, 0]
    edge_r = basis.photon_amps[:, -1]
    c_ll = ports.v_left ** 2 / unit
    c_rr = ports.v_right ** 2 / unit
    c_lr = ports.v_left * ports.v_right / unit
    return edge_l, edge_r, c_ll, c_rr, c_lr


def _detunings(basis: ModeBasis, eps: float, about: int | None) -> np.ndarray:
    if about is None:
        return eps - basis.energies
    # The reference mode gets the offset exactly; others differ by O(1).
    return eps + (basis.energies[about] - basis.energies)


def _mode_sums(weights_l, weights_r, c_ll, c_rr, c_lr, detunings):
    wl = (weights_l / detunings).tolist()
    wr = (weights_r / detunings).tolist()
    al = weights_l.tolist()
    ar = weights_r.tolist()
    k_ll = 0.5 * c_ll * math.fsum(a * w for a, w in zip(al, wl))
    k_rr = 0.5 * c_rr * math.fsum(a * w for a, w in zip(ar, wr))
    k_lr = 0.5 * c_lr * math.fsum(a * w for a, w in zip(ar, wl))
    return k_ll, k_rr, k_lr


def _ldexp(z, e: int):
    return np.ldexp(z.real, e) + 1j * np.ldexp(z.imag, e)


def _divide(num: np.ndarray, den: complex) -> np.ndarray:
    # Rescale by a power of two first: subnormal couplings would otherwise
    # overflow inside the complex division.
    top = max(float(np.max(np.abs(num))), abs(den))
    if top == 0.0:
        return np.zeros_like(num)
    e = -math.frexp(top)[1]
    return _ldexp(num, e) / complex(_ldexp(np.asarray(den), e))


def _solve(basis: ModeBasis, ports: Ports, eps: float, about: int | None) -> _Solution:
    edge_l, edge_r, c_ll, c_rr, c_lr = _couplings(basis, ports)
    d = _detunings(basis, eps, about)
    nearest = int(np.argmin(np.abs(d)))
    d0 = float(d[nearest])

    if abs(d0) >= POLE_THRESHOLD:
        k_ll, k_rr, k_lr = _mode_sums(edge_l, edge_r, c_ll, c_rr, c_lr, d)
        m = np.array([[1 + 1j * k_ll, 1j * k_lr], [1j * k_lr, 1 + 1j * k_rr]])
        det = m[0, 0] * m[1, 1] - m[0, 1] ** 2
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[0, 1], m[0, 0]]]) / det
        return _Solution(d, inv, np.array([], dtype=int), None,
                         m[0, 0], m[1, 1], k_lr, False)

    # Modes degenerate with the nearest one share its detuning d0.
    ref = basis.energies[nearest]
    in_cluster = np.abs(basis.energies - ref) <= DEGENERACY_TOL
    cluster = np.flatnonzero(in_cluster)
    rest = ~in_cluster
    if rest.any():
        x_ll, x_rr, x_lr = _mode_sums(edge_l[rest], edge_r[rest], c_ll, c_rr, c_lr, d[rest])
    else:
        x_ll = x_rr = x_lr = 0.0
    ca, cb = edge_l[cluster], edge_r[cluster]
    sum_aa = math.fsum((ca * ca).tolist())
    sum_bb = math.fsum((cb * cb).tolist())
    y_ll = 0.5 * c_ll * sum_aa
    y_rr = 0.5 * c_rr * sum_bb
    y_lr = 0.5 * c_lr * math.fsum((ca * cb).tolist())
    # Cauchy-Binet keeps det(Y) exactly non-negative and zero for one mode.
    minors = math.fsum([(ca[i] * cb[k] - ca[k] * cb[i]) ** 2
                        for i in range(len(cluster)) for k in range(i + 1, len(cluster))])
    rank_one = c_ll == 0.0 or c_rr == 0.0 or minors <= _RANK_TOL * sum_aa * sum_bb

    if y_ll == 0.0 and y_rr == 0.0:
        # Cluster invisible to both ports: the pole is removable.
        det_x = (1 + 1j * x_ll) * (1 + 1j * x_rr) + x_lr ** 2
        inv = np.array([[1 + 1j * x_rr, -1j * x_lr], [-1j * x_lr, 1 + 1j * x_ll]]) / det_x
        return _Solution(d, inv, cluster, ("rank1", 0.0, 0.0, 1.0, 0),
                         1 + 1j * x_ll, 1 + 1j * x_rr, x_lr, True)

    # Work with M = d0 (1 + iX) + iY scaled by 2^e so that tiny escape rates
    # cannot underflow the products below; (1 + iK)^-1 = d0 M^-1 is invariant.
    e = -math.frexp(max(abs(d0), y_ll, y_rr))[1]
    d0s, y_ll, y_rr, y_lr = (math.ldexp(v, e) for v in (d0, y_ll, y_rr, y_lr))
    det_y = 0.25 * math.ldexp(c_ll, e) * math.ldexp(c_rr, e) * minors

    # det M = d0 D' - det Y.
    m_ll = d0s * (1 + 1j * x_ll) + 1j * y_ll
    m_rr = d0s * (1 + 1j * x_rr) + 1j * y_rr
    m_lr = 1j * (d0s * x_lr + y_lr)
    adj = np.array([[m_rr, -m_lr], [-m_lr, m_ll]])
    det_x = (1 + 1j * x_ll) * (1 + 1j * x_rr) + x_lr ** 2
    d_prime = (d0s * det_x + 1j * (y_ll * (1 + 1j * x_rr) + y_rr * (1 + 1j * x_ll))
               + 2 * x_lr * y_lr)
    if rank_one:
        inv = _divide(adj, d_prime)
        # Leading d0^0 terms cancel for every cluster member.
        pole_numerator = ("rank1", 1 + 1j * x_rr, -1j * x_lr, d_prime, e)
    else:
        det_m = d0s * d_prime - det_y
        inv = _divide(d0s * adj, det_m)
        pole_numerator = ("full", adj, det_m, e)

    if d0s != 0.0:
        gl = 1 + 1j * (x_ll + y_ll / d0s)
        gr = 1 + 1j * (x_rr + y_rr / d0s)
        beta = x_lr + y_lr / d0s
    else:
        gl = gr = beta = complex("nan")
    return _Solution(d, inv, cluster, pole_numerator, gl, gr, beta, True)


def gamma_beta(basis: ModeBasis, ports: Ports, eps: float, about: int | None = None):
    """Raw ``(Gamma_l, Gamma_r, beta)`` from the mode sums.

    Raises :class:`PoleProximityError` within ``POLE_THRESHOLD`` of an
    eigenvalue; use :func:`scatter` there.
    """
    edge_l, edge_r, c_ll, c_rr, c_lr = _couplings(basis, ports)
    d = _detunings(basis, eps, about)
    nearest = int(np.argmin(np.abs(d)))
    if abs(d[nearest]) < POLE_THRESHOLD:
        raise PoleProximityError(
            f"probe within {abs(d[nearest]):.3e} of mode {nearest} "
            f"(threshold {POLE_THRESHOLD:g}); use scatter()")
    k_ll, k_rr, k_lr = _mode_sums(edge_l, edge_r, c_ll, c_rr, c_lr, d)
    return 1 + 1j * k_ll, 1 + 1j * k_rr, k_lr


def scatter(basis: ModeBasis, ports: Ports, eps: float, about: int | None = None) -> ScatteringResult:
    """Transmission and reflection amplitudes at reduced energy ``eps``.

    With ``about`` set, ``eps`` is an offset from ``basis.energies[about]``.
    """
    sol = _solve(basis, ports, eps, about)
    t = complex(2 * sol.inv[0, 1])
    r = complex(2 * sol.inv[0, 0] - 1)
    if about is None:
        probe = float(eps)
    else:
        probe = float(basis.energies[about] + eps)
    k = (basis.origin + probe * basis.energy_unit) / ports.group_velocity
    return ScatteringResult(probe, t, r, complex(sol.gamma_left), complex(sol.gamma_right),
                            complex(sol.beta), k, sol.regularized, about,
                            None if about is None else float(eps))


def mode_excitations(basis: ModeBasis, ports: Ports, result: ScatteringResult) -> ModeExcitations:
    """Mode and site amplitudes inside the array for the left-incident state.

    The half-length phase ``exp(-ikL)`` is taken with ``L = 0``.
    """
    if result.about is None:
        sol = _solve(basis, ports, result.probe_energy, None)
    else:
        sol = _solve(basis, ports, result.offset, result.about)
    vl = ports.v_left * basis.photon_amps[:, 0]
    vr = ports.v_right * basis.photon_amps[:, -1]
    unit = basis.energy_unit
    numer = vl * sol.inv[0, 0] + vr * sol.inv[0, 1]
    p = np.zeros(basis.n_modes, dtype=complex)
    outside = np.ones(basis.n_modes, dtype=bool)
    outside[sol.cluster] = False
    p[outside] = numer[outside] / (unit * sol.detunings[outside])
    if sol.cluster.size:
        c = sol.cluster
        # The pole factors carry a 2^-e scale (see _solve); undo it here.
        if sol.pole_numerator[0] == "rank1":
            _, f_l, f_r, d_prime, e = sol.pole_numerator
            p[c] = _divide(_ldexp(vl[c] * f_l + vr[c] * f_r, e), unit * d_prime)
        else:
            _, adj, det_m, e = sol.pole_numerator
            p[c] = _divide(_ldexp(vl[c] * adj[0, 0] + vr[c] * adj[1, 0], e), unit * det_m)
    sites = p @ basis.photon_amps
    qubit = complex(p @ basis.qubit_amps)
    return ModeExcitations(p, sites, qubit)


def evaluate_waveguide_amplitude(result: ScatteringResult, side: str, x: float,
                                 half_length: float = 0.0) -> complex:
    """Scattering-state amplitude at branch coordinate ``x`` (step(0) = 1)."""
    phase = np.exp(1j * result.wavenumber * (x - half_length))
    if side == "left":
        return complex(phase * (result.r if x >= 0 else 1.0))
    if side == "right":
        return complex(phase * result.t) if x >= 0 else 0j
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def transmission_spectrum(basis: ModeBasis, ports: Ports, grid, about: int | None = None) -> Spectrum:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or not np.all(np.isfinite(grid)):
        raise ValueError("grid must be a finite 1-D sequence")
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be ascending")
    t = np.empty(grid.size, dtype=complex)
    r = np.empty(grid.size, dtype=complex)
    for i, eps in enumerate(grid):
        res = scatter(basis, ports, float(eps), about)
        t[i] = res.t
        r[i] = res.r
    return Spectrum(grid, np.abs(t) ** 2, np.abs(r) ** 2, np.angle(t))
