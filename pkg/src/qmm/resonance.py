"""Locating and measuring ultra-narrow transmission resonances.

Every search runs in a scaled offset coordinate ``u = (x - seed) / width``
so peaks many orders of magnitude narrower than their absolute position
stay resolvable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import bisect, least_squares

from .analytics import bound_state_closed_form, lorentzian_prediction, secular_basis
from .core import ArraySpec, ModeBasis, Ports, validate_spec
from .scattering import scatter

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MAX_REACH = 100.0
FIT_POINTS = 201
FIT_HALF_SPAN = 5.0


class ResonanceError(RuntimeError):
    pass


class PeakNotFoundError(ResonanceError):
    pass


class TruncatedPeakError(ResonanceError):
    pass


@dataclass(frozen=True)
class ResonancePeak:
    """A measured resonance.

    ``offset`` is the location of the maximum relative to ``reference``
    (the seed), ``center = reference + offset``.  ``fwhm`` comes from the
    half-maximum crossings; ``fit_*`` from the Lorentzian least-squares fit.
    """

    reference: float
    offset: float
    fwhm: float
    height: float
    fit_residual: float
    fit_offset: float
    fit_fwhm: float
    fit_height: float
    n_evaluations: int
    label: str = ""
    mode_index: int | None = None
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def center(self) -> float:
        return self.reference + self.offset

    @property
    def half_width(self) -> float:
        return 0.5 * self.fwhm


def _lorentzian(z, center, gamma, height):
    return height * gamma ** 2 / ((z - center) ** 2 + gamma ** 2)


def _golden_max(f, a, b, c, fb, tol=1e-10, max_iter=300):
    """Golden-section ascent on a bracket a < b < c with f(b) above both ends."""
    for _ in range(max_iter):
        if c - a < tol:
            break
        if (c - b) > (b - a):
            x = b + (1 - GOLDEN) * (c - b)
            fx = f(x)
            if fx > fb:
                a, b, fb = b, x, fx
            else:
                c = x
        else:
            x = b - (1 - GOLDEN) * (b - a)
            fx = f(x)
            if fx > fb:
                c, b, fb = b, x, fx
            else:
                a = x
    return b, fb


def _bracket_max(f, reach):
    f0, fm, fp = f(0.0), f(-1.0), f(1.0)
    if f0 > fm and f0 > fp:
        return -1.0, 0.0, 1.0, f0
    step = 1.0 if fp >= fm else -1.0
    a, b = 0.0, step
    fa, fb = f0, (fp if step > 0 else fm)
    if fb < fa:
        # Downhill on the chosen side too: only equality remains possible.
        raise PeakNotFoundError("no local maximum near the seed")
    while True:
        c = b + (b - a) / GOLDEN
        if abs(c) > reach:
            raise PeakNotFoundError(f"no local maximum within {reach:g} widths of the seed")
        fc = f(c)
        if fc < fb:
            lo, hi = sorted((a, c))
            return lo, b, hi, fb
        a, fa, b, fb = b, fb, c, fc


def _half_max_crossing(f, start, direction, half, reach, start_step):
    inner = start
    step = start_step
    while True:
        outer = start + direction * step
        if abs(outer - start) > reach:
            raise TruncatedPeakError("half maximum not reached inside the scan window")
        if f(outer) < half:
            return inner, outer
        inner = outer
        step *= 1.6


def refine_peak(spectrum_fn: Callable[[float], float], seed: float, width_guess: float,
                label: str = "") -> ResonancePeak:
    """Measure the resonance of ``spectrum_fn`` nearest ``seed``.

    ``spectrum_fn`` is sampled at ``seed + u * width_guess``; pass offsets
    (and ``seed = 0``) to keep narrow peaks resolvable.
    """
    if not width_guess > 0:
        raise ValueError("width_guess must be positive")
    count = 0

    def f(u):
        nonlocal count
        count += 1
        return float(spectrum_fn(seed + u * width_guess))

    a, b, c, fb = _bracket_max(f, MAX_REACH)
    u_max, height = _golden_max(f, a, b, c, fb)
    if not height > 0:
        raise PeakNotFoundError("spectrum vanishes at the located maximum")
    half = 0.5 * height

    first_step = max(0.25 * (c - a), 1e-6)
    l_in, l_out = _half_max_crossing(f, u_max, -1.0, half, MAX_REACH, first_step)
    r_in, r_out = _half_max_crossing(f, u_max, 1.0, half, MAX_REACH, first_step)
    tol = 1e-7 * (r_out - l_out)

    def g(u):
        return f(u) - half

    left = bisect(g, l_out, l_in, xtol=tol)
    right = bisect(g, r_in, r_out, xtol=tol)
    fwhm_u = right - left

    z = np.linspace(-FIT_HALF_SPAN, FIT_HALF_SPAN, FIT_POINTS)
    data = np.array([f(u_max + zi * fwhm_u) for zi in z])
    fit_c, fit_gamma, fit_h = _fit_lorentzian(z, data, height)
    model = _lorentzian(z, fit_c, fit_gamma, fit_h)
    residual = float(np.sqrt(np.mean((data - model) ** 2)))

    w = width_guess
    return ResonancePeak(
        reference=seed,
        offset=u_max * w,
        fwhm=fwhm_u * w,
        height=height,
        fit_residual=residual,
        fit_offset=(u_max + fit_c * fwhm_u) * w,
        fit_fwhm=2 * fit_gamma * fwhm_u * w,
        fit_height=fit_h,
        n_evaluations=count,
        label=label,
    )


def _fit_lorentzian(z, data, height):
    """Reciprocal-quadratic linear fit, then a nonlinear polish.

    ``z`` is in units of the measured FWHM, so the starting guess is
    center 0, half width 1/2.
    """
    start = np.array([0.0, 0.5, height])
    positive = data > 0
    if positive.sum() >= 3:
        # 1/T = A z^2 + B z + C, weighted by T to equalize relative errors.
        coef = np.polyfit(z[positive], 1.0 / data[positive], 2, w=data[positive])
        qa, qb, qc = coef
        if qa > 0:
            center = -qb / (2 * qa)
            inv_h = qc - qa * center ** 2
            if inv_h > 0:
                h = 1.0 / inv_h
                start = np.array([center, 1.0 / math.sqrt(h * qa), h])
    sol = least_squares(lambda p: _lorentzian(z, *p) - data, start,
                        x_scale=[1.0, 1.0, max(height, 1e-300)], method="lm")
    c, gamma, h = sol.x if sol.success else start
    return float(c), abs(float(gamma)), float(h)


def _decay_width(basis: ModeBasis, ports: Ports, m: int) -> float:
    """Golden-rule half width of mode ``m`` in reduced units."""
    a = basis.photon_amps[m, 0]
    b = basis.photon_amps[m, -1]
    return 0.5 * (ports.kappa_left * a * a + ports.kappa_right * b * b) / basis.energy_unit


def _analytic_guess(spec: ArraySpec, ports: Ports) -> float:
    pred = lorentzian_prediction(spec, ports, "B-")
    j = spec.j_reduced
    if j <= 0.5:
        return pred.w_weak
    if j >= 2.0:
        return pred.w_strong
    return math.sqrt(pred.w_weak * pred.w_strong)


def width_guess(spec: ArraySpec, ports: Ports, basis: ModeBasis, m: int) -> float:
    """Seed width for mode ``m``: golden-rule estimate, capped by the level gap."""
    guess = _decay_width(basis, ports, m)
    if not guess > 0:
        guess = _analytic_guess(spec, ports)
    if not guess > 0:
        raise PeakNotFoundError("mode is not coupled to the waveguides (zero width)")
    e = basis.energies
    gaps = np.abs(np.delete(e, m) - e[m])
    gaps = gaps[gaps > 0]
    if gaps.size:
        guess = min(guess, 0.1 * float(gaps.min()))
    return guess


def quasi_bound_survey(spec: ArraySpec, ports: Ports,
                       basis: ModeBasis | None = None) -> tuple[ResonancePeak, ResonancePeak]:
    """Measure the two quasi-bound resonances below and above the band.

    Each search is anchored at the numerical eigenvalue closest to the
    closed-form bound-state energy and runs in offsets from it.  The peaks'
    ``extras`` carry the closed-form energy and the predicted width and shift.
    """
    validate_spec(spec)
    if spec.j_reduced <= 0:
        raise ValueError("quasi-bound survey needs J > 0")
    if basis is None:
        basis = secular_basis(spec)
    closed = bound_state_closed_form(spec)
    peaks = []
    for label, target in (("B-", closed.energy_minus), ("B+", closed.energy_plus)):
        m = int(np.argmin(np.abs(basis.energies - target)))
        guess = width_guess(spec, ports, basis, m)

        def transmission(delta, m=m):
            return scatter(basis, ports, delta, about=m).T

        peak = refine_peak(transmission, 0.0, guess, label=label)
        pred = lorentzian_prediction(spec, ports, label)
        peaks.append(ResonancePeak(
            reference=float(basis.energies[m]), offset=peak.offset, fwhm=peak.fwhm,
            height=peak.height, fit_residual=peak.fit_residual, fit_offset=peak.fit_offset,
            fit_fwhm=peak.fit_fwhm, fit_height=peak.fit_height,
            n_evaluations=peak.n_evaluations, label=label, mode_index=m,
            extras={"closed_form_energy": target, "width_guess": guess,
                    "w_weak": pred.w_weak, "w_strong": pred.w_strong,
                    "predicted_shift": pred.shift},
        ))
    return peaks[0], peaks[1]


SWEEP_COLUMNS = ("j_over_g", "fwhm_Bminus", "fwhm_Bplus", "center_Bminus", "center_Bplus",
                 "offset_Bminus", "offset_Bplus", "height_Bminus", "height_Bplus",
                 "fit_residual_Bminus", "fit_residual_Bplus", "fwhm_weak", "fwhm_strong",
                 "monotonic", "error")


def sweep_row(spec_template: ArraySpec, ports: Ports, j_over_g: float) -> dict:
    """One row of :func:`linewidth_sweep`; numerical failures go to ``error``."""
    spec = ArraySpec(spec_template.n_cavities, j_over_g * spec_template.coupling_g,
                     spec_template.coupling_g, spec_template.omega_c, spec_template.omega_q)
    pred = lorentzian_prediction(spec, ports, "B-")
    row = dict.fromkeys(SWEEP_COLUMNS, math.nan)
    row.update(j_over_g=j_over_g, fwhm_weak=2 * pred.w_weak, fwhm_strong=2 * pred.w_strong,
               monotonic="", error="")
    try:
        lo, hi = quasi_bound_survey(spec, ports)
    except (ResonanceError, ArithmeticError, ValueError, RuntimeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    for tag, peak in (("Bminus", lo), ("Bplus", hi)):
        row[f"fwhm_{tag}"] = peak.fwhm
        row[f"center_{tag}"] = peak.center
        row[f"offset_{tag}"] = peak.offset
        row[f"height_{tag}"] = peak.height
        row[f"fit_residual_{tag}"] = peak.fit_residual
    return row


def linewidth_sweep(spec_template: ArraySpec, ports: Ports, j_over_g: Sequence[float],
                    map_fn=map) -> list[dict]:
    """Quasi-bound linewidths over a hopping grid.

    ``map_fn`` may be an executor's ordered ``map`` for parallel rows.
    ``monotonic`` flags whether the lower-branch FWHM did not decrease
    relative to the previous successful row.
    """
    values = [float(x) for x in j_over_g]
    if not values or any(x <= 0 for x in values) or any(b < a for a, b in zip(values, values[1:])):
        raise ValueError("j_over_g must be a non-empty ascending list of positive values")
    rows = list(map_fn(sweep_row, [spec_template] * len(values), [ports] * len(values), values))
    last = None
    for row in rows:
        if row["error"]:
            continue
        if last is not None:
            row["monotonic"] = "yes" if row["fwhm_Bminus"] >= last else "no"
        last = row["fwhm_Bminus"]
    return rows
