"""Table builders behind the CLI subcommands.

Each returns ``(columns, rows)``; writing is left to the caller so that
the same tables back both the CLI and the figure recipes.
"""

from __future__ import annotations

import numpy as np

from .analytics import secular_basis
from .config import ConfigError, RunConfig
from .core import ModeBasis, Ports, mode_basis
from .resonance import SWEEP_COLUMNS, linewidth_sweep, quasi_bound_survey
from .scattering import mode_excitations, scatter, transmission_spectrum

SPECTRUM_COLUMNS = ["delta_over_g", "T", "R", "phase_t"]
MODE_COLUMNS = ["J_over_g", "n", "omega_over_g", "qubit_weight", "u_1", "u_N"]


def basis_for(cfg: RunConfig, j_over_g: float | None = None, method: str | None = None) -> ModeBasis:
    spec = cfg.array_spec(j_over_g)
    method = method or cfg.method
    if method == "secular" and spec.hop_j > 0:
        return secular_basis(spec)
    return mode_basis(spec)


def _spectrum_chunk(basis: ModeBasis, ports: Ports, grid) -> list[tuple]:
    spec = transmission_spectrum(basis, ports, grid)
    return list(zip(spec.energy.tolist(), spec.T.tolist(), spec.R.tolist(), spec.phase.tolist()))


def spectrum_table(cfg: RunConfig, map_fn=map, chunks: int = 1):
    basis = basis_for(cfg)
    ports = cfg.ports()
    pieces = np.array_split(cfg.grid(), max(1, chunks))
    rows = []
    for part in map_fn(_spectrum_chunk, [basis] * len(pieces), [ports] * len(pieces), pieces):
        rows.extend(part)
    columns = list(SPECTRUM_COLUMNS)
    if cfg.unit_MHz:
        columns.append("delta_MHz")
        rows = [row + (row[0] * cfg.g,) for row in rows]
    return columns, rows


def modes_table(cfg: RunConfig):
    columns = list(MODE_COLUMNS)
    if cfg.unit_MHz:
        columns.append("omega_MHz")
    rows = []
    for j in cfg.j_values():
        basis = basis_for(cfg, j)
        for n in range(basis.n_modes):
            row = [j, n, basis.energies[n], basis.qubit_amps[n] ** 2,
                   basis.photon_amps[n, 0], basis.photon_amps[n, -1]]
            if cfg.unit_MHz:
                row.append(basis.energies[n] * cfg.g)
            rows.append(row)
    return columns, rows


def linewidth_table(cfg: RunConfig, map_fn=map):
    rows = linewidth_sweep(cfg.array_spec(), cfg.ports(), cfg.j_values(), map_fn=map_fn)
    columns = list(SWEEP_COLUMNS)
    if cfg.unit_MHz:
        extra = ["fwhm_Bminus_MHz", "fwhm_Bplus_MHz", "tau_Bminus_s", "tau_Bplus_s", "tau_weak_s"]
        columns[-2:-2] = extra
        for row in rows:
            for tag in ("Bminus", "Bplus"):
                fwhm_mhz = row[f"fwhm_{tag}"] * cfg.g
                row[f"fwhm_{tag}_MHz"] = fwhm_mhz
                # Lifetime is the inverse half width; MHz -> s^-1.
                row[f"tau_{tag}_s"] = 2.0 / (fwhm_mhz * 1e6)
            row["tau_weak_s"] = 2.0 / (row["fwhm_weak"] * cfg.g * 1e6)
    return columns, rows


def occupation_profiles(cfg: RunConfig, j_over_g: float | None = None) -> dict:
    """Site occupations at the located quasi-bound peaks, keyed by branch."""
    if not (cfg.kappa_left > 0 and cfg.kappa_right > 0):
        raise ConfigError("occupation needs both kappa_left_over_g and kappa_right_over_g > 0")
    spec = cfg.array_spec(j_over_g)
    if spec.hop_j <= 0:
        raise ConfigError("occupation needs J_over_g > 0")
    basis = secular_basis(spec)
    ports = cfg.ports()
    peaks = quasi_bound_survey(spec, ports, basis)
    out = {}
    for peak in peaks:
        res = scatter(basis, ports, peak.offset, about=peak.mode_index)
        out[peak.label] = mode_excitations(basis, ports, res).site_occupation
    return out


def occupation_table(cfg: RunConfig):
    profiles = occupation_profiles(cfg)
    labels = ["B-", "B+"] if cfg.branch == "both" else [cfg.branch]
    columns = ["j"] + ["n_" + ("Bminus" if b == "B-" else "Bplus") for b in labels]
    rows = [[j + 1] + [profiles[b][j] for b in labels] for j in range(cfg.N)]
    return columns, rows
