"""Datasets for the transmission, spectrum and linewidth figures.

Each recipe writes CSVs into a directory using fixed parameter sets
(``kappa = g`` throughout) and returns the written paths.  The linewidth
recipe also writes ``checks.csv`` with property checks evaluated on the
emitted files themselves.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .analytics import (bound_state_closed_form, lorentzian_prediction, secular_basis,
                        strong_hopping_width)
from .commands import linewidth_table, modes_table, occupation_profiles, spectrum_table
from .config import RunConfig, build_config
from .resonance import quasi_bound_survey
from .scattering import scatter
from .tables import read_csv, write_csv

FIG2_CASES = [(3, 0.1), (3, 0.5), (13, 0.1), (13, 0.5)]
FIG3_SIZES = (3, 13)
FIG3_J = np.round(np.linspace(0.0, 2.0, 201), 10)
FIG4_SIZES = (3, 13, 101)
FIG4_J = (0.05, 0.07, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 7.0, 10.0)
FIG4_OCCUPATION_J = (0.1, 0.5, 3.0)
CHECK_COLUMNS = ["criterion", "case", "measured", "target", "tolerance", "passed"]


def _tag(n: int, j: float) -> str:
    return f"N{n}_J{j:g}"


def fig2(out: Path, map_fn=map, chunks: int = 1) -> list[Path]:
    paths = []
    for n, j in FIG2_CASES:
        cfg = build_config({"N": n, "J_over_g": j, "kappa_over_g": 1.0,
                            "delta_min": -1.5, "delta_max": 1.5, "points": 3001,
                            "method": "secular"})
        cols, rows = spectrum_table(cfg, map_fn, chunks)
        paths.append(write_csv(out / f"fig2_spectrum_{_tag(n, j)}.csv", cols, rows))
        if j == 0.1:
            paths.append(_inset(out, cfg))
    return paths


def _inset(out: Path, cfg: RunConfig) -> Path:
    """Zoom on the lower quasi-bound peak with the Lorentzian approximation."""
    spec, ports = cfg.array_spec(), cfg.ports()
    basis = secular_basis(spec)
    lower, _ = quasi_bound_survey(spec, ports, basis)
    pred = lorentzian_prediction(spec, ports, "B-")
    closed = bound_state_closed_form(spec)
    offsets = lower.offset + np.linspace(-5, 5, 401) * lower.fwhm
    rows = []
    for d in offsets:
        t = scatter(basis, ports, float(d), about=lower.mode_index).T
        rows.append([d, t, float(pred.transmission(d))])
    cols = ["delta_from_bound_over_g", "T", "T_lorentzian"]
    path = write_csv(out / f"fig2_inset_{_tag(cfg.N, cfg.J_over_g)}.csv", cols, rows)
    write_csv(out / f"fig2_inset_{_tag(cfg.N, cfg.J_over_g)}_meta.csv",
              ["bound_energy_numeric", "bound_energy_closed_form", "peak_offset", "fwhm"],
              [[lower.reference, closed.energy_minus, lower.offset, lower.fwhm]])
    return path


def fig3(out: Path, map_fn=map, chunks: int = 1) -> list[Path]:
    paths = []
    for n in FIG3_SIZES:
        cfg = build_config({"N": n, "J_over_g_list": [float(j) for j in FIG3_J if j > 0],
                            "method": "dense"})
        cols, rows = modes_table(cfg)
        zero = build_config({"N": n, "J_over_g": 0.0})
        rows = modes_table(zero)[1] + rows
        paths.append(write_csv(out / f"fig3_modes_N{n}.csv", cols, rows))
        closed = []
        for j in FIG3_J[1:]:
            bs = bound_state_closed_form(cfg.array_spec(float(j)))
            closed.append([float(j), bs.energy_minus, bs.energy_plus])
        paths.append(write_csv(out / f"fig3_closed_form_N{n}.csv",
                               ["J_over_g", "omega_Bminus_over_g", "omega_Bplus_over_g"], closed))
    return paths


def fig4(out: Path, map_fn=map, chunks: int = 1) -> list[Path]:
    paths = []
    for n in FIG4_SIZES:
        cfg = build_config({"N": n, "J_over_g_list": list(FIG4_J), "kappa_over_g": 1.0})
        cols, rows = linewidth_table(cfg, map_fn)
        paths.append(write_csv(out / f"fig4_linewidths_N{n}.csv", cols, rows))
    for j in FIG4_OCCUPATION_J:
        cfg = build_config({"N": 101, "J_over_g": j, "kappa_over_g": 1.0})
        prof = occupation_profiles(cfg)
        rows = [[i + 1, prof["B-"][i], prof["B+"][i]] for i in range(cfg.N)]
        paths.append(write_csv(out / f"fig4_occupation_{_tag(101, j)}.csv",
                               ["j", "n_Bminus", "n_Bplus"], rows))
    checks = fig4_checks(out)
    paths.append(write_csv(out / "checks.csv", CHECK_COLUMNS, checks))
    return paths


def _row_at(rows: list[dict], j: float) -> dict:
    for row in rows:
        if math.isclose(float(row["j_over_g"]), j, rel_tol=1e-12):
            return row
    raise KeyError(f"no row for J/g = {j}")


def _relative_check(name, case, measured, target, tol):
    ok = math.isfinite(measured) and abs(measured / target - 1) <= tol
    return [name, case, measured, target, tol, ok]


def fig4_checks(out: Path, kappa: float = 1.0) -> list[list]:
    """Linewidth and localization checks read back from the emitted CSVs."""
    checks = []
    lw3 = read_csv(out / "fig4_linewidths_N3.csv")
    lw13 = read_csv(out / "fig4_linewidths_N13.csv")
    for j in (0.05, 0.1, 0.2):
        row = _row_at(lw3, j)
        for tag in ("Bminus", "Bplus"):
            checks.append(_relative_check("weak_hopping_linewidth", f"N=3 J/g={j:g} {tag}",
                                          float(row[f"fwhm_{tag}"]), kappa * j ** 2, 0.10))
    row = _row_at(lw13, 0.1)
    for tag in ("Bminus", "Bplus"):
        checks.append(_relative_check("weak_hopping_linewidth", f"N=13 J/g=0.1 {tag}",
                                      float(row[f"fwhm_{tag}"]), 1e-12 * kappa, 0.25))
    for n, rows in ((3, lw3), (13, lw13)):
        row = _row_at(rows, 10.0)
        target = 2 * strong_hopping_width(n, kappa)
        for tag in ("Bminus", "Bplus"):
            checks.append(_relative_check("strong_hopping_linewidth", f"N={n} J/g=10 {tag}",
                                          float(row[f"fwhm_{tag}"]), target, 0.10))
    occ = read_csv(out / "fig4_occupation_N101_J0.1.csv")
    xi = bound_state_closed_form(RunConfig(N=101, J_over_g=0.1).array_spec()).xi
    for tag in ("Bminus", "Bplus"):
        slope = central_log_slope([float(r[f"n_{tag}"]) for r in occ])
        checks.append(_relative_check("localization_slope", f"N=101 J/g=0.1 {tag}",
                                      slope, -2.0 / xi, 0.05))
    return checks


def central_log_slope(occupation, half_window: int = 4) -> float:
    """Least-squares slope of log occupation versus distance from the centre."""
    occ = np.asarray(occupation, dtype=float)
    c = len(occ) // 2
    idx = np.arange(c - half_window, c + half_window + 1)
    return float(np.polyfit(np.abs(idx - c), np.log(occ[idx]), 1)[0])


RECIPES = {"fig2": fig2, "fig3": fig3, "fig4": fig4}
