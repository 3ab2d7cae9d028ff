"""Frozen figure recipes. Each recipe writes one CSV/JSON pair per panel."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import parse_config
from .dynamics import make_initial_state, suggest_cutoff
from .errors import SingularConfigurationError
from .hamiltonians import (
    ModelKind,
    ModelParams,
    doublet_block,
    effective_detuning,
    eigen_sweep,
    rwa_nmax,
    selective_cavity_frequency,
)
from .operators import DeformationSpec, HilbertLayout
from .runner import Dataset, _spectrum_dataset, compute_spectrum, write_dataset
from .spectrum import default_omega_grid, dvrs_lines, dvrs_longtime, kerr_longtime

__all__ = ["FIGURE_IDS", "ALIASES", "expand_ids", "reproduce_figure", "reproduce_figures"]

POINTS = 2001

# fig1: bare Kerr field, long-time spectra
FIG1_OMEGA_C = 1.0
FIG1_GAMMA = 0.05
FIG1_CHI = 0.2
FIG1_FOCK = (1, 2, 3)
FIG1_NBAR = (2.0, 4.0)

# fig2: eigenvalue sweeps
FIG2_CHI = 0.05
FIG2_OMEGA_C = 0.7692
FIG2_M = 2
FIG2_COUPLINGS = np.linspace(0.0, 0.3, 61)
FIG2_LEVELS = 12

# fig3: deformed vacuum Rabi doublet
FIG3_OMEGA_C = 0.8
FIG3_OMEGA0 = 0.25
FIG3_GAMMA = 0.01
FIG3_CHI = {"fig3a": 0.0, "fig3b": 0.125, "fig3c": 0.25}

FIG4_TEMPLATE = """
[model]
kind = DJC
deformation = linear_kerr
chi = 0.0125
omega_c = 0.9
Omega0 = 0.25
[state]
kind = fock_excited
n = {n}
[time]
periods = 16
reference_n = 4
[spectrum]
Gamma = 0.01
[run]
method = both
[output]
name = fig4_n{n}
"""
FIG4_N = (1, 3, 5)

FIG5 = """
[model]
kind = DJC
deformation = linear_kerr
chi = 0.0125
selective_m = 4
Omega0 = 0.125
[state]
kind = fock_excited
n = 4
[time]
periods = 2.0, 4.0, 8.0, 16.0, 32.0, 64.0
reference_n = 4
[spectrum]
Gamma = 0.01
[run]
method = both
[output]
name = fig5
"""

FIG6 = """
[model]
kind = DJC
deformation = linear_kerr
chi = 0.0125
selective_m = 2
Omega0 = 0.125
[state]
kind = coherent_excited
alpha = 2
[time]
periods = 2.0, 4.0, 8.0, 16.0, 32.0, 64.0
reference_n = 2
[spectrum]
Gamma = 0.01
[run]
method = numeric
[output]
name = fig6
"""

FIG7_TEMPLATE = """
[model]
kind = DJC
deformation = linear_kerr
chi = {chi!r}
selective_m = 2
Omega0 = 0.125
[state]
kind = coherent_excited
alpha = 2
[time]
periods = 16
reference_n = 2
[spectrum]
Gamma = 0.01
[run]
method = numeric
[output]
name = fig7_chi{index}
"""
FIG7_CHI = (0.0, 0.0025, 0.005, 0.0075, 0.01, 0.0125)

FIGURE_IDS = (
    "fig1a", "fig1b", "fig1c", "fig1d",
    "fig2a", "fig2b", "fig2c",
    "fig3a", "fig3b", "fig3c",
    "fig4", "fig5", "fig6", "fig7",
)
ALIASES = {
    "fig1": ("fig1a", "fig1b", "fig1c", "fig1d"),
    "fig2": ("fig2a", "fig2b", "fig2c"),
    "fig3": ("fig3a", "fig3b", "fig3c"),
    "all": FIGURE_IDS,
}


def _kerr(chi):
    return ModelParams(1.0, FIG1_OMEGA_C, 0.0, DeformationSpec.linear_kerr(chi))


def _fig1(fig_id):
    chi = 0.0 if fig_id == "fig1a" else FIG1_CHI
    params = _kerr(chi)
    curves = []
    if fig_id in ("fig1a", "fig1b"):
        for n in FIG1_FOCK:
            layout = HilbertLayout(suggest_cutoff("fock_field", n=n))
            curves.append((f"S_n{n}", make_initial_state("fock_field", layout, n=n), {"n": n}))
    else:
        kind = "coherent_field" if fig_id == "fig1c" else "thermal_field"
        for nbar in FIG1_NBAR:
            layout = HilbertLayout(suggest_cutoff(kind, nbar=nbar))
            state = make_initial_state(kind, layout, alpha=math.sqrt(nbar), nbar=nbar)
            curves.append((f"S_nbar{nbar:g}", state, {"nbar": nbar, "cutoff": layout.fock_cutoff,
                                                      "truncated_probability": state.deficit}))
    centres = []
    for _, state, _ in curves:
        probs = state.fock_distribution()
        weights = probs * np.arange(probs.size)
        keep = np.nonzero(weights > 1e-6 * weights.max())[0]
        centres.extend(FIG1_OMEGA_C * (1 + 2 * chi * keep))
    omega = default_omega_grid(centres, FIG1_GAMMA, POINTS)
    columns = [kerr_longtime(state, params, FIG1_GAMMA, omega) for _, state, _ in curves]
    rows = [[float(w)] + [float(c[i]) for c in columns] for i, w in enumerate(omega)]
    meta = {
        "figure": fig_id,
        "method": "closed_form_longtime",
        "params": params.to_dict(),
        "Gamma": FIG1_GAMMA,
        "curves": {name: info for name, _, info in curves},
        "state_kind": curves[0][1].kind,
    }
    return [Dataset(fig_id, ["omega"] + [c[0] for c in curves], rows, meta)]


def _sweep(kind, params, threads):
    return eigen_sweep(kind, params, 2.0 * params.omega_a * FIG2_COUPLINGS, HilbertLayout(12),
                       FIG2_LEVELS, threads=threads)


def _fig2(fig_id, threads=None):
    deformed = ModelParams(1.0, FIG2_OMEGA_C, 0.0, DeformationSpec.linear_kerr(FIG2_CHI))
    pairs = {
        "fig2a": (ModelKind.RABI, ModelKind.JC),
        "fig2b": (ModelKind.DJC, ModelKind.JC),
        "fig2c": (ModelKind.DRABI, ModelKind.DJC),
    }[fig_id]
    sweeps = [_sweep(kind, deformed, threads) for kind in pairs]
    nmax_jc, nmax_djc = [], []
    for c in FIG2_COUPLINGS:
        p = ModelParams(1.0, FIG2_OMEGA_C, 2.0 * c, deformed.deformation)
        nmax_jc.append(rwa_nmax(p.undeformed()))
        try:
            nmax_djc.append(rwa_nmax(p))
        except SingularConfigurationError:
            nmax_djc.append(math.nan)
    header = ["coupling", "Omega0"]
    for kind, sw in zip(pairs, sweeps):
        header += [f"{kind.value}_E{j}" for j in range(FIG2_LEVELS)]
    header += ["nmax_JC", "nmax_DJC"]
    rows = []
    for i, c in enumerate(FIG2_COUPLINGS):
        row = [float(c), float(2.0 * c)]
        for sw in sweeps:
            row += [float(e) for e in sw.levels[i]]
        row += [float(nmax_jc[i]), float(nmax_djc[i])]
        rows.append(row)
    sel = doublet_block(deformed, FIG2_M)
    meta = {
        "figure": fig_id,
        "models": [k.value for k in pairs],
        "params": deformed.to_dict(),
        "selective_m": FIG2_M,
        "selective_omega_c_exact": selective_cavity_frequency(FIG2_M, FIG2_CHI),
        "effective_detuning_at_m": effective_detuning(deformed, FIG2_M),
        "selective_rectangle": {
            "coupling_range": [0.0, 0.05],
            "energy": sel.E0,
            "bare_states": ["|e,2>", "|g,3>"],
        },
        "cutoffs": {k.value: sw.cutoffs for k, sw in zip(pairs, sweeps)},
    }
    return [Dataset(fig_id, header, rows, meta)]


def _fig3(fig_id):
    chi = FIG3_CHI[fig_id]
    params = ModelParams(1.0, FIG3_OMEGA_C, FIG3_OMEGA0, DeformationSpec.linear_kerr(chi))
    centres, weights = dvrs_lines(params)
    omega = default_omega_grid(centres, FIG3_GAMMA, POINTS)
    S = dvrs_longtime(params, FIG3_GAMMA, omega)
    delta = effective_detuning(params, 0)
    meta = {
        "figure": fig_id,
        "method": "closed_form_longtime",
        "params": params.to_dict(),
        "Gamma": FIG3_GAMMA,
        "effective_detuning_0": delta,
        "detuning_sign": int(np.sign(round(delta, 14))),
        "line_centres": centres,
        "line_weights": weights,
    }
    return [Dataset(fig_id, ["omega", "S"], [[float(w), float(s)] for w, s in zip(omega, S)], meta)]


def _scenario(text, extra=None):
    cfg = parse_config(text)
    run = compute_spectrum(cfg)
    ds = _spectrum_dataset(cfg, run)
    ds.metadata.update(extra or {})
    return ds


def _fig4():
    out = []
    for n in FIG4_N:
        cfg = parse_config(FIG4_TEMPLATE.format(n=n))
        signs = {str(m): int(np.sign(round(effective_detuning(cfg.params, m), 14))) for m in (n - 1, n)}
        out.append(_scenario(FIG4_TEMPLATE.format(n=n), {
            "figure": "fig4",
            "effective_detuning": {str(m): effective_detuning(cfg.params, m) for m in (n - 1, n)},
            "effective_detuning_sign": signs,
        }))
    return out


def _fig7():
    out = []
    for index, chi in enumerate(FIG7_CHI):
        text = FIG7_TEMPLATE.format(chi=chi, index=index)
        out.append(_scenario(text, {"figure": "fig7", "chi": chi}))
    return out


def _build(fig_id, threads=None):
    if fig_id.startswith("fig1"):
        return _fig1(fig_id)
    if fig_id.startswith("fig2"):
        return _fig2(fig_id, threads)
    if fig_id.startswith("fig3"):
        return _fig3(fig_id)
    if fig_id == "fig4":
        return _fig4()
    if fig_id == "fig5":
        return [_scenario(FIG5, {"figure": "fig5"})]
    if fig_id == "fig6":
        return [_scenario(FIG6, {"figure": "fig6"})]
    if fig_id == "fig7":
        return _fig7()
    raise ValueError(f"unknown figure id {fig_id!r}; known: {', '.join(FIGURE_IDS)} or {', '.join(ALIASES)}")


def expand_ids(ids):
    out = []
    for i in ids:
        for j in ALIASES.get(i, (i,)):
            if j not in FIGURE_IDS:
                raise ValueError(f"unknown figure id {j!r}; known: {', '.join(FIGURE_IDS)} or {', '.join(ALIASES)}")
            if j not in out:
                out.append(j)
    return out


def reproduce_figure(fig_id, out_dir, threads=None):
    """Write every dataset of one figure; returns the CSV paths."""
    return [write_dataset(out_dir, ds, f"figure {fig_id}")[0] for ds in _build(fig_id, threads)]


def reproduce_figures(ids, out_dir, threads=None):
    """Run several recipes, in parallel when ``threads`` > 1; output order follows ``ids``."""
    ids = expand_ids(ids)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: reproduce_figure(i, out_dir), ids))
    else:
        results = [reproduce_figure(i, out_dir) for i in ids]
    return dict(zip(ids, results))
