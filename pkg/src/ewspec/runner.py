"""Scenario execution and dataset output (CSV plus JSON metadata sidecar)."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__, kernels
from .analytic import djc_atom_kernel, jc_atom_kernel, jc_field_kernel, kerr_field_kernel
from .config import ScenarioConfig
from .dynamics import (
    Evolution,
    TimeGrid,
    content_frequency,
    emission_lines,
    line_summary,
    make_initial_state,
    suggest_cutoff,
    two_time_correlation,
)
from .errors import ConfigError
from .hamiltonians import ModelKind, build_hamiltonian, eigen_sweep
from .operators import HilbertLayout, ladder_matrices, sigma_minus, tensor_product
from .spectrum import SpectrumRequest, default_omega_grid, ew_closed_form, ew_numeric

__all__ = [
    "RABI_CUTOFF_MARGIN",
    "Dataset",
    "output_directory",
    "write_dataset",
    "resolve_cutoff",
    "build_problem",
    "closed_form_kernel",
    "compute_spectrum",
    "compute_eigensweep",
    "compute_correlation",
    "run_scenario",
    "run_eigensweep",
    "run_correlation",
]

RABI_CUTOFF_MARGIN = 16
DEFAULT_OUT = "ewspec_out"


@dataclass
class Dataset:
    name: str
    header: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def csv_text(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return value


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else repr(value)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def output_directory(explicit=None, cfg: ScenarioConfig | None = None):
    """--out flag, then EWSPEC_OUT, then the config's [output] directory."""
    if explicit:
        return explicit
    if os.environ.get("EWSPEC_OUT"):
        return os.environ["EWSPEC_OUT"]
    if cfg is not None and cfg.output_directory:
        return cfg.output_directory
    return DEFAULT_OUT


def write_dataset(directory, dataset: Dataset, command="spectrum"):
    """Write ``<name>.csv`` and ``<name>.json``; returns both paths."""
    os.makedirs(directory, exist_ok=True)
    csv_path = os.path.join(directory, dataset.name + ".csv")
    json_path = os.path.join(directory, dataset.name + ".json")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dataset.csv_text())
    meta = {
        "name": dataset.name,
        "command": command,
        "version": __version__,
        "backend": kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        **dataset.metadata,
    }
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(meta), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def resolve_cutoff(cfg: ScenarioConfig):
    """Fock cutoff: explicit, else the state's minimum (plus a margin for Rabi models)."""
    if cfg.cutoff is not None:
        return cfg.cutoff
    st = cfg.state
    nbar = st["nbar"] if st["nbar"] is not None else abs(st["alpha"]) ** 2
    N = suggest_cutoff(st["kind"], n=st["n"], nbar=nbar)
    if not cfg.kind.rotating_wave and cfg.kind is not ModelKind.FIELD_ONLY:
        N += RABI_CUTOFF_MARGIN
    return N


def build_problem(cfg: ScenarioConfig, N=None):
    """(H, O, state, layout) for a scenario."""
    N = N or resolve_cutoff(cfg)
    layout = HilbertLayout(N)
    H = build_hamiltonian(cfg.kind, cfg.params, layout)
    a, _, _ = ladder_matrices(layout)
    if cfg.kind is ModelKind.FIELD_ONLY:
        O = a
    elif cfg.probe == "atom":
        O = tensor_product(sigma_minus(), np.eye(N))
    else:
        O = tensor_product(np.eye(2), a)
    st = cfg.state
    state = make_initial_state(st["kind"], layout, n=st["n"], alpha=st["alpha"],
                               nbar=st["nbar"], excited=st["excited"])
    return H, O, state, layout


def closed_form_kernel(cfg: ScenarioConfig, state=None):
    """Exponential-sum kernel for scenarios with a closed-form correlation."""
    kind, params, st = cfg.kind, cfg.params, cfg.state
    spec = params.deformation
    kerr_like = spec.kind in ("identity", "linear_kerr")
    if kind is ModelKind.FIELD_ONLY and kerr_like:
        if state is None:
            state = build_problem(cfg)[2]
        return kerr_field_kernel(params, state.fock_distribution())
    if st["kind"] == "fock_excited":
        resonant = abs(params.detuning) <= 1e-12
        if kind is ModelKind.JC or (kind is ModelKind.DJC and spec.is_identity):
            if resonant:
                return jc_atom_kernel(params, st["n"]) if cfg.probe == "atom" else jc_field_kernel(params, st["n"])
            if cfg.probe == "atom" and st["n"] >= 1:
                return djc_atom_kernel(params.undeformed(), st["n"])
        if kind is ModelKind.DJC and kerr_like and cfg.probe == "atom" and st["n"] >= 1:
            return djc_atom_kernel(params, st["n"])
    raise ConfigError(
        f"no closed-form correlation for model {kind.value}, deformation {spec.kind}, "
        f"state {st['kind']} (n={st['n']}), probe {cfg.probe}; use method = numeric",
        "run.method",
    )


def _interval_multiple(times):
    """Smallest interval count factor that puts every time on the grid of max(times)."""
    t_max = max(times)
    multiple = 1
    for t in times:
        if t <= 0:
            continue
        ratio = Fraction(t / t_max).limit_denominator(10_000)
        if abs(float(ratio) - t / t_max) > 1e-12:
            raise ConfigError("observation times must be rational multiples of each other", "time")
        multiple = multiple * ratio.denominator // math.gcd(multiple, ratio.denominator)
    return multiple


def _require_times(cfg):
    if not cfg.times:
        raise ConfigError("no observation time: give [time] t_final, gamma_t or periods (with Omega0 > 0)",
                          "time")


@dataclass
class SpectrumRun:
    omega: np.ndarray
    times: list
    numeric: list
    closed: list
    metadata: dict


def compute_spectrum(cfg: ScenarioConfig):
    """Evaluate the scenario's spectra at every requested observation time."""
    if cfg.points < 1:
        raise ConfigError("empty omega grid", "spectrum.points")
    _require_times(cfg)
    want_numeric = cfg.method in ("numeric", "both")
    want_closed = cfg.method in ("closed_form", "both")
    N = resolve_cutoff(cfg)
    H, O, state, layout = build_problem(cfg, N)
    kernel = closed_form_kernel(cfg, state) if want_closed else None

    evo = Evolution(H)
    lines, amps, powers = emission_lines(evo, O, state)
    peaks, peak_weights, present = line_summary(lines, amps, powers)
    if cfg.omega_min is not None:
        omega = np.linspace(cfg.omega_min, cfg.omega_max, cfg.points)
    else:
        if peaks.size == 0:
            raise ConfigError("the probe emits nothing from this state; give omega_min/omega_max",
                              "spectrum.omega_min")
        omega = default_omega_grid(peaks, cfg.Gamma, cfg.points)
    frame = cfg.frame_shift if cfg.frame_shift is not None else 0.5 * (omega[0] + omega[-1])

    meta = {
        "config": cfg.to_dict(),
        "resolved": {
            "model": cfg.kind.value,
            "params": cfg.params.to_dict(),
            "cutoff": N,
            "dimension": H.shape[0],
            "state": {**state.params, "kind": state.kind, "truncated_probability": state.deficit},
            "probe": cfg.probe,
            "times": list(cfg.times),
            "time_spec": cfg.time_spec,
            "Gamma": cfg.Gamma,
            "omega_min": float(omega[0]),
            "omega_max": float(omega[-1]),
            "points": int(omega.size),
            "frame_shift": frame,
            "predicted_peaks": peaks,
            "predicted_peak_weights": peak_weights,
        },
        "methods": [],
    }

    t_max = max(cfg.times)
    numeric, closed = [], []
    if want_numeric:
        if t_max == 0:
            numeric = [np.zeros_like(omega) for _ in cfg.times]
        else:
            fastest = float(np.abs(omega - frame).max()) + content_frequency(lines, present, frame)
            grid = TimeGrid.resolving(t_max, fastest, cfg.time_spec["samples_per_period"],
                                      multiple_of=_interval_multiple(cfg.times))
            corr = two_time_correlation(H, O, state, grid, frame_shift=frame, evolution=evo,
                                        probe=cfg.probe)
            info = None
            for t in cfg.times:
                res = ew_numeric(corr, SpectrumRequest(cfg.Gamma, t, omega), path=cfg.path,
                                 order=cfg.quadrature_order)
                numeric.append(res.S)
                info = res.info if res.info.get("samples") else info
            meta["resolved"].update(time_samples=grid.samples, time_step=grid.step,
                                    quadrature_order=(info or {}).get("quadrature_order"))
            meta["methods"].append("numeric_gram" if cfg.path == "gram" else "numeric_trapezoid")
    if want_closed:
        for t in cfg.times:
            closed.append(ew_closed_form(kernel, SpectrumRequest(cfg.Gamma, t, omega)).S)
        meta["methods"].append("closed_form")
        meta["resolved"]["closed_form_terms"] = int(kernel.coeffs.size)
    if want_numeric and want_closed:
        meta["max_abs_difference"] = max(float(np.abs(a - b).max()) for a, b in zip(numeric, closed))
    return SpectrumRun(omega, list(cfg.times), numeric, closed, meta)


def _spectrum_dataset(cfg, run: SpectrumRun):
    cols = []
    if run.numeric:
        cols.append(("S_numeric" if run.closed else "S", run.numeric))
    if run.closed:
        cols.append(("S_closed_form" if run.numeric else "S", run.closed))
    sweep = len(run.times) > 1
    header = (["t"] if sweep else []) + ["omega"] + [c[0] for c in cols]
    rows = []
    for k, t in enumerate(run.times):
        for i, w in enumerate(run.omega):
            row = ([float(t)] if sweep else []) + [float(w)] + [float(c[1][k][i]) for c in cols]
            rows.append(row)
    return Dataset(cfg.name, header, rows, run.metadata)


def run_scenario(cfg: ScenarioConfig, out_dir=None):
    """Compute the scenario and write its dataset; returns (csv_path, json_path)."""
    run = compute_spectrum(cfg)
    return write_dataset(output_directory(out_dir, cfg), _spectrum_dataset(cfg, run), "spectrum")


def compute_eigensweep(cfg: ScenarioConfig, threads=None):
    sw = cfg.sweep
    couplings = np.linspace(sw["coupling_min"], sw["coupling_max"], sw["points"])
    Omega0 = 2.0 * cfg.params.omega_a * couplings
    k = sw["levels"]
    start = cfg.cutoff or max(8, k // 2 + 3)
    result = eigen_sweep(cfg.kind, cfg.params, Omega0, HilbertLayout(start), k,
                         rtol=sw["rtol"], threads=threads)
    header = ["coupling", "Omega0"] + [f"E{j}" for j in range(k)] + ["cutoff"]
    rows = [
        [float(c), float(W)] + [float(e) for e in levels] + [int(N)]
        for c, W, levels, N in zip(couplings, Omega0, result.levels, result.cutoffs)
    ]
    meta = {"config": cfg.to_dict(), "resolved": {"model": cfg.kind.value, "params": cfg.params.to_dict()}}
    return Dataset(cfg.name, header, rows, meta)


def run_eigensweep(cfg: ScenarioConfig, out_dir=None, threads=None):
    return write_dataset(output_directory(out_dir, cfg), compute_eigensweep(cfg, threads), "eigensweep")


def compute_correlation(cfg: ScenarioConfig):
    """G(t1, t2) on a uniform samples x samples grid over [0, max(times)]."""
    _require_times(cfg)
    t_max = max(cfg.times)
    if t_max <= 0:
        raise ConfigError("correlation output needs a positive observation time", "time")
    samples = max(2, cfg.correlation_samples)
    H, O, state, _ = build_problem(cfg)
    grid = TimeGrid(t_max, samples)
    corr = two_time_correlation(H, O, state, grid, probe=cfg.probe)
    G = corr.values
    t = grid.values
    header = ["t1", "t2", "G_re", "G_im"]
    closed = None
    if cfg.method in ("closed_form", "both"):
        kernel = closed_form_kernel(cfg, state)
        T1, T2 = np.meshgrid(t, t, indexing="ij")
        closed = kernel(T1, T2)
        header += ["G_closed_re", "G_closed_im"]
        if cfg.method == "closed_form":
            header = ["t1", "t2", "G_closed_re", "G_closed_im"]
    rows = []
    for i in range(samples):
        for j in range(samples):
            row = [float(t[i]), float(t[j])]
            if cfg.method != "closed_form":
                row += [float(G[i, j].real), float(G[i, j].imag)]
            if closed is not None:
                row += [float(closed[i, j].real), float(closed[i, j].imag)]
            rows.append(row)
    meta = {
        "config": cfg.to_dict(),
        "resolved": {"model": cfg.kind.value, "params": cfg.params.to_dict(),
                     "cutoff": state.fock_cutoff, "t_final": t_max, "samples": samples},
    }
    if closed is not None and cfg.method == "both":
        meta["max_abs_difference"] = float(np.abs(G - closed).max())
    return Dataset(cfg.name, header, rows, meta)


def run_correlation(cfg: ScenarioConfig, out_dir=None):
    return write_dataset(output_directory(out_dir, cfg), compute_correlation(cfg), "correlation")
