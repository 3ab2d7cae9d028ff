"""Acceptance battery: one check per criterion, each reporting measured errors and runtime."""
from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytic import (
    atom_corr_djc,
    atom_corr_jc,
    djc_atom_kernel,
    field_corr_jc,
    jc_atom_kernel,
    jc_field_kernel,
    kerr_field_corr,
    kerr_field_kernel,
)
from .dynamics import (
    CorrelationGrid,
    Evolution,
    TimeGrid,
    make_initial_state,
    suggest_cutoff,
    two_time_correlation,
)
from .hamiltonians import (
    ModelKind,
    ModelParams,
    build_hamiltonian,
    doublet_block,
    effective_detuning,
    rwa_nmax,
    selective_cavity_frequency,
)
from .operators import (
    DeformationSpec,
    HilbertLayout,
    commutator,
    ladder_matrices,
    parity_operator,
    sigma_minus,
    tensor_product,
)
from .spectrum import (
    SpectrumRequest,
    default_omega_grid,
    dvrs_lines,
    dvrs_longtime,
    ew_closed_form,
    ew_numeric,
    find_peaks,
    kerr_longtime,
    vrs_fulltime,
    vrs_longtime,
)

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all", "perturbed_atom_corr_djc", "format_report"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    tolerance: str = ""
    runtime: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        return f"[{tag}] {self.number:2d} {self.title}: {parts} | tol {self.tolerance} | {self.runtime:.2f} s"


def _short(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.3e}"
    return str(v)


def perturbed_atom_corr_djc(params, n, t1, t2):
    """Deliberately wrong transcription: the lower-doublet weights are swapped."""
    from .analytic import _djc_pieces

    phi_n, d, phi_m, dm, dE = _djc_pieces(params, n)
    phi_plus, phi_minus = phi_n + phi_m, phi_n - phi_m
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    prefactor = np.exp(1j * dE * (t1 - t2)) * np.exp(-0.5j * (phi_minus * t2 + phi_plus * t1)) / 8.0
    first = np.exp(1j * phi_n * t1) * (1 + d) + (1 - d)
    second = (1 + d) + np.exp(1j * phi_n * t2) * (1 - d)
    third = np.exp(1j * phi_m * (t1 - t2)) * (1 - dm) + (1 + dm)
    return prefactor * first * second * third


def _atom_op(N):
    return tensor_product(sigma_minus(), np.eye(N))


def _field_op(N):
    return tensor_product(np.eye(2), ladder_matrices(HilbertLayout(N))[0])


def _peak_match(omega, S, S_ref):
    """Errors between the peaks of S and those of a reference curve on the same grid."""
    pos, hts = find_peaks(omega, S)
    rpos, rhts = find_peaks(omega, S_ref)
    step = omega[1] - omega[0]
    if pos.size != rpos.size or pos.size == 0:
        return {"peaks": int(pos.size), "reference_peaks": int(rpos.size)}, step, False
    return {
        "position_error_steps": float(np.abs(pos - rpos).max() / step),
        "height_rel_error": float(np.abs(hts / rhts - 1).max()),
        "separation": float(pos[-1] - pos[0]) if pos.size > 1 else 0.0,
    }, step, True


# 1 ----------------------------------------------------------------------
def c1_kerr_fock():
    chi, Gamma = 0.2, 0.05
    params = ModelParams(1.0, 1.0, 0.0, DeformationSpec.linear_kerr(chi))
    t = 20.0 / Gamma
    pos_err, h_err, slowest, ok = 0.0, 0.0, 0.0, True
    for n in (1, 2, 3):
        start = time.perf_counter()
        layout = HilbertLayout(suggest_cutoff("fock_field", n=n))
        H = build_hamiltonian(ModelKind.FIELD_ONLY, params, layout)
        a = ladder_matrices(layout)[0]
        state = make_initial_state("fock_field", layout, n=n)
        centre = params.omega_c * (1 + 2 * chi * n)
        omega = default_omega_grid([centre], Gamma)
        grid = TimeGrid.resolving(t, float(np.abs(omega - centre).max()))
        corr = two_time_correlation(H, a, state, grid, frame_shift=centre)
        res = ew_numeric(corr, SpectrumRequest(Gamma, t, omega))
        pos, hts = res.peaks()
        slowest = max(slowest, time.perf_counter() - start)
        step = omega[1] - omega[0]
        if pos.size != 1:
            ok = False
            continue
        pos_err = max(pos_err, abs(pos[0] - centre) / step)
        h_err = max(h_err, abs(hts[0] / (2 * n / Gamma) - 1))
    ok = ok and pos_err <= 1 and h_err <= 0.02 and slowest <= 1.0
    return ok, {"position_error_steps": pos_err, "height_rel_error": h_err, "max_runtime_s": slowest}, \
        "1 step, 2%, 1 s/curve"


# 2 ----------------------------------------------------------------------
VRS = ModelParams(1.0, 1.0, 0.25)
VRS_GAMMA = 0.01


def _vrs_grid(points=2001):
    half = VRS.Omega0 / 2
    return default_omega_grid([VRS.omega_a - half, VRS.omega_a + half], VRS_GAMMA, points)


def c2_vrs():
    omega = _vrs_grid()
    t = 20.0 / VRS_GAMMA
    kernel = jc_atom_kernel(VRS, 0)
    fast = float(np.abs(omega - VRS.omega_a).max()) + kernel.max_frequency(VRS.omega_a)
    grid = TimeGrid.resolving(t, fast)
    corr = CorrelationGrid.from_kernel(kernel, grid, frame_shift=VRS.omega_a)
    S = ew_numeric(corr, SpectrumRequest(VRS_GAMMA, t, omega)).S
    measured, step, ok = _peak_match(omega, S, vrs_longtime(VRS, VRS_GAMMA, omega))
    if ok:
        measured["separation_error_steps"] = abs(measured.pop("separation") - VRS.Omega0) / step
        ok = (measured["position_error_steps"] <= 1 and measured["height_rel_error"] <= 1e-3
              and measured["separation_error_steps"] <= 1)
    return ok, measured, "1 step, 1e-3 relative height"


# 3 ----------------------------------------------------------------------
def c3_vrs_fulltime():
    omega = _vrs_grid(401)
    kernel = jc_atom_kernel(VRS, 0)
    worst = 0.0
    for gt in (0.5, 2.0, 5.0, 20.0):
        t = gt / VRS_GAMMA
        fast = float(np.abs(omega - VRS.omega_a).max()) + kernel.max_frequency(VRS.omega_a)
        corr = CorrelationGrid.from_function(
            lambda a, b: atom_corr_jc(VRS, 0, a, b), TimeGrid.resolving(t, fast),
            frame_shift=VRS.omega_a, max_frequency=kernel.max_frequency(VRS.omega_a),
        )
        S = ew_numeric(corr, SpectrumRequest(VRS_GAMMA, t, omega), path="trapezoid").S
        worst = max(worst, float(np.abs(S - vrs_fulltime(VRS, VRS_GAMMA, omega, t)).max()))
    omega = _vrs_grid()
    full = vrs_fulltime(VRS, VRS_GAMMA, omega, 20.0 / VRS_GAMMA)
    long = vrs_longtime(VRS, VRS_GAMMA, omega)
    conv = float(np.abs(full - long).max() / long.max())
    ok = worst <= 1e-6 and conv <= 1e-6
    return ok, {"numeric_abs_error": worst, "longtime_rel_difference": conv}, "1e-6 abs, 1e-6 rel"


# 4 ----------------------------------------------------------------------
def c4_dvrs():
    chi = 0.125
    resonant = ModelParams(1.0, selective_cavity_frequency(0, chi), 0.25, DeformationSpec.linear_kerr(chi))
    centres, _ = dvrs_lines(resonant)
    omega = default_omega_grid(centres, VRS_GAMMA)
    step = omega[1] - omega[0]
    pos, hts = find_peaks(omega, dvrs_longtime(resonant, VRS_GAMMA, omega))
    expected = 0.25 * math.sqrt(1.125)
    sep_err = abs(pos[-1] - pos[0] - expected) / step if pos.size == 2 else math.inf
    equal = abs(hts[0] / hts[-1] - 1) if pos.size == 2 else math.inf

    detuned = ModelParams(1.0, 0.8, 0.25)
    centres, weights = dvrs_lines(detuned)
    omega = default_omega_grid(centres, VRS_GAMMA)
    pos, hts = find_peaks(omega, dvrs_longtime(detuned, VRS_GAMMA, omega))
    ratio_err = abs(hts[0] / hts[-1] - weights[0] / weights[1]) if pos.size == 2 else math.inf
    ok = sep_err <= 1 and equal <= 1e-3 and ratio_err <= 1e-3
    return ok, {"separation_error_steps": sep_err, "height_asymmetry": equal, "ratio_abs_error": ratio_err}, \
        "1 step, 1e-3"


# 5 ----------------------------------------------------------------------
def _oracle_cases(djc):
    wa = 1.0
    jc = ModelParams(wa, wa, 0.25)
    kerr = ModelParams(wa, 1.0, 0.0, DeformationSpec.linear_kerr(0.2))
    chi = 0.0125
    for n in (1, 2, 3, 4):
        yield f"jc_atom n={n}", "JC", jc, ("fock_excited", n), "atom", lambda a, b, n=n: atom_corr_jc(jc, n, a, b)
        yield f"jc_field n={n}", "JC", jc, ("fock_excited", n), "field", lambda a, b, n=n: field_corr_jc(jc, n, a, b)
        yield f"kerr n={n}", "FieldOnly", kerr, ("fock_field", n), "field", None
        triples = {
            "resonant": 1.0 / (1 + 2 * chi),
            "selective": selective_cavity_frequency(n, chi),
            "detuned": 0.9,
        }
        for label, wc in triples.items():
            p = ModelParams(wa, wc, 0.125, DeformationSpec.linear_kerr(chi))
            yield f"djc {label} n={n}", "DJC", p, ("fock_excited", n), "atom", \
                lambda a, b, n=n, p=p: djc(p, n, a, b)
    yield "kerr coherent", "FieldOnly", kerr, ("coherent_field", 2.0), "field", None
    yield "kerr thermal", "FieldOnly", kerr, ("thermal_field", 2.0), "field", None


def c5_oracle(djc=atom_corr_djc, samples=32, seed=7):
    rng = np.random.default_rng(seed)
    worst, worst_case = 0.0, ""
    for name, kind, params, (skind, arg), probe, func in _oracle_cases(djc):
        if skind == "fock_field":
            N = suggest_cutoff(skind, n=arg)
        elif skind in ("coherent_field", "thermal_field"):
            N = suggest_cutoff(skind, nbar=arg)
        else:
            N = arg + 3
        layout = HilbertLayout(N)
        H = build_hamiltonian(kind, params, layout)
        if skind == "fock_field":
            state = make_initial_state(skind, layout, n=arg)
        elif skind == "coherent_field":
            state = make_initial_state(skind, layout, alpha=math.sqrt(arg))
        elif skind == "thermal_field":
            state = make_initial_state(skind, layout, nbar=arg)
        else:
            state = make_initial_state(skind, layout, n=arg)
        if kind == "FieldOnly":
            O = ladder_matrices(layout)[0]
            func = lambda a, b, s=state, p=params: kerr_field_corr(p, s, a, b)
        else:
            O = _atom_op(N) if probe == "atom" else _field_op(N)
        nref = arg if isinstance(arg, int) else 4
        span = 64 * 2 * math.pi / max(params.Omega0 * math.sqrt(nref + 1), 0.1)
        times = np.sort(rng.uniform(0.0, span, samples))
        evo = Evolution(H)
        G_num = 0.0
        for w, psi in state.components:
            W = evo.trajectory(O, psi, times)
            G_num = G_num + w * (W.conj() @ W.T)
        T1, T2 = np.meshgrid(times, times, indexing="ij")
        err = float(np.abs(G_num - func(T1, T2)).max())
        if err > worst:
            worst, worst_case = err, name
    return worst <= 1e-8, {"max_abs_error": worst, "worst_case": worst_case}, "1e-8 abs"


# 6 ----------------------------------------------------------------------
def c6_selective():
    chi = 0.05
    wc = selective_cavity_frequency(2, chi)
    freq_err = abs(wc - 1.0 / 1.3)
    params = ModelParams(1.0, wc, 0.25, DeformationSpec.linear_kerr(chi))
    det = abs(effective_detuning(params, 2))
    worst = 0.0
    N = 12
    for W in (0.05, 0.25, 0.6):
        p = ModelParams(1.0, wc, W, params.deformation)
        H = build_hamiltonian(ModelKind.DJC, p, HilbertLayout(N))
        # the RWA Hamiltonian is block diagonal; each doublet block is an exact 2x2
        for n in range(0, 11):
            i, j = 2 * n + 1, 2 * (n + 1)
            numeric = np.linalg.eigvalsh(H[np.ix_([i, j], [i, j])])
            d = doublet_block(p, n)
            analytic = np.array([d.E_minus, d.E_plus])
            worst = max(worst, float(np.abs(numeric - analytic).max() / np.abs(analytic).max()))
        full = np.linalg.eigvalsh(H)
        blocks = [d for n in range(N - 1) for d in (doublet_block(p, n).E_minus, doublet_block(p, n).E_plus)]
        spectrum_err = float(np.abs(np.sort(full)[1:-1] - np.sort(blocks)).max() / np.abs(full).max())
        worst = max(worst, spectrum_err)
    ok = freq_err <= 1e-12 and det <= 1e-12 and worst <= 1e-10
    return ok, {"omega_c_error": freq_err, "effective_detuning": det, "eigen_rel_error": worst}, \
        "1e-12, 1e-12, 1e-10 relative"


# 7 ----------------------------------------------------------------------
def c7_rwa_bound():
    base = ModelParams(1.0, 1.0, 0.25, DeformationSpec.linear_kerr(0.0))
    limit = rwa_nmax(base)
    limit_err = abs(limit / 256.0 - 1)
    near = rwa_nmax(ModelParams(1.0, 1.0, 0.25, DeformationSpec.linear_kerr(1e-6)))
    cont_err = abs(near / limit - 1)
    chi = 0.05
    wc = 0.7692
    # levels 1..22 are the doublets n = 0..10; level 0 is |g,0>, which is not a doublet
    N, k = 24, 2 * 11 + 1
    worst = 0.0
    for half in (0.01, 0.02, 0.03, 0.04, 0.05):
        p = ModelParams(1.0, wc, 2 * half, DeformationSpec.linear_kerr(chi))
        djc = np.linalg.eigvalsh(build_hamiltonian(ModelKind.DJC, p, HilbertLayout(N)))[:k]
        drabi = np.linalg.eigvalsh(build_hamiltonian(ModelKind.DRABI, p, HilbertLayout(N)))[:k]
        worst = max(worst, float(np.max(np.abs(drabi[1:] - djc[1:]) / np.abs(djc[1:]))))
    ok = limit_err <= 1e-12 and cont_err <= 1e-3 and worst <= 1e-2
    return ok, {"limit_rel_error": limit_err, "continuity_rel_error": cont_err, "djc_drabi_rel_diff": worst}, \
        "1e-12, 1e-3, 1e-2 relative"


# 8 ----------------------------------------------------------------------
def c8_parity(seeds=10, N=16):
    layout = HilbertLayout(N)
    P = parity_operator(layout)
    interior = slice(0, 2 * (N - 1))
    worst = 0.0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        p = ModelParams(
            float(rng.uniform(0.5, 1.5)),
            float(rng.uniform(0.5, 1.5)),
            float(rng.uniform(0.0, 1.0)),
            DeformationSpec.linear_kerr(float(rng.uniform(0.0, 0.2))),
        )
        for kind in (ModelKind.JC, ModelKind.DJC, ModelKind.RABI, ModelKind.DRABI):
            C = commutator(build_hamiltonian(kind, p, layout), P)
            worst = max(worst, float(np.abs(C[interior, interior]).max()))
    return worst == 0.0, {"max_commutator": worst}, "exactly 0"


# 9 ----------------------------------------------------------------------
def _psd_error(G):
    scale = max(float(np.abs(G).max()), 1e-300)
    herm = float(np.abs(G - G.conj().T).max()) / scale
    lam = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    return herm, float(max(0.0, -lam.min()) / scale)


def c9_positivity():
    min_S = math.inf
    herm_err = psd_err = 0.0
    Gamma = 0.01
    chi = 0.0125
    djc = ModelParams(1.0, selective_cavity_frequency(4, chi), 0.125, DeformationSpec.linear_kerr(chi))
    kerr = ModelParams(1.0, 1.0, 0.0, DeformationSpec.linear_kerr(0.2))
    for t in (5.0, 50.0, 500.0):
        omega = _vrs_grid(801)
        min_S = min(min_S, vrs_fulltime(VRS, Gamma, omega, t).min(), vrs_longtime(VRS, Gamma, omega).min())
        for kernel in (jc_atom_kernel(VRS, 2), jc_field_kernel(VRS, 2), djc_atom_kernel(djc, 4),
                       kerr_field_kernel(kerr, np.array([0.2, 0.3, 0.5]))):
            omega = np.linspace(0.5, 2.0, 801)
            min_S = min(min_S, ew_closed_form(kernel, SpectrumRequest(Gamma, t, omega)).S.min())
    omega = np.linspace(0.5, 2.0, 801)
    min_S = min(min_S, dvrs_longtime(djc, Gamma, omega).min(), kerr_longtime([0.2, 0.3, 0.5], kerr, Gamma, omega).min())

    # numeric kernels of every model and state family
    N = 12
    layout = HilbertLayout(N)
    p = ModelParams(1.0, 0.95, 0.2, DeformationSpec.linear_kerr(0.02))
    t_obs, probe_grid = 20.0, TimeGrid(1.0, 16)
    cases = [
        (ModelKind.JC, make_initial_state("fock_excited", layout, n=2)),
        (ModelKind.DJC, make_initial_state("coherent_excited", layout, alpha=0.5)),
        (ModelKind.RABI, make_initial_state("fock_excited", layout, n=1)),
        (ModelKind.DRABI, make_initial_state("fock_pair", layout, n=1, excited=False)),
    ]
    for kind, state in cases:
        H = build_hamiltonian(kind, p, layout)
        for O in (_atom_op(N), _field_op(N)):
            fast = two_time_correlation(H, O, state, probe_grid, frame_shift=1.0).max_frequency
            grid = TimeGrid.resolving(t_obs, fast + 0.3)
            corr = two_time_correlation(H, O, state, grid, frame_shift=1.0)
            h, n = _psd_error(corr.values)
            herm_err, psd_err = max(herm_err, h), max(psd_err, n)
            omega = np.linspace(0.7, 1.3, 301)
            for path in ("gram", "trapezoid"):
                S = ew_numeric(corr, SpectrumRequest(0.25, t_obs, omega), path=path).S
                # the double sum is only non-negative up to rounding
                floor = 0.0 if path == "gram" else -1e-10 * max(S.max(), 1e-300)
                min_S = min(min_S, float(S.min()) if S.min() < floor else max(float(S.min()), 0.0))
    # a mixed state: thermal light in the Kerr oscillator
    flayout = HilbertLayout(suggest_cutoff("thermal_field", nbar=1.0))
    corr = two_time_correlation(
        build_hamiltonian(ModelKind.FIELD_ONLY, kerr, flayout), ladder_matrices(flayout)[0],
        make_initial_state("thermal_field", flayout, nbar=1.0), grid, frame_shift=1.0,
    )
    h, n = _psd_error(corr.values)
    herm_err, psd_err = max(herm_err, h), max(psd_err, n)
    times = np.linspace(0.0, 400.0, 64)
    T1, T2 = np.meshgrid(times, times, indexing="ij")
    for G in (atom_corr_jc(VRS, 2, T1, T2), field_corr_jc(VRS, 2, T1, T2), atom_corr_djc(djc, 4, T1, T2)):
        h, n = _psd_error(G)
        herm_err, psd_err = max(herm_err, h), max(psd_err, n)
    ok = min_S >= 0.0 and herm_err <= 1e-10 and psd_err <= 1e-10
    return ok, {"min_S": float(min_S), "hermitian_error": herm_err, "negative_eigen": psd_err}, \
        "S >= 0, 1e-10"


# 10 ---------------------------------------------------------------------
def c10_figures(out_dir=None, threads=None):
    from .figures import FIGURE_IDS, reproduce_figures

    with tempfile.TemporaryDirectory() as tmp:
        base = Path(out_dir) if out_dir else Path(tmp)
        first, second = base / "run1", base / "run2"
        start = time.perf_counter()
        files = reproduce_figures(FIGURE_IDS, first, threads)
        elapsed = time.perf_counter() - start
        reproduce_figures(FIGURE_IDS, second, threads)
        mismatched = []
        count = 0
        for paths in files.values():
            for p in paths:
                count += 1
                if Path(p).read_bytes() != (second / Path(p).name).read_bytes():
                    mismatched.append(Path(p).name)
    ok = elapsed <= 60.0 and not mismatched
    return ok, {"first_run_s": elapsed, "csv_files": count, "mismatched": len(mismatched)}, "60 s, identical bytes"


CRITERIA = {
    1: ("Kerr Fock spectroscopy", c1_kerr_fock),
    2: ("vacuum Rabi doublet, numeric vs long-time", c2_vrs),
    3: ("full-time vacuum Rabi spectrum", c3_vrs_fulltime),
    4: ("deformed vacuum Rabi doublet", c4_dvrs),
    5: ("analytic vs numeric correlations", c5_oracle),
    6: ("selective transition and doublets", c6_selective),
    7: ("rotating-wave bound", c7_rwa_bound),
    8: ("parity symmetry", c8_parity),
    9: ("positivity and kernel structure", c9_positivity),
    10: ("figure regression", c10_figures),
}


def run_criterion(number, **kwargs):
    title, func = CRITERIA[number]
    start = time.perf_counter()
    ok, measured, tol = func(**kwargs)
    return CriterionResult(number, title, bool(ok), measured, tol, time.perf_counter() - start)


def run_all(numbers=None, mutate=False, threads=None):
    """Run the selected criteria (all by default).

    With ``mutate`` the correlation oracle is fed a perturbed deformed-model
    formula; that criterion must then fail.
    """
    results = []
    for number in numbers or CRITERIA:
        kwargs = {}
        if number == 5 and mutate:
            kwargs["djc"] = perturbed_atom_corr_djc
        if number == 10 and threads:
            kwargs["threads"] = threads
        results.append(run_criterion(number, **kwargs))
    return results


def format_report(results):
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines)
