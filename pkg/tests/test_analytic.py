import math

import numpy as np
import pytest

from ewspec.analytic import (
    ExponentialKernel,
    atom_corr_djc,
    atom_corr_jc,
    djc_atom_kernel,
    field_corr_jc,
    half_angle_cos_sq,
    half_angle_sin_sq,
    jc_atom_kernel,
    jc_field_kernel,
    kerr_field_corr,
    kerr_field_kernel,
    rabi_frequency,
)
from ewspec.dynamics import Evolution, make_initial_state, suggest_cutoff
from ewspec.errors import SingularConfigurationError
from ewspec.hamiltonians import ModelParams, build_hamiltonian, selective_cavity_frequency
from ewspec.operators import DeformationSpec, HilbertLayout, ladder_matrices, sigma_minus, tensor_product

JC = ModelParams(1.0, 1.0, 0.25)
KERR = DeformationSpec.linear_kerr


def numeric_corr(kind, params, state, O, t):
    evo = Evolution(build_hamiltonian(kind, params, HilbertLayout(state.fock_cutoff)))
    G = 0
    for w, psi in state.components:
        W = evo.trajectory(O, psi, t)
        G = G + w * (W.conj() @ W.T)
    return G


def grid(span, count=32, seed=0):
    t = np.sort(np.random.default_rng(seed).uniform(0, span, count))
    return t, *np.meshgrid(t, t, indexing="ij")


def test_rabi_frequency():
    assert rabi_frequency(JC, -1) == 0.0
    assert rabi_frequency(JC, 3) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        rabi_frequency(JC, -2)


def test_half_angle_identities():
    x = np.linspace(-5, 5, 11)
    th = np.arctan(x)
    assert np.allclose(half_angle_sin_sq(x), 2 * np.sin(th / 2) ** 2)
    assert np.allclose(half_angle_cos_sq(x), 2 * np.cos(th / 2) ** 2)


def test_atom_jc_reductions():
    assert atom_corr_jc(JC, 2, 0.0, 0.0) == pytest.approx(1.0)
    t, T1, T2 = grid(100.0)
    expected = np.exp(1j * (T1 - T2)) * np.cos(0.125 * T1) * np.cos(0.125 * T2)
    assert np.abs(atom_corr_jc(JC, 0, T1, T2) - expected).max() < 1e-14


def test_atom_jc_requires_resonance():
    with pytest.raises(ValueError):
        atom_corr_jc(ModelParams(1.0, 0.9, 0.25), 1, 0.0, 0.0)


def test_field_jc_reductions():
    t, T1, T2 = grid(100.0)
    expected = np.exp(1j * (T1 - T2)) * np.sin(0.125 * T1) * np.sin(0.125 * T2)
    assert np.abs(field_corr_jc(JC, 0, T1, T2) - expected).max() < 1e-14
    assert np.allclose(field_corr_jc(JC, 0, t, t).real, np.sin(0.125 * t) ** 2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_jc_against_propagator(n):
    N = n + 3
    state = make_initial_state("fock_excited", HilbertLayout(N), n=n)
    t, T1, T2 = grid(64 * 2 * math.pi / rabi_frequency(JC, n), seed=n)
    atom = numeric_corr("JC", JC, state, tensor_product(sigma_minus(), np.eye(N)), t)
    field = numeric_corr("JC", JC, state, tensor_product(np.eye(2), ladder_matrices(HilbertLayout(N))[0]), t)
    assert np.abs(atom - atom_corr_jc(JC, n, T1, T2)).max() < 1e-8
    assert np.abs(field - field_corr_jc(JC, n, T1, T2)).max() < 1e-8


def test_kerr_reductions():
    p = ModelParams(1.0, 1.0, 0.0, KERR(0.2))
    assert kerr_field_corr(p, [1.0, 0, 0], 3.0, 1.0) == 0
    assert kerr_field_corr(p, [0, 0, 1.0], 2.5, 2.5) == pytest.approx(2.0)


@pytest.mark.parametrize("kind,arg", [("coherent_field", 4.0), ("thermal_field", 2.0)])
def test_kerr_mixtures_against_propagator(kind, arg):
    p = ModelParams(1.0, 1.0, 0.0, KERR(0.2))
    layout = HilbertLayout(suggest_cutoff(kind, nbar=arg))
    state = make_initial_state(kind, layout, alpha=math.sqrt(arg), nbar=arg)
    t, T1, T2 = grid(50.0)
    G = numeric_corr("FieldOnly", p, state, ladder_matrices(layout)[0], t)
    assert np.abs(G - kerr_field_corr(p, state, T1, T2)).max() < 1e-8


def test_djc_reduces_to_jc():
    t, T1, T2 = grid(200.0)
    p = ModelParams(1.0, 1.0, 0.25, KERR(0.0))
    for n in (1, 3):
        assert np.abs(atom_corr_djc(p, n, T1, T2) - atom_corr_jc(JC, n, T1, T2)).max() < 1e-12


def test_djc_initial_population():
    p = ModelParams(1.0, 0.9, 0.125, KERR(0.0125))
    assert atom_corr_djc(p, 2, 0.0, 0.0) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("wc", ["selective", 0.9, 1.0])
@pytest.mark.parametrize("n", [1, 4])
def test_djc_against_propagator(wc, n):
    chi = 0.0125
    omega_c = selective_cavity_frequency(n, chi) if wc == "selective" else wc
    p = ModelParams(1.0, omega_c, 0.125, KERR(chi))
    N = n + 3
    state = make_initial_state("fock_excited", HilbertLayout(N), n=n)
    t, T1, T2 = grid(64 * 2 * math.pi / (0.125 * math.sqrt(n + 1)))
    G = numeric_corr("DJC", p, state, tensor_product(sigma_minus(), np.eye(N)), t)
    assert np.abs(G - atom_corr_djc(p, n, T1, T2)).max() < 1e-8


def test_djc_degenerate_doublet():
    p = ModelParams(1.0, 1.0, 0.0, KERR(0.0))
    with pytest.raises(SingularConfigurationError):
        atom_corr_djc(p, 1, 0.0, 0.0)
    with pytest.raises(ValueError):
        atom_corr_djc(ModelParams(1.0, 1.0, 0.1, KERR(0.01)), 0, 0.0, 0.0)


def test_kernels_match_functions():
    t, T1, T2 = grid(150.0, 16)
    p = ModelParams(1.0, 0.93, 0.125, KERR(0.0125))
    kerr = ModelParams(1.0, 1.0, 0.0, KERR(0.2))
    probs = np.array([0.1, 0.4, 0.5])
    pairs = [
        (jc_atom_kernel(JC, 2), atom_corr_jc(JC, 2, T1, T2)),
        (jc_field_kernel(JC, 2), field_corr_jc(JC, 2, T1, T2)),
        (djc_atom_kernel(p, 3), atom_corr_djc(p, 3, T1, T2)),
        (kerr_field_kernel(kerr, probs), kerr_field_corr(kerr, probs, T1, T2)),
    ]
    for kernel, values in pairs:
        assert np.abs(kernel(T1, T2) - values).max() < 1e-12


def test_kernel_gram_factor():
    p = ModelParams(1.0, 0.93, 0.125, KERR(0.0125))
    k = djc_atom_kernel(p, 3)
    t, T1, T2 = grid(300.0, 24)
    F = k.gram_factor(t, frame_shift=0.9)
    assert np.abs(F.conj() @ F.T - k(T1, T2) * np.exp(-0.9j * (T1 - T2))).max() < 1e-12


def test_non_autocorrelation_has_no_factor():
    k = ExponentialKernel.from_terms([(1.0, 0.5, 0.0)])
    assert k.hermitian_factor() is None
    with pytest.raises(ValueError):
        k.gram_factor([0.0, 1.0])


def test_kernel_lines():
    kerr = ModelParams(1.0, 1.0, 0.0, KERR(0.2))
    lines, weights = kerr_field_kernel(kerr, [0.0, 0.0, 1.0]).lines()
    assert np.allclose(lines, [1.8])
    assert np.allclose(weights, [2.0])
