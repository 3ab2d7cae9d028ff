import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ewspec.analytic import djc_atom_kernel, jc_atom_kernel
from ewspec.dynamics import TimeGrid, make_initial_state, two_time_correlation
from ewspec.hamiltonians import ModelKind, ModelParams, build_hamiltonian, doublet_block
from ewspec.operators import DeformationSpec, HilbertLayout, commutator, parity_operator, sigma_minus, tensor_product
from ewspec.spectrum import SpectrumRequest, dvrs_lines, ew_closed_form, ew_numeric, vrs_fulltime

freq = st.floats(0.5, 1.5)
coupling = st.floats(0.0, 0.8)
chi = st.floats(0.0, 0.2)
SETTINGS = settings(max_examples=25, deadline=None)


@SETTINGS
@given(freq, freq, coupling, chi, st.sampled_from(list(ModelKind)[:4]))
def test_hamiltonian_hermitian_and_parity(wa, wc, W, x, kind):
    layout = HilbertLayout(10)
    H = build_hamiltonian(kind, ModelParams(wa, wc, W, DeformationSpec.linear_kerr(x)), layout)
    assert np.array_equal(H, H.conj().T)
    C = commutator(H, parity_operator(layout))
    assert np.abs(C[:18, :18]).max() == 0.0


@SETTINGS
@given(freq, freq, coupling, chi, st.integers(0, 8))
def test_doublet_trace_and_determinant(wa, wc, W, x, n):
    p = ModelParams(wa, wc, W, DeformationSpec.linear_kerr(x))
    d = doublet_block(p, n)
    H = build_hamiltonian(ModelKind.DJC, p, HilbertLayout(n + 3))
    i, j = 2 * n + 1, 2 * n + 2
    block = H[np.ix_([i, j], [i, j])]
    assert math.isclose(d.E_plus + d.E_minus, np.trace(block).real, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(d.E_plus * d.E_minus, np.linalg.det(block).real, rel_tol=1e-10, abs_tol=1e-12)


@SETTINGS
@given(freq, coupling, st.floats(0.01, 0.2), st.floats(0.0, 300.0))
def test_closed_forms_non_negative(wc, W, Gamma, t):
    omega = np.linspace(0.0, 2.0, 101)
    p = ModelParams(1.0, 1.0, W)
    assert vrs_fulltime(p, Gamma, omega, t).min() >= -1e-12 * max(1.0, 1 / Gamma**2)
    assert ew_closed_form(jc_atom_kernel(p, 2), SpectrumRequest(Gamma, t, omega)).S.min() >= 0.0
    if W > 0:
        q = ModelParams(1.0, wc, W, DeformationSpec.linear_kerr(0.0125))
        assert ew_closed_form(djc_atom_kernel(q, 2), SpectrumRequest(Gamma, t, omega)).S.min() >= 0.0


@SETTINGS
@given(freq, st.floats(0.05, 0.5), st.floats(0.0, 0.3))
def test_dvrs_asymmetry_law(wc, W, x):
    p = ModelParams(1.0, wc, W, DeformationSpec.linear_kerr(x))
    centres, weights = dvrs_lines(p)
    delta = doublet_block(p, 0).detuning
    if abs(delta) > 1e-9:
        assert (weights[1] > weights[0]) == (delta > 0)
    assert centres[0] <= centres[1]


@SETTINGS
@given(st.floats(0.6, 1.4), st.floats(0.05, 0.4), st.integers(0, 3), st.floats(0.0, 1.0))
def test_gram_spectrum_non_negative_and_frame_invariant(wc, W, n, shift):
    N = n + 4
    layout = HilbertLayout(N)
    H = build_hamiltonian(ModelKind.JC, ModelParams(1.0, wc, W), layout)
    O = tensor_product(sigma_minus(), np.eye(N))
    state = make_initial_state("fock_excited", layout, n=n)
    t, Gamma = 60.0, 0.1
    omega = np.linspace(0.5, 1.5, 41)
    grid = TimeGrid.resolving(t, 4.0)
    a = ew_numeric(two_time_correlation(H, O, state, grid, frame_shift=1.0), SpectrumRequest(Gamma, t, omega)).S
    b = ew_numeric(two_time_correlation(H, O, state, grid, frame_shift=1.0 - 0.3 * shift),
                   SpectrumRequest(Gamma, t, omega)).S
    assert a.min() >= 0.0 and b.min() >= 0.0
    assert np.abs(a - b).max() <= 1e-8 * a.max()
