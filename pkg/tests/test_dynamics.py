import math

import numpy as np
import pytest

from ewspec.analytic import atom_corr_jc
from ewspec.dynamics import (
    CorrelationGrid,
    Evolution,
    TimeGrid,
    make_initial_state,
    poisson_weights,
    propagator,
    suggest_cutoff,
    thermal_weights,
    two_time_correlation,
)
from ewspec.errors import CutoffError, SamplingError
from ewspec.hamiltonians import ModelParams, build_hamiltonian
from ewspec.operators import DeformationSpec, HilbertLayout, ladder_matrices, sigma_minus, tensor_product


def test_fock_excited_vector():
    layout = HilbertLayout(4)
    s = make_initial_state("fock_excited", layout, n=0)
    assert np.linalg.norm(s.vector) == 1.0
    assert s.vector[layout.index(0, True)] == 1.0


def test_poisson_weight():
    assert poisson_weights(4.0, 10)[4] == pytest.approx(math.exp(-4) * 4**4 / 24, rel=1e-14)
    assert poisson_weights(4.0, 10)[4] == pytest.approx(0.19537, abs=5e-6)


def test_thermal_vacuum_weight():
    assert thermal_weights(2.0, 5)[0] == pytest.approx(1 / 3, rel=1e-15)


def test_coherent_state_weights_and_cutoff():
    N = suggest_cutoff("coherent_excited", nbar=4.0)
    s = make_initial_state("coherent_excited", HilbertLayout(N), alpha=2.0)
    assert s.fock_distribution()[4] == pytest.approx(math.exp(-4) * 4**4 / 24, rel=1e-12)
    assert s.deficit < 1e-8
    with pytest.raises(CutoffError):
        make_initial_state("coherent_excited", HilbertLayout(8), alpha=2.0)


def test_thermal_mixture():
    N = suggest_cutoff("thermal_field", nbar=2.0)
    s = make_initial_state("thermal_field", HilbertLayout(N), nbar=2.0)
    assert not s.is_pure
    assert s.weights[0] == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        s.vector


def test_fock_beyond_cutoff():
    with pytest.raises(CutoffError):
        make_initial_state("fock_field", HilbertLayout(3), n=3)
    with pytest.raises(ValueError):
        make_initial_state("squeezed", HilbertLayout(3))


def test_propagator_identity_and_diagonal():
    H = np.diag([0.3, -1.2, 2.0]).astype(complex)
    assert np.allclose(propagator(H, 0.0), np.eye(3), atol=1e-15)
    assert np.allclose(propagator(H, 1.7), np.diag(np.exp(-1j * np.array([0.3, -1.2, 2.0]) * 1.7)), atol=1e-14)


def test_propagator_unitary():
    layout = HilbertLayout(10)
    H = build_hamiltonian("DRabi", ModelParams(1.0, 0.9, 0.4, DeformationSpec.linear_kerr(0.05)), layout)
    U = propagator(H, 13.0)
    assert np.allclose(U.conj().T @ U, np.eye(layout.dim), atol=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        Evolution(np.array([[0, 1], [0, 0]], dtype=complex))


def test_time_grid_resolving():
    g = TimeGrid.resolving(100.0, 0.5)
    assert g.step * 0.5 <= 2 * math.pi / 20 + 1e-12
    assert TimeGrid.resolving(1.0, 1e-6).samples == 17
    g = TimeGrid.resolving(50.0, 1.0, multiple_of=8)
    assert (g.samples - 1) % 8 == 0


def test_correlation_matches_vacuum_rabi_form():
    p = ModelParams(1.0, 1.0, 0.25)
    N = 4
    layout = HilbertLayout(N)
    H = build_hamiltonian("JC", p, layout)
    O = tensor_product(sigma_minus(), np.eye(N))
    grid = TimeGrid(80.0, 33)
    corr = two_time_correlation(H, O, make_initial_state("fock_excited", layout, n=0), grid)
    t = grid.values
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    expected = np.exp(1j * (T1 - T2)) * np.cos(0.125 * T1) * np.cos(0.125 * T2)
    assert np.abs(corr.values - expected).max() < 1e-12
    assert np.abs(corr.values - atom_corr_jc(p, 0, T1, T2)).max() < 1e-12


def test_kerr_fock_correlation():
    chi, n = 0.2, 2
    layout = HilbertLayout(5)
    p = ModelParams(1.0, 1.0, 0.0, DeformationSpec.linear_kerr(chi))
    H = build_hamiltonian("FieldOnly", p, layout)
    grid = TimeGrid(30.0, 32)
    corr = two_time_correlation(H, ladder_matrices(layout)[0], make_initial_state("fock_field", layout, n=n), grid)
    t = grid.values
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    assert np.abs(corr.values - n * np.exp(1j * (1 + 2 * chi * n) * (T1 - T2))).max() < 1e-8
    assert np.allclose(corr.peaks, [1 + 2 * chi * n])


def test_frame_shift_in_stored_kernel():
    layout = HilbertLayout(5)
    p = ModelParams(1.0, 1.0, 0.0, DeformationSpec.linear_kerr(0.2))
    H = build_hamiltonian("FieldOnly", p, layout)
    state = make_initial_state("fock_field", layout, n=2)
    a = ladder_matrices(layout)[0]
    grid = TimeGrid(10.0, 17)
    lab = two_time_correlation(H, a, state, grid)
    moved = two_time_correlation(H, a, state, grid, frame_shift=1.8)
    t = grid.values
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    assert np.allclose(moved.values, lab.values * np.exp(-1.8j * (T1 - T2)), atol=1e-12)
    assert moved.max_frequency == pytest.approx(0.0, abs=1e-12)


def test_mixture_is_linear_in_weights():
    layout = HilbertLayout(suggest_cutoff("thermal_field", nbar=1.0))
    p = ModelParams(1.0, 1.0, 0.0, DeformationSpec.linear_kerr(0.1))
    H = build_hamiltonian("FieldOnly", p, layout)
    a = ladder_matrices(layout)[0]
    grid = TimeGrid(5.0, 9)
    state = make_initial_state("thermal_field", layout, nbar=1.0)
    mixed = two_time_correlation(H, a, state, grid).values
    total = 0
    for n, w in enumerate(state.weights):
        pure = make_initial_state("fock_field", layout, n=n) if n < layout.fock_cutoff else None
        total = total + w * two_time_correlation(H, a, pure, grid).values
    assert np.allclose(mixed, total, atol=1e-12)


def test_truncate_requires_grid_point():
    grid = TimeGrid(10.0, 11)
    corr = CorrelationGrid.from_function(lambda a, b: np.ones_like(a + b), grid)
    assert corr.truncate(4.0).grid.samples == 5
    with pytest.raises(SamplingError):
        corr.truncate(4.5)


def test_shape_mismatch_rejected():
    layout = HilbertLayout(4)
    H = build_hamiltonian("JC", ModelParams(1, 1, 0.2), layout)
    with pytest.raises(ValueError):
        two_time_correlation(H, np.eye(3), make_initial_state("fock_excited", layout, n=1), TimeGrid(1.0, 3))
