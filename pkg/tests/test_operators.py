import math

import numpy as np
import pytest

from ewspec.errors import DeformationError
from ewspec.operators import (
    DeformationSpec,
    HilbertLayout,
    commutator,
    deformation_eval,
    deformed_ladder,
    excitation_number,
    ladder_matrices,
    parity_operator,
    sigma_minus,
    sigma_plus,
    sigma_z,
    tensor_product,
)


@pytest.mark.parametrize("spec,n,expected", [
    (DeformationSpec.identity(), 7, 1.0),
    (DeformationSpec.linear_kerr(0.0), 3, 1.0),
    (DeformationSpec.linear_kerr(0.2), 1, math.sqrt(1.2)),
    (DeformationSpec.lamb_dicke(0.0), 5, 1.0),
])
def test_deformation_values(spec, n, expected):
    assert deformation_eval(spec, n) == pytest.approx(expected, rel=1e-15)


def test_kerr_value_digits():
    assert deformation_eval(DeformationSpec.linear_kerr(0.2), 1) == pytest.approx(1.0954451150103321, abs=1e-15)


def test_negative_f_squared_rejected():
    spec = DeformationSpec.poschl_teller(1.0, 1.0)
    assert deformation_eval(spec, 3) == 0.0
    with pytest.raises(DeformationError):
        deformation_eval(spec, 4)


def test_bad_parameters_rejected():
    with pytest.raises(DeformationError):
        DeformationSpec("linear_kerr", {})
    with pytest.raises(DeformationError):
        DeformationSpec("nonsense", {})
    with pytest.raises(DeformationError):
        deformation_eval(DeformationSpec.identity(), -1)


def test_q_oscillator_limits():
    assert deformation_eval(DeformationSpec.q_oscillator(0.3), 0) == 1.0
    assert deformation_eval(DeformationSpec.q_oscillator(0.0), 4) == 1.0
    lam = 0.3
    assert deformation_eval(DeformationSpec.q_oscillator(lam), 2) ** 2 == pytest.approx(
        math.sinh(2 * lam) / (2 * math.sinh(lam)))


def test_identity_ladder_equals_plain():
    layout = HilbertLayout(4)
    A, Ad = deformed_ladder(DeformationSpec.identity(), layout)
    a, ad, _ = ladder_matrices(layout)
    assert np.array_equal(A, a)
    assert np.array_equal(Ad, ad)


def test_kerr_ladder_entry():
    A, _ = deformed_ladder(DeformationSpec.linear_kerr(0.2), HilbertLayout(3))
    assert A[0, 1] == pytest.approx(math.sqrt(1.2), abs=1e-15)


@pytest.mark.parametrize("spec", [
    DeformationSpec.identity(),
    DeformationSpec.linear_kerr(0.3),
    DeformationSpec.q_oscillator(0.2),
    DeformationSpec.lamb_dicke(0.4),
    DeformationSpec.transmon(0.1),
])
def test_deformed_commutator_diagonal(spec):
    N = 8
    A, Ad = deformed_ladder(spec, HilbertLayout(N))
    C = commutator(A, Ad)
    f2 = [deformation_eval(spec, k) ** 2 for k in range(N + 1)]
    for k in range(N - 1):
        assert C[k, k] == pytest.approx((k + 1) * f2[k + 1] - k * f2[k], abs=1e-13)
    assert np.allclose(C - np.diag(np.diag(C)), 0)


def test_plain_commutator_truncation():
    N = 6
    a, ad, _ = ladder_matrices(HilbertLayout(N))
    expected = np.diag([1.0] * (N - 1) + [-(N - 1.0)])
    assert np.allclose(commutator(a, ad), expected, atol=1e-14)


def test_commutator_with_number():
    N = 6
    a, _, n_op = ladder_matrices(HilbertLayout(N))
    C = commutator(a, n_op)
    assert np.allclose(C[: N - 1, : N - 1], a[: N - 1, : N - 1])


def test_self_commutator_zero():
    X = np.random.default_rng(1).standard_normal((5, 5))
    assert not np.any(commutator(X, X))


def test_tensor_identity():
    assert np.array_equal(tensor_product(np.eye(2), np.eye(5)), np.eye(10))


def test_tensor_layout_order():
    # basis index 2n + s with s = 1 excited: the qubit is the fast index
    Z = tensor_product(sigma_z(), np.eye(2))
    assert np.array_equal(np.diag(Z).real, [-1, 1, -1, 1])
    layout = HilbertLayout(2)
    e1 = np.zeros(4)
    e1[layout.index(1, True)] = 1
    assert e1 @ Z @ e1 == 1


def test_tensor_rejects_bad_shapes():
    with pytest.raises(ValueError):
        tensor_product(np.eye(3), np.eye(2))


def test_sigma_algebra():
    assert np.allclose(commutator(sigma_plus(), sigma_minus()), sigma_z())


def test_excitation_and_parity():
    layout = HilbertLayout(5)
    Nexc = np.diag(excitation_number(layout)).real
    P = np.diag(parity_operator(layout)).real
    for n in range(5):
        for s in (0, 1):
            i = layout.index(n, s)
            assert Nexc[i] == n + s
            assert P[i] == (-1) ** (n + s)
