"""Truncated Fock-space operator algebra for a two-level atom and one field mode.

Basis ordering is fixed for the whole package: the state |s, n> (atom ``s``,
``n`` photons) sits at index ``2*n + s`` with ``s = 0`` for |g> and ``s = 1``
for |e>. Within the qubit factor sigma_z = diag(-1, +1), so sigma_z|e> = +|e>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DeformationError

__all__ = [
    "DEFORMATION_KINDS",
    "DeformationSpec",
    "HilbertLayout",
    "deformation_eval",
    "deformation_squared",
    "deformation_table",
    "ladder_matrices",
    "deformed_ladder",
    "tensor_product",
    "commutator",
    "parity_operator",
    "sigma_minus",
    "sigma_plus",
    "sigma_z",
    "sigma_x",
    "excitation_number",
]

DEFORMATION_KINDS = {
    "identity": (),
    "linear_kerr": ("chi",),
    "q_oscillator": ("lam",),
    "lamb_dicke": ("eta",),
    "poschl_teller": ("c", "s"),
    "transmon": ("alpha",),
}


@dataclass(frozen=True)
class DeformationSpec:
    """Choice of deformation function f(n) and its parameters.

    Parameters by kind: ``linear_kerr`` takes ``chi`` (f^2 = 1 + chi n),
    ``q_oscillator`` takes ``lam`` = log q, ``lamb_dicke`` takes ``eta``,
    ``poschl_teller`` takes ``c`` and ``s`` (f^2 = c (2s + 1 - n)) and
    ``transmon`` takes ``alpha`` (f^2 = 1 + alpha (n - 1)/2).
    """

    kind: str = "identity"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DEFORMATION_KINDS:
            raise DeformationError(f"unknown deformation kind {self.kind!r}")
        expected = set(DEFORMATION_KINDS[self.kind])
        given = set(self.params)
        if given != expected:
            raise DeformationError(
                f"{self.kind} expects parameters {sorted(expected)}, got {sorted(given)}"
            )
        for name, value in self.params.items():
            if not math.isfinite(float(value)):
                raise DeformationError(f"parameter {name} must be finite")
        object.__setattr__(self, "params", {k: float(v) for k, v in self.params.items()})

    @classmethod
    def identity(cls):
        return cls("identity", {})

    @classmethod
    def linear_kerr(cls, chi):
        return cls("linear_kerr", {"chi": chi})

    @classmethod
    def q_oscillator(cls, lam):
        return cls("q_oscillator", {"lam": lam})

    @classmethod
    def lamb_dicke(cls, eta):
        return cls("lamb_dicke", {"eta": eta})

    @classmethod
    def poschl_teller(cls, c, s):
        return cls("poschl_teller", {"c": c, "s": s})

    @classmethod
    def transmon(cls, alpha):
        return cls("transmon", {"alpha": alpha})

    @property
    def is_identity(self):
        return self.kind == "identity" or (
            self.kind == "linear_kerr" and self.params["chi"] == 0.0
        )

    def to_dict(self):
        return {"kind": self.kind, **self.params}


@dataclass(frozen=True)
class HilbertLayout:
    """Atom-times-field layout with Fock states |0>..|N-1>."""

    fock_cutoff: int
    qubit_dim: int = 2

    def __post_init__(self):
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 2:
            raise ValueError(f"fock_cutoff must be an integer >= 2, got {self.fock_cutoff}")
        if self.qubit_dim != 2:
            raise ValueError("qubit_dim is fixed to 2")

    @property
    def dim(self):
        return 2 * self.fock_cutoff

    @staticmethod
    def index(n, excited):
        return 2 * n + (1 if excited else 0)


def _lamb_dicke_f(eta, n):
    # The falling factorial n!/(n-l)! vanishes for l > n, so the series is finite.
    x = eta * eta
    total = 0.0
    for l in range(n + 1):
        total += (-x) ** l / (math.factorial(l) * math.factorial(l + 1)) * math.perm(n, l)
    return math.exp(-x / 2.0) * total


def deformation_squared(spec: DeformationSpec, n: int) -> float:
    """Return f(n)^2, raising if it is negative."""
    return deformation_eval(spec, n) ** 2


def deformation_eval(spec: DeformationSpec, n: int) -> float:
    """Evaluate the deformation function f(n) for a non-negative integer n.

    Removable singularities at n = 0 (q-oscillator) are set to f(0) = 1; the
    value is irrelevant there because A|0> = 0. A negative f^2 raises
    :class:`DeformationError` rather than returning an imaginary number.
    """
    if int(n) != n or n < 0:
        raise DeformationError(f"deformation argument must be a non-negative integer, got {n}")
    n = int(n)
    p = spec.params
    kind = spec.kind
    if kind == "identity":
        return 1.0
    if kind == "lamb_dicke":
        return _lamb_dicke_f(p["eta"], n)
    if kind == "linear_kerr":
        f2 = 1.0 + p["chi"] * n
    elif kind == "q_oscillator":
        lam = p["lam"]
        if n == 0 or lam == 0.0:
            f2 = 1.0
        else:
            f2 = math.sinh(lam * n) / (n * math.sinh(lam))
    elif kind == "poschl_teller":
        f2 = p["c"] * (2.0 * p["s"] + 1.0 - n)
    elif kind == "transmon":
        f2 = 1.0 + p["alpha"] * (n - 1) / 2.0
    else:  # pragma: no cover - guarded by DeformationSpec
        raise DeformationError(f"unknown deformation kind {kind!r}")
    if not math.isfinite(f2):
        raise DeformationError(f"{kind}: f^2({n}) is not finite")
    if f2 < 0.0:
        raise DeformationError(f"{kind}: f^2({n}) = {f2:.6g} < 0, non-physical at this cutoff")
    return math.sqrt(f2)


def deformation_table(spec: DeformationSpec, upto: int) -> np.ndarray:
    """Vector [f(0), ..., f(upto)]."""
    return np.array([deformation_eval(spec, k) for k in range(upto + 1)])


def ladder_matrices(layout: HilbertLayout):
    """Field-factor ladder matrices (a, a_dag, n_op), each N x N."""
    N = layout.fock_cutoff
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1).astype(complex)
    n_op = np.diag(np.arange(N, dtype=float)).astype(complex)
    return a, a.conj().T.copy(), n_op


def deformed_ladder(spec: DeformationSpec, layout: HilbertLayout):
    """Deformed field operators A = a f(n_op) and its adjoint (field factor only)."""
    a, _, _ = ladder_matrices(layout)
    f = deformation_table(spec, layout.fock_cutoff)[: layout.fock_cutoff]
    A = a * f[np.newaxis, :]
    return A, A.conj().T.copy()


def tensor_product(qubit_op, field_op) -> np.ndarray:
    """Embed ``qubit_op (x) field_op`` in the layout ordering (index 2n + s).

    The qubit factor is the first argument; because the qubit index runs
    fastest in the layout, the Kronecker product is taken as field (x) qubit.
    """
    qubit_op = np.asarray(qubit_op)
    field_op = np.asarray(field_op)
    if qubit_op.shape != (2, 2):
        raise ValueError(f"qubit operator must be 2 x 2, got {qubit_op.shape}")
    if field_op.ndim != 2 or field_op.shape[0] != field_op.shape[1]:
        raise ValueError(f"field operator must be square, got {field_op.shape}")
    return np.kron(field_op, qubit_op)


def commutator(X, Y) -> np.ndarray:
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape != Y.shape or X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"commutator needs equal square matrices, got {X.shape} and {Y.shape}")
    return X @ Y - Y @ X


def sigma_minus():
    """|g><e| in the (g, e) qubit basis."""
    return np.array([[0, 1], [0, 0]], dtype=complex)


def sigma_plus():
    return np.array([[0, 0], [1, 0]], dtype=complex)


def sigma_z():
    return np.diag([-1.0, 1.0]).astype(complex)


def sigma_x():
    return np.array([[0, 1], [1, 0]], dtype=complex)


def excitation_number(layout: HilbertLayout) -> np.ndarray:
    """n_op (x) 1 + sigma_+ sigma_- on the full space."""
    _, _, n_op = ladder_matrices(layout)
    return tensor_product(np.eye(2), n_op) + tensor_product(
        sigma_plus() @ sigma_minus(), np.eye(layout.fock_cutoff)
    )


def parity_operator(layout: HilbertLayout) -> np.ndarray:
    """Parity (-sigma_z) (x) exp(i pi n_op); diagonal with entries +-1."""
    n = np.arange(layout.fock_cutoff)
    field = np.diag((-1.0) ** n)
    return tensor_product(-sigma_z(), field).real.astype(complex)
