"""Model Hamiltonians (JC, deformed JC, Rabi, deformed Rabi, bare field) and doublet analysis.

Units: hbar = 1 and frequencies are expressed in units of omega_a.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import CutoffError, DeformationError, SingularConfigurationError
from .operators import (
    DeformationSpec,
    HilbertLayout,
    deformation_eval,
    deformation_table,
    deformed_ladder,
    ladder_matrices,
    sigma_minus,
    sigma_plus,
    sigma_x,
    sigma_z,
    tensor_product,
)

__all__ = [
    "ModelKind",
    "ModelParams",
    "DressedDoublet",
    "EigenSweep",
    "build_hamiltonian",
    "doublet_block",
    "ground_energy",
    "analytic_levels",
    "effective_detuning",
    "selective_cavity_frequency",
    "rwa_nmax",
    "rwa_ratio",
    "eigen_sweep",
]


class ModelKind(str, Enum):
    JC = "JC"
    DJC = "DJC"
    RABI = "Rabi"
    DRABI = "DRabi"
    FIELD_ONLY = "FieldOnly"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(f"unknown model kind {value!r}; expected one of {[m.value for m in cls]}")

    @property
    def deformed(self):
        return self in (ModelKind.DJC, ModelKind.DRABI, ModelKind.FIELD_ONLY)

    @property
    def rotating_wave(self):
        return self in (ModelKind.JC, ModelKind.DJC)


@dataclass(frozen=True)
class ModelParams:
    omega_a: float = 1.0
    omega_c: float = 1.0
    Omega0: float = 0.0
    deformation: DeformationSpec = field(default_factory=DeformationSpec.identity)

    def __post_init__(self):
        for name in ("omega_a", "omega_c", "Omega0"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")

    @property
    def detuning(self):
        return self.omega_a - self.omega_c

    def undeformed(self):
        return replace(self, deformation=DeformationSpec.identity())

    def to_dict(self):
        return {
            "omega_a": self.omega_a,
            "omega_c": self.omega_c,
            "Omega0": self.Omega0,
            "deformation": self.deformation.to_dict(),
        }


@dataclass(frozen=True)
class DressedDoublet:
    """Diagonalized n-th doublet {|e,n>, |g,n+1>}."""

    n: int
    E_plus: float
    E_minus: float
    mixing_angle: float
    detuning: float
    rabi: float
    phi: float
    E0: float
    h11: float
    h22: float


def _model_deformation(kind, params):
    return params.deformation if kind.deformed else DeformationSpec.identity()


def _field_diagonal(spec, N, omega_c):
    # (omega_c/2)(A^dag A + A A^dag) evaluated exactly, including the top level.
    f = deformation_table(spec, N)
    n = np.arange(N)
    return 0.5 * omega_c * (n * f[:N] ** 2 + (n + 1) * f[1 : N + 1] ** 2)


def build_hamiltonian(kind, params: ModelParams, layout: HilbertLayout) -> np.ndarray:
    """Dense Hamiltonian matrix of the requested model.

    Field part (omega_c/2)(A^dag A + A A^dag) is filled from its exact diagonal
    n f^2(n) + (n+1) f^2(n+1), so the top Fock level carries no truncation
    error. JC/DJC couple through -i(Omega0/2)(A sigma_+ - A^dag sigma_-),
    Rabi/DRabi through -i(Omega0/2)(A - A^dag) sigma_x. JC and Rabi ignore the
    deformation in ``params``; FieldOnly returns the N x N field block.
    """
    kind = ModelKind.parse(kind)
    N = layout.fock_cutoff
    if N < 3:
        raise CutoffError("build_hamiltonian needs fock_cutoff >= 3")
    spec = _model_deformation(kind, params)
    field_diag = _field_diagonal(spec, N, params.omega_c)
    if kind is ModelKind.FIELD_ONLY:
        return np.diag(field_diag).astype(complex)

    eye_q = np.eye(2)
    eye_f = np.eye(N)
    H = tensor_product(eye_q, np.diag(field_diag)).astype(complex)
    H += 0.5 * params.omega_a * tensor_product(sigma_z(), eye_f)
    if params.Omega0 != 0.0:
        if spec.kind == "identity":
            A_field, _ = ladder_matrices(layout)[:2]
        else:
            A_field, _ = deformed_ladder(spec, layout)
        A = tensor_product(eye_q, A_field)
        Ad = A.conj().T
        if kind.rotating_wave:
            sp = tensor_product(sigma_plus(), eye_f)
            sm = tensor_product(sigma_minus(), eye_f)
            V = A @ sp - Ad @ sm
        else:
            V = (A - Ad) @ tensor_product(sigma_x(), eye_f)
        H += -0.5j * params.Omega0 * V
    return 0.5 * (H + H.conj().T)


def doublet_block(params: ModelParams, n: int) -> DressedDoublet:
    """Analytic diagonalization of the n-th doublet for an arbitrary deformation.

    The mixing angle uses atan2(rabi, detuning), which lies in (0, pi) and
    passes continuously through pi/2 at zero effective detuning.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"doublet index must be a non-negative integer, got {n}")
    n = int(n)
    spec = params.deformation
    f2 = [deformation_eval(spec, k) ** 2 for k in (n, n + 1, n + 2)]
    h11 = n * f2[0] + (n + 1) * f2[1] + 1.0
    h22 = (n + 1) * f2[1] + (n + 2) * f2[2] - 1.0
    delta_f = params.detuning + params.omega_c * (h11 - h22) / 2.0
    rabi = params.Omega0 * math.sqrt(n + 1) * deformation_eval(spec, n + 1)
    phi = math.hypot(delta_f, rabi)
    E0 = params.omega_c * (h11 + h22) / 4.0
    return DressedDoublet(
        n=n,
        E_plus=E0 + phi / 2.0,
        E_minus=E0 - phi / 2.0,
        mixing_angle=math.atan2(rabi, delta_f),
        detuning=delta_f,
        rabi=rabi,
        phi=phi,
        E0=E0,
        h11=h11,
        h22=h22,
    )


def ground_energy(params: ModelParams) -> float:
    """Energy of the uncoupled state |g,0>."""
    f1 = deformation_eval(params.deformation, 1)
    return 0.5 * params.omega_c * f1 * f1 - 0.5 * params.omega_a


def analytic_levels(params: ModelParams, k: int) -> np.ndarray:
    """The k lowest RWA eigenvalues assembled from |g,0> and the doublets."""
    levels = [ground_energy(params)]
    n = 0
    # Doublet energies grow with n for every physical deformation used here;
    # k + 1 doublets always hold at least the k lowest levels.
    while n <= k:
        d = doublet_block(params, n)
        levels.extend((d.E_minus, d.E_plus))
        n += 1
    return np.sort(np.array(levels))[:k]


def _kerr_chi(params):
    spec = params.deformation
    if spec.kind == "identity":
        return 0.0
    if spec.kind != "linear_kerr":
        raise DeformationError(f"requires a linear_kerr deformation, got {spec.kind!r}")
    return spec.params["chi"]


def effective_detuning(params: ModelParams, n: int) -> float:
    """Effective detuning of doublet n for f^2 = 1 + chi n (closed form)."""
    chi = _kerr_chi(params)
    wa, wc = params.omega_a, params.omega_c
    return wa * (1.0 - 2.0 * wc * chi / wa) - wc * (1.0 + 2.0 * chi * n)


def selective_cavity_frequency(m: int, chi: float) -> float:
    """omega_c/omega_a that zeroes the effective detuning of doublet m."""
    denom = 1.0 + 2.0 * chi * (m + 1)
    if denom <= 0.0 or abs(denom) < 1e-15:
        raise SingularConfigurationError(f"1 + 2 chi (m+1) = {denom} is not positive")
    return 1.0 / denom


def rwa_nmax(params: ModelParams) -> float:
    """Upper photon-number bound of the RWA regime for the Kerr-deformed JC model.

    For chi = 0 the undeformed bound 4 (omega_c + omega_a)^2 / Omega0^2 is
    returned. For chi != 0 the closed form is evaluated as is; it can be
    negative when Omega0^2 < 16 chi omega_c^2, where the counter-rotating
    matrix-element ratio never reaches one (see :func:`rwa_ratio`).
    """
    chi = _kerr_chi(params)
    wa, wc, W = params.omega_a, params.omega_c, params.Omega0
    if W == 0.0:
        return math.inf
    if chi == 0.0:
        return 4.0 * (wc + wa) ** 2 / W**2
    pole = 16.0 * chi * wc**2 - W**2
    if abs(pole) < 1e-12:
        raise SingularConfigurationError("16 chi omega_c^2 = Omega0^2: the RWA bound has a pole")
    radicand = W**2 + 16.0 * chi * (wa**2 - wc**2)
    if radicand < 0.0:
        raise SingularConfigurationError("the RWA bound is complex for these parameters")
    denom = 2.0 * chi * pole
    head = (4.0 * chi + 1.0) * W**2 - 16.0 * chi * wc * (wa + wc + 4.0 * chi * wc)
    return (head - W * math.sqrt(radicand)) / denom


def rwa_ratio(params: ModelParams, n) -> np.ndarray:
    """Counter-rotating strength Omega0^2 |<g,n+1|A s_-|e,n+2>|^2 / 4(w_c + w_a + 2 w_c chi (n+2))^2."""
    chi = _kerr_chi(params)
    n = np.asarray(n, dtype=float)
    m = n + 2.0
    wa, wc, W = params.omega_a, params.omega_c, params.Omega0
    return W**2 * m * (1.0 + chi * m) / (4.0 * (wc + wa + 2.0 * wc * chi * m) ** 2)


@dataclass
class EigenSweep:
    kind: ModelKind
    couplings: np.ndarray
    levels: np.ndarray
    cutoffs: list


def _lowest_levels(kind, params, N, k):
    H = build_hamiltonian(kind, params, HilbertLayout(N))
    return np.linalg.eigvalsh(H)[:k]


def _converged_levels(kind, params, N, k, rtol, max_cutoff):
    N = max(N, k // 2 + 3)
    current = _lowest_levels(kind, params, N, k)
    while True:
        if 2 * N > max_cutoff:
            raise CutoffError(
                f"{kind.value}: lowest {k} levels not converged to {rtol:g} below cutoff {max_cutoff}"
            )
        try:
            refined = _lowest_levels(kind, params, 2 * N, k)
        except DeformationError as exc:
            raise CutoffError(f"cannot enlarge the cutoff beyond {N}: {exc}") from exc
        scale = np.maximum(np.abs(refined), 1e-300)
        if np.all(np.abs(refined - current) <= rtol * scale):
            return refined, 2 * N
        N *= 2
        current = refined


def eigen_sweep(
    kind,
    params: ModelParams,
    coupling_grid,
    layout: HilbertLayout,
    k: int,
    rtol: float = 1e-8,
    max_cutoff: int = 1024,
    threads: int | None = None,
) -> EigenSweep:
    """Lowest k eigenvalues for every Omega0 in ``coupling_grid``.

    The Fock cutoff starts at ``layout.fock_cutoff`` and is doubled until the
    k levels move by less than ``rtol`` (relative). Grid points run
    independently; the output order follows the grid.
    """
    kind = ModelKind.parse(kind)
    grid = np.asarray(list(coupling_grid), dtype=float)
    if grid.size == 0:
        raise ValueError("coupling grid is empty")
    dim = layout.fock_cutoff if kind is ModelKind.FIELD_ONLY else layout.dim
    if k < 1 or k > dim:
        raise ValueError(f"k must be in [1, {dim}], got {k}")

    def one(W):
        return _converged_levels(
            kind, replace(params, Omega0=float(W)), layout.fock_cutoff, k, rtol, max_cutoff
        )

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, grid))
    else:
        results = [one(W) for W in grid]
    levels = np.array([r[0] for r in results])
    return EigenSweep(kind=kind, couplings=grid, levels=levels, cutoffs=[r[1] for r in results])
