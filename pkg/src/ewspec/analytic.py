"""Closed-form two-time correlation functions.

Every closed form here is also available as an :class:`ExponentialKernel`,
a finite sum G(t1, t2) = sum_k c_k exp(i (mu_k t1 + nu_k t2)). That
representation gives exact filtered spectra at any observation time and is
used as the ``closed_form`` spectrum method.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularConfigurationError
from .hamiltonians import ModelParams, _kerr_chi, effective_detuning

__all__ = [
    "ExponentialKernel",
    "rabi_frequency",
    "half_angle_sin_sq",
    "half_angle_cos_sq",
    "atom_corr_jc",
    "field_corr_jc",
    "kerr_field_corr",
    "atom_corr_djc",
    "jc_atom_kernel",
    "jc_field_kernel",
    "kerr_field_kernel",
    "djc_atom_kernel",
]


def rabi_frequency(params: ModelParams, n):
    """Undeformed Rabi frequency Omega0 sqrt(n+1); zero for n = -1."""
    if n < -1:
        raise ValueError(f"Rabi frequency index must be >= -1, got {n}")
    return params.Omega0 * math.sqrt(n + 1)


def half_angle_sin_sq(x):
    """2 sin^2(arctan(x)/2) = 1 - (1 + x^2)^(-1/2)."""
    x = np.asarray(x, dtype=float)
    return 1.0 - 1.0 / np.sqrt(1.0 + x * x)


def half_angle_cos_sq(x):
    """2 cos^2(arctan(x)/2) = 1 + (1 + x^2)^(-1/2)."""
    x = np.asarray(x, dtype=float)
    return 1.0 + 1.0 / np.sqrt(1.0 + x * x)


def _require_resonant(params):
    if abs(params.detuning) > 1e-12:
        raise ValueError(
            f"resonant closed form requires omega_a == omega_c (detuning {params.detuning:g})"
        )


def atom_corr_jc(params: ModelParams, n, t1, t2):
    """Atomic correlation <e,n| s_+(t1) s_-(t2) |e,n> of the resonant JC model."""
    _require_resonant(params)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    Wn = rabi_frequency(params, n)
    Wm = rabi_frequency(params, n - 1)
    return (
        np.exp(1j * params.omega_a * (t1 - t2))
        * np.cos(Wn * t1 / 2.0)
        * np.cos(Wm * (t1 - t2) / 2.0)
        * np.cos(Wn * t2 / 2.0)
    )


def field_corr_jc(params: ModelParams, n, t1, t2):
    """Field correlation <e,n| a^dag(t1) a(t2) |e,n> of the resonant JC model."""
    _require_resonant(params)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    Wn = rabi_frequency(params, n)
    Wm = rabi_frequency(params, n - 1)
    Wp, Wq = Wn + Wm, Wn - Wm
    root = 2.0 * math.sqrt(n * (n + 1))
    bracket = (
        (1 + 2 * n + root) * np.cos(Wq * (t1 - t2) / 2.0)
        - np.cos((Wq * t2 + Wp * t1) / 2.0)
        - np.cos((Wq * t1 + Wp * t2) / 2.0)
        + (1 + 2 * n - root) * np.cos(Wp * (t1 - t2) / 2.0)
    )
    return np.exp(1j * params.omega_c * (t1 - t2)) / 4.0 * bracket


def _kerr_line(params, n):
    chi = _kerr_chi(params)
    return params.omega_c + 2.0 * params.omega_c * chi * n


def kerr_field_corr(params: ModelParams, state, t1, t2):
    """Field correlation of the bare Kerr oscillator for a Fock-diagonal initial state.

    ``state`` is an :class:`~ewspec.dynamics.InitialState` on the field space
    or directly a vector of photon-number probabilities.
    """
    probs = state.fock_distribution() if hasattr(state, "fock_distribution") else np.asarray(state)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    out = np.zeros(np.broadcast(t1, t2).shape, dtype=complex)
    for n, p in enumerate(probs):
        if n == 0 or p == 0.0:
            continue
        out += p * n * np.exp(1j * _kerr_line(params, n) * (t1 - t2))
    return out


def _djc_pieces(params, n):
    if int(n) != n or n < 1:
        raise ValueError(f"the deformed atomic closed form needs n >= 1, got {n}")
    chi = _kerr_chi(params)

    def phi(m):
        delta = effective_detuning(params, m)
        rabi = params.Omega0 * math.sqrt((m + 1) * (1.0 + chi * (m + 1)))
        value = math.hypot(delta, rabi)
        if value == 0.0:
            raise SingularConfigurationError(f"degenerate doublet {m}: phi = 0")
        return value, delta

    phi_n, d_n = phi(n)
    phi_m, d_m = phi(n - 1)
    dE = params.omega_c * (1.0 + chi * (2 * n + 1))
    return phi_n, d_n / phi_n, phi_m, d_m / phi_m, dE


def atom_corr_djc(params: ModelParams, n, t1, t2):
    """Atomic correlation <e,n| s_+(t1) s_-(t2) |e,n> of the Kerr-deformed JC model."""
    phi_n, d, phi_m, dm, dE = _djc_pieces(params, n)
    phi_plus, phi_minus = phi_n + phi_m, phi_n - phi_m
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    prefactor = (
        np.exp(1j * dE * (t1 - t2))
        * np.exp(-0.5j * (phi_minus * t2 + phi_plus * t1))
        / 8.0
    )
    first = np.exp(1j * phi_n * t1) * (1 + d) + (1 - d)
    second = (1 + d) + np.exp(1j * phi_n * t2) * (1 - d)
    third = np.exp(1j * phi_m * (t1 - t2)) * (1 + dm) + (1 - dm)
    return prefactor * first * second * third


@dataclass(frozen=True)
class ExponentialKernel:
    """G(t1, t2) = sum_k c_k exp(i (mu_k t1 + nu_k t2))."""

    coeffs: np.ndarray
    mu: np.ndarray
    nu: np.ndarray

    @classmethod
    def from_terms(cls, terms, merge_decimals=12):
        merged = {}
        for c, mu, nu in terms:
            key = (round(mu, merge_decimals), round(nu, merge_decimals))
            if key in merged:
                merged[key][0] += c
            else:
                merged[key] = [complex(c), mu, nu]
        kept = [v for v in merged.values() if v[0] != 0]
        kept.sort(key=lambda v: (v[1], v[2]))
        return cls(
            np.array([v[0] for v in kept], dtype=complex),
            np.array([v[1] for v in kept], dtype=float),
            np.array([v[2] for v in kept], dtype=float),
        )

    def terms(self):
        return list(zip(self.coeffs, self.mu, self.nu))

    def __mul__(self, other):
        return ExponentialKernel.from_terms(
            (c1 * c2, m1 + m2, n1 + n2) for c1, m1, n1 in self.terms() for c2, m2, n2 in other.terms()
        )

    def scale(self, factor):
        return ExponentialKernel(self.coeffs * factor, self.mu, self.nu)

    def __call__(self, t1, t2):
        t1 = np.asarray(t1, dtype=float)[..., None]
        t2 = np.asarray(t2, dtype=float)[..., None]
        return np.sum(self.coeffs * np.exp(1j * (self.mu * t1 + self.nu * t2)), axis=-1)

    def lines(self, rel_tol=1e-12):
        """Stationary emission lines (mu = -nu) and their weights."""
        diag = np.abs(self.mu + self.nu) < 1e-12
        weights = self.coeffs[diag].real
        keep = np.abs(weights) > rel_tol * max(np.abs(weights).max(initial=0.0), 1e-300)
        return self.mu[diag][keep], weights[keep]

    def max_frequency(self, frame_shift=0.0):
        return float(
            max(np.abs(self.mu - frame_shift).max(initial=0.0), np.abs(self.nu + frame_shift).max(initial=0.0))
        )

    def hermitian_factor(self, decimals=12):
        """(mu, L) with G = sum_ab e^{i mu_a t1} (L L^dag)_ab e^{-i mu_b t2}.

        Exists when every nu is minus some mu and the coefficient matrix is
        positive semidefinite, which holds for autocorrelation kernels.
        Returns None otherwise.
        """
        # group by rounded frequency but keep an exact representative, since
        # rounding errors grow linearly with time in the phases
        exact = np.concatenate([self.mu, -self.nu])
        keys, first, inverse = np.unique(np.round(exact, decimals), return_index=True, return_inverse=True)
        mus = exact[first]
        C = np.zeros((keys.size, keys.size), dtype=complex)
        np.add.at(C, (inverse[: self.mu.size], inverse[self.mu.size :]), self.coeffs)
        scale = max(np.abs(C).max(), 1e-300)
        if np.abs(C - C.conj().T).max() > 1e-12 * scale:
            return None
        lam, U = np.linalg.eigh(0.5 * (C + C.conj().T))
        if lam.min() < -1e-12 * max(lam.max(), 1e-300):
            return None
        keep = lam > 1e-14 * lam.max()
        return mus, U[:, keep] * np.sqrt(lam[keep])

    def gram_factor(self, times, frame_shift=0.0):
        """Rows w(t) with conj(W) W^T equal to the kernel on ``times`` (frame shifted)."""
        factor = self.hermitian_factor()
        if factor is None:
            raise ValueError("kernel is not a positive semidefinite autocorrelation")
        mus, L = factor
        times = np.asarray(times, dtype=float)
        E = np.exp(1j * np.outer(times, mus))
        return np.conj(E @ L) * np.exp(1j * frame_shift * times)[:, None]

    def spectrum(self, Gamma, omega, t):
        """Exact filtered spectrum 2 Gamma e^{-2 Gamma t} int int e^{(G-iw)t1} e^{(G+iw)t2} G.

        For autocorrelation kernels the value is evaluated as a squared norm,
        so it is non-negative by construction.
        """
        omega = np.asarray(omega, dtype=float)
        if t == 0:
            return np.zeros_like(omega)
        w = omega[:, None]
        factor = self.hermitian_factor()
        if factor is not None:
            mus, L = factor
            x = _damped_integral(Gamma - 1j * w + 1j * mus, Gamma, t)
            y = x @ L
            return 2.0 * Gamma * np.sum(y.real**2 + y.imag**2, axis=1)
        a1 = Gamma - 1j * w + 1j * self.mu
        a2 = Gamma + 1j * w + 1j * self.nu
        total = np.sum(self.coeffs * _damped_integral(a1, Gamma, t) * _damped_integral(a2, Gamma, t), axis=1)
        return 2.0 * Gamma * total.real


def _damped_integral(a, Gamma, t):
    # e^{-Gamma t} int_0^t e^{a s} ds with Re(a) = Gamma > 0
    return (np.exp((a - Gamma) * t) - np.exp(-Gamma * t)) / a


def _cos(coef, a, b):
    """coef * cos(a t1 + b t2) as exponential terms."""
    return ExponentialKernel.from_terms([(coef / 2.0, a, b), (coef / 2.0, -a, -b)])


def _exp(coef, a, b):
    return ExponentialKernel.from_terms([(coef, a, b)])


def jc_atom_kernel(params: ModelParams, n):
    _require_resonant(params)
    Wn = rabi_frequency(params, n)
    Wm = rabi_frequency(params, n - 1)
    wa = params.omega_a
    return _exp(1.0, wa, -wa) * _cos(1.0, Wn / 2, 0.0) * _cos(1.0, Wm / 2, -Wm / 2) * _cos(1.0, 0.0, Wn / 2)


def jc_field_kernel(params: ModelParams, n):
    _require_resonant(params)
    Wn = rabi_frequency(params, n)
    Wm = rabi_frequency(params, n - 1)
    Wp, Wq = Wn + Wm, Wn - Wm
    root = 2.0 * math.sqrt(n * (n + 1))
    terms = []
    for part in (
        _cos(1 + 2 * n + root, Wq / 2, -Wq / 2),
        _cos(-1.0, Wp / 2, Wq / 2),
        _cos(-1.0, Wq / 2, Wp / 2),
        _cos(1 + 2 * n - root, Wp / 2, -Wp / 2),
    ):
        terms.extend(part.terms())
    wc = params.omega_c
    return _exp(0.25, wc, -wc) * ExponentialKernel.from_terms(terms)


def kerr_field_kernel(params: ModelParams, probs):
    terms = []
    for n, p in enumerate(np.asarray(probs, dtype=float)):
        if n and p:
            line = _kerr_line(params, n)
            terms.append((p * n, line, -line))
    return ExponentialKernel.from_terms(terms)


def djc_atom_kernel(params: ModelParams, n):
    phi_n, d, phi_m, dm, dE = _djc_pieces(params, n)
    phi_plus, phi_minus = phi_n + phi_m, phi_n - phi_m
    prefactor = _exp(1.0 / 8.0, dE - phi_plus / 2, -dE - phi_minus / 2)
    first = ExponentialKernel.from_terms([(1 + d, phi_n, 0.0), (1 - d, 0.0, 0.0)])
    second = ExponentialKernel.from_terms([(1 + d, 0.0, 0.0), (1 - d, 0.0, phi_n)])
    third = ExponentialKernel.from_terms([(1 + dm, phi_m, -phi_m), (1 - dm, 0.0, 0.0)])
    return prefactor * first * second * third
