"""Eberly-Wodkiewicz time-dependent spectrum.

S(w, Gamma, t) = 2 Gamma e^{-2 Gamma t} int_0^t int_0^t
                 e^{(Gamma - i w) t1} e^{(Gamma + i w) t2} G(t1, t2) dt1 dt2

Numeric evaluation works on a sampled :class:`~ewspec.dynamics.CorrelationGrid`
either through its Gram factor (one sum over time per frequency, manifestly
non-negative) or through the double sum over the dense kernel. Both paths use
the same quadrature weights, so they agree to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks as _find_peaks
from scipy.special import bernoulli

from . import kernels
from .analytic import ExponentialKernel
from .dynamics import CorrelationGrid
from .errors import SamplingError
from .hamiltonians import ModelParams, _kerr_chi, effective_detuning

__all__ = [
    "SAMPLES_PER_PERIOD",
    "SpectrumRequest",
    "SpectrumResult",
    "quadrature_weights",
    "ew_numeric",
    "ew_closed_form",
    "vrs_longtime",
    "vrs_fulltime",
    "kerr_longtime",
    "dvrs_longtime",
    "dvrs_lines",
    "default_omega_grid",
    "find_peaks",
]

SAMPLES_PER_PERIOD = 20


@dataclass
class SpectrumRequest:
    Gamma: float
    t: float
    omega: np.ndarray
    frame_shift: float | None = None

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        if not (self.Gamma > 0 and math.isfinite(self.Gamma)):
            raise ValueError(f"Gamma must be positive, got {self.Gamma}")
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise ValueError(f"t must be finite and >= 0, got {self.t}")
        if self.omega.ndim != 1 or self.omega.size == 0:
            raise ValueError("omega grid must be a non-empty 1-d array")
        if self.omega.size > 1 and np.any(np.diff(self.omega) <= 0):
            raise ValueError("omega grid must be strictly increasing")

    def to_dict(self):
        return {
            "Gamma": self.Gamma,
            "t": self.t,
            "omega_min": float(self.omega[0]),
            "omega_max": float(self.omega[-1]),
            "points": int(self.omega.size),
            "frame_shift": self.frame_shift,
        }


@dataclass
class SpectrumResult:
    omega: np.ndarray
    S: np.ndarray
    request: SpectrumRequest
    method: str
    info: dict = field(default_factory=dict)

    def peaks(self, **kwargs):
        return find_peaks(self.omega, self.S, **kwargs)


def _gregory_corrections(order):
    # Left-end corrections d_j (j < order) to the trapezoid rule, exact for
    # polynomials of degree < order: sum_j d_j j^m = B_{m+1}/(m+1) for odd m.
    B = bernoulli(order + 1)
    j = np.arange(order, dtype=float)
    V = np.vander(j, order, increasing=True).T
    rhs = np.array([B[m + 1] / (m + 1) if m % 2 else 0.0 for m in range(order)])
    return np.linalg.solve(V, rhs)


def quadrature_weights(samples, h, order=8):
    """Endpoint-corrected trapezoid weights on a uniform grid.

    ``order`` = 2 is the plain trapezoid rule; 4, 6, 8 add Gregory end
    corrections. The order drops automatically on grids too short for it.
    Returns (weights, order_used).
    """
    if order not in (2, 4, 6, 8):
        raise ValueError(f"quadrature order must be 2, 4, 6 or 8, got {order}")
    M = int(samples)
    if M < 2:
        raise ValueError("need at least two samples")
    w = np.ones(M)
    w[0] = w[-1] = 0.5
    while order > 2 and M < 2 * order:
        order -= 2
    if order > 2:
        d = _gregory_corrections(order)
        w[:order] += d
        w[M - order :] += d[::-1]
    return h * w, order


def _compress(F, rtol=1e-10):
    """Factor with the same Gram matrix and at most rank(F) columns."""
    if F.shape[1] <= 8:
        return np.ascontiguousarray(F)
    U, s, _ = np.linalg.svd(F, full_matrices=False)
    if s[0] == 0:
        return np.zeros((F.shape[0], 1), dtype=complex)
    r = int(np.count_nonzero(s > rtol * s[0]))
    return np.ascontiguousarray(U[:, :r] * s[:r])


def ew_numeric(corr: CorrelationGrid, req: SpectrumRequest, path="gram", order=8):
    """Filtered spectrum from a sampled correlation.

    ``path`` is "gram" (uses the trajectory factor) or "trapezoid" (double sum
    over the dense kernel). The kernel is truncated to [0, req.t] when the
    grid extends further. Raises :class:`SamplingError` if the grid takes
    fewer than 20 samples per period of the fastest integrand oscillation.
    """
    if path not in ("gram", "trapezoid"):
        raise ValueError(f"unknown path {path!r}")
    if req.frame_shift is not None and req.frame_shift != corr.frame_shift:
        raise ValueError(
            f"request frame shift {req.frame_shift} differs from the correlation's {corr.frame_shift}"
        )
    method = "numeric_gram" if path == "gram" else "numeric_trapezoid"
    info = {"frame_shift": corr.frame_shift, "backend": kernels.BACKEND}
    if req.t == 0:
        return SpectrumResult(req.omega, np.zeros_like(req.omega), req, method, info)
    t_grid = corr.grid.t_final
    if req.t > t_grid * (1 + 1e-12):
        raise ValueError(f"correlation covers t <= {t_grid}, spectrum requested at t = {req.t}")
    if req.t < t_grid * (1 - 1e-12):
        corr = corr.truncate(req.t)
    h = corr.grid.step
    M = corr.grid.samples
    nus = req.omega - corr.frame_shift
    fastest = float(np.abs(nus).max()) + (corr.max_frequency or 0.0)
    if h * fastest > 2 * math.pi / SAMPLES_PER_PERIOD * (1 + 1e-9):
        need = int(math.ceil(corr.grid.t_final * fastest * SAMPLES_PER_PERIOD / (2 * math.pi))) + 1
        raise SamplingError(
            f"time step {h:.4g} under-samples frequency {fastest:.4g} "
            f"({2 * math.pi / (h * fastest):.1f} samples per period, need {SAMPLES_PER_PERIOD}); "
            f"use at least {need} samples or a frame shift closer to the lines"
        )
    q, order_used = quadrature_weights(M, h, order)
    taus = h * np.arange(M)
    wts = q * np.exp(req.Gamma * (taus - corr.grid.t_final))
    if path == "gram":
        if not corr.has_factor:
            raise ValueError("correlation has no Gram factor; use path='trapezoid'")
        raw = kernels.gram_spectrum(_compress(corr.factor), wts, nus, h)
    else:
        raw = kernels.double_sum_spectrum(corr.values, wts, nus, h)
    info.update(quadrature_order=order_used, samples=M, step=h)
    return SpectrumResult(req.omega, 2.0 * req.Gamma * raw, req, method, info)


def ew_closed_form(kernel: ExponentialKernel, req: SpectrumRequest):
    """Exact filtered spectrum of an exponential-sum kernel."""
    S = kernel.spectrum(req.Gamma, req.omega, req.t)
    return SpectrumResult(req.omega, S, req, "closed_form", {"terms": int(kernel.coeffs.size)})


def _lorentz(x, Gamma):
    return (Gamma / 2.0) / (Gamma * Gamma + x * x)


def vrs_longtime(params: ModelParams, Gamma, omega):
    """Long-time vacuum Rabi doublet: two Lorentzians at omega_a +- Omega0/2."""
    x = np.asarray(omega, dtype=float) - params.omega_a
    half = params.Omega0 / 2.0
    return _lorentz(x + half, Gamma) + _lorentz(x - half, Gamma)


def vrs_fulltime(params: ModelParams, Gamma, omega, t):
    """Filtered vacuum Rabi spectrum at finite observation time t."""
    x = np.asarray(omega, dtype=float) - params.omega_a
    half = params.Omega0 / 2.0
    decay = math.exp(-Gamma * t)
    xp, xm = x + half, x - half
    first = (1 - 2 * decay * np.cos(xp * t) + decay * decay) / (Gamma**2 + xp**2)
    second = (1 - 2 * decay * np.cos(xm * t) + decay * decay) / (Gamma**2 + xm**2)
    num = (
        np.exp(1j * params.Omega0 * t)
        - decay * (np.exp(1j * xp * t) + np.exp(-1j * xm * t))
        + decay * decay
    )
    den = (Gamma + 1j * xp) * (Gamma - 1j * xm)
    # Re{num/den} written with the conjugate denominator to keep cancellation local
    cross = 2.0 * (num * np.conj(den)).real / (den.real**2 + den.imag**2)
    return Gamma / 2.0 * (first + second + cross)


def kerr_longtime(state, params: ModelParams, Gamma, omega):
    """Long-time field spectrum of the Kerr oscillator: weighted Lorentzian comb."""
    chi = _kerr_chi(params)
    probs = state.fock_distribution() if hasattr(state, "fock_distribution") else np.asarray(state)
    omega = np.asarray(omega, dtype=float)
    S = np.zeros_like(omega)
    for n, p in enumerate(probs):
        if n and p:
            centre = params.omega_c * (1.0 + 2.0 * chi * n)
            S += p * 2.0 * n * Gamma / (Gamma**2 + (omega - centre) ** 2)
    return S


def dvrs_lines(params: ModelParams):
    """Centres and weights (lower line first) of the deformed vacuum Rabi doublet."""
    chi = _kerr_chi(params)
    delta = effective_detuning(params, 0)
    phi = math.hypot(delta, params.Omega0 * math.sqrt(1.0 + chi))
    if phi == 0.0:
        centre = params.omega_a - delta / 2.0
        return np.array([centre, centre]), np.array([1.0, 1.0])
    centres = params.omega_a - delta / 2.0 + np.array([-phi / 2.0, phi / 2.0])
    weights = np.array([(1 - delta / phi) ** 2, (1 + delta / phi) ** 2])
    return centres, weights


def dvrs_longtime(params: ModelParams, Gamma, omega):
    """Long-time deformed vacuum Rabi doublet for any effective detuning."""
    centres, weights = dvrs_lines(params)
    omega = np.asarray(omega, dtype=float)
    return sum(w * _lorentz(omega - c, Gamma) for c, w in zip(centres, weights))


def default_omega_grid(peaks, Gamma, points=2001, margin=6.0):
    """Uniform grid covering every predicted peak with ``margin`` Gamma on each side."""
    peaks = np.atleast_1d(np.asarray(peaks, dtype=float))
    if peaks.size == 0:
        raise ValueError("no peaks to place the frequency grid around")
    return np.linspace(peaks.min() - margin * Gamma, peaks.max() + margin * Gamma, int(points))


def find_peaks(omega, S, rel_height=1e-3):
    """Local maxima refined by a parabola through the top sample and its neighbours.

    Returns (positions, heights) in increasing position order; maxima below
    ``rel_height`` times the global maximum are dropped.
    """
    omega = np.asarray(omega, dtype=float)
    S = np.asarray(S, dtype=float)
    if S.size < 3 or S.max() <= 0:
        return np.empty(0), np.empty(0)
    idx, _ = _find_peaks(S, height=rel_height * S.max())
    positions, heights = [], []
    for i in idx:
        y0, y1, y2 = S[i - 1], S[i], S[i + 1]
        curv = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / curv if curv < 0 else 0.0
        step = omega[i + 1] - omega[i] if shift >= 0 else omega[i] - omega[i - 1]
        positions.append(omega[i] + shift * step)
        heights.append(y1 - 0.25 * (y0 - y2) * shift)
    return np.array(positions), np.array(heights)
