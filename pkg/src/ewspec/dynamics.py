"""Exact propagation and two-time correlation kernels.

One Hermitian eigendecomposition per Hamiltonian is reused for every time on
the grid, so U(t) = V exp(-i Lambda t) V^dag is exact up to the eigensolver.
Correlations G(t1, t2) = <psi0| O^dag(t1) O(t2) |psi0> are stored through
their Gram factor w(t) = U^dag(t) O U(t) |psi0>, which makes Hermitian
symmetry and positive semidefiniteness structural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import CutoffError, SamplingError
from .operators import HilbertLayout

__all__ = [
    "TAIL_TOLERANCE",
    "STATE_KINDS",
    "InitialState",
    "TimeGrid",
    "CorrelationGrid",
    "Evolution",
    "make_initial_state",
    "suggest_cutoff",
    "poisson_weights",
    "thermal_weights",
    "propagator",
    "emission_lines",
    "line_summary",
    "content_frequency",
    "two_time_correlation",
]

TAIL_TOLERANCE = 1e-8

STATE_KINDS = (
    "fock_excited",
    "fock_pair",
    "coherent_excited",
    "thermal_field",
    "coherent_field",
    "fock_field",
)
FIELD_KINDS = ("thermal_field", "coherent_field", "fock_field")


def poisson_weights(nbar, count):
    """P_n = exp(-nbar) nbar^n / n! for n < count."""
    n = np.arange(count)
    if nbar == 0.0:
        return (n == 0).astype(float)
    return np.exp(-nbar + n * math.log(nbar) - gammaln(n + 1))


def thermal_weights(nbar, count):
    """P_n = nbar^n / (1 + nbar)^(n+1) for n < count."""
    n = np.arange(count)
    if nbar == 0.0:
        return (n == 0).astype(float)
    return np.exp(n * math.log(nbar) - (n + 1) * math.log1p(nbar))


def _tail(kind, nbar, N):
    if kind.startswith("thermal"):
        return (nbar / (1.0 + nbar)) ** N if nbar > 0 else 0.0
    return max(0.0, 1.0 - float(poisson_weights(nbar, N).sum()))


def suggest_cutoff(kind, n=0, nbar=0.0):
    """Smallest Fock cutoff the constructors accept for this state.

    Fock states need n + 2 levels. Coherent and thermal states use at least
    nbar + 10 sqrt(nbar) + 10 levels and more if the truncated probability
    would still exceed ``TAIL_TOLERANCE``.
    """
    if kind in ("fock_excited", "fock_pair", "fock_field"):
        return max(3, int(n) + 2)
    N = max(3, int(math.ceil(nbar + 10.0 * math.sqrt(nbar) + 10.0)))
    while _tail(kind, nbar, N) >= TAIL_TOLERANCE:
        N += 1
    return N


@dataclass
class InitialState:
    """A pure state or a diagonal Fock mixture, given as weighted pure components.

    Truncated coherent/thermal distributions are not renormalized;
    ``deficit`` is the probability mass lost beyond the cutoff.
    """

    kind: str
    params: dict
    components: list
    deficit: float = 0.0
    field_only: bool = False

    @property
    def dim(self):
        return self.components[0][1].shape[0]

    @property
    def fock_cutoff(self):
        return self.dim if self.field_only else self.dim // 2

    @property
    def is_pure(self):
        return len(self.components) == 1

    @property
    def vector(self):
        if not self.is_pure:
            raise ValueError(f"{self.kind} is a mixture; use .components")
        return self.components[0][1]

    @property
    def weights(self):
        return np.array([w for w, _ in self.components])

    def fock_distribution(self):
        """Photon-number probabilities summed over the atom and the components."""
        N = self.fock_cutoff
        probs = np.zeros(N)
        for w, vec in self.components:
            p = np.abs(vec) ** 2
            probs += w * (p if self.field_only else p.reshape(N, 2).sum(axis=1))
        return probs


def _basis(dim, index):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def make_initial_state(kind, layout: HilbertLayout, n=0, alpha=0.0, nbar=None, excited=True):
    """Build an initial state in the package basis ordering.

    Field-only kinds (``fock_field``, ``coherent_field``, ``thermal_field``)
    live on the N-dimensional Fock space; the others on the 2N atom-field
    space. ``nbar`` defaults to |alpha|^2 for coherent kinds.
    """
    if kind not in STATE_KINDS:
        raise ValueError(f"unknown state kind {kind!r}; expected one of {STATE_KINDS}")
    N = layout.fock_cutoff
    field_only = kind in FIELD_KINDS
    dim = N if field_only else 2 * N
    params = {}

    if kind in ("fock_excited", "fock_pair", "fock_field"):
        n = int(n)
        if n < 0:
            raise ValueError("Fock index must be >= 0")
        if n >= N:
            raise CutoffError(f"Fock index {n} does not fit below cutoff {N}")
        if kind == "fock_field":
            index = n
        else:
            is_excited = True if kind == "fock_excited" else bool(excited)
            index = HilbertLayout.index(n, is_excited)
            params["excited"] = is_excited
        params["n"] = n
        return InitialState(kind, params, [(1.0, _basis(dim, index))], 0.0, field_only)

    if kind in ("coherent_excited", "coherent_field"):
        alpha = complex(alpha)
        nbar = abs(alpha) ** 2
        params.update(alpha_re=alpha.real, alpha_im=alpha.imag, nbar=nbar)
        k = np.arange(N)
        if alpha == 0:
            amps = (k == 0).astype(complex)
        else:
            log_mag = -nbar / 2.0 + k * math.log(abs(alpha)) - 0.5 * gammaln(k + 1)
            amps = np.exp(log_mag + 1j * k * np.angle(alpha))
        deficit = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
        if deficit > TAIL_TOLERANCE:
            raise CutoffError(
                f"cutoff {N} truncates {deficit:.3g} of the coherent state "
                f"(need cutoff >= {suggest_cutoff(kind, nbar=nbar)})"
            )
        if field_only:
            vec = amps
        else:
            vec = np.zeros(dim, dtype=complex)
            vec[1::2] = amps
        return InitialState(kind, params, [(1.0, vec)], deficit, field_only)

    # thermal_field: diagonal mixture of Fock states
    nbar = float(nbar if nbar is not None else abs(alpha) ** 2)
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    params["nbar"] = nbar
    weights = thermal_weights(nbar, N)
    deficit = _tail(kind, nbar, N)
    if deficit > TAIL_TOLERANCE:
        raise CutoffError(
            f"cutoff {N} truncates {deficit:.3g} of the thermal state "
            f"(need cutoff >= {suggest_cutoff(kind, nbar=nbar)})"
        )
    components = [(float(w), _basis(dim, j)) for j, w in enumerate(weights) if w > 0.0]
    return InitialState(kind, params, components, deficit, True)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, t_final] including both ends."""

    t_final: float
    samples: int

    def __post_init__(self):
        if not (self.t_final > 0 and math.isfinite(self.t_final)):
            raise ValueError(f"t_final must be positive and finite, got {self.t_final}")
        if int(self.samples) != self.samples or self.samples < 2:
            raise ValueError(f"samples must be an integer >= 2, got {self.samples}")

    @property
    def values(self):
        return np.linspace(0.0, self.t_final, int(self.samples))

    @property
    def step(self):
        return self.t_final / (self.samples - 1)

    @classmethod
    def resolving(cls, t_final, max_frequency, samples_per_period=20, multiple_of=1):
        """Grid with at least ``samples_per_period`` samples per period of ``max_frequency``.

        ``multiple_of`` rounds the interval count up so that t_final/k lands on
        the grid for every divisor k of it (used for time sweeps).
        """
        max_frequency = max(float(max_frequency), 1e-12)
        h_max = 2.0 * math.pi / (samples_per_period * max_frequency)
        intervals = max(16, int(math.ceil(t_final / h_max)))
        intervals = int(math.ceil(intervals / multiple_of)) * multiple_of
        return cls(t_final, intervals + 1)


@dataclass
class CorrelationGrid:
    """Two-time correlation sampled on ``grid x grid``.

    ``components`` holds (weight, W) pairs, W of shape (M, D) with rows w(t_i),
    so that G = sum_k weight_k conj(W_k) W_k^T. A dense-only kernel can be
    supplied through ``dense`` instead (no Gram factor; only the double-sum
    spectrum path is then available).

    ``frame_shift`` is the reference frequency already removed from the data
    (G_stored = G_lab exp(-i frame_shift (t1 - t2))). ``max_frequency`` bounds
    the angular frequencies present in the stored data, and ``peaks`` /
    ``peak_weights`` list the lab-frame emission lines when known.
    """

    grid: TimeGrid
    probe: str
    components: list = field(default_factory=list)
    dense: np.ndarray | None = None
    frame_shift: float = 0.0
    max_frequency: float | None = None
    peaks: np.ndarray | None = None
    peak_weights: np.ndarray | None = None
    _factor: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_function(cls, func, grid: TimeGrid, frame_shift=0.0, probe="analytic",
                      max_frequency=None, peaks=None, peak_weights=None):
        """Dense kernel sampled from ``func(t1, t2)`` (lab frame) on grid x grid."""
        t = grid.values
        T1, T2 = np.meshgrid(t, t, indexing="ij")
        values = np.asarray(func(T1, T2), dtype=complex)
        if frame_shift:
            values = values * np.exp(-1j * frame_shift * (T1 - T2))
        return cls(grid=grid, probe=probe, dense=values, frame_shift=float(frame_shift),
                   max_frequency=max_frequency, peaks=peaks, peak_weights=peak_weights)

    @classmethod
    def from_kernel(cls, kernel, grid: TimeGrid, frame_shift=0.0, probe="analytic"):
        """Gram-factored samples of an exponential-sum autocorrelation kernel."""
        F = kernel.gram_factor(grid.values, frame_shift)
        peaks, weights = kernel.lines()
        return cls(grid=grid, probe=probe, components=[(1.0, F)], frame_shift=float(frame_shift),
                   max_frequency=kernel.max_frequency(frame_shift), peaks=peaks, peak_weights=weights)

    @property
    def has_factor(self):
        return bool(self.components)

    @property
    def factor(self):
        """Stacked Gram factor F with G = conj(F) F^T."""
        if not self.components:
            raise ValueError("this correlation grid has no Gram factor")
        if self._factor is None:
            parts = [math.sqrt(w) * W for w, W in self.components if w > 0.0]
            self._factor = parts[0] if len(parts) == 1 else np.hstack(parts)
        return self._factor

    @property
    def values(self):
        if self.dense is not None:
            return self.dense
        M = self.grid.samples
        if M > 8192:
            raise MemoryError(f"refusing to materialize a {M}x{M} kernel; use the Gram factor")
        F = self.factor
        return F.conj() @ F.T

    def truncate(self, t_final):
        """Correlation restricted to [0, t_final]; t_final must be a grid point."""
        h = self.grid.step
        k = t_final / h
        m = int(round(k))
        if abs(k - m) > 1e-9 * max(1.0, k) or m < 1 or m >= self.grid.samples:
            raise SamplingError(f"t = {t_final} is not an interior point of the time grid")
        grid = TimeGrid(m * h, m + 1)
        return CorrelationGrid(
            grid=grid,
            probe=self.probe,
            components=[(w, W[: m + 1]) for w, W in self.components],
            dense=None if self.dense is None else self.dense[: m + 1, : m + 1],
            frame_shift=self.frame_shift,
            max_frequency=self.max_frequency,
            peaks=self.peaks,
            peak_weights=self.peak_weights,
        )


class Evolution:
    """Cached spectral decomposition H = V diag(lam) V^dag."""

    def __init__(self, H):
        H = np.asarray(H)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("Hamiltonian must be a square matrix")
        scale = max(1.0, float(np.abs(H).max()))
        if np.abs(H - H.conj().T).max() > 1e-12 * scale:
            raise ValueError("Hamiltonian is not Hermitian")
        self.H = H
        self.energies, self.vectors = np.linalg.eigh(H)

    @property
    def dim(self):
        return self.H.shape[0]

    def propagator(self, t):
        V = self.vectors
        return (V * np.exp(-1j * self.energies * t)) @ V.conj().T

    def trajectory(self, O, psi, times, frame_shift=0.0):
        """Rows w(t) = exp(i frame_shift t) U^dag(t) O U(t) psi, shape (len(times), dim)."""
        V = self.vectors
        lam = self.energies
        O_eig = V.conj().T @ np.asarray(O) @ V
        x0 = V.conj().T @ psi
        times = np.asarray(times, dtype=float)
        phase = np.exp(-1j * np.outer(times, lam))
        W_eig = phase.conj() * ((phase * x0) @ O_eig.T)
        if frame_shift:
            W_eig *= np.exp(1j * frame_shift * times)[:, None]
        return W_eig @ V.T


def propagator(H, t):
    """U(t) = exp(-i H t) through the spectral decomposition of H."""
    return Evolution(H).propagator(t)


def emission_lines(evolution: Evolution, O, state: InitialState):
    """Emission lines lam_k - lam_j carried by O for every state component.

    Returns (lines, amplitudes, powers) flattened over components, with the
    component weights folded in (amplitude ~ sqrt(weight), power ~ weight).
    """
    V = evolution.vectors
    lam = evolution.energies
    O_eig = V.conj().T @ np.asarray(O) @ V
    diff = (lam[None, :] - lam[:, None]).ravel()
    lines, amps, powers = [], [], []
    for weight, psi in state.components:
        amp = np.abs(O_eig * (V.conj().T @ psi)[None, :]).ravel()
        lines.append(diff)
        amps.append(math.sqrt(weight) * amp)
        powers.append(weight * amp**2)
    return np.concatenate(lines), np.concatenate(amps), np.concatenate(powers)


def line_summary(lines, amps, powers, power_tol=1e-6, amp_tol=1e-9):
    """Merge significant lines into (peaks, peak_weights) and the content spread.

    Peaks keep lines holding more than ``power_tol`` of the total power;
    ``present`` flags every line whose amplitude exceeds ``amp_tol`` of the
    largest and therefore matters for sampling.
    """
    if amps.size == 0 or amps.max() == 0:
        return np.empty(0), np.empty(0), np.zeros(lines.shape, dtype=bool)
    present = amps > amp_tol * amps.max()
    strong = powers > power_tol * powers.sum()
    keys = np.round(lines[strong], 12)
    peaks, inverse = np.unique(keys, return_inverse=True)
    return peaks, np.bincount(inverse, weights=powers[strong]), present


def content_frequency(lines, present, frame_shift):
    """Largest |line - frame_shift| among lines that matter for sampling."""
    if not np.any(present):
        return 0.0
    return float(np.abs(lines[present] - frame_shift).max())


def two_time_correlation(H, O, state: InitialState, grid: TimeGrid, frame_shift=0.0,
                         evolution: Evolution | None = None, probe="custom"):
    """Correlation <psi0|O^dag(t1) O(t2)|psi0> on ``grid``.

    Mixtures are averaged over their weighted pure components, so the result
    is linear in the weights by construction.
    """
    evo = evolution if evolution is not None else Evolution(H)
    O = np.asarray(O)
    if O.shape != evo.H.shape:
        raise ValueError(f"operator shape {O.shape} does not match Hamiltonian {evo.H.shape}")
    if state.dim != evo.dim:
        raise ValueError(f"state dimension {state.dim} does not match Hamiltonian {evo.dim}")
    times = grid.values
    components = [(w, evo.trajectory(O, psi, times, frame_shift)) for w, psi in state.components]
    lines, amps, powers = emission_lines(evo, O, state)
    peaks, peak_weights, present = line_summary(lines, amps, powers)
    return CorrelationGrid(
        grid=grid,
        probe=probe,
        components=components,
        frame_shift=float(frame_shift),
        max_frequency=content_frequency(lines, present, frame_shift),
        peaks=peaks,
        peak_weights=peak_weights,
    )
