"""Pure-numpy versions of the spectrum kernels (see :mod:`ewspec.kernels`)."""
import numpy as np

_CHUNK = 1 << 22  # complex entries per phase block


def _phases(nus, taus):
    return np.exp(1j * np.outer(nus, taus))


def gram_spectrum(F, weights, nus, h):
    """sum_r |sum_j weights_j exp(i nu h j) F[j, r]|^2 for every nu."""
    F = np.ascontiguousarray(F, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    nus = np.asarray(nus, dtype=float)
    M = F.shape[0]
    taus = h * np.arange(M)
    out = np.empty(nus.size)
    step = max(1, _CHUNK // max(M, 1))
    for lo in range(0, nus.size, step):
        E = _phases(nus[lo : lo + step], taus) * weights
        V = E @ F
        out[lo : lo + step] = np.sum(V.real**2 + V.imag**2, axis=1)
    return out


def double_sum_spectrum(G, weights, nus, h):
    """Re sum_jk conj(u_j) G[j, k] u_k with u_j = weights_j exp(i nu h j)."""
    G = np.ascontiguousarray(G, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    nus = np.asarray(nus, dtype=float)
    M = G.shape[0]
    taus = h * np.arange(M)
    out = np.empty(nus.size)
    step = max(1, _CHUNK // max(M, 1))
    for lo in range(0, nus.size, step):
        U = (_phases(nus[lo : lo + step], taus) * weights).T
        Y = G @ U
        out[lo : lo + step] = np.sum(U.conj() * Y, axis=0).real
    return out
