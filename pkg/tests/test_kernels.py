import os
import subprocess
import sys

import numpy as np
import pytest

from ewspec import _fallback, kernels


def problem(M=300, R=3, P=50, seed=0):
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((M, R)) + 1j * rng.standard_normal((M, R))
    h = 0.1
    w = h * np.exp(0.02 * h * (np.arange(M) - M))
    return F, w, np.linspace(-1, 1, P), h


def test_gram_equals_double_sum():
    F, w, nus, h = problem()
    G = F.conj() @ F.T
    a = _fallback.gram_spectrum(F, w, nus, h)
    b = _fallback.double_sum_spectrum(G, w, nus, h)
    assert np.allclose(a, b, rtol=1e-12)


@pytest.mark.skipif(kernels.BACKEND != "compiled", reason="extension not built")
@pytest.mark.parametrize("R", [1, 4, 12])
def test_compiled_matches_fallback(R):
    F, w, nus, h = problem(R=R)
    ref = _fallback.gram_spectrum(F, w, nus, h)
    assert np.abs(kernels.gram_spectrum(F, w, nus, h) - ref).max() <= 1e-12 * ref.max()
    G = F.conj() @ F.T
    assert np.abs(kernels.compiled_double_sum_spectrum(G, w, nus, h) - ref).max() <= 1e-12 * ref.max()


def test_pure_python_switch():
    env = dict(os.environ, EWSPEC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import ewspec.kernels as k; print(k.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


def test_chunking_does_not_change_result(monkeypatch):
    F, w, nus, h = problem(P=40)
    ref = _fallback.gram_spectrum(F, w, nus, h)
    monkeypatch.setattr(_fallback, "_CHUNK", 1000)
    assert np.array_equal(_fallback.gram_spectrum(F, w, nus, h), ref) or np.allclose(
        _fallback.gram_spectrum(F, w, nus, h), ref, rtol=1e-14)
