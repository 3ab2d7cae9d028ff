"""Backend selection for the spectrum kernels.

The compiled Gram kernel is used when the extension was built; setting
``EWSPEC_PURE_PYTHON=1`` forces the numpy fallback. The double-sum kernel
stays on the numpy path by default because a dense BLAS product beats the
scalar loop (see benchmarks/bench_kernels.py); the compiled loop is exposed
as ``compiled_double_sum_spectrum`` for comparison.
"""
import os

from . import _fallback

BACKEND = "python"
gram_spectrum = _fallback.gram_spectrum
double_sum_spectrum = _fallback.double_sum_spectrum
compiled_double_sum_spectrum = None

if os.environ.get("EWSPEC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "compiled"
        gram_spectrum = _kernels.gram_spectrum
        compiled_double_sum_spectrum = _kernels.double_sum_spectrum

__all__ = ["BACKEND", "gram_spectrum", "double_sum_spectrum"]
