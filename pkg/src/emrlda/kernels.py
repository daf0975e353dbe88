"""Backend selection for the sweep kernel.

The compiled extension is used when importable.  Set ``EMRLDA_BACKEND=python``
to force the pure-Python fallback.
"""
import os

from . import _fallback

python_sweep = _fallback.sweep

try:
    from ._kernels import sweep as compiled_sweep
except ImportError:  # extension not built
    compiled_sweep = None

if compiled_sweep is not None and os.environ.get("EMRLDA_BACKEND", "").lower() != "python":
    sweep = compiled_sweep
    BACKEND = "cython"
else:
    sweep = python_sweep
    BACKEND = "python"

__all__ = ["BACKEND", "compiled_sweep", "python_sweep", "sweep"]
