"""Kernel backend selection.

The compiled Cython kernels are used when importable; otherwise the NumPy
fallback takes over transparently. Set CTCLUSTER_BACKEND=python to force
the fallback (e.g. for benchmarking) or =compiled to fail loudly when the
extension is missing.
"""

import os

_requested = os.environ.get("CTCLUSTER_BACKEND", "auto")
if _requested not in ("auto", "python", "compiled"):
    raise ValueError(f"CTCLUSTER_BACKEND must be auto, python or compiled, got {_requested!r}")

if _requested == "python":
    from . import numpy_backend as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import numpy_backend as _impl

        BACKEND = "python"

pcg_jacobi = _impl.pcg_jacobi
lloyd_iter = _impl.lloyd_iter

__all__ = ["BACKEND", "pcg_jacobi", "lloyd_iter"]
