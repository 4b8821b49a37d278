"""Hot numeric kernels with two interchangeable backends.

The numba backend compiles direct-loop kernels with ``@njit``; the numpy
backend uses vectorized im2col/col2im equivalents. Both produce identical
results (deterministic accumulation order per element). Selection:

* ``AMRBENCH_BACKEND=numpy`` forces the pure-numpy path,
* ``AMRBENCH_BACKEND=numba`` requires numba and fails loudly if missing,
* unset/``auto``: numba when importable, numpy otherwise.

``benchmarks/bench_kernels.py`` times the two backends against each other.
"""

import os

from . import numpy_backend

_requested = os.environ.get("AMRBENCH_BACKEND", "auto").lower()

if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(f"AMRBENCH_BACKEND must be auto/numba/numpy, got {_requested!r}")

if _requested == "numpy":
    _impl = numpy_backend
else:
    try:
        from . import numba_backend as _impl
    except ImportError:
        if _requested == "numba":
            raise
        _impl = numpy_backend


def active_backend() -> str:
    """Name of the backend serving the kernel calls ('numba' or 'numpy')."""
    return "numba" if _impl is not numpy_backend else "numpy"


def get_backend(name: str):
    """Fetch a backend module by name, independent of the active selection."""
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        from . import numba_backend

        return numba_backend
    raise ValueError(f"unknown backend {name!r}")


conv2d_forward = _impl.conv2d_forward
conv2d_backward_input = _impl.conv2d_backward_input
conv2d_backward_params = _impl.conv2d_backward_params
maxpool2d_forward = _impl.maxpool2d_forward
maxpool2d_backward = _impl.maxpool2d_backward
