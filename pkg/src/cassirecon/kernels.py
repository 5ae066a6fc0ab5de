"""Backend selection for the measurement kernels.

The compiled extension is preferred; the NumPy implementation is a
drop-in, bit-identical fallback. ``BACKEND`` records which one is active.
"""

try:
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    from . import _kernels_np as _impl

    BACKEND = "numpy"

forward = _impl.forward
adjoint = _impl.adjoint
