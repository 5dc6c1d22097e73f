"""Backend selection for the RK4 kernels.

The compiled extension is used when importable; set ``HOPGEO_BACKEND=python``
to force the pure-Python implementation.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("HOPGEO_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        pass

T_MAX, STEADY, NONFINITE = _kernels_py.T_MAX, _kernels_py.STEADY, _kernels_py.NONFINITE


def get_backend(name=None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def integrate_affine(*args, backend=None):
    return get_backend(backend).integrate_affine(*args)


def integrate_affine_variational(*args, backend=None):
    return get_backend(backend).integrate_affine_variational(*args)
