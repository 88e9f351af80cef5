"""Backend selection for the compiled kernels.

Set ``QESCAPE_NUMBA=0`` in the environment to force the vectorized numpy
path; otherwise numba is used whenever it imports.
"""
import logging
import os

_flag = os.environ.get("QESCAPE_NUMBA", "1").strip().lower()

try:
    import numba

    logging.getLogger("numba").setLevel(logging.WARNING)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _flag not in ("0", "false", "no", "off")


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    Kernels are always compiled when numba exists (even if the numpy path is
    the default) so the benchmark can compare both.
    """
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def resolve_backend(backend=None):
    """Map ``None``/"auto"/"numba"/"numpy" to a concrete backend name."""
    if backend in (None, "auto"):
        return "numba" if USE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend
