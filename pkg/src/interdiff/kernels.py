"""Backend selection for the hot kernels.

Set ``INTERDIFF_BACKEND=numpy`` to force the pure-numpy path; the default is
numba when it imports, numpy otherwise. Both backends give identical results
for identical inputs.
"""
import importlib
import logging
import os
from types import ModuleType

log = logging.getLogger(__name__)

BACKENDS = ("numba", "numpy")
ENV_VAR = "INTERDIFF_BACKEND"


def load(name: str) -> ModuleType:
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")
    return importlib.import_module(f"interdiff._kernels_{name}")


def _select() -> tuple[str, ModuleType]:
    requested = os.environ.get(ENV_VAR, "").strip().lower()
    if requested:
        return requested, load(requested)
    try:
        return "numba", load("numba")
    except ImportError:
        log.info("numba unavailable, using numpy kernels")
        return "numpy", load("numpy")


backend, _impl = _select()

sweep = _impl.sweep
interdependent_susceptibility = _impl.interdependent_susceptibility
checkerboard_swaps = _impl.checkerboard_swaps
