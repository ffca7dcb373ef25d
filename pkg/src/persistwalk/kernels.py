"""Backend selection for the simulation kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``PERSISTWALK_BACKEND=python`` is set, the numpy
implementation is used.  ``BACKEND`` names the active choice.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

MODE_INTEGRATED = 0
MODE_PLAIN = 1
MODE_CYCLE_OVERSHOOT = 2
MODE_CYCLE_ZERO = 3

FLAG_PLUS_CENSORED = 1
FLAG_MINUS_CENSORED = 2
FLAG_STOPPED = 4
FLAG_MINUS_SKIPPED = 8

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

if _ckernels is not None and os.environ.get("PERSISTWALK_BACKEND", "").lower() != "python":
    BACKEND = "cython"
else:
    BACKEND = "python"


def available_backends() -> list:
    return ["cython", "python"] if _ckernels is not None else ["python"]


def _args(kernel):
    return (kernel.params, kernel.pos_vals, kernel.pos_cum, kernel.neg_vals, kernel.neg_cum)


def _keys(keys):
    return np.ascontiguousarray(keys, dtype=np.uint64)


def _use_c(backend):
    backend = backend or BACKEND
    if backend == "cython" and _ckernels is None:
        raise RuntimeError("compiled kernels are not available")
    return backend == "cython"


def draw_steps(kernel, u, backend=None):
    if _use_c(backend):
        return _ckernels.draw_steps(*_args(kernel), np.ascontiguousarray(u, dtype=np.float64))
    return _pykernels.draw_steps(kernel, u)


def walk_fail_times(kernel, keys, N: int, mode: int = MODE_INTEGRATED, tilted: bool = False,
                    backend=None) -> np.ndarray:
    if _use_c(backend):
        return _ckernels.walk_fail_times(*_args(kernel), _keys(keys), int(N), int(mode), bool(tilted))
    return _pykernels.walk_fail_times(kernel, keys, int(N), int(mode), bool(tilted))


def cycle_kernel(kernel, keys, cap_plus: int, cap_minus: int, stop_dur: int = -1,
                 stop_area: float = 0.0, start=None, backend=None):
    """Returns (theta_plus, xi_plus, theta_minus, xi_minus, flags, end_value)."""
    start = np.ascontiguousarray([] if start is None else start, dtype=np.float64)
    if _use_c(backend):
        return _ckernels.cycle_kernel(*_args(kernel), _keys(keys), int(cap_plus), int(cap_minus),
                                      int(stop_dur), float(stop_area), start)
    return _pykernels.cycle_kernel(kernel, keys, int(cap_plus), int(cap_minus), int(stop_dur),
                                   float(stop_area), start)


def zero_cycle_kernel(kernel, keys, cap: int, stop_dur: int = -1, backend=None):
    if _use_c(backend):
        return _ckernels.zero_cycle_kernel(*_args(kernel), _keys(keys), int(cap), int(stop_dur))
    return _pykernels.zero_cycle_kernel(kernel, keys, int(cap), int(stop_dur))


def chain_kernel(kernel, keys, K: int, N: int, cap: int, mode: int = 0, backend=None):
    if _use_c(backend):
        return _ckernels.chain_kernel(*_args(kernel), _keys(keys), int(K), int(N), int(cap), int(mode))
    return _pykernels.chain_kernel(kernel, keys, int(K), int(N), int(cap), int(mode))
