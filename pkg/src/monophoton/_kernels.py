"""Hot loops for batched Monte Carlo trials.

Each kernel has a numba ``@njit`` version and a pure-numpy version that
produce bit-identical results. Set ``MONOPHOTON_DISABLE_NUMBA=1`` to force
the numpy path (numba is also skipped if it fails to import).

Random numbers come from SplitMix64 used as a counter-based generator: draw
``k`` of the stream keyed by ``seed`` is ``mix(seed + (k + 1) * GAMMA)``, and
trial ``i`` of a run uses the stream keyed by ``seed + i`` (all mod 2**64).
"""

from __future__ import annotations

import os

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1
UNIT = 2.0**-53

_GAMMA = np.uint64(GAMMA)
_MUL1 = np.uint64(MUL1)
_MUL2 = np.uint64(MUL2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


def _flag_set(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MUL2) & MASK64
    return z ^ (z >> 31)


# ---------------------------------------------------------------- numpy path


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _MUL1
    z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


def stream_uniforms_np(seed: int, first: int, n: int, draw: int = 0) -> np.ndarray:
    keys = np.uint64(seed & MASK64) + np.arange(first, first + n, dtype=np.uint64)
    z = _mix64_np(keys + np.uint64(((draw + 1) * GAMMA) & MASK64))
    return (z >> _S11).astype(np.float64) * UNIT


def inverse_cdf_np(cdf: np.ndarray, u: np.ndarray, last: int) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, last).astype(np.int64)


def sample_indices_np(cdf: np.ndarray, last: int, seed: int, first: int, n: int) -> np.ndarray:
    return inverse_cdf_np(cdf, stream_uniforms_np(seed, first, n), last)


# ---------------------------------------------------------------- numba path


def _build_numba():
    from numba import njit

    @njit(cache=True)
    def mix(z):
        z = (z ^ (z >> _S30)) * _MUL1
        z = (z ^ (z >> _S27)) * _MUL2
        return z ^ (z >> _S31)

    @njit(cache=True)
    def uniforms(seed, first, n, offset):
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            key = seed + np.uint64(first + i)
            out[i] = np.float64(mix(key + offset) >> _S11) * UNIT
        return out

    @njit(cache=True)
    def bisect_right(cdf, x):
        lo = 0
        hi = cdf.shape[0]
        while lo < hi:
            mid = (lo + hi) // 2
            if x < cdf[mid]:
                hi = mid
            else:
                lo = mid + 1
        return lo

    @njit(cache=True)
    def inverse_cdf(cdf, u, last):
        out = np.empty(u.shape[0], dtype=np.int64)
        for i in range(u.shape[0]):
            out[i] = min(bisect_right(cdf, u[i]), last)
        return out

    @njit(cache=True)
    def sample_indices(cdf, last, seed, first, n, offset):
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            key = seed + np.uint64(first + i)
            x = np.float64(mix(key + offset) >> _S11) * UNIT
            out[i] = min(bisect_right(cdf, x), last)
        return out

    return uniforms, inverse_cdf, sample_indices


USE_NUMBA = False
if not _flag_set("MONOPHOTON_DISABLE_NUMBA"):
    try:
        _nb_uniforms, _nb_inverse_cdf, _nb_sample_indices = _build_numba()
        USE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass


def stream_uniforms_nb(seed: int, first: int, n: int, draw: int = 0) -> np.ndarray:
    offset = np.uint64(((draw + 1) * GAMMA) & MASK64)
    return _nb_uniforms(np.uint64(seed & MASK64), first, n, offset)


def inverse_cdf_nb(cdf: np.ndarray, u: np.ndarray, last: int) -> np.ndarray:
    return _nb_inverse_cdf(np.ascontiguousarray(cdf, dtype=np.float64), np.asarray(u, dtype=np.float64), last)


def sample_indices_nb(cdf: np.ndarray, last: int, seed: int, first: int, n: int) -> np.ndarray:
    return _nb_sample_indices(
        np.ascontiguousarray(cdf, dtype=np.float64), last, np.uint64(seed & MASK64), first, n, _GAMMA
    )


if USE_NUMBA:
    stream_uniforms = stream_uniforms_nb
    inverse_cdf = inverse_cdf_nb
    sample_indices = sample_indices_nb
else:
    stream_uniforms = stream_uniforms_np
    inverse_cdf = inverse_cdf_np
    sample_indices = sample_indices_np


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
