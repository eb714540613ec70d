"""Hot numeric kernels with a compiled fast path.

Codeword match counting and Viterbi decoding dominate simulation runtime.
Both exist twice: a Cython extension (tonedisc._ckern) and the pure-numpy
reference (py_impl), with identical outputs including tie-breaks. The
compiled backend is used when importable; set TONEDISC_KERNEL=py to force
the fallback. benchmarks/bench_kernels.py compares the two.
"""
from __future__ import annotations

import os

import numpy as np

from . import py_impl
from .py_impl import CONV_TAIL, conv_encode, conv_tables

_ckern = None
if os.environ.get("TONEDISC_KERNEL", "").lower() not in ("py", "python"):
    try:
        from tonedisc import _ckern  # type: ignore
    except ImportError:
        _ckern = None

BACKEND = "cython" if _ckern is not None else "python"

_CONV_PREV, _CONV_SIGN0, _CONV_SIGN1 = conv_tables()


def shifted_indices(codebook: np.ndarray, deltas: np.ndarray, p: int) -> np.ndarray:
    """Precompute (candidate + delta) mod p channel indices, (C, D, N) int32."""
    codebook = np.asarray(codebook, dtype=np.int64)
    deltas = np.asarray(deltas, dtype=np.int64)
    idx = (codebook[:, None, :] + deltas[None, :, None]) % p
    return np.ascontiguousarray(idx, dtype=np.int32)


def match_counts_batch(masks: np.ndarray, shifted: np.ndarray) -> np.ndarray:
    """counts[b, c, d] = number of codeword symbols present in the tone sets."""
    masks = np.ascontiguousarray(masks, dtype=np.uint8)
    shifted = np.ascontiguousarray(shifted, dtype=np.int32)
    if _ckern is not None:
        return _ckern.match_counts_batch(masks, shifted)
    return py_impl.match_counts_batch(masks, shifted)


def viterbi_decode(llrs: np.ndarray) -> np.ndarray:
    """Decode (B, 2L) soft LLRs to (B, L) input bits (tail included)."""
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if _ckern is not None:
        return _ckern.viterbi_decode(llrs, _CONV_PREV, _CONV_SIGN0, _CONV_SIGN1)
    return py_impl.viterbi_decode(llrs)
