"""Pure-numpy reference implementations of the hot kernels.

Semantics here are the contract; the compiled backend must match bit for bit
(same tie-breaking, same survivor convention). Kept deliberately simple so
the equivalence tests pin the Cython code to something auditable.
"""
from __future__ import annotations

import numpy as np

# Rate-1/2, constraint-length-7 feedforward code, generators 0o133/0o171.
# Register value r holds the current bit at bit 6 and the previous six bits
# below it; next state drops the oldest bit: s' = r >> 1.
CONV_G0 = 0o133
CONV_G1 = 0o171
CONV_STATES = 64
CONV_TAIL = 6

_PARITY = np.array([bin(i).count("1") & 1 for i in range(128)], dtype=np.uint8)


def conv_tables():
    """ACS tables indexed by (next_state, choice j).

    prev[ns, j] is the predecessor state, and sign0/sign1 are 1-2*coded_bit
    for the two output bits on that transition. The input bit that enters
    next_state ns is ns >> 5.
    """
    ns = np.arange(CONV_STATES)
    b = ns >> 5
    prev = np.empty((CONV_STATES, 2), dtype=np.int32)
    sign0 = np.empty((CONV_STATES, 2), dtype=np.int8)
    sign1 = np.empty((CONV_STATES, 2), dtype=np.int8)
    for j in (0, 1):
        p = ((ns & 31) << 1) | j
        r = (b << 6) | p
        prev[:, j] = p
        sign0[:, j] = 1 - 2 * _PARITY[r & CONV_G0].astype(np.int8)
        sign1[:, j] = 1 - 2 * _PARITY[r & CONV_G1].astype(np.int8)
    return prev, sign0, sign1


def conv_encode(bits: np.ndarray) -> np.ndarray:
    """Encode (B, L) info+tail bits to (B, 2L) coded bits, zero initial state."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 2:
        raise ValueError("bits must be (blocks, length)")
    nblk, length = bits.shape
    coded = np.empty((nblk, 2 * length), dtype=np.uint8)
    state = np.zeros(nblk, dtype=np.int64)
    for t in range(length):
        r = (bits[:, t].astype(np.int64) << 6) | state
        coded[:, 2 * t] = _PARITY[r & CONV_G0]
        coded[:, 2 * t + 1] = _PARITY[r & CONV_G1]
        state = r >> 1
    return coded


def viterbi_decode(llrs: np.ndarray) -> np.ndarray:
    """Soft Viterbi for the fixed rate-1/2 code, terminated in state 0.

    llrs is (B, 2L) with the convention llr > 0 means coded bit 0 is more
    likely; zero LLR is an erasure. Returns (B, L) decided input bits
    including the tail. Ties pick choice j=0.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[1] % 2:
        raise ValueError("llrs must be (blocks, 2*length)")
    nblk, length = llrs.shape[0], llrs.shape[1] // 2
    prev, sign0, sign1 = conv_tables()
    out = np.empty((nblk, length), dtype=np.uint8)
    # Chunk blocks so the survivor array stays small.
    step = max(1, (1 << 24) // max(1, length * CONV_STATES))
    for lo in range(0, nblk, step):
        hi = min(nblk, lo + step)
        out[lo:hi] = _viterbi_chunk(llrs[lo:hi], length, prev, sign0, sign1)
    return out


def _viterbi_chunk(llrs, length, prev, sign0, sign1):
    nblk = llrs.shape[0]
    l0 = llrs[:, 0::2]
    l1 = llrs[:, 1::2]
    metric = np.full((nblk, CONV_STATES), -1e30)
    metric[:, 0] = 0.0
    surv = np.empty((length, nblk, CONV_STATES), dtype=np.uint8)
    p0, p1 = prev[:, 0], prev[:, 1]
    s00, s01 = sign0[:, 0].astype(np.float64), sign0[:, 1].astype(np.float64)
    s10, s11 = sign1[:, 0].astype(np.float64), sign1[:, 1].astype(np.float64)
    for t in range(length):
        a = l0[:, t][:, None]
        b = l1[:, t][:, None]
        cand0 = metric[:, p0] + a * s00 + b * s10
        cand1 = metric[:, p1] + a * s01 + b * s11
        take = cand1 > cand0
        metric = np.where(take, cand1, cand0)
        surv[t] = take
    bits = np.empty((nblk, length), dtype=np.uint8)
    state = np.zeros(nblk, dtype=np.int64)
    rows = np.arange(nblk)
    for t in range(length - 1, -1, -1):
        bits[:, t] = state >> 5
        j = surv[t, rows, state]
        state = ((state & 31) << 1) | j
    return bits


def match_counts_batch(masks: np.ndarray, shifted: np.ndarray) -> np.ndarray:
    """Count tone-set hits for every (mask, candidate, shift) triple.

    masks is (B, N, P) uint8 membership; shifted is (C, D, N) precomputed
    channel indices (codeword plus shift, already reduced mod P). Returns
    (B, C, D) int32 counts.
    """
    nblk, nsym, _ = masks.shape
    if shifted.shape[2] != nsym:
        raise ValueError("codeword length mismatch")
    counts = np.zeros((nblk, shifted.shape[0], shifted.shape[1]), dtype=np.int32)
    for n in range(nsym):
        counts += masks[:, n, shifted[:, :, n]]
    return counts
