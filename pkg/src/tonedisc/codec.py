"""Discovery-signal codec: device identifiers (TDIDs) <-> tone codewords.

A TDID m in [0, p**k) is split into k base-p digits which occupy transform
slots 1..k of a length-n message vector; slot 0 and the tail stay zero. The
forward transform of that vector gives the codeword: one channel index per
symbol, tones[i] = sum_j u_j * beta**(i*j) mod p. Because slot 0 is zero, a
constant channel offset d applied to every tone lands entirely in slot 0 of
the inverse transform and nowhere else, which is how a receiver separates
genuine codewords, frequency-shifted codewords, and junk without equalizing.

Any two distinct codewords agree in at most k-1 symbol positions (maximum
distance separable), so with theta matching symbols required a stray
codeword is never reported at zero shift, and erasures/errors eat into a
fixed budget: a transmitted codeword stays uniquely identifiable as long as
2*errors + erasures <= n - k.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels
from .galois import GftPair, PrimeField, ResourceLimitError, make_gft

CENSUS_GUARD = 10**7
DISTANCE_GUARD = 10**4


class Message(NamedTuple):
    tdid: int
    symbols: tuple[int, ...]  # base-p digits, least significant first


@dataclass(frozen=True)
class CodecParams:
    """Code geometry: transform pair, message length k, report threshold theta,
    and the +-delta_window of channel offsets decode_multi scans."""

    gft: GftPair
    k: int = 1
    theta: int = 6
    delta_window: int = 2

    def __post_init__(self):
        n, p = self.gft.n, self.gft.field.p
        # Slot 0 is structurally zero, so at most n-1 message slots exist.
        if not 1 <= self.k <= n - 1:
            raise ValueError(f"need 1 <= k <= n-1, got k={self.k} n={n}")
        if not 1 <= self.theta <= n:
            raise ValueError(f"need 1 <= theta <= n, got {self.theta}")
        if not 0 <= self.delta_window <= (p - 1) // 2:
            raise ValueError(f"delta_window {self.delta_window} outside [0, (p-1)/2]")

    @property
    def p(self) -> int:
        return self.gft.field.p

    @property
    def n(self) -> int:
        return self.gft.n

    @property
    def field(self) -> PrimeField:
        return self.gft.field

    @property
    def num_tdids(self) -> int:
        return self.p**self.k


def default_theta(n: int) -> int:
    return (n + 2) // 2  # ceil((n+1)/2)


def make_params(p: int = 199, n: int = 11, k: int = 1, theta: int | None = None,
                delta_window: int = 2) -> CodecParams:
    """Convenience constructor from plain integers."""
    gft = make_gft(PrimeField.of(p), n)
    return CodecParams(gft=gft, k=k,
                       theta=default_theta(n) if theta is None else theta,
                       delta_window=delta_window)


def tdid_digits(m: int, base: int, k: int) -> tuple[int, ...]:
    """k base-`base` digits of m, least significant first."""
    if m < 0 or m >= base**k:
        raise ValueError(f"tdid {m} outside [0, {base}**{k})")
    digits = []
    for _ in range(k):
        digits.append(m % base)
        m //= base
    return tuple(digits)


def digits_to_tdid(digits: Sequence[int], base: int) -> int:
    m = 0
    for d in reversed(digits):
        if not 0 <= d < base:
            raise ValueError(f"digit {d} outside [0, {base})")
        m = m * base + d
    return m


def tdid_to_symbols(m: int, params: CodecParams) -> Message:
    return Message(m, tdid_digits(m, params.p, params.k))


def encode(msg: Message | int, params: CodecParams) -> tuple[int, ...]:
    """Codeword of a message: one channel index in [0, p) per symbol."""
    if isinstance(msg, int):
        msg = tdid_to_symbols(msg, params)
    vec = np.zeros(params.n, dtype=np.int64)
    vec[1:params.k + 1] = msg.symbols
    return tuple(int(t) for t in params.gft.forward(vec))


def codebook(params: CodecParams, candidates: np.ndarray | None = None) -> np.ndarray:
    """Codewords of all candidate TDIDs, (C, n) int64, vectorized encode."""
    p, k = params.p, params.k
    if candidates is None:
        candidates = np.arange(params.num_tdids, dtype=np.int64)
    else:
        candidates = np.asarray(candidates, dtype=np.int64)
        if candidates.size and (candidates.min() < 0 or candidates.max() >= params.num_tdids):
            raise ValueError("candidate tdid out of range")
    digits = np.empty((candidates.size, k), dtype=np.int64)
    rem = candidates.copy()
    for j in range(k):
        digits[:, j] = rem % p
        rem //= p
    basis = params.gft.z[:, 1:k + 1]  # (n, k)
    return (digits @ basis.T) % p


@dataclass(frozen=True)
class Valid:
    message: Message


@dataclass(frozen=True)
class Shifted:
    message: Message
    delta: int


@dataclass(frozen=True)
class Invalid:
    pass


INVALID = Invalid()
Classification = Valid | Shifted | Invalid


def signed_residue(w0: int, p: int) -> int:
    """Representative of w0 in (-(p-1)/2, ..., (p-1)/2]."""
    return w0 if w0 <= p // 2 else w0 - p


def classify(tones: Sequence[int], params: CodecParams) -> Classification:
    """Sort a complete tone sequence into Valid / Shifted / Invalid.

    A constant offset d on all tones only moves slot 0 of the inverse
    transform (the transform of the all-ones vector is e0), so one inverse
    suffices: zero tail with zero slot 0 is Valid; zero tail with nonzero
    slot 0 whose signed residue fits the window is Shifted by that residue.
    """
    w = params.gft.inverse(np.asarray(tones, dtype=np.int64))
    if np.any(w[params.k + 1:]):
        return INVALID
    symbols = tuple(int(x) for x in w[1:params.k + 1])
    msg = Message(digits_to_tdid(symbols, params.p), symbols)
    if w[0] == 0:
        return Valid(msg)
    delta = signed_residue(int(w[0]), params.p)
    if abs(delta) <= params.delta_window:
        return Shifted(msg, delta)
    return INVALID


class DecodeEntry(NamedTuple):
    tdid: int
    match_count: int
    delta: int


@dataclass(frozen=True)
class DecodeResult:
    entries: tuple[DecodeEntry, ...]

    @property
    def tdids(self) -> frozenset[int]:
        return frozenset(e.tdid for e in self.entries)


def delta_scan_order(window: int) -> np.ndarray:
    """Shift candidates ordered by the reporting tie-break: |d| asc, negative first."""
    order = [0]
    for d in range(1, window + 1):
        order += [-d, d]
    return np.asarray(order, dtype=np.int64)


def tone_sets_to_mask(tone_sets: Sequence[Iterable[int]], n: int, p: int) -> np.ndarray:
    mask = np.zeros((n, p), dtype=np.uint8)
    if len(tone_sets) != n:
        raise ValueError(f"expected {n} tone sets, got {len(tone_sets)}")
    for i, chans in enumerate(tone_sets):
        for c in chans:
            if not 0 <= c < p:
                raise ValueError(f"channel {c} outside [0, {p})")
            mask[i, c] = 1
    return mask


def decode_multi(tone_sets: Sequence[Iterable[int]], params: CodecParams,
                 candidates: np.ndarray | None = None) -> DecodeResult:
    """Report every candidate TDID matching at least theta observed tones.

    For each candidate the scan tries every shift d in the window and keeps
    the best match count (ties: smallest |d|, negative before positive).
    Channel arithmetic wraps mod p. Entries come back sorted by TDID.
    """
    if candidates is None:
        cand = np.arange(params.num_tdids, dtype=np.int64)
    else:
        cand = np.unique(np.asarray(candidates, dtype=np.int64))
    mask = tone_sets_to_mask(tone_sets, params.n, params.p)
    book = codebook(params, cand)
    deltas = delta_scan_order(params.delta_window)
    shifted = kernels.shifted_indices(book, deltas, params.p)
    counts = kernels.match_counts_batch(mask[None], shifted)[0]  # (C, D)
    best_j = np.argmax(counts, axis=1)  # first max follows the delta order
    best = counts[np.arange(cand.size), best_j]
    entries = tuple(
        DecodeEntry(int(cand[i]), int(best[i]), int(deltas[best_j[i]]))
        for i in np.nonzero(best >= params.theta)[0]
    )
    return DecodeResult(entries=entries)


def capability_ok(n: int, k: int, num_errors: int, num_erasures: int) -> bool:
    """Whether an error/erasure workload fits the code's correction budget."""
    if num_errors < 0 or num_erasures < 0:
        raise ValueError("error/erasure counts must be nonnegative")
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got k={k} n={n}")
    return 2 * num_errors + num_erasures <= n - k


def ambiguity_census(codewords: Sequence[Sequence[int]], params: CodecParams) -> tuple[int, int]:
    """Count distinct valid tone sequences among all per-symbol choices.

    Given g overlapping codewords, a receiver hears up to g tones per symbol;
    this enumerates all g**n ways of picking one tone per symbol and counts
    how many distinct sequences classify as Valid. Guarded at g**n <= 1e7.
    """
    g = len(codewords)
    arr = np.asarray(codewords, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != params.n:
        raise ValueError("codewords must be (g, n)")
    if len({tuple(row) for row in arr.tolist()}) != g:
        raise ValueError("codewords must be distinct")
    for row in arr:
        if not isinstance(classify(row, params), Valid):
            raise ValueError("census input contains a non-valid codeword")
    total = g**params.n
    if total > CENSUS_GUARD:
        raise ResourceLimitError(f"census size {total} exceeds guard {CENSUS_GUARD}")
    zt = params.gft.z_inv.T
    p = params.p
    valid: set[tuple[int, ...]] = set()
    chunk = 1 << 16
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        digits = np.empty((idx.size, params.n), dtype=np.int64)
        rem = idx.copy()
        for s in range(params.n):
            digits[:, s] = rem % g
            rem //= g
        seqs = arr[digits, np.arange(params.n)]
        w = (seqs @ zt) % p
        ok = (w[:, 0] == 0) & ~np.any(w[:, params.k + 1:], axis=1)
        for row in seqs[ok]:
            valid.add(tuple(int(x) for x in row))
    return len(valid), total


def min_distance(params: CodecParams) -> int:
    """Exhaustive minimum Hamming distance over all p**k codewords.

    Equals n - k + 1 (maximum distance separable). Guarded at p**k <= 1e4.
    """
    if params.num_tdids > DISTANCE_GUARD:
        raise ResourceLimitError(
            f"codebook size {params.num_tdids} exceeds guard {DISTANCE_GUARD}")
    book = codebook(params)
    best = params.n
    for i in range(book.shape[0] - 1):
        d = (book[i + 1:] != book[i]).sum(axis=1).min()
        best = min(best, int(d))
    return best
