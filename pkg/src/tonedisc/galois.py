"""Prime-field arithmetic and the field transform behind the discovery codec.

Everything runs in GF(p) for a prime p below 2**16. Codewords come from an
N-point DFT-like transform whose kernel beta = alpha**((p-1)//n) has
multiplicative order exactly n, which requires n | p-1. Matrices are small
dense numpy int64 arrays; all arithmetic is exact (products stay far below
2**63 for p < 2**16).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_PRIME = 1 << 16


class ResourceLimitError(RuntimeError):
    """Raised when an exhaustive computation would exceed its size guard."""


def is_prime(n: int) -> bool:
    """Trial-division primality test, adequate for the p < 2**16 domain."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _distinct_prime_factors(n: int) -> list[int]:
    factors = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            factors.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        factors.append(n)
    return factors


def multiplicative_order(a: int, p: int) -> int:
    """Order of a in GF(p)*, by brute-force repeated multiplication."""
    if not 1 <= a < p:
        raise ValueError(f"need 1 <= a < p, got a={a} p={p}")
    x = a
    order = 1
    while x != 1:
        x = x * a % p
        order += 1
    return order


def find_primitive_root(p: int) -> int:
    """Smallest generator of GF(p)*.

    An element alpha generates the group iff alpha**((p-1)/q) != 1 for every
    prime q dividing p-1; candidates are scanned in increasing order so the
    result is the smallest primitive root.
    """
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if p == 2:
        return 1
    factors = _distinct_prime_factors(p - 1)
    for alpha in range(2, p):
        if all(pow(alpha, (p - 1) // q, p) != 1 for q in factors):
            return alpha
    raise AssertionError(f"no primitive root below p={p}")  # unreachable for prime p


@dataclass(frozen=True)
class PrimeField:
    """GF(p) with a chosen primitive root alpha.

    alpha must generate the full multiplicative group; the constructor
    verifies this so downstream transform kernels are guaranteed to have
    exact order.
    """

    p: int
    alpha: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.p >= MAX_PRIME:
            raise ValueError(f"p={self.p} exceeds supported bound {MAX_PRIME}")
        if self.p == 2:
            if self.alpha != 1:
                raise ValueError("GF(2)* is generated by 1 only")
            return
        if not 1 <= self.alpha < self.p:
            raise ValueError(f"alpha={self.alpha} outside GF({self.p})*")
        for q in _distinct_prime_factors(self.p - 1):
            if pow(self.alpha, (self.p - 1) // q, self.p) == 1:
                raise ValueError(f"alpha={self.alpha} is not primitive mod {self.p}")

    @classmethod
    def of(cls, p: int) -> "PrimeField":
        """Field with the smallest primitive root."""
        return cls(p, find_primitive_root(p))

    def _check(self, *vals: int):
        for v in vals:
            if not 0 <= v < self.p:
                raise ValueError(f"value {v} outside GF({self.p})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return a * b % self.p

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise ValueError("0 has no multiplicative inverse")
        return pow(a, self.p - 2, self.p)

    def pow(self, a: int, e: int) -> int:
        self._check(a)
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a, e, self.p)


@dataclass(frozen=True)
class GftPair:
    """Forward/inverse transform matrices over GF(p).

    z[r, c] = beta**(r*c) mod p and z_inv = n^-1 * beta**(-r*c) mod p, so
    z @ z_inv = I mod p, row 0 and column 0 of z are all ones, and z_inv
    maps the all-ones vector to the unit vector e0. Arrays are read-only.
    """

    field: PrimeField
    n: int
    beta: int
    z: np.ndarray
    z_inv: np.ndarray

    def forward(self, vec: np.ndarray) -> np.ndarray:
        vec = _as_field_vec(vec, self.n, self.field.p)
        return (self.z @ vec) % self.field.p

    def inverse(self, vec: np.ndarray) -> np.ndarray:
        vec = _as_field_vec(vec, self.n, self.field.p)
        return (self.z_inv @ vec) % self.field.p


def _as_field_vec(vec, n: int, p: int) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.int64)
    if arr.shape != (n,):
        raise ValueError(f"expected length-{n} vector, got shape {arr.shape}")
    if arr.min() < 0 or arr.max() >= p:
        raise ValueError(f"vector entries outside GF({p})")
    return arr


def make_gft(field: PrimeField, n: int) -> GftPair:
    """Build the length-n transform pair; requires n | p-1."""
    p = field.p
    if n < 1:
        raise ValueError(f"transform length must be positive, got {n}")
    if (p - 1) % n != 0:
        raise ValueError(f"n={n} does not divide p-1={p - 1}")
    beta = pow(field.alpha, (p - 1) // n, p)
    # beta has order exactly n, so exponents reduce mod n.
    pw = np.empty(n, dtype=np.int64)
    pw[0] = 1
    for k in range(1, n):
        pw[k] = pw[k - 1] * beta % p
    idx = np.arange(n, dtype=np.int64)
    ee = np.outer(idx, idx) % n
    z = pw[ee]
    n_inv = pow(n, p - 2, p)
    pw_neg = pw[(-idx) % n]
    z_inv = pw_neg[ee] * n_inv % p
    ident = (z @ z_inv) % p
    assert np.array_equal(ident, np.eye(n, dtype=np.int64)), "transform inverse check failed"
    z.setflags(write=False)
    z_inv.setflags(write=False)
    return GftPair(field=field, n=n, beta=beta, z=z, z_inv=z_inv)
