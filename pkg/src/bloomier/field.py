"""Prime-field machinery for the sparse filter scheme.

Covers modular arithmetic suites, primality testing, parameter setup (the
prime pair (p, q) with p a primitive root modulo q), and the small exact
oracles used by the test suite: circulant determinants, cyclic-shift span
dimension and exhaustive sparse-matrix counting.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BuildError, InputError, UnsupportedSizeError

MAX_PRIME = (1 << 63) - 1  # products of two residues must fit exact integers cheaply

# Witnesses proving primality for every n < 3.3e24 (covers the full u64 range).
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def exact_fraction(x) -> Fraction:
    """Interpret a user-supplied ratio exactly.

    Floats are read as the decimal literal they print as, so 0.05 means 1/20
    rather than its binary approximation; this keeps table sizing like
    ceil(n*(1+eps)) free of off-by-one surprises.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    if isinstance(x, str):
        return Fraction(x)
    raise InputError(f"cannot interpret {x!r} as a rational")


def _mr_witness(n: int, a: int, d: int, r: int) -> bool:
    """True if ``a`` witnesses that ``n`` is composite."""
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def _decompose(n: int) -> tuple[int, int]:
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    return d, r


def is_prime(n: int) -> bool:
    """Exact primality for n < 2^64 (fixed witness set)."""
    if n < 2:
        return False
    for b in _DETERMINISTIC_BASES:
        if n == b:
            return True
        if n % b == 0:
            return False
    d, r = _decompose(n)
    return not any(_mr_witness(n, a, d, r) for a in _DETERMINISTIC_BASES)


def miller_rabin(n: int, rounds: int = 40, rng: random.Random | None = None) -> bool:
    """Probabilistic primality: True means prime with error <= 4**-rounds.

    A False answer is always correct.  Witness bases come from ``rng`` so
    callers needing reproducibility can pass a seeded generator.
    """
    if n < 2:
        raise InputError(f"miller_rabin needs n >= 2, got {n}")
    if rounds < 1:
        raise InputError(f"rounds must be >= 1, got {rounds}")
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    if rng is None:
        rng = random.Random()
    d, r = _decompose(n)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        if _mr_witness(n, a, d, r):
            return False
    return True


def next_prime_at_least(x: int) -> int:
    """Smallest prime >= x (exact)."""
    if x < 2:
        raise InputError(f"next_prime_at_least needs x >= 2, got {x}")
    if x == 2:
        return 2
    n = x | 1  # skip even candidates
    while not is_prime(n):
        n += 2
    return n


def factor_distinct(n: int) -> list[int]:
    """Distinct prime factors of n by trial division; n must be <= 2^40."""
    if n < 1:
        raise InputError(f"factor_distinct needs n >= 1, got {n}")
    if n > 1 << 40:
        raise UnsupportedSizeError(f"factor_distinct supports n <= 2^40, got {n}")
    factors = []
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            factors.append(d)
            while m % d == 0:
                m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        factors.append(m)
    return factors


def has_full_order(a: int, q: int, factors: Sequence[int]) -> bool:
    """True iff a mod q generates the full multiplicative group of F_q."""
    a %= q
    if a == 0:
        return False
    return all(pow(a, (q - 1) // f, q) != 1 for f in factors)


def find_primitive_root(q: int, factors: Sequence[int],
                        rng: random.Random | None = None) -> int:
    """Random primitive root modulo prime q; factors are the primes of q-1."""
    if q == 2:
        return 1
    if rng is None:
        rng = random.Random(q)
    while True:
        g = rng.randrange(2, q)
        if has_full_order(g, q, factors):
            return g


@dataclass(frozen=True)
class FieldParams:
    """The prime pair sizing a sparse filter: q table slots over the field F_p."""

    q: int
    p: int
    factors_q_minus_1: tuple[int, ...]
    m_bits: int

    def __post_init__(self):
        if not is_prime(self.q) or not is_prime(self.p):
            raise InputError("FieldParams requires prime p and q")
        if not has_full_order(self.p, self.q, self.factors_q_minus_1):
            raise InputError(f"p={self.p} is not a primitive root modulo q={self.q}")


def setup_params(n: int, m_bits: int, eps, seed: int, mr_rounds: int = 40,
                 max_samples: int = 200_000) -> FieldParams:
    """Pick primes (q, p): q first prime >= ceil(n(1+eps)), p an m_bits-bit
    prime that is a primitive root modulo q.

    Deterministic given ``seed``.  n = 0 is allowed and yields the smallest
    table (q = 2).
    """
    if n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    if not 2 <= m_bits <= 62:
        raise InputError(f"m_bits must be in [2, 62], got {m_bits}")
    eps = exact_fraction(eps)
    if eps <= 0:
        raise InputError(f"eps must be > 0, got {eps}")
    q = next_prime_at_least(max(2, math.ceil(n * (1 + eps))))
    if (1 << m_bits) <= q:
        raise InputError(f"2^m_bits must exceed q={q}, got m_bits={m_bits}")
    factors = tuple(factor_distinct(q - 1)) if q > 2 else ()
    rng = random.Random(seed)
    lo, hi = 1 << (m_bits - 1), 1 << m_bits
    for _ in range(max_samples):
        p = rng.randrange(lo, hi)
        if not has_full_order(p, q, factors):
            continue
        if miller_rabin(p, mr_rounds, rng):
            return FieldParams(q=q, p=p, factors_q_minus_1=factors, m_bits=m_bits)
    raise BuildError(f"no {m_bits}-bit prime with full order mod {q} found "
                     f"in {max_samples} samples", attempts=max_samples)


class ModArith:
    """Arithmetic suite over F_p for a fixed prime p < 2^63."""

    def __init__(self, p: int):
        if p > MAX_PRIME or not is_prime(p):
            raise InputError(f"modulus must be a prime < 2^63, got {p}")
        self.p = p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inverse(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of 0 in a prime field")
        return pow(a, -1, self.p)

    def pow(self, a: int, e: int) -> int:
        return pow(a % self.p, e, self.p)


def mod_arith(p: int) -> ModArith:
    """Arithmetic suite (add, sub, mul, inverse, pow) over F_p."""
    return ModArith(p)


def _eliminate(rows: list[list[int]], p: int, want_det: bool) -> tuple[int, int]:
    """Row-reduce in place; returns (rank, det).  det is meaningful only for
    square matrices with ``want_det`` set (0 whenever rank is deficient)."""
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    det = 1 % p if (want_det and nrows == ncols) else 0
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, nrows) if rows[r][col]), None)
        if piv is None:
            det = 0
            continue
        if piv != rank:
            rows[rank], rows[piv] = rows[piv], rows[rank]
            det = (-det) % p
        pivrow = rows[rank]
        det = det * pivrow[col] % p
        inv = pow(pivrow[col], -1, p)
        for r in range(rank + 1, nrows):
            f = rows[r][col]
            if f:
                f = f * inv % p
                rows[r] = [(x - f * y) % p for x, y in zip(rows[r], pivrow)]
        rank += 1
    return rank, det


def circulant_det(w: Sequence[int], p: int) -> int:
    """Determinant over F_p of the circulant matrix whose first row is w."""
    q = len(w)
    if q < 1:
        raise InputError("circulant_det needs a nonempty vector")
    rows = [[w[(j - i) % q] % p for j in range(q)] for i in range(q)]
    _, det = _eliminate(rows, p, want_det=True)
    return det


def cyclic_shift_span_dim(w: Sequence[int], p: int) -> int:
    """Dimension over F_p of the span of all cyclic shifts of w."""
    q = len(w)
    if q < 1:
        raise InputError("cyclic_shift_span_dim needs a nonempty vector")
    rows = [[w[(j - i) % q] % p for j in range(q)] for i in range(q)]
    rank, _ = _eliminate(rows, p, want_det=False)
    return rank


_ENUM_BUDGET = 1 << 24


@lru_cache(maxsize=None)
def _sparse_column_histogram(n: int, r: int, p: int) -> tuple[int, ...]:
    """hist[s] = number of n x r matrices over F_p whose every column has
    exactly s nonzero entries, by exhaustive enumeration of all p^(n*r)
    matrices (numpy-chunked)."""
    total = p ** (n * r)
    hist = [0] * (n + 1)
    chunk = 1 << 18
    for start in range(0, total, chunk):
        work = np.arange(start, min(start + chunk, total), dtype=np.int32)
        counts = np.zeros((work.size, r), dtype=np.int16)
        for digit in range(n * r):
            counts[:, digit // n] += work % p != 0
            work //= p
        uniform = np.all(counts == counts[:, :1], axis=1)
        vals, freq = np.unique(counts[uniform, 0], return_counts=True)
        for v, f in zip(vals, freq):
            hist[int(v)] += int(f)
    return tuple(hist)


def count_sparse_matrices(n: int, r: int, s: int, p: int) -> int:
    """Exhaustive count of n x r matrices over F_p with exactly s nonzeros
    per column.  Budget: p^(n*r) <= 2^24."""
    if n < 1 or r < 1 or not 0 <= s <= n:
        raise InputError(f"need n,r >= 1 and 0 <= s <= n, got n={n} r={r} s={s}")
    if not is_prime(p):
        raise InputError(f"p must be prime, got {p}")
    if p ** (n * r) > _ENUM_BUDGET:
        raise UnsupportedSizeError(f"p^(n*r) = {p}^{n * r} exceeds the 2^24 "
                                   "enumeration budget")
    return _sparse_column_histogram(n, r, p)[s]
