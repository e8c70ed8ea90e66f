"""Space-optimal Bloomier filter backed by a sparse linear system over F_p.

Each key contributes one equation

    h0(x) + sum_{t=1..s} h_t(x) * g[h_{t+s}(x)]  ==  f(x)   (mod p)

whose s-sparse row is drawn from a block of 2s hash functions.  Rows are fed
into an incrementally maintained reduced row echelon form; a row that fails
to grow the rank is retried with the next hash block.  Once the system has
full rank the table g falls out of the recorded elimination.

Queries probe blocks in order and return the first plausible value (< 2^k),
so an unverified filter can err on stored keys with probability about
2^k / p per earlier block; build_verified repeats the construction until an
exhaustive membership check passes, which restores one-sided error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BuildError, InputError
from .field import FieldParams, exact_fraction, setup_params
from .hashing import (H0_INDEX, LABEL_FIELD, LABEL_REBUILD, HashBlock,
                      HashSpec, derive_block, derive_seed)
from .keys import as_bytes, normalize_pairs

# Largest modulus whose residue products fit in int64; beyond this the
# elimination falls back to exact object arithmetic.
_INT64_SAFE_MODULUS = 3_037_000_499


@dataclass(frozen=True)
class SparseParams:
    """Build parameters for the sparse scheme.

    s >= 2 nonzeros per row (the s = 1 analysis breaks down), eps the table
    slack (exact decimal), m_bits the field size in bits, k the value width.
    """

    k: int
    s: int = 2
    eps: Fraction = Fraction(1, 20)
    m_bits: int = 31
    max_blocks: int = 64
    max_rebuilds: int = 16

    def __post_init__(self):
        object.__setattr__(self, "eps", exact_fraction(self.eps))
        if self.s < 2:
            raise InputError(f"s must be >= 2, got {self.s}")
        if self.eps <= 0:
            raise InputError(f"eps must be > 0, got {self.eps}")
        if self.k < 1 or self.m_bits < self.k:
            raise InputError(f"need 1 <= k <= m_bits, got k={self.k} "
                             f"m_bits={self.m_bits}")
        if self.max_blocks < 1 or self.max_rebuilds < 1:
            raise InputError("max_blocks and max_rebuilds must be >= 1")


@dataclass(frozen=True)
class SparseRow:
    """One assembled equation row: distinct columns with nonzero coefficients."""

    key_id: bytes
    block_index: int
    entries: tuple[tuple[int, int], ...]  # (column, coefficient), column-sorted


def row_entries(coeffs, cols) -> tuple[tuple[int, int], ...]:
    """Apply the row-assembly rule: writes happen in hash order, so a later
    coefficient overwrites an earlier one at the same column (a later zero
    clears the slot); zero coefficients never survive."""
    slots: dict[int, int] = {}
    for a, c in zip(coeffs, cols):
        slots[c] = a
    return tuple(sorted((c, a) for c, a in slots.items() if a != 0))


def assemble_row(key, block: HashBlock, q: int, p: int) -> SparseRow:
    """Evaluate a hash block on a key, giving its candidate equation row."""
    kb = as_bytes(key)
    s = block.s
    if len(block.specs) != 2 * s or block.specs[0].range != p or block.specs[s].range != q:
        raise InputError("hash block ranges do not match (p, q)")
    coeffs = [block.specs[t](kb) for t in range(s)]
    cols = [block.specs[s + t](kb) for t in range(s)]
    return SparseRow(kb, block.block_index, row_entries(coeffs, cols))


class EliminationState:
    """Incrementally maintained RREF of the accepted rows over F_p.

    Columns are kept physically permuted so that pivot columns occupy the
    leading positions; stored rows are zero there (their own unit pivot is
    implicit), which makes reducing an s-sparse row O(s * (q - rank)) and
    keeps per-acceptance updates shrinking as the rank grows.  Each row also
    carries the row operations applied to its right-hand side, so the solve
    is a plain read-off once the rank is full.
    """

    def __init__(self, q: int, p: int, capacity: int = 16):
        self.q = q
        self.p = p
        self.rank = 0
        self._dtype = np.int64 if p <= _INT64_SAFE_MODULUS else object
        cap = max(1, min(capacity, q))
        self._rows = np.zeros((cap, q), dtype=self._dtype)
        self._rhs = [0] * cap
        self._phys_of = np.arange(q)      # logical column -> physical slot
        self._log_of = np.arange(q)       # physical slot -> logical column
        self._pivot_cols: list[int] = []  # logical pivot column per row

    @property
    def pivot_columns(self) -> list[int]:
        return list(self._pivot_cols)

    def _reduce(self, row: SparseRow, target: int):
        """Reduce a sparse row against the state; returns (dense, rhs)."""
        p, rank = self.p, self.rank
        d = np.zeros(self.q, dtype=self._dtype)
        t = target % p
        deferred = []
        for c, a in row.entries:
            pp = int(self._phys_of[c])
            if pp < rank:
                deferred.append((pp, a))
            else:
                d[pp] = a % p
        for pp, a in deferred:
            # Stored rows are zero on every pivot slot, so these updates
            # never reintroduce pivot-column entries.
            d[rank:] = (d[rank:] - a * self._rows[pp, rank:]) % p
            t = (t - a * self._rhs[pp]) % p
        return d, t

    def would_accept(self, row: SparseRow) -> bool:
        """Rank test without mutating the state."""
        d, _ = self._reduce(row, 0)
        return bool(np.any(d[self.rank:]))

    def try_append(self, row: SparseRow, target: int = 0) -> bool:
        """Reduce ``row``; install it as a new pivot if independent.

        Returns True (accepted, rank grew by one) or False (state unchanged).
        ``target`` is the equation's right-hand side in F_p.
        """
        p, rank = self.p, self.rank
        d, t = self._reduce(row, target)
        support = np.nonzero(d[rank:])[0]
        if support.size == 0:
            return False
        cand = support + rank
        cstar = int(cand[int(np.argmin(self._log_of[cand]))])  # lowest logical column
        inv = pow(int(d[cstar]), -1, p)
        d[rank:] = (d[rank:] * inv) % p
        t = t * inv % p
        if rank:
            col = self._rows[:rank, cstar].copy()
            busy = np.nonzero(col)[0]
            if busy.size:
                self._rows[busy, rank:] = (
                    self._rows[busy, rank:] - np.outer(col[busy], d[rank:])) % p
                for r in busy:
                    self._rhs[r] = (self._rhs[r] - int(col[r]) * t) % p
        if cstar != rank:
            self._rows[:rank, [cstar, rank]] = self._rows[:rank, [rank, cstar]]
            d[[cstar, rank]] = d[[rank, cstar]]
            la, lb = int(self._log_of[cstar]), int(self._log_of[rank])
            self._log_of[cstar], self._log_of[rank] = lb, la
            self._phys_of[la], self._phys_of[lb] = rank, cstar
        d[rank] = 0  # own unit pivot is implicit
        if rank == len(self._rows):
            grow = np.zeros((len(self._rows), self.q), dtype=self._dtype)
            self._rows = np.concatenate([self._rows, grow])
            self._rhs.extend([0] * len(self._rhs))
        self._rows[rank] = d
        self._rhs[rank] = t
        self._pivot_cols.append(int(self._log_of[rank]))
        self.rank = rank + 1
        return True

    def solve(self) -> list[int]:
        """Table g with free variables set to 0: g[pivot_col r] = rhs[r]."""
        g = [0] * self.q
        for r in range(self.rank):
            g[self._pivot_cols[r]] = int(self._rhs[r])
        return g


def try_append(state: EliminationState, row: SparseRow, target: int = 0) -> bool:
    """Module-level alias for EliminationState.try_append."""
    return state.try_append(row, target)


class SparseFilter:
    """Query structure for the sparse scheme (possibly two-sided until verified)."""

    scheme_id = 2

    def __init__(self, g: list[int], field: FieldParams, master_seed: int,
                 r: int, k: int, s: int, n: int):
        self.g = g
        self.field = field
        self.master_seed = master_seed
        self.r = r
        self.k = k
        self.s = s
        self.n = n
        self._h0 = HashSpec(master_seed, H0_INDEX, field.p)
        self._blocks = [derive_block(master_seed, j, s, field.p, field.q)
                        for j in range(r)]

    @property
    def table_len(self) -> int:
        return self.field.q

    def query(self, key) -> int | None:
        """Probe blocks in order; first residue below 2^k wins, else None."""
        kb = as_bytes(key)
        p = self.field.p
        g = self.g
        limit = 1 << self.k
        base = self._h0(kb)
        for block in self._blocks:
            y = base
            for c, a in assemble_row(kb, block, self.field.q, p).entries:
                y += a * g[c]
            y %= p
            if y < limit:
                return y
        return None


def create_table(pairs, params: SparseParams, field: FieldParams,
                 master_seed: int) -> SparseFilter:
    """Build a sparse filter: assemble rows per key, retrying with fresh hash
    blocks until every row grows the rank, then solve for g."""
    keys, values = normalize_pairs(pairs, params.k)
    n = len(keys)
    p, q = field.p, field.q
    if (1 << params.k) > p:
        raise InputError(f"2^k must be <= p, got k={params.k} p={p}")
    if n * (1 + params.eps) > q:
        raise InputError(f"table too small: n={n} with eps={params.eps} "
                         f"needs q >= {math.ceil(n * (1 + params.eps))}, got {q}")
    h0 = HashSpec(master_seed, H0_INDEX, p)
    state = EliminationState(q, p, capacity=n)
    blocks: list[HashBlock] = []
    for i, (kb, value) in enumerate(zip(keys, values)):
        target = (value - h0(kb)) % p
        for j in range(params.max_blocks):
            if j == len(blocks):
                blocks.append(derive_block(master_seed, j, params.s, p, q))
            if state.try_append(assemble_row(kb, blocks[j], q, p), target):
                break
        else:
            raise BuildError(
                f"key {i} of {n} found no independent row in "
                f"{params.max_blocks} blocks (rank {state.rank}, q {q})",
                attempts=params.max_blocks)
    return SparseFilter(state.solve(), field, master_seed, len(blocks),
                        params.k, params.s, n)


class VerifiedSparseFilter:
    """Sparse filter whose stored keys are certified to answer correctly.

    ``rebuilds`` counts build iterations, including the successful one.
    """

    scheme_id = 2

    def __init__(self, filter: SparseFilter, rebuilds: int):
        self.filter = filter
        self.rebuilds = rebuilds

    def __getattr__(self, name):
        return getattr(self.filter, name)

    def query(self, key) -> int | None:
        return self.filter.query(key)


def build_verified(pairs, params: SparseParams, master_seed: int,
                   field: FieldParams | None = None) -> VerifiedSparseFilter:
    """Repeat create_table with fresh seeds until an exhaustive check of all
    stored keys passes, restoring one-sided error."""
    pairs = [(as_bytes(k), v) for k, v in pairs]
    n = len(pairs)
    if n:
        need = params.k + (n - 1).bit_length() + 1
        if params.m_bits < need:
            raise InputError(f"m_bits={params.m_bits} too small for verified "
                             f"build of n={n}: need >= k + ceil(log2 n) + 1 = {need}")
    if field is None:
        field = setup_params(n, params.m_bits, params.eps,
                             derive_seed(master_seed, LABEL_FIELD))
    for t in range(params.max_rebuilds):
        filt = create_table(pairs, params, field,
                            derive_seed(master_seed, LABEL_REBUILD, t))
        if all(filt.query(kb) == v for kb, v in pairs):
            return VerifiedSparseFilter(filt, rebuilds=t + 1)
    raise BuildError(f"verification failed in {params.max_rebuilds} rebuilds",
                     attempts=params.max_rebuilds)


def query(filt, key) -> int | None:
    """Module-level alias for SparseFilter.query."""
    return filt.query(key)
