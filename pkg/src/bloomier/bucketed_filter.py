"""Bucketed sparse filter: hash keys into O(n / log n) buckets and build an
independent verified sparse filter per bucket.

The bucket hash is redrawn until every bucket is small (at most
(1 + delta) * n / b keys), which keeps each inner build polylogarithmic.  All
buckets share a single (p, q) field sized for the largest bucket, so one
parameter search covers the whole structure at a small space premium on the
underfull buckets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BuildError, InputError
from .field import FieldParams, exact_fraction, setup_params
from .hashing import (LABEL_BUCKET_CHILD, LABEL_BUCKET_HASH, LABEL_FIELD,
                      HashSpec, derive_seed)
from .keys import as_bytes, normalize_pairs
from .sparse_filter import SparseParams, VerifiedSparseFilter, build_verified

_CHERNOFF_FLOOR = 2 * math.e - 1  # the concentration bound needs delta above this


@dataclass(frozen=True)
class BucketParams:
    """Bucketing knobs: b = ceil(n / (c_bucket * log2 n)) buckets, bucket
    sizes accepted below (1 + delta) * n / b."""

    inner: SparseParams
    c_bucket: Fraction = Fraction(4)
    delta: Fraction = Fraction(5)
    max_bucket_tries: int = 16

    def __post_init__(self):
        object.__setattr__(self, "c_bucket", exact_fraction(self.c_bucket))
        object.__setattr__(self, "delta", exact_fraction(self.delta))
        if self.c_bucket <= 1:
            raise InputError(f"c_bucket must be > 1, got {self.c_bucket}")
        if float(self.delta) <= _CHERNOFF_FLOOR:
            raise InputError(f"delta must exceed 2e-1 ~= {_CHERNOFF_FLOOR:.3f}, "
                             f"got {self.delta}")
        if self.max_bucket_tries < 1:
            raise InputError("max_bucket_tries must be >= 1")


def bucket_count(n: int, c_bucket: Fraction) -> int:
    """Number of buckets for n keys; 1 for degenerate n < 2."""
    if n < 2:
        return 1
    return max(1, math.ceil(n / (c_bucket * Fraction(math.log2(n)))))


def find_bucket_assignment(keys: list[bytes], b: int, bound: Fraction,
                           bucket_seed: int, max_tries: int):
    """Redraw the bucket hash until every bucket holds at most ``bound`` keys.

    Returns (attempt_index, assignment, histogram); attempts are 0-based.
    """
    for attempt in range(max_tries):
        spec = HashSpec(bucket_seed, attempt, b)
        assignment = [spec(kb) for kb in keys]
        hist = [0] * b
        for i in assignment:
            hist[i] += 1
        if max(hist, default=0) <= bound:
            return attempt, assignment, hist
    raise BuildError(f"no bucket hash with all buckets <= {float(bound):.1f} "
                     f"keys in {max_tries} tries", attempts=max_tries)


class BucketedFilter:
    """Query structure: one routing hash, then the chosen bucket's filter."""

    scheme_id = 3

    def __init__(self, filters: list[VerifiedSparseFilter], field: FieldParams,
                 master_seed: int, bucket_attempt: int, n: int,
                 histogram: list[int] | None = None):
        self.filters = filters
        self.field = field
        self.master_seed = master_seed
        self.bucket_attempt = bucket_attempt
        self.n = n
        self.b = len(filters)
        self.histogram = histogram if histogram is not None else [f.n for f in filters]
        self._route = HashSpec(derive_seed(master_seed, LABEL_BUCKET_HASH),
                               bucket_attempt, self.b)

    @property
    def max_bucket_size(self) -> int:
        return max(self.histogram, default=0)

    def bucket_of(self, key) -> int:
        return self._route(as_bytes(key))

    def query(self, key) -> int | None:
        kb = as_bytes(key)
        return self.filters[self._route(kb)].query(kb)


def build_bucketed(pairs, params: BucketParams, master_seed: int) -> BucketedFilter:
    """Partition the corpus by a redrawn-until-balanced hash and build each
    bucket independently and deterministically from (master_seed, bucket)."""
    inner = params.inner
    keys, values = normalize_pairs(pairs, inner.k)
    n = len(keys)
    b = bucket_count(n, params.c_bucket)
    bound = (1 + params.delta) * Fraction(n, b) if n else Fraction(0)
    attempt, assignment, hist = find_bucket_assignment(
        keys, b, bound, derive_seed(master_seed, LABEL_BUCKET_HASH),
        params.max_bucket_tries)
    field = setup_params(max(hist, default=0), inner.m_bits, inner.eps,
                         derive_seed(master_seed, LABEL_FIELD))
    grouped: list[list[tuple[bytes, int]]] = [[] for _ in range(b)]
    for kb, value, i in zip(keys, values, assignment):
        grouped[i].append((kb, value))
    filters = []
    for i in range(b):
        try:
            filters.append(build_verified(
                grouped[i], inner, derive_seed(master_seed, LABEL_BUCKET_CHILD, i),
                field=field))
        except BuildError as exc:
            raise BuildError(f"bucket {i} failed: {exc}",
                             attempts=exc.attempts, bucket=i) from exc
    return BucketedFilter(filters, field, master_seed, attempt, n, hist)


def query_bucketed(filt: BucketedFilter, key) -> int | None:
    """Module-level alias for BucketedFilter.query."""
    return filt.query(key)
