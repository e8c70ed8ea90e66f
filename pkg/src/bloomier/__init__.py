"""Bloomier filters: compact static key -> value maps with one-sided error.

Three constructions are provided:

* ``graph_filter`` — table over Z/mZ solved by back-substitution on an
  acyclic random graph; linear build time, optional in-place value updates.
* ``sparse_filter`` — space-optimal table over a prime field built from an
  incrementally rank-checked sparse linear system, with a verification
  wrapper restoring one-sided error.
* ``bucketed_filter`` — the sparse construction applied per hash bucket,
  trading a little space for near-linear total build time.

``codec`` serializes every filter kind bit-exactly and ``cli`` exposes the
build/query/fprate/bench commands.
"""

from .bucketed_filter import (BucketedFilter, BucketParams, bucket_count,
                              build_bucketed, query_bucketed)
from .codec import decode, encode, payload_bits, read_pairs_tsv, write_pairs_tsv
from .errors import (BuildError, FilterError, FormatError, InputError,
                     UnknownKeyError, UnsupportedSchemeError,
                     UnsupportedSizeError)
from .field import (FieldParams, ModArith, circulant_det,
                    count_sparse_matrices, cyclic_shift_span_dim,
                    factor_distinct, find_primitive_root, miller_rabin,
                    mod_arith, next_prime_at_least, setup_params)
from .graph_filter import (BuildGraph, GraphFilter, GraphParams,
                           MutableGraphFilter, back_substitute, build,
                           build_mutable, is_simple_acyclic)
from .hashing import HashBlock, HashSpec, derive_block, derive_seed, hash_key
from .sparse_filter import (EliminationState, SparseFilter, SparseParams,
                            SparseRow, VerifiedSparseFilter, assemble_row,
                            build_verified, create_table, try_append)

__version__ = "0.1.0"

__all__ = [
    "BucketedFilter", "BucketParams", "bucket_count", "build_bucketed",
    "query_bucketed", "decode", "encode", "payload_bits", "read_pairs_tsv",
    "write_pairs_tsv", "BuildError", "FilterError", "FormatError",
    "InputError", "UnknownKeyError", "UnsupportedSchemeError",
    "UnsupportedSizeError", "FieldParams", "ModArith", "circulant_det",
    "count_sparse_matrices", "cyclic_shift_span_dim", "factor_distinct",
    "find_primitive_root", "miller_rabin", "mod_arith", "next_prime_at_least",
    "setup_params", "BuildGraph", "GraphFilter", "GraphParams",
    "MutableGraphFilter", "back_substitute", "build", "build_mutable",
    "is_simple_acyclic", "HashBlock", "HashSpec", "derive_block",
    "derive_seed", "hash_key", "EliminationState", "SparseFilter",
    "SparseParams", "SparseRow", "VerifiedSparseFilter", "assemble_row",
    "build_verified", "create_table", "try_append",
]
