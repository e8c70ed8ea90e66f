"""Seeded hash-function family used by every filter scheme.

Each function of the family is identified by ``(master_seed, function_index)``
and maps arbitrary byte-string keys onto ``{0 .. range-1}``.  The realization
is keyed blake2b (128-bit key, 64-bit digest) followed by multiply-shift range
reduction, which keeps outputs unbiased for ranges that are not powers of two.
Everything here is a pure function of its inputs, so results are reproducible
across processes and platforms.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from hashlib import blake2b

from .errors import InputError

_MASK64 = 0xFFFF_FFFF_FFFF_FFFF
_MASK32 = 0xFFFF_FFFF


def _as_bytes(key) -> bytes:
    """Normalize a key to bytes: str is UTF-8, int is little-endian 8 bytes."""
    if isinstance(key, bytes):
        return key
    if isinstance(key, str):
        return key.encode("utf-8")
    if isinstance(key, int):
        return struct.pack("<Q", key & _MASK64)
    raise InputError(f"unhashable key type: {type(key).__name__}")


@dataclass(frozen=True)
class HashSpec:
    """One member of the hash family: maps keys to ``[0, range)``."""

    master_seed: int
    function_index: int
    range: int
    _template: blake2b = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.range < 1:
            raise InputError(f"hash range must be >= 1, got {self.range}")
        key = struct.pack("<QQ", self.master_seed & _MASK64,
                          self.function_index & _MASK32)
        object.__setattr__(self, "_template", blake2b(key=key, digest_size=8))

    def __call__(self, key) -> int:
        h = self._template.copy()
        h.update(_as_bytes(key))
        return (int.from_bytes(h.digest(), "little") * self.range) >> 64


def hash_key(spec: HashSpec, key) -> int:
    """Evaluate ``spec`` on ``key``; deterministic, uniform over [0, spec.range)."""
    return spec(key)


@dataclass(frozen=True)
class HashBlock:
    """A block of 2s hash functions generating one candidate sparse equation.

    ``specs[0..s-1]`` produce coefficients (range = field modulus) and
    ``specs[s..2s-1]`` produce table columns (range = table length).
    """

    block_index: int
    specs: tuple[HashSpec, ...]

    @property
    def s(self) -> int:
        return len(self.specs) // 2


def derive_block(master_seed: int, block_index: int, s: int,
                 coeff_range: int, column_range: int) -> HashBlock:
    """Derive block ``block_index``: 2s functions with disjoint indices per block.

    The first s functions map to ``[0, coeff_range)`` and the rest to
    ``[0, column_range)``.
    """
    if s < 1:
        raise InputError(f"s must be >= 1, got {s}")
    base = block_index * 2 * s
    specs = tuple(
        HashSpec(master_seed, base + t,
                 coeff_range if t < s else column_range)
        for t in range(2 * s)
    )
    return HashBlock(block_index, specs)


def derive_seed(master_seed: int, *labels: int) -> int:
    """Derive a child 64-bit seed from a master seed and integer labels.

    Used to give independent builds (bucket children, rebuild iterations,
    field-parameter sampling) their own seed streams.
    """
    data = struct.pack("<%dQ" % (1 + len(labels)), master_seed & _MASK64,
                       *(l & _MASK64 for l in labels))
    return int.from_bytes(blake2b(data, digest_size=8).digest(), "little")


# Reserved function indices, outside the per-attempt/per-block index ranges.
H3_INDEX = 0xFFFF_FFFF   # graph scheme's value-offset hash
H0_INDEX = 0xFFFF_FFFE   # sparse scheme's value-offset hash

# Labels for derive_seed.
LABEL_FIELD = 1          # field-parameter sampling
LABEL_REBUILD = 2        # verified-build iteration t
LABEL_BUCKET_HASH = 3    # bucket-routing hash
LABEL_BUCKET_CHILD = 4   # per-bucket child build
