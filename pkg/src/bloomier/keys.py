"""Key and corpus normalization shared by every build path."""

from __future__ import annotations

from .errors import InputError
from .hashing import _as_bytes as as_bytes


def normalize_pairs(pairs, k: int) -> tuple[list[bytes], list[int]]:
    """Validate (key, value) pairs: keys distinct, values in [0, 2^k)."""
    keys, values = [], []
    seen = set()
    limit = 1 << k
    for key, value in pairs:
        kb = as_bytes(key)
        if kb in seen:
            raise InputError(f"duplicate key: {kb!r}")
        seen.add(kb)
        if not 0 <= value < limit:
            raise InputError(f"value {value} outside [0, 2^{k})")
        keys.append(kb)
        values.append(value)
    return keys, values
