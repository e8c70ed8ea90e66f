"""Bit-exact serialization of every filter kind, plus TSV corpus ingestion.

Image layout (all integers little-endian):

    magic  "BLF1"                                   4 bytes
    version u8 = 1                                  1 byte
    scheme  u8: 1 = graph, 2 = sparse, 3 = bucketed 1 byte
    header  10 x u64: n, table_len, modulus, q, k, s, seed, aux1, aux2, aux3
    scheme 3 only: b records of 3 x u64 (bucket n_i, blocks r_i, rebuilds_i)
    payload: one bit-packed table per filter (b tables for scheme 3), each
             entry ceil(log2 modulus) bits, MSB-first within an entry, padded
             to a byte boundary at the end of each table.

The aux fields hold: graph -> (attempt, c numerator, c denominator);
sparse -> (block count r, rebuild count, 0); bucketed -> (b, bucket hash
attempt, 0).  Seeds are masters: everything else re-derives from them.
"""

from __future__ import annotations

import struct
from fractions import Fraction

from .bucketed_filter import BucketedFilter
from .errors import FormatError, InputError, UnsupportedSchemeError
from .field import FieldParams, factor_distinct
from .graph_filter import GraphFilter, GraphParams
from .hashing import LABEL_BUCKET_CHILD, LABEL_REBUILD, derive_seed
from .keys import normalize_pairs
from .sparse_filter import SparseFilter, VerifiedSparseFilter

MAGIC = b"BLF1"
VERSION = 1
_HEADER = struct.Struct("<10Q")
_BUCKET_REC = struct.Struct("<3Q")


def entry_bits(modulus: int) -> int:
    """Bits per table entry: ceil(log2 modulus)."""
    return (modulus - 1).bit_length()


def pack_bits(values, bits: int) -> bytes:
    """MSB-first bit packing, zero-padded to a byte boundary."""
    out = bytearray()
    acc = 0
    nbits = 0
    for v in values:
        acc = (acc << bits) | v
        nbits += bits
        while nbits >= 8:
            nbits -= 8
            out.append((acc >> nbits) & 0xFF)
            acc &= (1 << nbits) - 1
    if nbits:
        out.append((acc << (8 - nbits)) & 0xFF)
    return bytes(out)


def unpack_bits(data: bytes, bits: int, count: int) -> list[int]:
    mask = (1 << bits) - 1
    out = []
    acc = 0
    have = 0
    pos = 0
    for _ in range(count):
        while have < bits:
            acc = (acc << 8) | data[pos]
            pos += 1
            have += 8
        have -= bits
        out.append((acc >> have) & mask)
        acc &= (1 << have) - 1
    return out


def table_bytes(count: int, bits: int) -> int:
    return (count * bits + 7) // 8


def payload_bits(filt) -> int:
    """Unpadded payload size in bits: the quantity the space theorems bound."""
    if isinstance(filt, (GraphFilter,)):
        return filt.table_len * entry_bits(filt.m)
    if isinstance(filt, (SparseFilter, VerifiedSparseFilter)):
        return filt.field.q * entry_bits(filt.field.p)
    if isinstance(filt, BucketedFilter):
        return filt.b * filt.field.q * entry_bits(filt.field.p)
    raise InputError(f"not a filter: {type(filt).__name__}")


def encode(filt) -> bytes:
    """Serialize a filter; deterministic bytes for a given filter."""
    if isinstance(filt, GraphFilter):
        c = Fraction(filt.params.c)
        header = _HEADER.pack(filt.n, filt.table_len, filt.m, 0, filt.k, 0,
                              filt.master_seed, filt.attempt,
                              c.numerator, c.denominator)
        payload = pack_bits(filt.table, entry_bits(filt.m))
        return MAGIC + bytes([VERSION, 1]) + header + payload
    if isinstance(filt, (SparseFilter, VerifiedSparseFilter)):
        rebuilds = filt.rebuilds if isinstance(filt, VerifiedSparseFilter) else 0
        f = filt.field
        header = _HEADER.pack(filt.n, f.q, f.p, f.q, filt.k, filt.s,
                              filt.master_seed, filt.r, rebuilds, 0)
        payload = pack_bits(filt.g, entry_bits(f.p))
        return MAGIC + bytes([VERSION, 2]) + header + payload
    if isinstance(filt, BucketedFilter):
        f = filt.field
        inner0 = filt.filters[0]
        header = _HEADER.pack(filt.n, f.q, f.p, f.q, inner0.k, inner0.s,
                              filt.master_seed, filt.b, filt.bucket_attempt, 0)
        recs = b"".join(_BUCKET_REC.pack(sub.n, sub.r, sub.rebuilds)
                        for sub in filt.filters)
        bits = entry_bits(f.p)
        payload = b"".join(pack_bits(sub.g, bits) for sub in filt.filters)
        return MAGIC + bytes([VERSION, 3]) + header + recs + payload
    raise InputError(f"cannot encode {type(filt).__name__}")


def _need(data: bytes, offset: int, count: int, what: str) -> None:
    if len(data) < offset + count:
        raise FormatError(f"truncated image: {what} needs {count} bytes",
                          offset=len(data))


def _read_table(data: bytes, offset: int, count: int, modulus: int) -> tuple[list[int], int]:
    nbytes = table_bytes(count, entry_bits(modulus))
    _need(data, offset, nbytes, "table payload")
    table = unpack_bits(data[offset:offset + nbytes], entry_bits(modulus), count)
    bad = next((v for v in table if v >= modulus), None)
    if bad is not None:
        raise FormatError(f"table entry {bad} >= modulus {modulus}", offset=offset)
    return table, offset + nbytes


def decode(data: bytes):
    """Reconstruct a filter from its image.

    Raises FormatError on any malformed or truncated input (never returns a
    partial filter) and UnsupportedSchemeError on unknown scheme bytes.
    """
    _need(data, 0, 6, "magic and version")
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}", offset=0)
    if data[4] != VERSION:
        raise FormatError(f"unsupported version {data[4]}", offset=4)
    scheme = data[5]
    if scheme not in (1, 2, 3):
        raise UnsupportedSchemeError(f"unknown scheme {scheme}", offset=5)
    _need(data, 6, _HEADER.size, "header")
    (n, table_len, modulus, q, k, s, seed,
     aux1, aux2, aux3) = _HEADER.unpack_from(data, 6)
    offset = 6 + _HEADER.size
    try:
        if scheme == 1:
            if aux3 == 0:
                raise FormatError("zero denominator for c", offset=6)
            params = GraphParams(m=modulus, k=k, c=Fraction(aux2, aux3))
            if params.table_len(n) != table_len:
                raise FormatError(f"table_len {table_len} inconsistent with "
                                  f"c*n for n={n}", offset=6)
            table, offset = _read_table(data, offset, table_len, modulus)
            filt = GraphFilter(table, params, n, seed, attempt=aux1)
        elif scheme == 2:
            field = _field_from(modulus, q)
            table, offset = _read_table(data, offset, q, modulus)
            filt = SparseFilter(table, field, seed, r=aux1, k=k, s=s, n=n)
            if aux2:
                filt = VerifiedSparseFilter(filt, rebuilds=aux2)
        else:
            field = _field_from(modulus, q)
            b = aux1
            _need(data, offset, _BUCKET_REC.size * b, "bucket records")
            recs = [_BUCKET_REC.unpack_from(data, offset + i * _BUCKET_REC.size)
                    for i in range(b)]
            offset += _BUCKET_REC.size * b
            filters = []
            for i, (n_i, r_i, rebuilds_i) in enumerate(recs):
                table, offset = _read_table(data, offset, q, modulus)
                child = derive_seed(seed, LABEL_BUCKET_CHILD, i)
                create_seed = derive_seed(child, LABEL_REBUILD, rebuilds_i - 1)
                sub = SparseFilter(table, field, create_seed, r=r_i, k=k, s=s, n=n_i)
                filters.append(VerifiedSparseFilter(sub, rebuilds=rebuilds_i))
            filt = BucketedFilter(filters, field, seed, bucket_attempt=aux2, n=n)
    except InputError as exc:
        raise FormatError(f"inconsistent header fields: {exc}", offset=6) from exc
    if offset != len(data):
        raise FormatError(f"{len(data) - offset} trailing bytes", offset=offset)
    return filt


def _field_from(p: int, q: int) -> FieldParams:
    factors = tuple(factor_distinct(q - 1)) if q > 2 else ()
    return FieldParams(q=q, p=p, factors_q_minus_1=factors, m_bits=p.bit_length())


def read_pairs_tsv(stream, k: int) -> list[tuple[bytes, int]]:
    """Read a key<TAB>value corpus: UTF-8, one pair per line, values decimal
    in [0, 2^k), duplicate keys rejected."""
    pairs = []
    for lineno, line in enumerate(stream, 1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected key<TAB>value")
        key, text = parts
        try:
            value = int(text, 10)
        except ValueError:
            raise InputError(f"line {lineno}: bad value {text!r}") from None
        if value < 0:
            raise InputError(f"line {lineno}: negative value")
        pairs.append((key.encode("utf-8"), value))
    keys, values = normalize_pairs(pairs, k)
    return list(zip(keys, values))


def write_pairs_tsv(stream, pairs) -> None:
    for key, value in pairs:
        if isinstance(key, bytes):
            key = key.decode("utf-8")
        stream.write(f"{key}\t{value}\n")
