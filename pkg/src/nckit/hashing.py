"""64-bit stable hashing of tokens and token windows, plus the fast corpus scanner.

Scheme id ``poly64-splitmix-v1``, frozen and recorded in index metadata:

* token hash: byte polynomial over the token's UTF-8 bytes (``p = p*B + byte``
  mod 2^64, B = 0x100000001B3) finalized with the splitmix64 mixer;
* window hash: starting from a per-n seed, fold each token hash with
  ``acc = (acc ^ th) * GOLDEN; acc ^= acc >> 29``.

Two implementations must agree bit-for-bit and are property-tested against
each other: the scalar Python functions here (used for queries and the general
Unicode path) and the numba kernel ``scan_block`` (used for pure-ASCII shards,
where tokenization degenerates to byte classes).
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Sequence

import numpy as np
from numba import njit

MASK = (1 << 64) - 1
POLY_B = 0x100000001B3
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x &= MASK
    x ^= x >> 30
    x = (x * _MIX1) & MASK
    x ^= x >> 27
    x = (x * _MIX2) & MASK
    x ^= x >> 31
    return x


@lru_cache(maxsize=1 << 16)
def token_hash(token: str) -> int:
    p = 0
    for b in token.encode("utf-8"):
        p = (p * POLY_B + b) & MASK
    return mix64(p)


def seed_for(n: int) -> int:
    return mix64((n * GOLDEN) & MASK)


def window_hash(token_hashes: Sequence[int]) -> int:
    """Combine the token hashes of one n-token window (n = len)."""
    acc = seed_for(len(token_hashes))
    for th in token_hashes:
        acc = ((acc ^ th) * GOLDEN) & MASK
        acc ^= acc >> 29
    return acc


def gram_hash(tokens: Sequence[str]) -> int:
    return window_hash([token_hash(t) for t in tokens])


def combine_windows(token_hashes: np.ndarray, n: int) -> np.ndarray:
    """Vectorized window_hash over one document's token-hash array (uint64)."""
    m = token_hashes.shape[0] - n + 1
    if m <= 0:
        return np.empty(0, dtype=np.uint64)
    acc = np.full(m, np.uint64(seed_for(n)), dtype=np.uint64)
    g = np.uint64(GOLDEN)
    for off in range(n):
        acc = (acc ^ token_hashes[off : off + m]) * g
        acc ^= acc >> np.uint64(29)
    return acc


# Byte tables for the ASCII fast path. Class 0 = whitespace/separator,
# 1 = word (regex \w, ASCII), 2 = punctuation (single-byte token).
LOWER_TABLE = np.arange(256, dtype=np.uint8)
LOWER_TABLE[65:91] += 32

CLASS_TABLE = np.zeros(256, dtype=np.uint8)
for _b in range(128):
    _c = chr(_b)
    if _c.isspace():
        CLASS_TABLE[_b] = 0
    elif re.match(r"\w", _c):
        CLASS_TABLE[_b] = 1
    else:
        CLASS_TABLE[_b] = 2
del _b, _c

_NB_B = np.uint64(POLY_B)
_NB_G = np.uint64(GOLDEN)
_NB_M1 = np.uint64(_MIX1)
_NB_M2 = np.uint64(_MIX2)


@njit(cache=True)
def _scan(a, lower, cls, ns, seeds, out, npos):  # pragma: no cover - measured via wrapper
    nn = ns.shape[0]
    maxn = int(ns[nn - 1])
    # Ring sized to the next power of two so the hot window folds can index
    # with an AND mask instead of an integer modulo.
    rs = 1
    while rs < maxn:
        rs <<= 1
    mask = rs - 1
    ring = np.zeros(rs, dtype=np.uint64)
    ntok = 0
    total_tokens = 0
    ndocs = 0
    poly = np.uint64(0)
    in_word = False
    for i in range(a.shape[0]):
        b = a[i]
        c = cls[b]
        if c == 1:
            poly = poly * _NB_B + np.uint64(lower[b])
            in_word = True
            continue
        if in_word:
            h = poly
            h ^= h >> np.uint64(30)
            h *= _NB_M1
            h ^= h >> np.uint64(27)
            h *= _NB_M2
            h ^= h >> np.uint64(31)
            ring[ntok & mask] = h
            ntok += 1
            total_tokens += 1
            for j in range(nn):
                n = ns[j]
                if ntok >= n:
                    acc = seeds[j]
                    for k in range(ntok - n, ntok):
                        acc = (acc ^ ring[k & mask]) * _NB_G
                        acc ^= acc >> np.uint64(29)
                    out[j, npos[j]] = acc
                    npos[j] += 1
            poly = np.uint64(0)
            in_word = False
        if c == 2:
            h = np.uint64(b)
            h ^= h >> np.uint64(30)
            h *= _NB_M1
            h ^= h >> np.uint64(27)
            h *= _NB_M2
            h ^= h >> np.uint64(31)
            ring[ntok & mask] = h
            ntok += 1
            total_tokens += 1
            for j in range(nn):
                n = ns[j]
                if ntok >= n:
                    acc = seeds[j]
                    for k in range(ntok - n, ntok):
                        acc = (acc ^ ring[k & mask]) * _NB_G
                        acc ^= acc >> np.uint64(29)
                    out[j, npos[j]] = acc
                    npos[j] += 1
        elif b == 10:
            ndocs += 1
            ntok = 0
    return total_tokens, ndocs


def scan_block(block: bytes | np.ndarray, n_values: Sequence[int], scratch: np.ndarray | None = None):
    """Scan one newline-terminated ASCII block; emit window hashes per n.

    Returns (per-n list of uint64 arrays, token count, document count). The
    block must end with a newline so no token or document spans a boundary.
    ``scratch`` may supply a reusable (len(n_values), block_len+1) uint64
    buffer to avoid re-faulting a large allocation per block.
    """
    a = np.frombuffer(block, dtype=np.uint8) if isinstance(block, (bytes, bytearray)) else block
    if a.shape[0] == 0 or a[-1] != 0x0A:
        raise ValueError("scan_block needs a newline-terminated block")
    ns = np.asarray(sorted(n_values), dtype=np.int64)
    seeds = np.asarray([seed_for(int(n)) for n in ns], dtype=np.uint64)
    if scratch is None or scratch.shape[0] < len(ns) or scratch.shape[1] < a.shape[0] + 1:
        scratch = np.empty((len(ns), a.shape[0] + 1), dtype=np.uint64)
    npos = np.zeros(len(ns), dtype=np.int64)
    tokens, docs = _scan(a, LOWER_TABLE, CLASS_TABLE, ns, seeds, scratch, npos)
    per_n = [scratch[j, : npos[j]].copy() for j in range(len(ns))]
    return per_n, int(tokens), int(docs)
