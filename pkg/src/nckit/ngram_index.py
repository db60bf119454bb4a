"""Counted n-gram index over a sharded corpus, with saturating counts.

Build strategy: each shard is scanned independently (numba kernel for pure
ASCII shards, general Unicode path otherwise) into a sorted, deduplicated
spill of (window hash, saturated count) pairs; spills are then k-way merged in
manifest order into one sorted table per n. Saturating per shard is lossless
for the merged result because min(cap, sum_i min(cap, c_i)) = min(cap, sum_i c_i):
if any addend was clipped, the true sum already exceeds cap.

On-disk layout (little-endian, format-versioned):
  index.json   metadata: config, fingerprint, corpus stats, table sizes
  n<k>.keys    sorted unique uint64 window hashes
  n<k>.counts  parallel saturated counts (narrowest unsigned dtype for cap)

Queries memmap the key tables and binary-search; absent n-grams count 0.
"""

from __future__ import annotations

import enum
import gzip
import hashlib
import json
import os
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from . import NCKitError, __version__
from .corpus import normalize_text, read_manifest
from .hashing import combine_windows, gram_hash, scan_block, token_hash

FORMAT_VERSION = 1
HASH_SCHEME = "poly64-splitmix-v1"

_BLOCK_BYTES = 4 << 20
_MERGE_CHUNK = 1 << 20  # records per reader buffer during merge
_PARTIAL_REDUCE_AT = 12 << 20  # raw buffered windows per n before an in-shard reduce


class IndexFormatError(NCKitError):
    """The on-disk index is missing, truncated, or from an unsupported format."""


class IndexBuildError(NCKitError):
    """The index could not be built (unreadable input or unwritable output)."""


class CountBucket(enum.Enum):
    """Corpus-frequency buckets: 0, 1-5, and >5 occurrences."""

    ZERO = "ZERO"
    LOW = "LOW"
    HIGH = "HIGH"


def bucket_of(count: int) -> CountBucket:
    """Classify a non-negative count. 0 -> ZERO, 1..5 -> LOW, >=6 -> HIGH."""
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    if count == 0:
        return CountBucket.ZERO
    if count <= 5:
        return CountBucket.LOW
    return CountBucket.HIGH


@dataclass(frozen=True)
class NGramConfig:
    """Window sizes to index and the saturation ceiling for stored counts.

    cap must stay above the top finite bucket bound (5) so saturated counts
    still classify into the right bucket.
    """

    n_values: tuple[int, ...] = (3, 4, 5)
    cap: int = 6

    def __post_init__(self):
        ns = tuple(sorted({int(n) for n in self.n_values}))
        if not ns or any(n < 1 for n in ns):
            raise ValueError(f"n_values must be positive integers, got {self.n_values!r}")
        object.__setattr__(self, "n_values", ns)
        cap = int(self.cap)
        if not 6 <= cap <= 2**31 - 1:
            raise ValueError(f"cap must be in [6, 2**31), got {self.cap!r}")
        object.__setattr__(self, "cap", cap)

    @property
    def count_dtype(self) -> np.dtype:
        if self.cap <= 0xFF:
            return np.dtype("<u1")
        if self.cap <= 0xFFFF:
            return np.dtype("<u2")
        return np.dtype("<u4")

    def to_json(self) -> dict:
        return {"n_values": list(self.n_values), "cap": self.cap}

    @classmethod
    def from_json(cls, obj: dict) -> "NGramConfig":
        return cls(n_values=tuple(obj["n_values"]), cap=obj["cap"])


def _content_hash(path: Path) -> str:
    h = hashlib.blake2b(digest_size=16)
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(8 << 20)
            if not chunk:
                break
            h.update(chunk)
    return h.hexdigest()


def compute_fingerprint(config: NGramConfig, shard_hashes: Sequence[str]) -> str:
    payload = {
        "hash_scheme": HASH_SCHEME,
        "n_values": list(config.n_values),
        "cap": config.cap,
        "shards": list(shard_hashes),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.blake2b(blob, digest_size=16).hexdigest()


def manifest_fingerprint(manifest: Path | str, config: NGramConfig) -> str:
    """Fingerprint the corpus a manifest currently points at (content hashes)."""
    return compute_fingerprint(config, [_content_hash(s) for s in read_manifest(manifest)])


@njit(cache=True)
def _runlength_saturated(sorted_windows, cap, out_keys, out_counts):  # pragma: no cover
    n = sorted_windows.shape[0]
    capv = np.int64(cap)
    w = 0
    i = 0
    while i < n:
        key = sorted_windows[i]
        j = i + 1
        while j < n and sorted_windows[j] == key:
            j += 1
        c = j - i
        if c > capv:
            c = capv
        out_keys[w] = key
        out_counts[w] = np.uint32(c)
        w += 1
        i = j
    return w


def _unique_saturated(windows: np.ndarray, cap: int) -> tuple[np.ndarray, np.ndarray]:
    """Sort one raw window-hash array; return (unique keys, counts clipped to cap)."""
    windows.sort()
    keys = np.empty(windows.size, dtype=np.uint64)
    counts = np.empty(windows.size, dtype=np.uint32)
    w = _runlength_saturated(windows, cap, keys, counts)
    return keys[:w], counts[:w]


@njit(cache=True)
def _merge_k(keys, counts, bounds, cap):  # pragma: no cover - exercised via build_index
    """Merge concatenated sorted-unique runs (delimited by ``bounds`` offsets)
    into one sorted-unique run, summing counts of equal keys and clipping at
    cap. Pairwise two-pointer merges, ping-ponged between two buffers, keep
    every inner loop branch-light and sequential."""
    k = bounds.shape[0] - 1
    capv = np.uint64(cap)
    src_k = keys
    src_c = counts
    src_b = bounds
    dst_k = np.empty(keys.shape[0], dtype=np.uint64)
    dst_c = np.empty(keys.shape[0], dtype=np.uint32)
    while k > 1:
        new_b = np.empty((k + 1) // 2 + 1, dtype=np.int64)
        new_b[0] = 0
        nk = 0
        w = 0
        p = 0
        while p + 1 < k:
            i = src_b[p]
            iend = src_b[p + 1]
            j = iend
            jend = src_b[p + 2]
            while i < iend and j < jend:
                a = src_k[i]
                b = src_k[j]
                if a < b:
                    dst_k[w] = a
                    dst_c[w] = src_c[i]
                    i += 1
                elif b < a:
                    dst_k[w] = b
                    dst_c[w] = src_c[j]
                    j += 1
                else:
                    s = np.uint64(src_c[i]) + np.uint64(src_c[j])
                    if s > capv:
                        s = capv
                    dst_k[w] = a
                    dst_c[w] = np.uint32(s)
                    i += 1
                    j += 1
                w += 1
            while i < iend:
                dst_k[w] = src_k[i]
                dst_c[w] = src_c[i]
                i += 1
                w += 1
            while j < jend:
                dst_k[w] = src_k[j]
                dst_c[w] = src_c[j]
                j += 1
                w += 1
            nk += 1
            new_b[nk] = w
            p += 2
        if p < k:
            i = src_b[p]
            iend = src_b[p + 1]
            while i < iend:
                dst_k[w] = src_k[i]
                dst_c[w] = src_c[i]
                i += 1
                w += 1
            nk += 1
            new_b[nk] = w
        tmp_k = src_k
        src_k = dst_k
        dst_k = tmp_k
        tmp_c = src_c
        src_c = dst_c
        dst_c = tmp_c
        src_b = new_b[: nk + 1]
        k = nk
    return src_k[: src_b[k]], src_c[: src_b[k]]


def _merge_runs(
    keys_parts: list[np.ndarray], counts_parts: list[np.ndarray], cap: int
) -> tuple[np.ndarray, np.ndarray]:
    """Combine (sorted-unique keys, counts) runs into one, clipping sums at cap.

    Clipping already-clipped inputs is lossless: a clipped addend proves the
    true total exceeds cap.
    """
    parts = [
        (np.ascontiguousarray(k, dtype=np.uint64), np.ascontiguousarray(c, dtype=np.uint32))
        for k, c in zip(keys_parts, counts_parts)
        if k.size
    ]
    if not parts:
        return np.empty(0, dtype="<u8"), np.empty(0, dtype=np.uint32)
    if len(parts) == 1:
        return parts[0]
    keys = np.concatenate([k for k, _ in parts])
    counts = np.concatenate([c for _, c in parts])
    bounds = np.zeros(len(parts) + 1, dtype=np.int64)
    np.cumsum([k.size for k, _ in parts], out=bounds[1:])
    return _merge_k(keys, counts, bounds, cap)


class _ShardAccumulator:
    """Buffers raw per-n window batches for one shard: normally one sort per n
    at finalize; a raw-volume valve bounds memory on oversized shards."""

    def __init__(self, n_values: Sequence[int], cap: int):
        self.cap = cap
        self.raw: dict[int, list[np.ndarray]] = {n: [] for n in n_values}
        self.pending: dict[int, int] = {n: 0 for n in n_values}
        self.reduced: dict[int, list[tuple[np.ndarray, np.ndarray]]] = {n: [] for n in n_values}

    def add_raw(self, n: int, windows: np.ndarray) -> None:
        if windows.size == 0:
            return
        self.raw[n].append(windows)
        self.pending[n] += windows.size
        if self.pending[n] >= _PARTIAL_REDUCE_AT:
            self._reduce(n)

    def _reduce(self, n: int) -> None:
        batches = self.raw[n]
        if not batches:
            return
        windows = batches[0] if len(batches) == 1 else np.concatenate(batches)
        self.raw[n] = []
        self.pending[n] = 0
        self.reduced[n].append(_unique_saturated(windows, self.cap))

    def finalize(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        self._reduce(n)
        runs = self.reduced[n]
        self.reduced[n] = []
        if not runs:
            return np.empty(0, dtype="<u8"), np.empty(0, dtype=np.uint32)
        if len(runs) == 1:
            return runs[0]
        return _merge_runs([k for k, _ in runs], [c for _, c in runs], self.cap)


def _spill_shard(args: tuple) -> dict:
    """Worker: scan one shard into sorted spill files; return its stats."""
    shard_path, shard_idx, n_values, cap, spill_dir = args
    shard = Path(shard_path)
    try:
        raw = shard.read_bytes()
    except OSError as exc:
        raise IndexBuildError(f"unreadable shard {shard}: {exc}") from exc
    content_hash = hashlib.blake2b(raw, digest_size=16).hexdigest()
    if shard.suffix == ".gz":
        try:
            data = gzip.decompress(raw)
        except (OSError, EOFError, gzip.BadGzipFile) as exc:
            raise IndexBuildError(f"unreadable shard {shard}: {exc}") from exc
    else:
        data = raw
    del raw

    acc = _ShardAccumulator(n_values, cap)
    tokens = 0
    docs = 0
    skipped = 0
    buf = np.frombuffer(data, dtype=np.uint8)
    if buf.size == 0 or bool((buf < 128).all()):
        pos = 0
        size = len(data)
        scratch = np.empty(
            (len(n_values), min(size, _BLOCK_BYTES + (4 << 10)) + 2), dtype=np.uint64
        )
        while pos < size:
            end = min(pos + _BLOCK_BYTES, size)
            if end < size:
                nl = data.rfind(b"\n", pos, end)
                if nl >= pos:
                    end = nl + 1
                else:
                    nl = data.find(b"\n", end)
                    end = size if nl < 0 else nl + 1
            block = buf[pos:end]
            if block[-1] != 10:
                block = np.concatenate([block, np.array([10], dtype=np.uint8)])
            per_n, t, d = scan_block(block, n_values, scratch)
            tokens += t
            docs += d
            for n, windows in zip(n_values, per_n):
                acc.add_raw(n, windows)
            pos = end
    else:
        lines = data.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        for line in lines:
            docs += 1
            try:
                text = line.decode("utf-8")
            except UnicodeDecodeError:
                skipped += 1
                continue
            toks = normalize_text(text)
            if not toks:
                continue
            tokens += len(toks)
            hashes = np.fromiter((token_hash(t) for t in toks), dtype=np.uint64, count=len(toks))
            for n in n_values:
                acc.add_raw(n, combine_windows(hashes, n))

    count_dtype = NGramConfig(n_values=n_values, cap=cap).count_dtype
    records = {}
    for n in n_values:
        keys, counts = acc.finalize(n)
        base = Path(spill_dir) / f"shard{shard_idx:05d}.n{n}"
        np.asarray(keys, dtype="<u8").tofile(f"{base}.keys")
        np.asarray(counts, dtype=count_dtype).tofile(f"{base}.counts")
        records[n] = int(keys.size)
    return {
        "index": shard_idx,
        "name": shard.name,
        "hash": content_hash,
        "bytes": len(data),
        "docs": docs,
        "tokens": tokens,
        "skipped": skipped,
        "records": records,
    }


class _SpillReader:
    """Sequential chunked reader over one shard's sorted spill for one n."""

    def __init__(
        self,
        keys_path: Path,
        counts_path: Path,
        count_dtype: np.dtype,
        chunk: int = _MERGE_CHUNK,
    ):
        self.keys_path = keys_path
        self.counts_path = counts_path
        self.count_dtype = count_dtype
        self.total = os.path.getsize(keys_path) // 8
        self.read = 0
        self.chunk = chunk
        self.keys = np.empty(0, dtype="<u8")
        self.counts = np.empty(0, dtype=count_dtype)
        self.pos = 0

    def ensure_buffer(self) -> None:
        if self.pos < self.keys.size or self.read >= self.total:
            return
        take = min(self.chunk, self.total - self.read)
        self.keys = np.fromfile(self.keys_path, dtype="<u8", count=take, offset=self.read * 8)
        self.counts = np.fromfile(
            self.counts_path,
            dtype=self.count_dtype,
            count=take,
            offset=self.read * self.count_dtype.itemsize,
        )
        self.read += take
        self.pos = 0

    def has_data(self) -> bool:
        return self.pos < self.keys.size

    def file_exhausted(self) -> bool:
        return self.read >= self.total

    def buffer_max(self) -> int:
        return int(self.keys[-1])

    def take_upto(self, boundary: int | None) -> tuple[np.ndarray, np.ndarray]:
        if boundary is None:
            hi = self.keys.size
        else:
            hi = int(np.searchsorted(self.keys, np.uint64(boundary), side="right"))
        lo = self.pos
        self.pos = hi
        return self.keys[lo:hi], self.counts[lo:hi]


def _merge_spills(
    spill_files: list[tuple[Path, Path]],
    out_keys: Path,
    out_counts: Path,
    cap: int,
    count_dtype: np.dtype,
) -> int:
    readers = [_SpillReader(kp, cp, count_dtype) for kp, cp in spill_files]
    total = 0
    with open(out_keys, "wb") as fk, open(out_counts, "wb") as fc:
        while True:
            for r in readers:
                r.ensure_buffer()
            readers = [r for r in readers if r.has_data()]
            if not readers:
                break
            bounded = [r.buffer_max() for r in readers if not r.file_exhausted()]
            boundary = min(bounded) if bounded else None
            keys_parts = []
            counts_parts = []
            for r in readers:
                k, c = r.take_upto(boundary)
                if k.size:
                    keys_parts.append(k)
                    counts_parts.append(c)
            if not keys_parts:
                continue
            keys, counts = _merge_runs(keys_parts, counts_parts, cap)
            np.asarray(keys, dtype="<u8").tofile(fk)
            np.asarray(counts, dtype=count_dtype).tofile(fc)
            total += keys.size
    return total


def build_index(
    manifest: Path | str,
    output: Path | str,
    config: NGramConfig = NGramConfig(),
    workers: int = 1,
) -> "NGramIndex":
    """Build the index for a corpus manifest into ``output`` and open it.

    Deterministic: the same manifest content and config yield byte-identical
    index files regardless of worker count. The metadata file is written last
    so a crashed build is never mistaken for a complete one.
    """
    manifest = Path(manifest)
    out_dir = Path(output)
    shards = read_manifest(manifest)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IndexBuildError(f"cannot create index directory {out_dir}: {exc}") from exc
    spill_dir = out_dir / "build.tmp"
    if spill_dir.exists():
        shutil.rmtree(spill_dir)
    spill_dir.mkdir()

    # Warm the kernels in-process so forked workers inherit the compiled code.
    scan_block(b"warm up\n", config.n_values)
    _merge_runs(
        [np.zeros(1, dtype=np.uint64), np.ones(1, dtype=np.uint64)],
        [np.ones(1, dtype=np.uint32), np.ones(1, dtype=np.uint32)],
        config.cap,
    )

    tasks = [
        (str(shard), i, config.n_values, config.cap, str(spill_dir))
        for i, shard in enumerate(shards)
    ]
    try:
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_spill_shard, tasks, chunksize=1))
        else:
            results = [_spill_shard(t) for t in tasks]

        tables = {}
        for n in config.n_values:
            spill_files = [
                (
                    spill_dir / f"shard{r['index']:05d}.n{n}.keys",
                    spill_dir / f"shard{r['index']:05d}.n{n}.counts",
                )
                for r in results
            ]
            records = _merge_spills(
                spill_files,
                out_dir / f"n{n}.keys.tmp",
                out_dir / f"n{n}.counts.tmp",
                config.cap,
                config.count_dtype,
            )
            os.replace(out_dir / f"n{n}.keys.tmp", out_dir / f"n{n}.keys")
            os.replace(out_dir / f"n{n}.counts.tmp", out_dir / f"n{n}.counts")
            tables[str(n)] = {"records": records, "count_dtype": config.count_dtype.str}
    except OSError as exc:
        raise IndexBuildError(f"index build failed under {out_dir}: {exc}") from exc
    finally:
        shutil.rmtree(spill_dir, ignore_errors=True)

    meta = {
        "format_version": FORMAT_VERSION,
        "hash_scheme": HASH_SCHEME,
        "tool_version": __version__,
        "config": config.to_json(),
        "fingerprint": compute_fingerprint(config, [r["hash"] for r in results]),
        "corpus": {
            "shards": [{"name": r["name"], "hash": r["hash"], "bytes": r["bytes"]} for r in results],
            "documents": sum(r["docs"] for r in results),
            "tokens": sum(r["tokens"] for r in results),
            "text_bytes": sum(r["bytes"] for r in results),
            "lines_skipped": sum(r["skipped"] for r in results),
        },
        "tables": tables,
    }
    tmp_meta = out_dir / "index.json.tmp"
    tmp_meta.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp_meta, out_dir / "index.json")
    return NGramIndex(out_dir)


class NGramIndex:
    """Read-only handle over a built index directory (memmapped tables)."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)
        meta_path = self.directory / "index.json"
        if not meta_path.exists():
            raise IndexFormatError(f"not an index directory (missing index.json): {self.directory}")
        try:
            self.meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise IndexFormatError(f"unreadable index metadata {meta_path}: {exc}") from exc
        version = self.meta.get("format_version")
        if version != FORMAT_VERSION:
            raise IndexFormatError(
                f"index format version {version!r} unsupported (this build reads {FORMAT_VERSION})"
            )
        if self.meta.get("hash_scheme") != HASH_SCHEME:
            raise IndexFormatError(
                f"index hash scheme {self.meta.get('hash_scheme')!r} unsupported "
                f"(this build uses {HASH_SCHEME})"
            )
        self.config = NGramConfig.from_json(self.meta["config"])
        self.fingerprint: str = self.meta["fingerprint"]
        self._keys: dict[int, np.ndarray] = {}
        self._counts: dict[int, np.ndarray] = {}
        for n_str, table in self.meta["tables"].items():
            n = int(n_str)
            records = table["records"]
            keys_path = self.directory / f"n{n}.keys"
            counts_path = self.directory / f"n{n}.counts"
            dtype = np.dtype(table["count_dtype"])
            for path, width in ((keys_path, 8), (counts_path, dtype.itemsize)):
                if not path.exists():
                    raise IndexFormatError(f"index table file missing: {path}")
                if os.path.getsize(path) != records * width:
                    raise IndexFormatError(f"index table file truncated: {path}")
            if records:
                self._keys[n] = np.memmap(keys_path, dtype="<u8", mode="r", shape=(records,))
                self._counts[n] = np.memmap(counts_path, dtype=dtype, mode="r", shape=(records,))
            else:
                self._keys[n] = np.empty(0, dtype="<u8")
                self._counts[n] = np.empty(0, dtype=dtype)

    @property
    def n_values(self) -> tuple[int, ...]:
        return self.config.n_values

    def _require_table(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        if n not in self._keys:
            raise ValueError(f"n={n} is not indexed (configured n_values: {self.n_values})")
        return self._keys[n], self._counts[n]

    def count_hash(self, n: int, window_hash: int) -> int:
        keys, counts = self._require_table(n)
        if keys.size == 0:
            return 0
        i = int(np.searchsorted(keys, np.uint64(window_hash)))
        if i < keys.size and int(keys[i]) == window_hash:
            return int(counts[i])
        return 0

    def count(self, gram: Sequence[str]) -> int:
        """Saturated corpus count of one n-gram (0 if absent)."""
        return self.count_hash(len(gram), gram_hash(tuple(gram)))

    def counts_for_hashes(self, n: int, hashes: np.ndarray) -> np.ndarray:
        """Vectorized count lookup for an array of window hashes."""
        keys, counts = self._require_table(n)
        hashes = np.asarray(hashes, dtype=np.uint64)
        if keys.size == 0 or hashes.size == 0:
            return np.zeros(hashes.shape, dtype=np.int64)
        idx = np.searchsorted(keys, hashes)
        idx_c = np.minimum(idx, keys.size - 1)
        hit = (idx < keys.size) & (keys[idx_c] == hashes)
        out = np.zeros(hashes.shape, dtype=np.int64)
        out[hit] = counts[idx_c[hit]]
        return out

    def bucket(self, gram: Sequence[str]) -> CountBucket:
        return bucket_of(self.count(gram))

    def verify_against(self, manifest: Path | str) -> bool:
        """True iff the manifest's current content matches this index."""
        return manifest_fingerprint(manifest, self.config) == self.fingerprint

    def close(self) -> None:
        self._keys.clear()
        self._counts.clear()

    def __enter__(self) -> "NGramIndex":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_index(directory: Path | str) -> NGramIndex:
    return NGramIndex(directory)
