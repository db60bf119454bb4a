"""Streaming corpus ingestion with deterministic tokenization.

A corpus is a manifest file listing newline-delimited text shards (optionally
gzip-compressed). One line = one document. Tokenization is a fixed convention
shared by every consumer in the package: NFC normalize, lowercase, then split
into word tokens and single punctuation tokens.
"""

from __future__ import annotations

import gzip
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from . import NCKitError

# Word runs, or any single character that is neither word nor whitespace.
# Hyphens and other punctuation therefore become standalone tokens.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


class CorpusError(NCKitError):
    """A shard or manifest could not be read."""


@dataclass(frozen=True)
class Document:
    """One corpus document: a shard-local id and its raw text line."""

    id: str
    text: str


def normalize_text(raw: str) -> list[str]:
    """Tokenize ``raw`` into the package-wide normalized form.

    NFC -> lowercase -> word/punct split. Idempotent on its own space-joined
    output, never yields empty or whitespace-containing tokens.
    """
    return _TOKEN_RE.findall(unicodedata.normalize("NFC", raw).lower())


def read_manifest(path: Path | str) -> list[Path]:
    """Return shard paths listed in a manifest, resolved relative to it.

    Blank lines and ``#`` comments are skipped. Order is preserved; it is
    significant for reproducible index builds.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read manifest {path}: {exc}") from exc
    base = path.parent
    shards = []
    for line in lines:
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        shard = Path(entry)
        if not shard.is_absolute():
            shard = base / shard
        shards.append(shard)
    return shards


def _open_shard(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


class DocumentStream:
    """Iterate documents across all shards of a manifest.

    Documents are yielded in manifest order, then line order. Lines that do
    not decode as UTF-8 are skipped and counted in ``lines_skipped`` with a
    warning collected in ``warnings``; unreadable shards raise CorpusError
    naming the shard.
    """

    def __init__(self, manifest: Path | str):
        self.manifest = Path(manifest)
        self.shards = read_manifest(self.manifest)
        self.lines_read = 0
        self.lines_skipped = 0
        self.warnings: list[str] = []

    def __iter__(self) -> Iterator[Document]:
        for shard_idx, shard in enumerate(self.shards):
            try:
                fh = _open_shard(shard)
            except OSError as exc:
                raise CorpusError(f"unreadable shard {shard}: {exc}") from exc
            with fh:
                try:
                    for line_idx, raw in enumerate(fh):
                        self.lines_read += 1
                        try:
                            text = raw.decode("utf-8").rstrip("\r\n")
                        except UnicodeDecodeError:
                            self.lines_skipped += 1
                            self.warnings.append(
                                f"{shard}:{line_idx + 1}: undecodable line skipped"
                            )
                            continue
                        yield Document(id=f"{shard_idx}:{line_idx}", text=text)
                except (OSError, EOFError, gzip.BadGzipFile) as exc:
                    raise CorpusError(f"unreadable shard {shard}: {exc}") from exc


def iter_documents(manifest: Path | str) -> DocumentStream:
    """Open a manifest for streaming; the stream tracks skip counts as it goes."""
    return DocumentStream(manifest)
