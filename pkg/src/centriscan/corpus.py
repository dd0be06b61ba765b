"""Corpus ingestion: discovery, content-hash dedup, transaction-count filter.

Transaction counts (and optional on-chain addresses) come from a sidecar
metadata file of newline-delimited JSON objects: {"path": ..., "tx_count": N,
"address": "0x..."}. Entries without metadata pass the filter. Exactly one
representative per dedup group is scanned; group members stay listed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .source import content_hash


@dataclass
class CorpusEntry:
    path: str
    content_hash: str | None = None
    tx_count: int | None = None
    address: str | None = None
    error: str | None = None


@dataclass
class CorpusIndex:
    entries: list[CorpusEntry] = field(default_factory=list)
    dedup_groups: dict[str, list[str]] = field(default_factory=dict)

    def selection(self, min_tx_count: int) -> tuple[list[CorpusEntry], list[CorpusEntry], list[CorpusEntry]]:
        """(representatives to scan, duplicates skipped, filtered by tx count)."""
        scanned: list[CorpusEntry] = []
        duplicates: list[CorpusEntry] = []
        filtered: list[CorpusEntry] = []
        seen_hashes: set[str] = set()
        for e in sorted(self.entries, key=lambda e: e.path):
            if e.error is not None or e.content_hash is None:
                continue
            if e.tx_count is not None and e.tx_count < min_tx_count:
                filtered.append(e)
                continue
            if e.content_hash in seen_hashes:
                duplicates.append(e)
                continue
            seen_hashes.add(e.content_hash)
            scanned.append(e)
        return scanned, duplicates, filtered

    def errors(self) -> list[CorpusEntry]:
        return [e for e in self.entries if e.error is not None]


def canonical_path(p: str | Path) -> str:
    return Path(p).as_posix()


def discover(paths: list[str]) -> list[str]:
    """Expand files and directories (recursive *.sol) into a sorted path list."""
    found: set[str] = set()
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            for f in p.rglob("*.sol"):
                if f.is_file():
                    found.add(canonical_path(f))
        else:
            found.add(canonical_path(p))
    return sorted(found)


def load_metadata(path: str | Path) -> dict[str, dict]:
    """NDJSON: one {"path", "tx_count", "address"?} object per line."""
    table: dict[str, dict] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{lineno}: bad metadata line: {exc}") from exc
        key = canonical_path(obj["path"])
        table[key] = obj
    return table


def ingest(paths: list[str], metadata_path: str | None = None) -> CorpusIndex:
    """Build the corpus index; unreadable files are recorded, not fatal."""
    meta = load_metadata(metadata_path) if metadata_path else {}
    index = CorpusIndex()
    for path in discover(paths):
        entry = CorpusEntry(path=path)
        m = meta.get(path) or meta.get(Path(path).name)
        if m:
            entry.tx_count = m.get("tx_count")
            entry.address = _normalize_address(m.get("address"))
        try:
            text = Path(path).read_text(encoding="utf-8")
            entry.content_hash = content_hash(text)
        except OSError as exc:
            entry.error = f"io-error: {exc}"
        except UnicodeDecodeError as exc:
            entry.error = f"decode-error: {exc}"
        index.entries.append(entry)
        if entry.content_hash is not None:
            index.dedup_groups.setdefault(entry.content_hash, []).append(path)
    for group in index.dedup_groups.values():
        group.sort()
    return index


def _normalize_address(addr: str | None) -> str | None:
    if addr is None:
        return None
    a = addr.lower()
    return a if a.startswith("0x") else "0x" + a
