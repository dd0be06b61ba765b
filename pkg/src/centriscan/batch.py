"""Batch scanning over a corpus index with a bounded worker pool.

Workers each run the full pipeline on one file; the merge step sorts by
canonical path so output is independent of discovery and completion order.
"""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import crosschain as xchain
from .config import ScanConfig
from .corpus import CorpusEntry, CorpusIndex
from .pipeline import analyze_unit, facts_dump, pdg_dump, scan_source
from .ir import lower
from .parser import parse
from .rules import ALL_CODES, ScanReport
from .source import SourceFile


@dataclass
class BatchResult:
    reports: list[ScanReport] = field(default_factory=list)
    scanned: list[CorpusEntry] = field(default_factory=list)
    duplicates: list[CorpusEntry] = field(default_factory=list)
    filtered: list[CorpusEntry] = field(default_factory=list)
    errors: list[CorpusEntry] = field(default_factory=list)
    dedup_groups: dict[str, list[str]] = field(default_factory=dict)
    suppressed_count: int = 0
    dumps: list[dict] = field(default_factory=list)

    @property
    def contracts_scanned(self) -> int:
        return sum(len(r.contracts) for r in self.reports)

    def defect_counts(self) -> dict[str, int]:
        counts = {code: 0 for code in ALL_CODES}
        for r in self.reports:
            for c in r.contracts:
                for code, present in c.defects.items():
                    if present:
                        counts[code] += 1
        return counts

    def contracts_with_defects(self) -> int:
        return sum(
            1
            for r in self.reports
            for c in r.contracts
            if any(c.defects.values())
        )

    def has_errors(self) -> bool:
        if self.errors:
            return True
        return any(d.severity == "error" for r in self.reports for d in r.diagnostics)

    def has_findings(self) -> bool:
        return any(
            f.suppressed_by is None for r in self.reports for f in r.all_findings()
        )

    def exit_code(self) -> int:
        if self.has_errors():
            return 2
        return 1 if self.has_findings() else 0


def run_scan(config: ScanConfig, index: CorpusIndex) -> BatchResult:
    """Scan dedup representatives that pass the transaction-count filter."""
    config.validate()
    scanned, duplicates, filtered = index.selection(config.min_tx_count)
    result = BatchResult(
        scanned=scanned, duplicates=duplicates, filtered=filtered,
        errors=index.errors(), dedup_groups=dict(index.dedup_groups),
    )

    def scan_one(entry: CorpusEntry) -> ScanReport:
        source = SourceFile.from_path(entry.path)
        if config.dump_pdg or config.dump_facts:
            _collect_dumps(source, config, result)
        return scan_source(source, config)

    jobs = max(1, config.jobs)
    if jobs == 1 or len(scanned) <= 1:
        reports = [scan_one(e) for e in scanned]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(scan_one, scanned))
    result.reports = sorted(reports, key=lambda r: r.file)

    if config.crosschain_records and config.governors:
        records, skipped = xchain.load_tx_records(config.crosschain_records)
        if skipped:
            print(f"warning: skipped {skipped} malformed transaction records", file=sys.stderr)
        registry = xchain.load_registry(config.governors, config)
        transfers = xchain.detect_ownership_transfer(records, registry)
        address_of = {e.path: e.address for e in scanned}
        for report in result.reports:
            result.suppressed_count += xchain.apply_suppressions(
                report, address_of.get(report.file), transfers
            )
    return result


def _collect_dumps(source: SourceFile, config: ScanConfig, result: BatchResult) -> None:
    ast = parse(source)
    units, _ = lower(ast)
    for unit in units:
        analysis = analyze_unit(unit, config)
        if config.dump_pdg:
            for doc in pdg_dump(analysis):
                result.dumps.append({"kind": "pdg", "file": source.path, **doc})
        if config.dump_facts:
            result.dumps.append({"kind": "facts", "file": source.path, **facts_dump(analysis)})
