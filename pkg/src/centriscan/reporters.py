"""Report rendering: human-readable text, round-trippable JSON, and SARIF 2.1.0."""

from __future__ import annotations

import json

from .batch import BatchResult
from .rules import ALL_CODES, DEFECTS, ScanReport

TOOL_NAME = "centriscan"
TOOL_VERSION = "0.1.0"
SARIF_SCHEMA_URI = "https://raw.githubusercontent.com/oasis-tcs/sarif-spec/master/Schemata/sarif-schema-2.1.0.json"


# --------------------------------------------------------------------------
# text
# --------------------------------------------------------------------------


def render_text(result: BatchResult) -> str:
    lines: list[str] = []
    for report in result.reports:
        for diag in report.diagnostics:
            lines.append(diag.format(report.file))
        for contract in report.contracts:
            for f in contract.findings:
                loc = f"{report.file}:{f.span.line}" if f.span else report.file
                flag = f"  [suppressed: {f.suppressed_by}]" if f.suppressed_by else ""
                lines.append(f"{loc}: {f.kind} ({DEFECTS[f.kind].title}) in {contract.name}: {f.subject}{flag}")
                for ev in f.evidence:
                    where = f" @ line {ev.span.line}" if ev.span else ""
                    lines.append(f"    - {ev.premise}: {ev.note}{where}")
                lines.append(f"    fix: {f.remediation}")
            for note in contract.notes:
                loc = f"{report.file}:{note.span.line}" if note.span else report.file
                lines.append(f"{loc}: note in {contract.name}: {note.subject}: {note.message}")
    for e in result.errors:
        lines.append(f"{e.path}: error: {e.error}")

    lines.append("")
    lines.append(
        f"Scanned {len(result.scanned)} file(s), {result.contracts_scanned} contract(s); "
        f"skipped {len(result.duplicates)} duplicate(s), {len(result.filtered)} below the transaction threshold."
    )
    counts = result.defect_counts()
    total = result.contracts_scanned
    lines.append("")
    lines.append(f"{'Defect':<58}{'Count':>7}{'Percent':>10}")
    for code in ALL_CODES:
        label = f"{DEFECTS[code].title} ({code})"
        pct = (100.0 * counts[code] / total) if total else 0.0
        lines.append(f"{label:<58}{counts[code]:>7}{pct:>9.2f}%")
    defective = result.contracts_with_defects()
    pct_all = (100.0 * defective / total) if total else 0.0
    lines.append(f"{'All (contracts with at least one defect)':<58}{defective:>7}{pct_all:>9.2f}%")
    if result.suppressed_count:
        lines.append(f"Suppressed by cross-contract analysis: {result.suppressed_count} finding(s).")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# json
# --------------------------------------------------------------------------


def batch_to_dict(result: BatchResult) -> dict:
    counts = result.defect_counts()
    total = result.contracts_scanned
    return {
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "reports": [r.to_dict() for r in result.reports],
        "corpus": {
            "scanned": [e.path for e in result.scanned],
            "duplicates_skipped": [e.path for e in result.duplicates],
            "filtered_low_tx": [e.path for e in result.filtered],
            "errors": [{"path": e.path, "error": e.error} for e in result.errors],
            "dedup_groups": {h: list(paths) for h, paths in sorted(result.dedup_groups.items())},
        },
        "summary": {
            "files_scanned": len(result.scanned),
            "contracts_scanned": total,
            "counts": counts,
            "percent": {
                code: round(100.0 * counts[code] / total, 4) if total else 0.0
                for code in ALL_CODES
            },
            "contracts_with_defects": result.contracts_with_defects(),
            "suppressed_findings": result.suppressed_count,
        },
    }


def render_json(result: BatchResult) -> str:
    return json.dumps(batch_to_dict(result), indent=2, sort_keys=True) + "\n"


def report_to_json(report: ScanReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> ScanReport:
    return ScanReport.from_dict(json.loads(text))


# --------------------------------------------------------------------------
# sarif
# --------------------------------------------------------------------------


def render_sarif(result: BatchResult) -> str:
    rules = [
        {
            "id": code,
            "name": DEFECTS[code].title.replace(" ", ""),
            "shortDescription": {"text": DEFECTS[code].title},
            "help": {"text": DEFECTS[code].remediation},
            "defaultConfiguration": {"level": "warning"},
        }
        for code in ALL_CODES
    ]
    results = []
    for report in result.reports:
        for contract in report.contracts:
            for f in contract.findings:
                entry = {
                    "ruleId": f.kind,
                    "level": "warning",
                    "message": {
                        "text": f"{DEFECTS[f.kind].title}: {f.subject} in contract {contract.name}. {f.remediation}"
                    },
                    "locations": [
                        {
                            "physicalLocation": {
                                "artifactLocation": {"uri": report.file},
                                "region": {
                                    "startLine": f.span.line if f.span else 1,
                                    "startColumn": f.span.col if f.span else 1,
                                },
                            }
                        }
                    ],
                }
                related = []
                for ev in f.evidence:
                    if ev.span is None:
                        continue
                    related.append({
                        "physicalLocation": {
                            "artifactLocation": {"uri": report.file},
                            "region": {"startLine": ev.span.line, "startColumn": ev.span.col},
                        },
                        "message": {"text": f"{ev.premise}: {ev.note}"},
                    })
                if related:
                    entry["relatedLocations"] = related
                if f.suppressed_by:
                    entry["suppressions"] = [{"kind": "external", "justification": f.suppressed_by}]
                results.append(entry)
    doc = {
        "version": "2.1.0",
        "$schema": SARIF_SCHEMA_URI,
        "runs": [
            {
                "tool": {
                    "driver": {
                        "name": TOOL_NAME,
                        "version": TOOL_VERSION,
                        "informationUri": "https://example.invalid/centriscan",
                        "rules": rules,
                    }
                },
                "results": results,
            }
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
