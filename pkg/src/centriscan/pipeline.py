"""End-to-end analysis pipeline for one source file.

parse -> lower -> (privilege/label/fact fixpoint, sensitive ops, taint) ->
rules -> ScanReport. `analyze_unit` exposes the intermediate products for the
debug dumps and for tests that poke individual stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cfg import block_summary
from .config import ScanConfig
from .dominators import DomInfo
from .ir import ContractUnit, lower
from .parser import parse
from .pdg import PdgLabels, PermFacts, PrivilegeSet, analyze_permissions
from .rules import ContractReport, ScanReport, scan_unit
from .sensors import (
    SensitiveFacts, SourceKey, TaintFact, compute_sensitive_facts,
    find_balance_mappings, taint_outputs,
)
from .source import Diagnostic, SourceFile


@dataclass
class UnitAnalysis:
    unit: ContractUnit
    priv: PrivilegeSet
    labels: dict[str, PdgLabels]
    doms: dict[str, DomInfo]
    perm: dict[str, PermFacts]
    sens: SensitiveFacts
    taints: list[TaintFact] = field(default_factory=list)
    validated_sources: set[SourceKey] = field(default_factory=set)


def analyze_unit(unit: ContractUnit, config: ScanConfig | None = None) -> UnitAnalysis:
    config = config or ScanConfig()
    balance_vars = find_balance_mappings(unit)
    priv, labels, doms, perm = analyze_permissions(unit, balance_vars)
    sens = compute_sensitive_facts(
        unit, exclude_privilege_vars=priv.members if config.exclude_privilege_vars else None
    )
    taints, validated = taint_outputs(unit, distinct_sites=config.ior_distinct_sites)
    return UnitAnalysis(
        unit=unit, priv=priv, labels=labels, doms=doms, perm=perm,
        sens=sens, taints=taints, validated_sources=validated,
    )


def scan_source(source: SourceFile, config: ScanConfig | None = None) -> ScanReport:
    """Scan one file; pure in the file content, so identical bytes produce
    identical reports (modulo the path field)."""
    config = config or ScanConfig()
    ast = parse(source)
    diagnostics = list(ast.diagnostics)
    if config.unsupported_construct_severity == "error":
        diagnostics = [
            replace_severity(d, "error") if d.code == "unsupported-construct" else d
            for d in diagnostics
        ]
    report = ScanReport(file=source.path, content_hash=source.content_hash, diagnostics=diagnostics)
    if ast.has_errors() and not ast.contracts:
        return report
    units, lower_diags = lower(ast)
    report.diagnostics.extend(lower_diags)
    for unit in units:
        analysis = analyze_unit(unit, config)
        contract_report = scan_unit(
            unit, analysis.perm, analysis.sens, analysis.taints, analysis.validated_sources,
            enabled=config.rules, respect_guards=config.ior_respect_guards, labels=analysis.labels,
        )
        report.contracts.append(contract_report)
    return report


def scan_file(path: str, config: ScanConfig | None = None) -> ScanReport:
    return scan_source(SourceFile.from_path(path), config)


def replace_severity(d: Diagnostic, severity: str) -> Diagnostic:
    return Diagnostic(severity, d.code, d.message, d.span)


# --------------------------------------------------------------------------
# debug dumps
# --------------------------------------------------------------------------


def pdg_dump(analysis: UnitAnalysis) -> list[dict]:
    """One JSON document per function: blocks, edges, labels with evidence,
    the immediate-dominator table, and the final facts with their derivation."""
    docs = []
    unit = analysis.unit
    for sig in sorted(unit.functions):
        fn = unit.functions[sig]
        L = analysis.labels.get(sig) or PdgLabels()
        dom = analysis.doms.get(sig)
        facts = analysis.perm.get(sig) or PermFacts()
        docs.append({
            "contract": unit.name,
            "function": sig,
            "blocks": [block_summary(b) for _, b in sorted(fn.cfg.blocks.items())],
            "edges": [list(e) for e in fn.cfg.edges()],
            "labels": {str(bid): sorted(L.labels(bid)) for bid in fn.cfg.blocks},
            "evidence": {
                str(bid): {lab: [ev.to_dict() for ev in evs] for lab, evs in per.items()}
                for bid, per in L.evidence.items()
            },
            "idom": {str(b): i for b, i in (dom.idom.items() if dom else [])},
            "facts": {
                "multisig": facts.multisig,
                "timelock": facts.timelock,
                "limited": facts.limited,
                "limited_public": facts.limited_public,
                "privilege_vars_used": sorted(facts.privilege_vars_used),
            },
            "derivation": [r.to_dict() for r in facts.derivation],
        })
    return docs


def facts_dump(analysis: UnitAnalysis) -> dict:
    """Per-unit sensitive facts and taint facts with evidence spans."""
    sens = analysis.sens
    return {
        "contract": analysis.unit.name,
        "is_token": sens.is_token,
        "balance_vars": sorted(sens.balance_vars),
        "is_proxy": sens.is_proxy,
        "impl_vars": sorted(sens.impl_vars),
        "critical_vars": sorted(sens.critical_vars),
        "privilege_vars": sorted(analysis.priv.members),
        "privilege_rationale": dict(sorted(analysis.priv.how.items())),
        "functions": {
            sig: {
                "mint": fs.mint,
                "modify_crit_vars": sorted(fs.modify_crit_vars),
                "change_impl": fs.change_impl,
                "selfdestruct": fs.selfdestruct,
            }
            for sig, fs in sorted(sens.per_function.items())
        },
        "evidence": {k: [e.to_dict() for e in v] for k, v in sorted(sens.evidence.items())},
        "taint": [
            {
                "var": t.var,
                "sources": [s.to_dict() for s in sorted(t.sources, key=lambda s: (s.target, s.callee, s.site or 0))],
                "path": [e.to_dict() for e in t.path],
            }
            for t in analysis.taints
        ],
    }
