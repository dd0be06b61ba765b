"""Defect rules over permission facts and sensitive-operation facts.

Each rule is a conjunction of premises; findings carry one evidence item per
premise (negative premises record the verified absence). A defect counts
once per contract in the report booleans regardless of how many findings of
that kind the contract produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir import ContractUnit, FunctionIR
from .pdg import PermFacts
from .sensors import SensitiveFacts, SourceKey, TaintFact
from .source import Diagnostic, Span


@dataclass(frozen=True)
class DefectKind:
    code: str
    title: str
    remediation: str


DEFECTS: dict[str, DefectKind] = {
    "MFS": DefectKind(
        "MFS",
        "Mint Function with Single Signature",
        "Eliminate the mint function or implement multi-signature verification prior to minting.",
    ),
    "CVS": DefectKind(
        "CVS",
        "Critical Variables Manipulation with Single Signature",
        "Implement multi-signature verification prior to modifying critical variables.",
    ),
    "MT": DefectKind(
        "MT",
        "Management without Timelock",
        "Implement timelock mechanism prior to the execution of management functions.",
    ),
    "SPA": DefectKind(
        "SPA",
        "Single Proxy Admin",
        "Transfer administrative permissions of a proxy contract to a multi-signature wallet contract.",
    ),
    "SS": DefectKind(
        "SS",
        "Self-destruct with Single Signature",
        "Eliminate self-destruct or implement multi-signature verification prior to self-destruct.",
    ),
    "IOR": DefectKind(
        "IOR",
        "Individual Contract Output Reliance",
        "Implement verification of contract output or combine multiple contract outputs.",
    ),
}

ALL_CODES = tuple(DEFECTS)  # MFS, CVS, MT, SPA, SS, IOR


@dataclass
class EvidenceItem:
    premise: str
    span: Span | None
    note: str

    def to_dict(self) -> dict:
        return {"premise": self.premise, "span": self.span.to_dict() if self.span else None, "note": self.note}

    @staticmethod
    def from_dict(d: dict) -> "EvidenceItem":
        return EvidenceItem(d["premise"], Span.from_dict(d["span"]) if d.get("span") else None, d["note"])


@dataclass
class Finding:
    kind: str
    contract: str
    subject: str
    evidence: list[EvidenceItem] = field(default_factory=list)
    rule_trace: list[str] = field(default_factory=list)
    span: Span | None = None
    suppressed_by: str | None = None

    @property
    def remediation(self) -> str:
        return DEFECTS[self.kind].remediation

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "contract": self.contract,
            "subject": self.subject,
            "evidence": [e.to_dict() for e in self.evidence],
            "rule_trace": list(self.rule_trace),
            "span": self.span.to_dict() if self.span else None,
            "suppressed_by": self.suppressed_by,
            "remediation": self.remediation,
        }

    @staticmethod
    def from_dict(d: dict) -> "Finding":
        return Finding(
            kind=d["kind"],
            contract=d["contract"],
            subject=d["subject"],
            evidence=[EvidenceItem.from_dict(e) for e in d["evidence"]],
            rule_trace=list(d["rule_trace"]),
            span=Span.from_dict(d["span"]) if d.get("span") else None,
            suppressed_by=d.get("suppressed_by"),
        )


@dataclass
class InfoNote:
    contract: str
    subject: str
    message: str
    span: Span | None = None

    def to_dict(self) -> dict:
        return {
            "contract": self.contract,
            "subject": self.subject,
            "message": self.message,
            "span": self.span.to_dict() if self.span else None,
        }

    @staticmethod
    def from_dict(d: dict) -> "InfoNote":
        return InfoNote(d["contract"], d["subject"], d["message"], Span.from_dict(d["span"]) if d.get("span") else None)


@dataclass
class ContractReport:
    name: str
    findings: list[Finding] = field(default_factory=list)
    notes: list[InfoNote] = field(default_factory=list)

    @property
    def defects(self) -> dict[str, bool]:
        """Once-per-contract booleans over findings that are not suppressed."""
        return {
            code: any(f.kind == code and f.suppressed_by is None for f in self.findings)
            for code in ALL_CODES
        }

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "defects": self.defects,
            "findings": [f.to_dict() for f in self.findings],
            "notes": [n.to_dict() for n in self.notes],
        }

    @staticmethod
    def from_dict(d: dict) -> "ContractReport":
        return ContractReport(
            name=d["name"],
            findings=[Finding.from_dict(f) for f in d["findings"]],
            notes=[InfoNote.from_dict(n) for n in d.get("notes", [])],
        )


@dataclass
class ScanReport:
    file: str
    content_hash: str
    contracts: list[ContractReport] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def all_findings(self) -> list[Finding]:
        return [f for c in self.contracts for f in c.findings]

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "content_hash": self.content_hash,
            "contracts": [c.to_dict() for c in self.contracts],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }

    @staticmethod
    def from_dict(d: dict) -> "ScanReport":
        return ScanReport(
            file=d["file"],
            content_hash=d["content_hash"],
            contracts=[ContractReport.from_dict(c) for c in d["contracts"]],
            diagnostics=[Diagnostic.from_dict(x) for x in d["diagnostics"]],
        )


# --------------------------------------------------------------------------
# rule helpers
# --------------------------------------------------------------------------


def _limited_public_evidence(fn: FunctionIR, perm: PermFacts, labels) -> list[EvidenceItem]:
    items: list[EvidenceItem] = []
    L = labels.get(fn.signature) if labels else None
    if L is not None:
        for bid in L.blocks_with("P"):
            for ev in L.evidence.get(bid, {}).get("P", []):
                items.append(EvidenceItem("limited-public", ev.span, ev.description))
    if not items:
        detail = "; ".join(f"{r.rule}: {r.detail}" for r in perm.derivation if "limited" in r.rule or "permission" in r.rule)
        items.append(EvidenceItem("limited-public", fn.span, detail or "guarded by a permission check"))
    items.append(EvidenceItem("limited-public", fn.span, f"directly callable ({fn.visibility})"))
    return items


def _absence(premise: str, fn: FunctionIR) -> EvidenceItem:
    n = len(fn.cfg.blocks)
    return EvidenceItem(premise, fn.span, f"absence verified over {n} blocks")


def _sens_evidence(sens: SensitiveFacts, key: str, premise: str, fallback_span: Span | None, fallback_note: str) -> list[EvidenceItem]:
    evs = sens.evidence.get(key)
    if not evs:
        return [EvidenceItem(premise, fallback_span, fallback_note)]
    return [EvidenceItem(premise, e.span, e.description) for e in evs]


def _sorted_findings(findings: list[Finding]) -> list[Finding]:
    return sorted(findings, key=lambda f: (f.kind, f.span.start if f.span else 0, f.subject))


# --------------------------------------------------------------------------
# the six rules
# --------------------------------------------------------------------------


def rule_mfs(unit: ContractUnit, perm: dict[str, PermFacts], sens: SensitiveFacts, labels=None) -> list[Finding]:
    """Token minting behind a single-signature permission check."""
    if not sens.is_token:
        return []
    out = []
    for sig, fn in unit.functions.items():
        fs = sens.per_function.get(sig)
        pf = perm.get(sig)
        if fs is None or pf is None or fn.is_shadowed:
            continue
        if fs.mint and pf.limited_public and not pf.multisig:
            ev = _sens_evidence(sens, "token", "token-contract", unit.span, "fungible token shape")
            ev += _sens_evidence(sens, f"mint:{sig}", "mint-function", fn.span, "mints token balances")
            ev += _limited_public_evidence(fn, pf, labels)
            ev.append(_absence("no-multisig", fn))
            out.append(Finding(
                kind="MFS", contract=unit.name, subject=sig, evidence=ev,
                rule_trace=["token-contract", "mint-function", "limited-public", "no-multisig"],
                span=fn.span,
            ))
    return _sorted_findings(out)


def rule_cvs(unit: ContractUnit, perm: dict[str, PermFacts], sens: SensitiveFacts, labels=None) -> list[Finding]:
    """Critical-variable writes behind a single-signature permission check."""
    out = []
    for sig, fn in unit.functions.items():
        fs = sens.per_function.get(sig)
        pf = perm.get(sig)
        if fs is None or pf is None or fn.is_shadowed:
            continue
        if fs.modify_crit_vars and pf.limited_public and not pf.multisig:
            for var in sorted(fs.modify_crit_vars):
                info = unit.state_vars[var]
                ev = [EvidenceItem("modifies-critical-variable", info.span, f"'{var}' is stored state read by runtime logic")]
                ev += _limited_public_evidence(fn, pf, labels)
                ev.append(_absence("no-multisig", fn))
                out.append(Finding(
                    kind="CVS", contract=unit.name, subject=f"{sig}#{var}", evidence=ev,
                    rule_trace=["modifies-critical-variable", "limited-public", "no-multisig"],
                    span=fn.span,
                ))
    return _sorted_findings(out)


def rule_mt(unit: ContractUnit, perm: dict[str, PermFacts], sens: SensitiveFacts, labels=None) -> list[Finding]:
    """Management (critical-variable) writes without a timelock."""
    out = []
    for sig, fn in unit.functions.items():
        fs = sens.per_function.get(sig)
        pf = perm.get(sig)
        if fs is None or pf is None or fn.is_shadowed:
            continue
        if fs.modify_crit_vars and pf.limited_public and not pf.timelock:
            for var in sorted(fs.modify_crit_vars):
                info = unit.state_vars[var]
                ev = [EvidenceItem("modifies-critical-variable", info.span, f"'{var}' is stored state read by runtime logic")]
                ev += _limited_public_evidence(fn, pf, labels)
                ev.append(_absence("no-timelock", fn))
                out.append(Finding(
                    kind="MT", contract=unit.name, subject=f"{sig}#{var}", evidence=ev,
                    rule_trace=["modifies-critical-variable", "limited-public", "no-timelock"],
                    span=fn.span,
                ))
    return _sorted_findings(out)


def rule_spa(unit: ContractUnit, perm: dict[str, PermFacts], sens: SensitiveFacts, labels=None) -> list[Finding]:
    """Proxy implementation change without multi-signature verification.

    Visibility is not a premise here: an upgrade path is reported even when
    the changer is not itself a guarded public function.
    """
    if not sens.is_proxy:
        return []
    out = []
    for sig, fn in unit.functions.items():
        fs = sens.per_function.get(sig)
        pf = perm.get(sig)
        if fs is None or pf is None or fn.is_shadowed or fn.kind == "getter":
            continue
        if fs.change_impl and not pf.multisig:
            ev = _sens_evidence(sens, "proxy", "proxy-contract", unit.span, "proxy shape detected")
            ev += _sens_evidence(sens, f"change-impl:{sig}", "changes-implementation", fn.span, "rewrites the implementation address")
            ev.append(_absence("no-multisig", fn))
            out.append(Finding(
                kind="SPA", contract=unit.name, subject=sig, evidence=ev,
                rule_trace=["proxy-contract", "changes-implementation", "no-multisig"],
                span=fn.span,
            ))
    return _sorted_findings(out)


def rule_ss(unit: ContractUnit, perm: dict[str, PermFacts], sens: SensitiveFacts, labels=None) -> list[Finding]:
    """Self-destruct behind a single-signature permission check."""
    out = []
    for sig, fn in unit.functions.items():
        fs = sens.per_function.get(sig)
        pf = perm.get(sig)
        if fs is None or pf is None or fn.is_shadowed:
            continue
        if fs.selfdestruct and pf.limited_public and not pf.multisig:
            ev = _sens_evidence(sens, f"selfdestruct:{sig}", "self-destruct", fn.span, "contains self-destruct")
            ev += _limited_public_evidence(fn, pf, labels)
            ev.append(_absence("no-multisig", fn))
            out.append(Finding(
                kind="SS", contract=unit.name, subject=sig, evidence=ev,
                rule_trace=["self-destruct", "limited-public", "no-multisig"],
                span=fn.span,
            ))
    return _sorted_findings(out)


def rule_ior(
    unit: ContractUnit,
    taints: list[TaintFact],
    validated: set[SourceKey] | None = None,
    respect_guards: bool = False,
) -> list[Finding]:
    """State variables whose value derives from exactly one external output."""
    out = []
    for fact in taints:
        sources = set(fact.sources)
        if respect_guards and validated:
            sources = sources - validated
        if len(sources) != 1:
            continue
        (src,) = sources
        info = unit.state_vars.get(fact.var)
        ev = [EvidenceItem(
            "single-external-source",
            info.span if info else None,
            f"'{fact.var}' depends only on {src.target}.{src.callee}()",
        )]
        for step in fact.path[:4]:
            ev.append(EvidenceItem("dataflow", step.span, step.description))
        out.append(Finding(
            kind="IOR", contract=unit.name, subject=fact.var, evidence=ev,
            rule_trace=["depends-on-external-output", "no-second-source"],
            span=info.span if info else None,
        ))
    return _sorted_findings(out)


# --------------------------------------------------------------------------
# per-unit scan
# --------------------------------------------------------------------------


def unguarded_notes(unit: ContractUnit, perm: dict[str, PermFacts], sens: SensitiveFacts) -> list[InfoNote]:
    """Sensitive functions with no permission check at all: not a defect under
    the rules (they need a guarded function), but worth surfacing."""
    notes = []
    for sig, fn in unit.functions.items():
        fs = sens.per_function.get(sig)
        pf = perm.get(sig)
        if fs is None or pf is None or fn.is_shadowed or fn.kind == "getter":
            continue
        if not fn.is_public or pf.limited or pf.multisig:
            continue
        sensitive = []
        if fs.mint:
            sensitive.append("mints tokens")
        if fs.modify_crit_vars:
            sensitive.append(f"writes critical variables {sorted(fs.modify_crit_vars)}")
        if fs.selfdestruct:
            sensitive.append("contains self-destruct")
        if sensitive:
            notes.append(InfoNote(
                contract=unit.name, subject=sig,
                message="publicly callable with no detected permission check: " + "; ".join(sensitive),
                span=fn.span,
            ))
    return notes


def scan_unit(
    unit: ContractUnit,
    perm: dict[str, PermFacts],
    sens: SensitiveFacts,
    taints: list[TaintFact],
    validated: set[SourceKey],
    enabled: tuple[str, ...] = ALL_CODES,
    respect_guards: bool = False,
    labels=None,
) -> ContractReport:
    findings: list[Finding] = []
    if "MFS" in enabled:
        findings += rule_mfs(unit, perm, sens, labels)
    if "CVS" in enabled:
        findings += rule_cvs(unit, perm, sens, labels)
    if "MT" in enabled:
        findings += rule_mt(unit, perm, sens, labels)
    if "SPA" in enabled:
        findings += rule_spa(unit, perm, sens, labels)
    if "SS" in enabled:
        findings += rule_ss(unit, perm, sens, labels)
    if "IOR" in enabled:
        findings += rule_ior(unit, taints, validated, respect_guards)
    report = ContractReport(name=unit.name, findings=_sorted_findings(findings))
    report.notes = unguarded_notes(unit, perm, sens)
    return report
