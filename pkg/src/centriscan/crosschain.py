"""Cross-contract suppression pass.

Single-signature findings are false positives when transaction records show
the contract's permissions were handed to a multisig wallet or a timelock
contract. This pass scans user-exported transaction records for calls whose
selector is in the ownership-transfer catalog and whose argument address is
a registered governor; matching contracts get their findings flagged as
suppressed (never dropped).

Inputs are offline files:
  * records: NDJSON of {tx_hash, from_addr, to_addr, selector, args_addresses
    or input, timestamp}, filtered per contract by to_addr;
  * registry: one `0xaddress multisig|timelock` line per governor, or
    `0xaddress auto:<file.sol>` to classify the governor by scanning its
    source for multisig/timelock verification logic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .rules import ScanReport

# 4-byte dispatch selectors of the ownership-transfer catalog (keccak-256 of
# the canonical signature, first 4 bytes), stored without the 0x prefix.
TRANSFER_SELECTORS: dict[str, str] = {
    "f2fde38b": "transferOwnership(address)",
    "13af4035": "setOwner(address)",
    "8f283970": "changeAdmin(address)",
    "75829def": "transferAdmin(address)",
}

MULTISIG_SUPPRESSED_KINDS = frozenset({"MFS", "CVS", "SPA", "SS"})
TIMELOCK_SUPPRESSED_KINDS = frozenset({"MT"})

SUPPRESSION_TAG = "crosschain-governor"


@dataclass
class TxRecord:
    tx_hash: str
    from_addr: str
    to_addr: str
    selector: str
    args_addresses: list[str] = field(default_factory=list)
    timestamp: int | None = None


@dataclass
class GovernorRegistry:
    multisig_addrs: set[str] = field(default_factory=set)
    timelock_addrs: set[str] = field(default_factory=set)
    provenance: dict[str, str] = field(default_factory=dict)


def _norm(addr: str) -> str:
    a = addr.lower().strip()
    return a if a.startswith("0x") else "0x" + a


def _decode_arg_addresses(input_hex: str) -> list[str]:
    """First-word address decoding: selector (4 bytes) + 32-byte words."""
    data = input_hex.lower().removeprefix("0x")
    body = data[8:]
    out = []
    for i in range(0, len(body) - 63, 64):
        word = body[i : i + 64]
        out.append("0x" + word[-40:])
    return out


def load_tx_records(path: str | Path) -> tuple[list[TxRecord], int]:
    """Parse the NDJSON record file; malformed lines are skipped and counted."""
    records: list[TxRecord] = []
    skipped = 0
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            selector = obj["selector"].lower().removeprefix("0x")
            args = [_norm(a) for a in obj.get("args_addresses", [])]
            if not args and obj.get("input"):
                args = _decode_arg_addresses(obj["input"])
            records.append(TxRecord(
                tx_hash=obj["tx_hash"],
                from_addr=_norm(obj["from_addr"]),
                to_addr=_norm(obj["to_addr"]),
                selector=selector,
                args_addresses=args,
                timestamp=obj.get("timestamp"),
            ))
        except (json.JSONDecodeError, KeyError, AttributeError, TypeError):
            skipped += 1
    return records, skipped


def load_registry(path: str | Path, scan_config=None) -> GovernorRegistry:
    registry = GovernorRegistry()
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected '<address> <multisig|timelock|auto:FILE>'")
        addr, tag = _norm(parts[0]), parts[1]
        if tag == "multisig":
            registry.multisig_addrs.add(addr)
            registry.provenance[addr] = "user-supplied"
        elif tag == "timelock":
            registry.timelock_addrs.add(addr)
            registry.provenance[addr] = "user-supplied"
        elif tag.startswith("auto:"):
            src = Path(path).parent / tag[len("auto:"):]
            tags = classify_governor_source(src, scan_config)
            if "multisig" in tags:
                registry.multisig_addrs.add(addr)
            if "timelock" in tags:
                registry.timelock_addrs.add(addr)
            registry.provenance[addr] = f"classified from {src.name}: {sorted(tags) or 'none'}"
        else:
            raise ValueError(f"{path}:{lineno}: unknown governor tag {tag!r}")
    return registry


def classify_governor_source(path: str | Path, scan_config=None) -> set[str]:
    """Run the permission labeling on a governor source: any function with a
    multisig fact tags it multisig, a timelock fact tags it timelock."""
    from .ir import lower
    from .parser import parse
    from .pdg import analyze_permissions
    from .source import SourceFile

    ast = parse(SourceFile.from_path(path))
    units, _ = lower(ast)
    tags: set[str] = set()
    for unit in units:
        _, _, _, facts = analyze_permissions(unit)
        for f in facts.values():
            if f.multisig:
                tags.add("multisig")
            if f.timelock:
                tags.add("timelock")
    return tags


def detect_ownership_transfer(
    records: list[TxRecord], registry: GovernorRegistry
) -> dict[str, set[str]]:
    """contract address -> {"multisig", "timelock"} governor handoffs found."""
    out: dict[str, set[str]] = {}
    for rec in records:
        if rec.selector not in TRANSFER_SELECTORS:
            continue
        for arg in rec.args_addresses:
            if arg in registry.multisig_addrs:
                out.setdefault(rec.to_addr, set()).add("multisig")
            if arg in registry.timelock_addrs:
                out.setdefault(rec.to_addr, set()).add("timelock")
    return out


def apply_suppressions(report: ScanReport, contract_address: str | None, transfers: dict[str, set[str]]) -> int:
    """Flag findings suppressed by a governor handoff; returns the count."""
    if not contract_address:
        return 0
    tags = transfers.get(_norm(contract_address))
    if not tags:
        return 0
    suppressed = 0
    for contract in report.contracts:
        for f in contract.findings:
            if f.suppressed_by is not None:
                continue
            if "multisig" in tags and f.kind in MULTISIG_SUPPRESSED_KINDS:
                f.suppressed_by = f"{SUPPRESSION_TAG}:multisig"
                suppressed += 1
            elif "timelock" in tags and f.kind in TIMELOCK_SUPPRESSED_KINDS:
                f.suppressed_by = f"{SUPPRESSION_TAG}:timelock"
                suppressed += 1
    return suppressed
