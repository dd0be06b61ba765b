"""Permission analysis over per-function control-flow graphs.

Basic blocks are labeled with any of:
  P — the block checks that the caller is a high-privilege account,
  M — the block performs multi-signature verification,
  T — the block enforces a timelock,
  O — none of the above (implicit when the P/M/T set is empty).

`depend(b1, b2)` is block dominance: every execution path to b1 passes
through b2. Function-level facts (multisig / timelock / limited /
limited_public) are the least fixpoint of the block labels plus propagation
along intra-unit call edges: a function inherits a fact from any callee that
has it, and limited_public additionally requires public/external visibility.

The privilege set and the limited facts are mutually recursive (a mapping
qualifies as a privilege set when all its non-creation writers are limited),
so `derive_privilege_set` iterates both to a joint fixpoint seeded with
creation-initialized address variables and owner-named address variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast_nodes import (
    AssignExpr, BinaryExpr, CallExpr, ElementaryType, Expr, ExprStmt,
    GuardAssumption, Ident, IndexAccess, MappingType, MemberAccess, TypeNode,
    VarDeclStmt, expr_text, is_bytes_array_type, is_block_timestamp,
    is_msg_sender, is_uint_type, walk_exprs,
)
from .cfg import BasicBlock
from .dominators import DomInfo, dominators_for_cfg
from .ir import CALL_INTERNAL, ContractUnit, FunctionIR, classify_call
from .source import Span

P = "P"
M = "M"
T = "T"
O = "O"

# Ownable-style names; referenced-but-undeclared occurrences are presumed to
# be inherited owner state (flattening may be incomplete).
OWNER_NAME_PATTERN = frozenset({"owner", "_owner"})

_COMPARISON_OPS = frozenset({"<", "<=", ">", ">=", "=="})
_EXPAND_DEPTH = 8


@dataclass
class LabelEvidence:
    span: Span | None
    description: str

    def to_dict(self) -> dict:
        return {"span": self.span.to_dict() if self.span else None, "description": self.description}


@dataclass
class PdgLabels:
    """Per-function labeling: block id -> subset of {P, M, T}."""

    raw: dict[int, set[str]] = field(default_factory=dict)
    evidence: dict[int, dict[str, list[LabelEvidence]]] = field(default_factory=dict)
    priv_reads: dict[int, set[str]] = field(default_factory=dict)

    def labels(self, bid: int) -> set[str]:
        s = self.raw.get(bid)
        return set(s) if s else {O}

    def add(self, bid: int, label: str, evidence: list[LabelEvidence], priv_names: set[str] | None = None) -> None:
        self.raw.setdefault(bid, set()).add(label)
        self.evidence.setdefault(bid, {}).setdefault(label, []).extend(evidence)
        if priv_names:
            self.priv_reads.setdefault(bid, set()).update(priv_names)

    def blocks_with(self, label: str) -> list[int]:
        return sorted(b for b, s in self.raw.items() if label in s)


@dataclass
class PrivilegeSet:
    members: set[str] = field(default_factory=set)
    how: dict[str, str] = field(default_factory=dict)


@dataclass
class RuleApplication:
    rule: str
    detail: str

    def to_dict(self) -> dict:
        return {"rule": self.rule, "detail": self.detail}


@dataclass
class PermFacts:
    multisig: bool = False
    timelock: bool = False
    limited: bool = False
    limited_public: bool = False
    privilege_vars_used: set[str] = field(default_factory=set)
    derivation: list[RuleApplication] = field(default_factory=list)

    def snapshot(self) -> tuple[bool, bool, bool, bool]:
        return (self.multisig, self.timelock, self.limited, self.limited_public)


# --------------------------------------------------------------------------
# expression predicates
# --------------------------------------------------------------------------


def _block_local_defs(block: BasicBlock) -> dict[str, Expr]:
    defs: dict[str, Expr] = {}
    for st in block.statements:
        if isinstance(st, VarDeclStmt) and st.init is not None:
            for b in st.bindings:
                if b is not None:
                    defs[b.name] = st.init
        elif isinstance(st, ExprStmt) and isinstance(st.expr, AssignExpr) and st.expr.op == "=":
            if isinstance(st.expr.target, Ident):
                defs[st.expr.target.name] = st.expr.value
    return defs


def _mentions(expr: Expr, pred, defs: dict[str, Expr], depth: int = _EXPAND_DEPTH) -> bool:
    for node in walk_exprs(expr):
        if pred(node):
            return True
        if depth > 0 and isinstance(node, Ident) and node.name in defs:
            if _mentions(defs[node.name], pred, {k: v for k, v in defs.items() if k != node.name}, depth - 1):
                return True
    return False


def _comparisons(cond: Expr) -> list[BinaryExpr]:
    return [n for n in walk_exprs(cond) if isinstance(n, BinaryExpr) and n.op in _COMPARISON_OPS]


def _is_uint_state_var(name: str, unit: ContractUnit) -> bool:
    t = unit.state_var_type(name)
    return is_uint_type(t)


def _threshold_pred(fn: FunctionIR, unit: ContractUnit, exclude: frozenset[str] = frozenset()):
    def pred(node: Expr) -> bool:
        if not isinstance(node, Ident) or node.name in exclude:
            return False
        if node.name in fn.local_types:
            return is_uint_type(fn.local_types[node.name]) and node.name in {p.name for p in fn.params}
        return _is_uint_state_var(node.name, unit)

    return pred


# --------------------------------------------------------------------------
# labeling: P / M / T
# --------------------------------------------------------------------------


def label_percheck(
    block: BasicBlock, priv: PrivilegeSet, fn: FunctionIR, unit: ContractUnit
) -> tuple[bool, list[LabelEvidence], set[str]]:
    """Caller-privilege check: msg.sender and the privilege set used in one condition."""
    conds = fn.cfg.block_conditions(block.id)
    for cond in conds:
        if isinstance(cond, GuardAssumption):
            ev = LabelEvidence(cond.span, f"unresolved modifier '{cond.modifier_name}' assumed to be an inherited permission check")
            return True, [ev], set()
        has_sender = any(is_msg_sender(n) for n in walk_exprs(cond))
        if not has_sender:
            continue
        priv_names: set[str] = set()
        notes: list[str] = []
        for node in walk_exprs(cond):
            if isinstance(node, Ident) and node.name not in fn.local_names:
                if node.name in priv.members:
                    priv_names.add(node.name)
                elif node.name in OWNER_NAME_PATTERN and node.name not in unit.state_vars:
                    priv_names.add(node.name)
                    notes.append(f"'{node.name}' presumed inherited owner state")
            elif isinstance(node, CallExpr):
                cls, detail = classify_call(node, fn, unit)
                if cls == CALL_INTERNAL and detail is not None:
                    callee = unit.functions.get(detail)
                    if callee is not None:
                        hit = callee.reads & priv.members
                        if hit:
                            priv_names.update(hit)
                            notes.append(f"call to {callee.name}() reads {sorted(hit)}")
        if priv_names:
            desc = f"caller check: {expr_text(cond)}"
            if notes:
                desc += " (" + "; ".join(notes) + ")"
            return True, [LabelEvidence(cond.span or block.span, desc)], priv_names
    return False, [], set()


def _signature_material(fn: FunctionIR) -> set[str]:
    names = {p.name for p in fn.params if p.name and is_bytes_array_type(p.type)}
    # parallel v/r/s arrays: uint8[] plus at least two bytes32[]
    uint8_arrays = [p.name for p in fn.params if p.name and _is_elem_array(p.type, "uint8")]
    b32_arrays = [p.name for p in fn.params if p.name and _is_elem_array(p.type, "bytes32")]
    if uint8_arrays and len(b32_arrays) >= 2:
        names.update(uint8_arrays)
        names.update(b32_arrays)
    return names


def _is_elem_array(t: TypeNode | None, elem: str) -> bool:
    from .ast_nodes import ArrayType

    return isinstance(t, ArrayType) and isinstance(t.base, ElementaryType) and t.base.name == elem


def _block_has_ecrecover(block: BasicBlock, fn: FunctionIR) -> bool:
    param_names = {p.name for p in fn.params if p.name}

    def uses_params(call: CallExpr) -> bool:
        return any(
            isinstance(n, Ident) and n.name in param_names
            for a in call.args
            for n in walk_exprs(a)
        )

    for expr in _block_exprs(block, fn):
        for node in walk_exprs(expr):
            if isinstance(node, CallExpr) and isinstance(node.callee, Ident) and node.callee.name == "ecrecover":
                if uses_params(node):
                    return True
    return False


def _block_exprs(block: BasicBlock, fn: FunctionIR):
    for st in block.statements:
        if isinstance(st, ExprStmt):
            yield st.expr
        elif isinstance(st, VarDeclStmt) and st.init is not None:
            yield st.init
    yield from fn.cfg.block_conditions(block.id)


def label_multisig(block: BasicBlock, fn: FunctionIR, unit: ContractUnit) -> tuple[bool, list[LabelEvidence]]:
    """Multi-signature verification: caller-supplied signature material counted
    against an integer threshold in one condition of this block."""
    sig_names = _signature_material(fn)
    has_ecrecover = _block_has_ecrecover(block, fn)
    if not sig_names and not has_ecrecover:
        return False, []

    defs = _block_local_defs(block)

    def sig_pred(node: Expr) -> bool:
        if isinstance(node, Ident) and node.name in sig_names:
            return True
        return (
            has_ecrecover
            and isinstance(node, CallExpr)
            and isinstance(node.callee, Ident)
            and node.callee.name == "ecrecover"
        )

    thresh_pred = _threshold_pred(fn, unit, exclude=frozenset(sig_names))

    for cond in fn.cfg.block_conditions(block.id):
        for cmp_ in _comparisons(cond):
            for lhs, rhs in ((cmp_.left, cmp_.right), (cmp_.right, cmp_.left)):
                if _mentions(lhs, sig_pred, defs) and _mentions(rhs, thresh_pred, defs):
                    ev = LabelEvidence(cmp_.span or block.span, f"signature count compared to threshold: {expr_text(cmp_)}")
                    return True, [ev]
    return False, []


def label_timelock(block: BasicBlock, fn: FunctionIR, unit: ContractUnit) -> tuple[bool, list[LabelEvidence]]:
    """Timelock: block.timestamp compared to a time threshold in one condition."""
    defs = _block_local_defs(block)
    thresh_pred = _threshold_pred(fn, unit)

    for cond in fn.cfg.block_conditions(block.id):
        for cmp_ in _comparisons(cond):
            for lhs, rhs in ((cmp_.left, cmp_.right), (cmp_.right, cmp_.left)):
                if _mentions(lhs, lambda n: is_block_timestamp(n), defs) and _mentions(rhs, thresh_pred, defs):
                    ev = LabelEvidence(cmp_.span or block.span, f"timestamp compared to threshold: {expr_text(cmp_)}")
                    return True, [ev]
    return False, []


def label_function(fn: FunctionIR, priv: PrivilegeSet, unit: ContractUnit) -> PdgLabels:
    labels = PdgLabels()
    for bid, block in fn.cfg.blocks.items():
        ok, ev, names = label_percheck(block, priv, fn, unit)
        if ok:
            labels.add(bid, P, ev, names)
        ok, ev = label_multisig(block, fn, unit)
        if ok:
            labels.add(bid, M, ev)
        ok, ev = label_timelock(block, fn, unit)
        if ok:
            labels.add(bid, T, ev)
    return labels


def label_unit(unit: ContractUnit, priv: PrivilegeSet) -> dict[str, PdgLabels]:
    return {sig: label_function(fn, priv, unit) for sig, fn in unit.functions.items()}


# --------------------------------------------------------------------------
# function facts
# --------------------------------------------------------------------------


def derive_perm_facts(
    unit: ContractUnit,
    labels: dict[str, PdgLabels],
    doms: dict[str, DomInfo],
) -> dict[str, PermFacts]:
    """Least fixpoint of the block-label rules plus call-edge propagation."""
    facts: dict[str, PermFacts] = {}
    for sig, fn in unit.functions.items():
        f = PermFacts()
        L = labels.get(sig) or PdgLabels()
        dom = doms.get(sig) or dominators_for_cfg(fn.cfg)
        for bid in L.blocks_with(M):
            f.multisig = True
            f.derivation.append(RuleApplication("multisig-in-block", f"block {bid}"))
        for bid in L.blocks_with(T):
            f.timelock = True
            f.derivation.append(RuleApplication("timelock-in-block", f"block {bid}"))
        block_ids = list(fn.cfg.blocks)
        for b2 in L.blocks_with(P):
            guarded = [b1 for b1 in block_ids if b1 != b2 and dom.dominates(b2, b1)]
            if guarded:
                f.limited = True
                f.privilege_vars_used.update(L.priv_reads.get(b2, set()))
                f.derivation.append(RuleApplication(
                    "permission-check-dominates",
                    f"block {b2} guards blocks {guarded}",
                ))
        facts[sig] = f

    # propagate facts from callees to callers until stable
    callers: dict[str, set[str]] = {}
    for caller, callee in unit.call_graph.edges:
        callers.setdefault(callee, set()).add(caller)
    work = [sig for sig in facts]
    while work:
        callee = work.pop()
        cf = facts[callee]
        for caller in callers.get(callee, ()):  # facts flow callee -> caller
            pf = facts.get(caller)
            if pf is None:
                continue
            changed = False
            if cf.multisig and not pf.multisig:
                pf.multisig = True
                pf.derivation.append(RuleApplication("multisig-via-call", callee))
                changed = True
            if cf.timelock and not pf.timelock:
                pf.timelock = True
                pf.derivation.append(RuleApplication("timelock-via-call", callee))
                changed = True
            if cf.limited and not pf.limited:
                pf.limited = True
                pf.derivation.append(RuleApplication("limited-via-call", callee))
                changed = True
            if cf.privilege_vars_used - pf.privilege_vars_used:
                pf.privilege_vars_used.update(cf.privilege_vars_used)
                changed = True
            if changed:
                work.append(caller)

    for sig, fn in unit.functions.items():
        f = facts[sig]
        if f.limited and fn.is_public:
            f.limited_public = True
            f.derivation.append(RuleApplication("limited-and-public", fn.visibility))
    return facts


# --------------------------------------------------------------------------
# privilege set (joint fixpoint with the limited facts)
# --------------------------------------------------------------------------


def initial_privilege_set(unit: ContractUnit) -> PrivilegeSet:
    priv = PrivilegeSet()
    for name, info in unit.state_vars.items():
        t = info.decl_type
        if isinstance(t, ElementaryType) and t.name == "address":
            if info.initialized_at_creation:
                priv.members.add(name)
                priv.how[name] = "address variable set during contract creation"
            elif name in OWNER_NAME_PATTERN:
                priv.members.add(name)
                priv.how[name] = "address variable with an owner-pattern name"
    return priv


def _privilege_mapping_candidates(unit: ContractUnit, exclude: set[str]) -> list[str]:
    out = []
    for name, info in unit.state_vars.items():
        if name in exclude:
            continue
        t = info.decl_type
        if not isinstance(t, MappingType):
            continue
        if not (isinstance(t.key, ElementaryType) and t.key.name == "address"):
            continue
        if not isinstance(t.value, ElementaryType):
            continue
        if t.value.name != "bool" and not t.value.name.startswith("uint"):
            continue
        out.append(name)
    return sorted(out)


def derive_privilege_set(unit: ContractUnit, balance_exclude: set[str] | None = None) -> PrivilegeSet:
    """High-privilege state: creation-set address vars, owner-named address
    vars, and address-keyed mappings whose non-creation writers are all
    limited (joint fixpoint; balance-shaped mappings are excluded)."""
    priv, _, _, _ = analyze_permissions(unit, balance_exclude)
    return priv


def analyze_permissions(
    unit: ContractUnit, balance_exclude: set[str] | None = None
) -> tuple[PrivilegeSet, dict[str, PdgLabels], dict[str, DomInfo], dict[str, PermFacts]]:
    if balance_exclude is None:
        from .sensors import find_balance_mappings

        balance_exclude = find_balance_mappings(unit)
    doms = {sig: dominators_for_cfg(fn.cfg) for sig, fn in unit.functions.items()}
    priv = initial_privilege_set(unit)
    candidates = _privilege_mapping_candidates(unit, balance_exclude)
    while True:
        labels = label_unit(unit, priv)
        facts = derive_perm_facts(unit, labels, doms)
        grown = False
        for name in candidates:
            if name in priv.members:
                continue
            info = unit.state_vars[name]
            writers = [s for s in info.written_by if not unit.functions[s].is_creation_context]
            if all(facts[w].limited for w in writers):
                priv.members.add(name)
                priv.how[name] = (
                    "address-keyed mapping written only during creation"
                    if not writers
                    else f"address-keyed mapping written only by limited functions ({sorted(writers)})"
                )
                grown = True
        if not grown:
            return priv, labels, doms, facts
