"""Sensitive-operation detection: token minting, critical-variable writes,
proxy upgrades, self-destruct, and external-output taint.

Token recognition is deliberately tighter than a bare mapping-shape match:
a mapping(address=>uint) qualifies as a balance table only with a balanceOf
reader, a transfer-style increase/decrease flow, or a balance-pattern name
combined with an arithmetic increase. Plain overwrites (`m[k] = v`) never
count as mints, so registries of address=>code mappings stay out.

Taint is flow- and key-insensitive: sources are the used return values of
external calls (member calls on contract-typed targets and low-level calls);
they propagate through locals, arithmetic, intra-unit calls, and into state
variable writes, including declaration initializers which execute at
creation. Library-style calls (PascalCase targets, casts, pure builtins)
forward the taint of their arguments without becoming sources themselves.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ast_nodes import (
    AssignExpr, BinaryExpr, CallExpr, ElementaryType, EmitStmt, Expr, ExprStmt,
    Ident, IndexAccess, MappingType, MemberAccess, NumberLit, ReturnStmt,
    TernaryExpr, TupleExpr, UnaryExpr, VarDeclStmt, expr_text, is_uint_type,
    walk_exprs,
)
from .cfg import SELFDESTRUCT
from .ir import (
    CALL_EXTERNAL, CALL_INTERNAL, CALL_OPAQUE, ContractUnit, FunctionIR,
    classify_call, iter_function_exprs,
)
from .source import Span

EIP1967_IMPLEMENTATION_SLOT = "0x360894a13ba1a3210667c828492db98dca3e2076cc3735a920a3ca505d382bbc"
UPGRADE_HELPERS = frozenset({"upgradeTo", "upgradeToAndCall"})

_BALANCE_NAME = re.compile(r"balance", re.IGNORECASE)
_TRANSFER_FN_NAMES = frozenset({"transfer", "transferFrom"})


@dataclass
class Evidence:
    span: Span | None
    description: str

    def to_dict(self) -> dict:
        return {"span": self.span.to_dict() if self.span else None, "description": self.description}


@dataclass
class FunctionSensitives:
    mint: bool = False
    modify_crit_vars: set[str] = field(default_factory=set)
    change_impl: bool = False
    selfdestruct: bool = False


@dataclass
class SensitiveFacts:
    is_token: bool = False
    balance_vars: set[str] = field(default_factory=set)
    is_proxy: bool = False
    impl_vars: set[str] = field(default_factory=set)
    critical_vars: set[str] = field(default_factory=set)
    per_function: dict[str, FunctionSensitives] = field(default_factory=dict)
    evidence: dict[str, list[Evidence]] = field(default_factory=dict)

    def fn(self, sig: str) -> FunctionSensitives:
        return self.per_function.setdefault(sig, FunctionSensitives())


@dataclass(frozen=True)
class SourceKey:
    target: str
    callee: str
    site: int | None = None  # populated only in distinct-sites mode

    def to_dict(self) -> dict:
        d = {"target": self.target, "callee": self.callee}
        if self.site is not None:
            d["site"] = self.site
        return d


@dataclass
class TaintFact:
    var: str
    sources: set[SourceKey] = field(default_factory=set)
    path: list[Evidence] = field(default_factory=list)


# --------------------------------------------------------------------------
# balance flows / token shape
# --------------------------------------------------------------------------

INCREASE = "increase"
DECREASE = "decrease"
OVERWRITE = "overwrite"


def _rhs_flavor(expr: Expr) -> set[str]:
    """Arithmetic direction signals in an assigned value."""
    out: set[str] = set()
    for node in walk_exprs(expr):
        if isinstance(node, BinaryExpr):
            if node.op == "+":
                out.add(INCREASE)
            elif node.op == "-":
                out.add(DECREASE)
        elif isinstance(node, CallExpr) and isinstance(node.callee, MemberAccess):
            if node.callee.member == "add":
                out.add(INCREASE)
            elif node.callee.member == "sub":
                out.add(DECREASE)
        elif isinstance(node, CallExpr) and isinstance(node.callee, Ident):
            if node.callee.name == "add":
                out.add(INCREASE)
            elif node.callee.name == "sub":
                out.add(DECREASE)
    return out


def balance_flow_events(fn: FunctionIR, candidates: set[str]) -> list[tuple[str, str, Span | None]]:
    """(var, INCREASE|DECREASE|OVERWRITE, span) for entry-level writes to candidate mappings."""
    events: list[tuple[str, str, Span | None]] = []
    for block in fn.cfg.blocks.values():
        for st in block.statements:
            exprs: list[Expr] = []
            if isinstance(st, ExprStmt):
                exprs.append(st.expr)
            elif isinstance(st, VarDeclStmt) and st.init is not None:
                exprs.append(st.init)
            for e in exprs:
                for node in walk_exprs(e):
                    if not isinstance(node, AssignExpr):
                        continue
                    target = node.target
                    if not (isinstance(target, IndexAccess) and isinstance(target.obj, Ident)):
                        continue
                    var = target.obj.name
                    if var not in candidates or var in fn.local_names:
                        continue
                    if node.op == "+=":
                        events.append((var, INCREASE, node.span))
                    elif node.op == "-=":
                        events.append((var, DECREASE, node.span))
                    elif node.op == "=":
                        flavors = _rhs_flavor(node.value)
                        if INCREASE in flavors:
                            events.append((var, INCREASE, node.span))
                        if DECREASE in flavors:
                            events.append((var, DECREASE, node.span))
                        if not flavors:
                            events.append((var, OVERWRITE, node.span))
    return events


def _uint_mapping_vars(unit: ContractUnit) -> set[str]:
    out = set()
    for name, info in unit.state_vars.items():
        t = info.decl_type
        if (
            isinstance(t, MappingType)
            and isinstance(t.key, ElementaryType)
            and t.key.name == "address"
            and isinstance(t.value, ElementaryType)
            and t.value.name.startswith("uint")
        ):
            out.add(name)
    return out


def _has_transfer_event(unit: ContractUnit) -> bool:
    ev = unit.events.get("Transfer")
    if ev is not None and len(ev.params) == 3:
        return True
    for fn in unit.functions.values():
        for block in fn.cfg.blocks.values():
            for st in block.statements:
                if isinstance(st, EmitStmt) and isinstance(st.call.callee, Ident):
                    if st.call.callee.name == "Transfer" and len(st.call.args) == 3:
                        return True
    return False


def find_balance_mappings(unit: ContractUnit) -> set[str]:
    """Mappings that look like fungible-token balance tables."""
    candidates = _uint_mapping_vars(unit)
    if not candidates:
        return set()
    found: set[str] = set()

    for fn in unit.runtime_functions():
        if fn.name == "balanceOf" and fn.returns_ and is_uint_type(fn.returns_[0].type):
            found.update(fn.reads & candidates)

    flows: dict[str, set[str]] = {v: set() for v in candidates}
    transfer_flow_vars: set[str] = set()
    has_event = _has_transfer_event(unit)
    for fn in unit.runtime_functions():
        events = balance_flow_events(fn, candidates)
        for var, kind, _span in events:
            flows[var].add(kind)
            if fn.name in _TRANSFER_FN_NAMES or has_event:
                transfer_flow_vars.add(var)
    for var in candidates:
        if INCREASE in flows[var] and DECREASE in flows[var] and var in transfer_flow_vars:
            found.add(var)
        elif _BALANCE_NAME.search(var) and INCREASE in flows[var]:
            found.add(var)
    return found


def detect_token(unit: ContractUnit) -> tuple[bool, set[str], list[Evidence]]:
    balance_vars = find_balance_mappings(unit)
    ev: list[Evidence] = []
    for var in sorted(balance_vars):
        info = unit.state_vars[var]
        ev.append(Evidence(info.span, f"balance table '{var}' (mapping address=>uint)"))
    return bool(balance_vars), balance_vars, ev


def detect_mint(fn: FunctionIR, balance_vars: set[str]) -> tuple[bool, list[Evidence]]:
    """Mint: increases a balance entry with no paired decrease anywhere in the function."""
    if fn.is_creation_context:
        return False, []
    events = balance_flow_events(fn, balance_vars)
    increases = [(v, s) for v, k, s in events if k == INCREASE]
    decreases = [(v, s) for v, k, s in events if k == DECREASE]
    if increases and not decreases:
        ev = [Evidence(s, f"balance of '{v}' increased without any decrease") for v, s in increases]
        return True, ev
    return False, []


# --------------------------------------------------------------------------
# critical variables
# --------------------------------------------------------------------------


def detect_critical_vars(
    unit: ContractUnit, balance_vars: set[str], exclude: set[str] | None = None
) -> set[str]:
    """State stored at deployment whose value feeds runtime logic: any declared
    state variable read by at least one runtime function, minus balance tables
    (and minus the privilege set when configured)."""
    exclude = exclude or set()
    critical: set[str] = set()
    runtime_sigs = {f.signature for f in unit.runtime_functions()}
    for name, info in unit.state_vars.items():
        if name in balance_vars or name in exclude:
            continue
        if info.read_by & runtime_sigs:
            critical.add(name)
    return critical


def detect_modify_crit(fn: FunctionIR, critical_vars: set[str]) -> set[str]:
    if fn.is_creation_context:
        return set()
    return critical_vars & fn.writes


# --------------------------------------------------------------------------
# proxy shape
# --------------------------------------------------------------------------


def _mentions_impl_slot(expr: Expr) -> bool:
    return any(
        isinstance(n, NumberLit) and n.text.lower() == EIP1967_IMPLEMENTATION_SLOT
        for n in walk_exprs(expr)
    )


def _upgrade_helper_calls(fn: FunctionIR, unit: ContractUnit) -> list[tuple[str, Span | None]]:
    out = []
    for expr in iter_function_exprs(fn):
        for node in walk_exprs(expr):
            if not isinstance(node, CallExpr):
                continue
            name = None
            if isinstance(node.callee, Ident):
                name = node.callee.name
            elif isinstance(node.callee, MemberAccess):
                name = node.callee.member
            if name in UPGRADE_HELPERS:
                cls, _ = classify_call(node, fn, unit)
                if cls != CALL_INTERNAL:  # own functions named upgradeTo are not helpers
                    out.append((name, node.span))
    return out


def detect_proxy(unit: ContractUnit) -> tuple[bool, set[str], list[Evidence]]:
    impl_vars: set[str] = set()
    ev: list[Evidence] = []

    for fn in unit.functions.values():
        if fn.kind not in ("fallback", "receive"):
            continue
        defs: dict[str, Expr] = {}
        for block in fn.cfg.blocks.values():
            for st in block.statements:
                if isinstance(st, VarDeclStmt) and st.init is not None:
                    for b in st.bindings:
                        if b is not None:
                            defs[b.name] = st.init
        for expr in iter_function_exprs(fn):
            for node in walk_exprs(expr):
                if not (
                    isinstance(node, CallExpr)
                    and isinstance(node.callee, MemberAccess)
                    and node.callee.member == "delegatecall"
                ):
                    continue
                target = node.callee.obj
                roots = {n.name for n in walk_exprs(target) if isinstance(n, Ident)}
                for name in sorted(roots):
                    expanded = defs.get(name)
                    if name in unit.state_vars:
                        impl_vars.add(name)
                        ev.append(Evidence(node.span, f"fallback delegates to state variable '{name}'"))
                    elif expanded is not None:
                        for sub in walk_exprs(expanded):
                            if isinstance(sub, Ident) and sub.name in unit.state_vars:
                                impl_vars.add(sub.name)
                                ev.append(Evidence(node.span, f"fallback delegates via '{name}' = {expr_text(expanded)}"))
                if _mentions_impl_slot(target) or any(
                    _mentions_impl_slot(d) for d in defs.values()
                ):
                    ev.append(Evidence(node.span, "fallback delegates through the canonical implementation slot"))
                    impl_vars.add("<implementation-slot>")

    slot_holders = set()
    for name, info in unit.state_vars.items():
        if info.initializer is not None and _mentions_impl_slot(info.initializer):
            slot_holders.add(name)
            ev.append(Evidence(info.span, f"state constant '{name}' holds the canonical implementation slot"))
    impl_vars.update(slot_holders)

    helper_called = False
    for fn in unit.runtime_functions():
        for name, span in _upgrade_helper_calls(fn, unit):
            helper_called = True
            ev.append(Evidence(span, f"calls upgrade helper {name}()"))

    is_proxy = bool(impl_vars) or helper_called
    return is_proxy, {v for v in impl_vars}, ev


def detect_change_impl(fn: FunctionIR, impl_vars: set[str], unit: ContractUnit) -> tuple[bool, list[Evidence]]:
    if fn.is_creation_context:
        return False, []
    ev: list[Evidence] = []
    written = fn.writes & impl_vars
    for name in sorted(written):
        ev.append(Evidence(fn.span, f"writes implementation variable '{name}'"))
    for name, span in _upgrade_helper_calls(fn, unit):
        ev.append(Evidence(span, f"calls upgrade helper {name}()"))
    return bool(ev), ev


# --------------------------------------------------------------------------
# selfdestruct
# --------------------------------------------------------------------------


def detect_selfdestruct(fn: FunctionIR) -> tuple[bool, list[Evidence]]:
    for block in fn.cfg.blocks.values():
        if block.terminator.kind == SELFDESTRUCT:
            return True, [Evidence(block.terminator.span, "self-destruct operation")]
    return False, []


# --------------------------------------------------------------------------
# external-output taint
# --------------------------------------------------------------------------


class _TaintEngine:
    def __init__(self, unit: ContractUnit, distinct_sites: bool):
        self.unit = unit
        self.distinct_sites = distinct_sites
        self.var_taint: dict[str, set[SourceKey]] = {}
        self.ret_taint: dict[str, set[SourceKey]] = {}
        self.param_taint: dict[tuple[str, str], set[SourceKey]] = {}
        self.validated: set[SourceKey] = set()
        self.paths: dict[str, list[Evidence]] = {}
        self.changed = False
        self._site_counter = 0
        self._site_ids: dict[int, int] = {}  # id(node) -> stable site id

    def _key_for(self, call: CallExpr, target: str, callee: str) -> SourceKey:
        if not self.distinct_sites:
            return SourceKey(target, callee)
        nid = id(call)
        if nid not in self._site_ids:
            self._site_ids[nid] = self._site_counter
            self._site_counter += 1
        return SourceKey(target, callee, self._site_ids[nid])

    def run(self) -> None:
        for _ in range(len(self.unit.functions) + len(self.unit.state_vars) + 3):
            self.changed = False
            for fn in self.unit.functions.values():
                self._run_function(fn)
            if not self.changed:
                break

    def _run_function(self, fn: FunctionIR) -> None:
        locals_: dict[str, set[SourceKey]] = {}
        for p in fn.params:
            if p.name:
                got = self.param_taint.get((fn.signature, p.name))
                if got:
                    locals_[p.name] = set(got)

        def eval_expr(e: Expr | None) -> set[SourceKey]:
            if e is None:
                return set()
            if isinstance(e, Ident):
                if e.name in locals_:
                    return set(locals_[e.name])
                if e.name in self.unit.state_vars:
                    return set(self.var_taint.get(e.name, set()))
                return set()
            if isinstance(e, MemberAccess):
                if isinstance(e.obj, Ident) and e.obj.name in ("msg", "block", "tx", "abi"):
                    return set()
                return eval_expr(e.obj)
            if isinstance(e, IndexAccess):
                return eval_expr(e.obj) | eval_expr(e.index)
            if isinstance(e, CallExpr):
                return self._eval_call(e, fn, eval_expr)
            if isinstance(e, BinaryExpr):
                return eval_expr(e.left) | eval_expr(e.right)
            if isinstance(e, UnaryExpr):
                return eval_expr(e.operand)
            if isinstance(e, TernaryExpr):
                return eval_expr(e.cond) | eval_expr(e.then) | eval_expr(e.other)
            if isinstance(e, TupleExpr):
                out: set[SourceKey] = set()
                for item in e.items:
                    if item is not None:
                        out |= eval_expr(item)
                return out
            if isinstance(e, AssignExpr):
                return eval_expr(e.value)
            return set()

        def assign_to(target: Expr, taint: set[SourceKey], span: Span | None, rhs_desc: str) -> None:
            if isinstance(target, TupleExpr):
                for item in target.items:
                    if item is not None:
                        assign_to(item, taint, span, rhs_desc)
                return
            base = target
            while isinstance(base, (IndexAccess, MemberAccess)):
                base = base.obj
            if not isinstance(base, Ident):
                return
            name = base.name
            if name in fn.local_names:
                if taint - locals_.get(name, set()):
                    locals_[name] = locals_.get(name, set()) | taint
                return
            if name in self.unit.state_vars:
                cur = self.var_taint.setdefault(name, set())
                new = taint - cur
                if new:
                    cur.update(new)
                    self.changed = True
                    self.paths.setdefault(name, []).append(
                        Evidence(span, f"'{name}' assigned from {rhs_desc} in {fn.signature}")
                    )

        for block in fn.cfg.blocks.values():
            for st in block.statements:
                if isinstance(st, VarDeclStmt):
                    taint = eval_expr(st.init)
                    if taint:
                        for b in st.bindings:
                            if b is not None and taint - locals_.get(b.name, set()):
                                locals_[b.name] = locals_.get(b.name, set()) | taint
                elif isinstance(st, ExprStmt):
                    for node in walk_exprs(st.expr):
                        if isinstance(node, AssignExpr):
                            taint = eval_expr(node.value)
                            if node.op != "=":
                                taint |= eval_expr(node.target)
                            if taint:
                                assign_to(node.target, taint, node.span, expr_text(node.value))
                        elif isinstance(node, CallExpr):
                            self._bind_args(node, fn, eval_expr)
                elif isinstance(st, ReturnStmt) and st.value is not None:
                    taint = eval_expr(st.value)
                    cur = self.ret_taint.setdefault(fn.signature, set())
                    if taint - cur:
                        cur.update(taint)
                        self.changed = True
            for cond in fn.cfg.block_conditions(block.id):
                got = eval_expr(cond)
                if got - self.validated:
                    self.validated.update(got)

        # named return parameters accumulate like locals
        ret_names = [r.name for r in fn.returns_ if r.name]
        if ret_names:
            out: set[SourceKey] = set()
            for n in ret_names:
                out |= locals_.get(n, set())
            cur = self.ret_taint.setdefault(fn.signature, set())
            if out - cur:
                cur.update(out)
                self.changed = True

    def _bind_args(self, call: CallExpr, fn: FunctionIR, eval_expr) -> None:
        cls, detail = classify_call(call, fn, self.unit)
        if cls != CALL_INTERNAL or detail is None:
            return
        callee = self.unit.functions.get(detail)
        if callee is None:
            return
        for p, arg in zip(callee.params, call.args):
            if p.name is None:
                continue
            taint = eval_expr(arg)
            if not taint:
                continue
            key = (callee.signature, p.name)
            cur = self.param_taint.setdefault(key, set())
            if taint - cur:
                cur.update(taint)
                self.changed = True

    def _eval_call(self, call: CallExpr, fn: FunctionIR, eval_expr) -> set[SourceKey]:
        self._bind_args(call, fn, eval_expr)
        arg_taint: set[SourceKey] = set()
        for a in call.args:
            arg_taint |= eval_expr(a)
        cls, detail = classify_call(call, fn, self.unit)
        if cls == CALL_INTERNAL and detail is not None:
            return set(self.ret_taint.get(detail, set())) | arg_taint
        if cls == CALL_EXTERNAL:
            kind, target, callee_name = detail
            obj_taint = set()
            if isinstance(call.callee, MemberAccess):
                obj_taint = eval_expr(call.callee.obj)
            return {self._key_for(call, target, callee_name)} | arg_taint | obj_taint
        if cls == CALL_OPAQUE:
            obj_taint = set()
            if isinstance(call.callee, MemberAccess):
                obj_taint = eval_expr(call.callee.obj)
            return arg_taint | obj_taint
        return set()


def taint_outputs(
    unit: ContractUnit, distinct_sites: bool = False
) -> tuple[list[TaintFact], set[SourceKey]]:
    """Per state variable, the distinct external-output sources reaching any
    of its writes; also returns the sources that flow into some branch
    condition (used by the guard-respecting mode)."""
    engine = _TaintEngine(unit, distinct_sites)
    engine.run()
    facts = []
    for name in sorted(engine.var_taint):
        if name not in unit.state_vars:
            continue
        sources = engine.var_taint[name]
        if sources:
            facts.append(TaintFact(var=name, sources=set(sources), path=engine.paths.get(name, [])))
    return facts, engine.validated


# --------------------------------------------------------------------------
# aggregation
# --------------------------------------------------------------------------


def compute_sensitive_facts(
    unit: ContractUnit, exclude_privilege_vars: set[str] | None = None
) -> SensitiveFacts:
    facts = SensitiveFacts()
    facts.is_token, facts.balance_vars, token_ev = detect_token(unit)
    if token_ev:
        facts.evidence["token"] = token_ev
    facts.is_proxy, facts.impl_vars, proxy_ev = detect_proxy(unit)
    if proxy_ev:
        facts.evidence["proxy"] = proxy_ev
    facts.critical_vars = detect_critical_vars(unit, facts.balance_vars, exclude_privilege_vars)

    for sig, fn in unit.functions.items():
        fs = facts.fn(sig)
        if facts.is_token:
            fs.mint, mint_ev = detect_mint(fn, facts.balance_vars)
            if mint_ev:
                facts.evidence[f"mint:{sig}"] = mint_ev
        fs.modify_crit_vars = detect_modify_crit(fn, facts.critical_vars)
        fs.change_impl, ci_ev = detect_change_impl(fn, facts.impl_vars, unit)
        if ci_ev:
            facts.evidence[f"change-impl:{sig}"] = ci_ev
        fs.selfdestruct, sd_ev = detect_selfdestruct(fn)
        if sd_ev:
            facts.evidence[f"selfdestruct:{sig}"] = sd_ev
    return facts
