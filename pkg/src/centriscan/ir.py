"""Lowering from the AST to analysis-ready contract units.

Responsibilities:
  * inheritance resolution (C3 linearization over the contracts in the file),
  * modifier inlining with argument substitution (pre-`_;` statements end up
    dominating the original body),
  * a synthetic `__creation__` function holding state-variable initializers,
  * implicit getters for public state variables,
  * per-function CFGs, read/write sets, external call sites, and the
    intra-unit call graph.

Identifier reads/writes are tracked by name for every non-local reference,
including names that have no declaration in the file (flattened sources are
the documented precondition, but the analyses stay useful on partial input).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .ast_nodes import (
    ArrayType, AssignExpr, Ast, Block, CallExpr, ContractDecl, ElementaryType,
    EmitStmt, ErrorExpr, EventDecl, Expr, ExprStmt, ForStmt, FunctionDecl,
    GuardAssumption, Ident, IfStmt, IndexAccess, MappingType, MemberAccess,
    ModifierDecl, ModifierInvocation, NewExpr, Param, PlaceholderStmt,
    RequireStmt, ReturnStmt, RevertStmt, StateVarDecl, Stmt, TupleExpr,
    TypeNode, UnaryExpr, UserType, VarBinding, VarDeclStmt, WhileStmt,
    expr_text, is_node, type_text,
)
from .cfg import Cfg, build_cfg
from .lexer import is_type_word
from .source import Diagnostic, SourceFile, Span, WARNING

# Modifier names assumed to be inherited permission checks when the modifier
# itself is not declared in the scanned file.
ASSUMED_GUARD_MODIFIERS = frozenset({"onlyOwner", "onlyAdmin"})

_BUILTIN_ROOTS = frozenset({"msg", "block", "tx", "abi"})
_SELF_ROOTS = frozenset({"this", "super"})
_LOW_LEVEL_MEMBERS = frozenset({"call", "delegatecall", "staticcall"})
_PURE_BUILTIN_CALLEES = frozenset(
    {"keccak256", "sha256", "ripemd160", "ecrecover", "addmod", "mulmod",
     "blockhash", "gasleft", "payable", "type"}
)

CREATION_SIGNATURE = "__creation__()"

# classification results for call expressions
CALL_INTERNAL = "internal"
CALL_EXTERNAL = "external"
CALL_OPAQUE = "opaque"   # library / cast / pure builtin: propagates data, no source
CALL_BUILTIN = "builtin"  # no data dependency at all


@dataclass
class StateVarInfo:
    name: str
    decl_type: TypeNode
    visibility: str
    is_constant: bool
    is_immutable: bool
    initializer: Expr | None
    initialized_at_creation: bool = False
    written_by: set[str] = field(default_factory=set)
    read_by: set[str] = field(default_factory=set)
    origin_contract: str = ""
    span: Span | None = None


@dataclass
class ExternalCallSite:
    site_id: int
    target_expr: str
    callee_name: str
    kind: str  # member-call | low-level | delegatecall | staticcall
    returns_used: bool
    span: Span | None
    function: str  # enclosing function signature


@dataclass
class UnresolvedCall:
    caller: str
    text: str
    span: Span | None


@dataclass
class CallGraph:
    edges: set[tuple[str, str]] = field(default_factory=set)
    unresolved: list[UnresolvedCall] = field(default_factory=list)

    def callees_of(self, sig: str) -> set[str]:
        return {b for a, b in self.edges if a == sig}

    def callers_of(self, sig: str) -> set[str]:
        return {a for a, b in self.edges if b == sig}


@dataclass
class FunctionIR:
    signature: str
    name: str
    kind: str  # function | constructor | fallback | receive | getter | creation
    visibility: str
    mutability: str | None
    params: list[Param]
    returns_: list[Param]
    cfg: Cfg
    reads: set[str] = field(default_factory=set)
    writes: set[str] = field(default_factory=set)
    external_calls: list[ExternalCallSite] = field(default_factory=list)
    local_names: set[str] = field(default_factory=set)
    local_types: dict[str, TypeNode | None] = field(default_factory=dict)
    modifier_names: list[str] = field(default_factory=list)
    origin_contract: str = ""
    is_shadowed: bool = False
    span: Span | None = None

    @property
    def is_constructor(self) -> bool:
        return self.kind == "constructor"

    @property
    def is_creation_context(self) -> bool:
        return self.kind in ("constructor", "creation")

    @property
    def is_public(self) -> bool:
        if self.is_shadowed or self.is_creation_context:
            return False
        return self.visibility in ("public", "external")

    def param_type(self, name: str) -> TypeNode | None:
        for p in self.params:
            if p.name == name:
                return p.type
        return None


@dataclass
class ContractUnit:
    name: str
    kind: str
    bases: list[str]
    linearization: list[str]
    state_vars: dict[str, StateVarInfo]
    functions: dict[str, FunctionIR]
    modifiers: dict[str, ModifierDecl]
    events: dict[str, EventDecl]
    call_graph: CallGraph
    declared_types: dict[str, str]  # name -> contract|interface|library (whole file)
    source: SourceFile | None = None
    span: Span | None = None

    def functions_by_name(self, name: str) -> list[FunctionIR]:
        return [f for f in self.functions.values() if f.name == name and not f.is_shadowed]

    def runtime_functions(self) -> list[FunctionIR]:
        return [f for f in self.functions.values() if not f.is_creation_context and not f.is_shadowed]

    def state_var_type(self, name: str) -> TypeNode | None:
        info = self.state_vars.get(name)
        return info.decl_type if info else None


# --------------------------------------------------------------------------
# generic clone with identifier substitution (modifier inlining)
# --------------------------------------------------------------------------


def clone_node(node, subst: dict[str, Expr], placeholder_hook=None):
    if node is None:
        return None
    if isinstance(node, PlaceholderStmt) and placeholder_hook is not None:
        return placeholder_hook(node)
    if isinstance(node, Ident) and node.name in subst:
        return clone_node(subst[node.name], {})
    if not is_node(node):
        return node
    kwargs = {}
    for f in dataclasses.fields(node):
        v = getattr(node, f.name)
        if is_node(v):
            kwargs[f.name] = clone_node(v, subst, placeholder_hook)
        elif isinstance(v, list):
            kwargs[f.name] = [
                clone_node(item, subst, placeholder_hook) if is_node(item) else item
                for item in v
            ]
        else:
            kwargs[f.name] = v
    return type(node)(**kwargs)


def inline_modifiers(
    decl: FunctionDecl,
    modifiers: dict[str, ModifierDecl],
    base_names: set[str],
    diags: list[Diagnostic],
) -> tuple[list[Stmt], list[str]]:
    """Expand the function body with every invoked modifier, outermost first."""
    effective: list[Stmt] = list(decl.body.statements) if decl.body else []
    applied: list[str] = []
    for inv in reversed(decl.modifiers_invoked):
        if inv.name in base_names:
            continue  # base-constructor invocation, not a modifier
        m = modifiers.get(inv.name)
        if m is None or m.body is None:
            if inv.name in ASSUMED_GUARD_MODIFIERS:
                guard = RequireStmt(
                    cond=GuardAssumption(inv.name, span=inv.span),
                    message=None,
                    span=inv.span,
                )
                effective = [guard] + effective
                applied.append(inv.name)
                diags.append(Diagnostic(
                    WARNING, "assumed-permission-modifier",
                    f"modifier '{inv.name}' is not declared; treated as an inherited permission check",
                    inv.span,
                ))
            else:
                diags.append(Diagnostic(
                    WARNING, "unresolved-modifier",
                    f"modifier '{inv.name}' is not declared; ignored",
                    inv.span,
                ))
            continue
        applied.append(inv.name)
        args = inv.args or []
        subst = {
            p.name: arg for p, arg in zip(m.params, args) if p.name is not None
        }
        placed = {"done": False}
        inner = effective

        def hook(_ph, inner=inner, placed=placed):
            if placed["done"]:
                return Block([], span=_ph.span)
            placed["done"] = True
            return Block(list(inner), span=_ph.span)

        effective = [clone_node(s, subst, hook) for s in m.body.statements]
        if not placed["done"]:
            diags.append(Diagnostic(
                WARNING, "modifier-without-placeholder",
                f"modifier '{inv.name}' has no `_;`; wrapped body is unreachable",
                inv.span,
            ))
    return effective, applied


# --------------------------------------------------------------------------
# linearization
# --------------------------------------------------------------------------


def c3_linearize(name: str, decls: dict[str, ContractDecl], diags: list[Diagnostic]) -> list[str]:
    """C3 linearization; Solidity lists bases most-base-first, so reverse them."""

    def lin(c: str, seen: tuple[str, ...]) -> list[str]:
        if c in seen or c not in decls:
            return [c] if c in decls else []
        parents = [b.name for b in reversed(decls[c].bases) if b.name in decls]
        seqs = [lin(p, seen + (c,)) for p in parents]
        seqs.append(parents)
        result = [c]
        while any(seqs):
            head = None
            for seq in seqs:
                if not seq:
                    continue
                cand = seq[0]
                if all(cand not in s[1:] for s in seqs):
                    head = cand
                    break
            if head is None:  # inconsistent hierarchy: fall back to dfs order
                for seq in seqs:
                    for item in seq:
                        if item not in result:
                            result.append(item)
                return result
            result.append(head)
            for seq in seqs:
                if seq and seq[0] == head:
                    seq.pop(0)
                while head in seq:
                    seq.remove(head)
        return result

    order = lin(name, ())
    decl = decls.get(name)
    if decl:
        for b in decl.bases:
            if b.name not in decls:
                diags.append(Diagnostic(
                    WARNING, "unresolved-base",
                    f"base contract '{b.name}' is not declared in this file; its members are unavailable",
                    b.span,
                ))
    return order


# --------------------------------------------------------------------------
# lowering
# --------------------------------------------------------------------------


def lower(ast: Ast) -> tuple[list[ContractUnit], list[Diagnostic]]:
    """One ContractUnit per non-interface contract declaration."""
    diags: list[Diagnostic] = []
    decls = {c.name: c for c in ast.contracts}
    declared_types = {c.name: c.kind for c in ast.contracts}
    units: list[ContractUnit] = []
    for c in ast.contracts:
        if c.kind == "interface":
            continue
        units.append(_lower_contract(c, decls, declared_types, ast.source, diags))
    return units, diags


def _signature(name: str, params: list[Param]) -> str:
    return f"{name}({','.join(type_text(p.type) for p in params)})"


def _lower_contract(
    decl: ContractDecl,
    decls: dict[str, ContractDecl],
    declared_types: dict[str, str],
    source: SourceFile | None,
    diags: list[Diagnostic],
) -> ContractUnit:
    linearization = c3_linearize(decl.name, decls, diags)
    chain = [decls[n] for n in linearization if n in decls]
    base_names = set(declared_types)

    # materialize members, most-derived first
    state_vars: dict[str, StateVarInfo] = {}
    modifiers: dict[str, ModifierDecl] = {}
    events: dict[str, EventDecl] = {}
    fn_decls: dict[str, tuple[FunctionDecl, str, bool]] = {}  # sig -> (decl, origin, shadowed)
    for contract in chain:
        for sv in contract.state_vars:
            if sv.name not in state_vars:
                state_vars[sv.name] = StateVarInfo(
                    name=sv.name, decl_type=sv.type, visibility=sv.visibility,
                    is_constant=sv.is_constant, is_immutable=sv.is_immutable,
                    initializer=sv.init, origin_contract=contract.name, span=sv.span,
                )
        for m in contract.modifiers:
            if m.name not in modifiers and m.body is not None:
                modifiers[m.name] = m
        for ev in contract.events:
            events.setdefault(ev.name, ev)
        for f in contract.functions:
            if f.kind == "constructor":
                sig = "constructor()" if contract is chain[0] else f"{contract.name}.constructor()"
                if sig not in fn_decls:
                    fn_decls[sig] = (f, contract.name, contract is not chain[0])
                continue
            sig = _signature(f.name, f.params)
            if sig in fn_decls:
                if f.body is not None:
                    shadow_sig = f"{contract.name}.{sig}"
                    fn_decls.setdefault(shadow_sig, (f, contract.name, True))
                continue
            fn_decls[sig] = (f, contract.name, False)

    unit = ContractUnit(
        name=decl.name, kind=decl.kind,
        bases=[b.name for b in decl.bases],
        linearization=linearization,
        state_vars=state_vars, functions={}, modifiers=modifiers, events=events,
        call_graph=CallGraph(), declared_types=declared_types,
        source=source, span=decl.span,
    )

    for sig, (f, origin, shadowed) in fn_decls.items():
        body_stmts, applied = inline_modifiers(f, modifiers, base_names, diags)
        fn = FunctionIR(
            signature=sig,
            name=f.name or f.kind,
            kind=f.kind,
            visibility=f.visibility or ("external" if f.kind in ("fallback", "receive") else
                                        "internal" if f.kind == "constructor" else "public"),
            mutability=f.mutability,
            params=f.params,
            returns_=f.returns_,
            cfg=build_cfg(body_stmts),
            modifier_names=applied,
            origin_contract=origin,
            is_shadowed=shadowed,
            span=f.span,
        )
        _collect_locals(fn, body_stmts)
        unit.functions[sig] = fn

    _add_creation_function(unit, chain)
    _add_implicit_getters(unit)

    for fn in unit.functions.values():
        _collect_effects(fn, unit)

    for name, info in unit.state_vars.items():
        for fn in unit.functions.values():
            if name in fn.reads:
                info.read_by.add(fn.signature)
            if name in fn.writes:
                info.written_by.add(fn.signature)
        info.initialized_at_creation = info.initializer is not None or any(
            name in unit.functions[s].writes
            for s in info.written_by
            if unit.functions[s].is_creation_context
        )

    unit.call_graph = resolve_calls(unit)
    return unit


def _add_creation_function(unit: ContractUnit, chain: list[ContractDecl]) -> None:
    inits: list[Stmt] = []
    for contract in reversed(chain):  # base-first, matching deployment order
        for sv in contract.state_vars:
            info = unit.state_vars.get(sv.name)
            if info is None or info.initializer is None or info.origin_contract != contract.name:
                continue
            assign = AssignExpr("=", Ident(sv.name, span=sv.span), info.initializer,
                                span=info.initializer.span or sv.span)
            inits.append(ExprStmt(assign, span=sv.span))
    if not inits:
        return
    fn = FunctionIR(
        signature=CREATION_SIGNATURE, name="__creation__", kind="creation",
        visibility="internal", mutability=None, params=[], returns_=[],
        cfg=build_cfg(inits), origin_contract=unit.name, span=unit.span,
    )
    _collect_locals(fn, inits)
    unit.functions[CREATION_SIGNATURE] = fn


def _getter_signature(name: str, t: TypeNode) -> tuple[str, list[Param], list[Param]]:
    keys: list[Param] = []
    value = t
    while isinstance(value, MappingType):
        keys.append(Param(value.key, f"key{len(keys)}", span=value.span))
        value = value.value
    if isinstance(value, ArrayType):
        keys.append(Param(ElementaryType("uint256", span=value.span), f"key{len(keys)}", span=value.span))
        value = value.base
    sig = _signature(name, keys)
    return sig, keys, [Param(value, None, span=getattr(value, "span", None))]


def _add_implicit_getters(unit: ContractUnit) -> None:
    taken_names = {f.name for f in unit.functions.values()}
    for name, info in unit.state_vars.items():
        if info.visibility != "public" or name in taken_names:
            continue
        sig, keys, rets = _getter_signature(name, info.decl_type)
        body: list[Stmt] = [ReturnStmt(Ident(name, span=info.span), span=info.span)]
        fn = FunctionIR(
            signature=sig, name=name, kind="getter", visibility="public",
            mutability="view", params=keys, returns_=rets,
            cfg=build_cfg(body), origin_contract=info.origin_contract, span=info.span,
        )
        _collect_locals(fn, body)
        unit.functions[sig] = fn


# --------------------------------------------------------------------------
# locals / effects
# --------------------------------------------------------------------------


def _collect_locals(fn: FunctionIR, body: list[Stmt]) -> None:
    names: dict[str, TypeNode | None] = {}
    for p in fn.params:
        if p.name:
            names[p.name] = p.type
    for r in fn.returns_:
        if r.name:
            names[r.name] = r.type

    def visit(node) -> None:
        if isinstance(node, VarDeclStmt):
            for b in node.bindings:
                if b is not None:
                    names[b.name] = b.type
        for child in _stmt_children(node):
            visit(child)

    for st in body:
        visit(st)
    fn.local_names = set(names)
    fn.local_types = names


def _stmt_children(node):
    if isinstance(node, Block):
        return node.statements
    if isinstance(node, IfStmt):
        return [node.then] + ([node.orelse] if node.orelse else [])
    if isinstance(node, WhileStmt):
        return [node.body]
    if isinstance(node, ForStmt):
        return ([node.init] if node.init else []) + [node.body]
    return []


def _lvalue_roots(e: Expr) -> list[tuple[str, list[Expr]]]:
    """Base identifier(s) written by an assignment target, plus read subexprs."""
    if isinstance(e, Ident):
        return [(e.name, [])]
    if isinstance(e, IndexAccess):
        inner = _lvalue_roots(e.obj)
        return [(n, extra + [e.index]) for n, extra in inner]
    if isinstance(e, MemberAccess):
        if isinstance(e.obj, Ident) and e.obj.name in _BUILTIN_ROOTS | _SELF_ROOTS:
            return []
        return _lvalue_roots(e.obj)
    if isinstance(e, TupleExpr):
        out = []
        for item in e.items:
            if item is not None:
                out.extend(_lvalue_roots(item))
        return out
    return []


def iter_function_exprs(fn: FunctionIR):
    """Every top-level expression in the function: statements plus branch conditions."""
    for block in fn.cfg.blocks.values():
        for st in block.statements:
            if isinstance(st, ExprStmt):
                yield st.expr
            elif isinstance(st, VarDeclStmt) and st.init is not None:
                yield st.init
            elif isinstance(st, ReturnStmt) and st.value is not None:
                yield st.value
            elif isinstance(st, RevertStmt):
                yield from st.args
            elif isinstance(st, EmitStmt):
                yield from st.call.args
        for cond in fn.cfg.block_conditions(block.id):
            yield cond


def _collect_effects(fn: FunctionIR, unit: ContractUnit) -> None:
    reads: set[str] = set()
    writes: set[str] = set()
    sites: list[ExternalCallSite] = []
    counter = [0]

    skip_names = fn.local_names | _BUILTIN_ROOTS | _SELF_ROOTS | {"true", "false"}

    def note_read(name: str) -> None:
        if name not in skip_names and not is_type_word(name):
            reads.add(name)

    def note_write(name: str) -> None:
        if name not in skip_names and not is_type_word(name):
            writes.add(name)

    def visit(e: Expr | None, value_used: bool = True) -> None:
        if e is None or isinstance(e, ErrorExpr):
            return
        if isinstance(e, Ident):
            note_read(e.name)
            return
        if isinstance(e, MemberAccess):
            if isinstance(e.obj, Ident) and e.obj.name in _BUILTIN_ROOTS | _SELF_ROOTS:
                return
            visit(e.obj)
            return
        if isinstance(e, IndexAccess):
            visit(e.obj)
            visit(e.index)
            return
        if isinstance(e, AssignExpr):
            for root, extras in _lvalue_roots(e.target):
                note_write(root)
                if e.op != "=":
                    note_read(root)
                for extra in extras:
                    visit(extra)
            visit(e.value)
            return
        if isinstance(e, UnaryExpr):
            if e.op in ("++", "--", "delete"):
                for root, extras in _lvalue_roots(e.operand):
                    note_write(root)
                    if e.op != "delete":
                        note_read(root)
                    for extra in extras:
                        visit(extra)
                return
            visit(e.operand)
            return
        if isinstance(e, CallExpr):
            cls, detail = classify_call(e, fn, unit)
            if cls == CALL_EXTERNAL:
                kind, target_text, callee_name = detail
                sites.append(ExternalCallSite(
                    site_id=counter[0], target_expr=target_text, callee_name=callee_name,
                    kind=kind, returns_used=value_used, span=e.span, function=fn.signature,
                ))
                counter[0] += 1
            if isinstance(e.callee, (MemberAccess, IndexAccess)):
                visit(e.callee.obj if isinstance(e.callee, MemberAccess) else e.callee)
            for a in e.args:
                visit(a)
            return
        for child in _expr_children(e):
            visit(child)

    for block in fn.cfg.blocks.values():
        for st in block.statements:
            if isinstance(st, ExprStmt):
                visit(st.expr, value_used=not isinstance(st.expr, CallExpr))
            elif isinstance(st, VarDeclStmt):
                visit(st.init)
            elif isinstance(st, ReturnStmt):
                visit(st.value)
            elif isinstance(st, RevertStmt):
                for a in st.args:
                    visit(a)
            elif isinstance(st, EmitStmt):
                for a in st.call.args:
                    visit(a)
        for cond in fn.cfg.block_conditions(block.id):
            visit(cond)

    fn.reads = reads
    fn.writes = writes
    fn.external_calls = sites


def _expr_children(e: Expr):
    for f in dataclasses.fields(e):
        if f.name == "span":
            continue
        v = getattr(e, f.name)
        if is_node(v):
            yield v
        elif isinstance(v, list):
            for item in v:
                if is_node(item):
                    yield item


# --------------------------------------------------------------------------
# call classification
# --------------------------------------------------------------------------


def _root_ident(e: Expr) -> Ident | None:
    while True:
        if isinstance(e, Ident):
            return e
        if isinstance(e, (MemberAccess, IndexAccess)):
            e = e.obj
            continue
        if isinstance(e, CallExpr):
            e = e.callee
            continue
        return None


def _ident_type(name: str, fn: FunctionIR, unit: ContractUnit) -> TypeNode | None:
    if name in fn.local_types:
        return fn.local_types[name]
    info = unit.state_vars.get(name)
    return info.decl_type if info else None


def _target_class(obj: Expr, fn: FunctionIR, unit: ContractUnit) -> str:
    """builtin | internal | elementary | library | contract for a member-call target."""
    if isinstance(obj, Ident):
        if obj.name in _BUILTIN_ROOTS:
            return "builtin"
        if obj.name in _SELF_ROOTS:
            return "internal"
        if is_type_word(obj.name):
            return "elementary"
        t = _ident_type(obj.name, fn, unit)
        if t is not None:
            if isinstance(t, ElementaryType):
                return "elementary"
            if isinstance(t, (MappingType, ArrayType)):
                return "elementary"
            if isinstance(t, UserType):
                return "library" if unit.declared_types.get(t.name) == "library" else "contract"
            return "contract"
        if unit.declared_types.get(obj.name) == "library":
            return "library"
        if obj.name in unit.declared_types:
            return "contract"
        # undeclared: PascalCase reads as a library/util type, otherwise an instance
        return "library" if obj.name[:1].isupper() else "contract"
    if isinstance(obj, CallExpr) and isinstance(obj.callee, Ident):
        name = obj.callee.name
        if is_type_word(name) or name == "payable":
            return "elementary"
        if unit.declared_types.get(name) == "library":
            return "library"
        return "contract"  # interface/contract cast: IERC20(x).f()
    root = _root_ident(obj)
    if root is None:
        return "contract"
    if root.name in _BUILTIN_ROOTS:
        return "builtin"
    if root.name in _SELF_ROOTS:
        return "internal"
    return _target_class(root, fn, unit) if isinstance(obj, (MemberAccess, IndexAccess)) else "contract"


def classify_call(call: CallExpr, fn: FunctionIR, unit: ContractUnit):
    """Classify a call expression; detail depends on the class.

    internal -> (resolved signature or None)
    external -> (kind, target_text, callee_name)
    opaque/builtin -> None
    """
    callee = call.callee
    if isinstance(callee, Ident):
        name = callee.name
        if name == "selfdestruct" or name in ("require", "assert"):
            return CALL_BUILTIN, None
        if is_type_word(name) or name in _PURE_BUILTIN_CALLEES:
            return CALL_OPAQUE, None
        if unit.functions_by_name(name):
            return CALL_INTERNAL, _resolve_by_name(name, len(call.args), unit)
        if name in unit.declared_types:
            return CALL_OPAQUE, None  # bare contract-type cast
        return CALL_OPAQUE, None  # unknown free function: propagate, no source
    if isinstance(callee, NewExpr):
        return CALL_OPAQUE, None
    if isinstance(callee, MemberAccess):
        member = callee.member
        obj = callee.obj
        if isinstance(obj, Ident) and obj.name == "this":
            if unit.functions_by_name(member):
                return CALL_INTERNAL, _resolve_by_name(member, len(call.args), unit)
            return CALL_OPAQUE, None
        if isinstance(obj, Ident) and obj.name == "super":
            return CALL_INTERNAL, _resolve_super(member, len(call.args), fn, unit)
        if member in _LOW_LEVEL_MEMBERS:
            kind = "low-level" if member == "call" else member
            name = "low-level" if member == "call" else member
            return CALL_EXTERNAL, (kind, expr_text(obj), name)
        cls = _target_class(obj, fn, unit)
        if cls == "builtin":
            return CALL_BUILTIN, None
        if cls == "internal":
            return CALL_OPAQUE, None
        if cls in ("elementary", "library"):
            return CALL_OPAQUE, None
        if cls == "contract" and isinstance(obj, Ident):
            t = _ident_type(obj.name, fn, unit)
            if t is None and obj.name not in unit.declared_types and member in ("transfer", "send"):
                # bare name with value-transfer member: assume address payable
                return CALL_BUILTIN, None
        return CALL_EXTERNAL, ("member-call", expr_text(obj), member)
    return CALL_OPAQUE, None


def _resolve_by_name(name: str, arity: int, unit: ContractUnit) -> str | None:
    candidates = [f for f in unit.functions_by_name(name)]
    exact = [f for f in candidates if len(f.params) == arity]
    pool = exact or candidates
    if len(pool) == 1:
        return pool[0].signature
    return None


def _resolve_super(name: str, arity: int, fn: FunctionIR, unit: ContractUnit) -> str | None:
    try:
        start = unit.linearization.index(fn.origin_contract) + 1
    except ValueError:
        start = 1
    for base in unit.linearization[start:]:
        for sig, cand in unit.functions.items():
            if cand.name == name and cand.origin_contract == base and len(cand.params) == arity:
                return sig
    return None


def resolve_calls(unit: ContractUnit) -> CallGraph:
    """Intra-unit call edges by direct name, `this.f`, and `super.f`."""
    graph = CallGraph()
    for fn in unit.functions.values():
        for expr in iter_function_exprs(fn):
            for node in _walk_expr(expr):
                if not isinstance(node, CallExpr):
                    continue
                cls, detail = classify_call(node, fn, unit)
                if cls == CALL_INTERNAL:
                    if detail is not None:
                        graph.edges.add((fn.signature, detail))
                    else:
                        graph.unresolved.append(UnresolvedCall(fn.signature, expr_text(node), node.span))
                elif cls == CALL_EXTERNAL:
                    graph.unresolved.append(UnresolvedCall(fn.signature, expr_text(node), node.span))
    return graph


def _walk_expr(e: Expr):
    yield e
    for child in _expr_children(e):
        yield from _walk_expr(child)
