"""AST node definitions for the supported Solidity subset.

Every node carries a Span. Nodes are plain dataclasses; `children()` yields
nested nodes generically (used for span invariants, cloning, and walkers).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .source import Diagnostic, SourceFile, Span

# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------


@dataclass
class ElementaryType:
    name: str  # uint256, address, bool, bytes32, string, ...
    payable: bool = False
    span: Span = None  # type: ignore[assignment]


@dataclass
class MappingType:
    key: "TypeNode"
    value: "TypeNode"
    span: Span = None  # type: ignore[assignment]


@dataclass
class ArrayType:
    base: "TypeNode"
    length: Optional["Expr"] = None
    span: Span = None  # type: ignore[assignment]


@dataclass
class UserType:
    name: str  # possibly dotted: A.B
    span: Span = None  # type: ignore[assignment]


TypeNode = Union[ElementaryType, MappingType, ArrayType, UserType]


def type_text(t: TypeNode | None) -> str:
    if t is None:
        return "?"
    if isinstance(t, ElementaryType):
        return t.name + (" payable" if t.payable else "")
    if isinstance(t, MappingType):
        return f"mapping({type_text(t.key)}=>{type_text(t.value)})"
    if isinstance(t, ArrayType):
        return type_text(t.base) + "[]"
    return t.name


def is_uint_type(t: TypeNode | None) -> bool:
    return isinstance(t, ElementaryType) and (t.name.startswith("uint") or t.name.startswith("int"))


def is_address_type(t: TypeNode | None) -> bool:
    return isinstance(t, ElementaryType) and t.name == "address"


def is_bytes_array_type(t: TypeNode | None) -> bool:
    """bytes[] — one caller-supplied blob per signer."""
    return isinstance(t, ArrayType) and isinstance(t.base, ElementaryType) and t.base.name.startswith("bytes")


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------


@dataclass
class Ident:
    name: str
    span: Span = None  # type: ignore[assignment]


@dataclass
class MemberAccess:
    obj: "Expr"
    member: str
    span: Span = None  # type: ignore[assignment]


@dataclass
class IndexAccess:
    obj: "Expr"
    index: "Expr"
    span: Span = None  # type: ignore[assignment]


@dataclass
class CallExpr:
    callee: "Expr"
    args: list["Expr"] = field(default_factory=list)
    span: Span = None  # type: ignore[assignment]


@dataclass
class BinaryExpr:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = None  # type: ignore[assignment]


@dataclass
class UnaryExpr:
    op: str
    operand: "Expr"
    prefix: bool = True
    span: Span = None  # type: ignore[assignment]


@dataclass
class AssignExpr:
    op: str  # =, +=, -=, *=, /=, %=, |=, &=, ^=
    target: "Expr"
    value: "Expr"
    span: Span = None  # type: ignore[assignment]


@dataclass
class TernaryExpr:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    span: Span = None  # type: ignore[assignment]


@dataclass
class TupleExpr:
    items: list[Optional["Expr"]] = field(default_factory=list)  # None for elided slots
    span: Span = None  # type: ignore[assignment]


@dataclass
class NumberLit:
    text: str
    span: Span = None  # type: ignore[assignment]


@dataclass
class StringLit:
    value: str
    span: Span = None  # type: ignore[assignment]


@dataclass
class BoolLit:
    value: bool
    span: Span = None  # type: ignore[assignment]


@dataclass
class NewExpr:
    type_name: str
    span: Span = None  # type: ignore[assignment]


@dataclass
class GuardAssumption:
    """Synthetic condition standing in for an unresolved permission modifier.

    Created during lowering when a function invokes a modifier from the
    assumed-guard catalog (e.g. an inherited onlyOwner not present in the
    file); never produced by the parser.
    """

    modifier_name: str
    span: Span = None  # type: ignore[assignment]


@dataclass
class ErrorExpr:
    span: Span = None  # type: ignore[assignment]


Expr = Union[
    Ident, MemberAccess, IndexAccess, CallExpr, BinaryExpr, UnaryExpr, AssignExpr,
    TernaryExpr, TupleExpr, NumberLit, StringLit, BoolLit, NewExpr, GuardAssumption, ErrorExpr,
]

# --------------------------------------------------------------------------
# Statements
# --------------------------------------------------------------------------


@dataclass
class VarBinding:
    type: TypeNode
    name: str
    location: Optional[str] = None  # memory | storage | calldata
    span: Span = None  # type: ignore[assignment]


@dataclass
class VarDeclStmt:
    bindings: list[Optional[VarBinding]]  # None for elided tuple slots
    init: Optional[Expr] = None
    span: Span = None  # type: ignore[assignment]


@dataclass
class ExprStmt:
    expr: Expr
    span: Span = None  # type: ignore[assignment]


@dataclass
class Block:
    statements: list["Stmt"] = field(default_factory=list)
    span: Span = None  # type: ignore[assignment]


@dataclass
class IfStmt:
    cond: Expr
    then: "Stmt"
    orelse: Optional["Stmt"] = None
    span: Span = None  # type: ignore[assignment]


@dataclass
class WhileStmt:
    cond: Expr
    body: "Stmt"
    span: Span = None  # type: ignore[assignment]


@dataclass
class ForStmt:
    init: Optional["Stmt"]
    cond: Optional[Expr]
    post: Optional[Expr]
    body: "Stmt"
    span: Span = None  # type: ignore[assignment]


@dataclass
class ReturnStmt:
    value: Optional[Expr] = None
    span: Span = None  # type: ignore[assignment]


@dataclass
class RequireStmt:
    cond: Expr
    message: Optional[Expr] = None
    span: Span = None  # type: ignore[assignment]


@dataclass
class RevertStmt:
    error: Optional[str] = None  # custom error name, if any
    args: list[Expr] = field(default_factory=list)
    span: Span = None  # type: ignore[assignment]


@dataclass
class EmitStmt:
    call: CallExpr
    span: Span = None  # type: ignore[assignment]


@dataclass
class PlaceholderStmt:
    """The `_;` inside a modifier body."""

    span: Span = None  # type: ignore[assignment]


@dataclass
class BreakStmt:
    span: Span = None  # type: ignore[assignment]


@dataclass
class ContinueStmt:
    span: Span = None  # type: ignore[assignment]


@dataclass
class OpaqueStmt:
    """Unsupported statement kept as an opaque unit with unknown effects."""

    construct: str
    span: Span = None  # type: ignore[assignment]


Stmt = Union[
    VarDeclStmt, ExprStmt, Block, IfStmt, WhileStmt, ForStmt, ReturnStmt,
    RequireStmt, RevertStmt, EmitStmt, PlaceholderStmt, BreakStmt, ContinueStmt, OpaqueStmt,
]

# --------------------------------------------------------------------------
# Declarations
# --------------------------------------------------------------------------


@dataclass
class Param:
    type: TypeNode
    name: Optional[str] = None
    location: Optional[str] = None
    indexed: bool = False
    span: Span = None  # type: ignore[assignment]


@dataclass
class ModifierInvocation:
    name: str
    args: Optional[list[Expr]] = None  # None: no parentheses written
    span: Span = None  # type: ignore[assignment]


@dataclass
class StateVarDecl:
    name: str
    type: TypeNode
    visibility: str = "internal"
    is_constant: bool = False
    is_immutable: bool = False
    init: Optional[Expr] = None
    span: Span = None  # type: ignore[assignment]


@dataclass
class StructDecl:
    name: str
    members: list[Param] = field(default_factory=list)
    span: Span = None  # type: ignore[assignment]


@dataclass
class EnumDecl:
    name: str
    values: list[str] = field(default_factory=list)
    span: Span = None  # type: ignore[assignment]


@dataclass
class EventDecl:
    name: str
    params: list[Param] = field(default_factory=list)
    anonymous: bool = False
    span: Span = None  # type: ignore[assignment]


@dataclass
class ErrorDecl:
    name: str
    params: list[Param] = field(default_factory=list)
    span: Span = None  # type: ignore[assignment]


@dataclass
class ModifierDecl:
    name: str
    params: list[Param] = field(default_factory=list)
    body: Optional[Block] = None
    is_virtual: bool = False
    span: Span = None  # type: ignore[assignment]


@dataclass
class FunctionDecl:
    kind: str  # function | constructor | fallback | receive
    name: str  # empty for constructor/fallback/receive
    params: list[Param] = field(default_factory=list)
    returns_: list[Param] = field(default_factory=list)
    visibility: Optional[str] = None
    mutability: Optional[str] = None
    modifiers_invoked: list[ModifierInvocation] = field(default_factory=list)
    is_virtual: bool = False
    body: Optional[Block] = None
    span: Span = None  # type: ignore[assignment]

    @property
    def is_constructor(self) -> bool:
        return self.kind == "constructor"


@dataclass
class BaseSpec:
    name: str
    args: Optional[list[Expr]] = None
    span: Span = None  # type: ignore[assignment]


@dataclass
class ContractDecl:
    name: str
    kind: str  # contract | interface | library
    is_abstract: bool = False
    bases: list[BaseSpec] = field(default_factory=list)
    state_vars: list[StateVarDecl] = field(default_factory=list)
    functions: list[FunctionDecl] = field(default_factory=list)
    modifiers: list[ModifierDecl] = field(default_factory=list)
    events: list[EventDecl] = field(default_factory=list)
    errors: list[ErrorDecl] = field(default_factory=list)
    structs: list[StructDecl] = field(default_factory=list)
    enums: list[EnumDecl] = field(default_factory=list)
    span: Span = None  # type: ignore[assignment]


@dataclass
class Ast:
    source: SourceFile
    pragmas: list[str] = field(default_factory=list)
    imports: list[str] = field(default_factory=list)
    contracts: list[ContractDecl] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def has_errors(self) -> bool:
        return any(d.severity == "error" for d in self.diagnostics)


# --------------------------------------------------------------------------
# Generic walking / printing
# --------------------------------------------------------------------------

_NODE_TYPES = (
    ElementaryType, MappingType, ArrayType, UserType,
    Ident, MemberAccess, IndexAccess, CallExpr, BinaryExpr, UnaryExpr, AssignExpr,
    TernaryExpr, TupleExpr, NumberLit, StringLit, BoolLit, NewExpr, GuardAssumption, ErrorExpr,
    VarBinding, VarDeclStmt, ExprStmt, Block, IfStmt, WhileStmt, ForStmt, ReturnStmt,
    RequireStmt, RevertStmt, EmitStmt, PlaceholderStmt, BreakStmt, ContinueStmt, OpaqueStmt,
    Param, ModifierInvocation, StateVarDecl, StructDecl, EnumDecl, EventDecl, ErrorDecl,
    ModifierDecl, FunctionDecl, BaseSpec, ContractDecl,
)


def is_node(obj: object) -> bool:
    return isinstance(obj, _NODE_TYPES)


def children(node: object) -> Iterator[object]:
    """Direct child nodes, in field order."""
    for f in dataclasses.fields(node):  # type: ignore[arg-type]
        if f.name == "span":
            continue
        v = getattr(node, f.name)
        if is_node(v):
            yield v
        elif isinstance(v, list):
            for item in v:
                if is_node(item):
                    yield item


def walk(node: object) -> Iterator[object]:
    """Depth-first preorder over the node and all descendants."""
    yield node
    for c in children(node):
        yield from walk(c)


def walk_exprs(node: object) -> Iterator[Expr]:
    for n in walk(node):
        if isinstance(n, _EXPR_TYPES):
            yield n  # type: ignore[misc]


_EXPR_TYPES = (
    Ident, MemberAccess, IndexAccess, CallExpr, BinaryExpr, UnaryExpr, AssignExpr,
    TernaryExpr, TupleExpr, NumberLit, StringLit, BoolLit, NewExpr, GuardAssumption, ErrorExpr,
)


def expr_text(e: Expr | None) -> str:
    """Compact canonical rendering used for evidence and taint-source keys."""
    if e is None:
        return ""
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, MemberAccess):
        return f"{expr_text(e.obj)}.{e.member}"
    if isinstance(e, IndexAccess):
        return f"{expr_text(e.obj)}[{expr_text(e.index)}]"
    if isinstance(e, CallExpr):
        return f"{expr_text(e.callee)}({', '.join(expr_text(a) for a in e.args)})"
    if isinstance(e, BinaryExpr):
        return f"{expr_text(e.left)} {e.op} {expr_text(e.right)}"
    if isinstance(e, UnaryExpr):
        return f"{e.op}{expr_text(e.operand)}" if e.prefix else f"{expr_text(e.operand)}{e.op}"
    if isinstance(e, AssignExpr):
        return f"{expr_text(e.target)} {e.op} {expr_text(e.value)}"
    if isinstance(e, TernaryExpr):
        return f"{expr_text(e.cond)} ? {expr_text(e.then)} : {expr_text(e.other)}"
    if isinstance(e, TupleExpr):
        return "(" + ", ".join(expr_text(i) if i is not None else "" for i in e.items) + ")"
    if isinstance(e, NumberLit):
        return e.text
    if isinstance(e, StringLit):
        return f'"{e.value}"'
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, NewExpr):
        return f"new {e.type_name}"
    if isinstance(e, GuardAssumption):
        return f"<assumed {e.modifier_name}>"
    return "<error>"


def is_msg_sender(e: Expr) -> bool:
    return isinstance(e, MemberAccess) and e.member == "sender" and isinstance(e.obj, Ident) and e.obj.name == "msg"


def is_block_timestamp(e: Expr) -> bool:
    return isinstance(e, MemberAccess) and e.member == "timestamp" and isinstance(e.obj, Ident) and e.obj.name == "block"
