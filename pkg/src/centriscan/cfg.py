"""Control-flow graphs of basic blocks over the lowered statement stream.

Block shapes are deliberately rigid so structural tests can predict them:
  * `require(c, m)` ends the current block with branch(c); the false edge
    goes to a fresh revert block.
  * `if` always creates entry blocks for present arms plus a join block;
    a missing else wires the false edge straight to the join.
  * loops always get a dedicated header block and a dedicated exit block.
Unreachable blocks (e.g. code after `return`) are pruned and ids renumbered
densely in discovery order, entry = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast_nodes import (
    Block, BreakStmt, CallExpr, ContinueStmt, EmitStmt, Expr, ExprStmt, ForStmt,
    Ident, IfStmt, OpaqueStmt, PlaceholderStmt, RequireStmt, ReturnStmt,
    RevertStmt, Stmt, VarDeclStmt, WhileStmt, expr_text,
)
from .source import Span

JUMP = "jump"
BRANCH = "branch"
RETURN = "return"
REVERT = "revert"
SELFDESTRUCT = "selfdestruct"
END = "end"

_EXIT_KINDS = (RETURN, REVERT, SELFDESTRUCT, END)


@dataclass
class Terminator:
    kind: str
    cond: Expr | None = None
    targets: tuple[int, ...] = ()
    span: Span | None = None


@dataclass
class BasicBlock:
    id: int
    statements: list[Stmt] = field(default_factory=list)
    terminator: Terminator = field(default_factory=lambda: Terminator(END))
    span: Span | None = None


@dataclass
class Cfg:
    entry: int
    blocks: dict[int, BasicBlock]

    def successors(self, bid: int) -> tuple[int, ...]:
        return self.blocks[bid].terminator.targets

    def predecessors(self) -> dict[int, list[int]]:
        preds: dict[int, list[int]] = {b: [] for b in self.blocks}
        for b in self.blocks.values():
            for t in b.terminator.targets:
                preds[t].append(b.id)
        return preds

    def exit_ids(self) -> list[int]:
        return [b.id for b in self.blocks.values() if b.terminator.kind in _EXIT_KINDS]

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for b in sorted(self.blocks):
            for t in self.blocks[b].terminator.targets:
                out.append((b, t))
        return out

    def block_conditions(self, bid: int) -> list[Expr]:
        term = self.blocks[bid].terminator
        return [term.cond] if term.kind == BRANCH and term.cond is not None else []


def is_selfdestruct_call(expr: Expr) -> bool:
    return isinstance(expr, CallExpr) and isinstance(expr.callee, Ident) and expr.callee.name == "selfdestruct"


class _Builder:
    def __init__(self) -> None:
        self.blocks: list[BasicBlock] = []
        self.loop_stack: list[tuple[int, int]] = []  # (header, exit)

    def new_block(self, span: Span | None = None) -> int:
        b = BasicBlock(id=len(self.blocks), span=span)
        self.blocks.append(b)
        return b.id

    def terminate(self, bid: int, term: Terminator) -> None:
        self.blocks[bid].terminator = term

    def seq(self, stmts: list[Stmt], cur: int | None) -> int | None:
        for st in stmts:
            if cur is None:
                break  # unreachable tail is dropped
            cur = self.one(st, cur)
        return cur

    def one(self, st: Stmt, cur: int) -> int | None:
        if isinstance(st, Block):
            return self.seq(st.statements, cur)
        if isinstance(st, PlaceholderStmt):
            return cur  # leftover marker from a body-less modifier context
        if isinstance(st, (VarDeclStmt, EmitStmt, OpaqueStmt)):
            self.blocks[cur].statements.append(st)
            return cur
        if isinstance(st, ExprStmt):
            self.blocks[cur].statements.append(st)
            if is_selfdestruct_call(st.expr):
                self.terminate(cur, Terminator(SELFDESTRUCT, span=st.span))
                return None
            return cur
        if isinstance(st, ReturnStmt):
            self.blocks[cur].statements.append(st)
            self.terminate(cur, Terminator(RETURN, span=st.span))
            return None
        if isinstance(st, RevertStmt):
            self.blocks[cur].statements.append(st)
            self.terminate(cur, Terminator(REVERT, span=st.span))
            return None
        if isinstance(st, RequireStmt):
            cont = self.new_block()
            rev = self.new_block(span=st.span)
            self.terminate(rev, Terminator(REVERT, span=st.span))
            self.terminate(cur, Terminator(BRANCH, cond=st.cond, targets=(cont, rev), span=st.span))
            return cont
        if isinstance(st, IfStmt):
            then_entry = self.new_block(span=st.then.span)
            join = self.new_block()
            if st.orelse is not None:
                else_entry = self.new_block(span=st.orelse.span)
                self.terminate(cur, Terminator(BRANCH, cond=st.cond, targets=(then_entry, else_entry), span=st.span))
                else_exit = self.one(st.orelse, else_entry)
                if else_exit is not None:
                    self.terminate(else_exit, Terminator(JUMP, targets=(join,)))
            else:
                self.terminate(cur, Terminator(BRANCH, cond=st.cond, targets=(then_entry, join), span=st.span))
            then_exit = self.one(st.then, then_entry)
            if then_exit is not None:
                self.terminate(then_exit, Terminator(JUMP, targets=(join,)))
            return join
        if isinstance(st, WhileStmt):
            header = self.new_block(span=st.span)
            self.terminate(cur, Terminator(JUMP, targets=(header,)))
            body_entry = self.new_block(span=st.body.span)
            exit_b = self.new_block()
            self.terminate(header, Terminator(BRANCH, cond=st.cond, targets=(body_entry, exit_b), span=st.span))
            self.loop_stack.append((header, exit_b))
            body_exit = self.one(st.body, body_entry)
            self.loop_stack.pop()
            if body_exit is not None:
                self.terminate(body_exit, Terminator(JUMP, targets=(header,)))
            return exit_b
        if isinstance(st, ForStmt):
            if st.init is not None:
                after = self.one(st.init, cur)
                if after is None:
                    return None
                cur = after
            header = self.new_block(span=st.span)
            self.terminate(cur, Terminator(JUMP, targets=(header,)))
            body_entry = self.new_block(span=st.body.span)
            exit_b = self.new_block()
            cond = st.cond if st.cond is not None else Ident("true", span=st.span)
            self.terminate(header, Terminator(BRANCH, cond=cond, targets=(body_entry, exit_b), span=st.span))
            self.loop_stack.append((header, exit_b))
            body_exit = self.one(st.body, body_entry)
            self.loop_stack.pop()
            if body_exit is not None:
                if st.post is not None:
                    self.blocks[body_exit].statements.append(ExprStmt(st.post, span=st.post.span))
                self.terminate(body_exit, Terminator(JUMP, targets=(header,)))
            return exit_b
        if isinstance(st, BreakStmt):
            if self.loop_stack:
                self.terminate(cur, Terminator(JUMP, targets=(self.loop_stack[-1][1],), span=st.span))
            else:
                self.terminate(cur, Terminator(END, span=st.span))
            return None
        if isinstance(st, ContinueStmt):
            if self.loop_stack:
                self.terminate(cur, Terminator(JUMP, targets=(self.loop_stack[-1][0],), span=st.span))
            else:
                self.terminate(cur, Terminator(END, span=st.span))
            return None
        # unknown statement kinds stay opaque
        self.blocks[cur].statements.append(OpaqueStmt(construct=type(st).__name__, span=getattr(st, "span", None)))
        return cur


def build_cfg(stmts: list[Stmt]) -> Cfg:
    """Build a Cfg for a lowered statement list; entry id is always 0."""
    b = _Builder()
    entry = b.new_block()
    cur = b.seq(stmts, entry)
    if cur is not None:
        b.terminate(cur, Terminator(END))
    return _prune_and_renumber(b.blocks, entry)


def _prune_and_renumber(blocks: list[BasicBlock], entry: int) -> Cfg:
    order: list[int] = []
    seen = {entry}
    stack = [entry]
    while stack:
        bid = stack.pop(0)
        order.append(bid)
        for t in blocks[bid].terminator.targets:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    remap = {old: new for new, old in enumerate(order)}
    new_blocks: dict[int, BasicBlock] = {}
    for old in order:
        blk = blocks[old]
        blk.id = remap[old]
        blk.terminator.targets = tuple(remap[t] for t in blk.terminator.targets)
        new_blocks[blk.id] = blk
    return Cfg(entry=0, blocks=new_blocks)


def block_summary(block: BasicBlock) -> dict:
    """JSON-friendly rendering used by the debug dumps."""
    term = block.terminator
    stmt_texts = []
    for st in block.statements:
        if isinstance(st, ExprStmt):
            stmt_texts.append(expr_text(st.expr))
        elif isinstance(st, ReturnStmt):
            stmt_texts.append(f"return {expr_text(st.value)}".strip())
        elif isinstance(st, RevertStmt):
            stmt_texts.append("revert" + (f" {st.error}" if st.error else ""))
        elif isinstance(st, VarDeclStmt):
            names = ", ".join(b.name if b else "_" for b in st.bindings)
            stmt_texts.append(f"let {names}" + (f" = {expr_text(st.init)}" if st.init else ""))
        elif isinstance(st, EmitStmt):
            stmt_texts.append(f"emit {expr_text(st.call)}")
        else:
            stmt_texts.append(type(st).__name__)
    return {
        "id": block.id,
        "statements": stmt_texts,
        "terminator": {
            "kind": term.kind,
            "cond": expr_text(term.cond) if term.cond is not None else None,
            "targets": list(term.targets),
        },
        "span": block.span.to_dict() if block.span else None,
    }
