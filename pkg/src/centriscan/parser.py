"""Recursive-descent parser for the supported Solidity subset.

Design points:
  * Never raises on bad input: syntax errors become diagnostics and the
    parser re-synchronizes on `;` / `}` boundaries.
  * Unsupported constructs (assembly, try/catch, ...) are consumed as
    balanced token groups and kept as OpaqueStmt with a diagnostic.
  * `_msgSender()` is canonicalized to `msg.sender` and `now` to
    `block.timestamp` at parse time, so every later stage sees one spelling.
"""

from __future__ import annotations

from .ast_nodes import (
    ArrayType, AssignExpr, Ast, BaseSpec, BinaryExpr, Block, BoolLit, BreakStmt,
    CallExpr, ContinueStmt, ContractDecl, ElementaryType, EmitStmt, EnumDecl,
    ErrorDecl, ErrorExpr, EventDecl, Expr, ExprStmt, ForStmt, FunctionDecl,
    Ident, IfStmt, IndexAccess, MappingType, MemberAccess, ModifierDecl,
    ModifierInvocation, NewExpr, NumberLit, Param, PlaceholderStmt, RequireStmt,
    ReturnStmt, RevertStmt, StateVarDecl, Stmt, StringLit, StructDecl,
    TernaryExpr, TupleExpr, TypeNode, UnaryExpr, UserType, VarBinding,
    VarDeclStmt, WhileStmt,
)
from .lexer import EOF, IDENT, KEYWORD, NUMBER, PUNCT, STRING, Token, is_type_word, lex
from .source import Diagnostic, ERROR, SourceFile, Span, WARNING

_VISIBILITY = ("public", "external", "internal", "private")
_MUTABILITY = ("pure", "view", "payable")
_NUMBER_UNITS = ("seconds", "minutes", "hours", "days", "weeks", "wei", "gwei", "ether")

_MAX_DEPTH = 150

_ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=")

# binary operator precedence, higher binds tighter
_BIN_PREC = {
    "||": 2, "&&": 3,
    "|": 4, "^": 5, "&": 6,
    "==": 7, "!=": 7,
    "<": 8, ">": 8, "<=": 8, ">=": 8,
    "<<": 9, ">>": 9,
    "+": 10, "-": 10,
    "*": 11, "/": 11, "%": 11,
    "**": 12,
}


class _Bail(Exception):
    """Internal recovery signal; never escapes parse()."""


def parse(source: SourceFile) -> Ast:
    """Lex and parse a source file; always returns an Ast with diagnostics."""
    tokens, diags = lex(source)
    return parse_tokens(tokens, source, diags)


def parse_tokens(tokens: list[Token], source: SourceFile, lex_diags: list[Diagnostic] | None = None) -> Ast:
    ast = Ast(source=source, diagnostics=list(lex_diags or []))
    try:
        _Parser(tokens, ast).parse_file()
    except Exception as exc:  # defensive: arbitrary input must never abort
        ast.diagnostics.append(
            Diagnostic(ERROR, "internal-error", f"parser gave up: {type(exc).__name__}: {exc}")
        )
    return ast


class _Parser:
    def __init__(self, tokens: list[Token], ast: Ast):
        self.toks = tokens
        self.pos = 0
        self.ast = ast
        self.depth = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, off: int = 0) -> Token:
        i = min(self.pos + off, len(self.toks) - 1)
        return self.toks[i]

    def at_end(self) -> bool:
        return self.peek().kind == EOF

    def next(self) -> Token:
        t = self.peek()
        if not self.at_end():
            self.pos += 1
        return t

    def accept_punct(self, *texts: str) -> Token | None:
        if self.peek().is_punct(*texts):
            return self.next()
        return None

    def accept_kw(self, *words: str) -> Token | None:
        if self.peek().is_kw(*words):
            return self.next()
        return None

    def expect_punct(self, text: str) -> Token:
        t = self.peek()
        if t.is_punct(text):
            return self.next()
        self.error(f"expected {text!r}, found {t.text!r}" if t.text else f"expected {text!r}, found end of input", t.span)
        raise _Bail()

    def expect_ident(self) -> Token:
        t = self.peek()
        if t.kind == IDENT:
            return self.next()
        self.error(f"expected identifier, found {t.text!r}", t.span)
        raise _Bail()

    def error(self, message: str, span: Span, code: str = "syntax-error") -> None:
        self.ast.diagnostics.append(Diagnostic(ERROR, code, message, span))

    def warn(self, message: str, span: Span, code: str) -> None:
        self.ast.diagnostics.append(Diagnostic(WARNING, code, message, span))

    def span_from(self, start: Span) -> Span:
        prev = self.toks[max(self.pos - 1, 0)]
        end = max(prev.span.end, start.start)
        return Span(start.start, end, start.line, start.col)

    def sync_toplevel(self) -> None:
        depth = 0
        while not self.at_end():
            t = self.next()
            if t.is_punct("{"):
                depth += 1
            elif t.is_punct("}"):
                if depth <= 1:
                    return
                depth -= 1
            elif t.is_punct(";") and depth == 0:
                return

    def sync_member(self) -> None:
        depth = 0
        while not self.at_end():
            t = self.peek()
            if depth == 0 and t.is_punct("}"):
                return
            self.next()
            if t.is_punct("{"):
                depth += 1
            elif t.is_punct("}"):
                depth -= 1
                if depth <= 0:
                    return
            elif t.is_punct(";") and depth == 0:
                return

    def consume_balanced_braces(self) -> None:
        """Consume a `{ ... }` group, tolerating nesting; assumes peek is `{`."""
        if not self.peek().is_punct("{"):
            return
        depth = 0
        while not self.at_end():
            t = self.next()
            if t.is_punct("{"):
                depth += 1
            elif t.is_punct("}"):
                depth -= 1
                if depth == 0:
                    return

    # -- file level ---------------------------------------------------------

    def parse_file(self) -> None:
        while not self.at_end():
            t = self.peek()
            try:
                if t.is_kw("pragma"):
                    self.parse_pragma()
                elif t.is_kw("import"):
                    self.parse_import()
                elif t.is_kw("contract", "interface", "library", "abstract"):
                    decl = self.parse_contract()
                    if decl is not None:
                        self.ast.contracts.append(decl)
                elif t.is_kw("struct", "enum", "error", "event", "using", "function", "modifier"):
                    # file-level helper declarations are tolerated and skipped
                    self.warn(f"file-level {t.text} declaration ignored", t.span, "unsupported-construct")
                    self.sync_toplevel()
                else:
                    self.error(f"unexpected token {t.text!r} at file level", t.span)
                    self.sync_toplevel()
            except _Bail:
                self.sync_toplevel()

    def parse_pragma(self) -> None:
        start = self.next().span  # pragma
        parts = []
        while not self.at_end() and not self.peek().is_punct(";"):
            parts.append(self.next().text)
        self.accept_punct(";")
        _ = start
        self.ast.pragmas.append(" ".join(parts))

    def parse_import(self) -> None:
        self.next()  # import
        parts = []
        while not self.at_end() and not self.peek().is_punct(";"):
            t = self.next()
            parts.append(f'"{t.text}"' if t.kind == STRING else t.text)
        self.accept_punct(";")
        self.ast.imports.append(" ".join(parts))

    # -- contracts ----------------------------------------------------------

    def parse_contract(self) -> ContractDecl | None:
        start = self.peek().span
        is_abstract = self.accept_kw("abstract") is not None
        kind_tok = self.peek()
        if not kind_tok.is_kw("contract", "interface", "library"):
            self.error("expected contract, interface, or library", kind_tok.span)
            raise _Bail()
        self.next()
        name = self.expect_ident().text
        bases: list[BaseSpec] = []
        if self.accept_kw("is"):
            while True:
                bt = self.expect_ident()
                args = None
                if self.peek().is_punct("("):
                    args = self.parse_call_args()
                bases.append(BaseSpec(bt.text, args, span=bt.span))
                if not self.accept_punct(","):
                    break
        decl = ContractDecl(name=name, kind=kind_tok.text, is_abstract=is_abstract, bases=bases, span=start)
        self.expect_punct("{")
        while not self.at_end() and not self.peek().is_punct("}"):
            try:
                self.parse_member(decl)
            except _Bail:
                self.sync_member()
        self.expect_punct("}") if self.peek().is_punct("}") else None
        if self.peek().is_punct("}"):
            self.next()
        decl.span = self.span_from(start)
        return decl

    def parse_member(self, decl: ContractDecl) -> None:
        t = self.peek()
        if t.is_kw("function"):
            decl.functions.append(self.parse_function("function"))
        elif t.is_kw("constructor"):
            decl.functions.append(self.parse_function("constructor"))
        elif t.kind == IDENT and t.text in ("fallback", "receive") and self.peek(1).is_punct("("):
            decl.functions.append(self.parse_function(t.text))
        elif t.is_kw("modifier"):
            decl.modifiers.append(self.parse_modifier())
        elif t.is_kw("event"):
            decl.events.append(self.parse_event())
        elif t.is_kw("error"):
            decl.errors.append(self.parse_error_decl())
        elif t.is_kw("struct"):
            decl.structs.append(self.parse_struct())
        elif t.is_kw("enum"):
            decl.enums.append(self.parse_enum())
        elif t.is_kw("using"):
            self.next()
            while not self.at_end() and not self.peek().is_punct(";"):
                self.next()
            self.accept_punct(";")
        elif self.looks_like_type():
            decl.state_vars.append(self.parse_state_var())
        else:
            self.error(f"unexpected token {t.text!r} in contract body", t.span)
            raise _Bail()

    def looks_like_type(self) -> bool:
        t = self.peek()
        if t.is_kw("mapping"):
            return True
        if t.kind == KEYWORD and is_type_word(t.text):
            return True
        return t.kind == IDENT

    def parse_state_var(self) -> StateVarDecl:
        start = self.peek().span
        ty = self.parse_type()
        vis = "internal"
        is_constant = is_immutable = False
        while True:
            t = self.peek()
            if t.is_kw(*_VISIBILITY):
                vis = self.next().text
            elif t.is_kw("constant"):
                is_constant = True
                self.next()
            elif t.is_kw("immutable"):
                is_immutable = True
                self.next()
            elif t.is_kw("override"):
                self.next()
                if self.peek().is_punct("("):
                    self.parse_call_args()
            else:
                break
        name = self.expect_ident().text
        init = None
        if self.accept_punct("="):
            init = self.parse_expression()
        self.expect_punct(";")
        return StateVarDecl(name=name, type=ty, visibility=vis, is_constant=is_constant,
                            is_immutable=is_immutable, init=init, span=self.span_from(start))

    def parse_struct(self) -> StructDecl:
        start = self.next().span
        name = self.expect_ident().text
        members: list[Param] = []
        self.expect_punct("{")
        while not self.at_end() and not self.peek().is_punct("}"):
            mstart = self.peek().span
            ty = self.parse_type()
            mname = self.expect_ident().text
            self.expect_punct(";")
            members.append(Param(ty, mname, span=self.span_from(mstart)))
        self.expect_punct("}")
        return StructDecl(name, members, span=self.span_from(start))

    def parse_enum(self) -> EnumDecl:
        start = self.next().span
        name = self.expect_ident().text
        values: list[str] = []
        self.expect_punct("{")
        while not self.at_end() and not self.peek().is_punct("}"):
            values.append(self.expect_ident().text)
            if not self.accept_punct(","):
                break
        self.expect_punct("}")
        return EnumDecl(name, values, span=self.span_from(start))

    def parse_event(self) -> EventDecl:
        start = self.next().span
        name = self.expect_ident().text
        params = self.parse_param_list(allow_indexed=True)
        anonymous = self.accept_kw("anonymous") is not None
        self.expect_punct(";")
        return EventDecl(name, params, anonymous, span=self.span_from(start))

    def parse_error_decl(self) -> ErrorDecl:
        start = self.next().span
        name = self.expect_ident().text
        params = self.parse_param_list()
        self.expect_punct(";")
        return ErrorDecl(name, params, span=self.span_from(start))

    def parse_modifier(self) -> ModifierDecl:
        start = self.next().span
        name = self.expect_ident().text
        params = self.parse_param_list() if self.peek().is_punct("(") else []
        is_virtual = False
        while True:
            if self.accept_kw("virtual"):
                is_virtual = True
            elif self.accept_kw("override"):
                if self.peek().is_punct("("):
                    self.parse_call_args()
            else:
                break
        body = None
        if self.peek().is_punct("{"):
            body = self.parse_block()
        else:
            self.expect_punct(";")
        return ModifierDecl(name, params, body, is_virtual, span=self.span_from(start))

    def parse_function(self, kind: str) -> FunctionDecl:
        start = self.peek().span
        self.next()  # function / constructor / fallback / receive
        name = ""
        if kind == "function":
            nt = self.peek()
            if nt.kind == IDENT or nt.kind == KEYWORD:
                name = self.next().text
            else:
                self.error("expected function name", nt.span)
                raise _Bail()
        elif kind in ("fallback", "receive"):
            name = kind
        params = self.parse_param_list()
        visibility: str | None = None
        mutability: str | None = None
        is_virtual = False
        invocations: list[ModifierInvocation] = []
        returns_: list[Param] = []
        while True:
            t = self.peek()
            if t.is_kw(*_VISIBILITY):
                visibility = self.next().text
            elif t.is_kw(*_MUTABILITY):
                mutability = self.next().text
            elif t.is_kw("virtual"):
                is_virtual = True
                self.next()
            elif t.is_kw("override"):
                self.next()
                if self.peek().is_punct("("):
                    self.parse_call_args()
            elif t.is_kw("returns"):
                self.next()
                returns_ = self.parse_param_list()
            elif t.kind == IDENT:
                inv_start = self.next()
                args = None
                if self.peek().is_punct("("):
                    args = self.parse_call_args()
                invocations.append(ModifierInvocation(inv_start.text, args, span=inv_start.span))
            else:
                break
        body = None
        if self.peek().is_punct("{"):
            body = self.parse_block()
        else:
            self.expect_punct(";")
        return FunctionDecl(kind=kind, name=name, params=params, returns_=returns_,
                            visibility=visibility, mutability=mutability,
                            modifiers_invoked=invocations, is_virtual=is_virtual,
                            body=body, span=self.span_from(start))

    def parse_param_list(self, allow_indexed: bool = False) -> list[Param]:
        self.expect_punct("(")
        params: list[Param] = []
        if self.accept_punct(")"):
            return params
        while True:
            pstart = self.peek().span
            ty = self.parse_type()
            location = None
            indexed = False
            while True:
                if self.peek().is_kw("memory", "storage", "calldata"):
                    location = self.next().text
                elif allow_indexed and self.peek().is_kw("indexed"):
                    indexed = True
                    self.next()
                else:
                    break
            name = None
            if self.peek().kind == IDENT:
                name = self.next().text
            params.append(Param(ty, name, location, indexed, span=self.span_from(pstart)))
            if not self.accept_punct(","):
                break
        self.expect_punct(")")
        return params

    # -- types --------------------------------------------------------------

    def parse_type(self) -> TypeNode:
        self.depth += 1
        try:
            if self.depth > _MAX_DEPTH:
                self.error("type nesting too deep", self.peek().span)
                raise _Bail()
            t = self.peek()
            base: TypeNode
            if t.is_kw("mapping"):
                start = self.next().span
                self.expect_punct("(")
                key = self.parse_type()
                self.expect_punct("=>")
                value = self.parse_type()
                self.expect_punct(")")
                base = MappingType(key, value, span=self.span_from(start))
            elif t.kind == KEYWORD and is_type_word(t.text):
                self.next()
                payable = False
                if t.text == "address" and self.peek().is_kw("payable"):
                    self.next()
                    payable = True
                base = ElementaryType(t.text, payable, span=t.span)
            elif t.kind == IDENT:
                start = t.span
                name = self.next().text
                while self.peek().is_punct(".") and self.peek(1).kind == IDENT:
                    self.next()
                    name += "." + self.next().text
                base = UserType(name, span=self.span_from(start))
            else:
                self.error(f"expected type, found {t.text!r}", t.span)
                raise _Bail()
            while self.peek().is_punct("["):
                self.next()
                length = None
                if not self.peek().is_punct("]"):
                    length = self.parse_expression()
                self.expect_punct("]")
                base = ArrayType(base, length, span=Span(base.span.start, self.toks[self.pos - 1].span.end, base.span.line, base.span.col))
            return base
        finally:
            self.depth -= 1

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> Block:
        start = self.expect_punct("{").span
        stmts: list[Stmt] = []
        while not self.at_end() and not self.peek().is_punct("}"):
            before = self.pos
            try:
                stmts.append(self.parse_statement())
            except _Bail:
                self.sync_member()
            if self.pos == before:  # guarantee progress on pathological input
                self.next()
        if self.peek().is_punct("}"):
            self.next()
        return Block(stmts, span=self.span_from(start))

    def parse_statement(self) -> Stmt:
        self.depth += 1
        try:
            if self.depth > _MAX_DEPTH:
                self.error("statement nesting too deep", self.peek().span)
                raise _Bail()
            return self._parse_statement_inner()
        finally:
            self.depth -= 1

    def _parse_statement_inner(self) -> Stmt:
        t = self.peek()
        if t.is_punct("{"):
            return self.parse_block()
        if t.is_kw("if"):
            return self.parse_if()
        if t.is_kw("while"):
            start = self.next().span
            self.expect_punct("(")
            cond = self.parse_expression()
            self.expect_punct(")")
            body = self.parse_statement()
            return WhileStmt(cond, body, span=self.span_from(start))
        if t.is_kw("for"):
            return self.parse_for()
        if t.is_kw("return"):
            start = self.next().span
            value = None
            if not self.peek().is_punct(";"):
                value = self.parse_expression()
            self.expect_punct(";")
            return ReturnStmt(value, span=self.span_from(start))
        if t.is_kw("require"):
            start = self.next().span
            self.expect_punct("(")
            cond = self.parse_expression()
            message = None
            if self.accept_punct(","):
                message = self.parse_expression()
            self.expect_punct(")")
            self.expect_punct(";")
            return RequireStmt(cond, message, span=self.span_from(start))
        if t.is_kw("revert"):
            return self.parse_revert()
        if t.is_kw("emit"):
            start = self.next().span
            call = self.parse_expression()
            self.expect_punct(";")
            if not isinstance(call, CallExpr):
                call = CallExpr(callee=call, args=[], span=call.span)
            return EmitStmt(call, span=self.span_from(start))
        if t.is_kw("break"):
            self.next()
            self.expect_punct(";")
            return BreakStmt(span=t.span)
        if t.is_kw("continue"):
            self.next()
            self.expect_punct(";")
            return ContinueStmt(span=t.span)
        if t.kind == IDENT and t.text == "_" and self.peek(1).is_punct(";"):
            self.next()
            self.next()
            return PlaceholderStmt(span=t.span)
        if t.is_kw("assembly"):
            start = self.next().span
            if self.peek().kind == STRING:
                self.next()
            self.consume_balanced_braces()
            self.warn("assembly block treated as opaque statement", start, "unsupported-construct")
            return OpaqueStmt("assembly", span=self.span_from(start))
        if t.is_kw("try"):
            start = self.next().span
            while not self.at_end() and not self.peek().is_punct("{"):
                self.next()
            self.consume_balanced_braces()
            while self.peek().is_kw("catch"):
                self.next()
                while not self.at_end() and not self.peek().is_punct("{"):
                    self.next()
                self.consume_balanced_braces()
            self.warn("try/catch treated as opaque statement", start, "unsupported-construct")
            return OpaqueStmt("try-catch", span=self.span_from(start))
        if t.kind == IDENT and t.text == "unchecked" and self.peek(1).is_punct("{"):
            self.next()
            return self.parse_block()
        if t.is_kw("delete"):
            start = self.next().span
            target = self.parse_expression()
            self.expect_punct(";")
            return ExprStmt(UnaryExpr("delete", target, span=self.span_from(start)), span=self.span_from(start))
        if self.starts_var_decl():
            return self.parse_var_decl()
        start = t.span
        expr = self.parse_expression()
        self.expect_punct(";")
        return ExprStmt(expr, span=self.span_from(start))

    def parse_if(self) -> IfStmt:
        start = self.next().span
        self.expect_punct("(")
        cond = self.parse_expression()
        self.expect_punct(")")
        then = self.parse_statement()
        orelse = None
        if self.accept_kw("else"):
            orelse = self.parse_statement()
        return IfStmt(cond, then, orelse, span=self.span_from(start))

    def parse_for(self) -> ForStmt:
        start = self.next().span
        self.expect_punct("(")
        init: Stmt | None = None
        if not self.peek().is_punct(";"):
            if self.starts_var_decl():
                init = self.parse_var_decl()
            else:
                e = self.parse_expression()
                self.expect_punct(";")
                init = ExprStmt(e, span=e.span)
        else:
            self.next()
        cond = None
        if not self.peek().is_punct(";"):
            cond = self.parse_expression()
        self.expect_punct(";")
        post = None
        if not self.peek().is_punct(")"):
            post = self.parse_expression()
        self.expect_punct(")")
        body = self.parse_statement()
        return ForStmt(init, cond, post, body, span=self.span_from(start))

    def parse_revert(self) -> RevertStmt:
        start = self.next().span
        error_name = None
        args: list[Expr] = []
        if self.peek().kind == IDENT:
            error_name = self.next().text
            while self.peek().is_punct(".") and self.peek(1).kind == IDENT:
                self.next()
                error_name += "." + self.next().text
            if self.peek().is_punct("("):
                args = self.parse_call_args()
        elif self.peek().is_punct("("):
            args = self.parse_call_args()
        self.expect_punct(";")
        return RevertStmt(error_name, args, span=self.span_from(start))

    def starts_var_decl(self) -> bool:
        t = self.peek()
        if t.is_kw("mapping"):
            return True
        if t.kind == KEYWORD and is_type_word(t.text):
            return True
        if t.is_punct("("):
            # tuple declaration iff the first non-elided slot starts with a type
            n = self.peek(1)
            while n.is_punct(","):
                return False  # leading elision -> expression tuple
            if n.is_kw("mapping") or (n.kind == KEYWORD and is_type_word(n.text)):
                return True
            return False
        if t.kind == IDENT:
            # `Foo x`, `Foo[] x`, `Foo.Bar memory x` are declarations
            i = 1
            while self.peek(i).is_punct(".") and self.peek(i + 1).kind == IDENT:
                i += 2
            while self.peek(i).is_punct("["):
                j = i + 1
                depth = 1
                while depth and self.peek(j).kind != EOF:
                    if self.peek(j).is_punct("["):
                        depth += 1
                    elif self.peek(j).is_punct("]"):
                        depth -= 1
                    j += 1
                i = j
            nt = self.peek(i)
            return nt.kind == IDENT or nt.is_kw("memory", "storage", "calldata")
        return False

    def parse_var_decl(self) -> VarDeclStmt:
        start = self.peek().span
        bindings: list[VarBinding | None] = []
        if self.peek().is_punct("("):
            self.next()
            while True:
                if self.peek().is_punct(","):
                    bindings.append(None)
                    self.next()
                    continue
                if self.peek().is_punct(")"):
                    break
                bstart = self.peek().span
                ty = self.parse_type()
                location = None
                if self.peek().is_kw("memory", "storage", "calldata"):
                    location = self.next().text
                bname = self.expect_ident().text
                bindings.append(VarBinding(ty, bname, location, span=self.span_from(bstart)))
                if not self.accept_punct(","):
                    break
            self.expect_punct(")")
        else:
            ty = self.parse_type()
            location = None
            if self.peek().is_kw("memory", "storage", "calldata"):
                location = self.next().text
            name = self.expect_ident().text
            bindings.append(VarBinding(ty, name, location, span=self.span_from(start)))
        init = None
        if self.accept_punct("="):
            init = self.parse_expression()
        self.expect_punct(";")
        return VarDeclStmt(bindings, init, span=self.span_from(start))

    # -- expressions ----------------------------------------------------------

    def parse_call_args(self) -> list[Expr]:
        self.expect_punct("(")
        args: list[Expr] = []
        if self.accept_punct(")"):
            return args
        while True:
            args.append(self.parse_expression())
            if not self.accept_punct(","):
                break
        self.expect_punct(")")
        return args

    def parse_expression(self) -> Expr:
        self.depth += 1
        try:
            if self.depth > _MAX_DEPTH:
                self.error("expression nesting too deep", self.peek().span)
                raise _Bail()
            return self._parse_assignment()
        finally:
            self.depth -= 1

    def _parse_assignment(self) -> Expr:
        lhs = self._parse_ternary()
        t = self.peek()
        if t.kind == PUNCT and t.text in _ASSIGN_OPS:
            self.next()
            rhs = self.parse_expression()  # right-assoc
            return AssignExpr(t.text, lhs, rhs, span=Span(lhs.span.start, rhs.span.end, lhs.span.line, lhs.span.col))
        return lhs

    def _parse_ternary(self) -> Expr:
        cond = self._parse_binary(0)
        if self.peek().is_punct("?"):
            self.next()
            then = self.parse_expression()
            self.expect_punct(":")
            other = self.parse_expression()
            return TernaryExpr(cond, then, other, span=Span(cond.span.start, other.span.end, cond.span.line, cond.span.col))
        return cond

    def _parse_binary(self, min_prec: int) -> Expr:
        left = self._parse_unary()
        while True:
            t = self.peek()
            prec = _BIN_PREC.get(t.text) if t.kind == PUNCT else None
            if prec is None or prec < min_prec:
                return left
            self.next()
            # ** is right-associative, the rest left-associative
            right = self._parse_binary(prec if t.text == "**" else prec + 1)
            left = BinaryExpr(t.text, left, right, span=Span(left.span.start, right.span.end, left.span.line, left.span.col))

    def _parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == PUNCT and t.text in ("!", "~", "-", "+", "++", "--"):
            self.next()
            operand = self._parse_unary()
            return UnaryExpr(t.text, operand, prefix=True, span=Span(t.span.start, operand.span.end, t.span.line, t.span.col))
        if t.is_kw("new"):
            self.next()
            ty = self.parse_type()
            return self._parse_postfix(NewExpr(self._type_to_text(ty), span=self.span_from(t.span)))
        if t.is_kw("delete"):
            self.next()
            operand = self._parse_unary()
            return UnaryExpr("delete", operand, prefix=True, span=Span(t.span.start, operand.span.end, t.span.line, t.span.col))
        return self._parse_postfix(self._parse_primary())

    @staticmethod
    def _type_to_text(ty: TypeNode) -> str:
        from .ast_nodes import type_text

        return type_text(ty)

    def _parse_postfix(self, expr: Expr) -> Expr:
        while True:
            t = self.peek()
            if t.is_punct("."):
                self.next()
                mt = self.peek()
                if mt.kind in (IDENT, KEYWORD):
                    self.next()
                    expr = MemberAccess(expr, mt.text, span=Span(expr.span.start, mt.span.end, expr.span.line, expr.span.col))
                else:
                    self.error("expected member name after '.'", mt.span)
                    raise _Bail()
            elif t.is_punct("["):
                self.next()
                idx = self.parse_expression() if not self.peek().is_punct("]") else ErrorExpr(span=t.span)
                end = self.expect_punct("]").span
                expr = IndexAccess(expr, idx, span=Span(expr.span.start, end.end, expr.span.line, expr.span.col))
            elif t.is_punct("{"):
                # call options `{value: x, gas: y}` before the argument list
                if not self._looks_like_call_options():
                    return expr
                self.consume_balanced_braces()
            elif t.is_punct("("):
                args = self.parse_call_args()
                end = self.toks[self.pos - 1].span
                expr = CallExpr(expr, args, span=Span(expr.span.start, end.end, expr.span.line, expr.span.col))
                expr = self._canonicalize_call(expr)
            elif t.kind == PUNCT and t.text in ("++", "--"):
                self.next()
                expr = UnaryExpr(t.text, expr, prefix=False, span=Span(expr.span.start, t.span.end, expr.span.line, expr.span.col))
            else:
                return expr

    def _looks_like_call_options(self) -> bool:
        return self.peek(1).kind == IDENT and self.peek(2).is_punct(":")

    @staticmethod
    def _canonicalize_call(call: CallExpr) -> Expr:
        # `_msgSender()` is the OZ spelling of `msg.sender`
        if isinstance(call.callee, Ident) and call.callee.name == "_msgSender" and not call.args:
            return MemberAccess(Ident("msg", span=call.span), "sender", span=call.span)
        return call

    def _parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == IDENT:
            self.next()
            if t.text == "now":  # legacy alias
                return MemberAccess(Ident("block", span=t.span), "timestamp", span=t.span)
            return Ident(t.text, span=t.span)
        if t.kind == NUMBER:
            self.next()
            text = t.text
            span = t.span
            nxt = self.peek()
            if nxt.kind == IDENT and nxt.text in _NUMBER_UNITS:
                self.next()
                text = f"{text} {nxt.text}"
                span = Span(t.span.start, nxt.span.end, t.span.line, t.span.col)
            return NumberLit(text, span=span)
        if t.kind == STRING:
            self.next()
            return StringLit(t.text, span=t.span)
        if t.is_kw("true", "false"):
            self.next()
            return BoolLit(t.text == "true", span=t.span)
        if t.is_kw("msg", "block", "tx", "this", "super", "selfdestruct"):
            self.next()
            return Ident(t.text, span=t.span)
        if t.kind == KEYWORD and is_type_word(t.text):
            # elementary type used as a cast callee: uint256(x), address(0)
            self.next()
            if t.text == "address" and self.peek().is_kw("payable"):
                self.next()
            return Ident(t.text, span=t.span)
        if t.is_kw("payable"):
            self.next()
            return Ident("payable", span=t.span)
        if t.is_punct("("):
            start = self.next().span
            items: list[Expr | None] = []
            pending_elision = True
            while not self.at_end() and not self.peek().is_punct(")"):
                if self.peek().is_punct(","):
                    self.next()
                    if pending_elision:
                        items.append(None)
                    pending_elision = True
                    continue
                items.append(self.parse_expression())
                pending_elision = False
            if pending_elision and items:
                items.append(None)
            end = self.expect_punct(")").span
            span = Span(start.start, end.end, start.line, start.col)
            if len(items) == 1 and items[0] is not None:
                return items[0]
            return TupleExpr(items, span=span)
        self.error(f"expected expression, found {t.text!r}" if t.text else "expected expression, found end of input", t.span)
        raise _Bail()
