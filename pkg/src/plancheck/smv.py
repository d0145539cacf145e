"""Frontend for the SMV-subset language: lexing, parsing, semantic checks
and pretty printing.

The accepted subset is a single ``MODULE main`` with boolean and enum
variable declarations, ``init``/``next`` assignments whose right-hand sides
are built from constants, identifiers, ``!``, ``&``, ``|``, ``=`` against an
enum literal and first-match ``case`` expressions, plus ``LTLSPEC`` blocks.
``--`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from . import ltl
from . import syntax as sx

KEYWORDS = {
    "MODULE", "VAR", "ASSIGN", "LTLSPEC",
    "init", "next", "case", "esac", "boolean",
    "TRUE", "FALSE", "F", "G", "X", "U",
}

_SYMBOLS = (":=", "{", "}", "(", ")", ":", ";", ",", "=", "!", "&", "|")


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    message: str
    span: Optional[sx.Span] = None

    def __str__(self) -> str:
        where = f"{self.span.line}:{self.span.column}: " if self.span else ""
        return f"{self.severity.value}: {where}{self.message}"


# ===========================================================================
# Lexer
# ===========================================================================


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", a keyword, a symbol, or "eof"
    text: str
    line: int
    column: int

    @property
    def span(self) -> sx.Span:
        return sx.Span(self.line, self.column)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        matched = None
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                matched = sym
                break
        if matched is None:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        tokens.append(Token(matched, matched, line, col))
        i += len(matched)
        col += len(matched)
    tokens.append(Token("eof", "", line, col))
    return tokens


# ===========================================================================
# Parser
# ===========================================================================


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def match(self, kind: str) -> Optional[Token]:
        if self.peek().kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str, what: str = "") -> Token:
        t = self.peek()
        if t.kind != kind:
            wanted = what or f"{kind!r}"
            found = "end of input" if t.kind == "eof" else f"{t.text!r}"
            raise ParseError(f"expected {wanted}, found {found}", t.line, t.column)
        return self.advance()

    # -- model structure ------------------------------------------------

    def parse_model(self) -> sx.SmvModel:
        self.expect("MODULE")
        name = self.expect("ident", "module name")
        if name.text != "main":
            raise ParseError("only MODULE main is supported", name.line, name.column)
        decls: list[sx.VarDecl] = []
        inits: dict[str, sx.Expr] = {}
        nexts: dict[str, sx.Expr] = {}
        specs: list = []
        while True:
            t = self.peek()
            if t.kind == "eof":
                break
            if t.kind == "VAR":
                self.advance()
                while self.peek().kind == "ident":
                    decls.append(self.parse_var_decl())
            elif t.kind == "ASSIGN":
                self.advance()
                while self.peek().kind in ("init", "next"):
                    which, target, expr, span = self.parse_assignment()
                    table = inits if which == "init" else nexts
                    if target in table:
                        raise ParseError(
                            f"duplicate {which} assignment for {target!r}", span.line, span.column
                        )
                    table[target] = expr
            elif t.kind == "LTLSPEC":
                self.advance()
                specs.append(self.parse_ltl_expr())
                self.expect(";")
            else:
                raise ParseError(
                    f"expected VAR, ASSIGN or LTLSPEC, found {t.text!r}", t.line, t.column
                )
        return sx.SmvModel(tuple(decls), inits, nexts, tuple(specs))

    def parse_var_decl(self) -> sx.VarDecl:
        name = self.expect("ident", "variable name")
        self.expect(":")
        if self.match("boolean"):
            vtype: sx.VarType = sx.BoolType()
        else:
            self.expect("{", "'boolean' or '{'")
            lits = [self.expect("ident", "enum literal").text]
            while self.match(","):
                lits.append(self.expect("ident", "enum literal").text)
            self.expect("}")
            vtype = sx.EnumType(tuple(lits))
        self.expect(";")
        return sx.VarDecl(name.text, vtype, name.span)

    def parse_assignment(self) -> tuple[str, str, sx.Expr, sx.Span]:
        which = self.advance()  # init or next
        self.expect("(")
        target = self.expect("ident", "variable name")
        self.expect(")")
        self.expect(":=")
        expr = self.parse_expr()
        self.expect(";")
        return which.kind, target.text, expr, which.span

    # -- state expressions ----------------------------------------------

    def parse_expr(self) -> sx.Expr:
        left = self.parse_and()
        while True:
            t = self.match("|")
            if t is None:
                return left
            left = sx.Or(left, self.parse_and(), t.span)

    def parse_and(self) -> sx.Expr:
        left = self.parse_unary()
        while True:
            t = self.match("&")
            if t is None:
                return left
            left = sx.And(left, self.parse_unary(), t.span)

    def parse_unary(self) -> sx.Expr:
        t = self.match("!")
        if t is not None:
            return sx.Not(self.parse_unary(), t.span)
        return self.parse_primary()

    def parse_primary(self) -> sx.Expr:
        t = self.peek()
        if t.kind == "TRUE":
            self.advance()
            return sx.Const(True, t.span)
        if t.kind == "FALSE":
            self.advance()
            return sx.Const(False, t.span)
        if t.kind == "case":
            return self.parse_case()
        if t.kind == "(":
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if self.match("="):
                lit = self.expect("ident", "enum literal after '='")
                return sx.Eq(t.text, lit.text, t.span)
            return sx.Ident(t.text, t.span)
        found = "end of input" if t.kind == "eof" else f"{t.text!r}"
        raise ParseError(f"expected an expression, found {found}", t.line, t.column)

    def parse_case(self) -> sx.Expr:
        head = self.expect("case")
        branches: list[tuple[sx.Expr, sx.Expr]] = []
        while self.peek().kind != "esac":
            guard = self.parse_expr()
            self.expect(":")
            value = self.parse_expr()
            self.expect(";")
            branches.append((guard, value))
        self.expect("esac")
        if not branches:
            raise ParseError("case expression has no branches", head.line, head.column)
        return sx.CaseExpr(tuple(branches), head.span)

    # -- temporal formulas ----------------------------------------------
    #
    # Binding, tightest first: !/X/F/G, then U (right-associative), then &,
    # then |.  Parentheses override.

    def parse_ltl_expr(self):
        left = self.parse_ltl_and()
        while self.match("|"):
            left = ltl.Or(left, self.parse_ltl_and())
        return left

    def parse_ltl_and(self):
        left = self.parse_ltl_until()
        while self.match("&"):
            left = ltl.And(left, self.parse_ltl_until())
        return left

    def parse_ltl_until(self):
        left = self.parse_ltl_unary()
        if self.match("U"):
            return ltl.Until(left, self.parse_ltl_until())
        return left

    def parse_ltl_unary(self):
        t = self.peek()
        if t.kind in ("!", "X", "F", "G"):
            self.advance()
            inner = self.parse_ltl_unary()
            return {"!": ltl.Not, "X": ltl.Next, "F": ltl.Finally, "G": ltl.Globally}[t.kind](inner)
        return self.parse_ltl_primary()

    def parse_ltl_primary(self):
        t = self.peek()
        if t.kind == "(":
            self.advance()
            f = self.parse_ltl_expr()
            self.expect(")")
            return f
        if t.kind == "TRUE":
            self.advance()
            return ltl.Atom(sx.Const(True, t.span))
        if t.kind == "FALSE":
            self.advance()
            return ltl.Atom(sx.Const(False, t.span))
        if t.kind == "ident":
            self.advance()
            if self.match("="):
                lit = self.expect("ident", "enum literal after '='")
                return ltl.Atom(sx.Eq(t.text, lit.text, t.span))
            return ltl.Atom(sx.Ident(t.text, t.span))
        raise ParseError(f"expected a formula, found {t.text!r}", t.line, t.column)


def parse_model(text: str) -> sx.SmvModel:
    """Parse and validate a model.

    Raises ParseError, with a line and column, for lexical and syntax errors
    and for semantic ones: undeclared variables, duplicate declarations or
    assignments, and type mismatches.
    """
    model = _Parser(tokenize(text)).parse_model()
    errors = _validate(model)
    if errors:
        d = errors[0]
        span = d.span or sx.Span(0, 0)
        raise ParseError(d.message, span.line, span.column)
    return model


def parse_ltl(text: str):
    """Parse a standalone temporal formula."""
    p = _Parser(tokenize(text))
    f = p.parse_ltl_expr()
    t = p.peek()
    if t.kind != "eof":
        raise ParseError(f"unexpected {t.text!r} after formula", t.line, t.column)
    return f


# ===========================================================================
# Semantic validation
# ===========================================================================


def _validate(model: sx.SmvModel) -> list[Diagnostic]:
    """Name-resolution and type errors, in declaration order."""
    out: list[Diagnostic] = []
    decls: dict[str, sx.VarDecl] = {}
    literal_owner: dict[str, str] = {}

    for d in model.vars:
        if d.name in decls:
            out.append(_err(f"duplicate declaration of {d.name!r}", d.span))
            continue
        decls[d.name] = d
    for d in model.vars:
        if isinstance(d.var_type, sx.EnumType):
            seen: set[str] = set()
            for lit_name in d.var_type.literals:
                if lit_name in seen:
                    out.append(_err(f"duplicate literal {lit_name!r} in {d.name!r}", d.span))
                seen.add(lit_name)
                if lit_name in decls:
                    out.append(
                        _err(f"enum literal {lit_name!r} shadows a variable name", d.span)
                    )
                literal_owner.setdefault(lit_name, d.name)

    def check_bool(e: sx.Expr) -> None:
        if isinstance(e, sx.Const):
            return
        if isinstance(e, sx.Ident):
            d = decls.get(e.name)
            if d is None:
                if e.name in literal_owner:
                    out.append(_err(f"enum literal {e.name!r} used as a boolean", e.span))
                else:
                    out.append(_err(f"undeclared variable {e.name!r}", e.span))
            elif not isinstance(d.var_type, sx.BoolType):
                out.append(_err(f"enum variable {e.name!r} used as a boolean", e.span))
            return
        if isinstance(e, sx.Not):
            check_bool(e.operand)
            return
        if isinstance(e, (sx.And, sx.Or)):
            check_bool(e.left)
            check_bool(e.right)
            return
        if isinstance(e, sx.Eq):
            d = decls.get(e.var)
            if d is None:
                out.append(_err(f"undeclared variable {e.var!r}", e.span))
            elif isinstance(d.var_type, sx.BoolType):
                out.append(_err(f"'=' compares an enum variable; {e.var!r} is boolean", e.span))
            elif e.literal not in d.var_type.literals:
                out.append(_err(f"literal {e.literal!r} is not in the domain of {e.var!r}", e.span))
            return
        if isinstance(e, sx.CaseExpr):
            for guard, value in e.branches:
                check_bool(guard)
                check_bool(value)
            return
        out.append(_err(f"unsupported expression {e!r}", None))

    def check_enum_value(e: sx.Expr, target: str, literals: tuple[str, ...]) -> None:
        if isinstance(e, sx.Ident):
            if e.name in literals:
                return
            d = decls.get(e.name)
            if d is None:
                out.append(_err(f"unknown value {e.name!r} for variable {target!r}", e.span))
            elif d.var_type != decls[target].var_type:
                out.append(
                    _err(f"{e.name!r} does not range over the domain of {target!r}", e.span)
                )
            return
        if isinstance(e, sx.CaseExpr):
            for guard, value in e.branches:
                check_bool(guard)
                check_enum_value(value, target, literals)
            return
        span = getattr(e, "span", None)
        out.append(_err(f"expected an enum value for {target!r}", span))

    for table in (model.inits, model.nexts):
        for name, expr in table.items():
            d = decls.get(name)
            if d is None:
                span = getattr(expr, "span", None)
                out.append(_err(f"assignment to undeclared variable {name!r}", span))
                continue
            if isinstance(d.var_type, sx.BoolType):
                check_bool(expr)
            else:
                check_enum_value(expr, name, d.var_type.literals)

    for spec in model.ltlspecs:
        for sub in ltl.subformulas(spec):
            if isinstance(sub, ltl.Atom):
                check_bool(sub.pred)
    return out


def _err(message: str, span: Optional[sx.Span]) -> Diagnostic:
    return Diagnostic(Severity.ERROR, message, span)


def _all_exprs(model: sx.SmvModel):
    for table in (model.inits, model.nexts):
        yield from table.values()
    for spec in model.ltlspecs:
        for sub in ltl.subformulas(spec):
            if isinstance(sub, ltl.Atom):
                yield sub.pred


def _walk_cases(e: sx.Expr):
    if isinstance(e, sx.CaseExpr):
        yield e
        for guard, value in e.branches:
            yield from _walk_cases(guard)
            yield from _walk_cases(value)
    elif isinstance(e, sx.Not):
        yield from _walk_cases(e.operand)
    elif isinstance(e, (sx.And, sx.Or)):
        yield from _walk_cases(e.left)
        yield from _walk_cases(e.right)


def check_semantics(model: sx.SmvModel) -> list[Diagnostic]:
    """Diagnostics for an already-parsed (or programmatically built) model.

    Errors block compilation: type problems, and case expressions whose final
    guard is not the literal TRUE ("case not total").  A variable without a
    next assignment gets a warning; its transitions are unconstrained.
    """
    out = _validate(model)
    for expr in _all_exprs(model):
        for case in _walk_cases(expr):
            final_guard = case.branches[-1][0]
            if not (isinstance(final_guard, sx.Const) and final_guard.value):
                out.append(_err("case not total: final guard must be TRUE", case.span))
    for d in model.vars:
        if d.name not in model.nexts:
            out.append(
                Diagnostic(
                    Severity.WARNING,
                    f"no next assignment for {d.name!r}; its transitions are unconstrained",
                    d.span,
                )
            )
    return out


# ===========================================================================
# Pretty printing
# ===========================================================================


def pretty_print(model: sx.SmvModel) -> str:
    """Canonical text for a model; reparsing yields an equal tree."""
    lines = ["MODULE main", ""]
    if model.vars:
        lines.append("VAR")
        for d in model.vars:
            lines.append(f"  {d.name} : {_format_type(d.var_type)};")
        lines.append("")
    if model.inits or model.nexts:
        lines.append("ASSIGN")
        for d in model.vars:
            if d.name in model.inits:
                lines.append(f"  init({d.name}) := {sx.format_expr(model.inits[d.name], 1)};")
        for d in model.vars:
            if d.name in model.nexts:
                lines.append(f"  next({d.name}) := {sx.format_expr(model.nexts[d.name], 1)};")
        lines.append("")
    for spec in model.ltlspecs:
        lines.append(f"LTLSPEC {ltl.format_ltl(spec)};")
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"


def _format_type(t: sx.VarType) -> str:
    if isinstance(t, sx.BoolType):
        return "boolean"
    return "{" + ", ".join(t.literals) + "}"
