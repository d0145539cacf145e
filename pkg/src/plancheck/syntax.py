"""Syntax trees for the SMV-subset modeling language.

Expression nodes are frozen dataclasses so they can be shared, hashed and
compared structurally.  Source spans are excluded from comparison: two parses
of the same text are equal even if their layout differs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union


@dataclass(frozen=True)
class Span:
    line: int
    column: int


# ---------------------------------------------------------------------------
# Variable domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoolType:
    def __repr__(self) -> str:
        return "boolean"


@dataclass(frozen=True)
class EnumType:
    literals: tuple[str, ...]

    def __repr__(self) -> str:
        return "{" + ", ".join(self.literals) + "}"


VarType = Union[BoolType, EnumType]


@dataclass(frozen=True)
class VarDecl:
    name: str
    var_type: VarType
    span: Optional[Span] = field(default=None, compare=False)


# ---------------------------------------------------------------------------
# State expressions
# ---------------------------------------------------------------------------


class Expr:
    """Base class for state expressions."""


@dataclass(frozen=True)
class Const(Expr):
    value: bool
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class Ident(Expr):
    """A bare identifier: a variable reference, or an enum literal when the
    expression sits in value position for an enum variable."""

    name: str
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class Eq(Expr):
    """Comparison of an enum variable against one of its literals."""

    var: str
    literal: str
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class CaseExpr(Expr):
    """First-match conditional.  Branches are (guard, value) pairs; the final
    guard must be the literal TRUE so the expression is total."""

    branches: tuple[tuple[Expr, Expr], ...]
    span: Optional[Span] = field(default=None, compare=False)


@dataclass
class SmvModel:
    """A parsed MODULE main: declarations, assignments and LTLSPEC blocks.

    ``inits`` and ``nexts`` map variable names to their assigned expressions;
    a variable appears at most once in each.
    """

    vars: tuple[VarDecl, ...]
    inits: dict[str, Expr]
    nexts: dict[str, Expr]
    ltlspecs: tuple = ()

    def decl(self, name: str) -> Optional[VarDecl]:
        for d in self.vars:
            if d.name == name:
                return d
        return None

    def var_names(self) -> list[str]:
        return [d.name for d in self.vars]


# ---------------------------------------------------------------------------
# Evaluation over explicit assignments
# ---------------------------------------------------------------------------

Assignment = Mapping[str, Union[bool, str]]


def eval_expr(e: Expr, env: Assignment) -> bool:
    """Evaluate a boolean-typed expression under a variable assignment.

    Assumes the expression is well typed; enum variables may only appear on
    the left of an Eq node here.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Ident):
        v = env[e.name]
        if not isinstance(v, bool):
            raise TypeError(f"variable {e.name!r} is not boolean")
        return v
    if isinstance(e, Not):
        return not eval_expr(e.operand, env)
    if isinstance(e, And):
        return eval_expr(e.left, env) and eval_expr(e.right, env)
    if isinstance(e, Or):
        return eval_expr(e.left, env) or eval_expr(e.right, env)
    if isinstance(e, Eq):
        return env[e.var] == e.literal
    if isinstance(e, CaseExpr):
        for guard, value in e.branches:
            if eval_expr(guard, env):
                return eval_expr(value, env)
        raise ValueError("case expression fell through; guards are not total")
    raise TypeError(f"not a boolean expression: {e!r}")


def eval_enum_value(e: Expr, env: Assignment, literals: tuple[str, ...]) -> str:
    """Evaluate an expression in value position for an enum variable."""
    if isinstance(e, Ident):
        if e.name in literals:
            return e.name
        v = env[e.name]
        if not isinstance(v, str):
            raise TypeError(f"variable {e.name!r} does not range over {literals}")
        return v
    if isinstance(e, CaseExpr):
        for guard, value in e.branches:
            if eval_expr(guard, env):
                return eval_enum_value(value, env, literals)
        raise ValueError("case expression fell through; guards are not total")
    raise TypeError(f"not an enum value expression: {e!r}")


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

# Binding strength, loosest first.  Used to insert the minimum parentheses
# that preserve tree structure under reparsing.
_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_ATOM = 4


def format_expr(e: Expr, indent: int = 0) -> str:
    return _fmt(e, 0, indent)


def _fmt(e: Expr, parent_prec: int, indent: int) -> str:
    if isinstance(e, Const):
        return "TRUE" if e.value else "FALSE"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Eq):
        return f"{e.var} = {e.literal}"
    if isinstance(e, Not):
        s = "!" + _fmt(e.operand, _PREC_NOT, indent)
        return s if parent_prec <= _PREC_NOT else "(" + s + ")"
    if isinstance(e, And):
        # left-associative: the right child needs parens at equal precedence
        s = _fmt(e.left, _PREC_AND, indent) + " & " + _fmt(e.right, _PREC_AND + 1, indent)
        return s if parent_prec <= _PREC_AND else "(" + s + ")"
    if isinstance(e, Or):
        s = _fmt(e.left, _PREC_OR, indent) + " | " + _fmt(e.right, _PREC_OR + 1, indent)
        return s if parent_prec <= _PREC_OR else "(" + s + ")"
    if isinstance(e, CaseExpr):
        pad = "  " * (indent + 1)
        lines = ["case"]
        for guard, value in e.branches:
            lines.append(f"{pad}  {_fmt(guard, 0, indent + 1)} : {_fmt(value, 0, indent + 1)};")
        lines.append(pad + "esac")
        return "\n".join(lines)
    raise TypeError(f"cannot format {e!r}")
