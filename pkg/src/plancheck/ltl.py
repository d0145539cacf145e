"""Linear temporal logic over state predicates.

Formula nodes mirror the surface syntax (atoms, boolean connectives, X, F, G,
U).  Release exists only as the dual needed by negation normal form; the
parser never produces it and the formatter prints it with an ``R`` that the
parser will not accept back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from . import syntax as sx


@dataclass(frozen=True)
class Atom:
    pred: sx.Expr


@dataclass(frozen=True)
class Not:
    operand: "LtlFormula"


@dataclass(frozen=True)
class And:
    left: "LtlFormula"
    right: "LtlFormula"


@dataclass(frozen=True)
class Or:
    left: "LtlFormula"
    right: "LtlFormula"


@dataclass(frozen=True)
class Next:
    operand: "LtlFormula"


@dataclass(frozen=True)
class Finally:
    operand: "LtlFormula"


@dataclass(frozen=True)
class Globally:
    operand: "LtlFormula"


@dataclass(frozen=True)
class Until:
    left: "LtlFormula"
    right: "LtlFormula"


@dataclass(frozen=True)
class Release:
    """Dual of Until; internal to negation normal form."""

    left: "LtlFormula"
    right: "LtlFormula"


LtlFormula = Union[Atom, Not, And, Or, Next, Finally, Globally, Until, Release]

_UNARY = (Not, Next, Finally, Globally)
_BINARY = (And, Or, Until, Release)


def size(f: LtlFormula) -> int:
    """Number of nodes in the formula tree (atom predicates count as one)."""
    if isinstance(f, Atom):
        return 1
    if isinstance(f, _UNARY):
        return 1 + size(f.operand)
    return 1 + size(f.left) + size(f.right)


def subformulas(f: LtlFormula) -> list[LtlFormula]:
    """All distinct subformulas in post-order; structural duplicates appear once."""
    out: list[LtlFormula] = []
    seen: set[LtlFormula] = set()

    def walk(g: LtlFormula) -> None:
        if g in seen:
            return
        if isinstance(g, _UNARY):
            walk(g.operand)
        elif isinstance(g, _BINARY):
            walk(g.left)
            walk(g.right)
        seen.add(g)
        out.append(g)

    walk(f)
    return out


# ---------------------------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------------------------


def to_nnf(f: LtlFormula, negate: bool = False) -> LtlFormula:
    """Push negations down to atoms, introducing Release for negated Until.

    With ``negate=True`` the result is the NNF of the negated formula.  The
    output never exceeds twice the input size.
    """
    if isinstance(f, Atom):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return to_nnf(f.operand, not negate)
    if isinstance(f, And):
        a, b = to_nnf(f.left, negate), to_nnf(f.right, negate)
        return Or(a, b) if negate else And(a, b)
    if isinstance(f, Or):
        a, b = to_nnf(f.left, negate), to_nnf(f.right, negate)
        return And(a, b) if negate else Or(a, b)
    if isinstance(f, Next):
        return Next(to_nnf(f.operand, negate))
    if isinstance(f, Finally):
        return Globally(to_nnf(f.operand, True)) if negate else Finally(to_nnf(f.operand))
    if isinstance(f, Globally):
        return Finally(to_nnf(f.operand, True)) if negate else Globally(to_nnf(f.operand))
    if isinstance(f, Until):
        a, b = to_nnf(f.left, negate), to_nnf(f.right, negate)
        return Release(a, b) if negate else Until(a, b)
    if isinstance(f, Release):
        a, b = to_nnf(f.left, negate), to_nnf(f.right, negate)
        return Until(a, b) if negate else Release(a, b)
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: LtlFormula) -> bool:
    for g in subformulas(f):
        if isinstance(g, Not) and not isinstance(g.operand, Atom):
            return False
    return True


# ---------------------------------------------------------------------------
# Evaluation on lasso traces
# ---------------------------------------------------------------------------


def eval_on_lasso(f: LtlFormula, trace) -> bool:
    """Truth of ``f`` at position 0 of the infinite word spelled by a lasso
    trace (states ``0..k`` with the last state looping back to ``loop_back``).

    Until and Release are solved as least/greatest fixpoints over the loop.
    """
    if trace.loop_back is None:
        raise ValueError("trace has no loop_back; not a lasso")
    states = trace.states
    k = len(states) - 1
    loop = trace.loop_back
    if not 0 <= loop <= k:
        raise ValueError(f"loop_back {loop} out of range for {k + 1} states")

    def succ(i: int) -> int:
        return i + 1 if i < k else loop

    def future(i: int) -> range:
        # positions visited from i onward: the tail of the stem, then the loop
        return range(i, k + 1) if i < loop else range(loop, k + 1)

    vals: dict[LtlFormula, list[bool]] = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            v = [sx.eval_expr(g.pred, states[i]) for i in range(k + 1)]
        elif isinstance(g, Not):
            inner = vals[g.operand]
            v = [not x for x in inner]
        elif isinstance(g, And):
            a, b = vals[g.left], vals[g.right]
            v = [a[i] and b[i] for i in range(k + 1)]
        elif isinstance(g, Or):
            a, b = vals[g.left], vals[g.right]
            v = [a[i] or b[i] for i in range(k + 1)]
        elif isinstance(g, Next):
            inner = vals[g.operand]
            v = [inner[succ(i)] for i in range(k + 1)]
        elif isinstance(g, Finally):
            inner = vals[g.operand]
            v = [any(inner[j] for j in future(i)) for i in range(k + 1)]
        elif isinstance(g, Globally):
            inner = vals[g.operand]
            v = [all(inner[j] for j in future(i)) for i in range(k + 1)]
        elif isinstance(g, Until):
            a, b = vals[g.left], vals[g.right]
            v = [False] * (k + 1)
            changed = True
            while changed:
                changed = False
                for i in range(k, -1, -1):
                    nv = b[i] or (a[i] and v[succ(i)])
                    if nv and not v[i]:
                        v[i] = True
                        changed = True
        elif isinstance(g, Release):
            a, b = vals[g.left], vals[g.right]
            v = [True] * (k + 1)
            changed = True
            while changed:
                changed = False
                for i in range(k, -1, -1):
                    nv = b[i] and (a[i] or v[succ(i)])
                    if not nv and v[i]:
                        v[i] = False
                        changed = True
        else:
            raise TypeError(f"not a formula: {g!r}")
        vals[g] = v
    return vals[f][0]


def eval_on_prefix(f: LtlFormula, states: list) -> bool:
    """Pessimistic truth of an NNF formula on a finite prefix.

    A True result guarantees every infinite extension of the prefix satisfies
    the formula: G is never certified, X beyond the last state fails, and
    Until/Release need their discharging position inside the prefix.
    """
    if not is_nnf(f):
        raise ValueError("prefix evaluation requires negation normal form")
    k = len(states) - 1
    vals: dict[LtlFormula, list[bool]] = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            v = [sx.eval_expr(g.pred, states[i]) for i in range(k + 1)]
        elif isinstance(g, Not):
            inner = vals[g.operand]
            v = [not x for x in inner]
        elif isinstance(g, And):
            a, b = vals[g.left], vals[g.right]
            v = [a[i] and b[i] for i in range(k + 1)]
        elif isinstance(g, Or):
            a, b = vals[g.left], vals[g.right]
            v = [a[i] or b[i] for i in range(k + 1)]
        elif isinstance(g, Next):
            inner = vals[g.operand]
            v = [inner[i + 1] if i < k else False for i in range(k + 1)]
        elif isinstance(g, Finally):
            inner = vals[g.operand]
            v = [any(inner[i:]) for i in range(k + 1)]
        elif isinstance(g, Globally):
            v = [False] * (k + 1)
        elif isinstance(g, Until):
            a, b = vals[g.left], vals[g.right]
            v = [False] * (k + 1)
            for i in range(k, -1, -1):
                v[i] = b[i] or (a[i] and i < k and v[i + 1])
        elif isinstance(g, Release):
            a, b = vals[g.left], vals[g.right]
            v = [False] * (k + 1)
            for i in range(k, -1, -1):
                v[i] = b[i] and (a[i] or (i < k and v[i + 1]))
        else:
            raise TypeError(f"not a formula: {g!r}")
        vals[g] = v
    return vals[f][0]


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

_P_OR = 1
_P_AND = 2
_P_UNTIL = 3
_P_UNARY = 4


def format_ltl(f: LtlFormula) -> str:
    """Render with the fewest parentheses that reparse to the same tree."""
    return _fmt(f, 0)


def _fmt(f: LtlFormula, parent: int) -> str:
    if isinstance(f, Atom):
        p = f.pred
        if isinstance(p, (sx.Ident, sx.Const, sx.Eq)):
            return sx.format_expr(p)
        return "(" + sx.format_expr(p) + ")"
    if isinstance(f, _UNARY):
        op = {Not: "!", Next: "X ", Finally: "F ", Globally: "G "}[type(f)]
        s = op + _fmt(f.operand, _P_UNARY)
        return s if parent <= _P_UNARY else "(" + s + ")"
    if isinstance(f, (Until, Release)):
        op = " U " if isinstance(f, Until) else " R "
        # right-associative: parenthesize a nested left child of equal strength
        s = _fmt(f.left, _P_UNTIL + 1) + op + _fmt(f.right, _P_UNTIL)
        return s if parent <= _P_UNTIL else "(" + s + ")"
    if isinstance(f, And):
        s = _fmt(f.left, _P_AND) + " & " + _fmt(f.right, _P_AND + 1)
        return s if parent <= _P_AND else "(" + s + ")"
    if isinstance(f, Or):
        s = _fmt(f.left, _P_OR) + " | " + _fmt(f.right, _P_OR + 1)
        return s if parent <= _P_OR else "(" + s + ")"
    raise TypeError(f"cannot format {f!r}")
