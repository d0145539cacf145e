"""Compilation of models to bit-level Kripke structures, plus explicit-state
operations (successor computation, reachability, deterministic runs).

Boolean variables take one bit.  An enum with n literals takes ceil(log2 n)
bits; literals are numbered in declaration order, least significant bit
first, and the unused codes are ruled out by a domain constraint conjoined
into both the initial and the transition predicate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

from . import circuits as ci
from . import syntax as sx
from .smv import check_semantics, Severity

Value = Union[bool, str]
State = dict[str, Value]


class CompileError(Exception):
    pass


class InvalidState(Exception):
    pass


class NondeterminismError(Exception):
    pass


class CapExceeded(Exception):
    pass


class DecodeError(Exception):
    pass


@dataclass
class Trace:
    """A finite state sequence; ``loop_back`` marks the index the successor
    of the last state re-enters, when known."""

    states: list[State]
    loop_back: Optional[int] = None


def trace_to_json(t: Trace) -> str:
    return json.dumps({"states": t.states, "loop_back": t.loop_back}, indent=2)


def trace_from_json(text: str) -> Trace:
    d = json.loads(text)
    return Trace(states=d["states"], loop_back=d.get("loop_back"))


@dataclass(frozen=True)
class StateVar:
    name: str
    var_type: sx.VarType
    bits: tuple[str, ...]

    @property
    def bit_width(self) -> int:
        return len(self.bits)


@dataclass
class KripkeStructure:
    """Bit-level transition system compiled from a model.

    ``init_pred`` ranges over current-state bits; ``trans_pred`` over current
    and primed (``'``-suffixed) bits.  ``atom_table`` maps each atomic
    proposition (boolean variables, and ``var=literal`` pairs for enums) to
    its predicate circuit.  Instances are not mutated after compilation.
    """

    state_vars: tuple[StateVar, ...]
    init_pred: ci.Node
    trans_pred: ci.Node
    atom_table: dict[str, ci.Node]
    ap_names: tuple[str, ...]
    circuit: ci.Circuit
    model: sx.SmvModel

    # -- predicates over expressions ------------------------------------

    def var(self, name: str) -> StateVar:
        for v in self.state_vars:
            if v.name == name:
                return v
        raise KeyError(name)

    def pred(self, expr: sx.Expr, prime: bool = False) -> ci.Node:
        """Circuit for a boolean expression over (current or primed) bits."""
        return _compile_bool(self.circuit, self, expr, prime)

    def eval_pred(self, expr: sx.Expr, state: State) -> bool:
        return sx.eval_expr(expr, state)

    # -- explicit-state views -------------------------------------------

    def bit_env(self, state: State, prime: bool = False) -> dict[str, bool]:
        env: dict[str, bool] = {}
        for v in self.state_vars:
            code = _encode_value(v, state[v.name])
            for i, b in enumerate(v.bits):
                env[b + "'" if prime else b] = bool(code >> i & 1)
        return env

    def check_state(self, state: State) -> None:
        for v in self.state_vars:
            if v.name not in state:
                raise InvalidState(f"missing value for {v.name!r}")
            val = state[v.name]
            if isinstance(v.var_type, sx.BoolType):
                if not isinstance(val, bool):
                    raise InvalidState(f"{v.name!r} must be boolean, got {val!r}")
            elif val not in v.var_type.literals:
                raise InvalidState(f"{val!r} not in domain of {v.name!r}")

    def states_iter(self):
        """All well-typed assignments, in code order."""

        def rec(i: int, acc: State):
            if i == len(self.state_vars):
                yield dict(acc)
                return
            v = self.state_vars[i]
            if isinstance(v.var_type, sx.BoolType):
                choices: tuple[Value, ...] = (False, True)
            else:
                choices = v.var_type.literals
            for c in choices:
                acc[v.name] = c
                yield from rec(i + 1, acc)

        yield from rec(0, {})

    def initial_states(self) -> list[State]:
        out = []
        for s in self.states_iter():
            if ci.evaluate(self.init_pred, self.bit_env(s)):
                out.append(s)
        return out

    def state_key(self, s: State) -> tuple:
        return tuple(s[v.name] for v in self.state_vars)


def _bit_names(name: str, width: int) -> tuple[str, ...]:
    if width == 1:
        return (name,)
    return tuple(f"{name}@{i}" for i in range(width))


def _space_size(k: "KripkeStructure") -> int:
    n = 1
    for v in k.state_vars:
        n *= 2 if isinstance(v.var_type, sx.BoolType) else len(v.var_type.literals)
    return n


def _encode_value(v: StateVar, val: Value) -> int:
    if isinstance(v.var_type, sx.BoolType):
        return int(bool(val))
    return v.var_type.literals.index(val)


def _bits_in(c: ci.Circuit, v: StateVar, prime: bool) -> list[ci.Node]:
    return [c.input(b + "'" if prime else b) for b in v.bits]


def _code_eq(c: ci.Circuit, bits: list[ci.Node], code: int) -> ci.Node:
    out = c.true
    for i, b in enumerate(bits):
        out = c.and_(out, b if code >> i & 1 else c.not_(b))
    return out


def _domain_ok(c: ci.Circuit, k: "KripkeStructure", v: StateVar, prime: bool) -> ci.Node:
    if isinstance(v.var_type, sx.BoolType):
        return c.true
    n = len(v.var_type.literals)
    if n == 1 << v.bit_width:
        return c.true
    bits = _bits_in(c, v, prime)
    return c.or_all(_code_eq(c, bits, code) for code in range(n))


def _compile_bool(c: ci.Circuit, k: KripkeStructure, e: sx.Expr, prime: bool) -> ci.Node:
    if isinstance(e, sx.Const):
        return c.const(e.value)
    if isinstance(e, sx.Ident):
        v = k.var(e.name)
        if not isinstance(v.var_type, sx.BoolType):
            raise CompileError(f"enum variable {e.name!r} used as boolean")
        return _bits_in(c, v, prime)[0]
    if isinstance(e, sx.Not):
        return c.not_(_compile_bool(c, k, e.operand, prime))
    if isinstance(e, sx.And):
        return c.and_(_compile_bool(c, k, e.left, prime), _compile_bool(c, k, e.right, prime))
    if isinstance(e, sx.Or):
        return c.or_(_compile_bool(c, k, e.left, prime), _compile_bool(c, k, e.right, prime))
    if isinstance(e, sx.Eq):
        v = k.var(e.var)
        if isinstance(v.var_type, sx.BoolType):
            raise CompileError(f"equality on boolean variable {e.var!r}")
        if e.literal not in v.var_type.literals:
            raise CompileError(f"literal {e.literal!r} outside the domain of {e.var!r}")
        return _code_eq(c, _bits_in(c, v, prime), v.var_type.literals.index(e.literal))
    if isinstance(e, sx.CaseExpr):
        out = _compile_bool(c, k, e.branches[-1][1], prime)
        for guard, value in reversed(e.branches[:-1]):
            out = c.ite(_compile_bool(c, k, guard, prime), _compile_bool(c, k, value, prime), out)
        return out
    raise CompileError(f"cannot compile {e!r}")


def _value_eq(
    c: ci.Circuit, k: KripkeStructure, v: StateVar, e: sx.Expr, target_prime: bool
) -> ci.Node:
    """Circuit asserting that variable ``v`` (current or primed) equals the
    value of ``e`` evaluated over current-state bits."""
    tbits = _bits_in(c, v, target_prime)
    if isinstance(v.var_type, sx.BoolType):
        return c.xnor(tbits[0], _compile_bool(c, k, e, False))
    literals = v.var_type.literals
    if isinstance(e, sx.Ident):
        if e.name in literals:
            return _code_eq(c, tbits, literals.index(e.name))
        src = k.var(e.name)
        if src.var_type != v.var_type:
            raise CompileError(f"{e.name!r} does not range over the domain of {v.name!r}")
        sbits = _bits_in(c, src, False)
        return c.and_all(c.xnor(t, s) for t, s in zip(tbits, sbits))
    if isinstance(e, sx.CaseExpr):
        out = _value_eq(c, k, v, e.branches[-1][1], target_prime)
        for guard, value in reversed(e.branches[:-1]):
            out = c.ite(
                _compile_bool(c, k, guard, False),
                _value_eq(c, k, v, value, target_prime),
                out,
            )
        return out
    raise CompileError(f"cannot compile enum value {e!r} for {v.name!r}")


def compile(model: sx.SmvModel) -> KripkeStructure:
    """Compile a semantically clean model to a bit-level structure.

    Raises CompileError if check_semantics reports any error-severity
    diagnostics (the model must already be well typed and case-total).
    """
    errors = [d for d in check_semantics(model) if d.severity is Severity.ERROR]
    if errors:
        raise CompileError("; ".join(d.message for d in errors))

    svars = []
    for d in model.vars:
        if isinstance(d.var_type, sx.BoolType):
            width = 1
        else:
            width = (len(d.var_type.literals) - 1).bit_length()
        svars.append(StateVar(d.name, d.var_type, _bit_names(d.name, width)))

    c = ci.Circuit()
    k = KripkeStructure(
        state_vars=tuple(svars),
        init_pred=c.true,
        trans_pred=c.true,
        atom_table={},
        ap_names=(),
        circuit=c,
        model=model,
    )

    init = c.and_all(_domain_ok(c, k, v, False) for v in k.state_vars)
    for v in k.state_vars:
        if v.name in model.inits:
            init = c.and_(init, _value_eq(c, k, v, model.inits[v.name], False))

    trans = c.and_all(_domain_ok(c, k, v, False) for v in k.state_vars)
    trans = c.and_(trans, c.and_all(_domain_ok(c, k, v, True) for v in k.state_vars))
    for v in k.state_vars:
        if v.name in model.nexts:
            trans = c.and_(trans, _value_eq(c, k, v, model.nexts[v.name], True))

    atoms: dict[str, ci.Node] = {}
    for v in k.state_vars:
        if isinstance(v.var_type, sx.BoolType):
            atoms[v.name] = c.input(v.bits[0])
        else:
            for code, lit in enumerate(v.var_type.literals):
                atoms[f"{v.name}={lit}"] = _code_eq(c, _bits_in(c, v, False), code)

    k.init_pred = init
    k.trans_pred = trans
    k.atom_table = atoms
    k.ap_names = tuple(atoms)
    return k


# ---------------------------------------------------------------------------
# Explicit-state operations
# ---------------------------------------------------------------------------


def successors(k: KripkeStructure, state: State) -> list[State]:
    """All states t with trans_pred(state, t), in code order.

    Assigned variables are evaluated directly; unassigned ones range over
    their whole domain.
    """
    k.check_state(state)
    choices: list[tuple[str, list[Value]]] = []
    for v in k.state_vars:
        nxt = k.model.nexts.get(v.name)
        if nxt is None:
            if isinstance(v.var_type, sx.BoolType):
                choices.append((v.name, [False, True]))
            else:
                choices.append((v.name, list(v.var_type.literals)))
        elif isinstance(v.var_type, sx.BoolType):
            choices.append((v.name, [sx.eval_expr(nxt, state)]))
        else:
            choices.append((v.name, [sx.eval_enum_value(nxt, state, v.var_type.literals)]))
    out: list[State] = [{}]
    for name, vals in choices:
        out = [dict(s, **{name: val}) for s in out for val in vals]
    return out


def enumerate_reachable(k: KripkeStructure, cap: int = 4096) -> list[State]:
    """Breadth-first reachable set from the initial states, in visit order.

    Raises CapExceeded as soon as more than ``cap`` states are found.  Also
    asserts totality: every reachable state must have a successor.
    """
    if _space_size(k) > max(cap * 256, 1 << 20):
        raise CapExceeded("state space too large to enumerate")
    frontier = k.initial_states()
    seen: dict[tuple, State] = {}
    for s in frontier:
        seen[k.state_key(s)] = s
    if len(seen) > cap:
        raise CapExceeded(f"more than {cap} reachable states")
    while frontier:
        nxt: list[State] = []
        for s in frontier:
            succ = successors(k, s)
            assert succ, f"state {s!r} has no successor"
            for t in succ:
                key = k.state_key(t)
                if key not in seen:
                    seen[key] = t
                    nxt.append(t)
                    if len(seen) > cap:
                        raise CapExceeded(f"more than {cap} reachable states")
        frontier = nxt
    return list(seen.values())


def run_deterministic(k: KripkeStructure, steps: int) -> Trace:
    """Walk the unique execution for ``steps`` transitions.

    Raises NondeterminismError unless there is exactly one initial state and
    every state along the run has exactly one successor.
    """
    inits = k.initial_states()
    if len(inits) != 1:
        raise NondeterminismError(f"expected exactly one initial state, found {len(inits)}")
    states = [inits[0]]
    index_of = {k.state_key(inits[0]): 0}
    for _ in range(steps):
        succ = successors(k, states[-1])
        if len(succ) != 1:
            unassigned = [v.name for v in k.state_vars if v.name not in k.model.nexts]
            raise NondeterminismError(
                f"state {states[-1]!r} has {len(succ)} successors"
                + (f" (unconstrained: {', '.join(unassigned)})" if unassigned else "")
            )
        nxt = succ[0]
        states.append(nxt)
        index_of.setdefault(k.state_key(nxt), len(states) - 1)
    closing = successors(k, states[-1])
    if len(closing) != 1:
        raise NondeterminismError(f"state {states[-1]!r} has {len(closing)} successors")
    loop_back = index_of.get(k.state_key(closing[0]))
    return Trace(states=states, loop_back=loop_back)
