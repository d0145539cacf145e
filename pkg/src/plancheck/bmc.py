"""SAT-based bounded model checking of temporal properties.

For a bound k the engine builds

    Init(s0) & Trans(s0,s1) & ... & Trans(s_{k-1},s_k) & Viol(s0..s_k)

where Viol encodes the negated property over the k+1 unrolled states under
bounded lasso semantics: selector bits choose either "no loop" or a loop
position l (with an extra Trans(s_k, s_l) back edge), exactly one of them.
The no-loop case uses pessimistic finite-prefix semantics, so it can only be
chosen for violations whose truth is determined on the prefix; liveness
violations must take a loop.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Union

from . import circuits as ci
from . import kripke as kr
from . import ltl
from . import sat
from . import syntax as sx


@dataclass
class Holds:
    bound_proved: int
    complete: bool


@dataclass
class CounterexampleFound:
    trace: kr.Trace
    at_bound: int


@dataclass
class BoundExhausted:
    max_bound: int


CheckOutcome = Union[Holds, CounterexampleFound, BoundExhausted]


def completeness_bound(k: kr.KripkeStructure, cap: int = 4096) -> Optional[int]:
    """Bound at which an unsatisfied search is treated as conclusive.

    A model sequenced by an enum variable named ``stage`` gets |domain| + 1,
    enough for every run to park in the absorbing stage with a transition to
    spare; for the deterministic models the plan encoder emits this decides
    the goal formula exactly.  Otherwise the reachable-state count is used,
    or None when it exceeds ``cap`` (the search can then only ever report
    BoundExhausted).  The count is exact when each state has one successor,
    since the lone path closes its lasso within that many steps; for
    nondeterministic models with nested temporal operators it is a working
    window rather than a proven threshold, which can require winding through
    separate loops in sequence and so exceed the state count.
    """
    for v in k.state_vars:
        if v.name == "stage" and isinstance(v.var_type, sx.EnumType):
            return len(v.var_type.literals) + 1
    try:
        return len(kr.enumerate_reachable(k, cap))
    except kr.CapExceeded:
        return None


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def _step_name(bit: str, step: int) -> str:
    return f"{bit}#{step}"


def _step_rename(step: int):
    def rename(name: str) -> str:
        if name.endswith("'"):
            return _step_name(name[:-1], step + 1)
        return _step_name(name, step)

    return rename


class _PropertyEncoder:
    """Unrolls a formula in negation normal form over steps 0..bound."""

    def __init__(self, k: kr.KripkeStructure, nu: ltl.LtlFormula, bound: int):
        self.k = k
        self.c = k.circuit
        self.nu = nu
        self.bound = bound
        self.subs = ltl.subformulas(nu)
        self._atom_tpl: dict[ltl.LtlFormula, ci.Node] = {}
        self._atom_at: dict[tuple[int, int], ci.Node] = {}

    def atom(self, g: ltl.Atom, step: int) -> ci.Node:
        key = (id(g), step)
        node = self._atom_at.get(key)
        if node is None:
            tpl = self._atom_tpl.get(g)
            if tpl is None:
                tpl = self.k.pred(g.pred)
                self._atom_tpl[g] = tpl
            node = ci.instantiate(self.c, tpl, _step_rename(step))
            self._atom_at[key] = node
        return node

    def encode(self, loop: Optional[int]) -> ci.Node:
        """Violation circuit at position 0, for a fixed loop position or for
        the no-loop (finite prefix) case."""
        c = self.c
        kk = self.bound
        vals: dict[ltl.LtlFormula, list[ci.Node]] = {}
        for g in self.subs:
            if isinstance(g, ltl.Atom):
                v = [self.atom(g, j) for j in range(kk + 1)]
            elif isinstance(g, ltl.Not):
                v = [c.not_(x) for x in vals[g.operand]]
            elif isinstance(g, ltl.And):
                v = [c.and_(a, b) for a, b in zip(vals[g.left], vals[g.right])]
            elif isinstance(g, ltl.Or):
                v = [c.or_(a, b) for a, b in zip(vals[g.left], vals[g.right])]
            elif isinstance(g, ltl.Next):
                inner = vals[g.operand]
                wrap = c.false if loop is None else inner[loop]
                v = [inner[j + 1] for j in range(kk)] + [wrap]
            else:
                v = self._fixpoint(g, vals, loop)
            vals[g] = v
        return vals[self.nu][0]

    def _fixpoint(self, g, vals, loop: Optional[int]) -> list[ci.Node]:
        # Temporal operators unroll backwards.  With a loop at l the tail of
        # the recurrence is the value of a second pass over l..k, which is
        # enough: a witness (or a failure of release) repeats within one
        # extra lap.
        c = self.c
        kk = self.bound
        if isinstance(g, ltl.Finally):
            x = vals[g.operand]
            step = lambda j, acc: c.or_(x[j], acc)
            tail = c.false
        elif isinstance(g, ltl.Globally):
            x = vals[g.operand]
            step = lambda j, acc: c.and_(x[j], acc)
            tail = c.true if loop is not None else c.false
        elif isinstance(g, ltl.Until):
            a, b = vals[g.left], vals[g.right]
            step = lambda j, acc: c.or_(b[j], c.and_(a[j], acc))
            tail = c.false
        elif isinstance(g, ltl.Release):
            a, b = vals[g.left], vals[g.right]
            step = lambda j, acc: c.and_(b[j], c.or_(a[j], acc))
            tail = c.true if loop is not None else c.false
        else:
            raise TypeError(f"unexpected formula {g!r}")
        acc = tail
        if loop is not None:
            for j in range(kk, loop - 1, -1):
                acc = step(j, acc)
        out: list[ci.Node] = [c.false] * (kk + 1)
        for j in range(kk, -1, -1):
            acc = step(j, acc)
            out[j] = acc
        return out


@dataclass
class BmcEncoding:
    bound: int
    cnf: sat.CnfFormula
    root_lit: int
    step_bits: list[list[str]]  # bit names per step, in state-var order
    loop_names: list[str]  # selector input name per loop position
    noloop_name: str
    kripke: kr.KripkeStructure


def _build_psi(k: kr.KripkeStructure, nu: ltl.LtlFormula, bound: int):
    """Circuit parts of the bound-``bound`` query: path constraints, the
    selector constraint block, and the selector input names."""
    c = k.circuit
    path = [ci.instantiate(c, k.init_pred, _step_rename(0))]
    for i in range(bound):
        path.append(ci.instantiate(c, k.trans_pred, _step_rename(i)))

    noloop_name = f"sel|{bound}|noloop"
    loop_names = [f"sel|{bound}|loop{l}" for l in range(bound + 1)]
    sels = [c.input(noloop_name)] + [c.input(n) for n in loop_names]
    one_of = c.or_all(sels)
    for s1, s2 in itertools.combinations(sels, 2):
        one_of = c.and_(one_of, c.not_(c.and_(s1, s2)))

    enc = _PropertyEncoder(k, nu, bound)
    prop = c.or_(c.not_(sels[0]), enc.encode(None))
    for l in range(bound + 1):

        def close_rename(name: str) -> str:
            if name.endswith("'"):
                return _step_name(name[:-1], l)
            return _step_name(name, bound)

        back_edge = ci.instantiate(c, k.trans_pred, close_rename)
        body = c.and_(back_edge, enc.encode(l))
        prop = c.and_(prop, c.or_(c.not_(sels[1 + l]), body))

    root = c.and_all(path + [one_of, prop])
    return root, noloop_name, loop_names


def encode_psi_k(k: kr.KripkeStructure, phi: ltl.LtlFormula, bound: int) -> BmcEncoding:
    """Encode "some length-``bound`` path from an initial state violates
    ``phi``" to CNF.  The returned formula has the root already asserted."""
    nu = ltl.to_nnf(phi, negate=True)
    root, noloop_name, loop_names = _build_psi(k, nu, bound)
    cnf, lit = sat.tseitin_encode(root)
    step_bits = [[_step_name(b, j) for v in k.state_vars for b in v.bits] for j in range(bound + 1)]
    return BmcEncoding(bound, cnf, lit, step_bits, loop_names, noloop_name, k)


def _decode_state(k: kr.KripkeStructure, step: int, lookup) -> kr.State:
    state: kr.State = {}
    for v in k.state_vars:
        code = 0
        for i, b in enumerate(v.bits):
            if lookup(_step_name(b, step)):
                code |= 1 << i
        if isinstance(v.var_type, sx.BoolType):
            state[v.name] = bool(code)
        else:
            if code >= len(v.var_type.literals):
                raise kr.DecodeError(
                    f"code {code} of {v.name!r} at step {step} has no literal"
                )
            state[v.name] = v.var_type.literals[code]
    return state


def _decode_trace(
    k: kr.KripkeStructure,
    bound: int,
    model: dict[int, bool],
    name_map: dict[str, int],
    loop_names: list[str],
) -> kr.Trace:
    def lookup(name: str) -> bool:
        var = name_map.get(name)
        # bits absent from the CNF are unconstrained; fix them to False
        return False if var is None else model.get(var, False)

    states = [_decode_state(k, j, lookup) for j in range(bound + 1)]
    loop_back = None
    for l, name in enumerate(loop_names):
        if lookup(name):
            loop_back = l
            break
    return kr.Trace(states=states, loop_back=loop_back)


def extract_trace(enc: BmcEncoding, model: dict[int, bool]) -> kr.Trace:
    """Decode a satisfying assignment of an encoding into a trace."""
    return _decode_trace(enc.kripke, enc.bound, model, enc.cnf.name_map, enc.loop_names)


def _pin_witness(
    solver: sat.Solver,
    name_map: dict[str, int],
    base: list[int],
    k: kr.KripkeStructure,
    bound: int,
    loop_names: list[str],
    noloop_name: str,
) -> dict[int, bool]:
    """Drive the solver to one canonical witness at a satisfiable bound.

    The selector is fixed first (earliest loop-back wins, the loop-free
    case last), then every known state bit is forced low where the formula
    allows it.  The incremental and re-encoded searches face the same
    constraints over these variables, so both land on the same trace.
    """
    assumptions = list(base)
    for name in loop_names + [noloop_name]:
        lit = name_map.get(name)
        if lit is None:
            continue
        if solver.solve(assumptions + [lit]).satisfiable:
            assumptions.append(lit)
            break
    for step in range(bound + 1):
        for v in k.state_vars:
            for bit in v.bits:
                var = name_map.get(_step_name(bit, step))
                if var is None:
                    continue
                if solver.solve(assumptions + [-var]).satisfiable:
                    assumptions.append(-var)
                else:
                    assumptions.append(var)
    res = solver.solve(assumptions)
    if not res.satisfiable:
        raise RuntimeError("witness pinning lost satisfiability")
    return res.model


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------


class BmcSession:
    """Incremental search: one solver, clauses added as the bound grows.

    Path constraints are asserted permanently (they are shared by every
    later bound); each bound's violation circuit is activated through an
    assumption literal, so learned clauses carry over.
    """

    def __init__(self, k: kr.KripkeStructure, phi: ltl.LtlFormula):
        self.k = k
        self.nu = ltl.to_nnf(phi, negate=True)
        self.solver = sat.Solver()
        self.name_map: dict[str, int] = {}
        self.cache: dict[int, int] = {}
        self._trans_added = -1
        init = ci.instantiate(k.circuit, k.init_pred, _step_rename(0))
        self._assert(init)

    def _lit(self, node: ci.Node) -> int:
        return sat.encode_circuit(
            node, self.solver.new_var, self.solver.add_clause, self.name_map, self.cache
        )

    def _assert(self, node: ci.Node) -> None:
        self.solver.add_clause([self._lit(node)])

    def solve_bound(self, bound: int):
        c = self.k.circuit
        while self._trans_added < bound - 1:
            self._trans_added += 1
            step = self._trans_added
            self._assert(ci.instantiate(c, self.k.trans_pred, _step_rename(step)))

        noloop_name = f"sel|{bound}|noloop"
        loop_names = [f"sel|{bound}|loop{l}" for l in range(bound + 1)]
        sels = [c.input(noloop_name)] + [c.input(n) for n in loop_names]
        parts = [c.or_all(sels)]
        for s1, s2 in itertools.combinations(sels, 2):
            parts.append(c.not_(c.and_(s1, s2)))

        enc = _PropertyEncoder(self.k, self.nu, bound)
        parts.append(c.or_(c.not_(sels[0]), enc.encode(None)))
        for l in range(bound + 1):

            def close_rename(name: str, _l=l) -> str:
                if name.endswith("'"):
                    return _step_name(name[:-1], _l)
                return _step_name(name, bound)

            back_edge = ci.instantiate(c, self.k.trans_pred, close_rename)
            parts.append(c.or_(c.not_(sels[1 + l]), c.and_(back_edge, enc.encode(l))))

        prop_lit = self._lit(c.and_all(parts))
        res = self.solver.solve(assumptions=[prop_lit])
        if not res.satisfiable:
            return None
        model = _pin_witness(
            self.solver, self.name_map, [prop_lit], self.k, bound, loop_names, noloop_name
        )
        return _decode_trace(self.k, bound, model, self.name_map, loop_names)


def check_spec(
    k: kr.KripkeStructure,
    phi: ltl.LtlFormula,
    max_bound: int,
    incremental: bool = True,
) -> CheckOutcome:
    """Search bounds 0..max_bound for a violation of ``phi``.

    Returns the first counterexample found; Holds once the completeness
    bound is passed without one; BoundExhausted otherwise.  The incremental
    and per-bound re-encoding paths produce the same outcome.
    """
    cb = completeness_bound(k)
    session = BmcSession(k, phi) if incremental else None
    for bound in range(max_bound + 1):
        if incremental:
            trace = session.solve_bound(bound)
        else:
            enc = encode_psi_k(k, phi, bound)
            solver = sat.Solver()
            for _ in range(enc.cnf.var_count):
                solver.new_var()
            for clause in enc.cnf.clauses:
                solver.add_clause(clause)
            trace = None
            if solver.solve().satisfiable:
                model = _pin_witness(
                    solver, enc.cnf.name_map, [], k, bound, enc.loop_names, enc.noloop_name
                )
                trace = extract_trace(enc, model)
        if trace is not None:
            revalidate_counterexample(k, phi, trace)
            return CounterexampleFound(trace=trace, at_bound=bound)
        if cb is not None and bound >= cb:
            return Holds(bound_proved=bound, complete=True)
    return BoundExhausted(max_bound=max_bound)


def revalidate_counterexample(k: kr.KripkeStructure, phi: ltl.LtlFormula, t: kr.Trace) -> None:
    """Check a trace against the structure and the property; raises if the
    trace is not a genuine violation."""
    if not ci.evaluate(k.init_pred, k.bit_env(t.states[0])):
        raise RuntimeError("trace does not start in an initial state")
    for a, b in zip(t.states, t.states[1:]):
        if not _trans_holds(k, a, b):
            raise RuntimeError("trace has a non-transition step")
    if t.loop_back is not None:
        if not _trans_holds(k, t.states[-1], t.states[t.loop_back]):
            raise RuntimeError("trace loop edge is not a transition")
        if ltl.eval_on_lasso(phi, t):
            raise RuntimeError("trace does not violate the property")
    else:
        if not ltl.eval_on_prefix(ltl.to_nnf(phi, negate=True), t.states):
            raise RuntimeError("trace prefix does not determine a violation")


def _trans_holds(k: kr.KripkeStructure, a: kr.State, b: kr.State) -> bool:
    env = k.bit_env(a)
    env.update(k.bit_env(b, prime=True))
    return ci.evaluate(k.trans_pred, env)
