"""CNF structures, Tseitin encoding of circuits, and a small CDCL solver.

The solver uses two-watched-literal propagation, first-UIP clause learning
and non-chronological backjumping.  Branching is deterministic: the lowest
unassigned variable is tried with polarity false first, so identical inputs
always produce identical models.  Assumption literals let a caller reuse one
clause database across related queries; learned clauses are consequences of
the clause database alone, so they stay valid when assumptions change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from . import circuits as ci


@dataclass
class CnfFormula:
    var_count: int
    clauses: list[list[int]]
    name_map: dict[str, int] = field(default_factory=dict)  # input name -> variable


@dataclass
class SatResult:
    satisfiable: bool
    model: Optional[dict[int, bool]] = None

    @classmethod
    def sat(cls, model: dict[int, bool]) -> "SatResult":
        return cls(True, model)

    @classmethod
    def unsat(cls) -> "SatResult":
        return cls(False, None)


# ---------------------------------------------------------------------------
# CDCL solver
# ---------------------------------------------------------------------------


class Solver:
    def __init__(self) -> None:
        self.nvars = 0
        self.values: list[int] = [0]  # 1-indexed; 0 unassigned, 1 true, -1 false
        self.level: list[int] = [0]
        self.reason: list[Optional[list[int]]] = [None]
        self.watches: dict[int, list[list[int]]] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.root_unsat = False
        self.clauses: list[list[int]] = []  # originals, kept for model checks

    def new_var(self) -> int:
        self.nvars += 1
        self.values.append(0)
        self.level.append(0)
        self.reason.append(None)
        self.watches[self.nvars] = []
        self.watches[-self.nvars] = []
        return self.nvars

    def _ensure_var(self, v: int) -> None:
        while self.nvars < v:
            self.new_var()

    def lit_value(self, l: int) -> Optional[bool]:
        v = self.values[abs(l)]
        if v == 0:
            return None
        return (v > 0) == (l > 0)

    def add_clause(self, lits: Iterable[int]) -> None:
        # Only legal between solves (decision level 0); level-0 facts are
        # permanent, so false literals can be dropped and satisfied clauses
        # discarded outright.
        assert not self.trail_lim, "add_clause requires decision level 0"
        lits = list(lits)
        self.clauses.append(lits)
        out: list[int] = []
        seen: set[int] = set()
        for l in lits:
            self._ensure_var(abs(l))
            if -l in seen:
                return  # tautology
            if l in seen:
                continue
            v = self.lit_value(l)
            if v is True:
                return
            if v is False:
                continue
            seen.add(l)
            out.append(l)
        if not out:
            self.root_unsat = True
            return
        if len(out) == 1:
            self._enqueue(out[0], None)
            return
        self.watches[out[0]].append(out)
        self.watches[out[1]].append(out)

    def _enqueue(self, l: int, reason: Optional[list[int]]) -> None:
        v = abs(l)
        self.values[v] = 1 if l > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(l)

    def _propagate(self) -> Optional[list[int]]:
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            falsified = -p
            ws = self.watches[falsified]
            i = 0
            n = len(ws)
            kept: list[list[int]] = []
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == falsified:
                    c[0], c[1] = c[1], c[0]
                first = self.lit_value(c[0])
                if first is True:
                    kept.append(c)
                    continue
                moved = False
                for j in range(2, len(c)):
                    if self.lit_value(c[j]) is not False:
                        c[1], c[j] = c[j], c[1]
                        self.watches[c[1]].append(c)
                        moved = True
                        break
                if moved:
                    continue
                kept.append(c)
                if first is False:
                    kept.extend(ws[i:])
                    self.watches[falsified] = kept
                    return c
                self._enqueue(c[0], c)
            self.watches[falsified] = kept
        return None

    def _backtrack(self, target: int) -> None:
        if len(self.trail_lim) <= target:
            return
        limit = self.trail_lim[target]
        for l in reversed(self.trail[limit:]):
            v = abs(l)
            self.values[v] = 0
            self.reason[v] = None
        del self.trail[limit:]
        del self.trail_lim[target:]
        self.qhead = len(self.trail)

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        cur = len(self.trail_lim)
        learnt: list[int] = [0]  # slot for the asserting literal
        seen: set[int] = set()
        path = 0
        p = 0
        idx = len(self.trail) - 1
        c: Optional[list[int]] = confl
        while True:
            assert c is not None
            for q in c[1:] if p else c:
                v = abs(q)
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    if self.level[v] == cur:
                        path += 1
                    else:
                        learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            c = self.reason[abs(p)]
            path -= 1
            if path == 0:
                break
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        # second watch must sit at the backjump level
        hi = 1
        for j in range(2, len(learnt)):
            if self.level[abs(learnt[j])] > self.level[abs(learnt[hi])]:
                hi = j
        learnt[1], learnt[hi] = learnt[hi], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def _pick_branch(self) -> Optional[int]:
        for v in range(1, self.nvars + 1):
            if self.values[v] == 0:
                return -v  # polarity: false first
        return None

    def solve(self, assumptions: Sequence[int] = ()) -> SatResult:
        if self.root_unsat:
            return SatResult.unsat()
        self._backtrack(0)
        self.qhead = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                if not self.trail_lim:
                    self.root_unsat = True
                    return SatResult.unsat()
                learnt, bt = self._analyze(confl)
                self._backtrack(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._enqueue(learnt[0], learnt)
                continue
            decision = None
            assumption_false = False
            while len(self.trail_lim) < len(assumptions):
                a = assumptions[len(self.trail_lim)]
                self._ensure_var(abs(a))
                v = self.lit_value(a)
                if v is True:
                    self.trail_lim.append(len(self.trail))
                elif v is False:
                    assumption_false = True
                    break
                else:
                    decision = a
                    break
            if assumption_false:
                self._backtrack(0)
                return SatResult.unsat()
            if decision is None:
                decision = self._pick_branch()
                if decision is None:
                    model = {v: self.values[v] > 0 for v in range(1, self.nvars + 1)}
                    self._backtrack(0)
                    for c in self.clauses:
                        if not any(model[abs(l)] == (l > 0) for l in c):
                            raise RuntimeError(f"model check failed on clause {c}")
                    return SatResult.sat(model)
            self.trail_lim.append(len(self.trail))
            self._enqueue(decision, None)


def _verify_model(cnf: CnfFormula, model: dict[int, bool]) -> None:
    for c in cnf.clauses:
        if not any(model[abs(l)] == (l > 0) for l in c):
            raise RuntimeError(f"model check failed on clause {c}")


def solve(cnf: CnfFormula, assumptions: Sequence[int] = ()) -> SatResult:
    """Decide a CNF formula; satisfying models are verified before return."""
    s = Solver()
    s._ensure_var(cnf.var_count)
    for c in cnf.clauses:
        s.add_clause(c)
    res = s.solve(assumptions)
    if res.satisfiable:
        for v in range(1, cnf.var_count + 1):
            res.model.setdefault(v, False)
        _verify_model(cnf, res.model)
    return res


# ---------------------------------------------------------------------------
# Tseitin transformation
# ---------------------------------------------------------------------------


def encode_circuit(
    root: ci.Node,
    new_var: Callable[[], int],
    add_clause: Callable[[list[int]], None],
    name_map: dict[str, int],
    cache: dict[int, int],
) -> int:
    """Encode a circuit DAG, one definition per shared gate, returning the
    literal equivalent to the root.  NOT nodes cost nothing: they reuse the
    child's variable with opposite sign."""
    for n in ci.topo_order([root]):
        if n.nid in cache:
            continue
        if n.kind == ci.CONST:
            v = new_var()
            add_clause([v] if n.value else [-v])
            cache[n.nid] = v
        elif n.kind == ci.IN:
            v = name_map.get(n.name)
            if v is None:
                v = new_var()
                name_map[n.name] = v
            cache[n.nid] = v
        elif n.kind == ci.NOT:
            cache[n.nid] = -cache[n.a.nid]
        elif n.kind == ci.AND:
            a, b = cache[n.a.nid], cache[n.b.nid]
            v = new_var()
            add_clause([-v, a])
            add_clause([-v, b])
            add_clause([v, -a, -b])
            cache[n.nid] = v
        else:  # OR
            a, b = cache[n.a.nid], cache[n.b.nid]
            v = new_var()
            add_clause([v, -a])
            add_clause([v, -b])
            add_clause([-v, a, b])
            cache[n.nid] = v
    return cache[root.nid]


def tseitin_encode(root: ci.Node) -> tuple[CnfFormula, int]:
    """CNF for a circuit with the root asserted; equisatisfiable with the
    circuit itself.  Also returns the root literal."""
    cnf = CnfFormula(0, [], {})

    def new_var() -> int:
        cnf.var_count += 1
        return cnf.var_count

    lit = encode_circuit(root, new_var, cnf.clauses.append, cnf.name_map, {})
    cnf.clauses.append([lit])
    return cnf, lit


# ---------------------------------------------------------------------------
# DIMACS import/export
# ---------------------------------------------------------------------------


def to_dimacs(cnf: CnfFormula) -> str:
    lines = []
    for name in sorted(cnf.name_map):
        lines.append(f"c var {cnf.name_map[name]} = {name}")
    lines.append(f"p cnf {cnf.var_count} {len(cnf.clauses)}")
    for c in cnf.clauses:
        lines.append(" ".join(str(l) for l in c) + " 0")
    return "\n".join(lines) + "\n"


def from_dimacs(text: str) -> CnfFormula:
    var_count = 0
    clauses: list[list[int]] = []
    cur: list[int] = []
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header: {line!r}")
            var_count = int(parts[2])
            header_seen = True
            continue
        if not header_seen:
            raise ValueError("DIMACS clauses before header")
        for tok in line.split():
            l = int(tok)
            if l == 0:
                clauses.append(cur)
                cur = []
            else:
                var_count = max(var_count, abs(l))
                cur.append(l)
    if cur:
        clauses.append(cur)
    return CnfFormula(var_count, clauses, {})
