"""Structured plan problems and their translation to checkable models.

A problem is a STRIPS-style record: boolean fluents, a closed-world initial
assignment, an action catalog with preconditions and effects, an ordered
plan, and a goal.  Validation happens two ways: directly by simulation
(`simulate_plan`, the ground truth) and by encoding the plan into a
stage-sequenced model whose single execution replays it (`encode_plan` +
`check_problem`).
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from typing import Optional

from . import bmc
from . import kripke as kr
from . import ltl
from . import smv
from . import syntax as sx


class SchemaError(Exception):
    """A plan document that does not fit the schema; names the field."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
# names the encoder claims for itself: the latch, the stage variable and its
# domain literals
_RESERVED_RE = re.compile(r"^(ok|stage|done|s[0-9]+)$")

VALID = "Valid"
INVALID = "Invalid"
UNKNOWN_PARSE = "UnknownParse"
UNKNOWN_BOUND = "UnknownBound"


@dataclass
class Action:
    preconditions: dict[str, bool]
    effects: dict[str, bool]


@dataclass
class PlanProblem:
    problem_id: str
    fluents: tuple[str, ...]
    init: dict[str, bool]
    actions_catalog: dict[str, Action]
    plan: tuple[str, ...]
    goal: dict[str, bool]
    label: Optional[str] = None
    nl: Optional[str] = None


@dataclass
class PlanVerdict:
    """Outcome of validating one plan.

    ``evidence`` is the first inapplicable action's index, a trace showing
    the failure, or the parse error that blocked checking, depending on the
    kind.
    """

    kind: str
    evidence: object = None
    wall_time: float = 0.0

    @property
    def is_unknown(self) -> bool:
        return self.kind in (UNKNOWN_PARSE, UNKNOWN_BOUND)


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------


def _truth_map(obj, declared: set[str], where: str) -> dict[str, bool]:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object of fluent: bool entries", where)
    out: dict[str, bool] = {}
    for f, v in obj.items():
        if f not in declared:
            raise SchemaError(f"{where} references undeclared fluent {f!r}", where)
        if not isinstance(v, bool):
            raise SchemaError(f"{where}.{f} must be true or false", where)
        out[f] = v
    return out


_FIELDS = ("problem_id", "fluents", "init", "actions_catalog", "plan", "goal", "label", "nl")


def problem_from_dict(doc) -> PlanProblem:
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    for key in doc:
        if key not in _FIELDS:
            raise SchemaError(f"unexpected field {key!r}", key)

    pid = doc.get("problem_id")
    if not isinstance(pid, str) or not pid:
        raise SchemaError("problem_id must be a non-empty string", "problem_id")

    raw_fluents = doc.get("fluents")
    if not isinstance(raw_fluents, list) or not raw_fluents:
        raise SchemaError("fluents must be a non-empty list", "fluents")
    declared: set[str] = set()
    for f in raw_fluents:
        if not isinstance(f, str) or not _IDENT_RE.match(f):
            raise SchemaError(f"fluent {f!r} is not a valid identifier", "fluents")
        if _RESERVED_RE.match(f) or f in smv.KEYWORDS:
            raise SchemaError(f"fluent {f!r} is a reserved name", "fluents")
        if f in declared:
            raise SchemaError(f"duplicate fluent {f!r}", "fluents")
        declared.add(f)
    fluents = tuple(raw_fluents)

    init = _truth_map(doc.get("init", {}), declared, "init")
    init = {f: init.get(f, False) for f in fluents}  # closed world

    raw_catalog = doc.get("actions_catalog", {})
    if not isinstance(raw_catalog, dict):
        raise SchemaError("actions_catalog must be an object", "actions_catalog")
    catalog: dict[str, Action] = {}
    for name, body in raw_catalog.items():
        if not isinstance(name, str) or not name:
            raise SchemaError("action names must be non-empty strings", "actions_catalog")
        if not isinstance(body, dict):
            raise SchemaError(f"action {name!r} must be an object", "actions_catalog")
        for key in body:
            if key not in ("preconditions", "effects"):
                raise SchemaError(f"action {name!r} has unexpected field {key!r}", "actions_catalog")
        catalog[name] = Action(
            preconditions=_truth_map(body.get("preconditions", {}), declared, f"actions_catalog.{name}.preconditions"),
            effects=_truth_map(body.get("effects", {}), declared, f"actions_catalog.{name}.effects"),
        )

    raw_plan = doc.get("plan", [])
    if not isinstance(raw_plan, list):
        raise SchemaError("plan must be a list of action names", "plan")
    for a in raw_plan:
        if not isinstance(a, str):
            raise SchemaError("plan must be a list of action names", "plan")
        if a not in catalog:
            raise SchemaError(f"unknown action {a!r}", "plan")

    goal = _truth_map(doc.get("goal", {}), declared, "goal")
    if not goal:
        raise SchemaError("goal must be non-empty", "goal")

    label = doc.get("label")
    if label is not None and label not in ("valid", "invalid"):
        raise SchemaError("label must be 'valid' or 'invalid'", "label")
    nl = doc.get("nl")
    if nl is not None and not isinstance(nl, str):
        raise SchemaError("nl must be a string", "nl")

    return PlanProblem(
        problem_id=pid,
        fluents=fluents,
        init=init,
        actions_catalog=catalog,
        plan=tuple(raw_plan),
        goal=goal,
        label=label,
        nl=nl,
    )


def load_problem(text: str) -> PlanProblem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    return problem_from_dict(doc)


def emit(p: PlanProblem) -> str:
    """Canonical JSON for a problem: every fluent's initial truth spelled
    out, maps ordered by fluent declaration, actions sorted by name."""

    def by_decl(m: dict[str, bool]) -> dict[str, bool]:
        return {f: m[f] for f in p.fluents if f in m}

    doc: dict = {
        "problem_id": p.problem_id,
        "fluents": list(p.fluents),
        "init": {f: p.init.get(f, False) for f in p.fluents},
        "actions_catalog": {
            name: {
                "preconditions": by_decl(p.actions_catalog[name].preconditions),
                "effects": by_decl(p.actions_catalog[name].effects),
            }
            for name in sorted(p.actions_catalog)
        },
        "plan": list(p.plan),
        "goal": by_decl(p.goal),
    }
    if p.label is not None:
        doc["label"] = p.label
    if p.nl is not None:
        doc["nl"] = p.nl
    return json.dumps(doc, indent=2) + "\n"


def load_dataset(text: str) -> list[PlanProblem]:
    """One problem per JSONL line; blank lines allowed."""
    problems: list[PlanProblem] = []
    ids: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(f"line {lineno}: not valid JSON: {e}") from None
        try:
            p = problem_from_dict(doc)
        except SchemaError as e:
            raise SchemaError(f"line {lineno}: {e}", e.field) from None
        if p.problem_id in ids:
            raise SchemaError(f"line {lineno}: duplicate problem_id {p.problem_id!r}", "problem_id")
        ids.add(p.problem_id)
        problems.append(p)
    return problems


# ---------------------------------------------------------------------------
# Direct validation
# ---------------------------------------------------------------------------


def simulate_plan(p: PlanProblem) -> PlanVerdict:
    """Apply the plan action by action.  An unmet precondition makes the
    plan Invalid at that index; otherwise the goal decides."""
    t0 = time.perf_counter()
    state = {f: p.init.get(f, False) for f in p.fluents}
    history = [dict(state)]
    for idx, name in enumerate(p.plan):
        act = p.actions_catalog[name]
        if any(state[f] != want for f, want in act.preconditions.items()):
            return PlanVerdict(INVALID, evidence=idx, wall_time=time.perf_counter() - t0)
        for f, v in act.effects.items():
            state[f] = v
        history.append(dict(state))
    if all(state[f] == want for f, want in p.goal.items()):
        return PlanVerdict(VALID, wall_time=time.perf_counter() - t0)
    trace = kr.Trace(states=history, loop_back=None)
    return PlanVerdict(INVALID, evidence=trace, wall_time=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def stage_literals(plan_len: int) -> tuple[str, ...]:
    """Domain of the sequencing variable: one acting stage per action plus
    the absorbing `done` stage.  The empty plan keeps an s0 so the domain
    stays a proper enum."""
    if plan_len == 0:
        return ("s0", "done")
    return tuple(f"s{i}" for i in range(plan_len)) + ("done",)


def _conj(parts: list[sx.Expr]) -> sx.Expr:
    out = parts[0]
    for e in parts[1:]:
        out = sx.And(out, e)
    return out


def _pre_expr(pre: dict[str, bool], fluents: tuple[str, ...]) -> sx.Expr:
    lits: list[sx.Expr] = []
    for f in fluents:
        if f in pre:
            lits.append(sx.Ident(f) if pre[f] else sx.Not(sx.Ident(f)))
    return _conj(lits)


def encode_plan(p: PlanProblem) -> tuple[sx.SmvModel, ltl.LtlFormula]:
    """Translate a problem into a deterministic model that replays the plan.

    One boolean variable per fluent; a `stage` enum advancing one step per
    transition; effects applied only at the acting stage and only when its
    preconditions hold there; a boolean `ok` that latches FALSE the first
    time preconditions fail.  The goal formula is
    F (stage = done & ok & <goal literals>).
    """
    n = len(p.plan)
    stages = stage_literals(n)

    decls = [sx.VarDecl(f, sx.BoolType()) for f in p.fluents]
    decls.append(sx.VarDecl("stage", sx.EnumType(stages)))
    decls.append(sx.VarDecl("ok", sx.BoolType()))

    inits: dict[str, sx.Expr] = {f: sx.Const(p.init.get(f, False)) for f in p.fluents}
    inits["stage"] = sx.Ident(stages[0])
    inits["ok"] = sx.Const(True)

    nexts: dict[str, sx.Expr] = {}
    for f in p.fluents:
        branches: list[tuple[sx.Expr, sx.Expr]] = []
        for i, name in enumerate(p.plan):
            act = p.actions_catalog[name]
            if f not in act.effects:
                continue
            guard: sx.Expr = sx.Eq("stage", f"s{i}")
            if act.preconditions:
                guard = sx.And(guard, _pre_expr(act.preconditions, p.fluents))
            branches.append((guard, sx.Const(act.effects[f])))
        if branches:
            branches.append((sx.Const(True), sx.Ident(f)))
            nexts[f] = sx.CaseExpr(tuple(branches))
        else:
            nexts[f] = sx.Ident(f)

    if n <= 1:
        nexts["stage"] = sx.Ident("done")
    else:
        stage_branches: list[tuple[sx.Expr, sx.Expr]] = [
            (sx.Eq("stage", f"s{i}"), sx.Ident(f"s{i + 1}")) for i in range(n - 1)
        ]
        stage_branches.append((sx.Const(True), sx.Ident("done")))
        nexts["stage"] = sx.CaseExpr(tuple(stage_branches))

    ok_branches: list[tuple[sx.Expr, sx.Expr]] = []
    for i, name in enumerate(p.plan):
        pre = p.actions_catalog[name].preconditions
        if pre:
            value = sx.And(sx.Ident("ok"), _pre_expr(pre, p.fluents))
            ok_branches.append((sx.Eq("stage", f"s{i}"), value))
    if ok_branches:
        ok_branches.append((sx.Const(True), sx.Ident("ok")))
        nexts["ok"] = sx.CaseExpr(tuple(ok_branches))
    else:
        nexts["ok"] = sx.Ident("ok")

    goal_atoms: list[ltl.LtlFormula] = [ltl.Atom(sx.Eq("stage", "done")), ltl.Atom(sx.Ident("ok"))]
    for f in p.fluents:
        if f in p.goal:
            atom = ltl.Atom(sx.Ident(f))
            goal_atoms.append(atom if p.goal[f] else ltl.Not(atom))
    conj = goal_atoms[0]
    for g in goal_atoms[1:]:
        conj = ltl.And(conj, g)
    spec = ltl.Finally(conj)

    model = sx.SmvModel(vars=tuple(decls), inits=inits, nexts=nexts, ltlspecs=(spec,))
    return model, spec


def check_problem(p: PlanProblem, max_bound: Optional[int] = None, incremental: bool = True) -> PlanVerdict:
    """Validate by encoding and bounded search instead of simulation.

    Encoded models always admit a complete bound, so without an override the
    verdict is never UnknownBound.
    """
    t0 = time.perf_counter()
    model, spec = encode_plan(p)
    k = kr.compile(model)
    bound = max_bound if max_bound is not None else bmc.completeness_bound(k)
    outcome = bmc.check_spec(k, spec, bound, incremental=incremental)
    elapsed = time.perf_counter() - t0
    if isinstance(outcome, bmc.Holds):
        return PlanVerdict(VALID, wall_time=elapsed)
    if isinstance(outcome, bmc.CounterexampleFound):
        return PlanVerdict(INVALID, evidence=outcome.trace, wall_time=elapsed)
    return PlanVerdict(UNKNOWN_BOUND, wall_time=elapsed)
