"""Seeded random inputs shared by the property tests.

The model generator is shaped so the enumeration oracle stays cheap: models
without a stage enum are fully deterministic (one path), models with one
have at most one undriven boolean, and a stage domain small enough that the
per-bound path count stays under a hundred.
"""

from __future__ import annotations

import random

from plancheck import ltl
from plancheck import plans
from plancheck import syntax as sx

BOOL_NAMES = ("p", "q", "r", "s")


# ---------------------------------------------------------------------------
# State expressions and models
# ---------------------------------------------------------------------------


def random_state_expr(rng: random.Random, bools, stage_lits, depth: int) -> sx.Expr:
    roll = rng.random()
    if depth <= 0 or roll < 0.30:
        kinds = ["c"]
        if bools:
            kinds.append("b")
            kinds.append("b")
        if stage_lits:
            kinds.append("e")
        kind = rng.choice(kinds)
        if kind == "b":
            return sx.Ident(rng.choice(bools))
        if kind == "e":
            return sx.Eq("stage", rng.choice(stage_lits))
        return sx.Const(rng.random() < 0.5)
    if roll < 0.46:
        return sx.Not(random_state_expr(rng, bools, stage_lits, depth - 1))
    if roll < 0.66:
        return sx.And(
            random_state_expr(rng, bools, stage_lits, depth - 1),
            random_state_expr(rng, bools, stage_lits, depth - 1),
        )
    if roll < 0.86:
        return sx.Or(
            random_state_expr(rng, bools, stage_lits, depth - 1),
            random_state_expr(rng, bools, stage_lits, depth - 1),
        )
    branches = tuple(
        (
            random_state_expr(rng, bools, stage_lits, depth - 1),
            random_state_expr(rng, bools, stage_lits, depth - 1),
        )
        for _ in range(rng.randint(1, 2))
    )
    default = (sx.Const(True), random_state_expr(rng, bools, stage_lits, depth - 1))
    return sx.CaseExpr(branches + (default,))


def random_model(rng: random.Random) -> sx.SmvModel:
    with_stage = rng.random() < 0.5
    free_bool = None
    if with_stage:
        free = rng.random() < 0.3
        n_lits = rng.randint(2, 4 if free else 6)
        stage_lits = tuple(f"t{i}" for i in range(n_lits))
        n_bools = rng.randint(1 if free else 0, 2)
        if free and n_bools:
            free_bool = BOOL_NAMES[rng.randrange(n_bools)]
    else:
        stage_lits = None
        n_bools = rng.randint(1, 4)
    bools = BOOL_NAMES[:n_bools]

    decls = [sx.VarDecl(b, sx.BoolType()) for b in bools]
    inits: dict[str, sx.Expr] = {}
    nexts: dict[str, sx.Expr] = {}
    for b in bools:
        if b == free_bool:
            # undriven: sometimes pin the initial value, never the next
            if rng.random() < 0.5:
                inits[b] = sx.Const(rng.random() < 0.5)
            continue
        inits[b] = sx.Const(rng.random() < 0.5)
        nexts[b] = random_state_expr(rng, bools, stage_lits, rng.randint(1, 2))
    if with_stage:
        decls.append(sx.VarDecl("stage", sx.EnumType(stage_lits)))
        inits["stage"] = sx.Ident(stage_lits[0])
        branches = tuple(
            (sx.Eq("stage", stage_lits[i]), sx.Ident(stage_lits[i + 1]))
            for i in range(len(stage_lits) - 1)
        )
        nexts["stage"] = sx.CaseExpr(branches + ((sx.Const(True), sx.Ident(stage_lits[-1])),))
    return sx.SmvModel(vars=tuple(decls), inits=inits, nexts=nexts, ltlspecs=())


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


def random_atom(rng: random.Random, bools, stage_lits, simple: bool = False) -> ltl.LtlFormula:
    if simple:
        # only shapes the concrete grammar can produce, so formulas built
        # here survive a print/parse round trip structurally unchanged
        kinds = ["c"] + (["b", "b"] if bools else []) + (["e"] if stage_lits else [])
        kind = rng.choice(kinds)
        if kind == "b":
            return ltl.Atom(sx.Ident(rng.choice(bools)))
        if kind == "e":
            return ltl.Atom(sx.Eq("stage", rng.choice(stage_lits)))
        return ltl.Atom(sx.Const(rng.random() < 0.5))
    return ltl.Atom(random_state_expr(rng, bools, stage_lits, rng.randint(0, 1)))


def random_ltl(
    rng: random.Random,
    bools,
    stage_lits,
    depth: int,
    allow_release: bool = False,
    simple_atoms: bool = False,
) -> ltl.LtlFormula:
    if depth <= 0 or rng.random() < 0.28:
        return random_atom(rng, bools, stage_lits, simple_atoms)
    kinds = ["not", "and", "or", "next", "finally", "globally", "until"]
    if allow_release:
        kinds.append("release")
    kind = rng.choice(kinds)
    sub = lambda: random_ltl(rng, bools, stage_lits, depth - 1, allow_release, simple_atoms)
    if kind == "not":
        return ltl.Not(sub())
    if kind == "and":
        return ltl.And(sub(), sub())
    if kind == "or":
        return ltl.Or(sub(), sub())
    if kind == "next":
        return ltl.Next(sub())
    if kind == "finally":
        return ltl.Finally(sub())
    if kind == "globally":
        return ltl.Globally(sub())
    if kind == "until":
        return ltl.Until(sub(), sub())
    return ltl.Release(sub(), sub())


def random_trace(rng: random.Random, bools, length: int, with_loop: bool = True):
    from plancheck import kripke as kr

    states = [{b: rng.random() < 0.5 for b in bools} for _ in range(length)]
    loop = rng.randrange(length) if with_loop else None
    return kr.Trace(states=states, loop_back=loop)


# ---------------------------------------------------------------------------
# CNF
# ---------------------------------------------------------------------------


def random_cnf(rng: random.Random, max_vars: int = 10):
    from plancheck import sat

    n = rng.randint(1, max_vars)
    m = rng.randint(1, 4 * n)
    clauses = []
    for _ in range(m):
        width = rng.randint(1, 3)
        clause = []
        for _ in range(width):
            v = rng.randint(1, n)
            clause.append(v if rng.random() < 0.5 else -v)
        clauses.append(clause)
    return sat.CnfFormula(n, clauses, {})


# ---------------------------------------------------------------------------
# Plan problems
# ---------------------------------------------------------------------------


def random_plan_problem(rng: random.Random, ident: str) -> plans.PlanProblem:
    n_fluents = rng.randint(1, 10)
    fluents = tuple(f"f{i}" for i in range(n_fluents))
    init = {f: rng.random() < 0.5 for f in fluents}

    def truth_sample(k_max: int, source: dict | None = None) -> dict[str, bool]:
        chosen = rng.sample(fluents, min(len(fluents), rng.randint(0, k_max)))
        if source is None:
            return {f: rng.random() < 0.5 for f in chosen}
        return {f: source[f] for f in chosen}

    if rng.random() < 0.5:
        # applicable by construction, goal read off the final state
        state = dict(init)
        plan_len = rng.randint(0, 6)
        catalog: dict[str, plans.Action] = {}
        plan = []
        for i in range(plan_len):
            pre = truth_sample(2, state)
            eff = truth_sample(2)
            name = f"act{i}"
            catalog[name] = plans.Action(preconditions=pre, effects=eff)
            plan.append(name)
            state.update(eff)
        goal_fluents = rng.sample(fluents, rng.randint(1, min(3, len(fluents))))
        goal = {f: state[f] for f in goal_fluents}
    else:
        n_actions = rng.randint(1, 6)
        catalog = {
            f"act{i}": plans.Action(preconditions=truth_sample(2), effects=truth_sample(2))
            for i in range(n_actions)
        }
        plan = [rng.choice(list(catalog)) for _ in range(rng.randint(0, 6))]
        goal_fluents = rng.sample(fluents, rng.randint(1, min(3, len(fluents))))
        goal = {f: rng.random() < 0.5 for f in goal_fluents}

    return plans.PlanProblem(
        problem_id=ident,
        fluents=fluents,
        init=init,
        actions_catalog=catalog,
        plan=tuple(plan),
        goal=goal,
    )
