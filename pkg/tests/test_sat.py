"""Circuits, the Tseitin transformation, and the CDCL solver."""

import itertools
import random

import pytest

from plancheck import circuits as ci
from plancheck import sat

import generators
import oracles


# ===========================================================================
# Circuits
# ===========================================================================


def test_gate_evaluation_truth_table():
    c = ci.Circuit()
    x, y = c.input("x"), c.input("y")
    g = c.or_(c.and_(x, c.not_(y)), c.and_(c.not_(x), y))  # xor by hand
    for vx, vy in itertools.product((False, True), repeat=2):
        assert ci.evaluate(g, {"x": vx, "y": vy}) == (vx != vy)


def test_constant_nodes_are_shared():
    c = ci.Circuit()
    assert c.true is c.const(True)
    assert c.false is c.const(False)
    assert ci.evaluate(c.true, {}) is True
    assert ci.evaluate(c.false, {}) is False


def test_and_all_or_all_empty_cases():
    c = ci.Circuit()
    assert c.and_all([]) is c.true
    assert c.or_all([]) is c.false


def test_ite_and_xnor():
    c = ci.Circuit()
    x, y, z = c.input("x"), c.input("y"), c.input("z")
    g = c.ite(x, y, z)
    for vx, vy, vz in itertools.product((False, True), repeat=3):
        env = {"x": vx, "y": vy, "z": vz}
        assert ci.evaluate(g, env) == (vy if vx else vz)
    assert ci.evaluate(c.xnor(x, y), {"x": True, "y": True})
    assert not ci.evaluate(c.xnor(x, y), {"x": True, "y": False})


def test_topo_order_lists_children_first():
    c = ci.Circuit()
    x, y = c.input("x"), c.input("y")
    g = c.and_(c.or_(x, y), c.not_(x))
    order = ci.topo_order([g])
    seen = set()
    for node in order:
        for child in (node.a, node.b):
            if child is not None:
                assert id(child) in seen
        seen.add(id(node))
    assert order[-1] is g


def test_inputs_of_collects_names():
    c = ci.Circuit()
    g = c.and_(c.input("x"), c.or_(c.input("y"), c.not_(c.input("x"))))
    assert sorted(ci.inputs_of(g)) == ["x", "y"]


def test_instantiate_renames_inputs():
    c = ci.Circuit()
    src = ci.Circuit()
    g = src.and_(src.input("a"), src.not_(src.input("b")))
    copy = ci.instantiate(c, g, lambda name: name + "#0")
    assert sorted(ci.inputs_of(copy)) == ["a#0", "b#0"]
    assert ci.evaluate(copy, {"a#0": True, "b#0": False})


# ===========================================================================
# Tseitin encoding
# ===========================================================================


def test_tseitin_single_input():
    c = ci.Circuit()
    cnf, root = sat.tseitin_encode(c.input("x"))
    assert (cnf.var_count, root) == (1, 1)
    assert cnf.clauses == [[1]]
    assert cnf.name_map == {"x": 1}


def test_tseitin_not_reuses_the_literal():
    # NOT adds no variable: it is the negated literal of its operand
    c = ci.Circuit()
    cnf, root = sat.tseitin_encode(c.not_(c.input("x")))
    assert (cnf.var_count, root) == (1, -1)
    assert cnf.clauses == [[-1]]


def test_tseitin_and_gate_shape():
    c = ci.Circuit()
    cnf, root = sat.tseitin_encode(c.and_(c.input("x"), c.input("y")))
    assert (cnf.var_count, root) == (3, 3)
    assert cnf.clauses == [[-3, 1], [-3, 2], [3, -1, -2], [3]]


def test_tseitin_or_gate_shape():
    c = ci.Circuit()
    cnf, root = sat.tseitin_encode(c.or_(c.input("x"), c.not_(c.input("y"))))
    assert (cnf.var_count, root) == (3, 3)
    assert cnf.clauses == [[3, -1], [3, 2], [-3, 1, -2], [3]]


def _random_circuit(c, rng, names, depth):
    if depth <= 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.1:
            return c.const(rng.random() < 0.5)
        return c.input(rng.choice(names))
    kind = rng.randrange(3)
    if kind == 0:
        return c.not_(_random_circuit(c, rng, names, depth - 1))
    sub = [_random_circuit(c, rng, names, depth - 1) for _ in range(rng.randint(2, 3))]
    return c.and_all(sub) if kind == 1 else c.or_all(sub)


def test_tseitin_size_is_linear_in_gate_count():
    rng = random.Random(11)
    for _ in range(100):
        c = ci.Circuit()
        g = _random_circuit(c, rng, ["x", "y", "z"], rng.randint(1, 5))
        gates = sum(1 for n in ci.topo_order([g]) if n.kind in (ci.AND, ci.OR, ci.CONST))
        cnf, _root = sat.tseitin_encode(g)
        assert len(cnf.clauses) <= 3 * gates + gates + 1


def test_tseitin_is_equisatisfiable_and_models_project():
    rng = random.Random(12)
    n_sat = 0
    for _ in range(300):
        c = ci.Circuit()
        g = _random_circuit(c, rng, ["x", "y", "z", "w"], rng.randint(1, 5))
        names = sorted(ci.inputs_of(g))
        brute = any(
            ci.evaluate(g, dict(zip(names, bits)))
            for bits in itertools.product((False, True), repeat=len(names))
        )
        cnf, root = sat.tseitin_encode(g)
        res = sat.solve(cnf)
        assert res.satisfiable == brute
        if res.satisfiable:
            n_sat += 1
            env = {name: res.model[var] for name, var in cnf.name_map.items()}
            for name in names:
                env.setdefault(name, False)
            assert ci.evaluate(g, env)
    assert n_sat > 100


# ===========================================================================
# Solver
# ===========================================================================


def test_empty_clause_is_unsat():
    s = sat.Solver()
    s.new_var()
    s.add_clause([])
    assert not s.solve().satisfiable


def test_unit_propagation_chain():
    s = sat.Solver()
    v = [s.new_var() for _ in range(4)]
    s.add_clause([v[0]])
    s.add_clause([-v[0], v[1]])
    s.add_clause([-v[1], v[2]])
    s.add_clause([-v[2], v[3]])
    res = s.solve()
    assert res.satisfiable
    assert all(res.model[x] for x in v)


def test_contradictory_units():
    cnf = sat.CnfFormula(1, [[1], [-1]], {})
    assert not sat.solve(cnf).satisfiable


def test_duplicate_and_tautological_literals_are_tolerated():
    cnf = sat.CnfFormula(2, [[1, 1, -2], [2, -2], [2]], {})
    res = sat.solve(cnf)
    assert res.satisfiable
    assert res.model[2]


def test_pigeonhole_three_into_two_is_unsat():
    # pigeon i in hole j is variable 2*i + j + 1
    s = sat.Solver()
    var = [[s.new_var() for _ in range(2)] for _ in range(3)]
    for i in range(3):
        s.add_clause(var[i])
    for j in range(2):
        for i1 in range(3):
            for i2 in range(i1 + 1, 3):
                s.add_clause([-var[i1][j], -var[i2][j]])
    assert not s.solve().satisfiable


def test_assumptions_restrict_without_committing():
    cnf = sat.CnfFormula(2, [[1, 2]], {})
    assert not sat.solve(cnf, assumptions=[-1, -2]).satisfiable
    res = sat.solve(cnf, assumptions=[-1])
    assert res.satisfiable and res.model[2]


def test_incremental_reuse_across_assumption_sets():
    s = sat.Solver()
    a, b, c = (s.new_var() for _ in range(3))
    s.add_clause([a, b])
    s.add_clause([-a, c])
    assert s.solve([-b]).satisfiable
    assert s.solve([-b, -c]).satisfiable is False
    # the solver is still usable after an assumption conflict
    res = s.solve([])
    assert res.satisfiable
    s.add_clause([-c])
    assert s.solve([-b]).satisfiable is False


def test_lit_value_after_solve():
    s = sat.Solver()
    v = s.new_var()
    s.add_clause([v])
    assert s.solve().satisfiable
    assert s.lit_value(v) is True
    assert s.lit_value(-v) is False


def test_solver_agrees_with_enumeration():
    rng = random.Random(13)
    n_sat = 0
    for _ in range(500):
        cnf = generators.random_cnf(rng)
        res = sat.solve(cnf)
        assert res.satisfiable == oracles.brute_sat(cnf.var_count, cnf.clauses)
        if res.satisfiable:
            n_sat += 1
            for clause in cnf.clauses:
                assert any(res.model[abs(l)] == (l > 0) for l in clause)
    assert 50 < n_sat < 500


def test_solve_twice_is_stable():
    rng = random.Random(14)
    for _ in range(50):
        cnf = generators.random_cnf(rng)
        assert sat.solve(cnf).satisfiable == sat.solve(cnf).satisfiable


# ===========================================================================
# DIMACS
# ===========================================================================


def test_dimacs_round_trip():
    cnf = sat.CnfFormula(3, [[1, -2], [2, 3], [-1]], {})
    text = sat.to_dimacs(cnf)
    assert text.splitlines()[0] == "p cnf 3 3"
    assert sat.from_dimacs(text) == sat.CnfFormula(3, [[1, -2], [2, 3], [-1]], {})


def test_dimacs_round_trip_random():
    rng = random.Random(15)
    for _ in range(100):
        cnf = generators.random_cnf(rng)
        back = sat.from_dimacs(sat.to_dimacs(cnf))
        assert back.var_count == cnf.var_count
        assert back.clauses == cnf.clauses
