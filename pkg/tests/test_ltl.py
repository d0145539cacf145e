"""Formula structure, negation normal form, and the two bounded evaluators."""

import random

import pytest

from plancheck import kripke as kr
from plancheck import ltl
from plancheck import syntax as sx

import generators
import oracles


def A(name):
    return ltl.Atom(sx.Ident(name))


a, b, p = A("a"), A("b"), A("p")


# ===========================================================================
# Structure helpers
# ===========================================================================


def test_size_counts_every_node():
    assert ltl.size(p) == 1
    assert ltl.size(ltl.Globally(ltl.Until(a, b))) == 4


def test_subformulas_is_post_order():
    f = ltl.Globally(ltl.Until(a, b))
    assert [type(g).__name__ for g in ltl.subformulas(f)] == [
        "Atom",
        "Atom",
        "Until",
        "Globally",
    ]
    assert ltl.subformulas(f)[-1] is f


def test_format_all_operators():
    f = ltl.Globally(ltl.Or(ltl.Until(a, ltl.Next(b)), ltl.Finally(ltl.Not(p))))
    assert ltl.format_ltl(f) == "G (a U X b | F !p)"


# ===========================================================================
# Negation normal form
# ===========================================================================


def test_nnf_pushes_negation_through_until():
    f = ltl.to_nnf(ltl.Not(ltl.Until(a, b)))
    assert f == ltl.Release(ltl.Not(a), ltl.Not(b))


def test_nnf_dualizes_finally_and_globally():
    assert ltl.to_nnf(ltl.Not(ltl.Finally(a))) == ltl.Globally(ltl.Not(a))
    assert ltl.to_nnf(ltl.Not(ltl.Globally(a))) == ltl.Finally(ltl.Not(a))


def test_nnf_release_negates_to_until():
    assert ltl.to_nnf(ltl.Not(ltl.Release(a, b))) == ltl.Until(ltl.Not(a), ltl.Not(b))


def test_nnf_cancels_double_negation():
    assert ltl.to_nnf(ltl.Not(ltl.Not(a))) == a


def test_nnf_negate_flag_negates_the_formula():
    assert ltl.to_nnf(a, negate=True) == ltl.Not(a)
    assert ltl.to_nnf(ltl.And(a, b), negate=True) == ltl.Or(ltl.Not(a), ltl.Not(b))


def test_nnf_de_morgan():
    assert ltl.to_nnf(ltl.Not(ltl.And(a, b))) == ltl.Or(ltl.Not(a), ltl.Not(b))
    assert ltl.to_nnf(ltl.Not(ltl.Or(a, b))) == ltl.And(ltl.Not(a), ltl.Not(b))


def test_nnf_commutes_with_next():
    assert ltl.to_nnf(ltl.Not(ltl.Next(a))) == ltl.Next(ltl.Not(a))


def test_is_nnf():
    assert ltl.is_nnf(ltl.Not(a))
    assert not ltl.is_nnf(ltl.Not(ltl.And(a, b)))
    assert not ltl.is_nnf(ltl.Globally(ltl.Not(ltl.Next(a))))


def test_nnf_output_is_nnf_and_idempotent():
    rng = random.Random(5)
    for _ in range(200):
        f = generators.random_ltl(rng, ("a", "b", "c"), None, rng.randint(1, 4))
        g = ltl.to_nnf(f)
        assert ltl.is_nnf(g)
        assert ltl.to_nnf(g) == g


def test_nnf_preserves_meaning_on_lassos():
    rng = random.Random(6)
    for _ in range(300):
        f = generators.random_ltl(rng, ("a", "b"), None, rng.randint(1, 4))
        tr = generators.random_trace(rng, ("a", "b"), rng.randint(1, 5))
        assert ltl.eval_on_lasso(ltl.to_nnf(f), tr) == ltl.eval_on_lasso(f, tr)
        assert ltl.eval_on_lasso(ltl.to_nnf(f, negate=True), tr) != ltl.eval_on_lasso(f, tr)


# ===========================================================================
# Lasso evaluation
# ===========================================================================


def test_lasso_stuck_false_state():
    tr = kr.Trace(states=[{"p": False}], loop_back=0)
    assert not ltl.eval_on_lasso(ltl.Finally(p), tr)
    assert ltl.eval_on_lasso(ltl.Globally(ltl.Not(p)), tr)


def test_lasso_eventually_in_the_loop():
    tr = kr.Trace(states=[{"p": False}, {"p": True}], loop_back=1)
    assert ltl.eval_on_lasso(ltl.Finally(p), tr)
    assert ltl.eval_on_lasso(ltl.Next(p), tr)
    assert not ltl.eval_on_lasso(ltl.Globally(p), tr)
    assert ltl.eval_on_lasso(ltl.Globally(ltl.Finally(p)), tr)


def test_lasso_until_needs_the_left_side_to_hold():
    tr = kr.Trace(
        states=[{"a": True, "b": False}, {"a": False, "b": False}, {"a": True, "b": True}],
        loop_back=2,
    )
    assert not ltl.eval_on_lasso(ltl.Until(a, b), tr)
    tr2 = kr.Trace(
        states=[{"a": True, "b": False}, {"a": True, "b": False}, {"a": False, "b": True}],
        loop_back=2,
    )
    assert ltl.eval_on_lasso(ltl.Until(a, b), tr2)


def test_lasso_next_wraps_through_the_loop():
    tr = kr.Trace(states=[{"p": True}, {"p": False}], loop_back=0)
    # position 1 is the last; its successor is the loop target, position 0
    assert ltl.eval_on_lasso(ltl.Next(ltl.Next(p)), tr)


def test_lasso_release_holds_when_right_never_released():
    f = ltl.Release(a, b)
    tr = kr.Trace(states=[{"a": False, "b": True}], loop_back=0)
    assert ltl.eval_on_lasso(f, tr)
    tr2 = kr.Trace(states=[{"a": False, "b": False}], loop_back=0)
    assert not ltl.eval_on_lasso(f, tr2)


def test_lasso_agrees_with_position_walk_oracle():
    rng = random.Random(7)
    for _ in range(400):
        f = generators.random_ltl(rng, ("a", "b"), None, rng.randint(1, 4), allow_release=True)
        tr = generators.random_trace(rng, ("a", "b"), rng.randint(1, 6))
        assert ltl.eval_on_lasso(f, tr) == oracles.ref_eval_lasso(f, tr), ltl.format_ltl(f)


# ===========================================================================
# Prefix (no-loop) evaluation
# ===========================================================================


def test_prefix_requires_nnf():
    with pytest.raises(ValueError):
        ltl.eval_on_prefix(ltl.Not(ltl.And(a, b)), [{"a": True, "b": True}])


def test_prefix_never_confirms_globally():
    # a finite prefix cannot witness G p, whatever the states say
    assert not ltl.eval_on_prefix(ltl.Globally(p), [{"p": True}] * 5)


def test_prefix_confirms_finally_when_seen():
    states = [{"p": False}, {"p": True}]
    assert ltl.eval_on_prefix(ltl.Finally(p), states)
    assert not ltl.eval_on_prefix(ltl.Finally(p), states[:1])


def test_prefix_next_at_the_end_is_false():
    assert not ltl.eval_on_prefix(ltl.Next(p), [{"p": True}])
    assert ltl.eval_on_prefix(ltl.Next(p), [{"p": False}, {"p": True}])


def test_prefix_truth_is_monotone_in_prefix_length():
    rng = random.Random(8)
    for _ in range(200):
        f = ltl.to_nnf(generators.random_ltl(rng, ("a", "b"), None, rng.randint(1, 4)))
        states = [
            {"a": rng.random() < 0.5, "b": rng.random() < 0.5} for _ in range(rng.randint(2, 6))
        ]
        if ltl.eval_on_prefix(f, states[:-1]):
            assert ltl.eval_on_prefix(f, states)


def test_prefix_truth_implies_truth_on_every_lasso_extension():
    rng = random.Random(9)
    checked = 0
    for _ in range(600):
        f = ltl.to_nnf(generators.random_ltl(rng, ("a", "b"), None, rng.randint(1, 3)))
        n = rng.randint(1, 5)
        states = [{"a": rng.random() < 0.5, "b": rng.random() < 0.5} for _ in range(n)]
        if not ltl.eval_on_prefix(f, states):
            continue
        checked += 1
        for loop in range(n):
            tr = kr.Trace(states=states, loop_back=loop)
            assert ltl.eval_on_lasso(f, tr), ltl.format_ltl(f)
    assert checked > 50


def test_prefix_agrees_with_reference_walk():
    rng = random.Random(10)
    for _ in range(300):
        f = ltl.to_nnf(generators.random_ltl(rng, ("a", "b"), None, rng.randint(1, 4)))
        states = [
            {"a": rng.random() < 0.5, "b": rng.random() < 0.5} for _ in range(rng.randint(1, 6))
        ]
        assert ltl.eval_on_prefix(f, states) == oracles.ref_eval_prefix(f, states)
