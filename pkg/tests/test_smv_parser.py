"""Tokenizer, model parser, LTL parser and pretty printer."""

import random

import pytest

from plancheck import ltl, smv
from plancheck import syntax as sx

import generators


GOOD_MODEL = """MODULE main
VAR
  x : boolean;
  st : {a, b};
ASSIGN
  init(x) := FALSE;
  next(x) := case
    st = a : TRUE;
    TRUE : x;
  esac;
  init(st) := a;
  next(st) := b;
LTLSPEC F (x & st = b);
"""


# ===========================================================================
# Tokenizer
# ===========================================================================


def test_tokenize_kinds_and_positions():
    toks = smv.tokenize("next(x) := !a; -- trailing comment\nF TRUE")
    got = [(t.kind, t.text, t.line, t.column) for t in toks]
    assert got == [
        ("next", "next", 1, 1),
        ("(", "(", 1, 5),
        ("ident", "x", 1, 6),
        (")", ")", 1, 7),
        (":=", ":=", 1, 9),
        ("!", "!", 1, 12),
        ("ident", "a", 1, 13),
        (";", ";", 1, 14),
        ("F", "F", 2, 1),
        ("TRUE", "TRUE", 2, 3),
        ("eof", "", 2, 7),
    ]


def test_tokenize_comment_only_line():
    toks = smv.tokenize("-- nothing here\nx")
    assert [t.kind for t in toks] == ["ident", "eof"]
    assert toks[0].line == 2


def test_tokenize_rejects_unknown_character():
    with pytest.raises(smv.ParseError) as err:
        smv.tokenize("a $ b")
    assert err.value.message == "unexpected character '$'"
    assert (err.value.line, err.value.column) == (1, 3)


def test_keywords_are_not_identifiers():
    toks = smv.tokenize("case esac MODULE")
    assert [t.kind for t in toks[:3]] == ["case", "esac", "MODULE"]
    for kw in smv.KEYWORDS:
        assert kw in (t.kind for t in smv.tokenize(kw))


# ===========================================================================
# LTL parsing and precedence
# ===========================================================================


def A(name):
    return ltl.Atom(sx.Ident(name))


def test_until_is_right_associative():
    f = smv.parse_ltl("a U b U c")
    assert f == ltl.Until(A("a"), ltl.Until(A("b"), A("c")))


def test_unary_temporal_binds_tighter_than_and():
    assert smv.parse_ltl("F a & b") == ltl.And(ltl.Finally(A("a")), A("b"))
    assert smv.parse_ltl("X a U b") == ltl.Until(ltl.Next(A("a")), A("b"))
    assert smv.parse_ltl("F (a & b)") == ltl.Finally(ltl.And(A("a"), A("b")))


def test_and_binds_tighter_than_or():
    assert smv.parse_ltl("a & b | c") == ltl.Or(ltl.And(A("a"), A("b")), A("c"))
    assert smv.parse_ltl("a | b & c") == ltl.Or(A("a"), ltl.And(A("b"), A("c")))


def test_and_is_left_associative():
    f = smv.parse_ltl("a & b & c")
    assert f == ltl.And(ltl.And(A("a"), A("b")), A("c"))


def test_not_applies_to_the_nearest_atom():
    assert smv.parse_ltl("!a & b") == ltl.And(ltl.Not(A("a")), A("b"))


def test_enum_comparison_atom():
    f = smv.parse_ltl("G (stage = done | !ok)")
    assert isinstance(f, ltl.Globally)
    assert f.operand == ltl.Or(ltl.Atom(sx.Eq("stage", "done")), ltl.Not(A("ok")))


def test_ltl_rejects_trailing_junk():
    with pytest.raises(smv.ParseError) as err:
        smv.parse_ltl("a xor b")
    assert "after formula" in err.value.message


def test_release_prints_but_does_not_parse():
    # Release only arises from negation normal form; the grammar has no
    # token for it, so the printed form must not sneak back in.
    f = ltl.Release(A("a"), A("b"))
    assert ltl.format_ltl(f) == "a R b"
    with pytest.raises(smv.ParseError):
        smv.parse_ltl("a R b")


def test_format_parse_round_trip_random():
    rng = random.Random(2024)
    for _ in range(300):
        f = generators.random_ltl(
            rng, ("a", "b", "c"), ("u", "v"), rng.randint(1, 4), simple_atoms=True
        )
        printed = ltl.format_ltl(f)
        assert smv.parse_ltl(printed) == f, printed


# ===========================================================================
# Model parsing
# ===========================================================================


def test_parse_model_structure():
    m = smv.parse_model(GOOD_MODEL)
    assert [d.name for d in m.vars] == ["x", "st"]
    assert isinstance(m.vars[0].var_type, sx.BoolType)
    assert m.vars[1].var_type == sx.EnumType(("a", "b"))
    assert m.inits["x"] == sx.Const(False)
    assert m.inits["st"] == sx.Ident("a")
    assert isinstance(m.nexts["x"], sx.CaseExpr)
    assert len(m.ltlspecs) == 1


def test_pretty_print_round_trip():
    m = smv.parse_model(GOOD_MODEL)
    printed = smv.pretty_print(m)
    assert smv.parse_model(printed) == m
    # printing is a fixpoint after one pass
    assert smv.pretty_print(smv.parse_model(printed)) == printed


def test_round_trip_on_generated_models():
    rng = random.Random(77)
    for _ in range(150):
        m = generators.random_model(rng)
        printed = smv.pretty_print(m)
        assert smv.parse_model(printed) == m


def test_comments_are_ignored_by_the_parser():
    annotated = "-- header\n" + GOOD_MODEL.replace(
        "ASSIGN", "-- updates follow\nASSIGN"
    )
    assert smv.parse_model(annotated) == smv.parse_model(GOOD_MODEL)


# ===========================================================================
# Parse errors carry positions
# ===========================================================================


@pytest.mark.parametrize(
    "text,message,line,column",
    [
        ("MODULE main\nVAR\n  x : boolean\nASSIGN\n", "expected ';', found 'ASSIGN'", 4, 1),
        ("MODULE main\nVAR\n  x : boolean;\nASSIGN\n  init(x) := ;\n",
         "expected an expression, found ';'", 5, 14),
        ("MODULE main\nVAR\n  x : boolean;\nASSIGN\n  next(x) := case\n    x : FALSE;\n",
         "expected an expression, found end of input", 7, 1),
        ("MODULE main\nVAR\n  st : {a, a};\n", "duplicate literal 'a' in 'st'", 3, 3),
        ("MODULE main\nVAR\n  x : boolean;\nLTLSPEC F x\n", "expected ';', found end of input", 5, 1),
        ("VAR\n  x : boolean;\n", "expected 'MODULE', found 'VAR'", 1, 1),
        ("MODULE main\nVAR\n  x : boolean;\nASSIGN\n  init(x) := TRUE;\n  init(x) := FALSE;\n",
         "duplicate init assignment for 'x'", 6, 3),
    ],
)
def test_positioned_parse_errors(text, message, line, column):
    with pytest.raises(smv.ParseError) as err:
        smv.parse_model(text)
    assert err.value.message == message
    assert (err.value.line, err.value.column) == (line, column)


def test_parse_error_str_includes_position():
    with pytest.raises(smv.ParseError) as err:
        smv.parse_model("MODULE main\nVAR\n  x : boolean\nASSIGN\n")
    assert str(err.value).startswith("4:1:")


# ===========================================================================
# Semantic checks
# ===========================================================================


def test_parse_model_rejects_undeclared_variable():
    with pytest.raises(smv.ParseError) as err:
        smv.parse_model("MODULE main\nVAR\n  x : boolean;\nASSIGN\n  init(x) := y;\n")
    assert err.value.message == "undeclared variable 'y'"
    assert err.value.line == 5


def test_parse_model_rejects_duplicate_declaration():
    with pytest.raises(smv.ParseError) as err:
        smv.parse_model("MODULE main\nVAR\n  x : boolean;\n  x : boolean;\n")
    assert err.value.message == "duplicate declaration of 'x'"


def test_parse_model_rejects_enum_literal_in_boolean_position():
    text = (
        "MODULE main\nVAR\n  x : boolean;\n  st : {a, b};\nASSIGN\n"
        "  init(x) := a;\n  next(x) := x;\n  init(st) := a;\n  next(st) := st;\n"
    )
    with pytest.raises(smv.ParseError) as err:
        smv.parse_model(text)
    assert err.value.message == "enum literal 'a' used as a boolean"


def test_parse_model_rejects_equality_on_boolean_variable():
    with pytest.raises(smv.ParseError) as err:
        smv.parse_model("MODULE main\nVAR\n  x : boolean;\nASSIGN\n  init(x) := x = x;\n")
    assert "'x' is boolean" in err.value.message


def test_parse_model_rejects_assignment_to_undeclared_target():
    with pytest.raises(smv.ParseError) as err:
        smv.parse_model("MODULE main\nVAR\n  x : boolean;\nASSIGN\n  init(z) := TRUE;\n  next(x) := x;\n")
    assert err.value.message == "assignment to undeclared variable 'z'"


def test_missing_next_is_a_warning_not_an_error():
    m = smv.parse_model("MODULE main\nVAR\n  x : boolean;\nASSIGN\n  init(x) := TRUE;\n")
    diags = smv.check_semantics(m)
    assert len(diags) == 1
    assert diags[0].severity is smv.Severity.WARNING
    assert "no next assignment for 'x'" in diags[0].message


def test_case_without_true_default_is_an_error():
    # built directly because parse_model would refuse to return it
    branch = ((sx.Ident("x"), sx.Const(False)),)
    m = sx.SmvModel(
        vars=(sx.VarDecl("x", sx.BoolType()),),
        inits={"x": sx.Const(True)},
        nexts={"x": sx.CaseExpr(branch)},
        ltlspecs=(),
    )
    msgs = [d.message for d in smv.check_semantics(m) if d.severity is smv.Severity.ERROR]
    assert msgs == ["case not total: final guard must be TRUE"]


def test_spec_atoms_are_type_checked():
    text = "MODULE main\nVAR\n  st : {a, b};\nASSIGN\n  init(st) := a;\n  next(st) := b;\nLTLSPEC F st;\n"
    with pytest.raises(smv.ParseError) as err:
        smv.parse_model(text)
    assert "'st'" in err.value.message


def test_enum_literals_may_be_shared_between_enums():
    text = (
        "MODULE main\nVAR\n  s : {a, b};\n  t : {b, c};\nASSIGN\n"
        "  init(s) := a;\n  next(s) := s;\n  init(t) := b;\n  next(t) := t;\n"
    )
    assert smv.check_semantics(smv.parse_model(text)) == []
