import pytest
from hypothesis import given, strategies as st

from sped.fuzz import FuzzConfig, random_raw_grammar
from sped.grammar import (
    EMPTY, FAIL, Alt, CharLit, Grammar, GrammarError, Nonterm, Not, Seq, alt,
    format_expr, format_grammar, lit, parse_grammar, seq, size, walk,
)
import random


def raw(text):
    return parse_grammar(text, simplify=False)


def test_literal_desugars_to_right_nested_sequence():
    g = raw("S <- 'abc'")
    assert g.rules["S"] == Seq(CharLit(97), Seq(CharLit(98), CharLit(99)))
    assert g.rules["S"] == lit("abc")


def test_class_desugars_to_right_nested_choice_with_ranges():
    g = raw("S <- [a-cx]")
    assert g.rules["S"] == alt(*(CharLit(c) for c in b"abcx"))


def test_escaped_dash_in_class_is_literal():
    g = raw(r"S <- [a\-c]")
    assert g.rules["S"] == alt(CharLit(97), CharLit(45), CharLit(99))


def test_trailing_dash_in_class_is_literal():
    g = raw("S <- [+-]")
    assert g.rules["S"] == alt(CharLit(43), CharLit(45))


def test_escapes():
    g = raw(r"S <- '\n\t\r\\\'\x41' / " + '"\\""')
    assert g.rules["S"] == Alt(lit(b"\n\t\r\\'A"), CharLit(34))


def test_empty_literal_is_empty_expression():
    assert raw("S <- ''").rules["S"] == EMPTY


def test_fail_keyword():
    assert raw("S <- FAIL").rules["S"] == FAIL


def test_sequence_and_choice_associate_right():
    g = raw("S <- 'a' 'b' 'c' / 'd' / 'e'")
    a, b, c, d, e = (CharLit(x) for x in b"abcde")
    assert g.rules["S"] == Alt(Seq(a, Seq(b, c)), Alt(d, e))


def test_optional_and_and_predicate():
    g = raw("S <- 'a'? &'b'")
    assert g.rules["S"] == Seq(Alt(CharLit(97), EMPTY), Not(Not(CharLit(98))))


def test_star_makes_fresh_right_recursive_rule():
    g = raw("S <- 'a'*")
    assert g.rules["S"] == Nonterm("R0")
    assert g.rules["R0"] == Alt(Seq(CharLit(97), Nonterm("R0")), EMPTY)
    assert g.generated == frozenset({"R0"})


def test_plus_is_one_then_star():
    g = raw("S <- 'a'+")
    assert g.rules["S"] == Seq(CharLit(97), Nonterm("R0"))


def test_fresh_names_skip_source_identifiers():
    g = raw("R0 <- 'x'*\nS <- R0")
    assert "R1" in g.rules and g.rules["R0"] == Nonterm("R1")


def test_start_directive_and_default():
    assert raw("A <- 'a'\nB <- 'b'").start == Nonterm("A")
    g = raw("%start B\nA <- 'a'\nB <- 'b'")
    assert g.start == Nonterm("B") and g.start_name == "B"


def test_comments_and_blank_lines():
    g = raw("# leading\n\nS <- 'a'  # trailing\n\n")
    assert g.rules == {"S": CharLit(97)}


@pytest.mark.parametrize("text, line, column, needle", [
    ("S <- A", 1, 6, "undefined rule A"),
    ("S <- 'a'\nS <- 'b'", 2, 1, "duplicate rule S"),
    ("S <- ('a'", 1, 10, "expected ')'"),
    ("S <- 'a' $", 1, 10, "unexpected character"),
    ("S <- 'é'", 1, 6, "non-ASCII"),
    ("S <- [z-a]", 1, 6, "empty range"),
    ("S <- '\\q'", 1, 6, "unknown escape"),
    ("%begin S\nS <- 'a'", 1, 1, "unknown directive"),
    ("S <- 'a'\n%start T", 2, 8, "undefined rule T"),
    ("", 1, 1, "no rules"),
    ("S <- ", 1, 6, "empty sequence"),
])
def test_load_errors_carry_positions(text, line, column, needle):
    with pytest.raises(GrammarError) as info:
        parse_grammar(text)
    err = info.value
    assert needle in err.message
    assert (err.line, err.column) == (line, column)


def test_loaded_grammar_is_simplified_by_default():
    g = parse_grammar("S <- 'x' B / 'y'\nB <- FAIL")
    assert g.rules["S"] == CharLit(ord("y"))


def test_expression_helpers():
    e = seq(CharLit(1), CharLit(2), CharLit(3))
    assert size(e) == 5 == len(list(walk(e)))
    assert seq() == EMPTY and alt() == FAIL


def test_format_expr_is_fully_parenthesized():
    e = Alt(Seq(CharLit(97), Not(Nonterm("X"))), EMPTY)
    assert format_expr(e) == "(('a' !X) / '')"
    assert format_expr(CharLit(0)) == r"'\x00'"
    assert format_expr(CharLit(39)) == r"'\''"


def test_format_round_trips_json_grammar():
    from sped.bench import json_grammar

    g = json_grammar()
    again = parse_grammar(format_grammar(g), simplify=False)
    assert again.rules == g.rules and again.start == g.start


@given(st.integers(0, 10**6))
def test_format_round_trips_random_grammars(seed):
    g = random_raw_grammar(random.Random(seed), FuzzConfig())
    again = parse_grammar(format_grammar(g), simplify=False)
    assert again.rules == g.rules
    assert again.start == g.start


@given(st.binary(max_size=8))
def test_any_byte_string_round_trips_through_literal_syntax(data):
    g = Grammar({"S": lit(data)}, Nonterm("S"), "S")
    assert parse_grammar(format_grammar(g), simplify=False).rules["S"] == lit(data)


def test_structural_equality_and_hash():
    a = Seq(CharLit(1), Nonterm("A"))
    b = Seq(CharLit(1), Nonterm("A"))
    assert a == b and hash(a) == hash(b) and a is not b
    with pytest.raises(ValueError):
        CharLit(256)
