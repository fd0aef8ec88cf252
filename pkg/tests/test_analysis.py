import random

import pytest
from hypothesis import given, strategies as st

from sped.analysis import (
    check_well_formed, compute_expansions, compute_nullability, lam_structural,
    nu_structural, simplify, simplify_grammar,
)
from sped.fuzz import FuzzConfig, random_raw_grammar
from sped.grammar import (
    EMPTY, FAIL, Alt, CharLit, Grammar, Nonterm, Not, Seq, parse_grammar, walk,
)
from sped.oracle import Failure, FuelExhausted, Rest, interpret

A, B = CharLit(97), CharLit(98)


def raw(text):
    return parse_grammar(text, simplify=False)


def table_for(*exprs, rules=None):
    rules = dict(rules or {})
    for k, e in enumerate(exprs):
        rules[f"_E{k}"] = e
    return compute_nullability(Grammar(rules, Nonterm("_E0"), "_E0"))


@pytest.mark.parametrize("expr, lam, nu", [
    (EMPTY, True, True),
    (A, False, False),
    (FAIL, False, False),
    (Not(A), True, False),                       # lookahead: may match empty, not every string
    (Seq(EMPTY, EMPTY), True, True),
    (Seq(Not(A), EMPTY), True, False),
    (Alt(A, EMPTY), True, True),
    (Alt(Not(A), A), True, False),
    (Seq(A, EMPTY), False, False),
])
def test_nullability_of_core_forms(expr, lam, nu):
    nt = table_for(expr)
    assert (nt.lam_of(expr), nt.nu_of(expr)) == (lam, nu)


def test_nullability_through_rules():
    g = raw("S <- A B\nA <- 'a' / ''\nB <- !'x'")
    nt = compute_nullability(g)
    body = g.rules
    assert nt.lam_of(body["A"]) and nt.nu_of(body["A"])
    assert nt.lam_of(body["B"]) and not nt.nu_of(body["B"])
    assert nt.lam_of(body["S"]) and not nt.nu_of(body["S"])


def test_left_recursion_stays_false_and_terminates():
    g = raw("A <- A 'a' / ''")
    nt = compute_nullability(g)
    # lam(A) holds through the second alternative even though A left-recurses
    assert nt.lam_of(g.rules["A"])
    g = raw("A <- A")
    nt = compute_nullability(g)
    assert not nt.lam_of(g.rules["A"]) and not nt.nu_of(g.rules["A"])


@pytest.mark.parametrize("text, ok, cycles", [
    ("A <- A 'a'", False, {"A": ["A", "A"]}),
    ("A <- B\nB <- A / 'x'", False, {"A": ["A", "B", "A"], "B": ["B", "A", "B"]}),
    ("A <- 'a' A / ''", True, {}),
    ("A <- B A\nB <- ''", False, {"A": ["A", "A"]}),      # nullable prefix exposes A
    ("A <- !A 'x'", False, {"A": ["A", "A"]}),
    ("A <- B A\nB <- 'b'", True, {}),
])
def test_well_formedness(text, ok, cycles):
    wf = check_well_formed(raw(text))
    assert wf.ok == ok
    assert wf.cycles == cycles


def test_bundled_grammars_are_well_formed():
    from sped.bench import json_grammar
    from conftest import ANBNCN, FOO_BAR_BAZ

    for g in (json_grammar(), parse_grammar(ANBNCN), parse_grammar(FOO_BAR_BAZ)):
        assert check_well_formed(g).ok


def test_expansion_closures():
    g = raw("S <- X 'a'\nX <- 'b' / ''")
    ex = compute_expansions(g)
    s = g.rules["S"]
    assert Nonterm("X") in ex.le_plus[s]
    assert A in ex.le_plus[s]           # X is weakly nullable, so 'a' is left-reachable
    assert A in ex.sub_plus[s]
    g2 = raw("S <- X 'a'\nX <- 'b'")
    ex2 = compute_expansions(g2)
    assert A not in ex2.le_plus[g2.rules["S"]]


# the eleven rewrite rules, one case each
@pytest.mark.parametrize("before, after, rules", [
    (Seq(A, EMPTY), A, {}),                             # 1  a ε -> a
    (Seq(EMPTY, A), A, {}),                             # 2  ε a -> a
    (Seq(FAIL, A), FAIL, {}),                           # 3  ∅ a -> ∅
    (Seq(A, FAIL), FAIL, {}),                           # 4  a ∅ -> ∅
    (Alt(A, FAIL), A, {}),                              # 5  a / ∅ -> a
    (Alt(FAIL, A), A, {}),                              # 6  ∅ / a -> a
    (Alt(Alt(A, EMPTY), B), Alt(A, EMPTY), {}),         # 7  a / b -> a when nu(a)
    (Nonterm("Z"), FAIL, {"Z": FAIL}),                  # 8  A -> ∅ when A := ∅
    (Not(FAIL), EMPTY, {}),                             # 9  !∅ -> ε
    (Not(Alt(A, EMPTY)), FAIL, {}),                     # 10 !a -> ∅ when nu(a)
    (Not(Not(Not(A))), Not(A), {}),                     # 11 !!!a -> !a
])
def test_simplification_rules(before, after, rules):
    nt = table_for(before, rules=rules)
    assert simplify(before, nt) == after


def test_simplification_reaches_global_fixed_point():
    g = simplify_grammar(raw("S <- 'x' B / 'y'\nB <- C\nC <- FAIL"))
    assert g.rules["S"] == CharLit(ord("y"))
    assert g.rules["B"] == FAIL
    assert simplify_grammar(g) is g


def _equivalent_on(g1, g2, inputs, fuel=20_000):
    for s in inputs:
        r1 = interpret(g1.start, g1, s, 0, fuel)
        r2 = interpret(g2.start, g2, s, 0, fuel)
        if isinstance(r1, FuelExhausted) or isinstance(r2, FuelExhausted):
            continue
        assert r1 == r2, (s, r1, r2)


@given(st.integers(0, 10**6), st.lists(st.binary(max_size=6).map(
    lambda b: bytes(97 + x % 4 for x in b)), min_size=1, max_size=5))
def test_simplification_preserves_meaning(seed, inputs):
    g = random_raw_grammar(random.Random(seed), FuzzConfig())
    _equivalent_on(g, simplify_grammar(g), inputs)


@given(st.integers(0, 10**6))
def test_nu_implies_lam(seed):
    g = random_raw_grammar(random.Random(seed), FuzzConfig())
    nt = compute_nullability(g)
    for body in g.bodies():
        for e in walk(body):
            if nt.nu_of(e):
                assert nt.lam_of(e)


@given(st.integers(0, 10**6))
def test_structural_recursion_agrees_with_fixed_point_on_well_formed(seed):
    g = simplify_grammar(random_raw_grammar(random.Random(seed), FuzzConfig()))
    if not check_well_formed(g).ok:
        return
    nt = compute_nullability(g)
    for body in g.bodies():
        for e in walk(body):
            assert lam_structural(e, g.rules) == nt.lam_of(e)
            assert nu_structural(e, g.rules) == nt.nu_of(e)


def test_structural_lam_short_circuits_sequences():
    g = raw("S <- 'a' T\nT <- T")     # T is left-recursive, but never examined
    seen = []
    assert lam_structural(g.rules["S"], g.rules, seen) is False
    assert Nonterm("T") not in seen
