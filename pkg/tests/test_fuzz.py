import random

from sped.analysis import check_well_formed
from sped.fuzz import (
    FuzzConfig, SecondComponentFollowerEngine, compare, draw_case, minimize, random_grammar,
    random_input, run_fuzz,
)
from sped.grammar import format_grammar, parse_grammar


def test_cases_are_reproducible():
    cfg = FuzzConfig()
    for k in range(20):
        g1, d1 = draw_case(7, k, cfg)
        g2, d2 = draw_case(7, k, cfg)
        assert g1 == g2 and d1 == d2
    assert draw_case(7, 0, cfg) != draw_case(8, 0, cfg)


def test_drawn_grammars_are_well_formed_and_inputs_bounded():
    cfg = FuzzConfig(max_input=5)
    rng = random.Random(3)
    for _ in range(100):
        g = random_grammar(rng, cfg)
        assert check_well_formed(g).ok
        assert len(random_input(rng, g, cfg)) <= 5


def test_run_fuzz_summary():
    s = run_fuzz(1, 300)
    assert s.ok and s.count == 300 and s.agreed == 300
    assert set(s.branches) == {"fail", "match_now", "match_now_eos", "match_earlier", "rebuild"}
    assert run_fuzz(1, 300).as_dict() == s.as_dict()
    assert run_fuzz(1, 0).ok


def test_growth_constant_measured_only_with_stats():
    assert run_fuzz(2, 50).growth_constant == 0
    assert run_fuzz(2, 50, stats=True).growth_constant > 0


def test_mutant_caught_within_thousand_cases():
    s = run_fuzz(42, 1000, factory=SecondComponentFollowerEngine, stop_after=1)
    assert not s.ok
    assert s.count <= 1000


def test_minimizer_keeps_disagreement_and_shrinks():
    s = run_fuzz(42, 1000, factory=SecondComponentFollowerEngine, stop_after=1)
    case = s.disagreements[0]

    def disagrees(g, data):
        return not compare(g, data, factory=SecondComponentFollowerEngine).agree

    g, data = minimize(case.grammar, case.data, disagrees)
    assert disagrees(g, data)
    assert len(data) <= len(case.data)
    assert len(format_grammar(g)) <= len(format_grammar(case.grammar))


def test_engine_error_is_never_excused():
    # left recursion: the oracle has no verdict, but an engine error still counts
    g = parse_grammar("S <- 'd' S / ''")
    res = compare(g, b"dd", factory=SecondComponentFollowerEngine)
    assert res.engine.startswith("error:")
    assert not res.agree
