import random

import pytest
from hypothesis import HealthCheck, settings

from sped.fuzz import FuzzConfig, draw_case
from sped.grammar import parse_grammar

settings.register_profile(
    "default", max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FOO_BAR_BAZ = 'S <- "foo" / "bar" / "baz"\n'

ANBNCN = """\
S <- &(A !'b') Astar B !Any
A <- 'a' A 'b' / ''
B <- 'b' B 'c' / ''
Any <- 'a' / 'b' / 'c'
Astar <- 'a' Astar / ''
"""

# The grammar above also accepts a^(n+1) b^n c^n ("aabc"): its lookahead only
# checks that b's do not outnumber a's.  This one denotes exactly
# a^n b^n c^n for n >= 1 over the alphabet abc.
ANBNCN_STRICT = """\
S <- &(A 'c') 'a'+ B !Any
A <- 'a' A 'b' / 'a' 'b'
B <- 'b' B 'c' / 'b' 'c'
Any <- 'a' / 'b' / 'c'
"""


@pytest.fixture
def grammar():
    return parse_grammar


@pytest.fixture(scope="session")
def small_corpus():
    """300 seeded fuzz cases shared by the property-style unit tests."""
    cfg = FuzzConfig()
    return [draw_case(2024, k, cfg) for k in range(300)]


def anbncn_member(s: bytes, min_n: int = 0) -> bool:
    """Direct membership test for a^n b^n c^n, n >= min_n."""
    n = len(s) // 3
    return n >= min_n and len(s) % 3 == 0 and s == b"a" * n + b"b" * n + b"c" * n


def rng(seed: int) -> random.Random:
    return random.Random(seed)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.REPORT:
            terminalreporter.write_line(line)
