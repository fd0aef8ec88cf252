"""Differential fuzzing of the derivative engine against the oracle.

Grammars are drawn over the terminals ``abcd`` with at most six rules and
expression depth five, simplified, and rejected unless well-formed.
Inputs of length at most twelve are drawn either uniformly over the
grammar's terminals or by a random walk through the grammar (which makes
matches common enough to exercise every branch of the sequence step).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .analysis import check_well_formed, simplify_grammar
from .engine import SEQ_BRANCHES, Engine, EngineInvariantError
from .grammar import (
    EMPTY, FAIL, Alt, CharLit, Empty, Fail, Grammar, Nonterm, Not, Seq, SurfaceExpr,
    format_grammar, walk,
)
from .oracle import FuelExhausted, Rest, interpret

ALPHABET = b"abcd"


@dataclass
class FuzzConfig:
    max_rules: int = 6
    max_depth: int = 5
    max_input: int = 12
    alphabet: bytes = ALPHABET
    fuel: int = 200_000


def _random_expr(rng: random.Random, names: list[str], depth: int, cfg: FuzzConfig) -> SurfaceExpr:
    if depth <= 1 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.55:
            return CharLit(rng.choice(cfg.alphabet))
        if r < 0.85:
            return Nonterm(rng.choice(names))
        if r < 0.95:
            return EMPTY
        return FAIL
    r = rng.random()
    if r < 0.4:
        return Seq(_random_expr(rng, names, depth - 1, cfg), _random_expr(rng, names, depth - 1, cfg))
    if r < 0.75:
        return Alt(_random_expr(rng, names, depth - 1, cfg), _random_expr(rng, names, depth - 1, cfg))
    if r < 0.9:
        return Not(_random_expr(rng, names, depth - 1, cfg))
    # repetition in the loader's desugared shape
    return Nonterm(rng.choice(names))


def random_raw_grammar(rng: random.Random, cfg: FuzzConfig) -> Grammar:
    """A random grammar as drawn, before simplification or screening."""
    count = rng.randint(1, cfg.max_rules)
    names = [f"N{k}" for k in range(count)]
    rules = {name: _random_expr(rng, names, rng.randint(1, cfg.max_depth), cfg) for name in names}
    if rng.random() < 0.5:
        # a right-recursive repetition rule, the way ``e*`` desugars
        star = names[-1]
        rules[star] = Alt(Seq(_random_expr(rng, names[:-1] or names, 2, cfg), Nonterm(star)), EMPTY)
    return Grammar(rules, Nonterm(names[0]), names[0])


def random_grammar(rng: random.Random, cfg: FuzzConfig, max_tries: int = 1000) -> Grammar:
    """A simplified, well-formed random grammar (rejection sampling)."""
    for _ in range(max_tries):
        g = simplify_grammar(random_raw_grammar(rng, cfg))
        if check_well_formed(g).ok:
            return g
    raise RuntimeError("could not draw a well-formed grammar")


def _terminals(g: Grammar) -> bytes:
    found = sorted({e.c for body in g.bodies() for e in walk(body) if isinstance(e, CharLit)})
    return bytes(found)


def _generate(rng: random.Random, g: Grammar, e: SurfaceExpr, out: bytearray, budget: list[int]) -> None:
    budget[0] -= 1
    if budget[0] <= 0:
        return
    if isinstance(e, CharLit):
        out.append(e.c)
    elif isinstance(e, Nonterm):
        _generate(rng, g, g.rules[e.name], out, budget)
    elif isinstance(e, Seq):
        _generate(rng, g, e.first, out, budget)
        _generate(rng, g, e.second, out, budget)
    elif isinstance(e, Alt):
        _generate(rng, g, e.first if rng.random() < 0.6 else e.second, out, budget)


def random_input(rng: random.Random, g: Grammar, cfg: FuzzConfig) -> bytes:
    terminals = _terminals(g) or cfg.alphabet
    if rng.random() < 0.5:
        out = bytearray()
        target = rng.randint(0, cfg.max_input)
        for _ in range(3):
            _generate(rng, g, g.start, out, [rng.randint(4, 80)])
            if len(out) >= target:
                break
        if rng.random() < 0.3 and out:
            out[rng.randrange(len(out))] = rng.choice(terminals)
        if rng.random() < 0.3:
            out.append(rng.choice(cfg.alphabet))
        return bytes(out[:cfg.max_input])
    pool = terminals if rng.random() < 0.8 else cfg.alphabet
    return bytes(rng.choice(pool) for _ in range(rng.randint(0, cfg.max_input)))


@dataclass
class CaseResult:
    index: int
    grammar: Grammar
    data: bytes
    engine: str          # "match:<j>", "fail" or "error:<message>"
    oracle: str          # "match:<j>", "fail" or "no-verdict"
    steps: list[tuple[int, int]] = field(default_factory=list)  # (nodes_created, max_followers)

    @property
    def agree(self) -> bool:
        # an engine error is never excused, even without an oracle verdict
        if self.engine.startswith("error:"):
            return False
        return self.oracle == "no-verdict" or self.engine == self.oracle

    @property
    def skipped(self) -> bool:
        return self.oracle == "no-verdict"


EngineFactory = Callable[[Grammar], Engine]


class SecondComponentFollowerEngine(Engine):
    """Deliberately wrong engine: creates followers when the *second*
    component may match empty.  Used to check that fuzzing catches bugs."""

    def needs_follower(self, e: Seq, lam: Callable[[SurfaceExpr], bool]) -> bool:
        return lam(e.second)


MUTANTS: dict[str, EngineFactory] = {"second-follower": SecondComponentFollowerEngine}


def compare(g: Grammar, data: bytes, *, factory: EngineFactory = Engine, fuel: int = 200_000,
            stats: bool = False, branches: Optional[list[int]] = None,
            index: int = 0) -> CaseResult:
    steps: list[tuple[int, int]] = []
    try:
        engine = factory(g)
        outcome = engine.recognize(
            data, on_step=(lambda r: steps.append((r.nodes_created, r.max_followers or 0)))
            if stats else None)
        got = f"match:{outcome.consumed_through}" if outcome.matched else "fail"
        if branches is not None:
            for k, v in enumerate(engine.seq_branches):
                branches[k] += v
    except EngineInvariantError as exc:
        got = f"error:{exc}"
    except RecursionError:
        got = "error:unbounded recursion"
    ref = interpret(g.start, g, data, 0, fuel)
    if isinstance(ref, FuelExhausted):
        want = "no-verdict"
    elif isinstance(ref, Rest):
        want = f"match:{ref.position}"
    else:
        want = "fail"
    return CaseResult(index, g, data, got, want, steps)


def case_rng(seed: int, index: int) -> random.Random:
    return random.Random(seed * 1_000_003 + index)


def draw_case(seed: int, index: int, cfg: FuzzConfig) -> tuple[Grammar, bytes]:
    rng = case_rng(seed, index)
    g = random_grammar(rng, cfg)
    return g, random_input(rng, g, cfg)


@dataclass
class FuzzSummary:
    count: int
    agreed: int
    skipped: int
    branches: dict[str, int]
    disagreements: list[CaseResult]
    growth_constant: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "agree": self.agreed,
            "skipped": self.skipped,
            "disagreements": len(self.disagreements),
            "seq_branches": self.branches,
            "growth_constant": round(self.growth_constant, 3),
        }


def run_fuzz(seed: int, count: int, cfg: FuzzConfig | None = None, *,
             factory: EngineFactory = Engine, stats: bool = False,
             stop_after: int | None = None) -> FuzzSummary:
    """Run ``count`` seeded cases; case ``k`` depends only on ``(seed, k)``.

    With ``stats``, also measures the largest ratio of nodes created in one
    step to ``1 + widest follower list`` (the per-step growth constant).
    """
    cfg = cfg or FuzzConfig()
    branches = [0] * len(SEQ_BRANCHES)
    bad: list[CaseResult] = []
    agreed = skipped = 0
    growth = 0.0
    for index in range(count):
        g, data = draw_case(seed, index, cfg)
        res = compare(g, data, factory=factory, fuel=cfg.fuel, stats=stats,
                      branches=branches, index=index)
        if res.skipped:
            skipped += 1
        if res.agree:
            agreed += 1
        else:
            bad.append(res)
            if stop_after is not None and len(bad) >= stop_after:
                count = index + 1
                break
        for created, width in res.steps:
            growth = max(growth, created / (1 + width))
    return FuzzSummary(count, agreed, skipped, dict(zip(SEQ_BRANCHES, branches)), bad, growth)


# --------------------------------------------------------------------------
# Minimization

def _replacements(e: SurfaceExpr) -> list[SurfaceExpr]:
    """Strictly smaller variants of ``e`` differing at one position."""
    out: list[SurfaceExpr] = []
    if not isinstance(e, (Empty, Fail)):
        out.extend([EMPTY, FAIL])
    out.extend(e.children())
    if isinstance(e, Not):
        out.extend(Not(c) for c in _replacements(e.child))
    elif isinstance(e, (Seq, Alt)):
        cls = type(e)
        out.extend(cls(c, e.second) for c in _replacements(e.first))
        out.extend(cls(e.first, c) for c in _replacements(e.second))
    return out


def _inlined(g: Grammar, e: SurfaceExpr) -> list[SurfaceExpr]:
    """Variants of ``e`` with one reference to a single-terminal rule inlined."""
    if isinstance(e, Nonterm):
        body = g.rules[e.name]
        return [body] if isinstance(body, (CharLit, Empty, Fail)) else []
    if isinstance(e, Not):
        return [Not(c) for c in _inlined(g, e.child)]
    if isinstance(e, (Seq, Alt)):
        cls = type(e)
        return ([cls(c, e.second) for c in _inlined(g, e.first)]
                + [cls(e.first, c) for c in _inlined(g, e.second)])
    return []


def _reachable(g: Grammar) -> Grammar:
    keep: list[str] = []
    todo = [g.start]
    while todo:
        for node in walk(todo.pop()):
            if isinstance(node, Nonterm) and node.name not in keep:
                keep.append(node.name)
                todo.append(g.rules[node.name])
    rules = {name: g.rules[name] for name in g.rules if name in keep}
    if g.start_name and g.start_name not in rules:
        return g
    return Grammar(rules, g.start, g.start_name)


def minimize(g: Grammar, data: bytes, disagrees: Callable[[Grammar, bytes], bool]
             ) -> tuple[Grammar, bytes]:
    """Greedy delta debugging: shrink rule bodies, then input bytes."""

    def ok(cand: Grammar, s: bytes) -> bool:
        try:
            cand = simplify_grammar(cand)
        except KeyError:
            return False
        return check_well_formed(cand).ok and disagrees(cand, s)

    g = _reachable(g)
    improved = True
    while improved:
        improved = False
        for name in list(g.rules):
            for body in _replacements(g.rules[name]) + _inlined(g, g.rules[name]):
                rules = dict(g.rules)
                rules[name] = body
                cand = _reachable(simplify_grammar(Grammar(rules, Nonterm(g.start_name), g.start_name)))
                if ok(cand, data):
                    g = simplify_grammar(cand)
                    improved = True
                    break
            if improved:
                break

    chunk = max(1, len(data) // 2)
    while chunk >= 1 and data:
        start = 0
        shrunk = False
        while start < len(data):
            cand = data[:start] + data[start + chunk:]
            if disagrees(g, cand):
                data = cand
                shrunk = True
            else:
                start += chunk
        if not shrunk:
            chunk //= 2
    return g, data


def describe_case(g: Grammar, data: bytes) -> str:
    return format_grammar(g) + f"input: {data!r}\n"
