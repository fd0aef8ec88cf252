"""Static analyses over a grammar.

Nullability (``nu``: matches every string) and weak nullability
(``lam``: matches the empty string) are least fixed points over every
expression occurrence reachable from the grammar.  The same goes for the
subexpression and left-expansion closures used by the well-formedness
check.  All tables are keyed by structural identity, so equal subtrees
share an entry.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .grammar import (
    EMPTY, FAIL, Alt, CharLit, Empty, Fail, Grammar, Nonterm, Not, Seq,
    SurfaceExpr, walk,
)


def reachable_exprs(g: Grammar) -> list[SurfaceExpr]:
    """Every distinct expression occurrence in the start expression and rules.

    Children come before parents, which makes the fixed-point sweeps
    below converge in few rounds.
    """
    seen: set[SurfaceExpr] = set()
    order: list[SurfaceExpr] = []
    for body in g.bodies():
        for node in reversed(list(walk(body))):
            if node not in seen:
                seen.add(node)
                order.append(node)
    return order


@dataclass
class NullabilityTable:
    nu: dict[SurfaceExpr, bool]
    lam: dict[SurfaceExpr, bool]
    rules: Mapping[str, SurfaceExpr] = field(default_factory=dict)

    def nu_of(self, e: SurfaceExpr) -> bool:
        """``nu`` of any expression, evaluated structurally down to known entries."""
        hit = self.nu.get(e)
        if hit is not None:
            return hit
        return _step_nu(e, self.nu_of, self.rules)

    def lam_of(self, e: SurfaceExpr) -> bool:
        hit = self.lam.get(e)
        if hit is not None:
            return hit
        return _step_lam(e, self.lam_of, self.rules)


def _step_nu(e: SurfaceExpr, get: Callable[[SurfaceExpr], bool],
             rules: Mapping[str, SurfaceExpr]) -> bool:
    if isinstance(e, Empty):
        return True
    if isinstance(e, (CharLit, Fail, Not)):
        return False
    if isinstance(e, Nonterm):
        return get(rules[e.name])
    if isinstance(e, Seq):
        return get(e.first) and get(e.second)
    if isinstance(e, Alt):
        return get(e.first) or get(e.second)
    raise TypeError(e)


def _step_lam(e: SurfaceExpr, get: Callable[[SurfaceExpr], bool],
              rules: Mapping[str, SurfaceExpr]) -> bool:
    if isinstance(e, (Empty, Not)):
        return True
    if isinstance(e, (CharLit, Fail)):
        return False
    if isinstance(e, Nonterm):
        return get(rules[e.name])
    if isinstance(e, Seq):
        return get(e.first) and get(e.second)
    if isinstance(e, Alt):
        return get(e.first) or get(e.second)
    raise TypeError(e)


def _least_fixed_point(exprs: list[SurfaceExpr], rules: Mapping[str, SurfaceExpr],
                       step: Callable) -> dict[SurfaceExpr, bool]:
    table = {e: False for e in exprs}
    get = table.__getitem__
    changed = True
    while changed:
        changed = False
        for e in exprs:
            if not table[e] and step(e, get, rules):
                table[e] = True
                changed = True
    return table


def compute_nullability(g: Grammar) -> NullabilityTable:
    """Least fixed points of ``lam`` and ``nu``, both starting from all-false.

    Terminates on any grammar, well-formed or not; a left-recursive rule
    such as ``A <- A`` simply stays false.
    """
    exprs = reachable_exprs(g)
    lam = _least_fixed_point(exprs, g.rules, _step_lam)
    nu = _least_fixed_point(exprs, g.rules, _step_nu)
    return NullabilityTable(nu, lam, g.rules)


def sub(e: SurfaceExpr, rules: Mapping[str, SurfaceExpr]) -> tuple[SurfaceExpr, ...]:
    if isinstance(e, Nonterm):
        return (rules[e.name],)
    return e.children()


def left_expansion(e: SurfaceExpr, nt: NullabilityTable) -> tuple[SurfaceExpr, ...]:
    if isinstance(e, Nonterm):
        return (nt.rules[e.name],)
    if isinstance(e, Not):
        return (e.child,)
    if isinstance(e, Seq):
        return (e.first, e.second) if nt.lam_of(e.first) else (e.first,)
    if isinstance(e, Alt):
        return (e.first, e.second)
    return ()


@dataclass
class ExpansionSets:
    sub_plus: dict[SurfaceExpr, frozenset[SurfaceExpr]]
    le_plus: dict[SurfaceExpr, frozenset[SurfaceExpr]]
    le: dict[SurfaceExpr, tuple[SurfaceExpr, ...]]


def _closure(exprs: list[SurfaceExpr], edges: Mapping[SurfaceExpr, Iterable[SurfaceExpr]]
             ) -> dict[SurfaceExpr, frozenset[SurfaceExpr]]:
    # per-node reachability; equal to the iterated union but avoids the
    # quadratic set merging on long choice chains (character classes)
    plus = {}
    for e in exprs:
        seen: set[SurfaceExpr] = set()
        stack = list(edges[e])
        while stack:
            node = stack.pop()
            if node not in seen:
                seen.add(node)
                stack.extend(edges[node])
        plus[e] = frozenset(seen)
    return plus


def compute_expansions(g: Grammar, nt: NullabilityTable | None = None) -> ExpansionSets:
    """Transitive closures SUB+ and LE+ over every reachable occurrence."""
    nt = nt or compute_nullability(g)
    exprs = reachable_exprs(g)
    subs = {e: sub(e, g.rules) for e in exprs}
    les = {e: left_expansion(e, nt) for e in exprs}
    return ExpansionSets(_closure(exprs, subs), _closure(exprs, les), les)


@dataclass
class WellFormedness:
    ok: bool
    # offending rule name -> witnessing cycle of rule names, first == last
    cycles: dict[str, list[str]]


def _le_cycle(start: Nonterm, les: Mapping[SurfaceExpr, tuple[SurfaceExpr, ...]]) -> list[str]:
    parent: dict[SurfaceExpr, SurfaceExpr] = {}
    queue = deque([start])
    found = None
    while queue and found is None:
        node = queue.popleft()
        for nxt in les[node]:
            if nxt == start:
                found = node
                break
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    path = []
    node = found
    while node is not None and node != start:
        path.append(node)
        node = parent.get(node)
    names = [start.name]
    names.extend(n.name for n in reversed(path) if isinstance(n, Nonterm))
    names.append(start.name)
    return names


def check_well_formed(g: Grammar, ex: ExpansionSets | None = None) -> WellFormedness:
    """No expression reachable from the grammar may left-expand itself."""
    ex = ex or compute_expansions(g)
    cycles: dict[str, list[str]] = {}
    bad = False
    for e, le_plus in ex.le_plus.items():
        if e in le_plus:
            bad = True
            if isinstance(e, Nonterm) and e.name not in cycles:
                cycles[e.name] = _le_cycle(e, ex.le)
    return WellFormedness(not bad, cycles)


def simplify(e: SurfaceExpr, nt: NullabilityTable) -> SurfaceExpr:
    """Apply the eleven rewrite rules bottom-up in one pass.

    Use :func:`simplify_grammar` to iterate with refreshed nullability
    until nothing changes.
    """
    if isinstance(e, Seq):
        a, b = simplify(e.first, nt), simplify(e.second, nt)
        if isinstance(b, Empty):
            return a
        if isinstance(a, Empty):
            return b
        if isinstance(a, Fail) or isinstance(b, Fail):
            return FAIL
        return e if (a is e.first and b is e.second) else Seq(a, b)
    if isinstance(e, Alt):
        a, b = simplify(e.first, nt), simplify(e.second, nt)
        if isinstance(b, Fail):
            return a
        if isinstance(a, Fail):
            return b
        if nt.nu_of(a):
            return a
        return e if (a is e.first and b is e.second) else Alt(a, b)
    if isinstance(e, Not):
        a = simplify(e.child, nt)
        if isinstance(a, Fail):
            return EMPTY
        if nt.nu_of(a):
            return FAIL
        if isinstance(a, Not) and isinstance(a.child, Not):
            return a.child
        return e if a is e.child else Not(a)
    if isinstance(e, Nonterm) and isinstance(nt.rules.get(e.name), Fail):
        return FAIL
    return e


def simplify_grammar(g: Grammar) -> Grammar:
    """Simplify every rule body and the start expression to a global fixed point."""
    while True:
        nt = compute_nullability(g)
        rules = {name: simplify(body, nt) for name, body in g.rules.items()}
        start = simplify(g.start, nt)
        if start == g.start and all(rules[n] == g.rules[n] for n in rules):
            return g
        g = g.with_rules(rules, start)


def lam_structural(e: SurfaceExpr, rules: Mapping[str, SurfaceExpr],
                   visited: list[SurfaceExpr] | None = None) -> bool:
    """Direct recursive ``lam`` with a short-circuiting sequence case.

    Terminates on well-formed grammars only; ``visited`` collects every
    expression examined.
    """
    if visited is not None:
        visited.append(e)
    if isinstance(e, (Empty, Not)):
        return True
    if isinstance(e, (CharLit, Fail)):
        return False
    if isinstance(e, Nonterm):
        return lam_structural(rules[e.name], rules, visited)
    if isinstance(e, Seq):
        return lam_structural(e.first, rules, visited) and lam_structural(e.second, rules, visited)
    a = lam_structural(e.first, rules, visited)  # type: ignore[attr-defined]
    b = lam_structural(e.second, rules, visited)  # type: ignore[attr-defined]
    return a or b


def nu_structural(e: SurfaceExpr, rules: Mapping[str, SurfaceExpr],
                  visited: list[SurfaceExpr] | None = None) -> bool:
    if visited is not None:
        visited.append(e)
    if isinstance(e, Empty):
        return True
    if isinstance(e, (CharLit, Fail, Not)):
        return False
    if isinstance(e, Nonterm):
        return nu_structural(rules[e.name], rules, visited)
    if isinstance(e, Seq):
        return nu_structural(e.first, rules, visited) and nu_structural(e.second, rules, visited)
    a = nu_structural(e.first, rules, visited)  # type: ignore[attr-defined]
    b = nu_structural(e.second, rules, visited)  # type: ignore[attr-defined]
    return a or b
