"""Indexed derivative recognizer over an annotated expression DAG.

Recognition starts from the start expression normalized at index 0 and
takes one derivative step per input byte (the byte at 1-based position
``k`` is consumed with index ``k``), then a final step on the
end-of-string symbol :data:`EOS` at index ``n``.  The result collapses to
``EmptyAt(j)`` (matched, bytes ``1..j`` consumed) or ``FAIL_NODE``.

Derivatives are memoized per step by node identity, so the evolving
expression is a DAG.  ``back`` and ``match`` index sets are computed once
when a node is built; nodes never change afterwards.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import BinaryIO, Callable, Iterable, Iterator, Optional, Union

from .analysis import NullabilityTable, compute_nullability
from .grammar import Alt, CharLit, Empty, Fail, Grammar, Nonterm, Not, Seq, SurfaceExpr, walk

EOS = 256
"""End-of-string symbol; outside the byte range so no literal can produce it."""

IndexSet = tuple  # sorted tuple of distinct ints

SEQ_BRANCHES = ("fail", "match_now", "match_now_eos", "match_earlier", "rebuild")

_ids = itertools.count()


class EngineInvariantError(RuntimeError):
    """A structural invariant of the derivative DAG was violated."""


def _union(x: tuple, y: tuple) -> tuple:
    if not x:
        return y
    if not y or x == y:
        return x
    return tuple(sorted(set(x).union(y)))


class Node:
    """Annotated expression node.

    ``back`` holds the earlier indices the node may finish at without
    consuming more input; ``match`` the index it is certain to finish at
    (at most one).  ``sure`` says the node is certain to succeed at some
    index, possibly one not reached yet.
    """

    __slots__ = ("id", "back", "match", "sure")

    def children(self) -> tuple[Node, ...]:
        return ()

    def derive(self, ctx: StepContext) -> Node:
        raise NotImplementedError


class CharNode(Node):
    __slots__ = ("c",)

    def __init__(self, c: int):
        self.id = next(_ids)
        self.c = c
        self.back = ()
        self.match = ()
        self.sure = False

    def derive(self, ctx: StepContext) -> Node:
        return ctx.empty if ctx.symbol == self.c else FAIL_NODE

    def __repr__(self) -> str:
        return f"CharNode({self.c!r})"


class EmptyAt(Node):
    __slots__ = ("j",)

    def __init__(self, j: int):
        self.id = next(_ids)
        self.j = j
        self.back = (j,)
        self.match = (j,)
        self.sure = True

    def derive(self, ctx: StepContext) -> Node:
        return self

    def __repr__(self) -> str:
        return f"EmptyAt({self.j})"


class FailNode(Node):
    __slots__ = ()

    def __init__(self) -> None:
        self.id = next(_ids)
        self.back = ()
        self.match = ()
        self.sure = False

    def derive(self, ctx: StepContext) -> Node:
        return self

    def __repr__(self) -> str:
        return "FAIL_NODE"


FAIL_NODE = FailNode()


class NotAt(Node):
    __slots__ = ("j", "child")

    def __init__(self, j: int, child: Node):
        self.id = next(_ids)
        self.j = j
        self.child = child
        self.back = (j,)
        self.match = ()
        self.sure = False

    def children(self) -> tuple[Node, ...]:
        return (self.child,)

    def derive(self, ctx: StepContext) -> Node:
        memo = ctx.memo
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit
        a = self.child.derive(ctx)
        if a.sure:
            out: Node = FAIL_NODE
        elif a is FAIL_NODE:
            out = ctx.make_empty(self.j)
        else:
            out = ctx.make_not(self.j, a)
        memo[key] = out
        return out

    def __repr__(self) -> str:
        return f"NotAt({self.j}, {self.child!r})"


class SeqNode(Node):
    """``first template [followers]``; follower indices equal ``first.back``.

    ``template_nu`` records whether the template matches every string; a
    sequence is sure only if every way ``first`` can finish leads to a
    sure continuation, including finishing at an index not reached yet.
    """

    __slots__ = ("first", "template", "followers", "template_nu")

    def __init__(self, first: Node, template: SurfaceExpr, followers: tuple[tuple[int, Node], ...],
                 template_nu: bool = False):
        self.id = next(_ids)
        self.first = first
        self.template = template
        self.followers = followers
        self.template_nu = template_nu
        if not followers:
            self.back = self.match = ()
            if first.match:
                self.follower(first.match[0])  # raises
            self.sure = first.sure and template_nu
            return
        if len(followers) == 1:
            self.back = followers[0][1].back
        else:
            back: tuple = ()
            for _, f in followers:
                back = _union(back, f.back)
            self.back = back
        if first.match:
            after = self.follower(first.match[0])
            self.match = after.match
            self.sure = after.sure
        else:
            self.match = ()
            self.sure = first.sure and template_nu and all(f.sure for _, f in followers)

    def follower(self, j: int) -> Node:
        for k, f in self.followers:
            if k == j:
                return f
        raise EngineInvariantError(
            f"sequence node {self.id} has no follower at index {j} "
            f"(followers at {[k for k, _ in self.followers]})")

    def children(self) -> tuple[Node, ...]:
        return (self.first, *(f for _, f in self.followers))

    def derive(self, ctx: StepContext) -> Node:
        memo = ctx.memo
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit
        a = self.first.derive(ctx)
        branches = ctx.seq_branches
        i = ctx.index
        if a is FAIL_NODE:
            branches[0] += 1
            out: Node = FAIL_NODE
        elif type(a) is EmptyAt:
            j = a.j  # type: ignore[attr-defined]
            if j == i:
                out = ctx.normalize(self.template)
                if ctx.symbol == EOS:
                    branches[2] += 1
                    out = out.derive(ctx)
                else:
                    branches[1] += 1
            else:
                branches[3] += 1
                out = self.follower(j).derive(ctx)
        else:
            branches[4] += 1
            followers = []
            for j in a.back:
                if j == i:
                    followers.append((i, ctx.normalize(self.template)))
                else:
                    followers.append((j, self.follower(j).derive(ctx)))
            out = ctx.make_seq(a, self.template, tuple(followers), self.template_nu)
        memo[key] = out
        return out

    def __repr__(self) -> str:
        fol = ", ".join(f"{j}: {f!r}" for j, f in self.followers)
        return f"SeqNode({self.first!r}, {self.template!r}, [{fol}])"


class AltNode(Node):
    """Ordered choice.

    ``charset`` is set on choices built purely from byte literals; their
    derivative is then a set lookup rather than a walk down the chain
    (same result: the first matching byte wins, otherwise failure).
    """

    __slots__ = ("first", "second", "charset")

    def __init__(self, first: Node, second: Node):
        self.id = next(_ids)
        self.first = first
        self.second = second
        self.back = _union(first.back, second.back)
        # certain to finish where ``first`` is certain to; ``second`` only
        # runs if ``first`` fails, which is never certain in advance
        self.match = first.match
        self.sure = first.sure or second.sure
        self.charset: Optional[frozenset[int]] = None
        a, b = type(first), type(second)
        if (a is CharNode or (a is AltNode and first.charset is not None)) and \
                (b is CharNode or (b is AltNode and second.charset is not None)):
            left = frozenset((first.c,)) if a is CharNode else first.charset  # type: ignore[attr-defined]
            right = frozenset((second.c,)) if b is CharNode else second.charset  # type: ignore[attr-defined]
            self.charset = left | right

    def children(self) -> tuple[Node, ...]:
        return (self.first, self.second)

    def derive(self, ctx: StepContext) -> Node:
        charset = self.charset
        if charset is not None:
            return ctx.empty if ctx.symbol in charset else FAIL_NODE
        memo = ctx.memo
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit
        a = self.first.derive(ctx)
        if a is FAIL_NODE:
            out = self.second.derive(ctx)
        elif a.sure:
            out = a
        else:
            b = self.second.derive(ctx)
            out = a if b is FAIL_NODE else ctx.make_alt(a, b)
        memo[key] = out
        return out

    def __repr__(self) -> str:
        return f"AltNode({self.first!r}, {self.second!r})"


NormNode = Node


def _all_occurrences(g: Grammar) -> list[SurfaceExpr]:
    # distinct objects, children first; structurally equal copies are kept
    # apart because the engine keys its tables by object identity
    seen: set[int] = set()
    out: list[SurfaceExpr] = []
    for body in g.bodies():
        for e in reversed(list(walk(body))):
            if id(e) not in seen:
                seen.add(id(e))
                out.append(e)
    return out


class Engine:
    """Per-grammar state shared by recognition sessions.

    The grammar is expected to be simplified and well-formed (what
    :func:`sped.grammar.parse_grammar` and the ``check`` command ensure).
    Branch counters for the sequence derivative accumulate across
    sessions in ``seq_branches``.
    """

    def __init__(self, grammar: Grammar, *, hash_cons: bool = False):
        self.grammar = grammar
        self.rules = grammar.rules
        self.hash_cons = hash_cons
        nt = compute_nullability(grammar)
        self._nt: Optional[NullabilityTable] = nt
        self._keep: list[SurfaceExpr] = []
        self._follow: dict[int, bool] = {}
        self._template_nu: dict[int, bool] = {}
        for e in _all_occurrences(grammar):
            if isinstance(e, Seq):
                self._keep.append(e)
                self._follow[id(e)] = self.needs_follower(e, nt.lam_of)
                self._template_nu[id(e)] = nt.nu_of(e.second)
        self._chars = [CharNode(c) for c in range(256)]
        self._static = self._index_free_exprs(nt)
        self.static_nodes: dict[int, Node] = {}
        # ids of nodes that live as long as the engine, with the node ids
        # reachable from each (for cheap live-node counts)
        self._pinned: dict[int, Optional[frozenset[int]]] = {id(c): None for c in self._chars}
        self._pinned[id(FAIL_NODE)] = None
        self._pinned_nodes: dict[int, Node] = {id(c): c for c in self._chars}
        self._pinned_nodes[id(FAIL_NODE)] = FAIL_NODE
        self._union_counts: dict[frozenset[int], int] = {}
        self.seq_branches = [0] * len(SEQ_BRANCHES)

    def needs_follower(self, e: Seq, lam: Callable[[SurfaceExpr], bool]) -> bool:
        """Whether normalizing ``e`` creates a follower at the current index.

        That is exactly when the first component may stop without consuming,
        which keeps follower indices equal to ``back`` of the first node.
        """
        return lam(e.first)

    def _index_free_exprs(self, nt: NullabilityTable) -> set[int]:
        """ids of grammar expressions whose normal form carries no index.

        Those normalize to the same node at every step, so one instance is
        built and shared for the lifetime of the engine.
        """
        exprs = _all_occurrences(self.grammar)
        dep = {id(e): False for e in exprs}
        rules = self.rules
        changed = True
        while changed:
            changed = False
            for e in exprs:
                if dep[id(e)]:
                    continue
                t = type(e)
                if t is Empty or t is Not:
                    now = True
                elif t is Nonterm:
                    now = dep[id(rules[e.name])]  # type: ignore[attr-defined]
                elif t is Seq:
                    now = self._follow[id(e)] or dep[id(e.first)]  # type: ignore[attr-defined]
                elif t is Alt:
                    now = dep[id(e.first)] or dep[id(e.second)]  # type: ignore[attr-defined]
                else:
                    now = False
                if now:
                    dep[id(e)] = True
                    changed = True
        self._keep.extend(exprs)
        return {k for k, v in dep.items() if not v}

    def _pin(self, node: Node) -> None:
        self._pinned[id(node)] = None
        self._pinned_nodes[id(node)] = node

    def _pinned_count(self, roots: frozenset[int]) -> int:
        count = self._union_counts.get(roots)
        if count is not None:
            return count
        reach: set[int] = set()
        for r in roots:
            closure = self._pinned[r]
            if closure is None:
                closure = self._pinned[r] = frozenset(id(x) for x in iter_dag(self._pinned_nodes[r]))
            reach |= closure
        if len(self._union_counts) > 100_000:
            self._union_counts.clear()
        count = self._union_counts[roots] = len(reach)
        return count

    def live_stats(self, root: Node) -> tuple[int, int]:
        """``(nodes, widest follower list)`` of the DAG under ``root``.

        Same numbers as :func:`dag_stats`, but engine-lifetime subgraphs
        (shared normal forms, byte literals) are counted from cached
        reachability sets instead of being walked every step.
        """
        pinned = self._pinned
        seen: set[int] = set()
        add = seen.add
        roots = []
        widest = 0
        stack = [root]
        pop, push = stack.pop, stack.append
        while stack:
            node = pop()
            key = id(node)
            if key in seen:
                continue
            add(key)
            if key in pinned:
                roots.append(key)
                continue
            t = type(node)
            if t is SeqNode:
                push(node.first)  # type: ignore[attr-defined]
                fol = node.followers  # type: ignore[attr-defined]
                if len(fol) > widest:
                    widest = len(fol)
                for _, f in fol:
                    push(f)
            elif t is AltNode:
                push(node.first)  # type: ignore[attr-defined]
                push(node.second)  # type: ignore[attr-defined]
            elif t is NotAt:
                push(node.child)  # type: ignore[attr-defined]
        if not roots:
            return len(seen), widest
        return len(seen) - len(roots) + self._pinned_count(frozenset(roots)), widest

    def follower_for_foreign(self, e: Seq) -> bool:
        # expressions built outside the grammar (tests, tools); pin them so
        # their id() keys stay valid
        if self._nt is None:
            self._nt = compute_nullability(self.grammar)
        self._keep.append(e)
        self._template_nu[id(e)] = self._nt.nu_of(e.second)
        follow = self._follow[id(e)] = self.needs_follower(e, self._nt.lam_of)
        return follow

    def context(self, index: int, symbol: int = EOS) -> StepContext:
        return StepContext(self, index, symbol)

    def normalize(self, e: SurfaceExpr, i: int, ctx: StepContext | None = None) -> Node:
        ctx = ctx or self.context(i)
        if ctx.index != i:
            raise ValueError("context index does not match normalization index")
        return ctx.normalize(e)

    def session(self, *, stats: bool = False,
                on_step: Callable[[StepRecord], None] | None = None,
                keep_trail: bool = False) -> Session:
        return Session(self, stats=stats, on_step=on_step, keep_trail=keep_trail)

    def recognize(self, data: Union[bytes, bytearray, Iterable[bytes], BinaryIO], *,
                  stats: bool = False,
                  on_step: Callable[[StepRecord], None] | None = None,
                  keep_trail: bool = False) -> RecognitionOutcome:
        """Recognize a byte string, a binary file object or an iterable of chunks.

        ``stats`` tracks the peak live node count; ``on_step`` receives one
        :class:`StepRecord` per step and ``keep_trail`` collects them in the
        outcome.
        """
        sess = self.session(stats=stats, on_step=on_step, keep_trail=keep_trail)
        if isinstance(data, (bytes, bytearray, memoryview)):
            sess.feed(data)
        elif hasattr(data, "read"):
            for chunk in iter(lambda: data.read(1 << 16), b""):  # type: ignore[union-attr]
                if sess.done:
                    break
                sess.feed(chunk)
        else:
            for chunk in data:
                if sess.done:
                    break
                sess.feed(chunk)
        return sess.finish()


class StepContext:
    """Memo tables for one derivative step at ``index`` with ``symbol``."""

    __slots__ = ("engine", "index", "symbol", "memo", "norm_cache", "empty",
                 "seq_branches", "intern", "rules", "follow", "template_nu", "chars", "static",
                 "static_nodes")

    def __init__(self, engine: Engine, index: int, symbol: int):
        self.engine = engine
        self.index = index
        self.symbol = symbol
        self.memo: dict[int, Node] = {}
        self.norm_cache: dict[int, Node] = {}
        self.seq_branches = engine.seq_branches
        self.intern: dict | None = {} if engine.hash_cons else None
        self.rules = engine.rules
        self.follow = engine._follow
        self.template_nu = engine._template_nu
        self.chars = engine._chars
        self.static = engine._static
        self.static_nodes = engine.static_nodes
        self.empty = self.make_empty(index)

    def advance(self, index: int, symbol: int) -> None:
        """Start a fresh step, reusing this context's tables."""
        self.index = index
        self.symbol = symbol
        self.memo.clear()
        self.norm_cache.clear()
        if self.intern is not None:
            self.intern.clear()
        self.empty = self.make_empty(index)

    def release(self) -> None:
        # drop references so the previous DAG can be freed
        self.memo.clear()
        self.norm_cache.clear()
        if self.intern is not None:
            self.intern.clear()

    # node constructors; with hash-consing, structurally equal nodes built
    # within one step are shared
    def make_empty(self, j: int) -> Node:
        if self.intern is None:
            return EmptyAt(j)
        key = ("e", j)
        node = self.intern.get(key)
        if node is None:
            node = self.intern[key] = EmptyAt(j)
        return node

    def make_not(self, j: int, child: Node) -> Node:
        if self.intern is None:
            return NotAt(j, child)
        key = ("!", j, id(child))
        node = self.intern.get(key)
        if node is None:
            node = self.intern[key] = NotAt(j, child)
        return node

    def make_seq(self, first: Node, template: SurfaceExpr, followers: tuple,
                 template_nu: bool) -> Node:
        if self.intern is None:
            return SeqNode(first, template, followers, template_nu)
        key = ("s", id(first), id(template), tuple((j, id(f)) for j, f in followers))
        node = self.intern.get(key)
        if node is None:
            node = self.intern[key] = SeqNode(first, template, followers, template_nu)
        return node

    def make_alt(self, first: Node, second: Node) -> Node:
        if self.intern is None:
            return AltNode(first, second)
        key = ("/", id(first), id(second))
        node = self.intern.get(key)
        if node is None:
            node = self.intern[key] = AltNode(first, second)
        return node

    def normalize(self, e: SurfaceExpr) -> Node:
        key = id(e)
        hit = self.static_nodes.get(key)
        if hit is not None:
            return hit
        hit = self.norm_cache.get(key)
        if hit is not None:
            return hit
        if key in self.static:
            hit = self.static_nodes[key] = self._build(e, key)
            self.engine._pin(hit)
            return hit
        out = self._build(e, key)
        self.norm_cache[key] = out
        return out

    def _build(self, e: SurfaceExpr, key: int) -> Node:
        t = type(e)
        if t is CharLit:
            out = self.chars[e.c]  # type: ignore[attr-defined]
        elif t is Seq:
            first = self.normalize(e.first)  # type: ignore[attr-defined]
            follow = self.follow.get(key)
            if follow is None:
                follow = self.engine.follower_for_foreign(e)  # type: ignore[arg-type]
            nu = self.template_nu[key]
            if follow:
                out = self.make_seq(first, e.second,  # type: ignore[attr-defined]
                                    ((self.index, self.normalize(e.second)),), nu)  # type: ignore[attr-defined]
            else:
                out = self.make_seq(first, e.second, (), nu)  # type: ignore[attr-defined]
        elif t is Nonterm:
            out = self.normalize(self.rules[e.name])  # type: ignore[attr-defined]
        elif t is Alt:
            out = self.make_alt(self.normalize(e.first), self.normalize(e.second))  # type: ignore[attr-defined]
        elif t is Empty:
            out = self.empty
        elif t is Not:
            out = self.make_not(self.index, self.normalize(e.child))  # type: ignore[attr-defined]
        elif t is Fail:
            out = FAIL_NODE
        else:
            raise TypeError(f"not a surface expression: {e!r}")
        return out


@dataclass
class StepRecord:
    step: int
    symbol: Union[int, str]
    nodes_created: int
    live_nodes: Optional[int]
    max_followers: Optional[int]
    outcome: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "symbol": self.symbol,
            "nodes_created": self.nodes_created,
            "live_nodes": self.live_nodes,
            "max_followers": self.max_followers,
            "outcome": self.outcome,
        }


@dataclass
class RecognitionOutcome:
    """``consumed_through`` is ``j`` for a match (bytes ``1..j``), ``None`` on failure."""

    consumed_through: Optional[int]
    input_length: int
    steps: int
    peak_live_nodes: Optional[int] = None
    trail: list[StepRecord] = field(default_factory=list)

    @property
    def matched(self) -> bool:
        return self.consumed_through is not None

    @property
    def verdict(self) -> str:
        return "match" if self.matched else "fail"


class Session:
    """One streaming recognition: feed bytes, then :meth:`finish`.

    Memory use is the size of the current DAG; input is never buffered.
    Stops deriving as soon as the expression resolves to a match or a
    failure, since later steps cannot change either.
    """

    def __init__(self, engine: Engine, *, stats: bool = False,
                 on_step: Callable[[StepRecord], None] | None = None,
                 keep_trail: bool = False):
        self.engine = engine
        self.stats = stats or on_step is not None or keep_trail
        self.on_step = on_step
        self.position = 0
        self.steps = 0
        self.peak_live = 0
        self.trail: list[StepRecord] = []
        self.keep_trail = keep_trail
        self._ctx = engine.context(0)
        self.node = self._ctx.normalize(engine.grammar.start)
        self._ctx.release()
        # not resolved yet even if already EmptyAt/Fail: the first step keeps
        # it (derivatives preserve both) and gives the trace its final record
        self.outcome: Optional[str] = None
        if self.stats:
            self.peak_live = engine.live_stats(self.node)[0]

    @property
    def done(self) -> bool:
        return self.outcome is not None

    def _resolve(self) -> None:
        if type(self.node) is EmptyAt:
            self.outcome = "match"
        elif self.node is FAIL_NODE:
            self.outcome = "fail"

    def _step(self, symbol: int, index: int) -> None:
        before = next(_ids)
        ctx = self._ctx
        ctx.advance(index, symbol)
        self.node = self.node.derive(ctx)
        ctx.release()
        self.steps += 1
        self._resolve()
        if self.stats:
            created = next(_ids) - before - 1
            live, widest = self.engine.live_stats(self.node)
            if live > self.peak_live:
                self.peak_live = live
            if self.keep_trail or self.on_step is not None:
                rec = StepRecord(self.steps, "#" if symbol == EOS else symbol, created,
                                 live, widest, self.outcome)
                if self.keep_trail:
                    self.trail.append(rec)
                if self.on_step is not None:
                    self.on_step(rec)

    def feed(self, data: Union[bytes, bytearray, memoryview]) -> None:
        if self.outcome is not None:
            self.position += len(data)
            return
        for byte in data:
            self.position += 1
            if self.outcome is None:
                self._step(byte, self.position)

    def finish(self) -> RecognitionOutcome:
        if self.outcome is None:
            self._step(EOS, self.position)
        if self.outcome is None:
            raise EngineInvariantError(f"end-of-string step left {self.node!r}")
        through = self.node.j if self.outcome == "match" else None  # type: ignore[attr-defined]
        return RecognitionOutcome(through, self.position, self.steps,
                                  self.peak_live if self.stats else None, self.trail)


def recognize(g: Grammar, data: Union[bytes, Iterable[bytes], BinaryIO], *,
              hash_cons: bool = False, stats: bool = False,
              on_step: Callable[[StepRecord], None] | None = None,
              keep_trail: bool = False) -> RecognitionOutcome:
    """Recognize ``data`` against ``g`` (simplified and well-formed)."""
    return Engine(g, hash_cons=hash_cons).recognize(data, stats=stats, on_step=on_step,
                                                    keep_trail=keep_trail)


def derive_step(n: Node, ctx: StepContext) -> Node:
    """One derivative of ``n`` by ``ctx.symbol`` at ``ctx.index``.

    Calls sharing ``ctx`` share its memo table, so a node reached twice is
    derived once; use a fresh context (``engine.context``) per step.
    """
    return n.derive(ctx)


def back(n: Node) -> IndexSet:
    return n.back


def match_set(n: Node) -> IndexSet:
    return n.match


def surely_matches(n: Node) -> bool:
    return n.sure


def iter_dag(n: Node) -> Iterator[Node]:
    """Every distinct node reachable from ``n`` (identity-aware)."""
    seen = {id(n)}
    stack = [n]
    while stack:
        node = stack.pop()
        yield node
        for child in node.children():
            if id(child) not in seen:
                seen.add(id(child))
                stack.append(child)


def check_normalized(n: Node, k: int) -> bool:
    """All index annotations are ``<= k`` and every sequence node's follower
    indices equal ``back`` of its first component."""
    for node in iter_dag(n):
        t = type(node)
        if t is EmptyAt or t is NotAt:
            if node.j > k:  # type: ignore[attr-defined]
                return False
        elif t is SeqNode:
            idx = tuple(j for j, _ in node.followers)  # type: ignore[attr-defined]
            if any(j > k for j in idx):
                return False
            if idx != node.first.back:  # type: ignore[attr-defined]
                return False
    return True


@dataclass
class DagStats:
    nodes: int
    by_variant: dict[str, int]
    max_followers: int
    depth: int


def dag_stats(n: Node) -> DagStats:
    """Node count, per-variant counts, widest follower list and depth of the DAG."""
    by_variant: dict[str, int] = {}
    max_followers = 0
    depth: dict[int, int] = {}
    stack: list[tuple[Node, bool]] = [(n, False)]
    while stack:
        node, expanded = stack.pop()
        key = id(node)
        if expanded:
            depth[key] = 1 + max((depth[id(c)] for c in node.children()), default=0)
            continue
        if key in depth:
            continue
        depth[key] = 0  # placeholder: visited
        name = type(node).__name__
        by_variant[name] = by_variant.get(name, 0) + 1
        if type(node) is SeqNode:
            max_followers = max(max_followers, len(node.followers))  # type: ignore[attr-defined]
        stack.append((node, True))
        stack.extend((c, False) for c in node.children() if id(c) not in depth)
    return DagStats(len(depth), by_variant, max_followers, depth[id(n)])
