"""Reference recursive-descent interpreter.

Positions are absolute offsets into the full input: ``Rest(p)`` means the
first ``p`` bytes have been consumed.  Annotated engine nodes are
interpreted too: ``EmptyAt(j)`` and a succeeding ``NotAt(j, a)`` leave the
input at ``j`` (possibly rewinding), and a sequence node ignores its
followers and behaves like its first component followed by its template.

Deliberately unmemoized.  Nonterminal expansions consume fuel; running out
yields :data:`FUEL_EXHAUSTED`, which callers must read as "no verdict".
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass
from typing import Callable, TypeVar, Union

from .engine import AltNode, CharNode, EmptyAt, FailNode, Node, NotAt, SeqNode
from .grammar import Alt, CharLit, Empty, Fail, Grammar, Nonterm, Not, Seq, SurfaceExpr

DEFAULT_FUEL = 1_000_000


@dataclass(frozen=True)
class Rest:
    position: int


@dataclass(frozen=True)
class Failure:
    pass


@dataclass(frozen=True)
class FuelExhausted:
    pass


FAILURE = Failure()
FUEL_EXHAUSTED = FuelExhausted()

OracleResult = Union[Rest, Failure, FuelExhausted]


class _OutOfFuel(Exception):
    pass


class _Interpreter:
    def __init__(self, g: Grammar, data: bytes, fuel: int):
        self.rules = g.rules
        self.data = data
        self.n = len(data)
        self.fuel = fuel

    # returns the new position or -1 for failure
    def run(self, e: Union[SurfaceExpr, Node], p: int) -> int:
        t = type(e)
        if t is CharLit or t is CharNode:
            return p + 1 if p < self.n and self.data[p] == e.c else -1  # type: ignore[union-attr]
        if t is Seq:
            q = self.run(e.first, p)  # type: ignore[union-attr]
            return -1 if q < 0 else self.run(e.second, q)  # type: ignore[union-attr]
        if t is Alt or t is AltNode:
            q = self.run(e.first, p)  # type: ignore[union-attr]
            return q if q >= 0 else self.run(e.second, p)  # type: ignore[union-attr]
        if t is Nonterm:
            self.fuel -= 1
            if self.fuel <= 0:
                raise _OutOfFuel
            return self.run(self.rules[e.name], p)  # type: ignore[union-attr]
        if t is Empty:
            return p
        if t is Fail or t is FailNode:
            return -1
        if t is Not:
            return p if self.run(e.child, p) < 0 else -1  # type: ignore[union-attr]
        if t is EmptyAt:
            return e.j  # type: ignore[union-attr]
        if t is NotAt:
            return e.j if self.run(e.child, p) < 0 else -1  # type: ignore[union-attr]
        if t is SeqNode:
            q = self.run(e.first, p)  # type: ignore[union-attr]
            return -1 if q < 0 else self.run(e.template, q)  # type: ignore[union-attr]
        raise TypeError(f"cannot interpret {e!r}")


def interpret(e: Union[SurfaceExpr, Node], g: Grammar, data: bytes, pos: int = 0,
              fuel: int = DEFAULT_FUEL) -> OracleResult:
    """Evaluate ``e`` on ``data`` starting at absolute position ``pos``."""
    if not 0 <= pos <= len(data):
        raise ValueError(f"position {pos} outside input of length {len(data)}")
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    it = _Interpreter(g, bytes(data), fuel)
    try:
        q = it.run(e, pos)
    except _OutOfFuel:
        return FUEL_EXHAUSTED
    except RecursionError:
        # unbounded descent on left-recursive input before fuel ran out
        return FUEL_EXHAUSTED
    return FAILURE if q < 0 else Rest(q)


def run_oracle(g: Grammar, data: bytes, fuel: int = DEFAULT_FUEL) -> OracleResult:
    return interpret(g.start, g, data, 0, fuel)


T = TypeVar("T")


def with_deep_stack(fn: Callable[..., T], *args, stack_mb: int = 512, limit: int = 1_000_000,
                    **kwargs) -> T:
    """Run ``fn`` in a thread with a large C stack and a raised recursion limit.

    Recursive descent over long inputs (and derivatives over deeply nested
    ones) recurse in proportion to the input; the default limits are far
    too small for that.
    """
    result: list = []
    error: list = []

    def target() -> None:
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, limit))
        try:
            result.append(fn(*args, **kwargs))
        except BaseException as exc:  # re-raised in the caller
            error.append(exc)
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size()
    threading.stack_size(stack_mb * 1024 * 1024)
    try:
        worker = threading.Thread(target=target)
        worker.start()
        worker.join()
    finally:
        threading.stack_size(old_size)
    if error:
        raise error[0]
    return result[0]
