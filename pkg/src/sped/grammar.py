"""Surface parsing expressions, grammars, and the textual grammar format.

The grammar file format::

    # comment
    %start Doc              # optional; default is the first rule
    Doc   <- Ws Value !Any
    Value <- "true" / "false" / [0-9]+
    Ws    <- [ \\t\\n]*
    Any   <- [\\x00-\\xff]

Primaries are ``'c'``/``"str"`` literals (``''`` is the empty expression),
``[class]`` with ``a-z`` ranges, ``FAIL``, a rule name, or a parenthesized
expression.  Postfix ``* + ?`` bind tightest, then prefix ``! &``, then
juxtaposition (sequence), then ``/`` (ordered choice).

Everything is desugared into the seven core forms: literals become
right-nested sequences of single bytes, classes right-nested choices,
``e*`` a fresh right-recursive rule ``R <- e R / ''``, ``e+`` is ``e e*``,
``e?`` is ``e / ''`` and ``&e`` is ``!!e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union


class SurfaceExpr:
    """Base class of the un-annotated expression forms.

    Instances are immutable and compare structurally; hashes are computed
    once at construction so deep trees can be used as dict keys cheaply.
    """

    __slots__ = ()

    def children(self) -> tuple[SurfaceExpr, ...]:
        return ()


def _cache_hash(obj: SurfaceExpr, key: tuple) -> None:
    object.__setattr__(obj, "_hash", hash(key))


@dataclass(frozen=True, eq=True)
class CharLit(SurfaceExpr):
    c: int

    def __post_init__(self) -> None:
        if not 0 <= self.c <= 255:
            raise ValueError(f"character literal out of byte range: {self.c}")
        _cache_hash(self, ("c", self.c))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]


@dataclass(frozen=True, eq=True)
class Empty(SurfaceExpr):
    def __post_init__(self) -> None:
        _cache_hash(self, ("e",))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]


@dataclass(frozen=True, eq=True)
class Fail(SurfaceExpr):
    def __post_init__(self) -> None:
        _cache_hash(self, ("f",))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]


@dataclass(frozen=True, eq=True)
class Nonterm(SurfaceExpr):
    name: str

    def __post_init__(self) -> None:
        _cache_hash(self, ("A", self.name))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]


@dataclass(frozen=True, eq=True)
class Not(SurfaceExpr):
    child: SurfaceExpr

    def __post_init__(self) -> None:
        _cache_hash(self, ("!", self.child))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def children(self) -> tuple[SurfaceExpr, ...]:
        return (self.child,)


@dataclass(frozen=True, eq=True)
class Seq(SurfaceExpr):
    first: SurfaceExpr
    second: SurfaceExpr

    def __post_init__(self) -> None:
        _cache_hash(self, ("s", self.first, self.second))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def children(self) -> tuple[SurfaceExpr, ...]:
        return (self.first, self.second)


@dataclass(frozen=True, eq=True)
class Alt(SurfaceExpr):
    first: SurfaceExpr
    second: SurfaceExpr

    def __post_init__(self) -> None:
        _cache_hash(self, ("/", self.first, self.second))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def children(self) -> tuple[SurfaceExpr, ...]:
        return (self.first, self.second)


EMPTY = Empty()
FAIL = Fail()


def seq(*items: SurfaceExpr) -> SurfaceExpr:
    """Right-nested sequence; ``seq()`` is the empty expression."""
    if not items:
        return EMPTY
    out = items[-1]
    for item in reversed(items[:-1]):
        out = Seq(item, out)
    return out


def alt(*items: SurfaceExpr) -> SurfaceExpr:
    """Right-nested ordered choice; ``alt()`` is the failure expression."""
    if not items:
        return FAIL
    out = items[-1]
    for item in reversed(items[:-1]):
        out = Alt(item, out)
    return out


def lit(text: Union[str, bytes]) -> SurfaceExpr:
    data = text.encode("latin-1") if isinstance(text, str) else text
    return seq(*(CharLit(b) for b in data))


def walk(e: SurfaceExpr) -> Iterator[SurfaceExpr]:
    """Pre-order traversal of one expression tree (does not follow rules)."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def size(e: SurfaceExpr) -> int:
    return sum(1 for _ in walk(e))


@dataclass(frozen=True)
class Grammar:
    """Rule map plus start expression.

    ``start_name`` is the rule the start expression came from; it is kept
    separately because simplification may rewrite ``start`` itself (for
    instance to ``FAIL`` when the start rule can never match).
    """

    rules: Mapping[str, SurfaceExpr]
    start: SurfaceExpr
    start_name: str = ""
    generated: frozenset[str] = field(default=frozenset())

    def rule(self, name: str) -> SurfaceExpr:
        return self.rules[name]

    def bodies(self) -> list[SurfaceExpr]:
        return [self.start, *self.rules.values()]

    def undefined_names(self) -> set[str]:
        missing = set()
        for body in self.bodies():
            for node in walk(body):
                if isinstance(node, Nonterm) and node.name not in self.rules:
                    missing.add(node.name)
        return missing

    def with_rules(self, rules: Mapping[str, SurfaceExpr], start: SurfaceExpr) -> Grammar:
        return Grammar(dict(rules), start, self.start_name, self.generated)


class GrammarError(Exception):
    """Grammar text could not be loaded."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)


# --------------------------------------------------------------------------
# Loader

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow><-)
  | (?P<directive>%[A-Za-z_]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<dq>"(?:[^"\\\n]|\\.)*")
  | (?P<sq>'(?:[^'\\\n]|\\.)*')
  | (?P<cls>\[(?:[^\]\\\n]|\\.)*\])
  | (?P<op>[/!&*+?()])
    """,
    re.VERBOSE,
)

_SIMPLE_ESCAPES = {"\\": 0x5C, "'": 0x27, '"': 0x22, "]": 0x5D, "[": 0x5B,
                   "-": 0x2D, "n": 0x0A, "r": 0x0D, "t": 0x09}


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise GrammarError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        assert kind is not None
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unescape(body: str, tok: _Token) -> list[int]:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body):
                raise GrammarError("dangling escape", tok.line, tok.column)
            nxt = body[i + 1]
            if nxt == "x":
                hexdigits = body[i + 2:i + 4]
                if not re.fullmatch(r"[0-9A-Fa-f]{2}", hexdigits):
                    raise GrammarError("\\x needs two hex digits", tok.line, tok.column)
                out.append(int(hexdigits, 16))
                i += 4
                continue
            if nxt not in _SIMPLE_ESCAPES:
                raise GrammarError(f"unknown escape \\{nxt}", tok.line, tok.column)
            out.append(_SIMPLE_ESCAPES[nxt])
            i += 2
            continue
        if ord(ch) > 127:
            raise GrammarError(
                f"non-ASCII character {ch!r} in literal; write bytes as \\xHH",
                tok.line, tok.column)
        out.append(ord(ch))
        i += 1
    return out


def _class_bytes(tok: _Token) -> list[int]:
    # keep escapes paired with a flag so an escaped '-' is never a range
    body = tok.text[1:-1]
    items: list[tuple[int, bool]] = []
    i = 0
    while i < len(body):
        if body[i] == "\\":
            step = 4 if body[i + 1:i + 2] == "x" else 2
            items.extend((b, True) for b in _unescape(body[i:i + step], tok))
            i += step
        else:
            items.extend((b, False) for b in _unescape(body[i], tok))
            i += 1
    out: list[int] = []
    k = 0
    while k < len(items):
        lo, _ = items[k]
        if k + 2 < len(items) and items[k + 1] == (0x2D, False):
            hi, _ = items[k + 2]
            if hi < lo:
                raise GrammarError(f"empty range {chr(lo)}-{chr(hi)}", tok.line, tok.column)
            out.extend(range(lo, hi + 1))
            k += 3
        else:
            out.append(lo)
            k += 1
    seen: set[int] = set()
    return [b for b in out if not (b in seen or seen.add(b))]


class _Loader:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.taken = {t.text for t in self.tokens if t.kind == "ident"}
        self.extra_rules: dict[str, SurfaceExpr] = {}

    def peek(self, offset: int = 0) -> _Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> GrammarError:
        tok = tok or self.peek()
        return GrammarError(message, tok.line, tok.column)

    def at_rule_start(self) -> bool:
        return self.peek().kind == "ident" and self.peek(1).kind == "arrow"

    def load(self) -> tuple[dict[str, SurfaceExpr], str | None, list[tuple[str, _Token]]]:
        rules: dict[str, SurfaceExpr] = {}
        start: str | None = None
        refs: list[tuple[str, _Token]] = []
        self.refs = refs
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "directive":
                self.take()
                if tok.text != "%start":
                    raise self.error(f"unknown directive {tok.text}", tok)
                name = self.take()
                if name.kind != "ident":
                    raise self.error("%start needs a rule name", name)
                start = name.text
                refs.append((name.text, name))
                continue
            if not self.at_rule_start():
                raise self.error("expected a rule 'Name <- expression'")
            name = self.take()
            self.take()
            if name.text == "FAIL":
                raise self.error("FAIL is reserved", name)
            if name.text in rules:
                raise self.error(f"duplicate rule {name.text}", name)
            rules[name.text] = self.expression()
        if not rules:
            raise GrammarError("grammar has no rules", 1, 1)
        return rules, start, refs

    def expression(self) -> SurfaceExpr:
        items = [self.sequence()]
        while self.peek().text == "/" and self.peek().kind == "op":
            self.take()
            items.append(self.sequence())
        return alt(*items)

    def sequence(self) -> SurfaceExpr:
        items = []
        while True:
            tok = self.peek()
            if tok.kind == "eof" or tok.kind == "directive" or self.at_rule_start():
                break
            if tok.kind == "op" and tok.text in "/)":
                break
            items.append(self.prefixed())
        if not items:
            raise self.error("empty sequence; write '' for the empty expression")
        return seq(*items)

    def prefixed(self) -> SurfaceExpr:
        tok = self.peek()
        if tok.kind == "op" and tok.text in "!&":
            self.take()
            inner = self.prefixed()
            return Not(inner) if tok.text == "!" else Not(Not(inner))
        return self.postfixed()

    def postfixed(self) -> SurfaceExpr:
        e = self.primary()
        while self.peek().kind == "op" and self.peek().text in "*+?":
            op = self.take().text
            if op == "?":
                e = Alt(e, EMPTY)
            else:
                name, rule = desugar_star(e, self.taken)
                self.extra_rules[name] = rule
                star = Nonterm(name)
                e = star if op == "*" else Seq(e, star)
        return e

    def primary(self) -> SurfaceExpr:
        tok = self.take()
        if tok.kind == "ident":
            if tok.text == "FAIL":
                return FAIL
            self.refs.append((tok.text, tok))
            return Nonterm(tok.text)
        if tok.kind in ("sq", "dq"):
            return seq(*(CharLit(b) for b in _unescape(tok.text[1:-1], tok)))
        if tok.kind == "cls":
            return alt(*(CharLit(b) for b in _class_bytes(tok)))
        if tok.kind == "op" and tok.text == "(":
            e = self.expression()
            close = self.take()
            if close.text != ")":
                raise self.error("expected ')'", close)
            return e
        raise self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def desugar_star(body: SurfaceExpr, taken: set[str]) -> tuple[str, SurfaceExpr]:
    """Desugar ``body*`` into a fresh rule ``R <- body R / ''``.

    Picks the first ``R<n>`` not in ``taken`` (which is updated) and returns
    the name with the rule body; the occurrence becomes ``Nonterm(name)``.
    """
    n = 0
    while f"R{n}" in taken:
        n += 1
    name = f"R{n}"
    taken.add(name)
    return name, Alt(Seq(body, Nonterm(name)), EMPTY)


def parse_grammar(text: str, *, simplify: bool = True) -> Grammar:
    """Load grammar text; desugar it and (by default) simplify to a fixed point.

    Raises :class:`GrammarError` with a line/column position on syntax
    errors, duplicate rules and undefined rule names.
    """
    loader = _Loader(text)
    rules, start, refs = loader.load()
    for name, tok in refs:
        if name not in rules:
            raise GrammarError(f"undefined rule {name}", tok.line, tok.column)
    start_name = start if start is not None else next(iter(rules))
    all_rules = dict(rules)
    all_rules.update(loader.extra_rules)
    g = Grammar(all_rules, Nonterm(start_name), start_name, frozenset(loader.extra_rules))
    if simplify:
        from .analysis import simplify_grammar

        g = simplify_grammar(g)
    return g


def load_grammar(path: str, *, simplify: bool = True) -> Grammar:
    with open(path, encoding="utf-8") as fh:
        return parse_grammar(fh.read(), simplify=simplify)


# --------------------------------------------------------------------------
# Canonical printer

def _char_repr(c: int) -> str:
    if c == 0x27:
        return "'\\''"
    if c == 0x5C:
        return "'\\\\'"
    if 0x20 <= c < 0x7F:
        return f"'{chr(c)}'"
    named = {0x0A: "\\n", 0x0D: "\\r", 0x09: "\\t"}
    body = named.get(c) or "\\x%02x" % c
    return f"'{body}'"


def _spine(e: SurfaceExpr, cls: type) -> list[SurfaceExpr]:
    items = []
    while isinstance(e, cls):
        items.append(e.first)  # type: ignore[attr-defined]
        e = e.second  # type: ignore[attr-defined]
    items.append(e)
    return items


def format_expr(e: SurfaceExpr) -> str:
    """Render in the grammar syntax; reparses to the same structure.

    Every sequence and choice is parenthesized, but a right-nested chain
    prints as one group (``('a' 'b' 'c')``), which the loader reads back
    with the same right association.
    """
    if isinstance(e, CharLit):
        return _char_repr(e.c)
    if isinstance(e, Empty):
        return "''"
    if isinstance(e, Fail):
        return "FAIL"
    if isinstance(e, Nonterm):
        return e.name
    if isinstance(e, Not):
        return f"!{format_expr(e.child)}"
    if isinstance(e, Seq):
        return "(" + " ".join(format_expr(x) for x in _spine(e, Seq)) + ")"
    if isinstance(e, Alt):
        return "(" + " / ".join(format_expr(x) for x in _spine(e, Alt)) + ")"
    raise TypeError(f"not a surface expression: {e!r}")


def format_grammar(g: Grammar) -> str:
    lines = [f"%start {g.start_name}"] if g.start_name else []
    lines.extend(f"{name} <- {format_expr(body)}" for name, body in g.rules.items())
    return "\n".join(lines) + "\n"
