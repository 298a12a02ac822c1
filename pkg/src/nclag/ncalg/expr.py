"""Expression DAG over a free skew field.

Expressions are built from variables, integer constants, sums, ordered
products, negation and inverse.  No commutativity is assumed anywhere:
``mul(a, b)`` and ``mul(b, a)`` are distinct nodes.  Nodes are interned,
so structurally identical subtrees are the same object; this keeps
repeated subexpressions cheap and makes equality a pointer comparison.

No rewriting is done beyond flattening nested sums/products into n-ary
nodes.  Correctness of every identity claimed elsewhere in this package
rests on evaluation over matrix samples, not on symbolic simplification.
"""

from __future__ import annotations

from typing import Iterable, Iterator


class NcExpr:
    """Immutable node of an expression DAG.

    ``kind`` is one of ``"var"``, ``"int"``, ``"add"``, ``"mul"``,
    ``"neg"``, ``"inv"``.  ``payload`` holds the variable name or the
    integer value; ``children`` holds operand nodes in order.
    """

    __slots__ = ("kind", "payload", "children", "_key")

    def __init__(self, kind: str, payload, children: tuple) -> None:
        self.kind = kind
        self.payload = payload
        self.children = children
        self._key = (kind, payload, tuple(id(c) for c in children))

    def __repr__(self) -> str:
        return f"NcExpr({to_str(self)!r})"

    def __hash__(self) -> int:
        return hash(self._key)

    def __eq__(self, other) -> bool:
        return self is other

    # Operator sugar.  Subtraction means a + (-b); there is no division,
    # use inv() and order the factors yourself.
    def __add__(self, other: "NcExpr") -> "NcExpr":
        return add(self, other)

    def __sub__(self, other: "NcExpr") -> "NcExpr":
        return add(self, neg(other))

    def __mul__(self, other: "NcExpr") -> "NcExpr":
        return mul(self, other)

    def __neg__(self) -> "NcExpr":
        return neg(self)


_INTERN: dict[tuple, NcExpr] = {}


def _node(kind: str, payload, children: tuple = ()) -> NcExpr:
    key = (kind, payload, tuple(id(c) for c in children))
    node = _INTERN.get(key)
    if node is None:
        node = NcExpr(kind, payload, children)
        _INTERN[key] = node
    return node


def var(name: str) -> NcExpr:
    if not name or not (name[0].isalpha() and name[0].islower()):
        raise ValueError(f"variable names match [a-z][a-z0-9_]*, got {name!r}")
    return _node("var", name)


def lit(n: int) -> NcExpr:
    return _node("int", int(n))


ZERO = lit(0)
ONE = lit(1)
MINUS_ONE = lit(-1)


def add(*terms: NcExpr) -> NcExpr:
    flat: list[NcExpr] = []
    for t in terms:
        if t.kind == "add":
            flat.extend(t.children)
        else:
            flat.append(t)
    if len(flat) == 1:
        return flat[0]
    return _node("add", None, tuple(flat))


def mul(*factors: NcExpr) -> NcExpr:
    flat: list[NcExpr] = []
    for f in factors:
        if f.kind == "mul":
            flat.extend(f.children)
        else:
            flat.append(f)
    if len(flat) == 1:
        return flat[0]
    return _node("mul", None, tuple(flat))


def neg(e: NcExpr) -> NcExpr:
    return _node("neg", None, (e,))


def inv(e: NcExpr) -> NcExpr:
    return _node("inv", None, (e,))


def variables(e: NcExpr) -> frozenset[str]:
    """All variable names occurring in the DAG below ``e``."""
    seen: set[int] = set()
    out: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node.kind == "var":
            out.add(node.payload)
        else:
            stack.extend(node.children)
    return frozenset(out)


def count_occurrences(e: NcExpr, name: str) -> int:
    """Number of occurrences of variable ``name``, counted with
    multiplicity through shared subtrees (a subtree used twice counts
    its occurrences twice)."""
    memo: dict[int, int] = {}

    def go(node: NcExpr) -> int:
        k = memo.get(id(node))
        if k is not None:
            return k
        if node.kind == "var":
            k = 1 if node.payload == name else 0
        else:
            k = sum(go(c) for c in node.children)
        memo[id(node)] = k
        return k

    return go(e)


def substitute(e: NcExpr, mapping: dict[str, NcExpr]) -> NcExpr:
    """Replace variables by expressions, simultaneously."""
    memo: dict[int, NcExpr] = {}

    def go(node: NcExpr) -> NcExpr:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if node.kind == "var":
            out = mapping.get(node.payload, node)
        elif node.kind == "int":
            out = node
        else:
            kids = tuple(go(c) for c in node.children)
            if node.kind == "add":
                out = add(*kids)
            elif node.kind == "mul":
                out = mul(*kids)
            elif node.kind == "neg":
                out = neg(kids[0])
            else:
                out = inv(kids[0])
        memo[id(node)] = out
        return out

    return go(e)


def to_str(e: NcExpr) -> str:
    """Render in the CLI textual syntax: ``+ - * ^-1`` and parentheses."""
    if e.kind == "var":
        return e.payload
    if e.kind == "int":
        return str(e.payload)
    if e.kind == "add":
        parts = []
        for i, c in enumerate(e.children):
            if c.kind == "neg":
                parts.append(("- " if i else "-") + _atom(c.children[0]))
            else:
                parts.append(("+ " if i else "") + _atom(c))
        return " ".join(parts)
    if e.kind == "mul":
        return " * ".join(_atom(c) for c in e.children)
    if e.kind == "neg":
        return "-" + _atom(e.children[0])
    return _atom(e.children[0]) + "^-1"


def _atom(e: NcExpr) -> str:
    if e.kind in ("var", "int") and not (e.kind == "int" and e.payload < 0):
        return to_str(e)
    if e.kind == "inv":
        return _atom(e.children[0]) + "^-1"
    return "(" + to_str(e) + ")"


def serialize(e: NcExpr) -> tuple:
    """Hashable structural form, for canonical comparisons."""
    memo: dict[int, tuple] = {}

    def go(node: NcExpr) -> tuple:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if node.kind in ("var", "int"):
            out = (node.kind, node.payload)
        else:
            out = (node.kind,) + tuple(go(c) for c in node.children)
        memo[id(node)] = out
        return out

    return go(e)


# --- parser ----------------------------------------------------------------
#
# expr    := term (("+"|"-") term)*
# term    := ("-")* factor ("*"? factor)*     (juxtaposition multiplies)
# factor  := atom ("^-1")*
# atom    := variable | integer | "(" expr ")"


class ParseError(ValueError):
    pass


def _tokenize(s: str) -> list[str]:
    toks: list[str] = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch.isspace():
            i += 1
        elif ch in "+-*()":
            toks.append(ch)
            i += 1
        elif ch == "^":
            if s[i : i + 3] != "^-1":
                raise ParseError(f"expected ^-1 at position {i}")
            toks.append("^-1")
            i += 3
        elif ch.isdigit():
            j = i
            while j < len(s) and s[j].isdigit():
                j += 1
            toks.append(s[i:j])
            i = j
        elif ch.isalpha() and ch.islower():
            j = i
            while j < len(s) and (s[j].isalnum() or s[j] == "_"):
                j += 1
            toks.append(s[i:j])
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r} at position {i}")
    return toks


def parse(s: str) -> NcExpr:
    """Parse the CLI expression syntax into an NcExpr."""
    toks = _tokenize(s)
    pos = 0

    def peek() -> str | None:
        return toks[pos] if pos < len(toks) else None

    def take() -> str:
        nonlocal pos
        tok = toks[pos]
        pos += 1
        return tok

    def parse_expr() -> NcExpr:
        terms = [parse_term()]
        while peek() in ("+", "-"):
            op = take()
            t = parse_term()
            terms.append(neg(t) if op == "-" else t)
        return add(*terms)

    def parse_term() -> NcExpr:
        negations = 0
        while peek() == "-":
            take()
            negations += 1
        factors = [parse_factor()]
        while True:
            nxt = peek()
            if nxt == "*":
                take()
                factors.append(parse_factor())
            elif nxt is not None and (nxt == "(" or nxt[0].isalnum()):
                factors.append(parse_factor())
            else:
                break
        out = mul(*factors)
        for _ in range(negations):
            out = neg(out)
        return out

    def parse_factor() -> NcExpr:
        out = parse_atom()
        while peek() == "^-1":
            take()
            out = inv(out)
        return out

    def parse_atom() -> NcExpr:
        tok = peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        if tok == "(":
            take()
            out = parse_expr()
            if peek() != ")":
                raise ParseError("unbalanced parenthesis")
            take()
            return out
        take()
        if tok[0].isdigit():
            return lit(int(tok))
        if tok[0].isalpha():
            return var(tok)
        raise ParseError(f"unexpected token {tok!r}")

    out = parse_expr()
    if pos != len(toks):
        raise ParseError(f"trailing input from token {toks[pos]!r}")
    return out


def prod(factors: Iterable[NcExpr]) -> NcExpr:
    fs = list(factors)
    if not fs:
        return ONE
    return mul(*fs)


def walk(e: NcExpr) -> Iterator[NcExpr]:
    """Every distinct node below e, once."""
    seen: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(node.children)
