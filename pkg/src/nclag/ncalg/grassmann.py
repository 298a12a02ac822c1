"""Cyclic differential-form words and their Grassmann-algebra evaluation.

A form of degree k is an integer combination of cyclic words whose
tokens are either Plain(e) or Diff(e) for an expression e, with exactly
k Diff tokens per word.  Words are identified up to graded cyclic
rotation: moving the first token t to the end multiplies the
coefficient by (-1)^(|t| * (k - |t|)) where |Plain| = 0, |Diff| = 1.

Evaluation substitutes every variable x by X + theta_1 X_1 + ... +
theta_k X_k in the Grassmann algebra on k anticommuting generators
(theta_i^2 = 0, theta_i theta_j = -theta_j theta_i).  A Plain token is
the full Grassmann value of its expression; a Diff token is the
degree-one part (which for rational expressions is exactly the
directional derivative at the base point, so d(x^-1) = -x^-1 dx x^-1
and the Leibniz rule hold automatically).  The value of a word is the
trace of the theta_1...theta_k coefficient of the token product, and
cyclic rotation invariance is the trace property.

The same rules are applied symbolically by `differential` (the graded d,
sending Plain(f) to Diff(f)) and `expand_diffs` (the chain rule, writing
Diff(f) as a sum of Plain-Diff(var)-Plain words); the symbolic route and
the degree-one-part route agree, which the test-suite exercises.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import expr as ex
from .expr import NcExpr
from .identity import PitConfig, Verdict, fails, holds, inconclusive
from .matrices import (
    Matrix,
    MatrixSample,
    SingularIntermediate,
    is_zero,
    mat_add,
    mat_inv,
    mat_mul,
    mat_neg,
    mat_trace,
    random_matrix,
    sample_for,
    scalar,
    subseed,
    zeros,
)

Token = tuple[str, NcExpr]  # ("p", e) or ("d", e)
Word = tuple[Token, ...]


def plain(e: NcExpr) -> Token:
    return ("p", e)


def diff(e: NcExpr) -> Token:
    return ("d", e)


def _word_degree(word: Word) -> int:
    return sum(1 for kind, _ in word if kind == "d")


def _rotation_sign(word: Word) -> int:
    """Sign for moving word[0] to the back, in the graded cyclic envelope."""
    head_deg = 1 if word[0][0] == "d" else 0
    rest_deg = _word_degree(word) - head_deg
    return -1 if (head_deg * rest_deg) % 2 else 1


def _canonical(word: Word) -> tuple[Word, int]:
    """Lexicographically minimal graded-cyclic rotation and its sign."""
    best: tuple | None = None
    best_word = word
    best_sign = 1
    current = word
    sign = 1
    for _ in range(len(word)):
        key = tuple((kind, ex.serialize(e)) for kind, e in current)
        if best is None or key < best:
            best, best_word, best_sign = key, current, sign
        sign *= _rotation_sign(current)
        current = current[1:] + current[:1]
    return best_word, best_sign


@dataclass(frozen=True)
class FormExpr:
    """Integer combination of cyclic Diff/Plain words of uniform degree."""

    degree: int
    terms: tuple[tuple[Word, int], ...]

    def __add__(self, other: "FormExpr") -> "FormExpr":
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degrees")
        return form(self.degree, list(self.terms) + list(other.terms))

    def __sub__(self, other: "FormExpr") -> "FormExpr":
        return self + (-other)

    def __neg__(self) -> "FormExpr":
        return FormExpr(self.degree, tuple((w, -c) for w, c in self.terms))

    def __rmul__(self, k: int) -> "FormExpr":
        return FormExpr(self.degree, tuple((w, k * c) for w, c in self.terms))

    def variables(self) -> frozenset[str]:
        names: set[str] = set()
        for word, _ in self.terms:
            for _, e in word:
                names |= ex.variables(e)
        return frozenset(names)


def form(degree: int, terms: list[tuple[Word, int]]) -> FormExpr:
    """Build a form, canonicalizing words and collecting coefficients."""
    acc: dict[Word, int] = {}
    for word, coeff in terms:
        if _word_degree(word) != degree:
            raise ValueError(
                f"word has {_word_degree(word)} differential slots, need {degree}"
            )
        canon, sign = _canonical(word)
        acc[canon] = acc.get(canon, 0) + sign * coeff
    kept = tuple(
        (w, c) for w, c in sorted(acc.items(), key=lambda t: str(t[0])) if c != 0
    )
    return FormExpr(degree, kept)


def dlog_pair(a: NcExpr, b: NcExpr) -> FormExpr:
    """The 2-form word da db b^-1 a^-1 attached to a pair of coordinates."""
    return form(2, [((diff(a), diff(b), plain(ex.inv(b)), plain(ex.inv(a))), 1)])


def dlog_cube(a: NcExpr) -> FormExpr:
    """The 3-form (a^-1 da)^3."""
    w = (plain(ex.inv(a)), diff(a)) * 3
    return form(3, [(w, 1)])


def differential(f: FormExpr) -> FormExpr:
    """Graded differential: d(Plain(t)) = Diff(t), d(Diff(t)) = 0, with
    the Koszul sign (-1)^(degree of the prefix) per position."""
    out: list[tuple[Word, int]] = []
    for word, coeff in f.terms:
        prefix_deg = 0
        for i, (kind, e) in enumerate(word):
            if kind == "p":
                sign = -1 if prefix_deg % 2 else 1
                new_word = word[:i] + (diff(e),) + word[i + 1 :]
                out.append((new_word, sign * coeff))
            else:
                prefix_deg += 1
    return form(f.degree + 1, out)


def _expand_diff_expr(e: NcExpr) -> list[tuple[tuple[NcExpr, ...], str, tuple[NcExpr, ...], int]]:
    """Chain rule: d(e) as a list of (left factors, variable, right factors,
    integer coefficient), using d(x^-1) = -x^-1 dx x^-1 and Leibniz."""
    if e.kind == "var":
        return [((), e.payload, (), 1)]
    if e.kind == "int":
        return []
    if e.kind == "neg":
        return [(l, v, r, -c) for l, v, r, c in _expand_diff_expr(e.children[0])]
    if e.kind == "add":
        out = []
        for child in e.children:
            out.extend(_expand_diff_expr(child))
        return out
    if e.kind == "mul":
        out = []
        for i, child in enumerate(e.children):
            left = e.children[:i]
            right = e.children[i + 1 :]
            for l, v, r, c in _expand_diff_expr(child):
                out.append((left + l, v, r + right, c))
        return out
    # inverse
    inner = e.children[0]
    out = []
    for l, v, r, c in _expand_diff_expr(inner):
        out.append(((e,) + l, v, r + (e,), -c))
    return out


def expand_diffs(f: FormExpr) -> FormExpr:
    """Rewrite every Diff(e) token with composite e into Plain/Diff(var)
    token runs via the chain rule; the result has Diff tokens on bare
    variables only."""
    out: list[tuple[Word, int]] = []
    for word, coeff in f.terms:
        expansions: list[list[tuple[Word, int]]] = []
        for kind, e in word:
            if kind == "p" or e.kind == "var":
                expansions.append([(((kind, e),), 1)])
            else:
                pieces = []
                for l, v, r, c in _expand_diff_expr(e):
                    toks = (
                        tuple(plain(x) for x in l)
                        + (diff(ex.var(v)),)
                        + tuple(plain(x) for x in r)
                    )
                    pieces.append((toks, c))
                expansions.append(pieces)
        partial: list[tuple[Word, int]] = [((), coeff)]
        for pieces in expansions:
            partial = [
                (w + toks, c * c2) for w, c in partial for toks, c2 in pieces
            ]
        out.extend(partial)
    return form(f.degree, out)


def substitute(f: FormExpr, mapping: dict[str, NcExpr]) -> FormExpr:
    """Substitute expressions for variables inside every token.  Diff
    tokens pick up the chain rule at evaluation (or via expand_diffs)."""
    out = []
    for word, coeff in f.terms:
        new_word = tuple((kind, ex.substitute(e, mapping)) for kind, e in word)
        out.append((new_word, coeff))
    return form(f.degree, out)


# --- Grassmann-valued evaluation -------------------------------------------

GrassmannValue = dict[int, Matrix]  # mask over k generators -> coefficient


def _gr_mul(a: GrassmannValue, b: GrassmannValue, p: int, k: int) -> GrassmannValue:
    out: GrassmannValue = {}
    for ma, va in a.items():
        for mb, vb in b.items():
            if ma & mb:
                continue
            sign = 1
            seen = 0
            for bit in range(k):
                if mb & (1 << bit):
                    crossings = bin(ma >> (bit + 1)).count("1")
                    if crossings % 2:
                        sign = -sign
            m = ma | mb
            term = mat_mul(va, vb, p)
            if sign < 0:
                term = mat_neg(term, p)
            if m in out:
                out[m] = mat_add(out[m], term, p)
            else:
                out[m] = term
    return out


def _gr_add(a: GrassmannValue, b: GrassmannValue, p: int) -> GrassmannValue:
    out = dict(a)
    for m, v in b.items():
        out[m] = mat_add(out[m], v, p) if m in out else v
    return out


def _gr_neg(a: GrassmannValue, p: int) -> GrassmannValue:
    return {m: mat_neg(v, p) for m, v in a.items()}


def _gr_inv(a: GrassmannValue, p: int, k: int, d: int) -> GrassmannValue:
    """(X0 + N)^-1 = (sum (-X0^-1 N)^j) X0^-1, N nilpotent."""
    base = a.get(0)
    if base is None:
        raise SingularIntermediate("no invertible body in Grassmann value")
    base_inv = mat_inv(base, p)
    nil = {m: v for m, v in a.items() if m != 0}
    inv0: GrassmannValue = {0: base_inv}
    if not nil:
        return inv0
    minus_bn = _gr_neg(_gr_mul(inv0, nil, p, k), p)
    out = inv0
    power: GrassmannValue = {0: scalar(1, d, p)}
    for _ in range(k):
        power = _gr_mul(power, minus_bn, p, k)
        if not power:
            break
        out = _gr_add(out, _gr_mul(power, inv0, p, k), p)
    return out


def _gr_eval(
    e: NcExpr,
    base: MatrixSample,
    diffs: dict[str, list[Matrix]],
    k: int,
    memo: dict[int, GrassmannValue],
) -> GrassmannValue:
    p, d = base.prime, base.size
    hit = memo.get(id(e))
    if hit is not None:
        return hit
    kind = e.kind
    if kind == "var":
        name = e.payload
        out = {0: base.assignment[name]}
        for i, m in enumerate(diffs.get(name, ())):
            out[1 << i] = m
    elif kind == "int":
        out = {0: scalar(e.payload, d, p)}
    elif kind == "add":
        out = {}
        for c in e.children:
            out = _gr_add(out, _gr_eval(c, base, diffs, k, memo), p)
    elif kind == "mul":
        out = _gr_eval(e.children[0], base, diffs, k, memo)
        for c in e.children[1:]:
            out = _gr_mul(out, _gr_eval(c, base, diffs, k, memo), p, k)
    elif kind == "neg":
        out = _gr_neg(_gr_eval(e.children[0], base, diffs, k, memo), p)
    else:
        out = _gr_inv(_gr_eval(e.children[0], base, diffs, k, memo), p, k, d)
    memo[id(e)] = out
    return out


def grassmann_eval(
    f: FormExpr, base: MatrixSample, diffs: dict[str, list[Matrix]]
) -> int:
    """Trace of the top theta coefficient of the form on a sample.

    `diffs` assigns to each variable its k differential matrices (the
    coefficients of theta_1..theta_k in the substitution).  Returns a
    scalar in F_p.
    """
    k = f.degree
    p, d = base.prime, base.size
    top = (1 << k) - 1
    memo: dict[int, GrassmannValue] = {}
    total = 0
    for word, coeff in f.terms:
        acc: GrassmannValue = {0: scalar(1, d, p)}
        for kind, e in word:
            val = _gr_eval(e, base, diffs, k, memo)
            if kind == "d":
                val = {m: v for m, v in val.items() if bin(m).count("1") == 1}
            acc = _gr_mul(acc, val, p, k)
            if not acc:
                break
        piece = acc.get(top)
        if piece is not None:
            total = (total + coeff * mat_trace(piece, p)) % p
    return total % p


def two_form_identity_test(
    f1: FormExpr,
    f2: FormExpr,
    substitution: dict[str, NcExpr] | None = None,
    config: PitConfig = PitConfig(),
) -> Verdict:
    """Compare two forms of equal degree on seeded samples, after an
    optional substitution applied to the second one."""
    if substitution:
        f2 = substitute(f2, substitution)
    if f1.degree != f2.degree:
        raise ValueError("forms have different differential degrees")
    k = f1.degree
    names = f1.variables() | f2.variables()
    for size in config.sizes:
        produced = 0
        for trial in range(config.trials):
            trial_seed = subseed(config.seed, 0x6F, size, trial)
            for retry in range(config.max_singular_retries):
                rng = random.Random(subseed(trial_seed, retry))
                base = sample_for(names, size, config.prime, rng)
                dmats = {
                    n: [random_matrix(rng, size, config.prime) for _ in range(k)]
                    for n in sorted(names)
                }
                try:
                    v1 = grassmann_eval(f1, base, dmats)
                    v2 = grassmann_eval(f2, base, dmats)
                except SingularIntermediate:
                    continue
                produced += 1
                if (v1 - v2) % config.prime:
                    return fails(size, trial_seed, base, {"lhs": v1, "rhs": v2})
                break
        if produced == 0:
            return inconclusive(
                f"all trials at size {size} exhausted singular-sample retries"
            )
    return holds(config)
