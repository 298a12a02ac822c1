"""Exact matrix arithmetic over a prime field, and seeded sampling.

Matrices are tuples of tuples of ints in [0, p).  Sizes stay tiny
(d <= 4 throughout the verification suite), so plain Python integers are
both exact and fast enough; there is no floating point anywhere.

All randomness flows from a single seed through `subseed`, a splitmix64
fold over integer tags.  Identical (seed, tags) always reproduce the
same sample, on any platform.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import expr as ex
from .expr import NcExpr

DEFAULT_PRIME = 2147483629  # largest prime below 2^31 - 2, comfortably > 10^9

Matrix = tuple[tuple[int, ...], ...]


class SingularIntermediate(ArithmeticError):
    """An inverse was requested of a singular matrix during evaluation."""


class UnboundVariable(KeyError):
    """An expression variable has no matrix assigned in the sample."""


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def subseed(seed: int, *tags: int) -> int:
    """Deterministically derive an independent stream seed from tags."""
    h = _splitmix64(seed & 0xFFFFFFFFFFFFFFFF)
    for t in tags:
        h = _splitmix64(h ^ (t & 0xFFFFFFFFFFFFFFFF))
    return h


def identity(d: int, p: int) -> Matrix:
    return tuple(tuple(1 % p if i == j else 0 for j in range(d)) for i in range(d))


def zeros(d: int, p: int) -> Matrix:
    return tuple((0,) * d for _ in range(d))


def mat_add(a: Matrix, b: Matrix, p: int) -> Matrix:
    return tuple(
        tuple((x + y) % p for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
    )


def mat_neg(a: Matrix, p: int) -> Matrix:
    return tuple(tuple((-x) % p for x in row) for row in a)


def mat_scale(k: int, a: Matrix, p: int) -> Matrix:
    k %= p
    return tuple(tuple((k * x) % p for x in row) for row in a)


def mat_mul(a: Matrix, b: Matrix, p: int) -> Matrix:
    d = len(a)
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) % p for col in bt) for row in a
    )


def mat_inv(a: Matrix, p: int) -> Matrix:
    """Gauss-Jordan inverse mod p; raises SingularIntermediate."""
    d = len(a)
    aug = [list(row) + [1 if i == j else 0 for j in range(d)] for i, row in enumerate(a)]
    for col in range(d):
        piv = next((r for r in range(col, d) if aug[r][col] % p), None)
        if piv is None:
            raise SingularIntermediate(f"singular {d}x{d} matrix mod {p}")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = pow(aug[col][col], p - 2, p)
        aug[col] = [(x * inv_p) % p for x in aug[col]]
        for r in range(d):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [(x - f * y) % p for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[d:]) for row in aug)


def mat_trace(a: Matrix, p: int) -> int:
    return sum(a[i][i] for i in range(len(a))) % p


def is_zero(a: Matrix) -> bool:
    return all(all(x == 0 for x in row) for row in a)


def scalar(n: int, d: int, p: int) -> Matrix:
    n %= p
    return tuple(tuple(n if i == j else 0 for j in range(d)) for i in range(d))


def random_matrix(rng: random.Random, d: int, p: int) -> Matrix:
    return tuple(tuple(rng.randrange(p) for _ in range(d)) for _ in range(d))


def random_invertible(rng: random.Random, d: int, p: int, tries: int = 64) -> Matrix:
    for _ in range(tries):
        m = random_matrix(rng, d, p)
        try:
            mat_inv(m, p)
        except SingularIntermediate:
            continue
        return m
    raise SingularIntermediate("could not sample an invertible matrix")


@dataclass(frozen=True)
class MatrixSample:
    """An assignment of invertible d x d matrices over F_p to variables."""

    prime: int
    size: int
    assignment: dict[str, Matrix]

    def digest(self) -> str:
        """Short stable fingerprint, for failure witnesses."""
        h = 0
        for name in sorted(self.assignment):
            h = _splitmix64(h ^ _splitmix64(hash(name) & 0xFFFFFFFFFFFFFFFF))
            for row in self.assignment[name]:
                for x in row:
                    h = _splitmix64(h ^ x)
        return f"{h:016x}"


def sample_for(
    names, d: int, p: int, rng: random.Random, invertible: bool = True
) -> MatrixSample:
    assign = {}
    for name in sorted(names):
        assign[name] = (
            random_invertible(rng, d, p) if invertible else random_matrix(rng, d, p)
        )
    return MatrixSample(prime=p, size=d, assignment=assign)


def eval_expr(e: NcExpr, s: MatrixSample) -> Matrix:
    """Homomorphic evaluation of the DAG on a matrix sample.

    Inverse nodes evaluate to the matrix inverse; a singular argument
    raises SingularIntermediate, an unassigned variable UnboundVariable.
    """
    p, d = s.prime, s.size
    memo: dict[int, Matrix] = {}

    def go(node: NcExpr) -> Matrix:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        k = node.kind
        if k == "var":
            try:
                out = s.assignment[node.payload]
            except KeyError:
                raise UnboundVariable(node.payload) from None
        elif k == "int":
            out = scalar(node.payload, d, p)
        elif k == "add":
            out = go(node.children[0])
            for c in node.children[1:]:
                out = mat_add(out, go(c), p)
        elif k == "mul":
            out = go(node.children[0])
            for c in node.children[1:]:
                out = mat_mul(out, go(c), p)
        elif k == "neg":
            out = mat_neg(go(node.children[0]), p)
        else:
            out = mat_inv(go(node.children[0]), p)
        memo[id(node)] = out
        return out

    return go(e)


def eval_many(exprs, s: MatrixSample) -> list[Matrix]:
    return [eval_expr(e, s) for e in exprs]


__all__ = [
    "DEFAULT_PRIME",
    "Matrix",
    "MatrixSample",
    "SingularIntermediate",
    "UnboundVariable",
    "identity",
    "mat_add",
    "mat_inv",
    "mat_mul",
    "mat_neg",
    "mat_trace",
    "is_zero",
    "scalar",
    "subseed",
    "sample_for",
    "random_invertible",
    "random_matrix",
    "eval_expr",
    "eval_many",
]
