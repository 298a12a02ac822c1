"""Solving an equation for a variable occurring exactly once.

Given an expression ``eq`` read as the equation ``eq = 0`` and a
variable ``v`` with a single occurrence in the DAG (multiplicity counted
through shared nodes), the unique root-to-occurrence path is inverted
step by step: sums move siblings across, products multiply by formal
inverses on the matching side, negation and inversion undo themselves.
The result phi satisfies: substituting v := phi makes eq a rational
identity equal to zero, checkable with identity_test.
"""

from __future__ import annotations

from . import expr as ex
from .expr import NcExpr


class IsolationError(ValueError):
    pass


class MultipleOccurrences(IsolationError):
    pass


class NoOccurrence(IsolationError):
    pass


class NonInvertibleStep(IsolationError):
    pass


def isolate(eq: NcExpr, v: str) -> NcExpr:
    """Solve ``eq = 0`` for the variable ``v`` occurring exactly once."""
    n = ex.count_occurrences(eq, v)
    if n == 0:
        raise NoOccurrence(v)
    if n > 1:
        raise MultipleOccurrences(f"{v} occurs {n} times")
    return _solve(eq, v, ex.ZERO)


def _solve(node: NcExpr, v: str, rhs: NcExpr) -> NcExpr:
    """Invert ``node = rhs`` along the unique path to v."""
    if node.kind == "var":
        return rhs
    if node.kind == "add":
        target = _child_with(node, v)
        others = [c for c in node.children if c is not target]
        for c in others:
            moved = c.children[0] if c.kind == "neg" else ex.neg(c)
            rhs = moved if rhs is ex.ZERO else rhs + moved
        return _solve(target, v, rhs)
    if node.kind == "mul":
        target = _child_with(node, v)
        idx = node.children.index(target)
        left = node.children[:idx]
        right = node.children[idx + 1 :]
        for f in (left + right):
            if f.kind == "int" and f.payload == 0:
                raise NonInvertibleStep("zero factor beside the unknown")
        if left:
            rhs = ex.inv(ex.mul(*left) if len(left) > 1 else left[0]) * rhs
        if right:
            rhs = rhs * ex.inv(ex.mul(*right) if len(right) > 1 else right[0])
        return _solve(target, v, rhs)
    if node.kind == "neg":
        return _solve(node.children[0], v, ex.neg(rhs))
    if node.kind == "inv":
        return _solve(node.children[0], v, ex.inv(rhs))
    raise NoOccurrence(v)


def _child_with(node: NcExpr, v: str) -> NcExpr:
    for c in node.children:
        if ex.count_occurrences(c, v):
            return c
    raise NoOccurrence(v)
