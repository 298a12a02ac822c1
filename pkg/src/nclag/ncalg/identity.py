"""Randomized identity testing over matrix rings.

Two expressions are compared by evaluating their difference on seeded
pseudo-random invertible matrix samples at several sizes over a large
prime field.  A rational identity that fails in the free skew field
fails on generic matrices of some bounded size, so a nonzero evaluation
is a proof of inequality (the witness is reported), while all-zero
evaluations give `HoldsProbably`.

Singular intermediates (an inverse applied to a singular matrix) are
dealt with by resampling a bounded number of times per trial; a size
whose every trial exhausts its retries yields `Inconclusive` rather
than a silent pass.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import expr as ex
from .expr import NcExpr
from .matrices import (
    DEFAULT_PRIME,
    MatrixSample,
    SingularIntermediate,
    eval_expr,
    is_zero,
    sample_for,
    subseed,
)


@dataclass(frozen=True)
class PitConfig:
    """Knobs for the probabilistic identity test."""

    sizes: tuple[int, ...] = (1, 2, 3, 4)
    trials: int = 20
    prime: int = DEFAULT_PRIME
    seed: int = 0
    max_singular_retries: int = 8


@dataclass(frozen=True)
class Verdict:
    """Outcome of a probabilistic check.

    status is "holds" (probably), "fails" (with a reproducible witness)
    or "inconclusive" (typically: every retry hit a singular sample).
    """

    status: str
    sizes: tuple[int, ...] = ()
    trials: int = 0
    prime: int = 0
    witness: dict | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "holds"

    def describe(self) -> str:
        if self.status == "holds":
            return (
                f"holds on sizes {list(self.sizes)} x {self.trials} trials"
                f" mod {self.prime}"
            )
        if self.status == "fails":
            w = self.witness or {}
            return (
                f"fails at size {w.get('size')} (seed {w.get('seed')},"
                f" sample {w.get('digest')})"
            )
        return f"inconclusive: {self.reason}"


def holds(config: PitConfig) -> Verdict:
    return Verdict(
        status="holds", sizes=config.sizes, trials=config.trials, prime=config.prime
    )


def fails(size: int, trial_seed: int, sample: MatrixSample, extra: dict | None = None) -> Verdict:
    witness = {
        "size": size,
        "seed": trial_seed,
        "digest": sample.digest(),
        "assignment": {
            k: [list(r) for r in v] for k, v in sorted(sample.assignment.items())
        },
    }
    if extra:
        witness.update(extra)
    return Verdict(status="fails", witness=witness)


def inconclusive(reason: str) -> Verdict:
    return Verdict(status="inconclusive", reason=reason)


def identity_test(
    lhs: NcExpr,
    rhs: NcExpr,
    config: PitConfig = PitConfig(),
    extra_names: frozenset[str] = frozenset(),
) -> Verdict:
    """Probabilistically decide whether lhs = rhs in the free skew field."""
    diff = lhs - rhs
    names = ex.variables(diff) | extra_names
    for size in config.sizes:
        produced = 0
        for trial in range(config.trials):
            trial_seed = subseed(config.seed, size, trial)
            done = False
            for retry in range(config.max_singular_retries):
                rng = random.Random(subseed(trial_seed, retry))
                sample = sample_for(names, size, config.prime, rng)
                try:
                    value = eval_expr(diff, sample)
                except SingularIntermediate:
                    continue
                done = True
                produced += 1
                if not is_zero(value):
                    return fails(size, trial_seed, sample)
                break
            if not done:
                continue
        if produced == 0:
            return inconclusive(
                f"all trials at size {size} exhausted singular-sample retries"
            )
    return holds(config)


def system_identity_test(
    pairs: list[tuple[str, NcExpr, NcExpr]], config: PitConfig = PitConfig()
) -> Verdict:
    """Test several identities; first failure wins, all-hold reports holds."""
    for i, (name, lhs, rhs) in enumerate(pairs):
        sub = PitConfig(
            sizes=config.sizes,
            trials=config.trials,
            prime=config.prime,
            seed=subseed(config.seed, 0xE9, i),
            max_singular_retries=config.max_singular_retries,
        )
        v = identity_test(lhs, rhs, sub)
        if not v.ok:
            if v.status == "fails":
                witness = dict(v.witness or {})
                witness["identity"] = name
                return Verdict(status="fails", witness=witness)
            return inconclusive(f"{name}: {v.reason}")
    return holds(config)
