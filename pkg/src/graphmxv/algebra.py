"""Semirings and monoids that parameterize the matvec kernels.

An operator is a numpy ufunc so the kernels can apply it to whole
arrays (``reduceat`` for folds, broadcasting for products) while the
same object still works on scalars.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Iterable

import numpy as np


@dataclass(frozen=True)
class Monoid:
    """Associative, commutative ``op`` with neutral element ``identity``."""

    op: np.ufunc
    identity: Any
    name: str = ""

    def combine(self, a, b):
        return self.op(a, b)

    def fold(self, values: Iterable, stop_at=None):
        """Left fold of ``values``; stops early once the accumulator equals ``stop_at``."""
        acc = self.identity
        for x in values:
            acc = self.op(acc, x)
            if stop_at is not None and acc == stop_at:
                break
        return acc


@dataclass(frozen=True)
class Semiring:
    """(D, multiply, add, identity) over a fixed numpy dtype.

    ``annihilator`` is the value ``a`` with ``add(a, x) == a`` for every
    ``x`` in the domain, or ``None`` when the kernels should not rely on one.
    """

    name: str
    add: Monoid
    multiply: np.ufunc
    dtype: np.dtype
    annihilator: Any = None

    @property
    def identity(self):
        return self.add.identity

    @property
    def is_boolean(self) -> bool:
        return self.dtype == np.bool_

    def times(self, a, b):
        return self.multiply(a, b)

    def plus(self, a, b):
        return self.add.op(a, b)

    def __repr__(self) -> str:
        return f"Semiring({self.name})"


LOR = Monoid(np.logical_or, np.False_, "lor")
PLUS_INT = Monoid(np.add, np.int64(0), "plus")
PLUS_FP = Monoid(np.add, np.float64(0.0), "plus")
MIN_FP = Monoid(np.minimum, np.float64(np.inf), "min")


def boolean_lor_land() -> Semiring:
    """Boolean semiring ({0, 1}, AND, OR, false) used for BFS."""
    return Semiring(
        "lor_land", LOR, np.logical_and, np.dtype(np.bool_), annihilator=np.True_
    )


def plus_times(dtype=np.int64) -> Semiring:
    dtype = np.dtype(dtype)
    if dtype.kind == "f":
        add = PLUS_FP
    elif dtype.kind in "iu":
        add = Monoid(np.add, dtype.type(0), "plus")
    else:
        raise TypeError(f"plus_times needs a numeric dtype, got {dtype}")
    return Semiring(f"plus_times[{dtype.name}]", add, np.multiply, dtype)


def min_plus() -> Semiring:
    """Tropical semiring over float64; +inf is the reserved "no path" value."""
    return Semiring("min_plus", MIN_FP, np.add, np.dtype(np.float64))


@lru_cache(maxsize=None)
def supports_early_exit(s: Semiring) -> bool:
    """True when a row fold may stop at the first contributing term.

    That holds for an idempotent add over a two-element domain whose
    annihilator is actually reachable, i.e. logical OR over Booleans.
    """
    if not s.is_boolean or s.annihilator is None:
        return False
    domain = (np.False_, np.True_)
    if s.annihilator == s.identity:
        return False
    for x in domain:
        if s.plus(x, x) != x:
            return False
        if s.plus(s.annihilator, x) != s.annihilator:
            return False
    return True
