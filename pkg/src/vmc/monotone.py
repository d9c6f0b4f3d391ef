"""Extreme points of nonincreasing sequences in ``[0, 1]``.

The extreme points are the 0/1 staircases ``1^m 0^...`` (and, for infinite
sequences, all ones). Pinning the first entry at 1 removes only the all-zero
staircase. On finite prefixes this is checked against brute-force vertex
enumeration, and any non-staircase is split explicitly into two nearby valid
sequences that average back to it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import IsExtreme, TooLarge
from .rational import ONE, ZERO, RatLike, rat, solve


@dataclass(frozen=True)
class MonotonePrefix:
    values: tuple[Fraction, ...]
    pinned_first: bool = False

    def __post_init__(self) -> None:
        v = tuple(rat(x) for x in self.values)
        object.__setattr__(self, "values", v)
        if any(x < 0 or x > 1 for x in v):
            raise ValueError("values must lie in [0, 1]")
        if any(b > a for a, b in zip(v, v[1:])):
            raise ValueError("values must be nonincreasing")
        if self.pinned_first and v and v[0] != 1:
            raise ValueError("pinned sequences start at 1")


def is_extreme_pattern(x: MonotonePrefix) -> bool:
    return all(v in (0, 1) for v in x.values)


def extreme_witness(x: MonotonePrefix) -> tuple[MonotonePrefix, MonotonePrefix]:
    """Two distinct valid sequences with midpoint ``x``.

    ``k1`` is the first index below 1 and ``k2`` the first index from ``k1`` on
    where the sequence strictly drops. The block ``k1..k2`` (or everything from
    ``k1`` when there is no drop inside the prefix) is shifted up and down by
    half the largest step that keeps both copies valid.
    """
    if is_extreme_pattern(x):
        raise IsExtreme("staircases cannot be split")
    v = x.values
    n = len(v)
    k1 = next(i for i, t in enumerate(v) if t < 1)
    c = v[k1]
    k2 = next((i for i in range(k1, n - 1) if v[i] > v[i + 1]), None)
    if k2 is None:
        eps = min(c, 1 - c)
        end = n
    else:
        eps = min(c, 1 - c, v[k2] - v[k2 + 1], 1 - v[k2])
        end = k2 + 1
    plus = v[:k1] + (c + eps / 2,) * (end - k1) + v[end:]
    minus = v[:k1] + (c - eps / 2,) * (end - k1) + v[end:]
    return MonotonePrefix(plus, x.pinned_first), MonotonePrefix(minus, x.pinned_first)


def staircases(n: int, pinned_first: bool = False) -> list[MonotonePrefix]:
    lo = 1 if pinned_first else 0
    return [MonotonePrefix((ONE,) * m + (ZERO,) * (n - m), pinned_first) for m in range(lo, n + 1)]


def brute_force_vertices(n: int, pinned_first: bool = False) -> list[MonotonePrefix]:
    """Vertices of ``{x in [0,1]^n : x_1 >= ... >= x_n}`` (with ``x_1 = 1`` if pinned).

    Every choice of ``n`` constraints is made tight and solved exactly; feasible
    unique solutions are the vertices.
    """
    if n > 5:
        raise TooLarge("vertex enumeration is limited to n <= 5")
    if n < 1:
        raise ValueError("n must be >= 1")
    # rows are (coefficients, rhs) for coefficients . x <= rhs
    cons: list[tuple[tuple[Fraction, ...], Fraction]] = []

    def unit(i: int, s: int) -> tuple[Fraction, ...]:
        return tuple(Fraction(s) if j == i else ZERO for j in range(n))

    cons.append((unit(0, 1), ONE))
    cons.append((unit(n - 1, -1), ZERO))
    for i in range(n - 1):
        cons.append((tuple(ONE if j == i + 1 else (-ONE if j == i else ZERO) for j in range(n)), ZERO))
    if pinned_first:
        cons.append((unit(0, -1), -ONE))
    found: set[tuple[Fraction, ...]] = set()
    for subset in itertools.combinations(range(len(cons)), n):
        try:
            x = solve([cons[i][0] for i in subset], [cons[i][1] for i in subset])
        except ValueError:
            continue
        if all(sum((r[j] * x[j] for j in range(n)), ZERO) <= b for r, b in cons):
            found.add(x)
    return [MonotonePrefix(x, pinned_first) for x in sorted(found)]
