"""Virtual initial states and their distributions.

A virtual initial state is a sequence ``y_1, y_2, ...`` with ``y_N`` in
``{0..N}`` where each step either holds (``y_{N+1} = y_N``) or jumps to the new
top state (``y_{N+1} = N + 1``). A Markovian law on such sequences is fixed by
the law of ``y_1`` and the hold ratios ``r_N(a) = P(y_{N+1} = a | y_N = a)``.
Its level marginals ``nu_N`` decrease pointwise in ``N``, and every such
decreasing family of marginals comes from exactly one Markovian law.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator, Sequence

import numpy as np

from .errors import InvalidDistribution, InvalidLevel, InvalidState
from .rational import ONE, ZERO, RatLike, fmt, rat


@dataclass(frozen=True)
class VisPrefix:
    """States ``y_1..y_M`` of a virtual initial state."""

    states: tuple[int, ...]

    def __post_init__(self) -> None:
        s = tuple(int(y) for y in self.states)
        object.__setattr__(self, "states", s)
        for n, y in enumerate(s, start=1):
            if not 0 <= y <= n:
                raise InvalidState(f"y_{n} = {y} outside [0, {n}]")
            if n > 1 and y != n and y != s[n - 2]:
                raise InvalidState(f"y_{n} = {y} neither holds at {s[n - 2]} nor jumps to {n}")


@dataclass(frozen=True)
class VidPrefix:
    """Marginals ``nu_1..nu_M``; ``dists[N-1]`` is a probability vector on ``0..N``."""

    dists: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        d = tuple(tuple(rat(x) for x in v) for v in self.dists)
        object.__setattr__(self, "dists", d)
        if not d:
            raise InvalidLevel("a prefix needs at least one level")
        for n, v in enumerate(d, start=1):
            if len(v) != n + 1:
                raise InvalidDistribution(f"nu_{n} has length {len(v)}, expected {n + 1}")
            if any(x < 0 for x in v) or sum(v) != 1:
                raise InvalidDistribution(f"nu_{n} is not a probability vector")
        for n in range(1, len(d)):
            lo, hi = d[n - 1], d[n]
            for a in range(n + 1):
                if hi[a] > lo[a]:
                    raise InvalidDistribution(f"nu_{n + 1}({a}) > nu_{n}({a}): marginals must decrease")

    @property
    def level(self) -> int:
        return len(self.dists)

    def __getitem__(self, n: int) -> tuple[Fraction, ...]:
        if not 1 <= n <= self.level:
            raise InvalidLevel(f"level {n} not in [1, {self.level}]")
        return self.dists[n - 1]

    def __iter__(self) -> Iterator[tuple[Fraction, ...]]:
        """Marginals from level 1 upward."""
        return iter(self.dists)

    def __len__(self) -> int:
        return self.level

    def truncate(self, m: int) -> "VidPrefix":
        return VidPrefix(self.dists[:m])

    def mix(self, other: "VidPrefix", alpha: RatLike) -> "VidPrefix":
        alpha = rat(alpha)
        return VidPrefix(
            tuple(tuple((1 - alpha) * x + alpha * y for x, y in zip(u, v)) for u, v in zip(self.dists, other.dists))
        )

    def to_json(self) -> dict[str, Any]:
        return {"dists": [[fmt(x) for x in v] for v in self.dists]}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "VidPrefix":
        return cls(tuple(tuple(rat(x) for x in v) for v in data["dists"]))


def point_mass(n: int, a: int) -> tuple[Fraction, ...]:
    return tuple(ONE if b == a else ZERO for b in range(n + 1))


@dataclass(frozen=True)
class MarkovianInitialLaw:
    """Law of ``y_1`` plus hold ratios; ``ratios[N-1][a]`` is ``r_N(a)`` for ``a`` in ``0..N``."""

    nu1: tuple[Fraction, Fraction]
    ratios: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        nu1 = tuple(rat(x) for x in self.nu1)
        ratios = tuple(tuple(rat(x) for x in r) for r in self.ratios)
        object.__setattr__(self, "nu1", nu1)
        object.__setattr__(self, "ratios", ratios)
        if len(nu1) != 2 or any(x < 0 for x in nu1) or sum(nu1) != 1:
            raise InvalidDistribution("nu_1 must be a probability vector on {0, 1}")
        for n, r in enumerate(ratios, start=1):
            if len(r) != n + 1:
                raise InvalidDistribution(f"ratios at level {n} have length {len(r)}, expected {n + 1}")
            if any(x < 0 or x > 1 for x in r):
                raise InvalidDistribution(f"ratio at level {n} outside [0, 1]")

    @property
    def level(self) -> int:
        """Highest level the law determines."""
        return len(self.ratios) + 1


@dataclass(frozen=True)
class BernoulliHierarchy:
    """Independent jump indicators: at level ``N`` the state jumps to ``N`` with probability ``jump[N-2]``.

    ``jump1`` is the probability that ``y_1 = 1`` rather than ``0``.
    """

    jump1: Fraction
    jump: tuple[Fraction, ...]

    def law(self) -> MarkovianInitialLaw:
        j1 = rat(self.jump1)
        return MarkovianInitialLaw(
            (1 - j1, j1),
            tuple(tuple(1 - rat(h) for _ in range(n + 1)) for n, h in enumerate(self.jump, start=1)),
        )


def uniform_hierarchy(m: int) -> BernoulliHierarchy:
    """Jump to the new top at level ``N`` with probability ``1/N``."""
    return BernoulliHierarchy(ONE, tuple(Fraction(1, n) for n in range(2, m + 1)))


def marginals(law: MarkovianInitialLaw, m: int | None = None) -> VidPrefix:
    m = law.level if m is None else m
    if not 1 <= m <= law.level:
        raise InvalidLevel(f"law determines levels 1..{law.level}, asked for {m}")
    dists = [law.nu1]
    for n in range(1, m):
        cur = dists[-1]
        r = law.ratios[n - 1]
        held = tuple(cur[a] * r[a] for a in range(n + 1))
        dists.append(held + (sum(cur[a] * (1 - r[a]) for a in range(n + 1)),))
    return VidPrefix(tuple(dists))


def law_from_marginals(nu: VidPrefix) -> MarkovianInitialLaw:
    """Invert ``marginals``. States with zero mass get ratio 0; the choice does not affect the law."""
    ratios = []
    for n in range(1, nu.level):
        cur, nxt = nu[n], nu[n + 1]
        ratios.append(tuple(nxt[a] / cur[a] if cur[a] != 0 else ZERO for a in range(n + 1)))
    v1 = nu[1]
    return MarkovianInitialLaw((v1[0], v1[1]), tuple(ratios))


def jump_probabilities(law: MarkovianInitialLaw) -> tuple[tuple[Fraction, ...], ...]:
    """``1 - r_N(a)`` for each level and state."""
    return tuple(tuple(1 - x for x in r) for r in law.ratios)


def virtual_uniform(m: int) -> VidPrefix:
    if m < 1:
        raise InvalidLevel("m must be >= 1")
    return VidPrefix(tuple((ZERO,) + (Fraction(1, n),) * n for n in range(1, m + 1)))


def sample_vis(law: MarkovianInitialLaw, m: int, rng: np.random.Generator) -> VisPrefix:
    return VisPrefix(tuple(int(y) for y in sample_vis_batch(law, m, 1, rng)[0]))


def sample_vis_batch(law: MarkovianInitialLaw, m: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` independent prefixes; row ``i`` holds ``y_1..y_m``."""
    if not 1 <= m <= law.level:
        raise InvalidLevel(f"law determines levels 1..{law.level}, asked for {m}")
    out = np.empty((size, m), dtype=np.int64)
    y = (rng.random(size) < float(law.nu1[1])).astype(np.int64)
    out[:, 0] = y
    for n in range(1, m):
        r = np.array([float(x) for x in law.ratios[n - 1]])
        hold = rng.random(size) < r[y]
        y = np.where(hold, y, n + 1)
        out[:, n] = y
    return out


def enumerate_vis(m: int) -> list[VisPrefix]:
    """All virtual initial state prefixes of length ``m``."""
    out = [(0,), (1,)]
    for n in range(2, m + 1):
        out = [s + (s[-1],) for s in out] + [s + (n,) for s in out]
    return [VisPrefix(s) for s in out]


def vis_probability(law: MarkovianInitialLaw, y: VisPrefix) -> Fraction:
    s = y.states
    pr = law.nu1[s[0]]
    for n in range(1, len(s)):
        r = law.ratios[n - 1][s[n - 1]]
        pr *= r if s[n] == s[n - 1] else 1 - r
    return pr
