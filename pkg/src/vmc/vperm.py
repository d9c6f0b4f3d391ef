"""Virtual permutations: sequences of permutations coherent under deleting the top element.

Permutations of ``1..N`` are stored as image tuples, ``sigma[a - 1] = sigma(a)``.
Removing ``N + 1`` from its cycle and closing the gap gives the permutation one
level down. The permutation matrices of a coherent sequence form a virtual
transition matrix, since projecting a permutation matrix performs the same
cycle surgery.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import IncoherentPermutations, InvalidLevel, InvalidState
from .pathspace import PathPrefix, Tail, project_path
from .rational import ONE, ZERO
from .transmat import TruncatedTM, VtmPrefix

Perm = tuple[int, ...]

OWN_CYCLE = None


def _check_perm(s: Sequence[int]) -> Perm:
    s = tuple(int(x) for x in s)
    if sorted(s) != list(range(1, len(s) + 1)):
        raise IncoherentPermutations(f"{s} is not a permutation of 1..{len(s)}")
    return s


def inverse(s: Perm) -> Perm:
    inv = [0] * len(s)
    for a, b in enumerate(s, start=1):
        inv[b - 1] = a
    return tuple(inv)


def delete_top(s: Perm) -> Perm:
    """Remove the largest element from its cycle."""
    n1 = len(s)
    if n1 < 2:
        raise InvalidLevel("cannot delete from a permutation of one element")
    if s[-1] == n1:
        return s[:-1]
    out = list(s[:-1])
    pre = s.index(n1)
    out[pre] = s[-1]
    return tuple(out)


def insert_top(s: Perm, after: int | None = OWN_CYCLE) -> Perm:
    """Add ``N + 1`` as a fixed point (``after=None``) or right after ``after`` in its cycle."""
    n = len(s)
    if after is None:
        return s + (n + 1,)
    if not 1 <= after <= n:
        raise InvalidState(f"insertion point {after} not in [1, {n}]")
    out = list(s) + [s[after - 1]]
    out[after - 1] = n + 1
    return tuple(out)


def cycles(s: Perm) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    out = []
    for a in range(1, len(s) + 1):
        if a in seen:
            continue
        cyc = [a]
        seen.add(a)
        b = s[a - 1]
        while b != a:
            cyc.append(b)
            seen.add(b)
            b = s[b - 1]
        out.append(tuple(cyc))
    return out


@dataclass(frozen=True)
class VPermPrefix:
    """Permutations ``sigma_1..sigma_M``; ``perms[N-1]`` acts on ``1..N``."""

    perms: tuple[Perm, ...]

    def __post_init__(self) -> None:
        ps = tuple(_check_perm(p) for p in self.perms)
        object.__setattr__(self, "perms", ps)
        if not ps:
            raise InvalidLevel("a prefix needs at least one level")
        for n, p in enumerate(ps, start=1):
            if len(p) != n:
                raise IncoherentPermutations(f"level {n} permutation has length {len(p)}")
            if n > 1 and delete_top(p) != ps[n - 2]:
                raise IncoherentPermutations(f"deleting {n} from level {n} does not give level {n - 1}")

    @property
    def level(self) -> int:
        return len(self.perms)

    def __getitem__(self, n: int) -> Perm:
        if not 1 <= n <= self.level:
            raise InvalidLevel(f"level {n} not in [1, {self.level}]")
        return self.perms[n - 1]

    def to_json(self) -> dict[str, Any]:
        return {"perms": [list(p) for p in self.perms]}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "VPermPrefix":
        return cls(tuple(tuple(p) for p in data["perms"]))


def from_top(s: Sequence[int]) -> VPermPrefix:
    """The coherent prefix ending in ``s``, obtained by repeated deletion."""
    s = _check_perm(s)
    out = [s]
    while len(out[-1]) > 1:
        out.append(delete_top(out[-1]))
    return VPermPrefix(tuple(reversed(out)))


def grow(s: VPermPrefix, choices: Sequence[int | None]) -> VPermPrefix:
    perms = list(s.perms)
    for c in choices:
        perms.append(insert_top(perms[-1], c))
    return VPermPrefix(tuple(perms))


def random_prefix(m: int, rng: np.random.Generator) -> VPermPrefix:
    """Uniform growth: at each level every one of the ``N + 1`` insertion choices is equally likely.

    Level ``N`` is then uniform on the symmetric group (the Chinese restaurant
    process with unit parameter).
    """
    perms: list[Perm] = [(1,)]
    for n in range(1, m):
        c = int(rng.integers(0, n + 1))
        perms.append(insert_top(perms[-1], None if c == 0 else c))
    return VPermPrefix(tuple(perms))


def permutation_matrix(s: Perm) -> TruncatedTM:
    n = len(s)
    rows = [(ONE,) + (ZERO,) * n]
    for a in range(1, n + 1):
        rows.append(tuple(ONE if b == s[a - 1] else ZERO for b in range(n + 1)))
    return TruncatedTM(tuple(rows))


def vtm_of(s: VPermPrefix) -> VtmPrefix:
    return VtmPrefix(tuple(permutation_matrix(p) for p in s.perms))


def identity_prefix(m: int) -> VPermPrefix:
    return VPermPrefix(tuple(tuple(range(1, n + 1)) for n in range(1, m + 1)))


def alternating_pair(m: int) -> tuple[VPermPrefix, VPermPrefix]:
    """The transposition families ``(1)(2 3)(4 5)...`` and ``(1 2)(3 4)...``.

    Any element left without a partner at the top of the range is fixed.
    """

    def build(n: int, start: int) -> Perm:
        img = list(range(1, n + 1))
        a = start
        while a + 1 <= n:
            img[a - 1], img[a] = a + 1, a
            a += 2
        return tuple(img)

    first = VPermPrefix(tuple(build(n, 2) for n in range(1, m + 1)))
    second = VPermPrefix(tuple(build(n, 1) for n in range(1, m + 1)))
    return first, second


def cycle_path(s: VPermPrefix, a: int, steps: int) -> list[PathPrefix]:
    """Paths at levels ``1..M`` following the cycle of ``a``.

    Levels ``N >= a`` iterate ``sigma_N`` directly. Levels below ``a`` project the
    level-``a`` path, so they are shorter and truncated.
    """
    m = s.level
    if not 1 <= a <= m:
        raise InvalidState(f"start state {a} not in [1, {m}]")
    out: dict[int, PathPrefix] = {}
    for n in range(a, m + 1):
        p = s[n]
        xs = [a]
        for _ in range(steps - 1):
            xs.append(p[xs[-1] - 1])
        out[n] = PathPrefix(n, tuple(xs), Tail.TRUNCATED)
    for n in range(a - 1, 0, -1):
        out[n] = project_path(out[a], n)
    return [out[n] for n in range(1, m + 1)]
