"""Exact transition matrices with a cemetery, and their projections to lower levels.

A level-``N`` matrix is ``(N+1) x (N+1)`` over states ``0..N``; state 0 is the
absorbing cemetery, so row 0 is always ``(1, 0, ..., 0)``. All entries are
``Fraction`` values and every check is an exact equality.

Projecting a level-``N+1`` matrix to level ``N`` watches the chain only while it
is in ``{0..N}``. With ``p`` the holding probability of the top state, an
excursion to the top returns to ``b`` with probability ``K(top, b) / (1 - p)``.
If ``p == 1`` the excursion never returns, and the chain is sent to the cemetery.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidLevel, InvalidMatrix, LevelMismatch
from .rational import ONE, ZERO, RatLike, fmt, rat, solve

Matrix = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class TruncatedTM:
    """Row-stochastic matrix on ``{0..N}`` with an absorbing cemetery at 0."""

    rows: Matrix

    def __post_init__(self) -> None:
        rows = tuple(tuple(rat(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n < 2:
            raise InvalidMatrix("a transition matrix needs at least states 0 and 1")
        for i, r in enumerate(rows):
            if len(r) != n:
                raise InvalidMatrix(f"row {i} has length {len(r)}, expected {n}")
            if any(x < 0 or x > 1 for x in r):
                raise InvalidMatrix(f"row {i} has an entry outside [0, 1]")
            if sum(r) != 1:
                raise InvalidMatrix(f"row {i} sums to {sum(r)}, not 1")
        if rows[0][0] != 1:
            raise InvalidMatrix("the cemetery row must be (1, 0, ..., 0)")

    @property
    def level(self) -> int:
        return len(self.rows) - 1

    def __getitem__(self, ab: tuple[int, int]) -> Fraction:
        a, b = ab
        return self.rows[a][b]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[RatLike]]) -> "TruncatedTM":
        return cls(tuple(tuple(rat(x) for x in r) for r in rows))

    @classmethod
    def from_block(cls, block: Sequence[Sequence[RatLike]]) -> "TruncatedTM":
        """Build from the states ``1..N`` block; missing row mass goes to the cemetery."""
        n = len(block)
        rows: list[tuple[Fraction, ...]] = [(ONE,) + (ZERO,) * n]
        for r in block:
            vals = tuple(rat(x) for x in r)
            if len(vals) != n:
                raise InvalidMatrix("block must be square")
            rows.append((ONE - sum(vals, ZERO),) + vals)
        return cls(tuple(rows))

    @classmethod
    def identity(cls, n: int) -> "TruncatedTM":
        return cls(tuple(tuple(ONE if i == j else ZERO for j in range(n + 1)) for i in range(n + 1)))

    def block(self) -> Matrix:
        """Entries among states ``1..N``."""
        return tuple(r[1:] for r in self.rows[1:])

    # block form accessors, with states split as cemetery | 1..N-1 | top
    def top_hold(self) -> Fraction:
        return self.rows[-1][-1]

    def to_top(self) -> tuple[Fraction, ...]:
        """Column of transitions from ``1..N-1`` into the top state."""
        return tuple(r[-1] for r in self.rows[1:-1])

    def from_top(self) -> tuple[Fraction, ...]:
        """Row of transitions from the top state into ``1..N-1``."""
        return self.rows[-1][1:-1]

    def top_to_cemetery(self) -> Fraction:
        return self.rows[-1][0]

    def to_cemetery(self) -> tuple[Fraction, ...]:
        return tuple(r[0] for r in self.rows[1:-1])

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.rows], dtype=float)

    def is_doubly_stochastic(self) -> bool:
        """True iff the ``1..N`` block has unit row and column sums."""
        blk = self.block()
        n = len(blk)
        return all(sum(r) == 1 for r in blk) and all(sum(blk[i][j] for i in range(n)) == 1 for j in range(n))

    def mix(self, other: "TruncatedTM", alpha: Fraction) -> "TruncatedTM":
        """``(1 - alpha) * self + alpha * other``."""
        if other.level != self.level:
            raise LevelMismatch("cannot mix matrices of different levels")
        alpha = rat(alpha)
        return TruncatedTM(
            tuple(
                tuple((1 - alpha) * x + alpha * y for x, y in zip(r, s))
                for r, s in zip(self.rows, other.rows)
            )
        )

    def to_json(self, convention: str = "pmatrix") -> dict[str, Any]:
        if convention == "pmatrix":
            rows = self.rows
        elif convention == "bracket":
            if any(r[0] != 0 for r in self.rows[1:]):
                raise InvalidMatrix("bracket form drops the cemetery column, which carries mass here")
            rows = self.block()
        else:
            raise ValueError(f"unknown convention {convention!r}")
        return {"level": self.level, "convention": convention, "rows": [[fmt(x) for x in r] for r in rows]}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "TruncatedTM":
        conv = data.get("convention", "pmatrix")
        if conv == "bracket":
            k = cls.from_block(data["rows"])
        elif conv == "pmatrix":
            k = cls.from_rows(data["rows"])
        else:
            raise ValueError(f"unknown convention {conv!r}")
        if "level" in data and int(data["level"]) != k.level:
            raise InvalidMatrix(f"declared level {data['level']} but matrix has level {k.level}")
        return k

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["from"] + [str(b) for b in range(self.level + 1)])
        for a, r in enumerate(self.rows):
            w.writerow([a] + [fmt(x) for x in r])
        return buf.getvalue()


def project_tm(k: TruncatedTM) -> TruncatedTM:
    """One-step projection from level ``N+1`` to level ``N``."""
    n = k.level - 1
    if n < 1:
        raise InvalidLevel("cannot project a level-1 matrix")
    top = n + 1
    p = k[top, top]
    rows = []
    if p == 1:
        for a in range(n + 1):
            r = list(k.rows[a][: n + 1])
            r[0] += k[a, top]
            rows.append(tuple(r))
    else:
        back = tuple(k[top, b] / (1 - p) for b in range(n + 1))
        for a in range(n + 1):
            up = k[a, top]
            rows.append(tuple(k[a, b] + up * back[b] for b in range(n + 1)))
    return TruncatedTM(tuple(rows))


def project_tm_to(k: TruncatedTM, n: int) -> TruncatedTM:
    if not 1 <= n <= k.level:
        raise InvalidLevel(f"target level {n} not in [1, {k.level}]")
    while k.level > n:
        k = project_tm(k)
    return k


def censor_tm(k: TruncatedTM, n: int) -> TruncatedTM:
    """Projection to level ``n`` in one step, removing all states above ``n`` at once.

    For upper states ``x`` that can reach ``0..n``, the landing laws ``h(x, .)``
    solve ``h = K_{up,low} + K_{up,up} h``; the other upper states never come
    back and their mass is sent to the cemetery. Independent of the level-by-level
    rule in ``project_tm``.
    """
    m = k.level
    if not 1 <= n <= m:
        raise InvalidLevel(f"target level {n} not in [1, {m}]")
    upper = range(n + 1, m + 1)
    live: set[int] = set()
    grew = True
    while grew:
        grew = False
        for x in upper:
            if x not in live and any(k[x, y] != 0 and (y <= n or y in live) for y in range(m + 1)):
                live.add(x)
                grew = True
    order = sorted(live)
    lhs = [[(ONE if x == y else ZERO) - k[x, y] for y in order] for x in order]
    land = {x: [ZERO] * (n + 1) for x in upper}
    if order:
        for b in range(n + 1):
            sol = solve(lhs, [k[x, b] for x in order])
            for x, v in zip(order, sol):
                land[x][b] = v
    rows = [tuple(ONE if b == 0 else ZERO for b in range(n + 1))]
    for a in range(1, n + 1):
        row = [k[a, b] + sum((k[a, x] * land[x][b] for x in upper), ZERO) for b in range(n + 1)]
        row[0] = ONE - sum(row[1:], ZERO)
        rows.append(tuple(row))
    return TruncatedTM(tuple(rows))


@dataclass(frozen=True)
class ProjectionCoefficients:
    """Return law of an excursion above ``N``: ``c[a]`` for ``a`` in ``0..N``."""

    level: int
    c: tuple[Fraction, ...]

    def __getitem__(self, a: int) -> Fraction:
        return self.c[a]


def coefficients(k_next: TruncatedTM) -> ProjectionCoefficients:
    """Where the chain lands in ``{0..N}`` after leaving the top state of a level-``N+1`` matrix."""
    top = k_next.level
    p = k_next[top, top]
    if p == 1:
        c = (ONE,) + (ZERO,) * (top - 1)
    else:
        c = tuple(k_next[top, a] / (1 - p) for a in range(top))
    return ProjectionCoefficients(top - 1, c)


@dataclass(frozen=True)
class ProjectivityFailure:
    level: int
    a: int
    b: int
    expected: Fraction
    actual: Fraction


@dataclass(frozen=True)
class ProjectivityReport:
    ok: bool
    failure: ProjectivityFailure | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_vtm_prefix(ms: Sequence[TruncatedTM]) -> ProjectivityReport:
    """Check ``project_tm(ms[N]) == ms[N-1]`` exactly; ``ms[i]`` has level ``i + 1``."""
    ms = list(ms)
    for i, m in enumerate(ms):
        if m.level != i + 1:
            raise LevelMismatch(f"matrix at position {i} has level {m.level}, expected {i + 1}")
    for i in range(1, len(ms)):
        got = project_tm(ms[i])
        want = ms[i - 1]
        if got != want:
            for a in range(want.level + 1):
                for b in range(want.level + 1):
                    if got[a, b] != want[a, b]:
                        return ProjectivityReport(False, ProjectivityFailure(want.level, a, b, want[a, b], got[a, b]))
    return ProjectivityReport(True)


@dataclass(frozen=True)
class VtmPrefix:
    """Levels ``1..M`` of a virtual transition matrix; ``matrices[N-1]`` is level ``N``."""

    matrices: tuple[TruncatedTM, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrices", tuple(self.matrices))
        if not self.matrices:
            raise InvalidLevel("a prefix needs at least one level")
        rep = check_vtm_prefix(self.matrices)
        if not rep.ok:
            f = rep.failure
            assert f is not None
            raise InvalidMatrix(
                f"not projective at level {f.level}, entry ({f.a},{f.b}): expected {f.expected}, got {f.actual}"
            )

    @property
    def level(self) -> int:
        return len(self.matrices)

    def __getitem__(self, n: int) -> TruncatedTM:
        """Matrix at level ``n`` (1-based)."""
        if not 1 <= n <= self.level:
            raise InvalidLevel(f"level {n} not in [1, {self.level}]")
        return self.matrices[n - 1]

    def __iter__(self) -> Iterator[TruncatedTM]:
        """Matrices from level 1 upward."""
        return iter(self.matrices)

    def __len__(self) -> int:
        return self.level

    def top(self) -> TruncatedTM:
        return self.matrices[-1]

    def truncate(self, m: int) -> "VtmPrefix":
        if not 1 <= m <= self.level:
            raise InvalidLevel(f"level {m} not in [1, {self.level}]")
        return VtmPrefix(self.matrices[:m])

    def coefficients(self, n: int) -> ProjectionCoefficients:
        """Excursion return law above level ``n``, for ``0 <= n < M``."""
        if n == 0:
            # the level-0 chain is the cemetery alone, so every excursion lands at 0
            return ProjectionCoefficients(0, (ONE,))
        return coefficients(self[n + 1])

    def mix(self, other: "VtmPrefix", alpha: Fraction) -> tuple[TruncatedTM, ...]:
        """Levelwise convex combination; returned unchecked since it may not be projective."""
        if other.level != self.level:
            raise LevelMismatch("prefixes have different levels")
        return tuple(a.mix(b, alpha) for a, b in zip(self.matrices, other.matrices))

    def to_json(self, convention: str = "pmatrix") -> dict[str, Any]:
        return {"matrices": [m.to_json(convention) for m in self.matrices]}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "VtmPrefix":
        return cls(tuple(TruncatedTM.from_json(m) for m in data["matrices"]))


def lift_classical_tm(k: TruncatedTM, up_to: int | None = None) -> VtmPrefix:
    """Levels ``1..M`` of the virtual matrix induced by a level-``M`` matrix.

    With ``up_to > M`` the matrix is padded with fixed states above ``M``, which is
    how a finite matrix sits inside the larger state spaces.
    """
    m = k.level
    up_to = m if up_to is None else up_to
    if up_to < 1:
        raise InvalidLevel("up_to must be >= 1")
    if up_to > m:
        k = pad_identity(k, up_to)
        m = up_to
    mats = [k]
    while mats[-1].level > 1:
        mats.append(project_tm(mats[-1]))
    mats.reverse()
    return VtmPrefix(tuple(mats[:up_to]))


def pad_identity(k: TruncatedTM, n: int) -> TruncatedTM:
    """Extend ``k`` to level ``n`` by adding fixed (self-looping) states."""
    if n < k.level:
        raise InvalidLevel("cannot pad to a lower level")
    rows = [tuple(r) + (ZERO,) * (n - k.level) for r in k.rows]
    for a in range(k.level + 1, n + 1):
        rows.append(tuple(ONE if b == a else ZERO for b in range(n + 1)))
    return TruncatedTM(tuple(rows))
