"""Doubly stochastic virtual matrices and when segments between them stay doubly stochastic.

A virtual matrix is doubly stochastic when every level's ``1..N`` block is. The
set of such matrices is not convex: the levelwise average of two of them need
not be projective. For a pair ``K, K'`` the segment ``(1 - alpha) K + alpha K'``
is either entirely inside the set or meets it only at its endpoints. It is
inside iff at every level ``N`` one of these holds:

* (i)   ``K_{N+1}`` holds its top state with probability 1;
* (ii)  the same for ``K'``;
* (iii) the normalised columns into the top state agree;
* (iv)  the normalised rows out of the top state agree.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegenerateDenominator, LevelMismatch, NotDoublyStochastic
from .rational import ONE, ZERO, RatLike, rat
from .transmat import ProjectivityReport, TruncatedTM, VtmPrefix, check_vtm_prefix, lift_classical_tm, project_tm
from .vperm import VPermPrefix, inverse, permutation_matrix


class Condition(enum.Enum):
    TOP_FIXED_FIRST = "i"
    TOP_FIXED_SECOND = "ii"
    SAME_ENTRY_COLUMN = "iii"
    SAME_EXIT_ROW = "iv"


class Segment(enum.Enum):
    FULL = "FullSegment"
    ENDPOINTS = "EndpointsOnly"


def check_ds(k: TruncatedTM) -> None:
    if not k.is_doubly_stochastic():
        raise NotDoublyStochastic(f"level {k.level} block is not doubly stochastic")


def ds_project(k: TruncatedTM) -> TruncatedTM:
    """Projection of a doubly stochastic matrix using the block rule ``A + u v^T / (1 - p)``."""
    check_ds(k)
    n = k.level - 1
    blk = k.block()
    a_blk = [list(r[:n]) for r in blk[:n]]
    u = [r[n] for r in blk[:n]]
    v = list(blk[n][:n])
    p = blk[n][n]
    if p != 1:
        for i in range(n):
            for j in range(n):
                a_blk[i][j] += u[i] * v[j] / (1 - p)
    out = TruncatedTM.from_block(a_blk)
    check_ds(out)
    return out


def excursion_products(k_next: TruncatedTM) -> tuple[tuple[Fraction, ...], ...]:
    """``K(a, top) K(top, b) / (1 - p)`` on ``1..N``; all zero when ``p = 1``."""
    top = k_next.level
    p = k_next[top, top]
    n = top - 1
    if p == 1:
        return tuple((ZERO,) * n for _ in range(n))
    return tuple(tuple(k_next[a, top] * k_next[top, b] / (1 - p) for b in range(1, n + 1)) for a in range(1, n + 1))


def entry_column(k_next: TruncatedTM) -> tuple[Fraction, ...] | None:
    """``K(a, top) / (1 - p)`` for ``a`` in ``1..N``, or None when ``p = 1``."""
    top = k_next.level
    p = k_next[top, top]
    if p == 1:
        return None
    return tuple(k_next[a, top] / (1 - p) for a in range(1, top))


def exit_row(k_next: TruncatedTM) -> tuple[Fraction, ...] | None:
    """``K(top, b) / (1 - p)`` for ``b`` in ``1..N``, or None when ``p = 1``."""
    top = k_next.level
    p = k_next[top, top]
    if p == 1:
        return None
    return tuple(k_next[top, b] / (1 - p) for b in range(1, top))


def level_conditions(k_next: TruncatedTM, k2_next: TruncatedTM) -> frozenset[Condition]:
    """Conditions (i)-(iv) that hold for the step from level ``N+1`` to ``N``."""
    out = set()
    top = k_next.level
    if k_next[top, top] == 1:
        out.add(Condition.TOP_FIXED_FIRST)
    if k2_next[top, top] == 1:
        out.add(Condition.TOP_FIXED_SECOND)
    c1, c2 = entry_column(k_next), entry_column(k2_next)
    if c1 is not None and c2 is not None:
        if c1 == c2:
            out.add(Condition.SAME_ENTRY_COLUMN)
        if exit_row(k_next) == exit_row(k2_next):
            out.add(Condition.SAME_EXIT_ROW)
    return frozenset(out)


ORDER = (Condition.TOP_FIXED_FIRST, Condition.TOP_FIXED_SECOND, Condition.SAME_ENTRY_COLUMN, Condition.SAME_EXIT_ROW)


@dataclass(frozen=True)
class PairConvexityReport:
    """Per level ``N`` (``1..M-1``): the conditions that hold and the first of them in order."""

    conditions: tuple[frozenset[Condition], ...]
    products_first: tuple[tuple[tuple[Fraction, ...], ...], ...] = field(repr=False, default=())
    products_second: tuple[tuple[tuple[Fraction, ...], ...], ...] = field(repr=False, default=())

    @property
    def verdicts(self) -> tuple[Condition | None, ...]:
        return tuple(next((c for c in ORDER if c in s), None) for s in self.conditions)

    @property
    def segment(self) -> Segment:
        return Segment.FULL if all(self.conditions) else Segment.ENDPOINTS

    @property
    def first_failing_level(self) -> int | None:
        return next((n for n, s in enumerate(self.conditions, start=1) if not s), None)

    def to_json(self) -> dict:
        return {
            "segment": self.segment.value,
            "first_failing_level": self.first_failing_level,
            "levels": [
                {"level": n, "verdict": None if v is None else v.value, "holding": sorted(c.value for c in s)}
                for n, (v, s) in enumerate(zip(self.verdicts, self.conditions), start=1)
            ],
        }


def _check_pair(k: VtmPrefix, k2: VtmPrefix) -> None:
    if k.level != k2.level:
        raise LevelMismatch(f"levels differ: {k.level} vs {k2.level}")
    for m in k.matrices + k2.matrices:
        check_ds(m)


def classify_pair(k: VtmPrefix, k2: VtmPrefix) -> PairConvexityReport:
    _check_pair(k, k2)
    conds, f1, f2 = [], [], []
    for n in range(1, k.level):
        conds.append(level_conditions(k[n + 1], k2[n + 1]))
        f1.append(excursion_products(k[n + 1]))
        f2.append(excursion_products(k2[n + 1]))
    return PairConvexityReport(tuple(conds), tuple(f1), tuple(f2))


def convex_combination_in_b(k: VtmPrefix, k2: VtmPrefix, alpha: RatLike) -> bool:
    """Whether the levelwise combination is again a (doubly stochastic) virtual matrix."""
    _check_pair(k, k2)
    alpha = rat(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    mixed = k.mix(k2, alpha)
    return check_vtm_prefix(mixed).ok and all(m.is_doubly_stochastic() for m in mixed)


def combination_report(k: VtmPrefix, k2: VtmPrefix, alpha: RatLike) -> ProjectivityReport:
    return check_vtm_prefix(k.mix(k2, rat(alpha)))


@dataclass(frozen=True)
class MiracleCheck:
    difference: Fraction
    product: Fraction
    constant: Fraction


def miracle_constant(z: Fraction, z2: Fraction, alpha: Fraction) -> Fraction:
    """Factor relating the two sides of the identity, ``a (1-a) (1-z)(1-z') / (1 - (1-a) z - a z')``."""
    return alpha * (1 - alpha) * (1 - z) * (1 - z2) / (1 - (1 - alpha) * z - alpha * z2)


def miracle_identity_check(
    x: RatLike, x2: RatLike, y: RatLike, y2: RatLike, z: RatLike, z2: RatLike, alpha: RatLike
) -> MiracleCheck:
    """Compare mixed excursion products with the mixture of excursion products.

    Returns the difference ``(1-a) x y/(1-z) + a x' y'/(1-z') - X Y / (1 - Z)``,
    with ``X, Y, Z`` the ``alpha``-mixtures, and the product
    ``(x/(1-z) - x'/(1-z')) (y/(1-z) - y'/(1-z'))``. The difference is the
    product times ``miracle_constant``.
    """
    x, x2, y, y2, z, z2, alpha = (rat(t) for t in (x, x2, y, y2, z, z2, alpha))
    denom = 1 - (1 - alpha) * z - alpha * z2
    if z == 1 or z2 == 1 or denom == 0:
        raise DegenerateDenominator("1 - z, 1 - z' and 1 - (1-a) z - a z' must be nonzero")
    lhs = (1 - alpha) * x * y / (1 - z) + alpha * x2 * y2 / (1 - z2)
    rhs = ((1 - alpha) * x + alpha * x2) * ((1 - alpha) * y + alpha * y2) / denom
    prod = (x / (1 - z) - x2 / (1 - z2)) * (y / (1 - z) - y2 / (1 - z2))
    return MiracleCheck(lhs - rhs, prod, miracle_constant(z, z2, alpha))


# kernel witnesses


def cycle_witness(n: int) -> TruncatedTM:
    """Level ``n+1`` permutation matrix of the cycle ``1 -> 2 -> n+1 -> 1``."""
    top = n + 1
    img = list(range(1, top + 1))
    img[0], img[1], img[top - 1] = 2, top, 1
    return permutation_matrix(tuple(img))


def half_witness(n: int) -> TruncatedTM:
    """Level ``n+1`` witness whose normalised entry column and exit row both point at state 2 only.

    Row 1 and the top row split evenly between 2 and the top; rows ``2..n-1``
    shift up by one; row ``n`` goes to 1.
    """
    top = n + 1
    h = Fraction(1, 2)
    blk = [[ZERO] * top for _ in range(top)]
    blk[0][1] = blk[0][top - 1] = h
    for a in range(2, n):
        blk[a - 1][a] = ONE
    blk[n - 1][0] = ONE
    blk[top - 1][1] = blk[top - 1][top - 1] = h
    k = TruncatedTM.from_block(blk)
    check_ds(k)
    return k


def uniform_matrix(n: int) -> TruncatedTM:
    return TruncatedTM.from_block([[Fraction(1, n)] * n for _ in range(n)])


def two_state(theta: RatLike) -> TruncatedTM:
    t = rat(theta)
    return TruncatedTM.from_block([[t, 1 - t], [1 - t, t]])


@dataclass(frozen=True)
class KernelVerdict:
    """Result of the witness suite.

    ``excluded_at`` is the first level ``N`` at which some witness produces an
    endpoints-only segment, with that witness's name. ``None`` means no witness
    excludes the input up to its truncation level.
    """

    excluded_at: int | None
    witness: str | None = None
    report: PairConvexityReport | None = None

    @property
    def in_kernel(self) -> bool:
        return self.excluded_at is None


def witnesses(level: int, m: int) -> list[tuple[str, VtmPrefix]]:
    """Witness prefixes (padded to level ``m``) used to probe level ``level``."""
    if level == 1:
        return [(f"two_state({t})", lift_classical_tm(two_state(t), m)) for t in (ZERO, Fraction(1, 2), Fraction(1, 3))]
    return [
        ("cycle", lift_classical_tm(cycle_witness(level), m)),
        ("half", lift_classical_tm(half_witness(level), m)),
        ("uniform", lift_classical_tm(uniform_matrix(level + 1), m)),
    ]


def kernel_witness_suite(k: VtmPrefix) -> KernelVerdict:
    """Look for a witness that forms an endpoints-only segment with ``k``.

    Such a witness shows ``k`` is not in the kernel, the set of elements whose
    segment to every other element stays inside. Levels are probed bottom-up.
    At a level with non-fixed top state, the three witnesses have distinct
    normalised values ``0, 1, 1/N`` at the entries ``(1, N+1)`` and ``(N+1, 2)``,
    so at least one of them differs from ``k`` in both entries.
    """
    for m in k.matrices:
        check_ds(m)
    for n in range(1, k.level):
        for name, w in witnesses(n, k.level):
            rep = classify_pair(k, w)
            if rep.segment is Segment.ENDPOINTS:
                return KernelVerdict(rep.first_failing_level, name, rep)
    return KernelVerdict(None)


def is_two_state_lift(k: VtmPrefix) -> bool:
    """Whether every level from 3 on holds its top state, so ``k`` is the lift of its level-2 matrix.

    These prefixes pass the witness suite: every 2-state doubly stochastic
    matrix has equal normalised entry column and exit row, so condition (iii)
    holds at level 1 against any partner.
    """
    return all(k[n][n, n] == 1 for n in range(3, k.level + 1))


def pigeonhole_witness(k: VtmPrefix, n: int) -> str | None:
    """Name of a witness that must fail against ``k`` at level ``n >= 2``, or None if the top is fixed."""
    kn = k[n + 1]
    top = n + 1
    p = kn[top, top]
    if p == 1:
        return None
    col = kn[1, top] / (1 - p)
    row = kn[top, 2] / (1 - p)
    for name, val in (("cycle", ZERO), ("half", ONE), ("uniform", Fraction(1, n))):
        if val != col and val != row:
            return name
    raise AssertionError("three distinct values cannot all be hit by two entries")


def vperm_segment_conditions(s: VPermPrefix, s2: VPermPrefix) -> PairConvexityReport:
    """Conditions (i)-(iv) computed from the permutations alone.

    At level ``N`` the top element is ``N + 1``: it is fixed, or its preimages
    agree, or its images agree.
    """
    if s.level != s2.level:
        raise LevelMismatch(f"levels differ: {s.level} vs {s2.level}")
    conds = []
    for n in range(1, s.level):
        top = n + 1
        p, q = s[top], s2[top]
        c = set()
        if p[top - 1] == top:
            c.add(Condition.TOP_FIXED_FIRST)
        if q[top - 1] == top:
            c.add(Condition.TOP_FIXED_SECOND)
        if p[top - 1] != top and q[top - 1] != top:
            if inverse(p)[top - 1] == inverse(q)[top - 1]:
                c.add(Condition.SAME_ENTRY_COLUMN)
            if p[top - 1] == q[top - 1]:
                c.add(Condition.SAME_EXIT_ROW)
        conds.append(frozenset(c))
    return PairConvexityReport(tuple(conds))


def random_ds_matrix(n: int, rng: np.random.Generator, terms: int | None = None, max_weight: int = 5) -> TruncatedTM:
    """Convex combination of random permutation matrices with random integer weights."""
    terms = int(rng.integers(1, 4)) if terms is None else terms
    weights = [int(rng.integers(1, max_weight + 1)) for _ in range(terms)]
    total = sum(weights)
    blk = [[ZERO] * n for _ in range(n)]
    for w in weights:
        perm = rng.permutation(n)
        for i, j in enumerate(perm):
            blk[i][int(j)] += Fraction(w, total)
    return TruncatedTM.from_block(blk)


def random_ds_prefix(m: int, rng: np.random.Generator, terms: int | None = None) -> VtmPrefix:
    return lift_classical_tm(random_ds_matrix(m, rng, terms))
