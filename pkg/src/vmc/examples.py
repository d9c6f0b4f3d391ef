"""Exact constructors for the standard virtual chains used as fixtures.

* ladder: from state ``a >= 2`` step down to ``a - 1`` with probability
  ``q_{a-1}``, otherwise jump to the top; from 1 always jump to the top.
  Arises from the age process of a renewal process.
* splitting: two deterministic descents (odd and even states) chosen by a fair
  coin at each restart from the top.
* uniform: every state of ``1..N`` equally likely at each step.
* reflecting walk: nearest-neighbour walk holding with probability 1/2 at 1
  and at the top.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .compat import D2Vector, d2_vertices, delta_vid, psi, psi_inverse
from .initdist import VidPrefix, point_mass
from .rational import ONE, ZERO, RatLike, rat
from .transmat import TruncatedTM, VtmPrefix


@dataclass(frozen=True)
class LadderParams:
    """Step-down probabilities ``q_1, q_2, ...``, each in ``(0, 1]``."""

    q: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        q = tuple(rat(x) for x in self.q)
        object.__setattr__(self, "q", q)
        if any(not 0 < x <= 1 for x in q):
            raise ValueError("ladder rates must lie in (0, 1]")

    @classmethod
    def harmonic(cls, m: int) -> "LadderParams":
        """``q_N = 1/(N+1)``."""
        return cls(tuple(Fraction(1, n + 1) for n in range(1, m)))

    @classmethod
    def constant(cls, value: RatLike, m: int) -> "LadderParams":
        return cls((rat(value),) * max(m - 1, 0))


def ladder_matrix(q: Sequence[Fraction], n: int) -> TruncatedTM:
    blk = [[ZERO] * n for _ in range(n)]
    blk[0][n - 1] = ONE
    for a in range(2, n + 1):
        qa = q[a - 2]
        blk[a - 1][a - 2] += qa
        blk[a - 1][n - 1] += 1 - qa
    return TruncatedTM.from_block(blk)


def ladder_vtm(q: LadderParams, m: int) -> VtmPrefix:
    if len(q.q) < m - 1:
        raise ValueError(f"need {m - 1} rates for level {m}, got {len(q.q)}")
    return VtmPrefix(tuple(ladder_matrix(q.q, n) for n in range(1, m + 1)))


def ladder_normalisers(q: LadderParams, m: int) -> tuple[Fraction, ...]:
    """``z_N = sum_{a=1}^N prod_{M<a} 1/q_M`` for ``N = 1..m``."""
    out, acc, prod = [], ZERO, ONE
    for a in range(1, m + 1):
        if a >= 2:
            prod /= q.q[a - 2]
        acc += prod
        out.append(acc)
    return tuple(out)


def ladder_equilibrium(q: LadderParams, n: int) -> tuple[Fraction, ...]:
    """Closed-form equilibrium at level ``n``: weights ``prod_{M<a} 1/q_M``, normalised."""
    z = ladder_normalisers(q, n)[-1]
    out, prod = [ZERO], ONE
    for a in range(1, n + 1):
        if a >= 2:
            prod /= q.q[a - 2]
        out.append(prod / z)
    return tuple(out)


def top_start_vid(m: int) -> VidPrefix:
    """``nu_N`` concentrated on ``N`` at every level."""
    return VidPrefix(tuple(point_mass(n, n) for n in range(1, m + 1)))


def splitting_matrix(n: int) -> TruncatedTM:
    if n == 1:
        return TruncatedTM.identity(1)
    h = Fraction(1, 2)
    blk = [[ZERO] * n for _ in range(n)]
    for a in (1, 2):
        blk[a - 1][n - 2] += h
        blk[a - 1][n - 1] += h
    for a in range(3, n + 1):
        blk[a - 1][a - 3] = ONE
    return TruncatedTM.from_block(blk)


def splitting_vtm_vid(m: int) -> tuple[VtmPrefix, VidPrefix]:
    k = VtmPrefix(tuple(splitting_matrix(n) for n in range(1, m + 1)))
    dists = [point_mass(1, 1)]
    for n in range(2, m + 1):
        dists.append(tuple(Fraction(1, 2) if a in (n - 1, n) else ZERO for a in range(n + 1)))
    return k, VidPrefix(tuple(dists))


def uniform_vtm(m: int) -> VtmPrefix:
    return VtmPrefix(tuple(TruncatedTM.from_block([[Fraction(1, n)] * n for _ in range(n)]) for n in range(1, m + 1)))


def walk_matrix(n: int) -> TruncatedTM:
    if n == 1:
        return TruncatedTM.identity(1)
    h = Fraction(1, 2)
    blk = [[ZERO] * n for _ in range(n)]
    blk[0][0] = h
    blk[n - 1][n - 1] += h
    for a in range(n):
        if a > 0:
            blk[a][a - 1] += h
        if a < n - 1:
            blk[a][a + 1] += h
    return TruncatedTM.from_block(blk)


def reflecting_walk_vtm(m: int) -> VtmPrefix:
    return VtmPrefix(tuple(walk_matrix(n) for n in range(1, m + 1)))


def identity_vtm(m: int) -> VtmPrefix:
    return VtmPrefix(tuple(TruncatedTM.identity(n) for n in range(1, m + 1)))


@dataclass(frozen=True)
class ExtremeCandidate:
    """A vertex of the truncated parameter polytope and the marginals it maps to.

    ``delta_state`` is ``M`` when the vertex is the parameter of the point-mass
    family started at ``M``; ``reaches_top`` marks vertices whose pattern
    continues up to the truncation level and so may be the truncation of a limit
    of such families.
    """

    p: D2Vector
    vid: VidPrefix
    delta_state: int | None
    reaches_top: bool


def classify_extremes(k: VtmPrefix, length: int | None = None) -> list[ExtremeCandidate]:
    """Vertices of the truncated polytope for ``k``, labelled by point-mass family."""
    big_a = k.level if length is None else length
    kt = k.truncate(big_a)
    deltas = {psi_inverse(delta_vid(kt, m), kt).p: m for m in range(big_a + 1)}
    out = []
    for v in d2_vertices(kt, big_a):
        out.append(ExtremeCandidate(v, psi(kt, v), deltas.get(v.p), v.p[-1] == 1))
    return out


def classify_extremes_ladder(q: LadderParams, m: int) -> list[ExtremeCandidate]:
    return classify_extremes(ladder_vtm(q, m))


def ladder_patterns(m: int) -> list[D2Vector]:
    """Staircases ``1^{N+1} 0^{m-N}`` for ``N = 0..m``; the last one is all ones."""
    return [D2Vector((ONE,) * (n + 1) + (ZERO,) * (m - n)) for n in range(m + 1)]


def transposition_pair() -> tuple[TruncatedTM, TruncatedTM]:
    """Two 3-state permutation matrices, each projecting to the identity, whose average does not."""
    first = TruncatedTM.from_block([[1, 0, 0], [0, 0, 1], [0, 1, 0]])
    second = TruncatedTM.from_block([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    return first, second
