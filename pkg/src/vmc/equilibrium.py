"""Equilibrium and stationary families for virtual transition matrices.

An equilibrium family solves ``nu_N K_N = nu_N`` level by level. It is
stationary when, in addition, the levels are compatible with ``K``, which is
what makes the whole virtual chain a stationary process.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .compat import check_compatibility
from .errors import NotErgodic
from .initdist import VidPrefix
from .rational import ZERO, rank, solve
from .transmat import TruncatedTM, VtmPrefix


@dataclass(frozen=True)
class ChainClassification:
    level: int
    irreducible_on_1n: bool
    aperiodic: bool
    period: int
    no_mass_to_cemetery: bool


def _reachable(adj: list[list[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def classify(k: TruncatedTM) -> ChainClassification:
    """Reachability and period of the chain restricted to ``1..N``.

    The period is the gcd of ``dist(u) + 1 - dist(v)`` over edges ``u -> v``
    inside the class of state 1, with ``dist`` the BFS depth from state 1.
    """
    n = k.level
    adj = [[b - 1 for b in range(1, n + 1) if k[a, b] > 0] for a in range(1, n + 1)]
    rev = [[a for a in range(n) if b in adj[a]] for b in range(n)]
    no_leak = all(k[a, 0] == 0 for a in range(1, n + 1))
    fwd = _reachable(adj, 0)
    bwd = _reachable(rev, 0)
    cls = fwd & bwd
    strongly = len(cls) == n
    depth = {0: 0}
    q = deque([0])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v in cls and v not in depth:
                depth[v] = depth[u] + 1
                q.append(v)
    period = 0
    for u in cls:
        for v in adj[u]:
            if v in cls:
                period = gcd(period, depth[u] + 1 - depth[v])
    period = abs(period) if period else 1
    return ChainClassification(n, strongly and no_leak, period == 1, period, no_leak)


def _fixed_point(k: TruncatedTM) -> tuple[Fraction, ...]:
    n = k.level
    blk = k.block()
    # (K^T - I) nu = 0 with the last equation replaced by normalisation
    a = [[blk[j][i] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    if rank(a) != n - 1:
        raise NotErgodic(f"fixed-point space at level {n} is not one-dimensional", n)
    a[-1] = [Fraction(1)] * n
    b = [ZERO] * (n - 1) + [Fraction(1)]
    return solve(a, b)


def equilibrium_dist(k: TruncatedTM, require_aperiodic: bool = False) -> tuple[Fraction, ...]:
    """The unique ``nu`` on ``0..N`` with ``nu K = nu`` and ``nu(0) = 0``.

    Irreducibility on ``1..N`` already makes the fixed point unique; periodic
    chains are accepted unless ``require_aperiodic`` is set.
    """
    c = classify(k)
    if not c.irreducible_on_1n:
        raise NotErgodic(f"level {k.level} is not irreducible on 1..N", k.level)
    if require_aperiodic and not c.aperiodic:
        raise NotErgodic(f"level {k.level} has period {c.period}", k.level)
    nu = (ZERO,) + _fixed_point(k)
    check = tuple(sum((nu[a] * k[a, b] for a in range(k.level + 1)), ZERO) for b in range(k.level + 1))
    if check != nu:
        raise AssertionError("fixed-point solve failed verification")
    return nu


@dataclass(frozen=True)
class EquilibriumFamily:
    dists: tuple[tuple[Fraction, ...], ...]
    is_vd: bool

    def as_vid(self) -> VidPrefix:
        return VidPrefix(self.dists)


def equilibrium_family(k: VtmPrefix, require_aperiodic: bool = False) -> EquilibriumFamily:
    dists = tuple(equilibrium_dist(k[n], require_aperiodic) for n in range(1, k.level + 1))
    monotone = all(dists[n][a] >= dists[n + 1][a] for n in range(len(dists) - 1) for a in range(n + 2))
    return EquilibriumFamily(dists, monotone)


@dataclass(frozen=True)
class StationaryResult:
    """Either the stationary family or the first equation it violates."""

    vid: VidPrefix | None
    reason: str = ""
    level: int | None = None
    state: int | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None

    @property
    def empty(self) -> bool:
        return self.vid is None


def stationary_family(k: VtmPrefix, require_aperiodic: bool = False) -> StationaryResult:
    fam = equilibrium_family(k, require_aperiodic)
    if not fam.is_vd:
        for n in range(len(fam.dists) - 1):
            for a in range(n + 2):
                if fam.dists[n][a] < fam.dists[n + 1][a]:
                    return StationaryResult(
                        None, "not monotone", n + 1, a, fam.dists[n][a], fam.dists[n + 1][a]
                    )
    nu = fam.as_vid()
    rep = check_compatibility(nu, k)
    if not rep.ok:
        f = rep.failure
        assert f is not None
        return StationaryResult(None, "not compatible", f.level, f.a, f.expected, f.actual)
    return StationaryResult(nu)
