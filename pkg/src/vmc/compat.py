"""Compatibility of initial distributions with virtual transition matrices.

Marginals ``nu`` and matrices ``K`` are compatible when deleting the top state
from the level-``N+1`` chain started from ``nu_{N+1}`` gives the level-``N``
chain started from ``nu_N``. In coefficient form, with ``C_N`` the excursion
return law of ``coefficients``::

    nu_N(a) = nu_{N+1}(a) + nu_{N+1}(N+1) * C_N(a)

Compatible marginals for a fixed ``K`` are parametrised linearly by sequences
``p_0 = 1, p_1, p_2, ...`` with ``p_a = nu_a(a)`` (``psi`` and ``psi_inverse``).
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import InsufficientData, InvalidLevel, LevelMismatch, NotCompatible, NotInD2, TooLarge
from .initdist import VidPrefix, point_mass
from .pathspace import PathPrefix
from .rational import ONE, ZERO, RatLike, fmt, rat, solve
from .transmat import VtmPrefix


@dataclass(frozen=True)
class CompatibilityFailure:
    level: int
    a: int
    expected: Fraction
    actual: Fraction


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    failure: CompatibilityFailure | None = None

    def __bool__(self) -> bool:
        return self.ok


def compatibility_rhs(nu: VidPrefix, k: VtmPrefix, n: int) -> tuple[Fraction, ...]:
    """Level-``n`` marginal implied by ``nu_{n+1}`` and ``K``."""
    c = k.coefficients(n)
    nxt = nu[n + 1]
    return tuple(nxt[a] + nxt[n + 1] * c[a] for a in range(n + 1))


def check_compatibility(nu: VidPrefix, k: VtmPrefix) -> CompatibilityReport:
    if nu.level != k.level:
        raise LevelMismatch(f"marginals have level {nu.level}, matrices have level {k.level}")
    for n in range(1, k.level):
        rhs = compatibility_rhs(nu, k, n)
        for a in range(n + 1):
            if nu[n][a] != rhs[a]:
                return CompatibilityReport(False, CompatibilityFailure(n, a, nu[n][a], rhs[a]))
    return CompatibilityReport(True)


def delta_vid(k: VtmPrefix, m: int) -> VidPrefix:
    """Compatible marginals that sit at state ``m`` from level ``m`` upward."""
    if not 0 <= m <= k.level:
        raise InvalidLevel(f"state {m} not in [0, {k.level}]")
    dists: dict[int, tuple[Fraction, ...]] = {n: point_mass(n, m) for n in range(max(m, 1), k.level + 1)}
    for n in range(m - 1, 0, -1):
        c = k.coefficients(n)
        nxt = dists[n + 1]
        dists[n] = tuple(nxt[a] + nxt[n + 1] * c[a] for a in range(n + 1))
    return VidPrefix(tuple(dists[n] for n in range(1, k.level + 1)))


@dataclass(frozen=True)
class D2Vector:
    """Finite prefix ``p_0..p_A`` of a parameter sequence with ``p_0 = 1``."""

    p: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        p = tuple(rat(x) for x in self.p)
        object.__setattr__(self, "p", p)
        if not p or p[0] != 1:
            raise NotInD2("p_0 must equal 1")
        if any(x < 0 or x > 1 for x in p):
            raise NotInD2("entries must lie in [0, 1]")

    @property
    def length(self) -> int:
        """Index of the last entry, ``A``."""
        return len(self.p) - 1

    def mix(self, other: "D2Vector", alpha: RatLike) -> "D2Vector":
        alpha = rat(alpha)
        return D2Vector(tuple((1 - alpha) * x + alpha * y for x, y in zip(self.p, other.p)))

    def to_json(self) -> dict[str, Any]:
        return {"p": [fmt(x) for x in self.p]}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "D2Vector":
        return cls(tuple(rat(x) for x in data["p"]))


def d2_slack(k: VtmPrefix, p: D2Vector) -> tuple[Fraction, ...]:
    """``p_a - sum_{M=a}^{A-1} C_M(a) p_{M+1}`` for ``a`` in ``0..A``.

    Nonnegative slack at every index is all a finite prefix can certify; the
    infinite tail of the defining sums is unknown.
    """
    big_a = p.length
    if k.level < big_a:
        raise LevelMismatch(f"need matrices up to level {big_a}, have {k.level}")
    coeffs = [k.coefficients(m) for m in range(big_a)]
    return tuple(
        p.p[a] - sum((coeffs[m][a] * p.p[m + 1] for m in range(a, big_a)), ZERO) for a in range(big_a + 1)
    )


def is_prefix_consistent(k: VtmPrefix, p: D2Vector) -> bool:
    return all(s >= 0 for s in d2_slack(k, p))


def psi(k: VtmPrefix, p: D2Vector) -> VidPrefix:
    """Compatible marginals ``nu_1..nu_A`` with ``nu_a(a) = p_a``."""
    big_a = p.length
    if big_a < 1:
        raise InvalidLevel("need at least p_0 and p_1")
    slack = d2_slack(k, p)
    bad = next((a for a, s in enumerate(slack) if s < 0), None)
    if bad is not None:
        raise NotInD2(f"truncated inequality fails at a={bad} (slack {slack[bad]})")
    coeffs = [k.coefficients(m) for m in range(big_a)]
    dists = []
    for n in range(1, big_a + 1):
        dists.append(
            tuple(p.p[a] - sum((coeffs[m][a] * p.p[m + 1] for m in range(a, n)), ZERO) for a in range(n + 1))
        )
    return VidPrefix(tuple(dists))


def psi_inverse(nu: VidPrefix, k: VtmPrefix) -> D2Vector:
    rep = check_compatibility(nu, k)
    if not rep.ok:
        f = rep.failure
        assert f is not None
        raise NotCompatible(f"compatibility fails at level {f.level}, state {f.a}")
    return D2Vector((ONE,) + tuple(nu[a][a] for a in range(1, nu.level + 1)))


@dataclass(frozen=True)
class CanonicalData:
    vid: VidPrefix
    vtm: VtmPrefix

    def __post_init__(self) -> None:
        if not check_compatibility(self.vid, self.vtm):
            raise NotCompatible("canonical data must be compatible")


def truncated_law(nu: VidPrefix, k: VtmPrefix, n: int, horizon: int) -> dict[tuple[int, ...], Fraction]:
    """Exact law of ``(X_N(0), ..., X_N(T-1))``; zero-probability tuples are omitted."""
    if not 1 <= n <= min(nu.level, k.level):
        raise InvalidLevel(f"level {n} out of range")
    if horizon < 1:
        raise InvalidLevel("horizon must be >= 1")
    if (n + 1) ** horizon > 2**20:
        raise TooLarge(f"{(n + 1) ** horizon} cylinders exceed the enumeration budget")
    kn = k[n]
    law: dict[tuple[int, ...], Fraction] = {(a,): nu[n][a] for a in range(n + 1) if nu[n][a] != 0}
    for _ in range(horizon - 1):
        nxt: dict[tuple[int, ...], Fraction] = {}
        for path, pr in law.items():
            row = kn.rows[path[-1]]
            for b, kb in enumerate(row):
                if kb != 0:
                    nxt[path + (b,)] = pr * kb
        law = nxt
    return law


@dataclass
class CanonicalDataEstimate:
    """Empirical initial laws and transition frequencies, level by level.

    ``nu_counts[N-1][a]`` counts replicas with ``X_N(0) = a``.
    ``trans_counts[N-1][a, b]`` counts observed ``a -> b`` steps at level ``N``.
    Rows that were never visited are NaN in ``k_hat`` and listed in ``unknown``.
    """

    level: int
    replicas: int
    nu_counts: list[np.ndarray]
    trans_counts: list[np.ndarray]
    nu_hat: list[np.ndarray] = field(init=False)
    nu_se: list[np.ndarray] = field(init=False)
    k_hat: list[np.ndarray] = field(init=False)
    k_se: list[np.ndarray] = field(init=False)
    unknown: list[tuple[int, int]] = field(init=False)

    def __post_init__(self) -> None:
        r = self.replicas
        self.nu_hat = [c / r for c in self.nu_counts]
        self.nu_se = [np.sqrt(h * (1 - h) / r) for h in self.nu_hat]
        self.k_hat, self.k_se, self.unknown = [], [], []
        for n, t in enumerate(self.trans_counts, start=1):
            rows = t.sum(axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                kh = t / rows[:, None]
                se = np.sqrt(kh * (1 - kh) / rows[:, None])
            self.k_hat.append(kh)
            self.k_se.append(se)
            self.unknown.extend((n, a) for a in range(n + 1) if rows[a] == 0)

    def row_count(self, n: int, a: int) -> int:
        return int(self.trans_counts[n - 1][a].sum())

    def require(self, n: int, a: int) -> np.ndarray:
        """Estimated row ``a`` at level ``n``; raises if the row was never visited."""
        if (n, a) in self.unknown:
            raise InsufficientData(f"state {a} never visited at level {n}")
        return self.k_hat[n - 1][a]

    def to_json(self) -> dict[str, Any]:
        def clean(x: np.ndarray) -> list:
            return [[None if np.isnan(v) else float(v) for v in row] for row in np.atleast_2d(x)]

        return {
            "level": self.level,
            "replicas": self.replicas,
            "nu_hat": [[float(v) for v in h] for h in self.nu_hat],
            "nu_se": [[float(v) for v in h] for h in self.nu_se],
            "k_hat": [clean(h) for h in self.k_hat],
            "k_se": [clean(h) for h in self.k_se],
            "unknown": [list(u) for u in self.unknown],
        }


Sampler = Callable[[np.random.Generator], Sequence[PathPrefix]]

CHUNK = 4096


def _count(samples: Iterable[Sequence[PathPrefix]], m: int):
    nu = [np.zeros(n + 1, dtype=np.int64) for n in range(1, m + 1)]
    tr = [np.zeros((n + 1, n + 1), dtype=np.int64) for n in range(1, m + 1)]
    for fam in samples:
        for n in range(1, m + 1):
            xs = fam[n - 1].entries
            if not xs:
                continue
            nu[n - 1][xs[0]] += 1
            t = tr[n - 1]
            for a, b in zip(xs, xs[1:]):
                t[a, b] += 1
    return nu, tr


def _count_chunk(sampler: Sampler, m: int, size: int, seed: np.random.SeedSequence):
    rng = np.random.default_rng(seed)
    return _count((sampler(rng) for _ in range(size)), m)


def estimate_from_samples(samples: Sequence[Sequence[PathPrefix]], level: int) -> CanonicalDataEstimate:
    """Estimate from coupled samples that were already drawn."""
    if level < 1 or not samples:
        raise InvalidLevel("need a positive level and at least one sample")
    nu, tr = _count(samples, level)
    return CanonicalDataEstimate(level, len(samples), nu, tr)


def canonical_data_estimate(
    sampler: Sampler, level: int, replicas: int, seed: int, threads: int = 1
) -> CanonicalDataEstimate:
    """Estimate initial laws and transition matrices from coupled samples.

    The sampler returns paths for levels ``1..level`` (its own horizon sets the
    number of steps). Replicas are split into fixed-size chunks, each with its
    own spawned random stream, and merged in chunk order, so the result depends
    only on ``seed`` and not on ``threads``.
    """
    if level < 1 or replicas < 1:
        raise InvalidLevel("level and replicas must be positive")
    sizes = [min(CHUNK, replicas - i) for i in range(0, replicas, CHUNK)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, seeds))
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda j: _count_chunk(sampler, level, *j), jobs))
    else:
        parts = [_count_chunk(sampler, level, *j) for j in jobs]
    nu = [sum(p[0][n] for p in parts) for n in range(level)]
    tr = [sum(p[1][n] for p in parts) for n in range(level)]
    return CanonicalDataEstimate(level, replicas, nu, tr)


def d2_vertices(k: VtmPrefix, length: int) -> list[D2Vector]:
    """Vertices of the truncated parameter polytope, by exhaustive active-set search.

    Variables are ``p_1..p_A``. Constraints are ``0 <= p_a <= 1`` and the
    truncated inequalities of ``d2_slack`` (including ``a = 0``). Exact; only
    meant for ``A <= 5``.
    """
    big_a = length
    if big_a > 5:
        raise TooLarge("vertex enumeration is limited to length 5")
    coeffs = [k.coefficients(m) for m in range(big_a)]
    # each constraint is (row over p_1..p_A, rhs) meaning row . p <= rhs
    cons: list[tuple[tuple[Fraction, ...], Fraction]] = []
    for i in range(big_a):
        cons.append((tuple(ONE if j == i else ZERO for j in range(big_a)), ONE))
        cons.append((tuple(-ONE if j == i else ZERO for j in range(big_a)), ZERO))
    for a in range(big_a):
        row = [ZERO] * big_a
        if a >= 1:
            row[a - 1] -= 1
        for m in range(a, big_a):
            row[m] += coeffs[m][a]
        # p_0 = 1 moves to the right-hand side
        cons.append((tuple(row), ONE if a == 0 else ZERO))

    found: set[tuple[Fraction, ...]] = set()
    for subset in itertools.combinations(range(len(cons)), big_a):
        a_mat = [cons[i][0] for i in subset]
        b_vec = [cons[i][1] for i in subset]
        try:
            x = solve(a_mat, b_vec)
        except ValueError:
            continue
        if all(sum((r[j] * x[j] for j in range(big_a)), ZERO) <= rhs for r, rhs in cons):
            found.add(x)
    return [D2Vector((ONE,) + x) for x in sorted(found, reverse=True)]
