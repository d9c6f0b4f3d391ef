"""Monte Carlo samplers.

Two ways to produce coupled families ``X_1, X_2, ...``:

* run the top-level chain and delete excursions (``sample_vmc``);
* run a continuous-time process past a sequence of levels ``L_1, L_2, ...`` and
  record which level it hits next (``extract_hitting_chain``). The renewal age
  process and the two-sided splitting process are simulated event by event,
  since both move linearly between random events.

Random streams come from ``numpy.random.SeedSequence``; replicas are grouped
into fixed-size chunks with one spawned stream each, so results depend only on
the seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence, TypeVar

import numpy as np

from .compat import check_compatibility
from .errors import InvalidLevel, InvalidState, NotCompatible
from .initdist import VidPrefix
from .pathspace import PathPrefix, Tail, project_path
from .transmat import TruncatedTM, VtmPrefix
from .vperm import VPermPrefix

T = TypeVar("T")

CHUNK = 4096


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for ``(seed, stream)``; the same pair always gives the same draws."""
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(stream + 1)[stream])


def run_replicas(fn: Callable[[np.random.Generator], T], replicas: int, seed: int, threads: int = 1) -> list[T]:
    """Call ``fn`` once per replica; output order and values are independent of ``threads``."""
    sizes = [min(CHUNK, replicas - i) for i in range(0, replicas, CHUNK)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def chunk(job: tuple[int, np.random.SeedSequence]) -> list[T]:
        rng = np.random.default_rng(job[1])
        return [fn(rng) for _ in range(job[0])]

    jobs = list(zip(sizes, seeds))
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(chunk, jobs))
    else:
        parts = [chunk(j) for j in jobs]
    return [r for p in parts for r in p]


def _as_float_matrix(k: TruncatedTM | np.ndarray) -> np.ndarray:
    return k.to_float() if isinstance(k, TruncatedTM) else np.asarray(k, dtype=float)


def sample_mc_batch(
    nu: Sequence[Any], k: TruncatedTM | np.ndarray, steps: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """``size`` independent paths of length ``steps``, one per row."""
    mat = _as_float_matrix(k)
    cum = np.cumsum(mat, axis=1)
    cum[:, -1] = 1.0
    init = np.cumsum(np.array([float(x) for x in nu]))
    init[-1] = 1.0
    out = np.empty((size, steps), dtype=np.int64)
    state = np.searchsorted(init, rng.random(size), side="right")
    out[:, 0] = state
    for t in range(1, steps):
        u = rng.random(size)
        state = (u[:, None] >= cum[state]).sum(axis=1)
        out[:, t] = state
    return out


def sample_mc(nu: Sequence[Any], k: TruncatedTM | np.ndarray, steps: int, rng: np.random.Generator) -> PathPrefix:
    """One path of length ``steps``; absorbed tail once the cemetery is reached."""
    mat = _as_float_matrix(k)
    xs = sample_mc_batch(nu, mat, steps, 1, rng)[0]
    return path_from_array(xs, mat.shape[0] - 1)


def path_from_array(xs: Sequence[int], level: int) -> PathPrefix:
    xs = [int(x) for x in xs]
    if 0 in xs:
        return PathPrefix(level, tuple(xs[: xs.index(0) + 1]), Tail.ABSORBED)
    return PathPrefix(level, tuple(xs), Tail.TRUNCATED)


@dataclass(frozen=True)
class CoupledSample:
    """Paths for levels ``1..N_top``; ``paths[N-1]`` is level ``N``."""

    paths: tuple[PathPrefix, ...]

    def __getitem__(self, i: int) -> PathPrefix:
        return self.paths[i]

    def __len__(self) -> int:
        return len(self.paths)

    def level(self, n: int) -> PathPrefix:
        return self.paths[n - 1]


def coupled_from_top(top: PathPrefix) -> CoupledSample:
    m = top.level
    assert m is not None
    return CoupledSample(tuple(project_path(top, n) for n in range(1, m)) + (top,))


def sample_vmc(
    nu: VidPrefix, k: VtmPrefix, steps: int, rng: np.random.Generator, check: bool = True
) -> CoupledSample:
    """Simulate the top level and project downward."""
    if check and not check_compatibility(nu, k):
        raise NotCompatible("initial marginals are not compatible with the matrices")
    return coupled_from_top(sample_mc(nu[nu.level], k.top(), steps, rng))


@dataclass
class HitTrajectory:
    """Marked hitting times. ``complete`` certifies that no hits occur after the last one."""

    times: list[float] = field(default_factory=list)
    marks: list[int] = field(default_factory=list)
    complete: bool = False
    sides: list[int] = field(default_factory=list)

    def append(self, t: float, mark: int) -> None:
        self.times.append(t)
        self.marks.append(mark)


def extract_hitting_chain(tr: HitTrajectory, n: int, steps: int | None = None) -> PathPrefix:
    """Successive levels among ``L_1..L_n`` hit by the trajectory.

    The chain is sent to the cemetery after the last hit only if the trajectory
    certifies that no further hits occur.
    """
    if n < 1:
        raise InvalidLevel("level must be >= 1")
    xs = [a for a in tr.marks if a <= n]
    if steps is not None and len(xs) >= steps:
        return PathPrefix(n, tuple(xs[:steps]), Tail.TRUNCATED)
    if tr.complete:
        return PathPrefix(n, tuple(xs) + (0,), Tail.ABSORBED)
    return PathPrefix(n, tuple(xs), Tail.TRUNCATED)


def coupled_from_hits(tr: HitTrajectory, n_top: int, steps: int | None = None) -> CoupledSample:
    """Chains for levels ``1..n_top`` from one trajectory.

    For transition estimates pass ``steps`` and make the trajectory long enough
    that every level reaches it. A trajectory stopped after a fixed number of
    hits cuts coarse levels at a point that depends on their next transition,
    which biases the counts toward transitions that need fewer fine-level hits.
    """
    return CoupledSample(tuple(extract_hitting_chain(tr, n, steps) for n in range(1, n_top + 1)))


@dataclass(frozen=True)
class RenewalConfig:
    """Inter-arrival law and decreasing levels ``L_1 > L_2 > ... > 0``.

    ``law`` is one of ``("exponential", rate)``, ``("geometric", step, prob)``
    for ``step * Geometric(prob)`` on ``{step, 2 step, ...}``, or
    ``("table", values, probs)`` for a finite law.
    """

    law: tuple
    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        lv = tuple(float(x) for x in self.levels)
        object.__setattr__(self, "levels", lv)
        if any(x <= 0 for x in lv) or any(b >= a for a, b in zip(lv, lv[1:])):
            raise ValueError("levels must be positive and strictly decreasing")
        if self.law[0] not in ("exponential", "geometric", "table"):
            raise ValueError(f"unknown inter-arrival law {self.law[0]!r}")

    @classmethod
    def dyadic_exponential(cls, n: int, rate: float = 1.0) -> "RenewalConfig":
        return cls(("exponential", rate), tuple(2.0 ** -(a + 1) for a in range(n)))

    def survival(self, x: float) -> float:
        """``1 - F(x)``."""
        kind = self.law[0]
        if kind == "exponential":
            return math.exp(-self.law[1] * x)
        if kind == "geometric":
            step, prob = self.law[1], self.law[2]
            return (1 - prob) ** math.floor(x / step + 1e-12)
        values, probs = self.law[1], self.law[2]
        return float(sum(p for v, p in zip(values, probs) if v > x))

    def draw(self, rng: np.random.Generator) -> float:
        kind = self.law[0]
        if kind == "exponential":
            return float(rng.exponential(1.0 / self.law[1]))
        if kind == "geometric":
            return float(self.law[1] * rng.geometric(self.law[2]))
        return float(rng.choice(self.law[1], p=self.law[2]))

    def hold_rates(self) -> list[float]:
        """``q_a = (1 - F(L_a)) / (1 - F(L_{a+1}))`` for ``a = 1..n-1``."""
        lv = self.levels
        return [self.survival(lv[a]) / self.survival(lv[a + 1]) for a in range(len(lv) - 1)]


def simulate_renewal(
    cfg: RenewalConfig,
    horizon: float,
    n: int,
    rng: np.random.Generator,
    max_hits: int | None = None,
) -> HitTrajectory:
    """Hits of ``L_1..L_n`` by the age process of a renewal process started afresh at time 0.

    Between renewals the age grows at unit speed, so an inter-arrival of length
    ``Z`` hits exactly the ``L_a < Z``, in the order ``L_n, L_{n-1}, ...``. A
    threshold reached exactly at a renewal does not count.
    """
    if n > len(cfg.levels):
        raise InvalidLevel(f"config defines {len(cfg.levels)} levels, asked for {n}")
    lv = cfg.levels
    tr = HitTrajectory()
    start = 0.0
    while start <= horizon:
        z = cfg.draw(rng)
        for a in range(n, 0, -1):
            if lv[a - 1] >= z:
                break
            t = start + lv[a - 1]
            if t > horizon:
                return tr
            tr.append(t, a)
            if max_hits is not None and len(tr.marks) >= max_hits:
                return tr
        start += z
    return tr


@dataclass(frozen=True)
class SplittingConfig:
    """Distances ``l_1 > l_2 > ... > 0`` in ``(0, 1)``.

    Odd levels sit at ``+l_{(N+1)/2}`` and even levels at ``-l_{N/2}``.
    """

    distances: tuple[float, ...]

    def __post_init__(self) -> None:
        d = tuple(float(x) for x in self.distances)
        object.__setattr__(self, "distances", d)
        if any(not 0 < x < 1 for x in d) or any(b >= a for a, b in zip(d, d[1:])):
            raise ValueError("distances must lie in (0, 1) and strictly decrease")

    @classmethod
    def dyadic(cls, pairs: int) -> "SplittingConfig":
        return cls(tuple(2.0 ** -(j + 1) for j in range(pairs)))

    def position(self, a: int) -> float:
        if a % 2 == 1:
            return self.distances[(a + 1) // 2 - 1]
        return -self.distances[a // 2 - 1]


def simulate_splitting(
    cfg: SplittingConfig,
    horizon: float,
    n: int,
    rng: np.random.Generator,
    max_hits: int | None = None,
    coin: Callable[[np.random.Generator], int] | None = None,
) -> HitTrajectory:
    """Hits of ``L_1..L_n`` by the process that leaves 0 toward a random side at unit speed.

    On reaching ``+1`` or ``-1`` it restarts at 0 with a fresh fair coin. The
    side chosen for each excursion is recorded in ``sides`` (+1 or -1).
    """
    if (n + 1) // 2 > len(cfg.distances):
        raise InvalidLevel(f"config covers {2 * len(cfg.distances)} levels, asked for {n}")
    flip = coin or (lambda r: 1 if r.random() < 0.5 else -1)
    odd = [a for a in range(n, 0, -1) if a % 2 == 1]
    even = [a for a in range(n, 0, -1) if a % 2 == 0]
    tr = HitTrajectory()
    start = 0.0
    while start <= horizon:
        side = flip(rng)
        tr.sides.append(side)
        for a in odd if side > 0 else even:
            t = start + abs(cfg.position(a))
            if t > horizon:
                return tr
            tr.append(t, a)
            if max_hits is not None and len(tr.marks) >= max_hits:
                return tr
        start += 1.0
    return tr


def simulate_circle_rotation(s: VPermPrefix, a: int, steps: int) -> HitTrajectory:
    """Deterministic hits following the cycle of ``a`` under the top permutation.

    One hit per unit of time; the circle geometry is replaced by its cyclic order.
    """
    m = s.level
    if not 1 <= a <= m:
        raise InvalidState(f"start state {a} not in [1, {m}]")
    top = s[m]
    tr = HitTrajectory()
    x = a
    for t in range(steps):
        tr.append(float(t), x)
        x = top[x - 1]
    return tr


def transition_counts(paths: Sequence[PathPrefix], n: int) -> np.ndarray:
    out = np.zeros((n + 1, n + 1), dtype=np.int64)
    for p in paths:
        xs = p.entries
        for a, b in zip(xs, xs[1:]):
            out[a, b] += 1
    return out


def project_batch(xs: np.ndarray, n: int, length: int) -> tuple[np.ndarray, np.ndarray]:
    """First ``length`` entries ``<= n`` of each row, and a mask of rows that had enough."""
    keep = xs <= n
    rank = np.cumsum(keep, axis=1)
    ok = rank[:, -1] >= length
    out = np.zeros((xs.shape[0], length), dtype=np.int64)
    for j in range(length):
        hit = keep & (rank == j + 1)
        idx = hit.argmax(axis=1)
        out[:, j] = xs[np.arange(xs.shape[0]), idx]
    return out, ok
