"""Fast exact invariant checks run by ``vmc selftest``."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

import numpy as np

from .birkhoff import Segment, is_two_state_lift, classify_pair, kernel_witness_suite, miracle_identity_check, random_ds_prefix
from .compat import D2Vector, check_compatibility, delta_vid, psi, psi_inverse
from .equilibrium import stationary_family
from .examples import LadderParams, ladder_equilibrium, ladder_vtm, reflecting_walk_vtm, splitting_vtm_vid, transposition_pair, uniform_vtm
from .initdist import law_from_marginals, marginals, virtual_uniform
from .monotone import brute_force_vertices, staircases
from .transmat import TruncatedTM, VtmPrefix, check_vtm_prefix, lift_classical_tm, project_tm, project_tm_to
from .vperm import alternating_pair, random_prefix, vtm_of


def _random_tm(n: int, rng: np.random.Generator) -> TruncatedTM:
    rows = []
    for _ in range(n):
        w = [int(x) for x in rng.integers(0, 4, size=n + 1)]
        if sum(w) == 0:
            w[0] = 1
        rows.append([Fraction(x, sum(w)) for x in w])
    return TruncatedTM.from_rows([[Fraction(1)] + [Fraction(0)] * n] + rows)


def _projectivity(rng: np.random.Generator) -> bool:
    for _ in range(20):
        k = _random_tm(int(rng.integers(3, 6)), rng)
        stepwise = k
        while stepwise.level > 1:
            stepwise = project_tm(stepwise)
            if project_tm_to(k, stepwise.level) != stepwise:
                return False
    return True


def _examples_valid(rng: np.random.Generator) -> bool:
    k, nu = splitting_vtm_vid(6)
    return (
        bool(check_compatibility(nu, k))
        and all(bool(check_vtm_prefix(v.matrices)) for v in (uniform_vtm(5), reflecting_walk_vtm(5)))
        and isinstance(ladder_vtm(LadderParams.harmonic(6), 6), VtmPrefix)
    )


def _psi_round_trip(rng: np.random.Generator) -> bool:
    k = ladder_vtm(LadderParams.harmonic(5), 5)
    for m in range(6):
        nu = delta_vid(k, m)
        if psi(k, psi_inverse(nu, k)) != nu:
            return False
    return psi_inverse(psi(k, D2Vector((1, Fraction(1, 2), Fraction(1, 3), 0, 0, 0))), k).p[1] == Fraction(1, 2)


def _marginals_round_trip(rng: np.random.Generator) -> bool:
    u = virtual_uniform(6)
    return marginals(law_from_marginals(u)) == u


def _equilibrium(rng: np.random.Generator) -> bool:
    q = LadderParams(tuple(Fraction(1, n + 1) for n in range(1, 6)))
    from .equilibrium import equilibrium_dist

    ok = all(equilibrium_dist(ladder_vtm(q, 6)[n]) == ladder_equilibrium(q, n) for n in range(1, 7))
    return ok and stationary_family(ladder_vtm(q, 6)).empty and not stationary_family(uniform_vtm(5)).empty


def _non_convexity(rng: np.random.Generator) -> bool:
    first, second = transposition_pair()
    half = Fraction(1, 2)
    avg = project_tm(first.mix(second, half))
    return avg.block() == ((Fraction(3, 4), Fraction(1, 4)), (Fraction(1, 4), Fraction(3, 4))) and (
        classify_pair(lift_classical_tm(first), lift_classical_tm(second)).segment is Segment.ENDPOINTS
    )


def _miracle(rng: np.random.Generator) -> bool:
    for _ in range(50):
        x, x2, y, y2 = (Fraction(int(rng.integers(0, 5)), 8) for _ in range(4))
        z, z2 = (Fraction(int(rng.integers(0, 7)), 8) for _ in range(2))
        c = miracle_identity_check(x, x2, y, y2, z, z2, Fraction(1, 3))
        if c.difference != c.constant * c.product:
            return False
    return True


def _kernel(rng: np.random.Generator) -> bool:
    from .examples import identity_vtm

    if not kernel_witness_suite(identity_vtm(4)).in_kernel:
        return False
    excluded = [uniform_vtm(4), reflecting_walk_vtm(4)] + [random_ds_prefix(4, rng, terms=2) for _ in range(5)]
    return all(
        kernel_witness_suite(k).excluded_at is not None
        for k in excluded
        if not is_two_state_lift(k)
    )


def _vperm(rng: np.random.Generator) -> bool:
    for _ in range(10):
        s = random_prefix(5, rng)
        v = vtm_of(s)
        if any(project_tm(v[n + 1]) != v[n] for n in range(1, 5)):
            return False
    s, s2 = alternating_pair(6)
    walk = reflecting_walk_vtm(6)
    return all(m == walk[n] for n, m in enumerate(vtm_of(s).mix(vtm_of(s2), Fraction(1, 2)), start=1))


def _staircases(rng: np.random.Generator) -> bool:
    return all(brute_force_vertices(n, p) == staircases(n, p) for n in range(1, 5) for p in (False, True))


CHECKS: list[tuple[str, Callable[[np.random.Generator], bool]]] = [
    ("projectivity", _projectivity),
    ("examples", _examples_valid),
    ("psi round trip", _psi_round_trip),
    ("marginals round trip", _marginals_round_trip),
    ("equilibrium", _equilibrium),
    ("non-convexity", _non_convexity),
    ("excursion product identity", _miracle),
    ("kernel witnesses", _kernel),
    ("virtual permutations", _vperm),
    ("staircases", _staircases),
]


def run_selftest(seed: int = 0) -> list[tuple[str, bool]]:
    rng = np.random.default_rng(seed)
    return [(name, bool(fn(rng))) for name, fn in CHECKS]
