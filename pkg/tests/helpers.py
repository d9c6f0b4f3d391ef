"""Random generators and hypothesis strategies shared by the tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from vmc.transmat import TruncatedTM, VtmPrefix, lift_classical_tm


def random_rows(n: int, rng: np.random.Generator, zero_prob: float = 0.3, max_weight: int = 6) -> list[list[Fraction]]:
    """Full ``(n+1) x (n+1)`` stochastic matrix with cemetery row ``e_0`` and sparse integer weights."""
    rows = [[Fraction(int(j == 0)) for j in range(n + 1)]]
    for _ in range(n):
        w = [0 if rng.random() < zero_prob else int(rng.integers(1, max_weight + 1)) for _ in range(n + 1)]
        if rng.random() < 0.5:
            w[0] = 0
        if sum(w) == 0:
            w[int(rng.integers(0, n + 1))] = 1
        rows.append([Fraction(x, sum(w)) for x in w])
    return rows


def random_tm(n: int, rng: np.random.Generator, **kw) -> TruncatedTM:
    return TruncatedTM.from_rows(random_rows(n, rng, **kw))


def random_vtm(m: int, rng: np.random.Generator, **kw) -> VtmPrefix:
    return lift_classical_tm(random_tm(m, rng, **kw))


def as_lists(k: TruncatedTM) -> list[list[Fraction]]:
    return [list(r) for r in k.rows]


def fractions(max_den: int = 12, lo: int = 0, hi: int = 1) -> st.SearchStrategy[Fraction]:
    return st.builds(
        lambda d, t: Fraction(lo) + Fraction(t, d) * (hi - lo),
        st.integers(1, max_den),
        st.integers(0, max_den),
    ).filter(lambda x: lo <= x <= hi)


@st.composite
def stochastic_matrices(draw, min_level: int = 1, max_level: int = 5) -> TruncatedTM:
    n = draw(st.integers(min_level, max_level))
    rows = [[Fraction(int(j == 0)) for j in range(n + 1)]]
    for _ in range(n):
        w = draw(st.lists(st.integers(0, 5), min_size=n + 1, max_size=n + 1).filter(lambda v: sum(v) > 0))
        rows.append([Fraction(x, sum(w)) for x in w])
    return TruncatedTM.from_rows(rows)


@st.composite
def vtm_prefixes(draw, min_level: int = 1, max_level: int = 5) -> VtmPrefix:
    return lift_classical_tm(draw(stochastic_matrices(min_level, max_level)))


@st.composite
def monotone_marginals(draw, max_level: int = 6):
    """Nested marginals ``nu_N(a) >= nu_{N+1}(a)`` built from random hold ratios."""
    from vmc.initdist import MarkovianInitialLaw, marginals

    m = draw(st.integers(1, max_level))
    j1 = draw(fractions(6))
    ratios = tuple(tuple(draw(fractions(6)) for _ in range(n + 1)) for n in range(1, m))
    return marginals(MarkovianInitialLaw((1 - j1, j1), ratios))


def random_point_mass_mixture(k: VtmPrefix, rng: np.random.Generator):
    """Random convex combination of the point-mass families of ``k``; always compatible."""
    from vmc.compat import delta_vid

    weights = [int(rng.integers(0, 5)) for _ in range(k.level + 1)]
    if not any(weights):
        weights[int(rng.integers(0, k.level + 1))] = 1
    tot = sum(weights)
    nu, acc = None, Fraction(0)
    for m, w in enumerate(weights):
        if not w:
            continue
        d = delta_vid(k, m)
        acc += Fraction(w, tot)
        nu = d if nu is None else nu.mix(d, Fraction(w, tot) / acc)
    return nu
