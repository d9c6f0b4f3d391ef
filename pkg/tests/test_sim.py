import math
from fractions import Fraction as F

import numpy as np
import pytest

from vmc.errors import InvalidLevel, NotCompatible
from vmc.examples import LadderParams, ladder_vtm, splitting_vtm_vid, top_start_vid, walk_matrix
from vmc.initdist import virtual_uniform
from vmc.pathspace import PathPrefix, Tail, project_path
from vmc.sim import (
    HitTrajectory,
    RenewalConfig,
    SplittingConfig,
    coupled_from_hits,
    extract_hitting_chain,
    make_rng,
    path_from_array,
    project_batch,
    run_replicas,
    sample_mc,
    sample_mc_batch,
    sample_vmc,
    simulate_circle_rotation,
    simulate_renewal,
    simulate_splitting,
    transition_counts,
)
from vmc.transmat import TruncatedTM
from vmc.vperm import cycle_path, from_top


def test_deterministic_cycle():
    k = TruncatedTM.from_block([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    p = sample_mc([0, 1, 0, 0], k, 7, make_rng(0))
    assert p.entries == (1, 2, 3, 1, 2, 3, 1)
    assert p.tail is Tail.TRUNCATED


def test_absorbed_tail():
    k = TruncatedTM.from_rows([[1, 0], [1, 0]])
    p = sample_mc([0, 1], k, 5, make_rng(0))
    assert p.entries == (1, 0) and p.tail is Tail.ABSORBED


def test_path_from_array():
    assert path_from_array([2, 1, 0, 0], 2) == PathPrefix(2, (2, 1, 0), Tail.ABSORBED)


def test_walk_step_frequencies_within_three_se():
    xs = sample_mc_batch([0, 0, 1, 0], walk_matrix(3), 40, 5000, make_rng(7))
    counts = transition_counts([PathPrefix(3, tuple(r)) for r in xs[:500]], 3)
    assert counts[:, 0].sum() == 0
    full = np.zeros((4, 4), dtype=np.int64)
    np.add.at(full, (xs[:, :-1].ravel(), xs[:, 1:].ravel()), 1)
    exact = walk_matrix(3).to_float()
    for a in range(1, 4):
        n = full[a].sum()
        for b in range(1, 4):
            p = exact[a, b]
            se = math.sqrt(p * (1 - p) / n) if 0 < p < 1 else 0.0
            assert abs(full[a, b] / n - p) <= 3 * se + 1e-12


def test_run_replicas_independent_of_threads():
    fn = lambda rng: float(rng.random())
    a = run_replicas(fn, 10_000, seed=5, threads=1)
    b = run_replicas(fn, 10_000, seed=5, threads=4)
    assert a == b and len(a) == 10_000
    assert run_replicas(fn, 100, seed=6) != a[:100]


def test_make_rng_streams():
    assert make_rng(1, 0).random() == make_rng(1, 0).random()
    assert make_rng(1, 0).random() != make_rng(1, 1).random()


def test_renewal_hits_descend_from_the_smallest_level():
    cfg = RenewalConfig(("table", [0.3], [1.0]), (0.4, 0.2, 0.1))
    tr = simulate_renewal(cfg, 1.0, 3, make_rng(0))
    # every inter-arrival is 0.3, passing L_3 = 0.1 and L_2 = 0.2 but not L_1 = 0.4
    assert tr.marks == [3, 2, 3, 2, 3, 2, 3]
    assert np.allclose(tr.times, [0.1, 0.2, 0.4, 0.5, 0.7, 0.8, 1.0])


def test_renewal_hold_rates_are_survival_ratios():
    cfg = RenewalConfig.dyadic_exponential(5)
    q = cfg.hold_rates()
    for a in range(4):
        assert math.isclose(q[a], math.exp(-(2.0 ** -(a + 1) - 2.0 ** -(a + 2))))


def test_renewal_rejects_missing_levels():
    with pytest.raises(InvalidLevel):
        simulate_renewal(RenewalConfig.dyadic_exponential(3), 1.0, 4, make_rng(0))


def test_extraction_commutes_with_projection():
    cfg = RenewalConfig.dyadic_exponential(6)
    rng = make_rng(3)
    for _ in range(200):
        tr = simulate_renewal(cfg, 5.0, 6, rng)
        for n in range(1, 6):
            hi = extract_hitting_chain(tr, n + 1)
            assert project_path(hi, n).entries == extract_hitting_chain(tr, n).entries


def test_complete_trajectory_is_absorbed():
    tr = HitTrajectory([0.1, 0.2], [2, 1], complete=True)
    assert extract_hitting_chain(tr, 2) == PathPrefix(2, (2, 1, 0), Tail.ABSORBED)
    assert extract_hitting_chain(tr, 2, steps=1) == PathPrefix(2, (2,), Tail.TRUNCATED)


def test_renewal_transitions_forget_the_past():
    cfg = RenewalConfig.dyadic_exponential(5)
    q4 = cfg.hold_rates()[3]
    down = {1: [0, 0], 5: [0, 0]}
    for tr in run_replicas(lambda r: simulate_renewal(cfg, 200.0, 5, r), 200, seed=11):
        m = tr.marks
        for prev, cur, nxt in zip(m, m[1:], m[2:]):
            if cur == 5 and prev in down:
                down[prev][0] += nxt == 4
                down[prev][1] += 1
    for prev, (k, n) in down.items():
        se = math.sqrt(q4 * (1 - q4) / n)
        assert abs(k / n - q4) <= 4 * se, prev


def test_splitting_with_fixed_coin():
    cfg = SplittingConfig.dyadic(3)
    tr = simulate_splitting(cfg, 2.5, 6, make_rng(0), coin=lambda r: 1)
    assert set(tr.marks) == {1, 3, 5}
    assert tr.marks[:3] == [5, 3, 1]
    assert tr.sides == [1, 1, 1]
    tr = simulate_splitting(cfg, 2.5, 6, make_rng(0), coin=lambda r: -1)
    assert tr.marks[:3] == [6, 4, 2]


def test_splitting_positions():
    cfg = SplittingConfig.dyadic(2)
    assert [cfg.position(a) for a in (1, 2, 3, 4)] == [0.5, -0.5, 0.25, -0.25]


def test_circle_rotation_matches_cycle_path():
    s = from_top((3, 1, 4, 2))
    tr = simulate_circle_rotation(s, 2, 12)
    paths = cycle_path(s, 2, 12)
    for n in range(1, 5):
        got = extract_hitting_chain(tr, n).entries
        want = paths[n - 1].entries
        k = min(len(got), len(want))
        assert k > 0 and got[:k] == want[:k]


def test_coupled_from_hits_levels():
    tr = HitTrajectory([0.0, 1.0, 2.0], [3, 1, 2])
    c = coupled_from_hits(tr, 3)
    assert [c.level(n).entries for n in (1, 2, 3)] == [(1,), (1, 2), (3, 1, 2)]


def test_sample_vmc_projects_downward():
    k, nu = splitting_vtm_vid(5)
    c = sample_vmc(nu, k, 30, make_rng(2))
    for n in range(1, 5):
        assert c.level(n) == project_path(c.level(5), n)


def test_sample_vmc_rejects_incompatible():
    k, _ = splitting_vtm_vid(4)
    with pytest.raises(NotCompatible):
        sample_vmc(virtual_uniform(4), k, 5, make_rng(0))


def test_ladder_from_top_starts_at_top():
    k = ladder_vtm(LadderParams.constant(F(1, 2), 4), 4)
    c = sample_vmc(top_start_vid(4), k, 200, make_rng(1))
    assert all(c.level(n).entries[0] == n for n in range(1, 5))


def test_project_batch_matches_project_path():
    k, nu = splitting_vtm_vid(5)
    xs = sample_mc_batch([float(x) for x in nu[5]], k[5], 40, 300, make_rng(4))
    for n in range(1, 5):
        out, ok = project_batch(xs, n, 3)
        for row, good, top in zip(out, ok, xs):
            p = project_path(PathPrefix(5, tuple(int(v) for v in top)), n)
            if good:
                assert tuple(row) == p.entries[:3]
            else:
                assert len(p.entries) < 3


def test_coupled_from_hits_cuts_each_level_at_its_own_steps():
    tr = HitTrajectory([0.0, 1.0, 2.0, 3.0, 4.0, 5.0], [3, 2, 3, 1, 2, 1])
    c = coupled_from_hits(tr, 3, steps=2)
    assert [c.level(n).entries for n in (1, 2, 3)] == [(1, 1), (2, 1), (3, 2)]
