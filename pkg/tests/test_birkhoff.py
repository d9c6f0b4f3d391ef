import json
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings

from helpers import fractions
from oracles import miracle_factorisation
from vmc.birkhoff import (
    Condition,
    Segment,
    classify_pair,
    convex_combination_in_b,
    cycle_witness,
    ds_project,
    half_witness,
    is_two_state_lift,
    kernel_witness_suite,
    miracle_constant,
    miracle_identity_check,
    pigeonhole_witness,
    random_ds_matrix,
    random_ds_prefix,
    two_state,
    vperm_segment_conditions,
)
from vmc.errors import DegenerateDenominator, LevelMismatch, NotDoublyStochastic
from vmc.examples import (
    LadderParams,
    identity_vtm,
    ladder_vtm,
    reflecting_walk_vtm,
    splitting_vtm_vid,
    transposition_pair,
    uniform_vtm,
)
from vmc.transmat import TruncatedTM, lift_classical_tm, project_tm
from vmc.vperm import alternating_pair, from_top, random_prefix, vtm_of

FIXTURES = Path(__file__).parent / "fixtures"
HALF = F(1, 2)


def test_transposition_pair_projects_to_identity():
    k1, k2 = transposition_pair()
    assert ds_project(k1) == TruncatedTM.identity(2)
    assert ds_project(k2) == TruncatedTM.identity(2)


def test_midpoint_of_transposition_pair_does_not_project_to_identity():
    k1, k2 = transposition_pair()
    assert ds_project(k1.mix(k2, HALF)).block() == ((F(3, 4), F(1, 4)), (F(1, 4), F(3, 4)))


def test_identity_projects_to_identity():
    assert ds_project(TruncatedTM.identity(4)) == TruncatedTM.identity(3)


def test_ds_project_agrees_with_general_projection():
    rng = np.random.default_rng(5)
    for _ in range(50):
        k = random_ds_matrix(int(rng.integers(2, 7)), rng)
        assert ds_project(k) == project_tm(k)


def test_ds_project_rejects_non_ds():
    with pytest.raises(NotDoublyStochastic):
        ds_project(TruncatedTM.from_block([[1, 0], [1, 0]]))


def test_alternating_pair_is_full_segment_with_parity_verdicts():
    s1, s2 = alternating_pair(8)
    rep = classify_pair(vtm_of(s1), vtm_of(s2))
    assert rep.segment is Segment.FULL
    for n, v in enumerate(rep.verdicts, start=1):
        assert v is (Condition.TOP_FIXED_FIRST if n % 2 else Condition.TOP_FIXED_SECOND)


def test_non_convex_pair_fails_at_level_two():
    k1, k2 = (lift_classical_tm(k) for k in transposition_pair())
    rep = classify_pair(k1, k2)
    assert rep.segment is Segment.ENDPOINTS
    assert rep.first_failing_level == 2
    assert not convex_combination_in_b(k1, k2, HALF)


def test_self_pair_is_full_segment():
    rng = np.random.default_rng(8)
    k = random_ds_prefix(5, rng)
    assert classify_pair(k, k).segment is Segment.FULL


def test_alternating_midpoint_is_the_reflecting_walk():
    s1, s2 = alternating_pair(6)
    assert convex_combination_in_b(vtm_of(s1), vtm_of(s2), HALF)
    assert vtm_of(s1).mix(vtm_of(s2), HALF) == reflecting_walk_vtm(6).matrices


def test_endpoints_always_in():
    k1, k2 = (lift_classical_tm(k) for k in transposition_pair())
    assert convex_combination_in_b(k1, k2, 0)
    assert convex_combination_in_b(k1, k2, 1)


def test_level_mismatch():
    with pytest.raises(LevelMismatch):
        classify_pair(uniform_vtm(3), uniform_vtm(4))


def test_non_ds_rejected():
    with pytest.raises(NotDoublyStochastic):
        classify_pair(ladder_vtm(LadderParams.harmonic(3), 3), uniform_vtm(3))


@pytest.mark.parametrize("seed", range(6))
def test_dichotomy_on_random_pairs(seed):
    rng = np.random.default_rng(100 + seed)
    for _ in range(15):
        m = int(rng.integers(2, 6))
        k1 = random_ds_prefix(m, rng, terms=int(rng.integers(1, 3)))
        k2 = random_ds_prefix(m, rng, terms=int(rng.integers(1, 3)))
        full = classify_pair(k1, k2).segment is Segment.FULL
        inside = {convex_combination_in_b(k1, k2, a) for a in (F(1, 4), F(1, 3), HALF, F(2, 3))}
        assert inside == {full}


def test_miracle_ratio_matches_symbolic_oracle():
    frozen = json.loads((FIXTURES / "miracle.json").read_text())["ratio"]
    z, z2, al = sp.symbols("z z2 alpha")
    ours = al * (1 - al) * (1 - z) * (1 - z2) / (1 - (1 - al) * z - al * z2)
    assert sp.simplify(miracle_factorisation() - ours) == 0
    assert sp.simplify(sp.sympify(frozen) - ours) == 0


def test_miracle_identical_arguments():
    c = miracle_identity_check(F(1, 3), F(1, 3), F(1, 5), F(1, 5), F(1, 2), F(1, 2), F(1, 4))
    assert c.difference == 0 and c.product == 0


def test_miracle_equal_ratio_gives_zero():
    # x/(1-z) = x'/(1-z') = 1/2
    c = miracle_identity_check(F(1, 4), F(1, 3), F(1, 7), F(2, 9), F(1, 2), F(1, 3), F(3, 5))
    assert c.difference == 0 and c.product == 0


def test_miracle_degenerate():
    with pytest.raises(DegenerateDenominator):
        miracle_identity_check(0, 0, 0, 0, 1, F(1, 2), F(1, 2))


@settings(max_examples=300, deadline=None)
@given(
    fractions(9),
    fractions(9),
    fractions(9),
    fractions(9),
    fractions(9).filter(lambda t: t < 1),
    fractions(9).filter(lambda t: t < 1),
    fractions(9).filter(lambda t: 0 < t < 1),
)
def test_miracle_proportionality(x, x2, y, y2, z, z2, al):
    c = miracle_identity_check(x, x2, y, y2, z, z2, al)
    assert c.difference == c.constant * c.product
    assert (c.difference == 0) == (c.product == 0)
    assert c.constant == miracle_constant(z, z2, al) and c.constant > 0


def test_witnesses_are_doubly_stochastic():
    for n in range(2, 8):
        assert cycle_witness(n).is_doubly_stochastic()
        assert half_witness(n).is_doubly_stochastic()


def test_identity_in_kernel():
    assert kernel_witness_suite(identity_vtm(6)).in_kernel


def test_walk_excluded_at_level_two():
    v = kernel_witness_suite(reflecting_walk_vtm(5))
    assert v.excluded_at == 2


def test_uniform_excluded_at_first_non_fixed_top():
    # level 2 already has K_2(2,2) = 1/2 != 1
    v = kernel_witness_suite(uniform_vtm(5))
    assert not v.in_kernel and v.excluded_at == 2


def test_splitting_and_ladder_excluded():
    assert not kernel_witness_suite(splitting_vtm_vid(5)[0]).in_kernel
    assert not kernel_witness_suite(ladder_vtm(LadderParams.constant(1, 5), 5)).in_kernel


def test_two_state_lifts_pass_every_partner():
    rng = np.random.default_rng(9)
    for theta in (F(0), F(1, 3), HALF):
        k = lift_classical_tm(two_state(theta), 5)
        assert is_two_state_lift(k)
        assert kernel_witness_suite(k).in_kernel
        for _ in range(20):
            assert classify_pair(k, random_ds_prefix(5, rng)).segment is Segment.FULL


def test_random_non_lift_prefixes_excluded():
    rng = np.random.default_rng(17)
    seen = 0
    while seen < 30:
        k = random_ds_prefix(int(rng.integers(3, 6)), rng)
        if is_two_state_lift(k):
            continue
        assert not kernel_witness_suite(k).in_kernel
        seen += 1


def test_pigeonhole_names_a_failing_witness():
    rng = np.random.default_rng(21)
    for _ in range(30):
        k = random_ds_prefix(5, rng)
        for n in range(2, 5):
            name = pigeonhole_witness(k, n)
            if name is None:
                assert k[n + 1][n + 1, n + 1] == 1
                continue
            w = {"cycle": cycle_witness, "half": half_witness}.get(name)
            wm = w(n) if w else TruncatedTM.from_block([[F(1, n + 1)] * (n + 1)] * (n + 1))
            rep = classify_pair(k.truncate(n + 1), lift_classical_tm(wm, n + 1))
            assert not rep.conditions[n - 1]


def test_vperm_conditions_match_matrix_conditions():
    rng = np.random.default_rng(33)
    for _ in range(100):
        m = int(rng.integers(2, 7))
        s1, s2 = random_prefix(m, rng), random_prefix(m, rng)
        a = vperm_segment_conditions(s1, s2)
        b = classify_pair(vtm_of(s1), vtm_of(s2))
        assert a.conditions == b.conditions


def test_alternating_vperm_conditions_full():
    s1, s2 = alternating_pair(7)
    assert vperm_segment_conditions(s1, s2).segment is Segment.FULL
    assert vperm_segment_conditions(s1, s1).segment is Segment.FULL


def test_three_cycle_against_inverse():
    s = from_top((2, 3, 1))
    t = from_top((3, 1, 2))
    rep = vperm_segment_conditions(s, t)
    assert rep.segment is Segment.ENDPOINTS
    assert rep.conditions[1] == frozenset()
    assert classify_pair(vtm_of(s), vtm_of(t)).segment is Segment.ENDPOINTS


def test_report_json_shape():
    s1, s2 = alternating_pair(4)
    j = classify_pair(vtm_of(s1), vtm_of(s2)).to_json()
    assert j["segment"] == "FullSegment"
    assert [lv["verdict"] for lv in j["levels"]] == ["i", "ii", "i"]
