import random

import pytest
from hypothesis import given, settings, strategies as st

from gfmcheck.automata import make_nbw
from gfmcheck.criterion import (build_safety_pair, check_criterion, decide_gfm, qgfm_state_set,
                                witness_not_gfm, witness_not_qgfm)
from gfmcheck.mdp import compare_on_mc
from gfmcheck.trees import decide_qgfm
from gfmcheck.verdict import GFM, NOT_GFM

from corpus import random_chain, small_candidates


def test_example_nbw_safety_pair(example_nbw):
    assert qgfm_state_set(example_nbw) == {1, 2, 3}
    pair = build_safety_pair(example_nbw)
    assert pair.non_qgfm == (0,)
    assert set(pair.non_residual) == {(0, "a", 1), (0, "a", 2)}
    assert pair.S.initial is None and pair.T.initial == 0
    assert not check_criterion(example_nbw)


def test_example_nbw_witnesses(example_nbw):
    a = compare_on_mc(example_nbw, witness_not_gfm(example_nbw))
    assert a.psyn < a.psem
    b = compare_on_mc(example_nbw, witness_not_qgfm(example_nbw))
    assert b.psem == 1 and b.psyn < 1


@pytest.mark.parametrize("mode", ["pipeline", "criterion", "both"])
def test_example_nbw_all_routes(example_nbw, mode):
    v = decide_gfm(example_nbw, mode)
    assert v.decision == NOT_GFM and v.witness is not None
    cmp = compare_on_mc(example_nbw, v.witness)
    assert cmp.psem == 1 and cmp.psyn < 1


def test_unknown_mode(example_nbw):
    with pytest.raises(ValueError):
        decide_gfm(example_nbw, "guess")


def test_witnesses_refuse_gfm_input():
    D = make_nbw("ab", 1, 0, [0], [(0, "a", [0]), (0, "b", [0])])
    assert decide_gfm(D, "both").decision == GFM
    with pytest.raises(ValueError):
        witness_not_gfm(D)
    with pytest.raises(ValueError):
        witness_not_qgfm(D)


def test_empty_language_is_gfm():
    E = make_nbw("ab", 2, 0, [1], [(0, "a", [0]), (0, "b", [0]), (1, "a", [1]), (1, "b", [1])])
    v = decide_qgfm(E)
    assert v.holds and v.diagnostics == {"empty_language": True}
    assert decide_gfm(E, "criterion").holds


def test_verdict_document(example_nbw):
    doc = decide_gfm(example_nbw).to_doc()
    assert set(doc) == {"decision", "route", "witness", "diagnostics"}
    assert doc["witness"]["kind"] == "mc"


def test_both_witness_constructions_on_a_sample_of_the_corpus():
    rng = random.Random(4)
    bad = [C for C in small_candidates() if not decide_gfm(C).holds]
    assert bad
    for C in rng.sample(bad, min(6, len(bad))):
        a = compare_on_mc(C, witness_not_gfm(C))
        assert a.psyn < a.psem
        b = compare_on_mc(C, witness_not_qgfm(C))
        assert b.qualitative_gap


def test_gfm_verdicts_survive_random_chains():
    rng = random.Random(8)
    good = [C for C in small_candidates() if decide_gfm(C).holds]
    for C in rng.sample(good, 40):
        for _ in range(5):
            assert compare_on_mc(C, random_chain(rng, rng.randint(1, 4))).equal


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_deterministic_automata_are_gfm(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    N = make_nbw("ab", n, 0, [q for q in range(n) if rng.random() < 0.5],
                 [(q, s, [rng.randrange(n)]) for q in range(n) for s in "ab"])
    assert decide_gfm(N, "both").holds
