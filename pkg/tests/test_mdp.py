import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gfmcheck.automata import make_nbw
from gfmcheck.mdp import (ModelFormatError, compare_on_mc, dump_model, lasso_mc, load_model, make_mc,
                          make_mdp, max_buchi_prob, maximal_end_components, parse_model, product_mdp,
                          psem, psyn)

from corpus import random_chain, small_candidates
from oracles import brute_max_buchi, brute_psyn


def test_running_example_values(example_nbw, example_chain):
    assert psem(example_chain, example_nbw) == 1
    assert psyn(example_chain, example_nbw) == Fraction(2, 3)
    cmp = compare_on_mc(example_nbw, example_chain)
    assert cmp.qualitative_gap and not cmp.equal


def test_running_example_product(example_nbw, example_chain):
    P = product_mdp(example_chain, example_nbw)
    assert P.accepting_pairs == {(1, 1), (2, 1), (1, 2), (2, 2)}
    mecs = maximal_end_components(P)
    assert len(mecs) == 4
    assert sum(1 for ec in mecs if ec.states & P.accepting) == 2
    value, strategy = max_buchi_prob(P)
    assert value == Fraction(2, 3)
    assert strategy[(0, 0)][1] == 2  # commit to the b-branch


def test_lasso_chain(example_nbw):
    assert psem(lasso_mc("ab", "a", "b"), example_nbw) == 1
    assert psem(lasso_mc("ab", "", "b"), example_nbw) == 0
    with pytest.raises(ValueError):
        lasso_mc("ab", "a", "")


def test_model_roundtrip_and_errors(example_chain):
    text = dump_model(example_chain)
    assert dump_model(load_model(text)) == text
    doc = load_model(text)
    assert doc.row(0) == ((1, Fraction(1, 3)), (2, Fraction(2, 3)))
    bad = {"kind": "mc", "alphabet": ["a"], "initial": 0, "states": [{"label": "a"}],
           "actions": [{"state": 0, "dist": [{"to": 0, "p": "1/2"}]}]}
    with pytest.raises(ModelFormatError, match="sum"):
        parse_model(bad)
    bad["actions"][0]["dist"][0]["p"] = 0.5
    with pytest.raises(ModelFormatError, match="num/den"):
        parse_model(bad)


def test_unknown_label_is_rejected(example_nbw):
    M = make_mc(("a", "c"), "c", 0, [{0: 1}])
    with pytest.raises(ValueError):
        product_mdp(M, example_nbw)


def test_psyn_matches_brute_force_on_small_corpus():
    rng = random.Random(5)
    cands = small_candidates()
    for _ in range(150):
        C = rng.choice(cands)
        M = random_chain(rng, rng.randint(1, 3))
        assert psyn(M, C) == brute_psyn(M, C)


def _random_mdp(rng, k, alphabet="ab"):
    labels = [rng.choice(alphabet) for _ in range(k)]
    actions = []
    for _ in range(k):
        acts = []
        for j in range(rng.randint(1, 2)):
            support = [t for t in range(k) if rng.random() < 0.4] or [rng.randrange(k)]
            w = [rng.randint(1, 3) for _ in support]
            acts.append((f"x{j}", {t: Fraction(x, sum(w)) for t, x in zip(support, w)}))
        actions.append(acts)
    return make_mdp(alphabet, labels, 0, actions)


def test_max_buchi_prob_matches_strategy_enumeration():
    rng = random.Random(11)
    checked = 0
    while checked < 30:
        N = rng.choice(small_candidates())
        P = product_mdp(_random_mdp(rng, rng.randint(2, 4)), N)
        if len(P.states) > 8 or any(len(a) > 2 for a in P.actions):
            continue
        assert max_buchi_prob(P)[0] == brute_max_buchi(P)
        checked += 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_psyn_never_exceeds_psem(seed):
    rng = random.Random(seed)
    C = rng.choice(small_candidates())
    M = random_chain(rng, rng.randint(1, 4))
    cmp = compare_on_mc(C, M)
    assert 0 <= cmp.psyn <= cmp.psem <= 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_deterministic_automata_have_no_gap(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    N = make_nbw("ab", n, 0, [q for q in range(n) if rng.random() < 0.5],
                 [(q, s, [rng.randrange(n)]) for q in range(n) for s in "ab"])
    M = random_chain(rng, rng.randint(1, 4))
    assert compare_on_mc(N, M).equal
