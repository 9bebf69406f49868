import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gfmcheck.automata import LassoWord, accepts_lasso, automaton_doc, make_nbw
from gfmcheck.generators import (DOLLAR, GFM_TAG, NOT_GFM_TAG, UNKNOWN_TAG, dollar_extend, fork_instance,
                                 fork_of, fork_witness_mc, is_universal, random_instances, running_example,
                                 suffix_nfa, universal_nfa)
from gfmcheck.criterion import decide_gfm
from gfmcheck.mdp import compare_on_mc, psem, psyn

from corpus import all_complete
from oracles import lassos, nbw_accepts_lasso


def test_running_example_fixture():
    N, M = running_example()
    assert M.labels == ("a", "a", "b")
    assert M.row(0) == ((1, Fraction(1, 3)), (2, Fraction(2, 3)))
    words = {(p, c) for p, c in lassos("ab", 2, 2) if nbw_accepts_lasso(N, p, c)}
    assert ((), ("a",)) in words and (("a",), ("b",)) in words
    assert all(accepts_lasso(N, LassoWord(p, c)) for p, c in words)


def test_fork_tags():
    assert fork_instance(universal_nfa("ab")).tag == GFM_TAG
    assert fork_instance(suffix_nfa()).tag == NOT_GFM_TAG


def test_fork_witness_numbers():
    F = fork_of(suffix_nfa())
    M = fork_witness_mc("b", "a", F.alphabet)
    assert psem(M, F) == Fraction(3, 4)
    assert psyn(M, F) == Fraction(1, 2)
    same = fork_witness_mc("b", "b", F.alphabet)
    assert psem(same, F) == psyn(same, F)


def test_fork_language_shape():
    F = fork_of(suffix_nfa())
    Af = dollar_extend(suffix_nfa())
    # σσ'w with w in L(A_f), and σ$w with w in L(B_f) = every word with infinitely many $
    for p, c in lassos(("a", "b", DOLLAR), 1, 2):
        for s1, s2 in (("a", "b"), ("b", "a")):
            w = LassoWord((s1, s2) + p, c)
            assert accepts_lasso(F, w) == accepts_lasso(Af, LassoWord(p, c))
        w = LassoWord(("a", DOLLAR) + p, c)
        assert accepts_lasso(F, w) == (accepts_lasso(Af, LassoWord(p, c)) or DOLLAR in c)


def test_dollar_extension_structure():
    A = suffix_nfa()
    Af = dollar_extend(A)
    f = A.state_count
    assert Af.accepting == {f} and Af.alphabet[-1] == DOLLAR
    assert Af.succ(2, DOLLAR) == {f} and Af.succ(0, DOLLAR) == {0}
    assert accepts_lasso(Af, LassoWord(("b",), ("b", DOLLAR)))
    assert not accepts_lasso(Af, LassoWord(("a",), ("a", DOLLAR)))


def test_empty_final_set_gives_empty_language():
    A = make_nbw("ab", 1, 0, [], [(0, "a", [0]), (0, "b", [0])], kind="nfa")
    Af = dollar_extend(A)
    assert not any(nbw_accepts_lasso(Af, p, c) for p, c in lassos(Af.alphabet, 1, 2))


def test_incomplete_input_is_rejected():
    A = make_nbw("ab", 1, 0, [0], [(0, "a", [0])], kind="nfa")
    with pytest.raises(ValueError):
        dollar_extend(A)
    with pytest.raises(ValueError):
        fork_of(A)


def _universal_by_words(A, depth=4):
    """Every word of length <= depth reaches a final state."""
    for k in range(depth + 1):
        for w in itertools.product(A.alphabet, repeat=k):
            P = {A.initial}
            for s in w:
                P = {t for q in P for t in A.succ(q, s)}
            if not P & A.accepting:
                return False
    return True


def test_universality_check_matches_word_enumeration():
    # with two states a counterexample, if any, has length at most 3
    for A in itertools.chain(all_complete(1, kind="nfa"), all_complete(2, kind="nfa")):
        assert is_universal(A) == _universal_by_words(A)


def test_random_instances_are_reproducible():
    a = [i.to_doc() for i in random_instances("nbw", size=4, seed=9, count=3)]
    b = [i.to_doc() for i in random_instances("nbw", size=4, seed=9, count=3)]
    assert a == b
    assert all(d["tag"] == UNKNOWN_TAG and d["provenance"]["seed"] == 9 for d in a)
    assert random_instances("nfa", seed=1)[0].automaton.kind == "nfa"
    assert all(i.automaton.is_deterministic for i in random_instances("nbw", seed=2, count=5,
                                                                      deterministic=True))


def test_random_instance_errors():
    for kwargs in ({"kind": "tree"}, {"kind": "nbw", "size": 0}, {"kind": "nbw", "density": 0},
                   {"kind": "lasso_mc", "period": ""}):
        with pytest.raises(ValueError):
            random_instances(**kwargs)


def test_lasso_instance():
    N, _ = running_example()
    M = random_instances("lasso_mc", prefix="a", period="b")[0].model
    assert psem(M, N) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_chains_are_distributions(seed):
    M = random_instances("mc", size=4, seed=seed)[0].model
    for s in range(M.size):
        assert sum(p for _, p in M.row(s)) == 1


def _words(A, k):
    for n in range(k + 1):
        for w in itertools.product(A.alphabet, repeat=n):
            P = {A.initial}
            for s in w:
                P = {t for q in P for t in A.succ(q, s)}
            yield "".join(w), bool(P & A.accepting)


def test_fork_witness_gap_on_every_small_non_universal_nfa():
    for A in itertools.chain(all_complete(1, kind="nfa"), all_complete(2, kind="nfa")):
        inst = fork_instance(A)
        words = list(_words(A, 3))
        inside = [w for w, ok in words if ok]
        outside = [w for w, ok in words if not ok]
        assert inst.tag == (GFM_TAG if not outside or not inside else NOT_GFM_TAG)
        if inst.tag == NOT_GFM_TAG:
            # the empty word cannot be cycled on, so prefer non-empty representatives
            w_a = next((w for w in inside if w), inside[0])
            w_b = next((w for w in outside if w), outside[0])
            M = fork_witness_mc(w_a, w_b, inst.automaton.alphabet)
            cmp = compare_on_mc(inst.automaton, M)
            assert cmp.psem == Fraction(3, 4) and cmp.psyn == Fraction(1, 2)


def test_fork_of_empty_language_is_gfm():
    A = make_nbw("ab", 1, 0, [], [(0, "a", [0]), (0, "b", [0])], kind="nfa")
    inst = fork_instance(A)
    assert inst.tag == GFM_TAG and inst.provenance["empty"] and not inst.provenance["universal"]
    assert decide_gfm(inst.automaton, "both").holds


def test_fork_tags_agree_with_the_decider_on_a_sample():
    rng = random.Random(3)
    pool = list(all_complete(2, kind="nfa"))
    for A in rng.sample(pool, 12):
        inst = fork_instance(A)
        assert decide_gfm(inst.automaton).decision == inst.tag
