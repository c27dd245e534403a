import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corpus import load_bundle, random_game
from iesds.elimination import apply_T
from iesds.epistemic import domin_survivors, evaluate_plain
from iesds.formula import (And, Atom, CK, CapExceeded, FALSE, K, K_chain, Or, TRUE, build_dom,
                           build_domin, dom_cap, node_estimate)
from iesds.game import PreferenceAtom, Skeleton


def test_hash_consing():
    p = Atom(PreferenceAtom(0, (0,), 0, 1))
    q = Atom(PreferenceAtom(0, (0,), 1, 0))
    assert And(p, q) is And(p, q)
    assert And(p, q) is not And(q, p)
    assert K(1, p) is CK([1], p)
    assert K_chain([0, 1], p) is K(0, K(1, p))
    assert And(p) is p and Or(p) is p


def test_empty_connectives():
    assert evaluate_plain(TRUE, frozenset()) is True
    assert evaluate_plain(FALSE, frozenset()) is False
    with pytest.raises(ValueError):
        CK([], TRUE)


def test_dom_cap_and_definition():
    g, _ = load_bundle("combining_step")
    sk = g.skeleton
    assert dom_cap(sk) == 6
    one = build_dom(1, 0, 0, sk)
    assert one is K(0, build_domin(1, 0, 0, sk))


def test_single_strategy_player_is_never_dominated():
    sk = Skeleton((2, 1))
    # the only alternative is the strategy itself, and no valuation is reflexive
    for v in (set(), {PreferenceAtom(0, (0,), 0, 1)}, {PreferenceAtom(0, (0,), 1, 0)}):
        for level in (1, 3):
            assert not evaluate_plain(build_domin(level, 1, 0, sk), frozenset(v))


def test_sharing_keeps_dags_small():
    sk = Skeleton((3, 3, 3))
    f = build_domin(9, 0, 0, sk)
    assert len(f.nodes()) <= node_estimate(sk, 9)
    assert f.tree_size() > 10 * len(f.nodes())


def test_node_cap_refusal():
    sk = Skeleton((3, 3, 3))
    with pytest.raises(CapExceeded) as info:
        build_dom(9, 0, 0, sk, node_cap=100)
    assert info.value.estimate == node_estimate(sk, 9)


def test_level_must_be_positive():
    with pytest.raises(ValueError):
        build_domin(0, 0, 0, Skeleton((2, 2)))


def test_customary_outcome_from_formulas():
    g, _ = load_bundle("pairwise")
    assert domin_survivors(g, dom_cap(g.skeleton)).names(g) == {"1": ["D"], "2": ["R"], "3": ["A"]}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_domin_levels_track_elimination_rounds(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng)
    r = g.full()
    for level in range(1, dom_cap(g.skeleton) + 1):
        r = apply_T(range(g.n), r, "global", g)
        assert domin_survivors(g, level) == r
