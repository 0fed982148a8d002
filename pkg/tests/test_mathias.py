import itertools
import random
from fractions import Fraction as Q

import pytest

from freebool import ValidationError
from freebool.errors import SearchExhausted, Undecided
from freebool.graev import LetterNorm
from freebool.mathias import (
    LaverNbhd,
    LaverTreeApprox,
    MathiasCondition,
    UdWitness,
    closure_probe,
    in_basic_open,
    in_laver_nbhd,
    laver_to_mathias,
    laver_tree_check,
    mathias_leq,
    thinned_sets,
    verify_Ud_witness,
    witness_in_Ud,
)
from freebool.omega import ConstantFamily, PowerFamily, RepFilter, RepSet, parse_family, parse_repset
from freebool.words import EMPTY, Word

P = parse_repset


def W(*xs):
    return Word(tuple(xs))


def universe(max_elt, max_len):
    for k in range(max_len + 1):
        for combo in itertools.combinations(range(max_elt + 1), k):
            yield Word(combo)


# -- conditions and basic open sets ----------------------------------------------------


def test_mathias_leq_examples():
    top = MathiasCondition(EMPTY, P("evens"))
    assert mathias_leq(MathiasCondition(W(2, 4), P("evens>4")), top)
    assert not mathias_leq(MathiasCondition(W(1, 2), P("evens>2")), top)
    assert mathias_leq(top, top)


def test_condition_validation():
    with pytest.raises(ValidationError):
        MathiasCondition(W(5), P("evens"))
    with pytest.raises(ValidationError):
        MathiasCondition(EMPTY, P("finite:[1,2]"))


def _random_condition(rng):
    s = tuple(sorted(rng.sample(range(8), rng.randint(0, 2))))
    base = rng.choice(["evens", "odds", "mult:3", "omega", "mult:4"])
    return MathiasCondition(Word(s), P(base).above(max(s, default=-1) + rng.randint(0, 3)))


def test_mathias_leq_is_partial_order():
    rng = random.Random(0)
    conds = [_random_condition(rng) for _ in range(60)]
    for a in conds:
        assert mathias_leq(a, a)
    for a, b in itertools.product(conds, repeat=2):
        if mathias_leq(a, b) and mathias_leq(b, a):
            assert a == b
    for a, b, c in itertools.product(conds[:25], repeat=3):
        if mathias_leq(a, b) and mathias_leq(b, c):
            assert mathias_leq(a, c)


def test_basic_open_examples():
    A = P("odds>1")
    assert in_basic_open(W(1, 3, 5), W(1), A)
    assert not in_basic_open(W(1, 2), W(1), A)
    assert not in_basic_open(W(3), W(1), A)
    with pytest.raises(ValidationError):
        in_basic_open(W(5), W(5), A)


# -- Laver neighborhoods ----------------------------------------------------------------


def spec_laver():
    return LaverNbhd({EMPTY: P("evens")}, ConstantFamily(P("mult:4")))


def test_laver_examples():
    U = spec_laver()
    assert in_laver_nbhd(W(2, 8), U)
    assert not in_laver_nbhd(W(2, 6), U)
    assert in_laver_nbhd(EMPTY, U)


def test_laver_undecided_without_default():
    U = LaverNbhd({EMPTY: P("evens")})
    assert in_laver_nbhd(W(2), U)
    with pytest.raises(Undecided):
        in_laver_nbhd(W(2, 4), U)


def test_laver_table_must_lie_above_stem():
    with pytest.raises(ValidationError):
        LaverNbhd({W(5): P("evens")})


@pytest.mark.parametrize("base", ["evens", "odds>2", "mult:3", "cofinite-minus:[1,4]"])
def test_mathias_and_laver_agree_on_rewritten_neighborhoods(base):
    A = P(base)
    U = LaverNbhd.from_mathias(A)
    for t in universe(24, 5):
        assert in_basic_open(t, EMPTY, A) == in_laver_nbhd(t, U)


def test_laver_words_enumeration_matches_membership():
    U = spec_laver()
    listed = set(U.words(16, 3))
    direct = {t for t in universe(16, 3) if in_laver_nbhd(t, U)}
    assert listed == direct


# -- Laver trees ---------------------------------------------------------------------------


def test_tree_examples():
    F = RepFilter.generated_by("evens")
    nodes = frozenset({(), (2,), (2, 4), (2, 4, 6)})
    succ = {t: P("evens").above(t[-1] if t else -1) for t in nodes}
    assert laver_tree_check(LaverTreeApprox(nodes, (), succ), F).ok
    broken = LaverTreeApprox(frozenset({(), (2, 4)}), (), succ)
    res = laver_tree_check(broken, F)
    assert not res.ok and res.node == (2, 4) and "prefix" in res.reason
    finite = dict(succ)
    finite[(2,)] = P("finite:[4,6]")
    res = laver_tree_check(LaverTreeApprox(nodes, (), finite), F)
    assert not res.ok and res.node == (2,) and "filter" in res.reason


def test_tree_stem_comparability():
    F = RepFilter.frechet()
    nodes = frozenset({(), (1,), (3,)})
    res = laver_tree_check(LaverTreeApprox(nodes, (1,), {(1,): P("gt:1")}), F)
    assert not res.ok and res.node == (3,)


# -- refinement ---------------------------------------------------------------------------


def _direct_member(t: Word, U: LaverNbhd) -> bool:
    seq = t.support
    for i in range(len(seq)):
        if seq[i] not in U.A(Word(seq[:i])):
            return False
    return True


def test_refinement_evens():
    U = LaverNbhd(default=ConstantFamily(P("evens")))
    F = RepFilter.generated_by("evens")
    res = laver_to_mathias(U, F, 32, 6)
    assert res.D == list(range(2, 33, 2))
    assert res.passed and res.counterexample is None
    assert res.checked == sum(1 for k in range(7) for _ in itertools.combinations(res.D, k))
    for k in range(7):
        for combo in itertools.combinations(res.D, k):
            assert _direct_member(Word(combo), U)


def test_refinement_all_of_omega():
    U = LaverNbhd(default=ConstantFamily(RepSet.omega()))
    res = laver_to_mathias(U, RepFilter.frechet(), 12, 4)
    assert res.passed and res.D == list(range(1, 13))


def test_refinement_non_selective_configuration_fails():
    U = LaverNbhd(default=PowerFamily(2), shift=1)
    res = laver_to_mathias(U, RepFilter.frechet(), 32, 6)
    assert not res.passed
    assert res.counterexample is not None and not _direct_member(res.counterexample, U)
    assert set(res.counterexample.support) <= set(res.D)


def test_thinned_sets_match_definition():
    U = spec_laver()
    top = 12
    sets = thinned_sets(U, top)
    members = [t for t in universe(top, top + 1) if in_laver_nbhd(t, U)]
    for i in range(top + 1):
        expected = RepSet.omega()
        for s in members:
            if s.max <= i:
                expected = expected & U.A(s).above(s.max)
        assert sets[i] == expected


# -- closure probe ---------------------------------------------------------------------------


def test_closure_probe_examples():
    fam = parse_family("evens>i")
    rep = closure_probe(fam, RepFilter.frechet(), 12, 3)
    exterior = dict(rep.exterior)
    assert W(2, 3) in exterior and exterior[W(2, 3)] == fam(2).above(3)
    assert W(1, 2) in rep.in_U
    assert rep.in_U_prime == [EMPTY]
    assert rep.separators_verified and rep.empty_is_limit
    i, j = rep.limit_witnesses[0]
    assert j in fam(i)


def test_closure_separators_avoid_U():
    fam = parse_family("evens>i")
    max_elt, max_len = 10, 4
    rep = closure_probe(fam, RepFilter.generated_by("mult:3"), max_elt, max_len)
    in_U = set(rep.in_U)
    for t, A in rep.exterior:
        for u in universe(max_elt, max_len):
            if in_basic_open(u, t, A):
                assert u not in in_U


def test_closure_probe_precondition():
    with pytest.raises(ValidationError):
        closure_probe(ConstantFamily(P("evens")), RepFilter.frechet(), 6, 2)


# -- witness ---------------------------------------------------------------------------------


def test_witness_example():
    r = LetterNorm.reciprocal()
    w = witness_in_Ud(PowerFamily(2), r, 1)
    assert w.word == W(18, 28)
    assert (w.n, w.rows, w.columns, w.m) == (1, [2], [3], 4)
    assert w.total == Q(1, 18) + Q(1, 28) < 1


def test_hand_instance_passes_verifier():
    r = LetterNorm.reciprocal()
    hand = UdWitness(W(18, 28), 1, 4, [2], [3], Q(1, 18) + Q(1, 28))
    assert verify_Ud_witness(hand, r)
    # 18 = 2*9 is the fifth odd multiple of 2; 28 = 4*7 the fourth odd multiple of 4
    assert [x for x in range(0, 40) if x % 2 == 0 and x % 4][4] == 18
    assert [x for x in range(0, 60) if x % 4 == 0 and x % 8][3] == 28


def test_witness_degenerate_and_scaled():
    r = LetterNorm.reciprocal()
    w0 = witness_in_Ud(PowerFamily(2), r, 0)
    assert len(w0.word) == 1 and w0.total < 1
    small = witness_in_Ud(PowerFamily(2), LetterNorm.reciprocal(Q(1, 1000)), 1)
    assert (small.rows, small.columns, small.m) == ([2], [3], 4)
    for n in range(2, 5):
        w = witness_in_Ud(PowerFamily(2), r, n)
        assert verify_Ud_witness(w, r) and w.total < 1


def test_witness_budget():
    with pytest.raises(SearchExhausted) as info:
        witness_in_Ud(PowerFamily(2), LetterNorm.reciprocal(Q(1000)), 2, budget=500)
    assert info.value.bound == 500
