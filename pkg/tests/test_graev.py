import itertools
import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from spaces import random_space, spec_space

from freebool import ValidationError
from freebool.errors import Verdict
from freebool.graev import (
    GRAEV,
    MARKOV,
    DisjointCover,
    LetterNorm,
    PseudometricSpace,
    coset_signature,
    graev_dist,
    graev_norm,
    graev_norm_bruteforce,
    graev_pairing,
    in_linear_subgroup,
    in_U_d,
    in_U_Gamma,
    is_dyadic,
    nonarch_majorant,
    validate_pseudometric,
)
from freebool.matching import double_factorial, enumerate_perfect_matchings, min_perfect_matching
from freebool.words import EMPTY, Word


def three(d_ab, d_bc, d_ac, star=None):
    entries = {("a", "b"): d_ab, ("b", "c"): d_bc, ("a", "c"): d_ac}
    if star is None:
        return PseudometricSpace(["a", "b", "c"], entries, flavor=MARKOV)
    entries.update({("*", p): star for p in "abc"})
    return PseudometricSpace(["a", "b", "c"], entries, basepoint="*")


# -- validation ------------------------------------------------------------------


def test_validate_examples():
    report = validate_pseudometric(three(Q(1), Q(1), Q(3), star=Q(2)))
    assert not report.ok
    assert set(report.violation) == {"a", "b", "c"}
    assert validate_pseudometric(three(Q(0), Q(0), Q(0), star=Q(0))).ok
    assert validate_pseudometric(spec_space()).ok


def test_validate_missing_entries():
    space = PseudometricSpace(["a", "b"], {("a", "b"): Q(1)}, basepoint="*")
    with pytest.raises(ValidationError, match="missing"):
        validate_pseudometric(space)


def test_floats_rejected():
    with pytest.raises(ValidationError, match="p/q"):
        PseudometricSpace(["a"], {("*", "a"): 0.5}, basepoint="*")


# -- norms -------------------------------------------------------------------------


def test_norm_examples():
    space = spec_space()
    assert graev_norm(space.word("ab"), space) == Q(1, 4)
    assert graev_norm(space.word("abc"), space) == Q(5, 4)
    assert graev_norm(EMPTY, space) == 0
    markov = spec_space(MARKOV)
    assert graev_norm(markov.word("a"), markov) == 1


def test_bruteforce_examples():
    space = spec_space()
    for names, value, count in (("ab", Q(1, 4), 1), ("abc", Q(5, 4), 3), ("", Q(0), 1)):
        res = graev_norm_bruteforce(space.word(names), space)
        assert (res.value, res.matchings) == (value, count)
        assert all(v == value for v in res.augmented.values())
    zero = three(Q(0), Q(1), Q(1), star=Q(1))
    assert graev_norm_bruteforce(zero.word("ab"), zero).value == 0


def test_bruteforce_count_for_eight_letters():
    space = random_space(random.Random(5), 8)
    g = Word(tuple(range(8)))
    res = graev_norm_bruteforce(g, space)
    assert res.matchings == 105 == double_factorial(7)
    assert res.value == graev_norm(g, space)


def test_bruteforce_limit():
    space = random_space(random.Random(1), 11)
    with pytest.raises(ValidationError):
        graev_norm_bruteforce(Word(tuple(range(11))), space)


def test_atom_outside_space():
    with pytest.raises(ValidationError):
        graev_norm(Word((7,)), spec_space())


def test_pairing_realizes_norm():
    space = spec_space()
    g = space.word("abc")
    t = space.table()
    assert sum(t[x][y] for x, y in graev_pairing(g, space)) == graev_norm(g, space)


def test_dist_examples():
    space = spec_space()
    a, b = space.word("a"), space.word("b")
    assert graev_dist(a, b, space) == Q(1, 4)
    g = space.word("ac")
    assert graev_dist(g, g, space) == 0


def test_extension_property():
    rng = random.Random(2)
    for _ in range(20):
        space = random_space(rng, 6)
        for x, y in itertools.combinations(range(6), 2):
            assert graev_dist(Word((x,)), Word((y,)), space) == space.d(x, y)


def test_letter_norm_every_matching_costs_the_sum():
    r = LetterNorm.reciprocal()
    atoms = [3, 5, 8, 13]
    space = r.space(atoms)
    for k in (2, 4):
        for combo in itertools.combinations(range(len(atoms)), k):
            g = Word(combo)
            assert graev_norm(g, space) == r.weight(Word(tuple(atoms[i] for i in combo)))


def test_padding_never_helps_for_even_words():
    rng = random.Random(8)
    for _ in range(30):
        space = random_space(rng, 6)
        t = space.table()
        for combo in itertools.combinations(range(6), 4):
            plain = min(sum(t[combo[i]][combo[j]] for i, j in m) for m in enumerate_perfect_matchings(4))
            letters = list(combo) + [space.star, space.star]
            padded = min(sum(t[letters[i]][letters[j]] for i, j in m) for m in enumerate_perfect_matchings(6))
            assert padded >= plain


def test_matching_methods_agree():
    rng = random.Random(4)
    for n in (2, 6, 10, 14):
        for _ in range(5):
            w = {}
            for i, j in itertools.combinations(range(n), 2):
                w[(i, j)] = w[(j, i)] = Q(rng.randint(0, 40), rng.randint(1, 6))
            dp, _ = min_perfect_matching(n, lambda i, j: w[(i, j)], method="dp")
            bl, pairs = min_perfect_matching(n, lambda i, j: w[(i, j)], method="blossom")
            assert dp == bl == sum(w[p] for p in pairs)


def test_large_word_uses_blossom():
    space = random_space(random.Random(6), 24)
    g = Word(tuple(range(24)))
    assert graev_norm(g, space) == graev_norm(g, space, method="blossom")
    assert graev_norm(g, space) <= sum((space.d(2 * i, 2 * i + 1) for i in range(12)), Q(0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 7))
def test_norm_matches_bruteforce_property(seed, size):
    rng = random.Random(seed)
    for flavor in (GRAEV, MARKOV):
        space = random_space(rng, size, flavor)
        g = Word(tuple(x for x in range(size) if rng.random() < 0.6))
        assert graev_norm(g, space) == graev_norm_bruteforce(g, space).value


# -- majorant ------------------------------------------------------------------------


def points_only(d_ab, d_bc, d_ac):
    return three(d_ab, d_bc, d_ac)


def _rho(space):
    rho = nonarch_majorant(space)
    return {(a, b): rho.dist(a, b) for a, b in itertools.combinations(space.node_names, 2)}


def test_majorant_examples():
    assert set(_rho(points_only(Q(1, 10), Q(1, 10), Q(1, 5))).values()) == {Q(1, 4)}
    rho = _rho(points_only(Q(1, 10), Q(9, 20), Q(9, 20)))
    assert rho == {("a", "b"): Q(1, 4), ("a", "c"): Q(1), ("b", "c"): Q(1)}
    assert set(_rho(points_only(Q(0), Q(0), Q(0))).values()) == {Q(0)}


def test_majorant_requires_normalization():
    with pytest.raises(ValidationError, match="normalize"):
        nonarch_majorant(points_only(Q(1), Q(1), Q(1)))
    rho = nonarch_majorant(points_only(Q(1), Q(1), Q(1)).normalized())
    assert all(is_dyadic(v) for row in rho.table() for v in row)


def test_majorant_contract_random():
    rng = random.Random(9)
    for _ in range(40):
        space = random_space(rng, rng.randint(2, 7)).normalized()
        rho = nonarch_majorant(space)
        d, r = space.table(), rho.table()
        n = len(space.node_names)
        for x, y in itertools.product(range(n), repeat=2):
            assert r[x][y] >= d[x][y]
            assert is_dyadic(r[x][y])
        for x, y, z in itertools.product(range(n), repeat=3):
            assert r[x][z] <= max(r[x][y], r[y][z])


# -- neighborhoods -------------------------------------------------------------------


def test_in_U_d_examples():
    space = spec_space()
    assert in_U_d(space.word("ab"), space)
    assert not in_U_d(space.word("abc"), space)
    assert in_U_d(Word((18, 28)), LetterNorm.reciprocal())
    assert not in_U_d(Word((1,)), LetterNorm.reciprocal())


def test_in_U_Gamma_examples():
    cover = DisjointCover.of([[0, 1], [2]])
    assert in_U_Gamma(Word((0, 1)), [cover]).verdict is Verdict.YES
    res = in_U_Gamma(Word((0, 2)), [cover], cancel_depth=0)
    assert res.verdict is Verdict.NO
    assert in_U_Gamma(EMPTY, [cover]).verdict is Verdict.YES


def test_in_U_Gamma_reports_undecided_prefix():
    covers = [DisjointCover.of([[0, 1], [2, 3]]), DisjointCover.of([[0, 2], [1, 3]])]
    res = in_U_Gamma(Word((0, 3)), covers, cancel_depth=0)
    assert res.verdict is Verdict.UNKNOWN
    assert "undecided at given prefix" in res.note


def _sums(covers, points, basepoint=None):
    """Every element of U(c_1) + ... + U(c_n) by closure over sets."""
    reach = {EMPTY}
    for c in covers:
        pieces = {EMPTY}
        for block in c.blocks:
            for x, y in itertools.product(block, repeat=2):
                w = Word.of([a for a in (x, y) if a != basepoint])
                pieces.add(w)
        reach = {a ^ b for a in reach for b in pieces}
    return reach


@pytest.mark.parametrize("use_basepoint", [False, True])
def test_in_U_Gamma_against_closure_oracle(use_basepoint):
    rng = random.Random(12 + use_basepoint)
    points = list(range(6))
    for _ in range(25):
        covers = []
        for _ in range(rng.randint(1, 3)):
            labels = [rng.randint(0, 2) for _ in points]
            covers.append(DisjointCover.of([[p for p in points if labels[p] == k] for k in set(labels)]))
        base = 5 if use_basepoint else None
        reach = _sums(covers, points, base)
        letters = [p for p in points if p != base]
        for r in range(len(letters) + 1):
            for combo in itertools.combinations(letters, r):
                g = Word(combo)
                res = in_U_Gamma(g, covers, cancel_depth=3, basepoint=base)
                if res.verdict is Verdict.YES:
                    assert g in reach
                    total = EMPTY
                    for slot, x, y in res.pairs:
                        assert covers[slot].block_of(x) == covers[slot].block_of(y if y is not None else base)
                        total ^= Word.of([x] + ([y] if y is not None else []))
                    assert total == Word.of(list(g.support) + [z for z in res.cancelled for _ in (0, 1)])
                elif res.verdict is Verdict.NO:
                    assert g not in reach


def test_linear_subgroup_examples():
    cover = DisjointCover.of([[0, 1], [2, 3]])
    assert in_linear_subgroup(Word((0, 1)), cover)
    assert coset_signature(Word((0, 1)), cover) == 0
    assert not in_linear_subgroup(Word((0, 2)), cover)
    assert coset_signature(Word((0, 2)), cover) == 0b11
    sigs = {coset_signature(Word(c), cover) for r in range(5) for c in itertools.combinations(range(4), r)}
    assert len(sigs) == 4


def test_cover_validation():
    with pytest.raises(ValidationError):
        DisjointCover.of([[0, 1], [1, 2]])
    with pytest.raises(ValidationError):
        coset_signature(Word((9,)), DisjointCover.of([[0]]))
