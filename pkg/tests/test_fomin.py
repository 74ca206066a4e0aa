import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from permuton_rs.fomin import (BlockArray, apply_letter, block_f_bot, blocks_decode, blocks_encode, count,
                               delta_distance, f_bot, fomin_direct, fomin_distance_bound, fomin_inverse,
                               inverse_grid, inverse_rule, knuth_class, knuth_equivalent, knuth_neighbors,
                               ordered_word, ordering_bound, phi_closed_form, phi_continuous, phi_discrete,
                               prop_4_10_eta, reconstruct_permutation, rectangle_inverse, right_words, row_word,
                               row_word_from_lis, varphi, varphi_arrays, varphi_blocks)
from permuton_rs.rs_core import greene_bruteforce, lambda_grid, rs_correspondence

perms = st.integers(0, 7).flatmap(lambda n: st.permutations(list(range(1, n + 1))))
small_words = st.lists(st.integers(0, 4), max_size=7)


def test_rectangle_words_of_35142():
    g = fomin_direct((3, 5, 1, 4, 2))
    words = g.rectangle_words(1, 5, 2, 5)
    assert words == {"top": (3, 2, 2, 1), "right": (3, 2, 2), "bottom": (1, 0, 1, 0), "left": (0, 0, 1)}
    assert g.north_word() == (1, 1, 2, 2, 3)
    assert g.east_word() == (1, 1, 2, 2, 3)


def test_worked_example_of_f():
    assert fomin_inverse((3, 2, 2, 1), (3, 2, 2)) == ((1, 0, 1, 0), (0, 0, 1))


def test_apply_letter_single_moves():
    assert apply_letter((3, 2, 2, 1), 3) == ((2, 1, 2, 0), 0)
    assert apply_letter((1, 2), 3) == ((1, 2), 3)
    assert apply_letter((2, 1), 2) == ((1, 0), 0)
    assert apply_letter((), 2) == ((), 2)
    with pytest.raises(ValueError):
        apply_letter((1,), -1)


def test_inverse_rule_cases():
    assert inverse_rule(0, 0) == (0, 0, False)
    assert inverse_rule(1, 1) == (0, 0, True)
    assert inverse_rule(3, 3) == (2, 2, False)
    assert inverse_rule(2, 1) == (2, 1, False)


@pytest.mark.parametrize("n", range(0, 7))
def test_reconstruct_all_small(n):
    for sigma in itertools.permutations(range(1, n + 1)):
        g = fomin_direct(sigma)
        assert reconstruct_permutation(g.north_word(), g.east_word()) == sigma


def test_reconstruct_random_large():
    rng = random.Random(7)
    for _ in range(100):
        sigma = tuple(rng.sample(range(1, 101), 100))
        g = fomin_direct(sigma)
        assert reconstruct_permutation(g.north_word(), g.east_word()) == sigma


@given(perms)
def test_inverse_grid_equals_direct_grid(sigma):
    g = fomin_direct(sigma)
    h = inverse_grid(g.north_word(), g.east_word())
    assert (g.horizontal == h.horizontal).all()
    assert (g.vertical == h.vertical).all()
    assert g.points == h.points


def test_inverse_grid_rejects_bad_borders():
    with pytest.raises(ValueError):
        inverse_grid((2, 2), (1, 1))
    with pytest.raises(ValueError):
        inverse_grid((1,), (1, 1))


@given(perms)
def test_grid_encodes_subword_shapes(sigma):
    # number of k-labels on any up/right path to (i, j) is lambda_k(i, j)
    g = fomin_direct(sigma)
    lam = lambda_grid(sigma)
    n = g.n
    rng = random.Random(len(sigma))
    for _ in range(5):
        i, j = rng.randint(0, n), rng.randint(0, n)
        steps = ["R"] * i + ["U"] * j
        rng.shuffle(steps)
        path = [(0, 0)]
        for s in steps:
            a, b = path[-1]
            path.append((a + 1, b) if s == "R" else (a, b + 1))
        for k in range(1, 4):
            assert g.label_count(path, k) == lam.value(i, j, k)


@given(perms)
def test_rectangle_rule_is_f(sigma):
    g = fomin_direct(sigma)
    n = g.n
    rng = random.Random(sum(sigma))
    for _ in range(5):
        i, i2 = sorted(rng.randint(0, n) for _ in range(2))
        j, j2 = sorted(rng.randint(0, n) for _ in range(2))
        words = g.rectangle_words(i, i2, j, j2)
        assert fomin_inverse(words["top"], words["right"]) == (words["bottom"], words["left"])


@given(small_words, st.lists(st.integers(0, 4), max_size=6))
def test_mass_conservation(top, right):
    bottom, left = fomin_inverse(top, right)
    for h in range(1, 5):
        assert count(top, h) + count(left, h) == count(bottom, h) + count(right, h)


@given(small_words, st.lists(st.integers(0, 4), max_size=4), st.lists(st.integers(0, 4), max_size=4))
def test_letter_by_letter_factorization(top, r1, r2):
    b1, l1 = fomin_inverse(top, r1)
    b2, l2 = fomin_inverse(b1, r2)
    assert fomin_inverse(top, tuple(r1) + tuple(r2)) == (b2, l1 + l2)


@given(perms)
def test_full_grid_inverse_empties_the_top(sigma):
    g = fomin_direct(sigma)
    bottom, left = rectangle_inverse(g.north_word(), g.east_word())
    assert set(bottom) <= {0} and set(left) <= {0}


def test_fomin_transpose_symmetry():
    # the inverse permutation has the transposed grid
    for sigma in itertools.permutations(range(1, 6)):
        inv = [0] * 5
        for i, s in enumerate(sigma, start=1):
            inv[s - 1] = i
        g, gi = fomin_direct(sigma), fomin_direct(inv)
        assert g.north_word() == gi.east_word()
        assert (g.horizontal[1:, :] == gi.vertical[:, 1:].T).all()


def test_rs_from_top_border():
    # restricting the grid to a column gives the P growth chain
    sigma = (4, 2, 7, 6, 1, 3, 5)
    lam = lambda_grid(sigma)
    assert tuple(lam.partition(7, j) for j in range(8)) == rs_correspondence(sigma).p


# knuth


def test_knuth_moves():
    assert knuth_neighbors((2, 1, 3)) == {(2, 3, 1)}
    assert (1, 3, 2) in knuth_neighbors((3, 1, 2))
    assert knuth_class((1, 2, 3)) == {(1, 2, 3)}
    assert knuth_class((2, 1, 3)) == {(2, 1, 3), (2, 3, 1)}
    assert knuth_equivalent((2, 1, 3), (2, 3, 1))
    assert not knuth_equivalent((2, 1, 3), (3, 1, 2))


def test_knuth_bfs_matches_tableaux():
    for n in range(1, 6):
        seen = set()
        for w in itertools.product(range(1, 4), repeat=n):
            if w in seen:
                continue
            cls = knuth_class(w)
            seen |= cls
            p = rs_correspondence(w).p_rows()
            for u in cls:
                assert rs_correspondence(u).p_rows() == p


def test_knuth_implies_fomin_sample():
    rng = random.Random(11)
    for _ in range(30):
        w = tuple(rng.randint(1, 3) for _ in range(rng.randint(1, 5)))
        for u in knuth_class(w):
            assert fomin_distance_bound(w, u, 3, 3, check_conservation=True) == 0


def test_non_knuth_words_are_separated():
    # same content, different tableaux, so some applied word tells them apart
    assert fomin_distance_bound((2, 1), (1, 2), 2, 2) >= 1
    assert fomin_distance_bound((1, 1, 2), (2, 1, 1), 3, 2) >= 1


def test_right_words_enumeration():
    ws = list(right_words(2, 2))
    assert len(ws) == 1 + 2 + 4
    assert () in ws and (2, 1) in ws


# blocks


def test_blocks_encode_decode():
    q = BlockArray.from_rows([(1, 0, 2), (0, 1, 1)])
    w = blocks_encode(q)
    assert w == (0, 2, 2, 1, 2)
    assert blocks_decode(w, q.block_lengths(), 2) == q
    with pytest.raises(ValueError):
        blocks_decode((2, 1), (2,), 2)
    with pytest.raises(ValueError):
        BlockArray.from_rows([(1, -1)])
    assert q.entry(2, 1) == 1
    assert q.to_csv().splitlines()[0] == "i,k,q"


block_rows = st.integers(1, 3).flatmap(
    lambda r: st.lists(st.lists(st.integers(0, 4), min_size=r + 1, max_size=r + 1), min_size=1, max_size=3))


@given(block_rows, st.lists(st.integers(0, 3), min_size=1, max_size=4))
def test_varphi_matches_f_on_blocks(rows, b):
    r = len(rows[0]) - 1
    q = BlockArray.from_rows(rows)
    bvec = tuple(count(b, k) for k in range(r + 1))
    assume(all(x <= r for x in b))
    right = tuple(sorted(b))
    out, left = varphi_blocks(q.q, bvec)
    assert tuple(out) == block_f_bot(q, right).q
    assert tuple(count(f_left(blocks_encode(q), right), k) for k in range(r + 1)) == left


def f_left(top, right):
    return fomin_inverse(top, right)[1]


def test_varphi_example():
    # one block (0 1 2 2) with (1 2) applied
    assert varphi((1, 1, 2), (0, 1, 1)) == (2, 1, 1)


def test_delta_contraction_sample():
    rng = random.Random(5)
    for _ in range(2000):
        r, ell = rng.randint(1, 3), rng.randint(1, 3)
        q = BlockArray.from_rows([[rng.randint(0, 4) for _ in range(r + 1)] for _ in range(ell)])
        q2 = BlockArray.from_rows([[rng.randint(0, 4) for _ in range(r + 1)] for _ in range(ell)])
        w = tuple(rng.randint(0, r) for _ in range(rng.randint(0, 6)))
        assert delta_distance(block_f_bot(q, w), block_f_bot(q2, w)) <= delta_distance(q, q2)


def test_row_word_examples():
    q = row_word((2, 1, 2), 2)
    # P = [[1, 2], [2]]; block 1 is row 2
    assert q.q == ((0, 0, 1), (0, 1, 1))
    with pytest.raises(ValueError):
        row_word((3,), 2)


@given(st.integers(1, 3).flatmap(lambda r: st.tuples(st.just(r), st.lists(st.integers(1, r), max_size=8))))
@settings(deadline=None)
def test_row_word_from_lis(arg):
    r, w = arg
    assert row_word(w, r) == row_word_from_lis(w, r)


@given(st.integers(1, 3).flatmap(lambda r: st.tuples(st.just(r), st.lists(st.integers(1, r), max_size=8))))
@settings(deadline=None)
def test_row_word_is_knuth_equivalent(arg):
    r, w = arg
    assert knuth_equivalent(blocks_encode(row_word(w, r)), w) if w else True


def test_ordering_bound_and_eta():
    assert prop_4_10_eta((3, 2, 1), 3) == 0
    assert prop_4_10_eta((1, 2, 3), 3) == 2
    assert ordered_word((1, 2, 2, 3), 3) == (3, 2, 2, 1)
    assert ordering_bound(1) == 32
    rng = random.Random(2)
    for _ in range(50):
        r = rng.randint(1, 3)
        w = tuple(rng.randint(1, r) for _ in range(rng.randint(0, 8)))
        eta = prop_4_10_eta(w, r)
        d = fomin_distance_bound(w, ordered_word(w, r), 3, r)
        assert d <= ordering_bound(r) * eta
        if eta == 0:
            assert d == 0


# phi


def test_phi_examples():
    assert phi_discrete((3,), (2,)) == 3
    assert phi_discrete((2, 1), (1, 2)) == 2
    assert phi_continuous((1, 0.5), (0.5, 1)) == 1.0
    assert phi_continuous((Fraction(1, 3),), (Fraction(1, 2),)) == Fraction(1, 2)
    with pytest.raises(ValueError):
        phi_continuous((-1,), (1,))
    with pytest.raises(ValueError):
        phi_discrete((1, 2), (1,))
    with pytest.raises(ValueError):
        phi_closed_form((1, 2, 3), (1, 2, 3))


def test_phi_consistency_r2_sample():
    for a in itertools.product(range(4), repeat=2):
        for b in itertools.product(range(4), repeat=2):
            assert phi_continuous(a, b) == phi_discrete(a, b) == phi_closed_form(a, b)


rat = st.fractions(min_value=0, max_value=5, max_denominator=12)


@given(st.integers(1, 4).flatmap(lambda r: st.tuples(st.lists(rat, min_size=r, max_size=r),
                                                     st.lists(rat, min_size=r, max_size=r))),
       st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=10))
def test_phi_homogeneous(ab, c):
    a, b = ab
    assert phi_continuous([c * x for x in a], [c * y for y in b]) == c * phi_continuous(a, b)


@given(st.integers(1, 4).flatmap(lambda r: st.tuples(st.lists(st.integers(0, 5), min_size=r, max_size=r),
                                                     st.lists(st.integers(0, 5), min_size=r, max_size=r))))
def test_phi_bounds_and_monotone(ab):
    a, b = ab
    v = phi_discrete(a, b)
    assert max(a[0], b[0]) <= v <= max(sum(a), sum(b)) or v == max(a[0], b[0])
    bumped = list(a)
    bumped[0] += 1
    assert phi_discrete(bumped, b) >= v


@given(st.integers(2, 4).flatmap(lambda r: st.tuples(st.lists(st.integers(0, 5), min_size=r, max_size=r),
                                                     st.lists(st.integers(0, 5), min_size=r, max_size=r),
                                                     st.integers(1, r - 1))))
def test_phi_shift_property(arg):
    # phi of a tail equals its head beta plus the 1-count of the full bottom word at that level
    a, b, h = arg
    r = len(a)
    top = tuple(k for k in range(r, 0, -1) for _ in range(a[k - 1]))
    right = tuple(k for k in range(r, 0, -1) for _ in range(b[k - 1]))
    bottom = f_bot(top, right)
    assert phi_discrete(a[h - 1:], b[h - 1:]) == b[h - 1] + count(bottom, h)


@given(st.integers(1, 3).flatmap(lambda r: st.tuples(st.lists(st.integers(0, 4), min_size=r, max_size=r),
                                                     st.lists(st.integers(0, 4), min_size=r, max_size=r))))
def test_varphi_arrays_match_fbot(ab):
    a, b = ab
    r = len(a)
    from permuton_rs.fomin import decreasing_blocks
    res = varphi_arrays(decreasing_blocks(a), decreasing_blocks(b))
    top = tuple(k for k in range(r, 0, -1) for _ in range(a[k - 1]))
    right = tuple(k for k in range(r, 0, -1) for _ in range(b[k - 1]))
    bottom = f_bot(top, right)
    assert sum(row[1] for row in res) == count(bottom, 1)


def test_greene_from_fomin_row_word():
    # LIS of the row word equals LIS of the word
    rng = random.Random(9)
    for _ in range(50):
        r = rng.randint(1, 4)
        w = tuple(rng.randint(1, r) for _ in range(rng.randint(0, 9)))
        u = blocks_encode(row_word(w, r))
        for k in (1, 2):
            assert greene_bruteforce(u, k) == greene_bruteforce(w, k)
