import random
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from oracles import elementary_divisors, span_contains
from zcancel.groups import (
    AmbientFunctional,
    ContainmentError,
    GroupInvariants,
    RankOneCancelInstance,
    SurjectivityError,
    common_complement_search,
    contains,
    coordinates,
    full_lattice,
    image_of_functional,
    kernel_of_functional,
    lattice_from_generators,
    member,
    pair_iso_decide,
    quotient_invariants,
    rank_one_cancellation,
    scan,
    split_check,
    stable_range_witness,
    theorem1_images,
    zero_lattice,
)
from zcancel.linalg import IntMatrix

L = lattice_from_generators
A0 = L(3, [[1, 3, 0], [3, 1, 0]])
A1 = L(3, [[1, 0, -24], [0, 1, 8], [0, 0, 64]])
A2 = full_lattice(3)
F = AmbientFunctional((1, 0, 0))
G = AmbientFunctional((0, 1, 0))


def random_unimodular(rng, n, steps=8):
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            rows[0] = [-x for x in rows[0]]
            continue
        c = rng.randint(-3, 3)
        rows[i] = [a + c * b for a, b in zip(rows[i], rows[j])]
        if rng.random() < 0.3:
            rows[i], rows[j] = rows[j], rows[i]
    return IntMatrix.from_rows(rows)


def test_canonical_bases():
    assert A0.basis.tolist() == [[1, 3, 0], [0, 8, 0]]
    assert L(3, IntMatrix.identity(3)).basis == IntMatrix.identity(3)
    assert L(3, [[0, 1, 8], [0, 0, 64]]).basis.tolist() == [[0, 1, 8], [0, 0, 64]]


def test_generator_dimension_mismatch():
    with pytest.raises(ValueError):
        L(3, [[1, 2]])


def test_membership_examples():
    assert member(A0, (8, 0, 0)) and member(A0, (0, 8, 0))
    assert not member(A0, (1, 0, 0))
    assert member(A1, (0, 0, 0))
    with pytest.raises(ValueError):
        member(A0, (1, 0))


def test_membership_matches_bounded_span():
    gens = [[1, 3, 0], [3, 1, 0]]
    for v in [(8, 0, 0), (4, 4, 0), (2, 6, 0), (1, 0, 0), (0, 0, 1), (5, 7, 0)]:
        # coefficients never exceed 8 for these targets
        assert member(A0, v) == span_contains(gens, v, 8)


def test_coordinates_reconstruct():
    c = coordinates(A1, (1, 0, -24))
    assert c is not None
    assert tuple(sum(x * r[j] for x, r in zip(c, A1.basis.rows)) for j in range(3)) == (1, 0, -24)
    assert coordinates(A1, (0, 0, 1)) is None


def test_quotient_invariant_examples():
    assert quotient_invariants(A2, A0) == GroupInvariants(1, (8,))
    assert quotient_invariants(A2, A1) == GroupInvariants(0, (64,))
    assert quotient_invariants(A1, A1) == GroupInvariants(0, ())
    # oracle: minor gcds of the generator matrices
    assert elementary_divisors([[1, 3, 0], [3, 1, 0]]) == [1, 8]
    assert elementary_divisors([[1, 0, -24], [0, 1, 8], [0, 0, 64]]) == [1, 1, 64]
    assert str(GroupInvariants(1, (8,))) == "Z + Z/8"


def test_group_invariants_validation():
    with pytest.raises(ValueError):
        GroupInvariants(0, (4, 6))
    with pytest.raises(ValueError):
        GroupInvariants(0, (1,))


def test_quotient_requires_containment():
    with pytest.raises(ContainmentError):
        quotient_invariants(A0, A2)


def test_kernel_examples():
    assert kernel_of_functional(A1, F).basis.tolist() == [[0, 1, 8], [0, 0, 64]]
    assert kernel_of_functional(A0, G).basis.tolist() == [[8, 0, 0]]
    assert kernel_of_functional(A2, F).basis.tolist() == [[0, 1, 0], [0, 0, 1]]
    assert kernel_of_functional(A0, F) == L(3, [[0, 8, 0]])
    assert kernel_of_functional(zero_lattice(3), F).rank == 0
    with pytest.raises(ValueError):
        kernel_of_functional(A0, AmbientFunctional((1, 0)))


def test_pair_iso_examples():
    kf = [kernel_of_functional(x, F) for x in (A0, A1, A2)]
    kg = [kernel_of_functional(x, G) for x in (A0, A1, A2)]
    assert pair_iso_decide(kf[0], kf[2], kg[0], kg[2])
    assert pair_iso_decide(kf[1], kf[2], kg[1], kg[2])
    assert not pair_iso_decide(zero_lattice(3), A2, zero_lattice(3), L(3, [[1, 0, 0], [0, 1, 0]]))
    with pytest.raises(ContainmentError):
        pair_iso_decide(A2, A0, A0, A2)


def test_theorem1_examples():
    z2 = full_lattice(2)
    f2, g2 = AmbientFunctional((1, 0)), AmbientFunctional((0, 1))
    r = theorem1_images(z2, f2, g2)
    assert r.f_of_ker_g == r.g_of_ker_f == full_lattice(1)
    r = theorem1_images(L(2, [[1, 1], [2, 0]]), f2, g2)
    assert r.f_of_ker_g == r.g_of_ker_f == L(1, [[2]])
    r = theorem1_images(A1, F, G)
    assert r.f_of_ker_g == r.g_of_ker_f == full_lattice(1)
    with pytest.raises(SurjectivityError):
        theorem1_images(L(2, [[2, 0], [0, 1]]), f2, g2)


def test_split_examples():
    assert split_check(A0, L(3, [[0, 8, 0]]), (1, 3, 0), F)
    assert split_check(A2, kernel_of_functional(A2, G), (3, 1, 0), G)
    assert not split_check(full_lattice(2), L(2, [[0, 2]]), (1, 0))
    with pytest.raises(ContainmentError):
        split_check(A0, A2, (1, 3, 0))
    with pytest.raises(ContainmentError):
        split_check(A0, L(3, [[0, 8, 0]]), (1, 0, 0))


def test_split_wrong_functional_fails():
    # (1,3,0) splits A0 but f is not 1 on it for g
    assert not split_check(A0, L(3, [[0, 8, 0]]), (1, 3, 0), G)


def test_common_complement_examples():
    s = lambda v: L(2, [v])
    assert common_complement_search(s((0, 1)), s((5, 2)), 100) == (None, True)
    assert common_complement_search(s((0, 1)), s((0, 1)), 10) == ((1, 0), True)
    assert common_complement_search(s((1, 0)), s((7, 3)), 10) == ((2, 1), True)


def test_common_complement_matches_exhaustive_scan():
    # oracle: first vector in scan order with unit determinants
    rng = random.Random(5)
    s = lambda v: L(2, [v])
    for _ in range(100):
        while True:
            g1 = (rng.randint(-6, 6), rng.randint(-6, 6))
            g2 = (rng.randint(-6, 6), rng.randint(-6, 6))
            if gcd(*g1) == 1 and gcd(*g2) == 1:
                break
        h1, h2 = s(g1).basis[0], s(g2).basis[0]
        first = next(
            (v for v in scan(2, 20, 1)
             if abs(v[0] * h1[1] - v[1] * h1[0]) == 1 and abs(v[0] * h2[1] - v[1] * h2[0]) == 1),
            None,
        )
        v, complete = common_complement_search(s(g1), s(g2), 20)
        assert v == first
        if v is None:
            assert complete
            # nothing further out either
            for w in scan(2, 40, 21):
                assert not (abs(w[0] * h1[1] - w[1] * h1[0]) == 1 and abs(w[0] * h2[1] - w[1] * h2[0]) == 1)


def test_common_complement_rejects_bad_input():
    with pytest.raises(ValueError):
        common_complement_search(full_lattice(2), L(2, [[1, 0]]), 5)


def test_scan_order():
    assert list(scan(1, 2)) == [(0,), (1,), (-1,), (2,), (-2,)]
    first = list(scan(2, 1, 1))
    assert first[:3] == [(0, 1), (0, -1), (1, 0)]
    assert len(first) == 8


def test_stable_range_examples():
    assert stable_range_witness(3, 2) == -1
    assert stable_range_witness(1, 0) == 0
    assert stable_range_witness(2, 5) is None
    # oracle: scan k in [-10, 10]
    assert not any(abs(2 + 5 * k) == 1 for k in range(-10, 11))
    with pytest.raises(ValueError):
        stable_range_witness(2, 4)


@settings(max_examples=300, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50))
def test_stable_range_against_scan(a, b):
    if gcd(a, b) != 1:
        return
    k = stable_range_witness(a, b)
    hits = [j for j in range(-200, 201) if abs(a + b * j) == 1]
    if k is None:
        assert hits == []
    else:
        assert abs(a + b * k) == 1 and k in hits


def test_rank_one_examples():
    r = rank_one_cancellation(RankOneCancelInstance(3, 2, 5))
    assert r.ok
    assert r.kernel == L(2, [[15, -2]])
    assert r.preimage == L(1, [[15]]) and r.m == 5
    r = rank_one_cancellation(RankOneCancelInstance(3, 1, 0))
    assert r.ok and r.kernel == L(2, [[0, 1]]) and r.m == 1
    r = rank_one_cancellation(RankOneCancelInstance(1, 1, 1))
    assert r.ok and r.kernel == L(2, [[1, -1]])
    with pytest.raises(SurjectivityError):
        rank_one_cancellation(RankOneCancelInstance(3, 2, 4))
    with pytest.raises(ValueError):
        rank_one_cancellation(RankOneCancelInstance(0, 1, 1))


def test_image_of_functional():
    assert image_of_functional(A0, F) == full_lattice(1)
    assert image_of_functional(L(3, [[0, 8, 0]]), G) == L(1, [[8]])


# ---- properties -------------------------------------------------------------

gen_rows = st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=4)


@settings(max_examples=100, deadline=None)
@given(gen_rows, st.randoms(use_true_random=False))
def test_canonicalization_under_row_operations(rows, r):
    u = random_unimodular(r, len(rows)) if len(rows) > 1 else IntMatrix.from_rows([[r.choice((1, -1))]])
    moved = u @ IntMatrix.from_rows(rows, 3)
    assert L(3, rows) == L(3, moved)
    assert L(3, rows).basis == L(3, moved).basis


@settings(max_examples=100, deadline=None)
@given(gen_rows, st.randoms(use_true_random=False))
def test_quotient_invariants_under_ambient_change(rows, r):
    big = L(3, rows + [[1, 0, 0]])
    small = L(3, [[2 * x for x in row] for row in rows])
    t = random_unimodular(r, 3)
    big2 = L(3, big.basis @ t)
    small2 = L(3, small.basis @ t)
    assert quotient_invariants(big, small) == quotient_invariants(big2, small2)


def _sub_pair(r):
    b = L(2, [[r.randint(1, 4), r.randint(-3, 3)], [0, r.randint(1, 4)]])
    c = r.randint(1, 3)
    s = L(2, [[c * x for x in b.basis[0]]])
    return s, b


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_pair_iso_reflexive_symmetric(r):
    a0, a1 = _sub_pair(r)
    b0, b1 = _sub_pair(r)
    assert pair_iso_decide(a0, a1, a0, a1)
    assert pair_iso_decide(a0, a1, b0, b1) == pair_iso_decide(b0, b1, a0, a1)


@settings(max_examples=100, deadline=None)
@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_split_decomposes_members(x, y, t):
    k = kernel_of_functional(A0, F)
    z = (1, 3, 0)
    assert split_check(A0, k, z, F)
    v = tuple(x * a + y * b for a, b in zip((1, 3, 0), (3, 1, 0)))
    v = tuple(vi + t * 8 * (i == 1) for i, vi in enumerate(v))
    assert member(A0, v)
    rest = tuple(vi - F(v) * zi for vi, zi in zip(v, z))
    assert member(k, rest)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 30), st.integers(-30, 30), st.integers(-30, 30))
def test_rank_one_kernel_rank(d, k, s):
    if gcd(k, s) != 1:
        return
    rep = rank_one_cancellation(RankOneCancelInstance(d, k, s))
    assert rep.kernel.rank == 1
    assert rep.ok
    if s:
        assert abs(rep.kernel.basis[0][0]) == d * abs(s)


def test_containment_helper():
    assert contains(A2, A1) and contains(A1, A0) and not contains(A0, A1)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_shell_matches_filtered_product(dim):
    from itertools import product

    from zcancel.groups import shell, zigzag

    for r in range(0, 4):
        vals = sorted(range(-r, r + 1), key=zigzag)
        ref = [v for v in product(vals, repeat=dim) if max(map(abs, v)) == r]
        assert list(shell(dim, r)) == ref
