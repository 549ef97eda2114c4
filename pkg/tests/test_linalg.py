import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import elementary_divisors, leibniz_det, rational_solve
from zcancel.linalg import (
    IntMatrix,
    format_matrix,
    hnf,
    is_hnf,
    left_kernel_basis,
    parse_matrix,
    snf,
    solve_in_row_lattice,
)

M = IntMatrix.from_rows


def matrices(max_dim=6, lo=-100, hi=100):
    return st.integers(1, max_dim).flatmap(
        lambda r: st.integers(1, max_dim).flatmap(
            lambda c: st.lists(
                st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r
            ).map(lambda rows: IntMatrix.from_rows(rows, c))
        )
    )


def test_hnf_generator_table():
    res = hnf(M([[1, 3, 0], [3, 1, 0]]))
    assert res.h == M([[1, 3, 0], [0, 8, 0]])
    assert res.u @ M([[1, 3, 0], [3, 1, 0]]) == res.h
    assert abs(res.u.det()) == 1


def test_hnf_trivial_cases():
    I = IntMatrix.identity(3)
    assert hnf(I).h == I and hnf(I).u == I
    res = hnf(M([[0, 8, 0]]))
    assert res.h == M([[0, 8, 0]]) and res.u == M([[1]])
    assert hnf(IntMatrix.zeros(2, 3)).h == IntMatrix.zeros(2, 3)


def test_hnf_reduces_above_pivot_and_sinks_zero_rows():
    res = hnf(M([[1, 0, -24], [0, 1, 8], [0, 0, 64], [2, 2, 32]]))
    assert res.h == M([[1, 0, 40], [0, 1, 8], [0, 0, 64], [0, 0, 0]])


@pytest.mark.parametrize(
    "rows, diag",
    [
        ([[1, 3, 0], [3, 1, 0]], (1, 8)),
        ([[1, 0, -24], [0, 1, 8], [0, 0, 64]], (1, 1, 64)),
        ([[0, 0], [0, 0]], (0, 0)),
    ],
)
def test_snf_examples(rows, diag):
    m = M(rows)
    res = snf(m)
    assert res.diagonal == diag
    assert res.l @ m @ res.r == res.d
    # minor-gcd oracle agrees
    assert list(diag) == elementary_divisors(rows)


def test_snf_oracle_values_for_examples():
    # gcd of entries 1, gcd of 2x2 minors 8
    assert elementary_divisors([[1, 3, 0], [3, 1, 0]]) == [1, 8]
    assert leibniz_det([[1, 0, -24], [0, 1, 8], [0, 0, 64]]) == 64


def test_solve_examples():
    m = M([[1, 3, 0], [3, 1, 0]])
    assert solve_in_row_lattice(m, (0, 8, 0)) == (3, -1)
    assert solve_in_row_lattice(m, (1, 0, 0)) is None
    assert solve_in_row_lattice(IntMatrix.identity(2), (5, -2)) == (5, -2)


def test_solve_nonintegral_by_oracle():
    sol = rational_solve([[1, 3, 0], [3, 1, 0]], (1, 0, 0))
    assert sol is not None and any(x.denominator != 1 for x in sol)


def test_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_in_row_lattice(IntMatrix.identity(2), (1, 2, 3))


@pytest.mark.parametrize(
    "rows, expected",
    [([[2], [1]], [[1, -2]]), ([[1, 0], [2, 0]], [[-2, 1]])],
)
def test_left_kernel_examples(rows, expected):
    assert left_kernel_basis(M(rows)).tolist() == expected


def test_left_kernel_identity_is_empty():
    k = left_kernel_basis(IntMatrix.identity(4))
    assert k.nrows == 0 and k.ncols == 4


def test_left_kernel_against_enumeration():
    # every small kernel vector is an integer combination of the basis
    m = M([[2, 4], [1, 2], [3, 6]])
    k = left_kernel_basis(m)
    assert k.nrows == 2
    for x in [(a, b, c) for a in range(-4, 5) for b in range(-4, 5) for c in range(-4, 5)]:
        if (IntMatrix.from_rows([x]) @ m).is_zero():
            assert solve_in_row_lattice(k, x) is not None


def test_matrix_text_roundtrip():
    text = "2 3\n1 3 0\n3 1 0\n"
    m = parse_matrix(text)
    assert m == M([[1, 3, 0], [3, 1, 0]])
    assert format_matrix(m) == text
    with pytest.raises(ValueError):
        parse_matrix("2 3\n1 3 0\n")
    with pytest.raises(ValueError):
        parse_matrix("1 3\n1 3\n")


def test_big_integers_stay_exact():
    big = 10**40
    m = M([[big, big + 1], [big - 1, big]])
    assert m.det() == 1
    res = snf(m)
    assert res.diagonal == (1, 1)
    assert res.l @ m @ res.r == res.d


@settings(max_examples=500, deadline=None)
@given(matrices())
def test_normal_form_invariants(m):
    h = hnf(m)
    assert h.u @ m == h.h
    assert abs(h.u.det()) == 1
    assert is_hnf(h.h)
    assert hnf(h.h).h == h.h
    s = snf(m)
    assert s.l @ m @ s.r == s.d
    assert abs(s.l.det()) == 1 and abs(s.r.det()) == 1
    diag = s.diagonal
    for i in range(s.d.nrows):
        for j in range(s.d.ncols):
            if i != j:
                assert s.d[i, j] == 0
    assert all(d >= 0 for d in diag)
    nz = [d for d in diag if d]
    assert diag[: len(nz)] == tuple(nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


@settings(max_examples=200, deadline=None)
@given(matrices(max_dim=4, lo=-30, hi=30))
def test_snf_matches_minor_gcds(m):
    assert list(snf(m).diagonal) == elementary_divisors(m.tolist())


@settings(max_examples=200, deadline=None)
@given(matrices(max_dim=4, lo=-10, hi=10), st.lists(st.integers(-20, 20), min_size=4, max_size=4))
def test_solve_iff_hnf_unchanged(m, v):
    v = tuple(v[: m.ncols])
    x = solve_in_row_lattice(m, v)
    stacked = hnf(m.vstack(IntMatrix.from_rows([v], m.ncols))).h
    same = tuple(r for r in stacked.rows if any(r)) == tuple(r for r in hnf(m).h.rows if any(r))
    assert (x is not None) == same
    if x is not None:
        assert IntMatrix.from_rows([x], m.nrows) @ m == IntMatrix.from_rows([v], m.ncols)


@settings(max_examples=200, deadline=None)
@given(matrices(max_dim=5, lo=-6, hi=6))
def test_left_kernel_rank(m):
    k = left_kernel_basis(m)
    rank = hnf(m).rank
    assert k.nrows == m.nrows - rank
    if k.nrows:
        assert (k @ m).is_zero()
        # basis vectors are independent: the kernel block has full rank
        assert hnf(k).rank == k.nrows


def test_bareiss_matches_leibniz():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(1, 5)
        rows = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        assert M(rows).det() == leibniz_det(rows)
