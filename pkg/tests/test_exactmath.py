import itertools
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from nokbody.errors import NokError
from nokbody.exactmath import (
    Lattice, det, hnf, identity, lex_cmp, matmul, rank, saturate, snf, subgroup_index,
)

small = st.integers(-6, 6)


def matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


def sympy_det(M):
    return int(sympy.Matrix(M).det())


def is_row_hnf(H):
    last = -1
    seen_zero = False
    for i, row in enumerate(H):
        nz = [j for j, x in enumerate(row) if x]
        if not nz:
            seen_zero = True
            continue
        assert not seen_zero, "zero rows must come last"
        p = nz[0]
        assert p > last and row[p] > 0
        for k in range(i):
            assert 0 <= H[k][p] < row[p]
        last = p
    return True


def coset_count(A_basis, n):
    """Number of cosets of the full-rank lattice A in Z^n, by enumeration in a box."""
    bound = abs(sympy_det(A_basis))
    box = list(itertools.product(range(bound), repeat=n))
    Minv = sympy.Matrix(A_basis).T.inv()
    reps = []
    for v in box:
        if not any(all(x.is_integer for x in Minv * sympy.Matrix([a - b for a, b in zip(v, r)])) for r in reps):
            reps.append(v)
    return len(reps)


def test_hnf_examples():
    assert hnf(identity(2)) == (identity(2), identity(2))
    H, U = hnf([[2, 0], [0, 3]])
    assert H == [[2, 0], [0, 3]] and U == identity(2)
    H, U = hnf([[2, 4], [1, 3]])
    assert abs(det(H)) == 2
    assert matmul(U, [[2, 4], [1, 3]]) == H
    assert abs(det(U)) == 1
    assert is_row_hnf(H)


def test_hnf_zero_matrix():
    H, U = hnf([[0, 0], [0, 0]])
    assert H == [[0, 0], [0, 0]] and U == identity(2)


def test_snf_examples():
    D, U, V = snf([[2, 0], [0, 3]])
    assert D == [[1, 0], [0, 6]]
    assert matmul(matmul(U, [[2, 0], [0, 3]]), V) == D
    assert snf([[0, 0], [0, 0]])[0] == [[0, 0], [0, 0]]
    assert snf(identity(3))[0] == identity(3)


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_hnf_reconstruction(M):
    H, U = hnf(M)
    assert matmul(U, M) == H
    assert abs(sympy_det(U)) == 1
    assert is_row_hnf(H)
    assert rank(H) == sympy.Matrix(M).rank()


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_snf_reconstruction(M):
    D, U, V = snf(M)
    assert matmul(matmul(U, M), V) == D
    assert abs(sympy_det(U)) == 1 and abs(sympy_det(V)) == 1
    diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
    assert all(D[i][j] == 0 for i in range(len(D)) for j in range(len(D[0])) if i != j)
    assert all(x >= 0 for x in diag)
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) if a == 0 else b % a == 0
    if len(M) == len(M[0]):
        assert math.prod(diag) == abs(sympy_det(M))


def test_subgroup_index_examples():
    Z2 = Lattice.full(2)
    A = Lattice.from_generators([(2, 0), (0, 2)], 2)
    assert subgroup_index(A, Z2) == 4 == coset_count([[2, 0], [0, 2]], 2)
    assert subgroup_index(Z2, Z2) == 1
    assert subgroup_index(Lattice.from_generators([(1, 0)], 2), Z2) == math.inf


def test_subgroup_index_not_subgroup():
    with pytest.raises(NokError) as e:
        subgroup_index(Lattice.full(2), Lattice.from_generators([(2, 0), (0, 2)], 2))
    assert e.value.code == "NOT_SUBGROUP"
    with pytest.raises(NokError) as e:
        subgroup_index(Lattice.from_generators([(0, 1)], 2), Lattice.from_generators([(1, 0)], 2))
    assert e.value.code == "NOT_SUBGROUP"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=2, max_size=2), min_size=2, max_size=2))
def test_subgroup_index_matches_coset_enumeration(B):
    if sympy_det(B) == 0:
        return
    assert subgroup_index(Lattice.from_generators(B, 2), Lattice.full(2)) == coset_count(B, 2)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3),
       st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3))
def test_subgroup_index_multiplicative(X, Y):
    # C = Z^3, B = X.Z^3, A = Y.X.Z^3 (rows as generators)
    if sympy_det(X) == 0 or sympy_det(Y) == 0:
        return
    C = Lattice.full(3)
    B = Lattice.from_generators(X, 3)
    A = Lattice.from_generators(matmul(Y, X), 3)
    assert subgroup_index(A, B) * subgroup_index(B, C) == subgroup_index(A, C)
    assert subgroup_index(A, C) == abs(sympy_det(Y) * sympy_det(X))


def test_saturate_examples():
    assert saturate(Lattice.from_generators([(2, 2)], 2)).basis == ((1, 1),)
    assert saturate(Lattice.from_generators([(1, 0, 2)], 3)).basis == ((1, 0, 2),)
    L = Lattice.from_generators([(1, -1, 0), (0, 2, -2)], 3)
    sat = saturate(L)
    assert sat.rank == 2
    assert all(sum(v) == 0 for v in sat.basis)
    plane = Lattice.from_generators([(1, -1, 0), (0, 1, -1)], 3)
    assert subgroup_index(sat, plane) == 1 and subgroup_index(plane, sat) == 1
    assert subgroup_index(L, sat) == 2


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=3))
def test_saturate_idempotent_and_finite_index(gens):
    L = Lattice.from_generators(gens, 3)
    sat = saturate(L)
    assert saturate(sat) == sat
    assert sat.rank == L.rank
    if L.rank:
        assert subgroup_index(L, sat) != math.inf
        # every integer point of the rational span within a box lies in the saturation
        for v in itertools.product(range(-2, 3), repeat=3):
            if L.in_span(v):
                assert v in sat


def test_lex_cmp_examples():
    assert lex_cmp((0, 3), (2, 1)) == -1
    assert lex_cmp((1, 1), (1, 1)) == 0
    assert lex_cmp((1, 0, 5), (1, 0, 4)) == 1
    with pytest.raises(NokError) as e:
        lex_cmp((1,), (1, 2))
    assert e.value.code == "LENGTH_MISMATCH"


vec3 = st.lists(st.integers(-20, 20), min_size=3, max_size=3).map(tuple)


@given(vec3, vec3, vec3)
def test_lex_cmp_total_and_translation_invariant(a, b, c):
    assert lex_cmp(a, b) == -lex_cmp(b, a)
    assert (lex_cmp(a, b) == 0) == (a == b)
    shifted = lex_cmp(tuple(x + z for x, z in zip(a, c)), tuple(y + z for y, z in zip(b, c)))
    assert shifted == lex_cmp(a, b)


def test_det_and_rank_against_sympy():
    M = [[Fraction(1, 2), 3, 1], [2, Fraction(-1, 3), 0], [1, 1, 1]]
    assert det(M) == Fraction(str(sympy.Matrix([[sympy.Rational(1, 2), 3, 1],
                                                [2, sympy.Rational(-1, 3), 0], [1, 1, 1]]).det()))
    assert rank([[1, 2, 3], [2, 4, 6], [0, 0, 1]]) == 2
