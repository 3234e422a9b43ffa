import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nokbody.errors import NokError
from nokbody.exactmath import Lattice, subgroup_index
from nokbody.semigroup import (
    GradedSemigroup, boundary_lattice, group, ind, level_index, minimal_generators, q, slice,
    slice_counts, strongly_nonnegative, sumset,
)

SIMPLEX = GradedSemigroup.from_generators([(0, 0, 1), (1, 0, 1), (0, 1, 1)])
INDEX2 = GradedSemigroup.from_generators([(0, 1), (2, 1)])


def bfs_slice(gens, k):
    """Horizontal parts of all multisets of generators with level sum k (no DP sharing)."""
    out = set()
    frontier = {((0,) * (len(gens[0]) - 1), 0)}
    seen = set(frontier)
    while frontier:
        nxt = set()
        for pt, lvl in frontier:
            if lvl == k:
                out.add(pt)
                continue
            for g in gens:
                if lvl + g[-1] <= k:
                    node = (tuple(a + b for a, b in zip(pt, g[:-1])), lvl + g[-1])
                    if node not in seen:
                        seen.add(node)
                        nxt.add(node)
        frontier = nxt
    return out


def level_zero_index_oracle(gens, d, box=4):
    """[Z^d : G(S) cap level 0] for full-dimensional S via gcd of d x d minors of small combinations."""
    vecs = []
    for coeffs in itertools.product(range(-box, box + 1), repeat=len(gens)):
        v = [sum(c * g[i] for c, g in zip(coeffs, gens)) for i in range(d + 1)]
        if v[-1] == 0 and any(v[:-1]):
            vecs.append(v[:-1])
    g = 0
    for rows in itertools.combinations(vecs, d):
        if d == 1:
            g = math.gcd(g, rows[0][0])
        else:
            g = math.gcd(g, rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0])
        if g == 1:
            break
    return g


def test_slice_examples():
    assert slice(INDEX2, 3) == {(0,), (2,), (4,), (6,)}
    assert slice(GradedSemigroup.from_generators([(1, 2)]), 1) == frozenset()
    assert slice(SIMPLEX, 0) == {(0, 0)}
    with pytest.raises(NokError) as e:
        slice(INDEX2, -1)
    assert e.value.code == "NEGATIVE_LEVEL"


@pytest.mark.parametrize("gens", [
    [(0, 1), (2, 1)], [(0, 2), (1, 2), (2, 2)], [(0, 1), (3, 1), (1, 2)], [(1, 2), (3, 4)],
    [(0, 0, 1), (1, 0, 1), (0, 1, 1)], [(1, 2, 1), (-1, 0, 2), (0, 3, 3)],
])
def test_slice_matches_bfs(gens):
    S = GradedSemigroup.from_generators(gens)
    for k in range(9):
        assert slice(S, k) == bfs_slice(gens, k)


def test_sampled_slice_out_of_range():
    S = GradedSemigroup.sampled(1, {1: [(0,), (1,)], 2: [(0,), (1,), (2,)]})
    assert slice(S, 2) == {(0,), (1,), (2,)}
    with pytest.raises(NokError) as e:
        slice(S, 3)
    assert e.value.code == "OUT_OF_RANGE"


def test_group_examples():
    G = group(INDEX2)
    assert (0, 1) in G and (2, 1) in G and (2, 0) in G and (1, 0) not in G
    assert G.rank == 2 and subgroup_index(G, Lattice.full(2)) == 2
    assert group(GradedSemigroup.from_generators([(1, 1)])).basis == ((1, 1),)
    G = group(GradedSemigroup.from_generators([(0, 2), (0, 3)]))
    assert G.rank == 1 and (0, 1) in G and (1, 0) not in G
    with pytest.raises(NokError) as e:
        group(GradedSemigroup.from_generators([]))
    assert e.value.code == "EMPTY_SEMIGROUP"


def test_level_index_examples():
    assert level_index(INDEX2) == 1
    S = GradedSemigroup.from_generators([(1, 2), (3, 4)])
    assert level_index(S) == 2
    assert all(not slice(S, k) for k in range(1, 12, 2))
    assert level_index(GradedSemigroup.from_generators([(0, 2), (0, 3)])) == 1


def test_boundary_lattice_examples():
    assert boundary_lattice(INDEX2).basis == ((1, 0),)
    assert boundary_lattice(GradedSemigroup.from_generators([(1, 1)])).rank == 0
    B = boundary_lattice(SIMPLEX)
    assert subgroup_index(B, Lattice.from_generators([(1, 0, 0), (0, 1, 0)], 3)) == 1


def test_ind_examples():
    assert ind(INDEX2) == 2 == level_zero_index_oracle([(0, 1), (2, 1)], 1)
    assert ind(GradedSemigroup.from_generators([(0, 1), (1, 1)])) == 1
    assert ind(GradedSemigroup.from_generators([(1, 1)])) == 1


@pytest.mark.parametrize("gens", [
    [(0, 0, 1), (2, 0, 1), (0, 2, 1)], [(0, 0, 1), (1, 2, 1), (2, 1, 1)], [(0, 0, 1), (1, 0, 1), (0, 1, 1)],
    [(0, 0, 2), (1, 1, 2), (3, 0, 2)], [(0, 1), (3, 1)], [(0, 2), (2, 2)],
])
def test_ind_matches_minor_gcd(gens):
    S = GradedSemigroup.from_generators(gens)
    assert ind(S) == level_zero_index_oracle(gens, S.d)


def test_q_examples():
    assert q(INDEX2) == 1
    assert q(GradedSemigroup.from_generators([(1, 1)])) == 0
    assert q(SIMPLEX) == 2


def test_strongly_nonnegative():
    assert strongly_nonnegative(INDEX2).ok
    S = GradedSemigroup.sampled(1, {k: [(i,) for i in range(k + 1)] for k in range(1, 13)})
    check = strongly_nonnegative(S)
    assert check.ok and check.q_estimate == 1 and not check.exact
    with pytest.raises(NokError) as e:
        strongly_nonnegative(GradedSemigroup.sampled(1, {1: [(0,)]}))
    assert e.value.code == "INSUFFICIENT_SAMPLES"


def test_sumset_examples():
    assert sumset([(0,), (2,)], 3) == {(0,), (2,), (4,), (6,)}
    tri = [(0, 0), (1, 0), (0, 1)]
    brute = {(a[0] + b[0], a[1] + b[1]) for a in tri for b in tri}
    assert sumset(tri, 2) == brute and len(brute) == 6
    assert sumset(tri, 1) == set(tri)
    with pytest.raises(NokError) as e:
        sumset([], 2)
    assert e.value.code == "EMPTY_SET"


points2 = st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(points2, st.integers(1, 4))
def test_sumset_monotone_with_origin(A, n):
    A = set(A) | {(0, 0)}
    assert len(sumset(A, n)) <= len(sumset(A, n + 1))
    assert sumset(A, n) <= sumset(A, n + 1)


generators2 = st.lists(st.tuples(st.integers(-2, 3), st.integers(-2, 3), st.integers(1, 3)), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(generators2)
def test_semigroup_law_and_index_support(gens):
    S = GradedSemigroup.from_generators(gens)
    m = level_index(S)
    for a in range(4):
        for b in range(4 - a):
            total = slice(S, a + b)
            assert {tuple(x + y for x, y in zip(u, v)) for u in slice(S, a) for v in slice(S, b)} <= total
    for k in range(1, 7):
        if slice(S, k):
            assert k % m == 0


unimodular = st.sampled_from([((1, 0), (0, 1)), ((0, 1), (1, 0)), ((1, 1), (0, 1)), ((1, 0), (-2, 1)),
                              ((2, 1), (1, 1)), ((-1, 0), (0, 1)), ((3, 2), (1, 1))])


@settings(max_examples=60, deadline=None)
@given(generators2, unimodular)
def test_invariants_under_unimodular_maps(gens, T):
    S = GradedSemigroup.from_generators(gens)
    TS = S.transform(T)
    assert (level_index(TS), q(TS), ind(TS)) == (level_index(S), q(S), ind(S))
    assert slice_counts(TS, range(5)) == slice_counts(S, range(5))


def test_minimal_generators_recovers_generators():
    gens = [(0, 1), (3, 1), (1, 2)]
    S = GradedSemigroup.from_generators(gens)
    slices = {k: slice(S, k) for k in range(1, 7)}
    assert sorted(minimal_generators(slices, 6)) == sorted(gens)
    assert minimal_generators({}, 4) == []


def test_sampled_points_are_exact_counts():
    S = GradedSemigroup.sampled(1, {1: [(0,), (2,)], 2: [(0,), (2,), (4,)]})
    assert slice_counts(S, [0, 1, 2]) == {0: 1, 1: 2, 2: 3}
    assert level_index(S) == 1 and q(S) == 1 and ind(S) == 2
    assert Fraction(len(slice(S, 2)), 2) == Fraction(3, 2)
