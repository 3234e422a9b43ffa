"""Exact convex hulls, Newton-Okounkov bodies and lattice-normalized volumes.

Hulls are computed by an exact beneath-beyond sweep inside the affine hull of
the input (affine dimension at most 4).  Volumes come from a fan
triangulation: fan from the lexicographically smallest vertex over every
facet not containing it, recursing into the facets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NokError
from .exactmath import Lattice, det, inverse, nullspace, primitive, rank, rref
from .semigroup import GradedSemigroup, boundary_lattice, ind, level_index, q

MAX_DIM = 4


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class _Facet:
    normal: tuple
    offset: int
    on: frozenset  # indices of points lying on the hyperplane


@dataclass(frozen=True)
class RatPolytope:
    """Convex hull of finitely many rational points.

    ``inequalities`` are pairs ``(a, b)`` meaning ``a . x <= b`` and
    ``equations`` pairs meaning ``a . x == b``; all entries are integers.
    """

    vertices: tuple
    dim: int
    ambient: int
    equations: tuple = ()
    inequalities: tuple = ()
    level: Fraction | None = None

    def contains(self, x: Sequence) -> bool:
        return all(_dot(a, x) == b for a, b in self.equations) and all(
            _dot(a, x) <= b for a, b in self.inequalities
        )

    def scaled_contains(self, x: Sequence, n: int) -> bool:
        """Membership in the dilation ``n * P``."""
        return all(_dot(a, x) == n * b for a, b in self.equations) and all(
            _dot(a, x) <= n * b for a, b in self.inequalities
        )

    def lattice_points(self, n: int = 1) -> list[tuple]:
        """Integer points of ``n * P``, sorted."""
        lo = [math.floor(min(v[i] for v in self.vertices) * n) for i in range(self.ambient)]
        hi = [math.ceil(max(v[i] for v in self.vertices) * n) for i in range(self.ambient)]
        out: list[tuple] = []

        def rec(prefix):
            i = len(prefix)
            if i == self.ambient:
                if self.scaled_contains(prefix, n):
                    out.append(tuple(prefix))
                return
            for x in range(lo[i], hi[i] + 1):
                rec(prefix + [x])

        rec([])
        return out


# --------------------------------------------------------------------------
# Affine frames


@dataclass
class _Frame:
    origin: tuple
    basis: list  # independent difference vectors
    pivots: list
    inv: list  # inverse of basis restricted to pivot columns

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, x) -> tuple:
        diff = _sub(x, self.origin)
        y = [diff[p] for p in self.pivots]
        return tuple(sum(y[i] * self.inv[i][j] for i in range(self.dim)) for j in range(self.dim))


def _frame(points: Sequence[tuple]) -> _Frame:
    origin = min(points)
    basis: list = []
    for p in points:
        diff = _sub(p, origin)
        if any(diff) and rank(basis + [diff]) > len(basis):
            basis.append(diff)
            if len(basis) == len(origin):
                break
    if not basis:
        return _Frame(origin, [], [], [])
    _, pivots = rref(basis)
    inv = inverse([[b[p] for p in pivots] for b in basis])
    return _Frame(origin, basis, pivots, inv)


def _integerize(rows: Sequence[Sequence]) -> tuple[list[tuple], int]:
    """Scale rational points by their common denominator; returns (points, scale)."""
    den = math.lcm(*(Fraction(x).denominator for r in rows for x in r)) if rows else 1
    return [tuple(int(Fraction(x) * den) for x in r) for r in rows], den


# --------------------------------------------------------------------------
# Full-dimensional hull in Z^q


def _affine_rank(pts: Sequence[tuple]) -> int:
    if not pts:
        return -1
    base = pts[0]
    return rank([_sub(p, base) for p in pts[1:]])


def _independent_subset(pts: Sequence[tuple], size: int) -> list[tuple]:
    chosen = [pts[0]]
    diffs: list = []
    for p in pts[1:]:
        if len(chosen) == size:
            break
        cand = diffs + [_sub(p, chosen[0])]
        if rank(cand) == len(cand):
            chosen.append(p)
            diffs = cand
    return chosen


def _hyperplane(pts: Sequence[tuple], inside_sum: tuple, weight: int) -> tuple[tuple, int]:
    """Primitive normal through ``pts`` oriented so ``inside_sum / weight`` is strictly below."""
    base = pts[0]
    ns = nullspace([_sub(p, base) for p in pts[1:]], len(base))
    a = primitive(ns[0])
    b = _dot(a, base)
    if _dot(a, inside_sum) > weight * b:
        a = tuple(-x for x in a)
        b = -b
    return a, b


def _hull_full(pts: list[tuple], dim: int) -> tuple[list[_Facet], list[int]]:
    """Facets and vertex indices of the hull of integer points spanning Z^dim."""
    n = len(pts)
    if dim == 1:
        lo = min(range(n), key=lambda i: pts[i])
        hi = max(range(n), key=lambda i: pts[i])
        facets = [
            _Facet((-1,), -pts[lo][0], frozenset(i for i in range(n) if pts[i] == pts[lo])),
            _Facet((1,), pts[hi][0], frozenset(i for i in range(n) if pts[i] == pts[hi])),
        ]
        return facets, sorted({lo, hi})

    simplex = _independent_subset(pts, dim + 1)
    simplex_idx = [pts.index(p) for p in simplex]
    inside = tuple(sum(c) for c in zip(*simplex))
    weight = dim + 1
    processed = set(simplex_idx)

    def make(support_pts):
        return _hyperplane(support_pts, inside, weight)

    facets: dict[tuple, _Facet] = {}
    for skip in range(dim + 1):
        support = [p for j, p in enumerate(simplex) if j != skip]
        a, b = make(support)
        facets[(a, b)] = _Facet(a, b, frozenset(i for i in processed if _dot(a, pts[i]) == b))

    for i in range(n):
        if i in processed:
            continue
        x = pts[i]
        visible = [f for f in facets.values() if _dot(f.normal, x) > f.offset]
        if not visible:
            for key, f in list(facets.items()):
                if _dot(f.normal, x) == f.offset:
                    facets[key] = _Facet(f.normal, f.offset, f.on | {i})
            processed.add(i)
            continue
        hidden = [f for f in facets.values() if _dot(f.normal, x) <= f.offset]
        boundary = set().union(*(f.on for f in hidden)) | set().union(*(f.on for f in visible))
        boundary.add(i)
        new: dict[tuple, _Facet] = {}
        for F in visible:
            for G in hidden:
                ridge = sorted(F.on & G.on)
                if len(ridge) < dim - 1:
                    continue
                rpts = [pts[j] for j in ridge]
                if _affine_rank(rpts) != dim - 2:
                    continue
                support = _independent_subset(rpts, dim - 1) + [x]
                a, b = make(support)
                if (a, b) not in new:
                    new[(a, b)] = _Facet(a, b, frozenset(j for j in boundary if _dot(a, pts[j]) == b))
        kept = {}
        for G in hidden:
            on = G.on | {i} if _dot(G.normal, x) == G.offset else G.on
            kept[(G.normal, G.offset)] = _Facet(G.normal, G.offset, on)
        for key, f in new.items():
            if key in kept:
                kept[key] = _Facet(f.normal, f.offset, kept[key].on | f.on)
            else:
                kept[key] = f
        facets = kept
        processed.add(i)

    facet_list = sorted(facets.values(), key=lambda f: (f.normal, f.offset))
    on_boundary = set().union(*(f.on for f in facet_list))
    vertices = []
    for j in sorted(on_boundary):
        normals = [f.normal for f in facet_list if j in f.on]
        if rank(normals) == dim:
            vertices.append(j)
    # Coincident points: keep one representative per location.
    seen: dict[tuple, int] = {}
    for j in vertices:
        seen.setdefault(pts[j], j)
    return facet_list, sorted(seen.values())


# --------------------------------------------------------------------------
# Public operations


def convex_hull(points: Iterable[Sequence], level: Fraction | None = None) -> RatPolytope:
    """Convex hull of rational points; the vertex set is minimal."""
    pts = sorted({tuple(Fraction(x) for x in p) for p in points})
    if not pts:
        raise NokError("EMPTY_SET", "convex hull of no points")
    ambient = len(pts[0])
    frame = _frame(pts)
    dim = frame.dim
    if dim > MAX_DIM:
        raise NokError("UNSUPPORTED_DIMENSION", f"affine dimension {dim} exceeds {MAX_DIM}")

    # Equations cutting out the affine hull.
    equations = []
    if dim < ambient:
        for e in nullspace(frame.basis, ambient):
            a = primitive(e)
            b = _dot(a, frame.origin)
            equations.append(_integer_row(a, b))
    if dim == 0:
        return RatPolytope((pts[0],), 0, ambient, tuple(equations), (), level)

    coords, scale = _integerize([frame.coords(p) for p in pts])
    facets, vert_idx = _hull_full(coords, dim)

    inequalities = []
    for f in facets:
        # f.normal . (scale * coords(x)) <= f.offset, with coords linear in x - origin.
        w = [sum(frame.inv[j][k] * f.normal[k] for k in range(dim)) for j in range(dim)]
        u = [Fraction(0)] * ambient
        for j, p in enumerate(frame.pivots):
            u[p] = w[j] * scale
        b = Fraction(f.offset) + _dot(u, frame.origin)
        inequalities.append(_integer_row(u, b))
    vertices = tuple(pts[i] for i in vert_idx)
    return RatPolytope(vertices, dim, ambient, tuple(equations), tuple(sorted(inequalities)), level)


def _integer_row(a: Sequence, b) -> tuple[tuple, int]:
    vals = [Fraction(x) for x in a] + [Fraction(b)]
    den = math.lcm(*(v.denominator for v in vals))
    ints = [int(v * den) for v in vals]
    g = math.gcd(*ints) or 1
    ints = [v // g for v in ints]
    return tuple(ints[:-1]), ints[-1]


def _triangulate(pts: list[tuple], dim: int) -> list[tuple]:
    """Fan triangulation of the hull of integer points spanning Z^dim (index tuples)."""
    if dim == 0:
        return [(0,)]
    facets, verts = _hull_full(pts, dim)
    if dim == 1:
        return [tuple(verts)]
    v0 = min(verts, key=lambda j: pts[j])
    vset = set(verts)
    simplices = []
    for f in facets:
        if v0 in f.on or any(pts[j] == pts[v0] for j in f.on):
            continue
        fverts = sorted({pts[j]: j for j in f.on if j in vset}.values(), key=lambda j: pts[j])
        sub = [pts[j] for j in fverts]
        frame = _frame(sub)
        sub_coords, _ = _integerize([frame.coords(p) for p in sub])
        for s in _triangulate(sub_coords, dim - 1):
            simplices.append((v0,) + tuple(fverts[t] for t in s))
    return simplices


def triangulate(P: RatPolytope) -> list[tuple]:
    """Simplices (as vertex tuples) of a fan triangulation of ``P``."""
    if P.dim == 0:
        return [P.vertices]
    verts = list(P.vertices)
    frame = _frame(verts)
    coords, _ = _integerize([frame.coords(v) for v in verts])
    return [tuple(verts[i] for i in s) for s in _triangulate(coords, P.dim)]


def nok_body(S: GradedSemigroup) -> RatPolytope:
    """The level-1 slice of the cone over S (an inner approximation in sampled mode)."""
    pts = S._require_points()
    return convex_hull(
        [tuple(Fraction(x, p[-1]) for x in p[:-1]) for p in pts],
        level=Fraction(1),
    )


def _horizontal(L: Lattice, ambient: int) -> Lattice:
    if L.ambient == ambient:
        return L
    if L.ambient == ambient + 1 and all(v[-1] == 0 for v in L.basis):
        return Lattice(tuple(v[:-1] for v in L.basis), ambient)
    raise NokError("DIMENSION_MISMATCH", f"lattice in Z^{L.ambient} vs polytope in Q^{ambient}")


def normalized_volume(P: RatPolytope, lattice: Lattice) -> Fraction:
    """Volume of ``P`` measured so that a fundamental cell of ``lattice`` has volume 1.

    A 0-dimensional polytope has volume 1 by convention.
    """
    lat = _horizontal(lattice, P.ambient)
    if lat.rank != P.dim:
        raise NokError("DIMENSION_MISMATCH", f"lattice rank {lat.rank} != polytope dimension {P.dim}")
    if P.dim == 0:
        return Fraction(1)
    v0 = min(P.vertices)
    coords = {}
    for v in P.vertices:
        c = lat.coordinates(_sub(v, v0))
        if c is None:
            raise NokError("DIMENSION_MISMATCH", "polytope not parallel to the lattice span")
        coords[v] = c
    total = Fraction(0)
    for simplex in triangulate(P):
        base = coords[simplex[0]]
        total += abs(det([_sub(coords[v], base) for v in simplex[1:]]))
    return total / math.factorial(P.dim)


def body_limit(S: GradedSemigroup) -> Fraction:
    """Predicted ``lim #S_{mk} / k^q`` for a finitely generated S.

    Equals ``m^q * vol(Delta(S)) / ind(S)``; the ``m^q`` factor accounts for
    measuring the body at level 1 while counting slices at levels ``m k``.
    """
    if not S.finitely_generated:
        raise NokError("NOT_FINITELY_GENERATED", "body_limit needs generators")
    m = level_index(S)
    qq = q(S)
    vol = normalized_volume(nok_body(S), boundary_lattice(S))
    return Fraction(m) ** qq * vol / ind(S)
