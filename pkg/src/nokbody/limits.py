"""Limit verifiers for graded linear series.

Everything here is counting: dimensions of degree pieces, Hilbert functions
of Veronese subalgebras, sumsets of value slices.  Predicted limits come from
:func:`nokbody.hull.body_limit` and are exact whenever the value semigroup is
finitely generated by what the truncation sees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NokError
from .hull import body_limit
from .semigroup import GradedSemigroup, level_index, minimal_generators
from .semigroup import q as semigroup_q
from .semigroup import slice as semigroup_slice
from .series import EXPLICIT, GENERATED, NEG_INFINITY, TORIC, GradedLinearSeries, Poly, echelonize

#: Degree bound used for predicted limits when the caller gives none.
BODY_DEGREE = 6
#: Consecutive degrees over which an estimated kappa must be constant.
KAPPA_STABLE_DEGREES = 3


def _ratio(count: int, n: int, kappa: int) -> Fraction:
    return Fraction(count, n**kappa)


def convergence(ratios: Sequence[Fraction], predicted: Fraction | None = None,
                tolerance: Fraction | None = None) -> dict:
    """Descriptive diagnostics for a ratio sequence (never a proof of convergence)."""
    out: dict = {
        "last_delta": abs(ratios[-1] - ratios[-2]) if len(ratios) > 1 else None,
        "nonincreasing": all(a >= b for a, b in zip(ratios, ratios[1:])),
        "nondecreasing": all(a <= b for a, b in zip(ratios, ratios[1:])),
    }
    if predicted is not None and ratios:
        gaps = [abs(r - predicted) for r in ratios]
        out["gap"] = gaps[-1]
        out["gap_nonincreasing"] = all(a >= b for a, b in zip(gaps, gaps[1:]))
        if tolerance is not None:
            out["within_tolerance"] = gaps[-1] <= tolerance
    return out


def predicted_limit(L: GradedLinearSeries, N: int = BODY_DEGREE) -> Fraction | None:
    """``lim dim L_{nm} / n^kappa`` from the value semigroup, when it is available."""
    if L.mode not in (TORIC, GENERATED):
        return None
    S = L.value_semigroup(N)
    if not S.finitely_generated:
        return None
    kappa = L.kappa(N)
    if semigroup_q(S) != kappa:
        return None
    return body_limit(S)


# --------------------------------------------------------------------------
# Volume limits


@dataclass
class LimitRow:
    n: int
    degree: int
    dim: int
    ratio: Fraction


@dataclass
class LimitReport:
    kappa: int
    m: int
    rows: list[LimitRow]
    predicted: Fraction | None
    convergence: dict
    kappa_exact: bool = True
    kappa_stable_from: int = 0
    asserted: bool = True


def volume_limit_report(L: GradedLinearSeries, N: int, tolerance: Fraction | None = None,
                        body_degree: int = BODY_DEGREE) -> LimitReport:
    """Table of ``dim L_{nm} / n^kappa`` for ``nm <= N`` with the predicted limit."""
    if L.mode == EXPLICIT:
        N = min(N, L.max_degree)
    kappa, stable_from, exact = L.kappa_stabilization(N)
    if kappa == NEG_INFINITY:
        raise NokError("KAPPA_UNDEFINED", "all positive-degree pieces vanish")
    m = L.index(N)
    rows = []
    for n in range(1, N // m + 1):
        dim = len(L.value_slice(n * m))
        rows.append(LimitRow(n, n * m, dim, _ratio(dim, n, kappa)))
    predicted = predicted_limit(L, max(body_degree, m))
    asserted = exact or (N - stable_from) >= KAPPA_STABLE_DEGREES
    diag = convergence([r.ratio for r in rows], predicted, tolerance) if rows else {}
    return LimitReport(kappa, m, rows, predicted, diag, exact, stable_from, asserted)


# --------------------------------------------------------------------------
# Degrees of Veronese images


def hilbert_function(L: GradedLinearSeries, p: int, n: int) -> int:
    """``dim`` of the degree-``n`` piece of the subalgebra generated by ``L_p``."""
    return L.veronese(p).dim(n)


def finite_difference(values: Sequence[int], order: int) -> list[int]:
    out = list(values)
    for _ in range(order):
        out = [b - a for a, b in zip(out, out[1:])]
    return out


@dataclass
class MultiplicityResult:
    p: int
    kappa: int
    degree: int
    route_a: int | None  # from the Newton-Okounkov body of the Veronese subalgebra
    route_b: int | None  # from finite differences of the Hilbert function; None = unstable
    hilbert: list[int] = field(default_factory=list)


def multiplicity(L: GradedLinearSeries, p: int, n_max: int | None = None) -> MultiplicityResult:
    """Degree of the image of the map given by ``L_p``, computed two ways.

    Route (a) is ``kappa! * body_limit`` of the value semigroup of the
    Veronese subalgebra; route (b) is the ``kappa``-th finite difference of its
    Hilbert function, required to be constant on the three largest values.
    """
    V = L.veronese(p)
    kappa = V.kappa(2)
    if n_max is None:
        n_max = kappa + 4
    H = [V.dim(n) for n in range(n_max + 1)]
    diffs = finite_difference(H, kappa)
    tail = diffs[-3:]
    route_b = tail[0] if len(tail) == 3 and len(set(tail)) == 1 else None

    route_a = None
    S = V.value_semigroup(n_max)
    if S.finitely_generated and semigroup_q(S) == kappa:
        value = math.factorial(kappa) * body_limit(S)
        if value.denominator == 1:
            route_a = int(value)
    if route_a is not None and route_b is not None and route_a != route_b:
        raise NokError("INCONSISTENT", f"p={p}: body route gives {route_a}, finite differences give {route_b}")
    if route_a is None and route_b is None:
        raise NokError("UNSTABLE", f"p={p}: neither route produced a degree (n_max={n_max})")
    degree = route_a if route_a is not None else route_b
    return MultiplicityResult(p, kappa, degree, route_a, route_b, H)


@dataclass
class DegreeRow:
    p: int
    degree: int
    ratio: Fraction
    route_a: int | None
    route_b: int | None


@dataclass
class DegreeReport:
    kappa: int
    m: int
    rows: list[DegreeRow]
    predicted: Fraction | None
    bounded: bool | None
    nondecreasing: bool


def degree_limit_report(L: GradedLinearSeries, p_list: Sequence[int], N: int = BODY_DEGREE,
                        n_max: int | None = None) -> DegreeReport:
    """Rows ``(p, deg Y_{pm}, deg / (kappa! p^kappa))`` against the volume limit."""
    kappa = L.kappa(N)
    if kappa == NEG_INFINITY:
        raise NokError("KAPPA_UNDEFINED", "all positive-degree pieces vanish")
    m = L.index(N)
    predicted = predicted_limit(L, max(N, m))
    rows = []
    for p in sorted(p_list):
        res = multiplicity(L, p * m, n_max)
        ratio = Fraction(res.degree, math.factorial(kappa) * p**kappa)
        rows.append(DegreeRow(p, res.degree, ratio, res.route_a, res.route_b))
    ratios = [r.ratio for r in rows]
    bounded = None if predicted is None else all(r <= predicted for r in ratios)
    nondecreasing = all(a <= b for a, b in zip(ratios, ratios[1:]))
    return DegreeReport(kappa, m, rows, predicted, bounded, nondecreasing)


# --------------------------------------------------------------------------
# Sumsets


@dataclass
class SumsetRow:
    n: int
    sumset: int
    middle: int | None
    upper: int
    lower_ratio: Fraction
    upper_ratio: Fraction


@dataclass
class SumsetReport:
    p: int
    m: int
    q: int
    rows: list[SumsetRow]
    body_limit: Fraction | None
    sandwich_ok: bool
    gap: Fraction | None


def sumset_report(source: GradedLinearSeries | GradedSemigroup, p: int, n_max: int,
                  body_degree: int = BODY_DEGREE) -> SumsetReport:
    """Compare ``#(n * S_{pm})`` with the Veronese and full slice counts.

    For a series the middle column is ``dim`` of the degree-``n`` piece of the
    subalgebra generated by ``L_{pm}``; the sandwich
    ``#(n*S_{pm}) <= middle <= #S_{npm}`` is checked at every row.
    """
    if isinstance(source, GradedLinearSeries):
        L = source
        m = L.index(n_max * p)
        qq = L.kappa(max(body_degree, p * m))
        base = L.value_slice(p * m)
        limit = predicted_limit(L, max(body_degree, p * m))

        def upper(n):
            return L.dim(n * p * m)

        def middle(n):
            return hilbert_function(L, p * m, n)
    else:
        S = source
        m = level_index(S)
        qq = semigroup_q(S)
        base = semigroup_slice(S, p * m)
        limit = body_limit(S) if S.finitely_generated else None

        def upper(n):
            return len(semigroup_slice(S, n * p * m))

        middle = None
    if not base:
        raise NokError("EMPTY_SLICE", f"S_{p * m} is empty")
    rows = []
    acc = frozenset(base)
    for n in range(1, n_max + 1):
        if n > 1:
            acc = frozenset(tuple(a + b for a, b in zip(x, y)) for x in acc for y in base)
        lo = len(acc)
        mid = middle(n) if middle else None
        hi = upper(n)
        scale = (n * p) ** qq
        rows.append(SumsetRow(n, lo, mid, hi, Fraction(lo, scale), Fraction(hi, scale)))
    ok = all(r.sumset <= (r.middle if r.middle is not None else r.upper) <= r.upper for r in rows)
    gap = None if limit is None else limit - rows[-1].lower_ratio
    return SumsetReport(p, m, qq, rows, limit, ok, gap)


# --------------------------------------------------------------------------
# Reduced spaces with several components


def _to_vec(elem: Sequence[Poly]) -> dict:
    return {(i, e): c for i, f in enumerate(elem) for e, c in f.terms.items()}


def _from_vec(vec: dict, dims: Sequence[int]) -> tuple[Poly, ...]:
    parts: list[dict] = [{} for _ in dims]
    for (i, e), c in vec.items():
        parts[i][e] = c
    return tuple(Poly._raw(d, part) for d, part in zip(dims, parts))


class MultiComponentSeries:
    """Graded linear series on a model with ``s`` irreducible components.

    An element of degree ``n`` is a tuple ``(f_1, ..., f_s)`` with ``f_i`` a
    polynomial in ``dims[i]`` variables.  The degree-0 piece is the diagonal
    constants.  Pieces are stored up to ``max_degree``.
    """

    def __init__(self, dims: Sequence[int], bases: dict[int, list[tuple]], max_degree: int):
        self.dims = tuple(dims)
        self.max_degree = max_degree
        self._raw = {n: [tuple(e) for e in v] for n, v in bases.items() if n > 0}
        for n, elems in self._raw.items():
            if n > max_degree:
                raise NokError("OUT_OF_RANGE", f"degree {n} beyond max_degree {max_degree}")
            for e in elems:
                if len(e) != self.s:
                    raise NokError("LENGTH_MISMATCH", f"element of arity {len(e)}, expected {self.s}")
        self._pieces: dict[int, list[tuple]] = {}

    @property
    def s(self) -> int:
        return len(self.dims)

    @classmethod
    def explicit(cls, dims, bases, max_degree=None) -> "MultiComponentSeries":
        top = max(bases, default=0) if max_degree is None else max_degree
        return cls(dims, bases, top)

    @classmethod
    def from_components(cls, components: Sequence[GradedLinearSeries], N: int) -> "MultiComponentSeries":
        """Sections that are independent on each component (a disjoint union)."""
        dims = [L.d for L in components]
        bases: dict[int, list[tuple]] = {}
        for n in range(1, N + 1):
            elems = []
            for i, L in enumerate(components):
                for f in L.degree_piece(n):
                    elems.append(tuple(f if j == i else Poly._raw(dims[j], {}) for j in range(len(dims))))
            bases[n] = elems
        return cls(dims, bases, N)

    @classmethod
    def generated(cls, dims: Sequence[int], generators: Sequence[tuple[int, Sequence[Poly]]], N: int
                  ) -> "MultiComponentSeries":
        """Subalgebra generated by tuples, multiplied componentwise."""
        dims = tuple(dims)
        pieces: dict[int, list[tuple]] = {0: [tuple(Poly.constant(d) for d in dims)]}
        gens = [(int(deg), tuple(g)) for deg, g in generators]
        for deg, g in gens:
            if deg < 1:
                raise NokError("NEGATIVE_LEVEL", f"generator degree {deg} must be >= 1")
            if len(g) != len(dims):
                raise NokError("LENGTH_MISMATCH", f"generator of arity {len(g)}, expected {len(dims)}")
        for n in range(1, N + 1):
            spanning = []
            for deg, g in gens:
                if deg <= n:
                    for b in pieces[n - deg]:
                        spanning.append(_to_vec(tuple(x * y for x, y in zip(g, b))))
            piv = echelonize(spanning)
            pieces[n] = [_from_vec(piv[k], dims) for k in sorted(piv)]
        return cls(dims, {n: v for n, v in pieces.items() if n > 0}, N)

    def degree_piece(self, n: int) -> list[tuple]:
        if n == 0:
            return [tuple(Poly.constant(d) for d in self.dims)]
        if n > self.max_degree:
            raise NokError("OUT_OF_RANGE", f"degree {n} beyond max_degree {self.max_degree}")
        if n not in self._pieces:
            piv = echelonize(_to_vec(e) for e in self._raw.get(n, []))
            self._pieces[n] = [_from_vec(piv[k], self.dims) for k in sorted(piv)]
        return self._pieces[n]

    def dim(self, n: int) -> int:
        return len(self.degree_piece(n))


def restrict(M: MultiComponentSeries, i: int) -> tuple[GradedLinearSeries, MultiComponentSeries]:
    """Split ``M`` along component ``i`` (1-based) into image and kernel.

    Eliminating with the keys of component ``i`` first leaves an echelon basis
    whose rows either lead in component ``i`` (independent images) or vanish
    there entirely (a basis of the kernel).
    """
    if not 1 <= i <= M.s:
        raise NokError("INDEX_OUT_OF_RANGE", f"component {i} not in 1..{M.s}")
    c = i - 1

    def key(k):
        return (k[0] != c, k[0], k[1])

    image: dict[int, list[Poly]] = {}
    kernel: dict[int, list[tuple]] = {}
    for n in range(1, M.max_degree + 1):
        piv = echelonize((_to_vec(e) for e in M.degree_piece(n)), key=key)
        image[n] = []
        kernel[n] = []
        for lead in sorted(piv, key=key):
            elem = _from_vec(piv[lead], M.dims)
            if lead[0] == c:
                image[n].append(elem[c])
            else:
                kernel[n].append(elem)
    restricted = GradedLinearSeries.explicit(M.dims[c], image, max_degree=M.max_degree)
    return restricted, MultiComponentSeries(M.dims, kernel, M.max_degree)


def _estimated_body_limit(L: GradedLinearSeries, N: int) -> Fraction | None:
    """Body limit of the semigroup generated by the truncated value slices."""
    slices = {n: L.value_slice(n) for n in range(1, N + 1)}
    gens = minimal_generators(slices, N)
    if not gens:
        return None
    return body_limit(GradedSemigroup.from_generators(gens))


@dataclass
class ComponentSummary:
    component: int
    kappa: int | float
    m: int | None
    kappa_stable_from: int
    body_limit: Fraction | None
    series: GradedLinearSeries = field(repr=False)


@dataclass
class ResidueTable:
    a: int
    rows: list[LimitRow]
    predicted: Fraction | None
    convergence: dict


@dataclass
class DecompositionReport:
    ordering: tuple
    kappa: int | float
    r: int | None
    components: list[ComponentSummary]
    additivity: list[tuple]  # (n, dim L_n, [dims of the restricted pieces])
    additive: bool
    tables: list[ResidueTable]
    asserted: bool


def decompose_reduced(M: MultiComponentSeries, N: int | None = None,
                      ordering: Sequence[int] | None = None) -> DecompositionReport:
    """Peel off components one at a time and tabulate limits along residues mod ``r``."""
    N = M.max_degree if N is None else min(N, M.max_degree)
    order = tuple(range(1, M.s + 1)) if ordering is None else tuple(ordering)
    if sorted(order) != list(range(1, M.s + 1)):
        raise NokError("INDEX_OUT_OF_RANGE", f"ordering {order} is not a permutation of 1..{M.s}")

    current = M
    comps: list[ComponentSummary] = []
    for i in order:
        restricted, current = restrict(current, i)
        k, stable_from, _ = restricted.kappa_stabilization(N)
        try:
            m_i = restricted.index(N)
        except NokError:
            m_i = None
        body = _estimated_body_limit(restricted, N) if k != NEG_INFINITY else None
        comps.append(ComponentSummary(i, k, m_i, stable_from, body, restricted))
    leftover = [n for n in range(1, N + 1) if current.dim(n)]
    if leftover:
        raise NokError("NOT_INJECTIVE", f"sections vanishing on every component in degrees {leftover[:5]}")

    additivity = []
    for n in range(1, N + 1):
        parts = [c.series.dim(n) for c in comps]
        additivity.append((n, M.dim(n), parts))
    additive = all(total == sum(parts) for _, total, parts in additivity)

    kappa = max(c.kappa for c in comps)
    if kappa == NEG_INFINITY:
        return DecompositionReport(order, kappa, None, comps, additivity, additive, [], False)
    top = [c for c in comps if c.kappa == kappa]
    r = math.lcm(*(c.m for c in top))
    asserted = all((N - c.kappa_stable_from) >= KAPPA_STABLE_DEGREES for c in top)

    tables = []
    for a in range(r):
        rows = []
        for n in range(1, (N - a) // r + 1):
            dim = M.dim(a + n * r)
            rows.append(LimitRow(n, a + n * r, dim, _ratio(dim, n, kappa)))
        if not any(row.dim for row in rows):
            continue
        predicted = Fraction(0)
        for c in top:
            if a % c.m == 0:
                if c.body_limit is None:
                    predicted = None
                    break
                predicted += Fraction(r, c.m) ** kappa * c.body_limit
        diag = convergence([row.ratio for row in rows], predicted)
        tables.append(ResidueTable(a, rows, predicted, diag))
    return DecompositionReport(order, kappa, r, comps, additivity, additive, tables, asserted)
