"""Graded linear series over a polynomial model and their value semigroups.

Sections are polynomials in ``y_1, ..., y_d`` with rational coefficients.
The valuation sends a polynomial to its lexicographically smallest exponent
(first coordinate most significant), so ``nu(y_i) = e_i`` and units have value
zero.  Echelonizing a degree piece by leading exponents produces a basis with
pairwise distinct values; the values form the slice of the value semigroup
and their number is the dimension of the piece.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .errors import NokError
from .exactmath import RowSpace, rank
from .hull import RatPolytope, convex_hull
from .semigroup import GradedSemigroup, minimal_generators

NEG_INFINITY = -math.inf

TORIC = "toric"
GENERATED = "generated"
EXPLICIT = "explicit"


class Poly:
    """Sparse polynomial: exponent tuple -> nonzero Fraction."""

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms: Mapping[tuple, object] | None = None):
        self.d = d
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != d or min(exp, default=0) < 0:
                raise NokError("BAD_EXPONENT", f"exponent {exp} is not in N^{d}")
            c = Fraction(c)
            if c:
                clean[exp] = clean.get(exp, 0) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def _raw(cls, d, terms):
        p = cls.__new__(cls)
        p.d = d
        p.terms = terms
        return p

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff=1) -> "Poly":
        return cls(len(exp), {tuple(exp): coeff})

    @classmethod
    def constant(cls, d: int, c=1) -> "Poly":
        return cls(d, {(0,) * d: c})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.d == other.d and self.terms == other.terms
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return f"Poly({self.d}, 0)"
        parts = []
        for exp in sorted(self.terms):
            mono = "*".join(f"y{i + 1}^{e}" if e > 1 else f"y{i + 1}" for i, e in enumerate(exp) if e)
            c = self.terms[exp]
            parts.append(f"{c}" if not mono else (mono if c == 1 else f"{c}*{mono}"))
        return " + ".join(parts)

    def __neg__(self):
        return Poly._raw(self.d, {e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly._raw(self.d, out)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = Fraction(other)
            if not c:
                return Poly._raw(self.d, {})
            return Poly._raw(self.d, {e: c * v for e, v in self.terms.items()})
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly._raw(self.d, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def derivative(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return Poly._raw(self.d, out)

    def evaluate(self, point: Sequence) -> Fraction:
        return sum((c * math.prod(Fraction(x) ** k for x, k in zip(point, e)) for e, c in self.terms.items()), Fraction(0))


def nu(f: Poly) -> tuple:
    """Lexicographically smallest exponent of ``f``."""
    if not f.terms:
        raise NokError("ZERO_POLY", "the zero polynomial has no value")
    return min(f.terms)


# --------------------------------------------------------------------------
# Elimination


def echelonize(
    vectors: Iterable[Mapping[Hashable, Fraction]],
    key: Callable | None = None,
) -> dict:
    """Row-reduce sparse vectors so that their leading keys are distinct.

    The leading key of a vector is its smallest support key under ``key``.
    Returns ``{leading key: vector}`` with leading coefficient 1.
    """
    pivots: dict = {}
    for vec in vectors:
        v = dict(vec)
        while v:
            lead = min(v, key=key) if key else min(v)
            piv = pivots.get(lead)
            if piv is None:
                c = v[lead]
                pivots[lead] = {k: x / c for k, x in v.items()}
                break
            c = v[lead]
            for k, x in piv.items():
                y = v.get(k, 0) - c * x
                if y:
                    v[k] = y
                else:
                    v.pop(k, None)
    return pivots


def reduces_to_zero(vec: Mapping, pivots: Mapping, key: Callable | None = None) -> bool:
    v = dict(vec)
    while v:
        lead = min(v, key=key) if key else min(v)
        piv = pivots.get(lead)
        if piv is None:
            return False
        c = v[lead]
        for k, x in piv.items():
            y = v.get(k, 0) - c * x
            if y:
                v[k] = y
            else:
                v.pop(k, None)
    return True


def leading_basis(vectors: Sequence[Poly]) -> tuple[list[Poly], list[tuple]]:
    """Basis of the span with pairwise distinct values, and those values (sorted)."""
    vectors = list(vectors)
    if not vectors:
        return [], []
    d = vectors[0].d
    pivots = echelonize(f.terms for f in vectors)
    values = sorted(pivots)
    return [Poly._raw(d, pivots[v]) for v in values], values


# --------------------------------------------------------------------------
# Graded linear series


class GradedLinearSeries:
    """A graded subalgebra ``L = ⊕ L_n`` of polynomial sections.

    Build one with :meth:`toric`, :meth:`generated` or :meth:`explicit`.
    """

    def __init__(self, d: int, mode: str, *, polytope: RatPolytope | None = None,
                 generators: Sequence[tuple[int, Poly]] = (), bases: Mapping[int, Sequence[Poly]] | None = None,
                 max_degree: int | None = None):
        self.d = d
        self.mode = mode
        self.polytope = polytope
        self.generators = tuple(generators)
        self.bases = dict(bases or {})
        self.max_degree = max_degree
        self._pieces: dict[int, list[Poly]] = {0: [Poly.constant(d)]}
        self._values: dict[int, list[tuple]] = {0: [(0,) * d]}
        self._veronese: dict[int, GradedLinearSeries] = {}

    def __repr__(self):
        return f"GradedLinearSeries(d={self.d}, mode={self.mode!r})"

    @classmethod
    def toric(cls, vertices: Iterable[Sequence[int]]) -> "GradedLinearSeries":
        """Sections spanned by the monomials with exponents in ``n P``."""
        verts = [tuple(int(x) for x in v) for v in vertices]
        if not verts:
            raise NokError("EMPTY_SET", "toric polytope needs at least one point")
        return cls(len(verts[0]), TORIC, polytope=convex_hull(verts))

    @classmethod
    def generated(cls, d: int, generators: Iterable[tuple[int, Poly]]) -> "GradedLinearSeries":
        gens = []
        for deg, f in generators:
            if deg < 1:
                raise NokError("NEGATIVE_LEVEL", f"generator degree {deg} must be >= 1")
            if f.d != d:
                raise NokError("LENGTH_MISMATCH", f"generator in {f.d} variables, expected {d}")
            gens.append((int(deg), f))
        return cls(d, GENERATED, generators=gens)

    @classmethod
    def explicit(cls, d: int, bases: Mapping[int, Sequence[Poly]], max_degree: int | None = None) -> "GradedLinearSeries":
        bases = {int(k): list(v) for k, v in bases.items() if int(k) > 0}
        top = max(bases, default=0) if max_degree is None else max_degree
        for k in bases:
            if k > top:
                raise NokError("OUT_OF_RANGE", f"basis degree {k} beyond max_degree {top}")
        return cls(d, EXPLICIT, bases=bases, max_degree=top)

    # -- pieces ------------------------------------------------------------

    def degree_piece(self, n: int) -> list[Poly]:
        """A basis of ``L_n`` with pairwise distinct values."""
        if n < 0:
            raise NokError("NEGATIVE_LEVEL", f"degree {n} < 0")
        if n in self._pieces:
            return self._pieces[n]
        if self.mode == TORIC:
            pts = self.value_slice(n)
            piece = [Poly._raw(self.d, {p: Fraction(1)}) for p in pts]
        elif self.mode == GENERATED:
            for k in range(1, n + 1):
                if k not in self._pieces:
                    spanning = []
                    for deg, g in self.generators:
                        if deg <= k and g:
                            spanning.extend(g * b for b in self._pieces[k - deg])
                    self._pieces[k], self._values[k] = leading_basis(spanning)
            return self._pieces[n]
        else:
            if n > self.max_degree:
                raise NokError("OUT_OF_RANGE", f"degree {n} beyond stored max_degree {self.max_degree}")
            piece, values = leading_basis(self.bases.get(n, []))
            self._values[n] = values
        self._pieces[n] = piece
        return piece

    def value_slice(self, n: int) -> list[tuple]:
        """``S(L)_n``: the values of nonzero elements of ``L_n``."""
        if n not in self._values:
            if self.mode == TORIC:
                self._values[n] = self.polytope.lattice_points(n)
            else:
                self.degree_piece(n)
        return self._values[n]

    def dim(self, n: int) -> int:
        return len(self.value_slice(n))

    # -- invariants --------------------------------------------------------

    def value_semigroup(self, N: int) -> GradedSemigroup:
        """Value semigroup truncated at degree ``N``.

        Toric and generated series also get generators: the minimal generators
        of the truncated slices (for toric series, up to the degree where the
        Hilbert basis of the cone over a lattice polytope is complete).
        """
        if N < 1:
            raise NokError("OUT_OF_RANGE", f"degree bound {N} must be >= 1")
        if self.mode == EXPLICIT:
            N = min(N, self.max_degree)
        slices = {n: frozenset(self.value_slice(n)) for n in range(N + 1)}
        gens = None
        if self.mode == TORIC:
            top = max(1, self.polytope.dim - 1)
            gen_slices = {n: self.value_slice(n) for n in range(1, top + 1)}
            gens = tuple(minimal_generators(gen_slices, top))
        elif self.mode == GENERATED:
            gens = tuple(minimal_generators(slices, N)) or None
        return GradedSemigroup(self.d, gens, slices, N)

    def index(self, N: int | None = None) -> int:
        """``m(L)``: gcd of the degrees with nonzero pieces."""
        if self.mode == TORIC:
            return 1
        if self.mode == GENERATED:
            degs = [deg for deg, g in self.generators if g]
        else:
            top = self.max_degree if N is None else min(N, self.max_degree)
            degs = [n for n in range(1, top + 1) if self.dim(n)]
        if not degs:
            raise NokError("ALL_ZERO", "every positive-degree piece vanishes")
        return math.gcd(*degs)

    def _value_rank_profile(self, N: int) -> list[int]:
        """Rank of the span of the value points of degree ``<= n``, for ``n = 0..N``."""
        space = RowSpace(self.d + 1)
        ranks = [0]
        for n in range(1, N + 1):
            for v in self.value_slice(n):
                space.add(v + (n,))
            ranks.append(space.rank)
        return ranks

    def jacobian_rank(self, trials: int = 3, seed: int = 0) -> int:
        """Transcendence degree of the algebra generated by the ``g t^deg``.

        Rank of the Jacobian with respect to ``(y, t)`` at random rational
        points (evaluated at ``t = 1``); the maximum over trials.
        """
        gens = [(deg, g) for deg, g in self.generators if g]
        if not gens:
            return 0
        rng = random.Random(seed)
        best = 0
        for _ in range(trials):
            point = [Fraction(rng.randint(-97, 97), rng.randint(1, 13)) for _ in range(self.d)]
            rows = [[g.derivative(j).evaluate(point) for j in range(self.d)] + [deg * g.evaluate(point)]
                    for deg, g in gens]
            best = max(best, rank(rows))
        return best

    def kappa(self, N: int = 10) -> int | float:
        """Kodaira-Iitaka dimension, computed as ``q`` of the value semigroup.

        Exact for toric series; for generated series the larger of the value
        span rank up to ``N`` and the Jacobian rank; a lower bound otherwise.
        """
        if self.mode == TORIC:
            return self.polytope.dim
        if self.mode == GENERATED:
            if not any(g for _, g in self.generators):
                return NEG_INFINITY
            r = max(self._value_rank_profile(N)[-1], self.jacobian_rank())
            return r - 1
        top = min(N, self.max_degree)
        r = self._value_rank_profile(top)[-1]
        return NEG_INFINITY if r == 0 else r - 1

    def kappa_stabilization(self, N: int = 10) -> tuple[int | float, int, bool]:
        """``(kappa, degree from which the value-span rank is constant, exact?)``."""
        top = N if self.mode != EXPLICIT else min(N, self.max_degree)
        profile = self._value_rank_profile(top)
        return self.kappa(N), profile.index(profile[-1]), self.mode != EXPLICIT

    def veronese(self, p: int) -> "GradedLinearSeries":
        """The subalgebra generated by ``L_p``, regraded so ``L_p`` has degree 1."""
        if p not in self._veronese:
            piece = self.degree_piece(p)
            if not piece:
                raise NokError("ZERO_PIECE", f"L_{p} = 0")
            self._veronese[p] = GradedLinearSeries.generated(self.d, [(1, b) for b in piece])
        return self._veronese[p]

    def subalgebra_check(self, N: int | None = None) -> tuple[bool, tuple[int, int] | None]:
        """Check ``L_a L_b ⊆ L_{a+b}`` for ``a + b <= N``; returns (ok, first violation)."""
        if self.mode != EXPLICIT:
            return True, None
        top = self.max_degree if N is None else min(N, self.max_degree)
        for total in range(2, top + 1):
            target = echelonize(f.terms for f in self.bases.get(total, []))
            for a in range(1, total // 2 + 1):
                b = total - a
                for f in self.degree_piece(a):
                    for g in self.degree_piece(b):
                        if not reduces_to_zero((f * g).terms, target):
                            return False, (a, b)
        return True, None


def degree_piece(L: GradedLinearSeries, n: int) -> list[Poly]:
    return L.degree_piece(n)


def value_semigroup(L: GradedLinearSeries, N: int) -> GradedSemigroup:
    return L.value_semigroup(N)


def veronese(L: GradedLinearSeries, p: int) -> GradedLinearSeries:
    return L.veronese(p)
