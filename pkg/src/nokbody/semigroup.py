"""Graded subsemigroups of Z^d x N and their invariants.

A semigroup is described either by finitely many generators (last coordinate
is the level, always positive) or by sampled slices up to a truncation level,
or both.  Points are integer tuples; a *slice* is the set of horizontal parts
``v`` of the elements ``(v, k)`` at a given level ``k``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import NokError
from .exactmath import (
    Lattice,
    intersect_with_kernel,
    rank,
    saturate,
    subgroup_index,
)


def _add(u: tuple, v: tuple) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


@dataclass(frozen=True)
class GradedSemigroup:
    d: int
    generators: tuple | None = None
    samples: Mapping[int, frozenset] | None = None
    truncation: int | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.generators is not None:
            for g in self.generators:
                if len(g) != self.d + 1:
                    raise NokError("LENGTH_MISMATCH", f"generator {g} is not in Z^{self.d}xN")
                if g[-1] < 1:
                    raise NokError("NEGATIVE_LEVEL", f"generator {g} must have level >= 1")
        if self.samples is not None:
            for k, pts in self.samples.items():
                if k < 0 or (self.truncation is not None and k > self.truncation):
                    raise NokError("OUT_OF_RANGE", f"sample level {k} outside [0, {self.truncation}]")
                for p in pts:
                    if len(p) != self.d:
                        raise NokError("LENGTH_MISMATCH", f"sample point {p} is not in Z^{self.d}")

    @classmethod
    def from_generators(cls, generators: Iterable[Iterable[int]]) -> "GradedSemigroup":
        gens = tuple(sorted({tuple(int(x) for x in g) for g in generators}))
        if not gens:
            raise NokError("EMPTY_SEMIGROUP", "no generators")
        return cls(len(gens[0]) - 1, gens)

    @classmethod
    def sampled(cls, d: int, slices: Mapping[int, Iterable], truncation: int | None = None) -> "GradedSemigroup":
        """Semigroup known only through its slices at levels ``<= truncation``."""
        data = {int(k): frozenset(tuple(int(x) for x in p) for p in pts) for k, pts in slices.items()}
        data.setdefault(0, frozenset({(0,) * d}))
        top = max(data) if truncation is None else truncation
        return cls(d, None, data, top)

    @property
    def finitely_generated(self) -> bool:
        return self.generators is not None

    def points(self) -> list[tuple]:
        """Generators, or all sampled points of positive level, as elements of Z^{d+1}."""
        if self.generators is not None:
            return list(self.generators)
        return [p + (k,) for k, pts in sorted(self.samples.items()) if k > 0 for p in sorted(pts)]

    def _require_points(self) -> list[tuple]:
        pts = self.points()
        if not pts:
            raise NokError("EMPTY_SEMIGROUP", "semigroup has no element of positive level")
        return pts

    def transform(self, T) -> "GradedSemigroup":
        """Apply an integer matrix to the horizontal coordinates."""

        def act(v):
            return tuple(sum(T[i][j] * v[j] for j in range(self.d)) for i in range(self.d))

        gens = None if self.generators is None else tuple(sorted(act(g[:-1]) + (g[-1],) for g in self.generators))
        samples = None
        if self.samples is not None:
            samples = {k: frozenset(act(p) for p in pts) for k, pts in self.samples.items()}
        return GradedSemigroup(self.d, gens, samples, self.truncation)


def slice(S: GradedSemigroup, k: int) -> frozenset:
    """The level-``k`` slice ``S_k`` as a set of horizontal points."""
    if k < 0:
        raise NokError("NEGATIVE_LEVEL", f"level {k} < 0")
    if S.samples is not None and k <= S.truncation:
        return S.samples.get(k, frozenset())
    if S.generators is None:
        raise NokError("OUT_OF_RANGE", f"level {k} beyond truncation {S.truncation}")
    cache = S._cache.setdefault("slices", {0: frozenset({(0,) * S.d})})
    for level in range(max(cache) + 1, k + 1):
        reach = set()
        for g in S.generators:
            prev = cache.get(level - g[-1]) if g[-1] <= level else None
            if prev:
                h = g[:-1]
                reach.update(_add(p, h) for p in prev)
        cache[level] = frozenset(reach)
    return cache[k]


def slice_counts(S: GradedSemigroup, levels: Iterable[int]) -> dict[int, int]:
    return {k: len(slice(S, k)) for k in levels}


def group(S: GradedSemigroup) -> Lattice:
    """The subgroup G(S) of Z^{d+1} generated by S."""
    return Lattice.from_generators(S._require_points(), S.d + 1)


def level_index(S: GradedSemigroup) -> int:
    """``m(S) = [Z : pi(G(S))]``, the gcd of the occupied levels."""
    return math.gcd(*(p[-1] for p in S._require_points()))


def _level_zero_group(S: GradedSemigroup) -> Lattice:
    return intersect_with_kernel(group(S), (0,) * S.d + (1,))


def boundary_lattice(S: GradedSemigroup) -> Lattice:
    """Integer points of the level-0 part of the rational span of S."""
    return saturate(_level_zero_group(S), S.d + 1)


def ind(S: GradedSemigroup) -> int:
    """``[boundary lattice : G(S) ∩ boundary lattice]``."""
    G0 = _level_zero_group(S)
    B = saturate(G0, S.d + 1)
    if B.rank == 0:
        return 1
    return subgroup_index(G0, B)


def q(S: GradedSemigroup) -> int:
    """Dimension of the level-0 boundary of the span, ``rank span(S) - 1``."""
    return rank(S._require_points()) - 1


@dataclass(frozen=True)
class NonnegativityCheck:
    ok: bool
    q_estimate: int | None
    ratios: tuple = ()
    exact: bool = True

    def __bool__(self) -> bool:
        return self.ok


def strongly_nonnegative(S: GradedSemigroup) -> NonnegativityCheck:
    """Whether Cone(S) meets the level-0 boundary only at the origin.

    For generators of positive level this always holds.  For sampled
    semigroups the growth of ``#S_{mk}`` is fitted on a log-log scale and the
    smallest exponent ``q`` for which ``#S_{mk}/k^q`` stays bounded is
    reported; the answer is an empirical estimate.
    """
    S._require_points()
    if S.finitely_generated:
        return NonnegativityCheck(True, q(S))
    m = level_index(S)
    levels = [k for k in range(m, S.truncation + 1, m) if slice(S, k)]
    if len(levels) < 3:
        raise NokError("INSUFFICIENT_SAMPLES", f"only {len(levels)} nonempty slices sampled")
    counts = {k // m: len(slice(S, k)) for k in levels}
    ks = sorted(counts)
    lo, hi = ks[len(ks) // 2], ks[-1]
    if lo == hi:
        lo = ks[-2]
    slope = math.log(counts[hi] / counts[lo]) / math.log(hi / lo)
    q_est = max(0, math.ceil(slope - 0.5))
    ratios = tuple((k, Fraction(counts[k], k**q_est)) for k in ks)
    return NonnegativityCheck(q_est <= S.d, q_est, ratios, exact=False)


def sumset(A: Iterable[tuple], n: int) -> frozenset:
    """The n-fold Minkowski sum ``{x_1 + ... + x_n : x_i in A}``."""
    A = frozenset(tuple(a) for a in A)
    if not A:
        raise NokError("EMPTY_SET", "sumset of the empty set")
    if n < 1:
        raise NokError("OUT_OF_RANGE", f"n={n} must be positive")
    acc = A
    for _ in range(n - 1):
        acc = frozenset(_add(x, a) for x in acc for a in A)
    return acc


def minimal_generators(slices: Mapping[int, Iterable[tuple]], top: int) -> list[tuple]:
    """Minimal generators of the semigroup generated by the given slices up to ``top``.

    A point of level k is kept when it is not a sum of points already available
    at lower levels; the result generates every supplied slice.
    """
    gens: list[tuple] = []
    first = next((p for k in range(1, top + 1) for p in slices.get(k, ())), None)
    if first is None:
        return gens
    reach: dict[int, set] = {0: {(0,) * len(first)}}
    for k in range(1, top + 1):
        pts = {tuple(p) for p in slices.get(k, ())}
        got = set()
        for g in gens:
            prev = reach.get(k - g[-1])
            if prev:
                got.update(_add(p, g[:-1]) for p in prev)
        for p in sorted(pts - got):
            gens.append(p + (k,))
        reach[k] = pts | got
    return gens
