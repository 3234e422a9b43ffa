"""Exact integer and rational linear algebra.

Matrices are plain lists of rows; vectors are tuples.  Python integers are
arbitrary precision and :class:`fractions.Fraction` keeps rationals in lowest
terms, so nothing here ever rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NokError

Rat = Fraction
IntVec = tuple  # tuple[int, ...]
Matrix = list  # list[list[int]]

#: Index of a sublattice of strictly smaller rank.
INFINITE = math.inf


def lex_cmp(a: Sequence, b: Sequence) -> int:
    """Compare two vectors lexicographically, first coordinate most significant.

    Returns -1, 0 or 1.
    """
    if len(a) != len(b):
        raise NokError("LENGTH_MISMATCH", f"cannot compare lengths {len(a)} and {len(b)}")
    for x, y in zip(a, b):
        if x != y:
            return -1 if x < y else 1
    return 0


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if not A:
        return []
    cols = list(zip(*B)) if B else []
    if not cols:
        return [[] for _ in A]
    return [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in A]


def transpose(A: Matrix) -> Matrix:
    return [list(col) for col in zip(*A)]


def det(A: Sequence[Sequence]) -> Fraction:
    """Determinant of a square matrix by fraction-exact elimination."""
    n = len(A)
    M = [[Fraction(x) for x in row] for row in A]
    result = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            result = -result
        piv = M[c][c]
        result *= piv
        for r in range(c + 1, n):
            f = M[r][c] / piv
            if f:
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return result


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    M = [[Fraction(x) for x in row] for row in rows]
    pivots: list[int] = []
    r = 0
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        M[r] = [x / piv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    rows = [row for row in rows if any(row)]
    if not rows:
        return 0
    return len(rref(rows)[1])


class RowSpace:
    """Incrementally grown rational row space (kept in echelon form)."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict[int, list[Fraction]] = {}  # pivot column -> row with 1 at pivot

    @property
    def rank(self) -> int:
        return len(self.rows)

    def add(self, v: Sequence) -> bool:
        """Insert ``v``; returns True when the rank grew."""
        if len(self.rows) == self.ncols:
            return False
        w = [Fraction(x) for x in v]
        for c in range(self.ncols):
            if w[c] == 0:
                continue
            row = self.rows.get(c)
            if row is None:
                piv = w[c]
                self.rows[c] = [x / piv for x in w]
                return True
            f = w[c]
            w = [x - f * y for x, y in zip(w, row)]
        return False


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[tuple[Fraction, ...]]:
    """Basis of {x : rows . x = 0} over Q."""
    if not rows or not any(any(r) for r in rows):
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    R, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, pc in zip(R, pivots):
            x[pc] = -row[f]
        basis.append(tuple(x))
    return basis


def solve_coordinates(basis: Sequence[Sequence], v: Sequence) -> tuple[Fraction, ...] | None:
    """Coefficients c with sum c_i basis_i = v, or None if v is outside the span.

    ``basis`` must be linearly independent.
    """
    k = len(basis)
    if k == 0:
        return () if not any(v) else None
    # Augmented system, columns = basis vectors.
    rows = [[Fraction(b[j]) for b in basis] + [Fraction(v[j])] for j in range(len(v))]
    R, pivots = rref(rows)
    if k in pivots:
        return None
    coords = [Fraction(0)] * k
    for row, pc in zip(R, pivots):
        coords[pc] = row[k]
    return tuple(coords)


def inverse(A: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(A)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise NokError("SINGULAR", "matrix is not invertible")
    return [row[n:] for row in R]


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    fr = [Fraction(x) for x in v]
    den = math.lcm(*(x.denominator for x in fr)) if fr else 1
    ints = [int(x * den) for x in fr]
    g = math.gcd(*ints) if ints else 0
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


# --------------------------------------------------------------------------
# Normal forms


def hnf(M: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix]:
    """Row Hermite normal form.

    Returns ``(H, U)`` with ``H = U M``, ``U`` unimodular, ``H`` in row echelon
    form with positive pivots, entries above each pivot reduced into
    ``[0, pivot)`` and zero rows at the bottom.
    """
    m = len(M)
    n = len(M[0]) if m else 0
    A = [list(map(int, row)) for row in M]
    U = identity(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nonzero = [i for i in range(r, m) if A[i][c] != 0]
            if not nonzero:
                break
            p = min(nonzero, key=lambda i: abs(A[i][c]))
            A[r], A[p] = A[p], A[r]
            U[r], U[p] = U[p], U[r]
            done = True
            for i in range(r + 1, m):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                    U[i] = [x - q * y for x, y in zip(U[i], U[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
            U[r] = [-x for x in U[r]]
        for i in range(r):
            q = A[i][c] // A[r][c]
            if q:
                A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                U[i] = [x - q * y for x, y in zip(U[i], U[r])]
        r += 1
    return A, U


def snf(M: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form ``D = U M V`` with ``d_1 | d_2 | ...`` and ``d_i >= 0``."""
    m = len(M)
    n = len(M[0]) if m else 0
    D = [list(map(int, row)) for row in M]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst -= q * row_src
        D[dst] = [x - q * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x - q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        for row in D:
            row[dst] -= q * row[src]
        for row in V:
            row[dst] -= q * row[src]

    for t in range(min(m, n)):
        while True:
            entries = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
            if not entries:
                return D, U, V
            _, i, j = min(entries)
            swap_rows(t, i)
            swap_cols(t, j)
            clean = True
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, D[i][t] // D[t][t])
                    clean = clean and D[i][t] == 0
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, D[t][j] // D[t][t])
                    clean = clean and D[t][j] == 0
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % D[t][t]),
                None,
            )
            if bad is None:
                break
            # Pull the offending row into row t; the next pass lowers the pivot.
            add_row(t, bad, -1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return D, U, V


def left_kernel(M: Sequence[Sequence[int]]) -> Matrix:
    """Z-basis of the integer vectors x with x M = 0."""
    H, U = hnf(M)
    return [U[i] for i, row in enumerate(H) if not any(row)]


# --------------------------------------------------------------------------
# Lattices


@dataclass(frozen=True)
class Lattice:
    """A subgroup of Z^k, stored by its Hermite-normal-form basis."""

    basis: tuple
    ambient: int

    @classmethod
    def from_generators(cls, vectors: Iterable[Sequence[int]], ambient: int) -> "Lattice":
        rows = [tuple(int(x) for x in v) for v in vectors]
        for v in rows:
            if len(v) != ambient:
                raise NokError("LENGTH_MISMATCH", f"vector {v} not in Z^{ambient}")
        rows = [v for v in rows if any(v)]
        if not rows:
            return cls((), ambient)
        H, _ = hnf(rows)
        return cls(tuple(tuple(r) for r in H if any(r)), ambient)

    @classmethod
    def full(cls, ambient: int) -> "Lattice":
        return cls(tuple(tuple(r) for r in identity(ambient)), ambient)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def __contains__(self, v: Sequence[int]) -> bool:
        w = list(v)
        for row in self.basis:
            c = next(i for i, x in enumerate(row) if x)
            q, rem = divmod(w[c], row[c])
            if rem:
                return False
            w = [x - q * y for x, y in zip(w, row)]
        return not any(w)

    def in_span(self, v: Sequence) -> bool:
        return rank(list(self.basis) + [list(v)]) == self.rank

    def coordinates(self, v: Sequence) -> tuple[Fraction, ...] | None:
        return solve_coordinates(self.basis, v)

    def transform(self, T: Sequence[Sequence[int]]) -> "Lattice":
        """Image under x -> T x."""
        return Lattice.from_generators(
            [tuple(sum(T[i][j] * v[j] for j in range(len(v))) for i in range(len(T))) for v in self.basis],
            len(T),
        )


def subgroup_index(A: Lattice, B: Lattice) -> int | float:
    """``[B : A]``, or :data:`INFINITE` when ``rank A < rank B``."""
    if A.ambient != B.ambient:
        raise NokError("LENGTH_MISMATCH", "lattices live in different ambient spaces")
    if rank(list(B.basis) + list(A.basis)) != B.rank:
        raise NokError("NOT_SUBGROUP", "A is not contained in the rational span of B")
    if A.rank < B.rank:
        return INFINITE
    if B.rank == 0:
        return 1
    coords = []
    for v in A.basis:
        c = B.coordinates(v)
        if c is None or any(x.denominator != 1 for x in c):
            raise NokError("NOT_SUBGROUP", f"{v} is not in B")
        coords.append([int(x) for x in c])
    D, _, _ = snf(coords)
    return math.prod(D[i][i] for i in range(len(D)))


def saturate(L: Lattice, ambient: int | None = None) -> Lattice:
    """``span_Q(L) ∩ Z^k``."""
    k = L.ambient if ambient is None else ambient
    if L.rank == 0:
        return Lattice((), k)
    # span_Q(L) ∩ Z^k is the double orthogonal of L inside Z^k.
    perp = [primitive(v) for v in nullspace(L.basis, k)]
    if not perp:
        return Lattice.full(k)
    # Integer kernel of the matrix whose columns are perp vectors.
    kernel = left_kernel(transpose(perp))
    return Lattice.from_generators(kernel, k)


def intersect_with_kernel(L: Lattice, functional: Sequence[int]) -> Lattice:
    """``{v in L : functional . v = 0}``."""
    if L.rank == 0:
        return L
    values = [[sum(a * b for a, b in zip(functional, v))] for v in L.basis]
    combos = left_kernel(values)
    vectors = [
        tuple(sum(c * v[j] for c, v in zip(combo, L.basis)) for j in range(L.ambient))
        for combo in combos
    ]
    return Lattice.from_generators(vectors, L.ambient)
