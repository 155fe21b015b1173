"""Subspace arithmetic over the rationals.

Vectors are tuples of ``Fraction`` and subspaces are row lists. Elimination
is delegated to sympy's ``DomainMatrix`` over ``QQ``; canonical subspaces
are the non-zero rows of the reduced row echelon form.
"""
from fractions import Fraction
from typing import List, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

Vector = Tuple[Fraction, ...]
Rows = Tuple[Vector, ...]


def _to_qq(x) -> QQ:
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


def _from_sympy(x) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def vector(values: Sequence) -> Vector:
    return tuple(Fraction(x) for x in values)


def rref(rows: Sequence[Sequence], ncols: int) -> Tuple[Rows, Tuple[int, ...]]:
    rows = [r for r in rows]
    if not rows or ncols == 0:
        return (), ()
    matrix = DomainMatrix([[_to_qq(x) for x in r] for r in rows], (len(rows), ncols), QQ)
    reduced, pivots = matrix.rref()
    dense = reduced.to_Matrix().tolist()
    basis = tuple(tuple(_from_sympy(x) for x in dense[i]) for i in range(len(pivots)))
    return basis, tuple(pivots)


def row_space(rows: Sequence[Sequence], ncols: int) -> Rows:
    return rref(rows, ncols)[0]


def rank(rows: Sequence[Sequence], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def span_sum(left: Sequence[Sequence], right: Sequence[Sequence], ncols: int) -> Rows:
    return row_space(list(left) + list(right), ncols)


def contains(space: Sequence[Sequence], vectors: Sequence[Sequence], ncols: int) -> bool:
    vectors = [v for v in vectors if any(v)]
    if not vectors:
        return True
    return rank(list(space) + vectors, ncols) == rank(space, ncols)


def equal(left: Sequence[Sequence], right: Sequence[Sequence], ncols: int) -> bool:
    return row_space(left, ncols) == row_space(right, ncols)


def nullspace(rows: Sequence[Sequence], ncols: int) -> Rows:
    """Basis of ``{x : M x = 0}`` for the matrix with the given rows."""
    basis, pivots = rref(rows, ncols)
    free = [j for j in range(ncols) if j not in pivots]
    result = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(basis, pivots):
            x[p] = -row[f]
        result.append(tuple(x))
    return tuple(result)


def left_kernel(rows: Sequence[Sequence], ncols: int) -> Rows:
    """Basis of the coefficient vectors ``c`` with ``sum c_i rows_i = 0``."""
    rows = list(rows)
    if not rows:
        return ()
    transposed = [[rows[i][j] for i in range(len(rows))] for j in range(ncols)]
    return nullspace(transposed, len(rows))


def combine(coefficients: Sequence, rows: Sequence[Sequence], ncols: int) -> Vector:
    total = [Fraction(0)] * ncols
    for c, row in zip(coefficients, rows):
        if c:
            for j in range(ncols):
                total[j] += c * row[j]
    return tuple(total)


def apply(rows: Sequence[Sequence], matrix: Sequence[Sequence], ncols: int) -> List[Vector]:
    """Row vectors times ``matrix`` (rows of ``matrix`` are images of basis vectors)."""
    return [combine(v, matrix, ncols) for v in rows]


def intersect(left: Sequence[Sequence], right: Sequence[Sequence], ncols: int) -> Rows:
    left = list(row_space(left, ncols))
    right = list(row_space(right, ncols))
    if not left or not right:
        return ()
    relations = left_kernel(left + right, ncols)
    return row_space([combine(c[:len(left)], left, ncols) for c in relations], ncols)


def preimage(matrix: Sequence[Sequence], target: Sequence[Sequence], nsource: int, ntarget: int) -> Rows:
    """``{v : v M in span(target)}`` for the map whose basis images are the rows of ``M``."""
    matrix = list(matrix)
    target = list(row_space(target, ntarget))
    if nsource == 0:
        return ()
    if ntarget == 0:
        return identity(nsource)
    relations = left_kernel(matrix + target, ntarget)
    return row_space([c[:nsource] for c in relations], nsource)


def identity(n: int) -> Rows:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def complement_vector(space: Sequence[Sequence], subspace: Sequence[Sequence], ncols: int):
    """A basis vector of ``space`` lying outside ``subspace``, if any."""
    for v in space:
        if not contains(subspace, [v], ncols):
            return v
    return None
