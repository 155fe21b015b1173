"""Exact integer matrices, normal forms and finitely generated abelian groups.

Matrices are stored row-major as tuples of Python ints and handed to numpy as
``dtype=object`` arrays for row and column operations, so entries never
overflow.
"""
import logging
from dataclasses import dataclass
from math import gcd
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors as domain_invariant_factors

from src.errors import DimensionMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: Tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionMismatchError(f"negative shape {self.rows}x{self.cols}")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatchError(
                f"{len(self.entries)} entries do not fill a {self.rows}x{self.cols} matrix")
        object.__setattr__(self, 'entries', tuple(int(x) for x in self.entries))

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], cols: int = None) -> 'IntMatrix':
        rows = [tuple(int(x) for x in row) for row in rows]
        if cols is None:
            if not rows:
                raise DimensionMismatchError("column count needed for a matrix without rows")
            cols = len(rows[0])
        for row in rows:
            if len(row) != cols:
                raise DimensionMismatchError(f"ragged row {row} for {cols} columns")
        return cls(len(rows), cols, tuple(x for row in rows for x in row))

    @classmethod
    def from_columns(cls, columns: Iterable[Sequence[int]], rows: int) -> 'IntMatrix':
        columns = [tuple(c) for c in columns]
        return cls.from_rows([[c[i] for c in columns] for i in range(rows)], cols=len(columns))

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'IntMatrix':
        rows, cols = array.shape
        return cls(rows, cols, tuple(int(x) for x in array.flatten()))

    @classmethod
    def identity(cls, n: int) -> 'IntMatrix':
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'IntMatrix':
        return cls(rows, cols, (0,) * (rows * cols))

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> List[Tuple[int, ...]]:
        return [self.row(i) for i in range(self.rows)]

    def columns(self) -> List[Tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def to_array(self) -> np.ndarray:
        array = np.zeros((self.rows, self.cols), dtype=object)
        for i in range(self.rows):
            for j in range(self.cols):
                array[i, j] = self[i, j]
        return array

    def transpose(self) -> 'IntMatrix':
        return IntMatrix.from_rows(self.columns(), cols=self.rows)

    def apply(self, vector: Sequence[int]) -> Tuple[int, ...]:
        if len(vector) != self.cols:
            raise DimensionMismatchError(f"vector of length {len(vector)} for {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(self.row(i), vector)) for i in range(self.rows))

    def __matmul__(self, other: 'IntMatrix') -> 'IntMatrix':
        if self.cols != other.rows:
            raise DimensionMismatchError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        cols = other.columns()
        return IntMatrix.from_rows(
            [[sum(a * b for a, b in zip(self.row(i), c)) for c in cols] for i in range(self.rows)],
            cols=other.cols)


@dataclass(frozen=True)
class AbelianGroupPresentation:
    """``Z^free_rank (+) Z/t_1 (+) ... (+) Z/t_k`` with a projection from ``Z^ambient``.

    Class coordinates list the free part first and then one residue per
    torsion factor.
    """
    free_rank: int
    torsion: Tuple[int, ...]
    projection: IntMatrix

    @property
    def ambient_rank(self) -> int:
        return self.projection.cols

    @property
    def coordinates(self) -> int:
        return self.free_rank + len(self.torsion)

    def reduce(self, coordinates: Sequence[int]) -> Tuple[int, ...]:
        coordinates = tuple(int(x) for x in coordinates)
        if len(coordinates) != self.coordinates:
            raise DimensionMismatchError(
                f"class of length {len(coordinates)} for a group with {self.coordinates} coordinates")
        free = coordinates[:self.free_rank]
        residues = tuple(c % t for c, t in zip(coordinates[self.free_rank:], self.torsion))
        return free + residues

    def class_of(self, vector: Sequence[int]) -> Tuple[int, ...]:
        return self.reduce(self.projection.apply(vector))

    def add(self, left: Sequence[int], right: Sequence[int]) -> Tuple[int, ...]:
        return self.reduce([a + b for a, b in zip(left, right)])

    def is_zero_class(self, vector: Sequence[int]) -> bool:
        return not any(self.class_of(vector))

    def zero(self) -> Tuple[int, ...]:
        return (0,) * self.coordinates

    def describe(self) -> str:
        parts = ["Z"] * self.free_rank + [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def _identity_array(n: int) -> np.ndarray:
    array = np.zeros((n, n), dtype=object)
    for i in range(n):
        array[i, i] = 1
    return array


def _smallest_entry(D: np.ndarray, t: int):
    candidates = [(abs(D[i, j]), i, j)
                  for i in range(t, D.shape[0]) for j in range(t, D.shape[1]) if D[i, j] != 0]
    return min(candidates) if candidates else None


def smith_normal_form(A: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return unimodular ``U``, ``V`` and diagonal ``D`` with ``U A V = D``.

    The diagonal is non-negative and each entry divides the next.
    """
    D = A.to_array()
    m, n = A.rows, A.cols
    U = _identity_array(m)
    V = _identity_array(n)

    t = 0
    while t < min(m, n):
        pivot = _smallest_entry(D, t)
        if pivot is None:
            break
        _, i, j = pivot
        D[[t, i]] = D[[i, t]]
        U[[t, i]] = U[[i, t]]
        D[:, [t, j]] = D[:, [j, t]]
        V[:, [t, j]] = V[:, [j, t]]

        while True:
            for i in range(t + 1, m):
                q = D[i, t] // D[t, t]
                if q:
                    D[i] = D[i] - q * D[t]
                    U[i] = U[i] - q * U[t]
            for j in range(t + 1, n):
                q = D[t, j] // D[t, t]
                if q:
                    D[:, j] = D[:, j] - q * D[:, t]
                    V[:, j] = V[:, j] - q * V[:, t]

            remainders = [(abs(D[i, t]), 'row', i) for i in range(t + 1, m) if D[i, t] != 0]
            remainders += [(abs(D[t, j]), 'col', j) for j in range(t + 1, n) if D[t, j] != 0]
            if remainders:
                _, kind, k = min(remainders)
                if kind == 'row':
                    D[[t, k]] = D[[k, t]]
                    U[[t, k]] = U[[k, t]]
                else:
                    D[:, [t, k]] = D[:, [k, t]]
                    V[:, [t, k]] = V[:, [k, t]]
                continue

            offender = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                             if D[i, j] % D[t, t] != 0), None)
            if offender is None:
                break
            i, _ = offender
            D[t] = D[t] + D[i]
            U[t] = U[t] + U[i]

        if D[t, t] < 0:
            D[t] = -D[t]
            U[t] = -U[t]
        t += 1

    return IntMatrix.from_array(U), IntMatrix.from_array(D), IntMatrix.from_array(V)


def _over_zz(A: IntMatrix) -> DomainMatrix:
    return DomainMatrix([[ZZ(x) for x in row] for row in A.to_rows()], (A.rows, A.cols), ZZ)


def invariant_factors(A: IntMatrix) -> Tuple[int, ...]:
    """Non-zero invariant factors, smallest first, from SymPy's Smith form over ``ZZ``."""
    if A.rows == 0 or A.cols == 0:
        return ()
    factors = sorted(abs(int(f)) for f in domain_invariant_factors(_over_zz(A)) if f)
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            g = gcd(factors[i], factors[j])
            factors[i], factors[j] = g, factors[i] // g * factors[j]
    return tuple(factors)


def rank(A: IntMatrix) -> int:
    return len(invariant_factors(A))


def hermite_normal_form(A: IntMatrix) -> Tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite form: unimodular ``U`` with ``U A = H``.

    ``H`` is in row echelon form with positive pivots, entries above each
    pivot reduced into ``[0, pivot)``, zero rows last.
    """
    H = A.to_array()
    m, n = A.rows, A.cols
    U = _identity_array(m)
    p = 0
    for col in range(n):
        if p >= m:
            break
        while True:
            nonzero = [(abs(H[i, col]), i) for i in range(p, m) if H[i, col] != 0]
            if not nonzero:
                break
            _, i = min(nonzero)
            H[[p, i]] = H[[i, p]]
            U[[p, i]] = U[[i, p]]
            done = True
            for i in range(p + 1, m):
                q = H[i, col] // H[p, col]
                if q:
                    H[i] = H[i] - q * H[p]
                    U[i] = U[i] - q * U[p]
                if H[i, col] != 0:
                    done = False
            if done:
                break
        if H[p, col] == 0:
            continue
        if H[p, col] < 0:
            H[p] = -H[p]
            U[p] = -U[p]
        for i in range(p):
            q = H[i, col] // H[p, col]
            if q:
                H[i] = H[i] - q * H[p]
                U[i] = U[i] - q * U[p]
        p += 1
    return IntMatrix.from_array(H), IntMatrix.from_array(U)


def _nonzero_rows(A: IntMatrix) -> List[Tuple[int, ...]]:
    return [row for row in A.to_rows() if any(row)]


def kernel_basis(A: IntMatrix) -> IntMatrix:
    """Columns form a basis of the saturated lattice ``{x : A x = 0}``.

    The basis is put in Hermite form (as rows of its transpose) so it is
    reproducible.
    """
    _, D, V = smith_normal_form(A)
    r = len([i for i in range(min(D.rows, D.cols)) if D[i, i] != 0])
    vectors = [V.column(j) for j in range(r, A.cols)]
    if not vectors:
        return IntMatrix.zeros(A.cols, 0)
    H, _ = hermite_normal_form(IntMatrix.from_rows(vectors, cols=A.cols))
    return IntMatrix.from_columns(_nonzero_rows(H), rows=A.cols)


def cokernel_presentation(A: IntMatrix) -> AbelianGroupPresentation:
    """Present ``Z^rows / image(A)``.

    Factors equal to 1 are dropped from the torsion. The free coordinates are
    normalized by a Hermite form so that, for instance, the class map of the
    projective plane comes out as ``(1, 1, 1)``.
    """
    U, D, _ = smith_normal_form(A)
    diagonal = [D[i, i] for i in range(min(D.rows, D.cols)) if D[i, i] != 0]
    r = len(diagonal)

    torsion_rows = []
    torsion = []
    for i, d in enumerate(diagonal):
        if d > 1:
            torsion.append(d)
            torsion_rows.append(tuple(x % d for x in U.row(i)))

    free_rows = [U.row(i) for i in range(r, A.rows)]
    if free_rows:
        H, _ = hermite_normal_form(IntMatrix.from_rows(free_rows, cols=A.rows))
        free_rows = H.to_rows()

    projection = IntMatrix.from_rows(free_rows + torsion_rows, cols=A.rows)
    presentation = AbelianGroupPresentation(len(free_rows), tuple(torsion), projection)
    logger.debug("cokernel of %dx%d matrix is %s", A.rows, A.cols, presentation.describe())
    return presentation


def determinant(A: IntMatrix) -> int:
    if A.rows != A.cols:
        raise DimensionMismatchError(f"determinant of non-square {A.rows}x{A.cols} matrix")
    if A.rows == 0:
        return 1
    return int(_over_zz(A).det())


def solve_integral(A: IntMatrix, b: Sequence[int]):
    """An integer solution of ``A x = b`` or ``None``."""
    if len(b) != A.rows:
        raise DimensionMismatchError(f"right-hand side of length {len(b)} for {A.rows} rows")
    U, D, V = smith_normal_form(A)
    c = U.apply(b)
    y = [0] * A.cols
    for i in range(A.rows):
        d = D[i, i] if i < min(D.rows, D.cols) else 0
        if d == 0:
            if c[i] != 0:
                return None
        elif c[i] % d != 0:
            return None
        else:
            y[i] = c[i] // d
    return V.apply(y)


def primitive_dual_vector(vector: Sequence[int]) -> Tuple[int, ...]:
    """A ``w`` with ``<w, vector> = 1``, read off a Hermite-form reduction.

    ``vector`` must be primitive.
    """
    column = IntMatrix.from_rows([[x] for x in vector], cols=1)
    H, U = hermite_normal_form(column)
    if H[0, 0] != 1:
        raise DimensionMismatchError(f"{tuple(vector)} is not primitive")
    return U.row(0)


def generates(presentation: AbelianGroupPresentation, vectors: Iterable[Sequence[int]]) -> bool:
    """Whether the classes of ``vectors`` generate the whole group."""
    columns = [presentation.class_of(v) for v in vectors]
    k = presentation.coordinates
    if k == 0:
        return True
    for offset, t in enumerate(presentation.torsion):
        relation = [0] * k
        relation[presentation.free_rank + offset] = t
        columns.append(tuple(relation))
    if not columns:
        return False
    factors = invariant_factors(IntMatrix.from_columns(columns, rows=k))
    return len(factors) == k and all(f == 1 for f in factors)
