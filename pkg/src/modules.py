"""Fine-graded modules over the Cox ring, evaluated one multidegree at a time.

A module is a small expression tree (images, kernels, cokernels, sums,
intersections, quotients, colons, saturations, shifts) over a free module
``(+) S(-a_i)``. Its piece in fine degree ``a`` is a rational subquotient of
the ambient piece, which has one basis vector ``x^(a - a_i)`` for every
generator with ``a - a_i >= 0``.
"""
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd
from joblib import Parallel, delayed
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import ring

from src import rational
from src.cox_ring import GradingSetup, Monomial, MonomialIdeal, format_monomial, x_sigma
from src.errors import (AmbientMismatchError, DimensionMismatchError, HomogeneityError,
                        MinorBoundError)

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]
BasisLabel = Tuple[int, Exponents]


def _add(a: Sequence[int], b: Sequence[int]) -> Exponents:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: Sequence[int], b: Sequence[int]) -> Exponents:
    return tuple(x - y for x, y in zip(a, b))


def _scale(k: int, a: Sequence[int]) -> Exponents:
    return tuple(k * x for x in a)


@dataclass(frozen=True)
class FreeModuleSpec:
    nvars: int
    shifts: Tuple[Exponents, ...]

    def __post_init__(self):
        shifts = tuple(tuple(int(x) for x in s) for s in self.shifts)
        for s in shifts:
            if len(s) != self.nvars:
                raise DimensionMismatchError(f"shift {s} is not in Z^{self.nvars}")
        object.__setattr__(self, 'shifts', shifts)

    @classmethod
    def zeros(cls, nvars: int, rank: int) -> 'FreeModuleSpec':
        return cls(nvars, ((0,) * nvars,) * rank)

    @property
    def rank(self) -> int:
        return len(self.shifts)

    def basis_at(self, degree: Sequence[int]) -> Tuple[BasisLabel, ...]:
        labels = []
        for i, s in enumerate(self.shifts):
            e = _sub(degree, s)
            if all(x >= 0 for x in e):
                labels.append((i, e))
        return tuple(labels)

    def shifted(self, degree: Sequence[int]) -> 'FreeModuleSpec':
        """The ambient of ``M(d)``: generator shifts move by ``-d``."""
        return FreeModuleSpec(self.nvars, tuple(_sub(s, degree) for s in self.shifts))

    def lowest_degree(self) -> Exponents:
        if not self.shifts:
            return (0,) * self.nvars
        return tuple(min(s[k] for s in self.shifts) for k in range(self.nvars))

    def describe(self) -> str:
        if not self.shifts:
            return "0"
        return " + ".join(f"S(-{list(s)})" for s in self.shifts)


def _normalize_entry(entry) -> Optional[Monomial]:
    if entry is None:
        return None
    if not isinstance(entry, Monomial):
        coefficient, exponents = entry
        entry = Monomial(tuple(exponents), Fraction(coefficient))
    return entry if entry.coefficient != 0 else None


def equivariant_shifts(grid: Sequence[Sequence[Optional[Monomial]]], nvars: int):
    """Target and source shifts making a monomial matrix homogeneous, or ``None``.

    Entries ``(i, j)`` force ``source_j - target_i``; shifts are propagated
    along the bipartite graph of non-zero entries, the first row of each
    connected component sitting in degree zero.
    """
    nrows = len(grid)
    ncols = len(grid[0]) if nrows else 0
    zero = (0,) * nvars
    target: List[Optional[Exponents]] = [None] * nrows
    source: List[Optional[Exponents]] = [None] * ncols

    for start in range(nrows):
        if target[start] is not None:
            continue
        target[start] = zero
        queue = deque([('row', start)])
        while queue:
            kind, index = queue.popleft()
            if kind == 'row':
                for j in range(ncols):
                    entry = grid[index][j]
                    if entry is None:
                        continue
                    wanted = tuple(a + e for a, e in zip(target[index], entry.exponents))
                    if source[j] is None:
                        source[j] = wanted
                        queue.append(('col', j))
                    elif source[j] != wanted:
                        return None
            else:
                for i in range(nrows):
                    entry = grid[i][index]
                    if entry is None:
                        continue
                    wanted = tuple(b - e for b, e in zip(source[index], entry.exponents))
                    if target[i] is None:
                        target[i] = wanted
                        queue.append(('row', i))
                    elif target[i] != wanted:
                        return None
    source = [s if s is not None else zero for s in source]
    return tuple(target), tuple(source)


@dataclass(frozen=True)
class MonomialMatrix:
    """Graded map ``source -> target``; ``entries[i][j]`` maps generator ``j`` to row ``i``.

    Homogeneity: a non-zero entry ``(i, j)`` has exponent ``source_j - target_i``.
    """
    source: FreeModuleSpec
    target: FreeModuleSpec
    entries: Tuple[Tuple[Optional[Monomial], ...], ...]

    def __post_init__(self):
        entries = tuple(tuple(_normalize_entry(e) for e in row) for row in self.entries)
        if len(entries) != self.target.rank:
            raise DimensionMismatchError(
                f"{len(entries)} rows for a target of rank {self.target.rank}")
        for i, row in enumerate(entries):
            if len(row) != self.source.rank:
                raise DimensionMismatchError(
                    f"row {i} has {len(row)} entries for a source of rank {self.source.rank}")
            for j, entry in enumerate(row):
                if entry is None:
                    continue
                expected = _sub(self.source.shifts[j], self.target.shifts[i])
                if entry.exponents != expected:
                    raise HomogeneityError(
                        f"entry ({i}, {j}) = {entry} is not of degree {list(expected)}")
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def from_grid(cls, grid, nvars: int, source_shifts=None, target_shifts=None) -> 'MonomialMatrix':
        """Build from a grid of monomials, inferring shifts when not given."""
        grid = tuple(tuple(_normalize_entry(e) for e in row) for row in grid)
        if source_shifts is None or target_shifts is None:
            inferred = equivariant_shifts(grid, nvars)
            if inferred is None:
                raise HomogeneityError("no shifts make this matrix homogeneous")
            target_shifts, source_shifts = inferred
        return cls(FreeModuleSpec(nvars, tuple(source_shifts)),
                   FreeModuleSpec(nvars, tuple(target_shifts)), grid)

    @classmethod
    def constant(cls, rows: Sequence[Sequence[int]], nvars: int) -> 'MonomialMatrix':
        rows = [list(r) for r in rows]
        cols = len(rows[0]) if rows else 0
        zero = (0,) * nvars
        grid = tuple(tuple(Monomial(zero, x) if x else None for x in r) for r in rows)
        return cls(FreeModuleSpec.zeros(nvars, cols), FreeModuleSpec.zeros(nvars, len(rows)), grid)

    @classmethod
    def variable_diagonal(cls, nvars: int, variables: Sequence[int]) -> 'MonomialMatrix':
        """``diag(x_v)`` from ``(+) S(-e_v)`` to ``S^k``."""
        units = [tuple(int(i == v) for i in range(nvars)) for v in variables]
        grid = tuple(tuple(Monomial(units[j]) if i == j else None for j in range(len(units)))
                     for i in range(len(units)))
        return cls(FreeModuleSpec(nvars, tuple(units)), FreeModuleSpec.zeros(nvars, len(units)), grid)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.target.rank, self.source.rank

    def at_degree(self, degree: Sequence[int]):
        """Source basis, target basis, and the image rows of the source basis."""
        source_basis = self.source.basis_at(degree)
        target_basis = self.target.basis_at(degree)
        position = {label[0]: p for p, label in enumerate(target_basis)}
        rows = []
        for j, _ in source_basis:
            row = [Fraction(0)] * len(target_basis)
            for i in range(self.target.rank):
                entry = self.entries[i][j]
                if entry is not None:
                    row[position[i]] = entry.coefficient
            rows.append(tuple(row))
        return source_basis, target_basis, rows

    def __matmul__(self, other: 'MonomialMatrix') -> 'MonomialMatrix':
        """``self o other``."""
        if other.target != self.source:
            raise AmbientMismatchError("composed maps do not share the middle module")
        grid = []
        for i in range(self.target.rank):
            row = []
            for j in range(other.source.rank):
                coefficient = Fraction(0)
                for k in range(self.source.rank):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if a is not None and b is not None:
                        coefficient += a.coefficient * b.coefficient
                exponents = _sub(other.source.shifts[j], self.target.shifts[i])
                row.append(Monomial(exponents, coefficient) if coefficient else None)
            grid.append(tuple(row))
        return MonomialMatrix(other.source, self.target, tuple(grid))

    def hstack(self, other: 'MonomialMatrix') -> 'MonomialMatrix':
        if other.target != self.target:
            raise AmbientMismatchError("stacked maps must share their target")
        source = FreeModuleSpec(self.source.nvars, self.source.shifts + other.source.shifts)
        grid = tuple(a + b for a, b in zip(self.entries, other.entries))
        return MonomialMatrix(source, self.target, grid)

    def column(self, j: int) -> 'MonomialMatrix':
        source = FreeModuleSpec(self.source.nvars, (self.source.shifts[j],))
        return MonomialMatrix(source, self.target, tuple((row[j],) for row in self.entries))

    def transpose(self) -> 'MonomialMatrix':
        """The dual map ``Hom(target, S) -> Hom(source, S)``; shifts change sign."""
        nvars = self.source.nvars
        source = FreeModuleSpec(nvars, tuple(_scale(-1, s) for s in self.target.shifts))
        target = FreeModuleSpec(nvars, tuple(_scale(-1, s) for s in self.source.shifts))
        grid = tuple(tuple(self.entries[i][j] for i in range(self.target.rank)) for j in range(self.source.rank))
        return MonomialMatrix(source, target, grid)

    def describe(self) -> str:
        return "[" + "; ".join(", ".join(str(e) if e else "0" for e in row)
                               for row in self.entries) + "]"


@dataclass(frozen=True)
class GradedPiece:
    """``span / relations`` inside the ambient piece at ``degree``."""
    degree: Exponents
    basis: Tuple[BasisLabel, ...]
    span: rational.Rows
    relations: rational.Rows
    stable: bool = True

    @property
    def ambient_dim(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        return len(self.span) - len(self.relations)

    def is_zero(self) -> bool:
        return self.dim == 0

    def same_subquotient(self, other: 'GradedPiece') -> bool:
        return self.span == other.span and self.relations == other.relations

    def witness(self) -> Optional[rational.Vector]:
        """A vector of the span that is non-zero modulo the relations."""
        return rational.complement_vector(self.span, self.relations, self.ambient_dim)

    def describe_vector(self, v: Sequence[Fraction]) -> str:
        terms = []
        for c, (i, e) in zip(v, self.basis):
            if c:
                terms.append(f"{c}*{format_monomial(e)}*e{i}")
        return " + ".join(terms) if terms else "0"


def _piece_from(degree, basis, span, relations, stable=True) -> GradedPiece:
    n = len(basis)
    relations = rational.row_space(relations, n)
    span = rational.span_sum(span, relations, n)
    return GradedPiece(tuple(degree), tuple(basis), span, relations, stable)


class ModuleExpr:
    """Base class of module expressions; subclasses are frozen dataclasses."""

    @property
    def ambient(self) -> FreeModuleSpec:
        raise NotImplementedError

    def children(self) -> Tuple['ModuleExpr', ...]:
        return ()

    def evaluate(self, degree: Exponents) -> GradedPiece:
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__

    def degree_bound(self) -> Exponents:
        """Componentwise maximum of every degree occurring in the expression."""
        bounds = [s for s in self.ambient.shifts]
        bounds += [c.degree_bound() for c in self.children()]
        bounds += self._own_degrees()
        if not bounds:
            return (0,) * self.ambient.nvars
        return tuple(max(b[k] for b in bounds) for k in range(self.ambient.nvars))

    def _own_degrees(self) -> List[Exponents]:
        return []


def _same_ambient(*exprs: ModuleExpr):
    first = exprs[0].ambient
    for e in exprs[1:]:
        if e.ambient != first:
            raise AmbientMismatchError(
                f"{exprs[0].describe()} lives in {first.describe()} but "
                f"{e.describe()} lives in {e.ambient.describe()}")


def _matrix_degrees(matrix: MonomialMatrix) -> List[Exponents]:
    return list(matrix.source.shifts) + list(matrix.target.shifts)


@dataclass(frozen=True)
class Free(ModuleExpr):
    spec: FreeModuleSpec

    @property
    def ambient(self) -> FreeModuleSpec:
        return self.spec

    def evaluate(self, degree):
        basis = self.spec.basis_at(degree)
        return _piece_from(degree, basis, rational.identity(len(basis)), ())

    def describe(self):
        return self.spec.describe()


@dataclass(frozen=True)
class Image(ModuleExpr):
    matrix: MonomialMatrix

    @property
    def ambient(self):
        return self.matrix.target

    def evaluate(self, degree):
        _, basis, rows = self.matrix.at_degree(degree)
        return _piece_from(degree, basis, rows, ())

    def _own_degrees(self):
        return _matrix_degrees(self.matrix)

    def describe(self):
        return f"im {self.matrix.describe()}"


@dataclass(frozen=True)
class Cokernel(ModuleExpr):
    matrix: MonomialMatrix

    @property
    def ambient(self):
        return self.matrix.target

    def evaluate(self, degree):
        _, basis, rows = self.matrix.at_degree(degree)
        return _piece_from(degree, basis, rational.identity(len(basis)), rows)

    def _own_degrees(self):
        return _matrix_degrees(self.matrix)

    def describe(self):
        return f"coker {self.matrix.describe()}"


@dataclass(frozen=True)
class Kernel(ModuleExpr):
    """``{v : M v in modulo}``; with no ``modulo`` this is the plain kernel."""
    matrix: MonomialMatrix
    modulo: Optional[ModuleExpr] = None

    def __post_init__(self):
        if self.modulo is not None and self.modulo.ambient != self.matrix.target:
            raise AmbientMismatchError("the modulo submodule must live in the target of the map")

    @property
    def ambient(self):
        return self.matrix.source

    def children(self):
        return (self.modulo,) if self.modulo is not None else ()

    def evaluate(self, degree):
        source, target, rows = self.matrix.at_degree(degree)
        stable = True
        allowed = ()
        if self.modulo is not None:
            allowed_piece = piece(self.modulo, degree)
            allowed, stable = allowed_piece.span, allowed_piece.stable
        span = rational.preimage(rows, allowed, len(source), len(target))
        return _piece_from(degree, source, span, (), stable)

    def _own_degrees(self):
        return _matrix_degrees(self.matrix)

    def describe(self):
        suffix = f" mod {self.modulo.describe()}" if self.modulo is not None else ""
        return f"ker {self.matrix.describe()}{suffix}"


@dataclass(frozen=True)
class ZeroIn(ModuleExpr):
    """The zero submodule of a subquotient: its relations over themselves."""
    expr: ModuleExpr

    @property
    def ambient(self):
        return self.expr.ambient

    def children(self):
        return (self.expr,)

    def evaluate(self, degree):
        p = piece(self.expr, degree)
        return _piece_from(degree, p.basis, p.relations, p.relations, p.stable)

    def describe(self):
        return f"0 in ({self.expr.describe()})"


@dataclass(frozen=True)
class Intersection(ModuleExpr):
    members: Tuple[ModuleExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, 'members', tuple(self.members))
        if not self.members:
            raise AmbientMismatchError("an intersection needs at least one module")
        _same_ambient(*self.members)

    @property
    def ambient(self):
        return self.members[0].ambient

    def children(self):
        return self.members

    def evaluate(self, degree):
        pieces = [piece(m, degree) for m in self.members]
        n = pieces[0].ambient_dim
        relations = rational.row_space([v for p in pieces for v in p.relations], n)
        span = rational.span_sum(pieces[0].span, relations, n)
        for p in pieces[1:]:
            span = rational.intersect(span, rational.span_sum(p.span, relations, n), n)
        return _piece_from(degree, pieces[0].basis, span, relations, all(p.stable for p in pieces))

    def describe(self):
        return " & ".join(f"({m.describe()})" for m in self.members)


@dataclass(frozen=True)
class Sum(ModuleExpr):
    members: Tuple[ModuleExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, 'members', tuple(self.members))
        if not self.members:
            raise AmbientMismatchError("a sum needs at least one module")
        _same_ambient(*self.members)

    @property
    def ambient(self):
        return self.members[0].ambient

    def children(self):
        return self.members

    def evaluate(self, degree):
        pieces = [piece(m, degree) for m in self.members]
        return _piece_from(degree, pieces[0].basis,
                           [v for p in pieces for v in p.span],
                           [v for p in pieces for v in p.relations],
                           all(p.stable for p in pieces))

    def describe(self):
        return " + ".join(f"({m.describe()})" for m in self.members)


@dataclass(frozen=True)
class QuotientBy(ModuleExpr):
    base: ModuleExpr
    sub: ModuleExpr

    def __post_init__(self):
        _same_ambient(self.base, self.sub)

    @property
    def ambient(self):
        return self.base.ambient

    def children(self):
        return (self.base, self.sub)

    def evaluate(self, degree):
        b, s = piece(self.base, degree), piece(self.sub, degree)
        n = b.ambient_dim
        relations = rational.intersect(rational.span_sum(b.relations, s.span, n), b.span, n)
        return _piece_from(degree, b.basis, b.span, relations, b.stable and s.stable)

    def describe(self):
        return f"({self.base.describe()}) / ({self.sub.describe()})"


def multiplication_rows(ambient: FreeModuleSpec, degree: Sequence[int], exponents: Sequence[int]):
    """Matrix of multiplication by ``x^exponents`` from the ambient piece at ``degree``."""
    source = ambient.basis_at(degree)
    target = ambient.basis_at(_add(degree, exponents))
    position = {label[0]: p for p, label in enumerate(target)}
    rows = []
    for i, _ in source:
        row = [Fraction(0)] * len(target)
        row[position[i]] = Fraction(1)
        rows.append(tuple(row))
    return rows


@dataclass(frozen=True)
class Colon(ModuleExpr):
    """``(expr : x^exponents)`` inside the ambient free module."""
    expr: ModuleExpr
    exponents: Exponents

    @property
    def ambient(self):
        return self.expr.ambient

    def children(self):
        return (self.expr,)

    def evaluate(self, degree):
        base = piece(self.expr, degree)
        target = piece(self.expr, _add(degree, self.exponents))
        rows = multiplication_rows(self.ambient, degree, self.exponents)
        span = rational.preimage(rows, target.span, base.ambient_dim, target.ambient_dim)
        return _piece_from(degree, base.basis, span, base.relations, base.stable and target.stable)

    def _own_degrees(self):
        return [_add(s, self.exponents) for s in self.ambient.shifts]

    def describe(self):
        return f"({self.expr.describe()}) : {format_monomial(self.exponents)}"


@dataclass(frozen=True)
class Saturation(ModuleExpr):
    """``(expr : ideal^infinity)``, cut down to ``within`` when given.

    The colon by each generator ``g`` is iterated over ``g, g^2, ...``; once
    ``degree + k g`` has passed the largest degree in the expression, two
    equal consecutive steps end the search. Pieces that never settle within
    ``max_power`` further steps are flagged unstable.
    """
    expr: ModuleExpr
    ideal: MonomialIdeal
    within: Optional[ModuleExpr] = None
    max_power: int = 12

    def __post_init__(self):
        if self.within is not None:
            _same_ambient(self.expr, self.within)
        if self.ideal.nvars != self.expr.ambient.nvars:
            raise DimensionMismatchError("saturating ideal lives in a different polynomial ring")

    @property
    def ambient(self):
        return self.expr.ambient

    def children(self):
        return (self.expr, self.within) if self.within is not None else (self.expr,)

    def _by_monomial(self, degree, base: GradedPiece, g: Exponents):
        if not any(g):
            return base.span, True
        n = base.ambient_dim
        bound = self.expr.degree_bound()
        k0 = 1
        for b, a, c in zip(bound, degree, g):
            if c > 0 and a < b + 1:
                k0 = max(k0, -(-(b + 1 - a) // c))
        previous = base.span
        for k in range(1, k0 + self.max_power + 1):
            shift = _scale(k, g)
            target = piece(self.expr, _add(degree, shift))
            rows = multiplication_rows(self.ambient, degree, shift)
            current = rational.preimage(rows, target.span, n, target.ambient_dim)
            if k > k0 and current == previous:
                return current, True
            previous = current
        return previous, False

    def evaluate(self, degree):
        base = piece(self.expr, degree)
        n = base.ambient_dim
        stable = base.stable
        if self.ideal.is_zero():
            span = rational.identity(n)
        else:
            span = rational.identity(n)
            for g in self.ideal.generators:
                part, settled = self._by_monomial(degree, base, g)
                stable = stable and settled
                span = rational.intersect(span, part, n)
        if self.within is not None:
            bound = piece(self.within, degree)
            span = rational.intersect(span, bound.span, n)
            stable = stable and bound.stable
        return _piece_from(degree, base.basis, span, base.relations, stable)

    def _own_degrees(self):
        return [_add(s, g) for s in self.ambient.shifts for g in self.ideal.generators]

    def describe(self):
        return f"({self.expr.describe()}) : {self.ideal}^inf"


@dataclass(frozen=True)
class Shift(ModuleExpr):
    """``M(d)``, whose piece at ``a`` is the piece of ``M`` at ``a + d``."""
    expr: ModuleExpr
    degree: Exponents

    @property
    def ambient(self):
        return self.expr.ambient.shifted(self.degree)

    def children(self):
        return (self.expr,)

    def evaluate(self, degree):
        p = piece(self.expr, _add(degree, self.degree))
        return GradedPiece(tuple(degree), p.basis, p.span, p.relations, p.stable)

    def degree_bound(self):
        return _sub(self.expr.degree_bound(), self.degree)

    def describe(self):
        return f"({self.expr.describe()})({list(self.degree)})"


@lru_cache(maxsize=200_000)
def _cached_piece(expr: ModuleExpr, degree: Exponents) -> GradedPiece:
    return expr.evaluate(degree)


def piece(expr: ModuleExpr, degree: Sequence[int]) -> GradedPiece:
    degree = tuple(int(x) for x in degree)
    if len(degree) != expr.ambient.nvars:
        raise DimensionMismatchError(f"degree {degree} is not in Z^{expr.ambient.nvars}")
    return _cached_piece(expr, degree)


def clear_piece_cache():
    _cached_piece.cache_clear()


@dataclass(frozen=True)
class PieceMap:
    """A degree-preserving map between two pieces, as a matrix on ambient bases."""
    source: GradedPiece
    target: GradedPiece
    rows: Tuple[rational.Vector, ...]

    def images(self) -> List[rational.Vector]:
        return rational.apply(self.source.span, self.rows, self.target.ambient_dim)

    def rank(self) -> int:
        n = self.target.ambient_dim
        image = rational.span_sum(self.images(), self.target.relations, n)
        return len(image) - len(self.target.relations)

    def is_injective(self) -> bool:
        return self.rank() == self.source.dim

    def is_surjective(self) -> bool:
        return self.rank() == self.target.dim

    def is_bijective(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def is_zero(self) -> bool:
        return self.rank() == 0

    def kernel(self) -> rational.Rows:
        """Kernel as a subspace of the source ambient containing the source relations."""
        pre = rational.preimage(self.rows, self.target.relations,
                                self.source.ambient_dim, self.target.ambient_dim)
        return rational.intersect(pre, self.source.span, self.source.ambient_dim)

    def then(self, after: 'PieceMap') -> 'PieceMap':
        """``after o self``."""
        rows = tuple(rational.apply(self.rows, after.rows, after.target.ambient_dim))
        return PieceMap(self.source, after.target, rows)

    def equals(self, other: 'PieceMap') -> bool:
        n = self.target.ambient_dim
        if not (self.source.same_subquotient(other.source) and self.target.same_subquotient(other.target)):
            return False
        for v, w in zip(self.images(), other.images()):
            difference = tuple(a - b for a, b in zip(v, w))
            if not rational.contains(self.target.relations, [difference], n):
                return False
        return True


def mult_map(expr: ModuleExpr, degree: Sequence[int], exponents: Sequence[int]) -> PieceMap:
    """Multiplication by ``x^exponents`` from ``M_degree`` to ``M_(degree + exponents)``."""
    degree = tuple(degree)
    rows = multiplication_rows(expr.ambient, degree, exponents)
    return PieceMap(piece(expr, degree), piece(expr, _add(degree, exponents)), tuple(rows))


def variable_map(expr: ModuleExpr, degree: Sequence[int], variable: int, power: int = 1) -> PieceMap:
    exponents = tuple(power if k == variable else 0 for k in range(expr.ambient.nvars))
    return mult_map(expr, degree, exponents)


def same_module_at(left: ModuleExpr, right: ModuleExpr, degree: Sequence[int]) -> bool:
    _same_ambient(left, right)
    return piece(left, degree).same_subquotient(piece(right, degree))


@dataclass(frozen=True)
class ChartPiece:
    """Degree-``m`` part of the localization at ``x^chart``, read off the colimit."""
    piece: GradedPiece
    stabilized_at: Optional[int]

    @property
    def conclusive(self) -> bool:
        return self.stabilized_at is not None and self.piece.stable

    @property
    def dim(self) -> int:
        return self.piece.dim


def localized_piece(expr: ModuleExpr, start: Sequence[int], chart: Sequence[int], k_max: int) -> ChartPiece:
    """Colimit of ``M_(start) -> M_(start + chart) -> ...`` under multiplication by ``x^chart``.

    Steps begin once every inverted coordinate has passed the largest degree
    occurring in the expression, and the colimit is declared reached when two
    consecutive transitions are bijective.
    """
    if k_max < 0:
        raise DimensionMismatchError(f"k_max must be non-negative, got {k_max}")
    start = tuple(start)
    chart = tuple(chart)
    if not any(chart):
        p = piece(expr, start)
        return ChartPiece(p, 0)
    bound = expr.degree_bound()
    k0 = 0
    for b, s, c in zip(bound, start, chart):
        if c > 0 and s < b + 1:
            k0 = max(k0, -(-(b + 1 - s) // c))
    for k in range(k0, k0 + k_max + 1):
        degree = _add(start, _scale(k, chart))
        if mult_map(expr, degree, chart).is_bijective() and \
                mult_map(expr, _add(degree, chart), chart).is_bijective():
            return ChartPiece(piece(expr, degree), k)
    return ChartPiece(piece(expr, _add(start, _scale(k0 + k_max, chart))), None)


def chart_piece(expr: ModuleExpr, setup: GradingSetup, cone, m: Sequence[int], k_max: int = 20) -> ChartPiece:
    """Degree-``m`` piece of the module on the chart of ``cone``: ``(M_{x^sigma})_(div m)``."""
    fan = setup.require_fan()
    cone = fan.resolve_cone(cone)
    start = fan.ray_matrix().apply(m)
    return localized_piece(expr, start, x_sigma(fan, cone), k_max)


def compositions(nvars: int, total: int) -> Iterable[Exponents]:
    """Non-negative vectors of length ``nvars`` summing to ``total``."""
    if nvars == 0:
        if total == 0:
            yield ()
        return
    for bars in itertools.combinations(range(total + nvars - 1), nvars - 1):
        previous = -1
        parts = []
        for b in bars + (total + nvars - 1,):
            parts.append(b - previous - 1)
            previous = b
        yield tuple(parts)


def degree_box(ambient: FreeModuleSpec, bound: int) -> List[Exponents]:
    """Fine degrees ``lo + t`` with ``t >= 0`` and ``|t| <= bound``, ``lo`` the lowest shift."""
    lo = ambient.lowest_degree()
    return [_add(lo, t) for total in range(bound + 1) for t in compositions(ambient.nvars, total)]


def sweep(fn: Callable, items: Sequence, jobs: int = 1) -> List:
    """Apply ``fn`` to every item, in order, optionally on a thread pool."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    return Parallel(n_jobs=jobs, prefer="threads")(delayed(fn)(item) for item in items)


def dims_frame(expr: ModuleExpr, degrees: Iterable[Exponents], setup: Optional[GradingSetup] = None,
               jobs: int = 1) -> pd.DataFrame:
    degrees = list(degrees)
    dims = sweep(lambda a: piece(expr, a).dim, degrees, jobs)
    frame = pd.DataFrame({'degree': degrees, 'dim': dims})
    if setup is not None:
        frame['class'] = [setup.class_degree(a) for a in degrees]
    return frame


def class_graded_dims(expr: ModuleExpr, setup: GradingSetup, bound: int, jobs: int = 1) -> Dict[Tuple[int, ...], int]:
    """Total dimension per class degree over the fine degrees of ``degree_box``."""
    frame = dims_frame(expr, degree_box(expr.ambient, bound), setup, jobs)
    keys = {str(c): c for c in frame['class']}
    totals = frame.groupby(frame['class'].map(str))['dim'].sum()
    return {keys[k]: int(v) for k, v in totals.items()}


def hilbert_function(expr: ModuleExpr, setup: GradingSetup, degree_class: Sequence[int],
                     bound: int, jobs: int = 1) -> int:
    """Sum of fine dimensions in one class, searching ``degree_box(bound)``."""
    target = setup.class_group.reduce(degree_class)
    degrees = [a for a in degree_box(expr.ambient, bound) if setup.class_degree(a) == target]
    return int(sum(sweep(lambda a: piece(expr, a).dim, degrees, jobs)))


@lru_cache(maxsize=16)
def polynomial_ring(nvars: int):
    names = ",".join(f"x{i}" for i in range(nvars))
    return ring(names, QQ)[0]


def _as_poly(R, entry: Optional[Monomial]):
    if entry is None:
        return R.zero
    return R.from_dict({entry.exponents: QQ(entry.coefficient.numerator, entry.coefficient.denominator)})


def minors(grid: Sequence[Sequence[Optional[Monomial]]], size: int, nvars: int):
    """All ``size x size`` minors as sympy polynomials, by full expansion."""
    R = polynomial_ring(nvars)
    domain = R.to_domain()
    rows = [[_as_poly(R, e) for e in row] for row in grid]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    for row_set in itertools.combinations(range(nrows), size):
        for col_set in itertools.combinations(range(ncols), size):
            block = [[rows[i][j] for j in col_set] for i in row_set]
            yield DomainMatrix(block, (size, size), domain).det()


@dataclass(frozen=True)
class FittingIdeal:
    order: int
    ideal: Optional[MonomialIdeal]
    polynomial_minors: int

    @property
    def is_monomial(self) -> bool:
        return self.ideal is not None


def fitting_ideal(matrix: MonomialMatrix, k: int = 0, minor_bound: int = 6) -> FittingIdeal:
    """``Fitt_k`` of ``coker(matrix)``: the ideal of ``(rows - k)``-minors."""
    nrows, ncols = matrix.shape
    nvars = matrix.target.nvars
    if max(nrows, ncols) > minor_bound:
        raise MinorBoundError(f"{nrows}x{ncols} matrix exceeds the minor bound {minor_bound}")
    size = nrows - k
    if size <= 0:
        return FittingIdeal(k, MonomialIdeal.unit(nvars), 0)
    if size > min(nrows, ncols):
        return FittingIdeal(k, MonomialIdeal.zero(nvars), 0)
    monomials = []
    non_monomial = 0
    for minor in minors(matrix.entries, size, nvars):
        if len(minor) > 1:
            non_monomial += 1
        elif len(minor) == 1:
            monomials.append(tuple(minor.terms()[0][0]))
    if non_monomial:
        return FittingIdeal(k, None, non_monomial)
    return FittingIdeal(k, MonomialIdeal(nvars, tuple(monomials)), 0)
