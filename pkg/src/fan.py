import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from src import rational
from src.errors import DimensionMismatchError, InvalidFanError, UnknownConeError
from src.lattice import IntMatrix, determinant, invariant_factors, kernel_basis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ray:
    vector: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'vector', tuple(int(x) for x in self.vector))
        if not any(self.vector):
            raise InvalidFanError("rays must be non-zero")
        divisor = 0
        for x in self.vector:
            divisor = gcd(divisor, x)
        if divisor != 1:
            raise InvalidFanError(f"ray {self.vector} is not primitive")

    def __len__(self):
        return len(self.vector)


@dataclass(frozen=True, order=True)
class Cone:
    ray_indices: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'ray_indices', tuple(sorted(set(int(i) for i in self.ray_indices))))

    def __contains__(self, index: int) -> bool:
        return index in self.ray_indices

    def __len__(self):
        return len(self.ray_indices)

    def label(self) -> str:
        return "{" + ",".join(str(i) for i in self.ray_indices) + "}"


@dataclass(frozen=True)
class Facet:
    normal: Tuple[int, ...]
    rays: FrozenSet[int]


def _pairing(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def _rank(vectors: Sequence[Sequence[int]], n: int) -> int:
    return rational.rank(list(vectors), n)


def cone_facets(vectors: Dict[int, Tuple[int, ...]], n: int) -> List[Facet]:
    """Facets of the cone generated by ``vectors`` inside its own linear span.

    A facet is proposed by every independent subset of ``dim - 1`` generators
    and kept when all generators lie weakly on one side of it.
    """
    indices = sorted(vectors)
    d = _rank([vectors[i] for i in indices], n)
    facets = {}
    if d == 0:
        return []
    for subset in itertools.combinations(indices, d - 1):
        if _rank([vectors[i] for i in subset], n) != d - 1:
            continue
        if subset:
            normals = kernel_basis(IntMatrix.from_rows([vectors[i] for i in subset], cols=n)).columns()
        else:
            normals = IntMatrix.identity(n).columns()
        for u in normals:
            values = [_pairing(u, vectors[i]) for i in indices]
            if any(values):
                break
        else:
            continue
        if all(x >= 0 for x in values):
            normal = tuple(u)
        elif all(x <= 0 for x in values):
            normal = tuple(-x for x in u)
        else:
            continue
        zero_set = frozenset(i for i, x in zip(indices, values) if x == 0)
        facets.setdefault(zero_set, Facet(normal, zero_set))
    return list(facets.values())


@dataclass(frozen=True)
class Fan:
    ambient_dim: int
    rays: Tuple[Ray, ...]
    cones: Tuple[Cone, ...]
    name: str = field(default="fan", compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'rays', tuple(r if isinstance(r, Ray) else Ray(r) for r in self.rays))
        object.__setattr__(self, 'cones', tuple(c if isinstance(c, Cone) else Cone(c) for c in self.cones))
        self._validate()

    def _validate(self):
        n = self.ambient_dim
        if n < 1:
            raise InvalidFanError("lattice rank must be positive")
        for ray in self.rays:
            if len(ray) != n:
                raise InvalidFanError(f"ray {ray.vector} does not live in Z^{n}")
        if len(set(self.rays)) != len(self.rays):
            raise InvalidFanError("duplicate rays")
        for cone in self.cones:
            for i in cone.ray_indices:
                if not 0 <= i < len(self.rays):
                    raise InvalidFanError(f"cone {cone.label()} references unknown ray {i}")
        used = {i for cone in self.cones for i in cone.ray_indices}
        if used != set(range(len(self.rays))):
            raise InvalidFanError(f"rays {sorted(set(range(len(self.rays))) - used)} lie in no cone")
        if _rank([r.vector for r in self.rays], n) != n:
            raise InvalidFanError("rays span a proper subspace; the fan must be full-dimensional")

        for cone in self.cones:
            self._check_cone(cone)
        for first, second in itertools.combinations(self.cones, 2):
            self._check_pair(first, second)

    def _vectors(self, cone: Cone) -> Dict[int, Tuple[int, ...]]:
        return {i: self.rays[i].vector for i in cone.ray_indices}

    def _check_cone(self, cone: Cone):
        vectors = self._vectors(cone)
        d = _rank(list(vectors.values()), self.ambient_dim)
        if d == 0:
            return
        facets = cone_facets(vectors, self.ambient_dim)
        common = frozenset(cone.ray_indices)
        for facet in facets:
            common &= facet.rays
        if not facets or common:
            raise InvalidFanError(f"cone {cone.label()} is not strongly convex")
        for i in cone.ray_indices:
            face = frozenset(cone.ray_indices)
            for facet in facets:
                if i in facet.rays:
                    face &= facet.rays
            if face != {i}:
                raise InvalidFanError(f"ray {i} is not an extremal ray of cone {cone.label()}")

    def _contains_vector(self, cone: Cone, v: Sequence[int]) -> bool:
        vectors = self._vectors(cone)
        n = self.ambient_dim
        if not vectors:
            return not any(v)
        if _rank(list(vectors.values()) + [v], n) != _rank(list(vectors.values()), n):
            return False
        return all(_pairing(f.normal, v) >= 0 for f in cone_facets(vectors, n))

    def _check_pair(self, first: Cone, second: Cone):
        common = Cone(tuple(set(first.ray_indices) & set(second.ray_indices)))
        for cone, other in ((first, second), (second, first)):
            if common not in self._cone_faces(cone):
                raise InvalidFanError(
                    f"cones {first.label()} and {second.label()} do not meet along a common face")
            interior = [sum(self.rays[i].vector[k] for i in other.ray_indices)
                        for k in range(self.ambient_dim)]
            if self._contains_vector(cone, interior) and not set(other.ray_indices) <= set(cone.ray_indices):
                raise InvalidFanError(f"cones {first.label()} and {second.label()} overlap")

    def _cone_faces(self, cone: Cone) -> FrozenSet[Cone]:
        facets = [f.rays for f in cone_facets(self._vectors(cone), self.ambient_dim)]
        faces = {frozenset(cone.ray_indices), frozenset()}
        frontier = set(facets)
        while frontier:
            faces |= frontier
            frontier = {a & b for a in faces for b in facets} - faces
        return frozenset(Cone(tuple(f)) for f in faces)

    @property
    def num_rays(self) -> int:
        return len(self.rays)

    @cached_property
    def maximal_cones(self) -> Tuple[Cone, ...]:
        cones = [c for c in self.cones
                 if not any(set(c.ray_indices) < set(d.ray_indices) for d in self.cones)]
        return tuple(sorted(set(cones)))

    @cached_property
    def all_cones(self) -> Tuple[Cone, ...]:
        faces = set()
        for cone in self.cones:
            faces |= self._cone_faces(cone)
        return tuple(sorted(faces, key=lambda c: (len(c), c.ray_indices)))

    def ray_matrix(self) -> IntMatrix:
        """The ``r x n`` matrix whose rows are the ray generators (``div``)."""
        return IntMatrix.from_rows([r.vector for r in self.rays], cols=self.ambient_dim)

    def resolve_cone(self, cone: Union[int, Cone, Iterable[int]]) -> Cone:
        if isinstance(cone, int):
            if not 0 <= cone < len(self.maximal_cones):
                raise UnknownConeError(f"no maximal cone with index {cone}")
            return self.maximal_cones[cone]
        if not isinstance(cone, Cone):
            cone = Cone(tuple(cone))
        if cone not in self.all_cones:
            raise UnknownConeError(f"{cone.label()} is not a cone of this fan")
        return cone

    def describe(self) -> str:
        rays = ", ".join(str(r.vector) for r in self.rays)
        cones = ", ".join(c.label() for c in self.maximal_cones)
        return f"{self.name}: rays [{rays}], maximal cones [{cones}]"


def faces(fan: Fan, cone=None) -> Tuple[Cone, ...]:
    if cone is None:
        return fan.all_cones
    cone = fan.resolve_cone(cone)
    return tuple(sorted(fan._cone_faces(cone), key=lambda c: (len(c), c.ray_indices)))


def cone_dimension(fan: Fan, cone) -> int:
    cone = fan.resolve_cone(cone)
    return _rank([fan.rays[i].vector for i in cone.ray_indices], fan.ambient_dim)


def orbit_dimension(fan: Fan, cone) -> int:
    return fan.ambient_dim - cone_dimension(fan, cone)


def is_simplicial(fan: Fan, cone) -> bool:
    cone = fan.resolve_cone(cone)
    return cone_dimension(fan, cone) == len(cone)


def is_smooth(fan: Fan, cone) -> bool:
    cone = fan.resolve_cone(cone)
    if not is_simplicial(fan, cone):
        return False
    if len(cone) == 0:
        return True
    generators = IntMatrix.from_rows([fan.rays[i].vector for i in cone.ray_indices], cols=fan.ambient_dim)
    return all(f == 1 for f in invariant_factors(generators))


def is_simplicial_fan(fan: Fan) -> bool:
    return all(is_simplicial(fan, c) for c in fan.maximal_cones)


def is_smooth_fan(fan: Fan) -> bool:
    return all(is_smooth(fan, c) for c in fan.maximal_cones)


def dual_membership(fan: Fan, cone, m: Sequence[int]) -> bool:
    """``m`` lies in the dual cone: pairs non-negatively with every ray of ``cone``."""
    cone = fan.resolve_cone(cone)
    if len(m) != fan.ambient_dim:
        raise DimensionMismatchError(f"character {tuple(m)} is not in Z^{fan.ambient_dim}")
    return all(_pairing(m, fan.rays[i].vector) >= 0 for i in cone.ray_indices)


def relevant_prime(fan: Fan, prime: Iterable[int]) -> bool:
    """Some cone of the fan contains every ray in ``prime``."""
    prime = set(prime)
    return any(prime <= set(c.ray_indices) for c in fan.maximal_cones)


def nonsimplicial_locus(fan: Fan) -> Tuple[Cone, ...]:
    return tuple(c for c in fan.all_cones if not is_simplicial(fan, c))


def is_complete_in_box(fan: Fan, bound: int = 3) -> bool:
    """Every lattice point with entries in ``[-bound, bound]`` lies in some cone."""
    for point in itertools.product(range(-bound, bound + 1), repeat=fan.ambient_dim):
        if not any(fan._contains_vector(c, point) for c in fan.maximal_cones):
            return False
    return True


def cone_volume(fan: Fan, cone) -> Optional[int]:
    """Lattice index of the sublattice spanned by a full-dimensional simplicial cone."""
    cone = fan.resolve_cone(cone)
    if len(cone) != fan.ambient_dim or not is_simplicial(fan, cone):
        return None
    rows = [fan.rays[i].vector for i in cone.ray_indices]
    return abs(determinant(IntMatrix.from_rows(rows, cols=fan.ambient_dim)))


def projective_plane() -> Fan:
    return Fan(2, ((1, 0), (0, 1), (-1, -1)), ((0, 1), (1, 2), (0, 2)), name="P2")


def projective_line() -> Fan:
    return Fan(1, ((1,), (-1,)), ((0,), (1,)), name="P1")


def p1_times_p1() -> Fan:
    return Fan(2, ((1, 0), (-1, 0), (0, 1), (0, -1)), ((0, 2), (0, 3), (1, 2), (1, 3)), name="P1xP1")


def quadric_cone() -> Fan:
    return Fan(2, ((1, 0), (1, 2)), ((0, 1),), name="quadric-cone")


def square_cone() -> Fan:
    """Affine cone over a square: a single non-simplicial three-dimensional cone."""
    return Fan(3, ((1, 0, 0), (0, 1, 0), (0, 1, 1), (1, 0, 1)), ((0, 1, 2, 3),), name="square-cone")


def affine_space(n: int) -> Fan:
    rays = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return Fan(n, rays, (tuple(range(n)),), name=f"A{n}")


BUILTIN_FANS = {
    'P2': projective_plane,
    'P1': projective_line,
    'P1xP1': p1_times_p1,
    'quadric-cone': quadric_cone,
    'square-cone': square_cone,
}
