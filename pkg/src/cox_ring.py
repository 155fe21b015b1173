"""The Cox ring of a toric variety: monomials, monomial ideals and gradings."""
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from src.errors import (ClassMapError, DimensionMismatchError, FanRequiredError,
                        UnitIdealError)
from src.fan import Cone, Fan
from src.lattice import (AbelianGroupPresentation, IntMatrix, cokernel_presentation,
                         generates)

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]


def grlex_key(exponents: Exponents):
    """Sort key putting monomials in descending graded lexicographic order."""
    return (-sum(exponents), tuple(-e for e in exponents))


def divides(small: Exponents, big: Exponents) -> bool:
    return all(a <= b for a, b in zip(small, big))


def monomial_lcm(a: Exponents, b: Exponents) -> Exponents:
    return tuple(max(x, y) for x, y in zip(a, b))


def format_monomial(exponents: Exponents, variable: str = "x") -> str:
    factors = []
    for i, e in enumerate(exponents):
        if e == 1:
            factors.append(f"{variable}{i}")
        elif e:
            factors.append(f"{variable}{i}^{e}")
    return "*".join(factors) if factors else "1"


@dataclass(frozen=True)
class Monomial:
    exponents: Exponents
    coefficient: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, 'exponents', tuple(int(e) for e in self.exponents))
        object.__setattr__(self, 'coefficient', Fraction(self.coefficient))
        if any(e < 0 for e in self.exponents):
            raise DimensionMismatchError(f"negative exponent in {self.exponents}")

    def __mul__(self, other: 'Monomial') -> 'Monomial':
        return Monomial(tuple(a + b for a, b in zip(self.exponents, other.exponents)),
                        self.coefficient * other.coefficient)

    def __str__(self):
        body = format_monomial(self.exponents)
        if self.coefficient == 1:
            return body
        if body == "1":
            return str(self.coefficient)
        if self.coefficient == -1:
            return f"-{body}"
        return f"{self.coefficient}*{body}"


@dataclass(frozen=True)
class LaurentMonomial:
    exponents: Tuple[int, ...]

    def __str__(self):
        return format_monomial(tuple(max(e, 0) for e in self.exponents)) + (
            "/" + format_monomial(tuple(max(-e, 0) for e in self.exponents))
            if any(e < 0 for e in self.exponents) else "")


def minimalize(generators: Iterable[Exponents]) -> Tuple[Exponents, ...]:
    unique = sorted(set(tuple(g) for g in generators), key=lambda g: (sum(g), g))
    kept: List[Exponents] = []
    for g in unique:
        if not any(divides(k, g) for k in kept):
            kept.append(g)
    return tuple(sorted(kept, key=grlex_key))


@dataclass(frozen=True)
class MonomialIdeal:
    """A monomial ideal of ``k[x_0, ..., x_{r-1}]`` by its minimal generators.

    The zero ideal has no generators; the unit ideal is generated by ``1``.
    """
    nvars: int
    generators: Tuple[Exponents, ...] = ()

    def __post_init__(self):
        gens = [tuple(int(e) for e in g) for g in self.generators]
        for g in gens:
            if len(g) != self.nvars:
                raise DimensionMismatchError(f"generator {g} is not in {self.nvars} variables")
            if any(e < 0 for e in g):
                raise DimensionMismatchError(f"negative exponent in generator {g}")
        object.__setattr__(self, 'generators', minimalize(gens))

    @classmethod
    def unit(cls, nvars: int) -> 'MonomialIdeal':
        return cls(nvars, ((0,) * nvars,))

    @classmethod
    def zero(cls, nvars: int) -> 'MonomialIdeal':
        return cls(nvars, ())

    @classmethod
    def prime(cls, nvars: int, variables: Iterable[int]) -> 'MonomialIdeal':
        return cls(nvars, tuple(tuple(int(i == v) for i in range(nvars)) for v in variables))

    def is_unit(self) -> bool:
        return (0,) * self.nvars in self.generators

    def is_zero(self) -> bool:
        return not self.generators

    def contains(self, exponents: Exponents) -> bool:
        return any(divides(g, exponents) for g in self.generators)

    def is_subset(self, other: 'MonomialIdeal') -> bool:
        return all(other.contains(g) for g in self.generators)

    def __add__(self, other: 'MonomialIdeal') -> 'MonomialIdeal':
        return MonomialIdeal(self.nvars, self.generators + other.generators)

    def __mul__(self, other: 'MonomialIdeal') -> 'MonomialIdeal':
        return MonomialIdeal(self.nvars, tuple(
            tuple(a + b for a, b in zip(g, h)) for g in self.generators for h in other.generators))

    def intersection(self, other: 'MonomialIdeal') -> 'MonomialIdeal':
        return MonomialIdeal(self.nvars, tuple(
            monomial_lcm(g, h) for g in self.generators for h in other.generators))

    def power(self, k: int) -> 'MonomialIdeal':
        result = MonomialIdeal.unit(self.nvars)
        for _ in range(k):
            result = result * self
        return result

    def support(self) -> FrozenSet[int]:
        return frozenset(i for g in self.generators for i, e in enumerate(g) if e)

    def is_variable_prime(self) -> bool:
        return all(sum(g) == 1 for g in self.generators)

    def max_exponents(self) -> Exponents:
        if not self.generators:
            return (0,) * self.nvars
        return tuple(max(g[i] for g in self.generators) for i in range(self.nvars))

    def __str__(self):
        return "<" + ", ".join(format_monomial(g) for g in self.generators) + ">"


def colon(ideal: MonomialIdeal, exponents: Exponents) -> MonomialIdeal:
    return MonomialIdeal(ideal.nvars, tuple(
        tuple(max(a - b, 0) for a, b in zip(g, exponents)) for g in ideal.generators))


def colon_ideal(ideal: MonomialIdeal, other: MonomialIdeal) -> MonomialIdeal:
    """``I : J`` as the intersection of the colons by the generators of ``J``."""
    if other.is_zero():
        return MonomialIdeal.unit(ideal.nvars)
    result = None
    for g in other.generators:
        part = colon(ideal, g)
        result = part if result is None else result.intersection(part)
    return result


def saturate(ideal: MonomialIdeal, other: MonomialIdeal) -> MonomialIdeal:
    """``I : J^infinity``, iterating the colon until it stabilizes."""
    current = ideal
    while True:
        following = colon_ideal(current, other)
        if following == current:
            return current
        current = following


def radical(ideal: MonomialIdeal) -> MonomialIdeal:
    return MonomialIdeal(ideal.nvars, tuple(
        tuple(min(e, 1) for e in g) for g in ideal.generators))


def irreducible_decomposition(ideal: MonomialIdeal) -> List[MonomialIdeal]:
    """Irredundant decomposition into ideals generated by pure powers."""
    if ideal.is_unit():
        raise UnitIdealError("the unit ideal has no irreducible decomposition")

    def split(current: MonomialIdeal) -> List[MonomialIdeal]:
        for g in current.generators:
            support = [i for i, e in enumerate(g) if e]
            if len(support) > 1:
                i = support[0]
                pure = tuple(g[i] if j == i else 0 for j in range(current.nvars))
                rest = tuple(0 if j == i else g[j] for j in range(current.nvars))
                return (split(MonomialIdeal(current.nvars, current.generators + (pure,))) +
                        split(MonomialIdeal(current.nvars, current.generators + (rest,))))
        return [current]

    components = sorted(set(split(ideal)), key=lambda q: (len(q.generators), [grlex_key(g) for g in q.generators]))
    irredundant = [q for q in components
                   if not any(p != q and p.is_subset(q) for p in components)]
    return irredundant


def monomials_up_to(nvars: int, bounds: Sequence[int]) -> List[Exponents]:
    """All monomials with ``exponent_i <= bounds_i``, in ascending degree."""
    box = itertools.product(*[range(b + 1) for b in bounds])
    return sorted(box, key=lambda e: (sum(e), tuple(-x for x in e)))


def associated_primes(ideal: MonomialIdeal) -> Dict[FrozenSet[int], Exponents]:
    """Associated primes mapped to a witness monomial ``w`` with ``I : w`` the prime.

    Truncating a witness at the largest exponents occurring in ``I`` keeps
    its colon unchanged, so the search box is exhaustive.
    """
    if ideal.is_unit():
        raise UnitIdealError("the unit ideal has no associated primes")
    witnesses: Dict[FrozenSet[int], Exponents] = {}
    for w in monomials_up_to(ideal.nvars, ideal.max_exponents()):
        if ideal.contains(w):
            continue
        quotient = colon(ideal, w)
        if quotient.is_variable_prime():
            prime = quotient.support()
            witnesses.setdefault(prime, w)
    return witnesses


def minimal_primes(ideal: MonomialIdeal) -> List[FrozenSet[int]]:
    components = irreducible_decomposition(radical(ideal))
    supports = {q.support() for q in components}
    return sorted((p for p in supports if not any(q < p for q in supports)), key=sorted)


def pure_powers(ideal: MonomialIdeal) -> Dict[int, int]:
    return {i: sum(g) for g in ideal.generators for i, e in enumerate(g) if e and e == sum(g)}


def x_sigma(fan: Fan, cone: Cone) -> Exponents:
    """Exponents of the product of the variables of rays outside ``cone``."""
    return tuple(0 if i in cone else 1 for i in range(fan.num_rays))


def irrelevant_ideal(fan: Fan) -> MonomialIdeal:
    return MonomialIdeal(fan.num_rays, tuple(x_sigma(fan, c) for c in fan.maximal_cones))


@dataclass(frozen=True)
class GradingSetup:
    """Cox ring grading data: class group, variable classes and irrelevant ideal."""
    num_vars: int
    class_group: AbelianGroupPresentation
    class_of_var: Tuple[Tuple[int, ...], ...]
    irrelevant: MonomialIdeal
    fan: Optional[Fan] = field(default=None)
    name: str = field(default="setup", compare=False)

    def class_degree(self, degree: Sequence[int]) -> Tuple[int, ...]:
        if len(degree) != self.num_vars:
            raise DimensionMismatchError(f"fine degree {tuple(degree)} is not in Z^{self.num_vars}")
        return self.class_group.class_of(degree)

    def charts(self) -> List[Tuple[str, Exponents]]:
        """Basic open sets as (label, monomial to invert)."""
        if self.fan is not None:
            return [(c.label(), x_sigma(self.fan, c)) for c in self.fan.maximal_cones]
        return [(format_monomial(g), g) for g in self.irrelevant.generators]

    def require_fan(self) -> Fan:
        if self.fan is None:
            raise FanRequiredError(f"{self.name} has no fan; this operation needs one")
        return self.fan


def setup_from_fan(fan: Fan) -> GradingSetup:
    presentation = cokernel_presentation(fan.ray_matrix())
    r = fan.num_rays
    classes = tuple(presentation.class_of(tuple(int(i == j) for j in range(r))) for i in range(r))
    setup = GradingSetup(r, presentation, classes, irrelevant_ideal(fan), fan, name=fan.name)
    logger.debug("class group of %s is %s", fan.name, presentation.describe())
    return setup


def setup_explicit(num_vars: int, class_matrix: IntMatrix, torsion: Sequence[int],
                   irrelevant: Iterable[Exponents], name: str = "explicit") -> GradingSetup:
    """Grading given by the classes of the variables as columns of ``class_matrix``.

    The last ``len(torsion)`` rows are residues modulo the torsion orders.
    """
    torsion = tuple(int(t) for t in torsion)
    if class_matrix.cols != num_vars:
        raise DimensionMismatchError(
            f"class matrix has {class_matrix.cols} columns for {num_vars} variables")
    if class_matrix.rows < len(torsion) or any(t < 2 for t in torsion):
        raise ClassMapError("torsion orders must be at least 2 and fit the class matrix")
    presentation = AbelianGroupPresentation(class_matrix.rows - len(torsion), torsion, class_matrix)
    basis = [tuple(int(i == j) for j in range(num_vars)) for i in range(num_vars)]
    if not generates(presentation, basis):
        raise ClassMapError("the variable classes do not generate the class group")
    classes = tuple(presentation.class_of(e) for e in basis)
    return GradingSetup(num_vars, presentation, classes,
                        MonomialIdeal(num_vars, tuple(irrelevant)), None, name=name)


def char_monomial(setup: GradingSetup, m: Sequence[int]) -> LaurentMonomial:
    """``chi^m`` as the Laurent monomial ``prod x_rho^<m, n(rho)>``."""
    fan = setup.require_fan()
    if len(m) != fan.ambient_dim:
        raise DimensionMismatchError(f"character {tuple(m)} is not in Z^{fan.ambient_dim}")
    return LaurentMonomial(fan.ray_matrix().apply(m))


def invertible_degrees(setup: GradingSetup, chart: Exponents) -> bool:
    """Whether the classes of the variables inverted on ``chart`` generate the class group."""
    variables = [tuple(int(i == j) for j in range(setup.num_vars)) for i, e in enumerate(chart) if e]
    return generates(setup.class_group, variables)


def acts_freely(setup: GradingSetup) -> bool:
    return all(invertible_degrees(setup, chart) for _, chart in setup.charts())


def is_relevant(setup: GradingSetup, prime: Iterable[int]) -> bool:
    """``B`` is not contained in the prime generated by the given variables."""
    prime = set(prime)
    return any(not (prime & {i for i, e in enumerate(g) if e}) for g in setup.irrelevant.generators)


def monomials_of_degree(setup: GradingSetup, degree_class: Sequence[int], bound: int) -> List[Exponents]:
    """Monomials of total degree at most ``bound`` in the given class."""
    target = setup.class_group.reduce(degree_class)
    result = []
    for total in range(bound + 1):
        for combo in itertools.combinations_with_replacement(range(setup.num_vars), total):
            e = [0] * setup.num_vars
            for i in combo:
                e[i] += 1
            if setup.class_degree(e) == target:
                result.append(tuple(e))
    return sorted(result, key=grlex_key)


def invariant_sections_dim(setup: GradingSetup, degree_class: Sequence[int], bound: int) -> int:
    """Dimension of ``S_alpha`` counted among monomials of total degree ``<= bound``."""
    return len(monomials_of_degree(setup, degree_class, bound))


def invariant_hom_dim(setup: GradingSetup, source: Sequence[int], target: Sequence[int], bound: int) -> int:
    """Dimension of graded maps ``S(-source) -> S(-target)``, i.e. of ``S_(source - target)``."""
    difference = tuple(a - b for a, b in zip(source, target))
    return invariant_sections_dim(setup, difference, bound)
