"""Checking graded primary decompositions degree by degree and descending them.

Every check runs over a finite box of fine degrees and answers with a
``Verdict``: verified within the box, failed at a witness degree, or
inconclusive when some colimit or saturation did not settle.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from src import rational
from src.cox_ring import GradingSetup, Monomial, MonomialIdeal, acts_freely, is_relevant, radical
from src.errors import AmbientMismatchError, MinorBoundError
from src.fan import cone_dimension
from src.log import OK
from src.modules import (Cokernel, Free, FreeModuleSpec, Image, Intersection, ModuleExpr, MonomialMatrix,
                         QuotientBy, Saturation, Sum, ZeroIn, degree_box, fitting_ideal,
                         localized_piece, minors, mult_map, piece, sweep, variable_map)

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]

VERIFIED = 'verified-in-box'
FAILED = 'failed'
INCONCLUSIVE = 'inconclusive'

EXIT_CODES = {VERIFIED: 0, FAILED: 1, INCONCLUSIVE: 2}


@dataclass(frozen=True)
class Verdict:
    status: str
    degree: Optional[Exponents] = None
    witness: Optional[str] = None

    @classmethod
    def verified(cls, witness: Optional[str] = None) -> 'Verdict':
        return cls(VERIFIED, None, witness)

    @classmethod
    def failed(cls, degree: Optional[Sequence[int]], witness: str) -> 'Verdict':
        return cls(FAILED, tuple(degree) if degree is not None else None, witness)

    @classmethod
    def inconclusive(cls, degree: Optional[Sequence[int]], witness: str) -> 'Verdict':
        return cls(INCONCLUSIVE, tuple(degree) if degree is not None else None, witness)

    @property
    def ok(self) -> bool:
        return self.status == VERIFIED

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def describe(self) -> str:
        parts = [self.status]
        if self.degree is not None:
            parts.append(f"at {list(self.degree)}")
        if self.witness:
            parts.append(f"({self.witness})")
        return " ".join(parts)


def combine(verdicts: Iterable[Verdict]) -> Verdict:
    """A failure wins over an inconclusive answer, which wins over success."""
    verdicts = list(verdicts)
    for status in (FAILED, INCONCLUSIVE):
        for v in verdicts:
            if v.status == status:
                return v
    return Verdict.verified()



def minors_all_monomial(grid: Sequence[Sequence[Optional[Monomial]]], nvars: int, bound: int = 6) -> bool:
    """Whether every minor of every size is a monomial or zero."""
    nrows = len(grid)
    ncols = len(grid[0]) if nrows else 0
    if max(nrows, ncols) > bound:
        raise MinorBoundError(f"{nrows}x{ncols} matrix exceeds the minor bound {bound}")
    for size in range(1, min(nrows, ncols) + 1):
        for minor in minors(grid, size, nvars):
            if len(minor) > 1:
                return False
    return True


def _check_ambient(*exprs: ModuleExpr):
    first = exprs[0].ambient
    for e in exprs[1:]:
        if e.ambient != first:
            raise AmbientMismatchError(f"{e.describe()} does not live in {first.describe()}")


def gap_module(submodule: ModuleExpr, module: ModuleExpr, ideal: MonomialIdeal,
               max_power: int = 12) -> ModuleExpr:
    """``(N :_E J^infinity)``: the sections of ``E`` that ``J`` pushes into ``N``."""
    _check_ambient(submodule, module)
    return Saturation(submodule, ideal, within=module, max_power=max_power)


def dimension_gap_primes(setup: GradingSetup, d: int) -> List[FrozenSet[int]]:
    """Primes of the cones whose orbit closures have dimension at most ``d``."""
    fan = setup.require_fan()
    primes = []
    for cone in fan.all_cones:
        if fan.ambient_dim - cone_dimension(fan, cone) <= d:
            primes.append(frozenset(cone.ray_indices))
    return sorted(set(primes), key=lambda p: (len(p), sorted(p)))


def dimension_gap_module(submodule: ModuleExpr, module: ModuleExpr, setup: GradingSetup, d: int,
                         max_power: int = 12) -> ModuleExpr:
    """``N[d]``: the gap of ``N`` along the union of torus orbits of dimension ``<= d``."""
    _check_ambient(submodule, module)
    primes = dimension_gap_primes(setup, d)
    if not primes:
        return submodule
    ideal = None
    for p in primes:
        prime_ideal = MonomialIdeal.prime(setup.num_vars, p)
        ideal = prime_ideal if ideal is None else ideal.intersection(prime_ideal)
    logger.debug("dimension gap %d uses %d primes, ideal %s", d, len(primes), ideal)
    return gap_module(submodule, module, ideal, max_power)


def _class_zero_starts(setup: GradingSetup, chart: Exponents, bound: int, lowest: Exponents) -> List[Exponents]:
    ranges = []
    for k in range(setup.num_vars):
        if chart[k]:
            ranges.append(range(-bound, bound + 1))
        else:
            ranges.append(range(lowest[k], lowest[k] + bound + 1))
    zero = setup.class_group.zero()
    return [a for a in itertools.product(*ranges) if setup.class_degree(a) == zero]


def sheafification_zero(expr: ModuleExpr, setup: GradingSetup, chart_box: int = 4, k_max: int = 20,
                        jobs: int = 1) -> Verdict:
    """Whether every chart sees a zero degree-zero localization.

    With a fan the charts are the maximal cones and the degrees are the
    characters ``m`` with ``|m| <= chart_box``; otherwise the charts are the
    generators of ``B`` and the degrees the class-zero fine degrees nearby.
    """
    tasks = []
    if setup.fan is not None:
        fan = setup.fan
        div = fan.ray_matrix()
        for label, chart in setup.charts():
            for m in itertools.product(range(-chart_box, chart_box + 1), repeat=fan.ambient_dim):
                tasks.append((f"cone {label}, m={list(m)}", div.apply(m), chart))
    else:
        lowest = expr.ambient.lowest_degree()
        for label, chart in setup.charts():
            for a in _class_zero_starts(setup, chart, chart_box, lowest):
                tasks.append((f"chart {label}, degree {list(a)}", a, chart))

    results = sweep(lambda t: localized_piece(expr, t[1], t[2], k_max), tasks, jobs)
    undecided = None
    for (label, start, _), result in zip(tasks, results):
        if result.dim > 0:
            return Verdict.failed(start, f"non-zero section on {label}")
        if not result.conclusive and undecided is None:
            undecided = Verdict.inconclusive(start, f"colimit did not settle on {label}")
    if undecided is not None:
        return undecided
    logger.info("sheafification vanishes on %d chart degrees", len(tasks), extra=OK)
    return Verdict.verified(f"{len(tasks)} chart degrees")


@dataclass(frozen=True)
class PrimaryComponent:
    module: ModuleExpr
    prime: FrozenSet[int]
    label: str = "Q"

    def relevant(self, setup: GradingSetup) -> bool:
        return is_relevant(setup, self.prime)

    def describe(self) -> str:
        prime = "<" + ", ".join(f"x{i}" for i in sorted(self.prime)) + ">"
        return f"{self.label} ({prime}-primary)"


def descent_filter(components: Sequence[PrimaryComponent], setup: GradingSetup):
    """Split components into those with a relevant prime and those without.

    Relevance is the only test here. A kept component whose quotient still
    sheafifies to zero, as on the quadric cone, stays in the first list;
    ``descent_report`` marks it in ``degenerate`` and leaves it out of
    ``descended``.
    """
    kept = [c for c in components if c.relevant(setup)]
    dropped = [c for c in components if not c.relevant(setup)]
    return kept, dropped


def quotient_presentation(module: ModuleExpr, submodule: ModuleExpr) -> Optional[MonomialMatrix]:
    """A monomial matrix with cokernel ``module / submodule``, when one is at hand."""
    if isinstance(module, Free):
        relations = []
    elif isinstance(module, Cokernel):
        relations = [module.matrix]
    else:
        return None

    def generators(expr: ModuleExpr):
        if isinstance(expr, Image):
            return [expr.matrix]
        if isinstance(expr, ZeroIn) and expr.expr == module:
            return []
        if isinstance(expr, Sum):
            collected = []
            for member in expr.members:
                part = generators(member)
                if part is None:
                    return None
                collected += part
            return collected
        return None

    extra = generators(submodule)
    if extra is None:
        return None
    ambient = module.ambient
    stacked = MonomialMatrix(FreeModuleSpec(ambient.nvars, ()), ambient,
                             tuple(() for _ in range(ambient.rank)))
    for matrix in extra + relations:
        stacked = stacked.hstack(matrix)
    return stacked


def _support_by_fitting(module, submodule, prime, minor_bound) -> Optional[Verdict]:
    presentation = quotient_presentation(module, submodule)
    if presentation is None:
        return None
    try:
        fitting = fitting_ideal(presentation, 0, minor_bound)
    except MinorBoundError:
        return None
    if not fitting.is_monomial:
        return None
    expected = MonomialIdeal.prime(module.ambient.nvars, prime)
    if fitting.ideal.is_unit():
        return Verdict.failed(None, "the quotient is zero")
    if radical(fitting.ideal) != expected:
        return Verdict.failed(None, f"support is cut out by {radical(fitting.ideal)}, not {expected}")
    return Verdict.verified("Fitting ideal")


def verify_primary(submodule: ModuleExpr, module: ModuleExpr, prime: Iterable[int], box: int = 6,
                   k_max: int = 20, minor_bound: int = 6, jobs: int = 1) -> Verdict:
    """Whether ``module / submodule`` is primary to the given variable prime within the box.

    Support comes from the zeroth Fitting ideal when a monomial presentation
    is available, otherwise from nilpotency of the prime's variables.
    Variables outside the prime must act injectively.
    """
    _check_ambient(submodule, module)
    prime = frozenset(prime)
    nvars = module.ambient.nvars
    quotient = QuotientBy(module, submodule)
    degrees = degree_box(module.ambient, box)

    support = _support_by_fitting(module, submodule, prime, minor_bound)
    if support is not None and not support.ok:
        return support

    def check(a) -> Optional[Verdict]:
        p = piece(quotient, a)
        if not p.stable:
            return Verdict.inconclusive(a, "saturation did not settle")
        if p.dim == 0:
            return None
        for rho in range(nvars):
            if rho in prime:
                if support is None and not variable_map(quotient, a, rho, k_max).is_zero():
                    return Verdict.failed(a, f"x{rho}^{k_max} does not kill {p.describe_vector(p.witness())}")
            else:
                step = variable_map(quotient, a, rho)
                if not step.is_injective():
                    return Verdict.failed(a, f"x{rho} is a zero divisor")
        return None

    results = sweep(lambda a: (a, piece(quotient, a).dim, check(a)), degrees, jobs)
    nonzero = False
    for a, dim, verdict in results:
        if verdict is not None and verdict.status == FAILED:
            return verdict
    for a, dim, verdict in results:
        if verdict is not None:
            return verdict
        nonzero = nonzero or dim > 0
    if not nonzero:
        return Verdict.failed(None, "the quotient vanishes in the box")
    return Verdict.verified(support.witness if support is not None else "nilpotency in box")


def intersect_check(components: Sequence[ModuleExpr], target: ModuleExpr, box: int = 6,
                    jobs: int = 1) -> Verdict:
    """Whether the components intersect to ``target`` in every degree of the box."""
    _check_ambient(target, *components)
    meet = Intersection(tuple(components))

    def check(a):
        left, right = piece(meet, a), piece(target, a)
        if left.same_subquotient(right):
            return None
        if not (left.stable and right.stable):
            return Verdict.inconclusive(a, "saturation did not settle")
        return Verdict.failed(a, f"intersection has span {len(left.span)}, target {len(right.span)}")

    for verdict in sweep(check, degree_box(target.ambient, box), jobs):
        if verdict is not None:
            return verdict
    return Verdict.verified()


def ass_fine(expr: ModuleExpr, box: int = 6, k_max: int = 20, jobs: int = 1) -> Dict[FrozenSet[int], Tuple[Exponents, str]]:
    """Non-empty variable primes ``P`` witnessed by a fine-homogeneous element.

    At degree ``a`` the witness is killed by every variable in ``P`` and not
    by ``prod_{rho not in P} x_rho^k_max``.
    """
    nvars = expr.ambient.nvars

    def scan(a):
        p = piece(expr, a)
        found = {}
        if p.dim == 0:
            return found
        kernels = [variable_map(expr, a, rho).kernel() for rho in range(nvars)]
        n = p.ambient_dim
        for size in range(1, nvars + 1):
            for subset in itertools.combinations(range(nvars), size):
                common = p.span
                for rho in subset:
                    common = rational.intersect(common, kernels[rho], n)
                if len(common) == len(p.relations):
                    continue
                outside = tuple(0 if rho in subset else k_max for rho in range(nvars))
                killed = mult_map(expr, a, outside).kernel()
                witness = rational.complement_vector(common, killed, n)
                if witness is not None:
                    found[frozenset(subset)] = p.describe_vector(witness)
        return found

    degrees = degree_box(expr.ambient, box)
    associated: Dict[FrozenSet[int], Tuple[Exponents, str]] = {}
    for a, found in zip(degrees, sweep(scan, degrees, jobs)):
        for prime, witness in found.items():
            associated.setdefault(prime, (a, witness))
    return associated


def _certificate_table(module, submodule, components, box, setup, jobs) -> pd.DataFrame:
    degrees = degree_box(module.ambient, box)
    quotients = [QuotientBy(module, c.module) for c in components]
    meet = Intersection(tuple(c.module for c in components)) if components else None

    def row(a):
        record = {
            'degree': str(list(a)),
            'module': piece(module, a).dim,
            'submodule': piece(submodule, a).dim,
        }
        if setup is not None:
            record['class'] = str(list(setup.class_degree(a)))
        for c, q in zip(components, quotients):
            record[f"{c.label}"] = piece(q, a).dim
        if meet is not None:
            record['intersection'] = piece(meet, a).dim
        return record

    return pd.DataFrame(sweep(row, degrees, jobs))


@dataclass
class DecompositionReport:
    title: str
    box: int
    verdicts: Dict[str, Verdict] = field(default_factory=dict)
    components: List[PrimaryComponent] = field(default_factory=list)
    discarded: List[PrimaryComponent] = field(default_factory=list)
    degenerate: List[PrimaryComponent] = field(default_factory=list)
    table: pd.DataFrame = field(default_factory=pd.DataFrame)
    notes: List[str] = field(default_factory=list)

    @property
    def overall(self) -> Verdict:
        return combine(self.verdicts.values())

    @property
    def exit_code(self) -> int:
        return self.overall.exit_code

    @property
    def descended(self) -> List[PrimaryComponent]:
        return [c for c in self.components if c not in self.degenerate]

    def to_frame(self) -> pd.DataFrame:
        return self.table

    def verdict_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{'check': name, 'status': v.status,
                              'degree': str(list(v.degree)) if v.degree is not None else '',
                              'witness': v.witness or ''} for name, v in self.verdicts.items()])

    def render(self) -> str:
        lines = [
            self.title.upper(),
            "=" * 50,
            f"Degree box: {self.box}",
            f"Overall: {self.overall.describe()}",
            "",
            "CHECKS:",
        ]
        for i, (name, verdict) in enumerate(self.verdicts.items(), 1):
            lines.append(f"{i}. {name}: {verdict.describe()}")
        if self.components or self.discarded:
            lines += ["", "COMPONENTS:"]
            for c in self.components:
                state = "sheafifies to zero" if c in self.degenerate else "kept"
                lines.append(f"   {c.describe()}: {state}")
            for c in self.discarded:
                lines.append(f"   {c.describe()}: irrelevant prime, dropped")
        for note in self.notes:
            lines.append(f"[!] {note}")
        return "\n".join(lines)


def verify_decomposition(module: ModuleExpr, submodule: ModuleExpr, components: Sequence[PrimaryComponent],
                         box: int = 6, k_max: int = 20, minor_bound: int = 6,
                         setup: Optional[GradingSetup] = None, jobs: int = 1,
                         title: str = "graded primary decomposition") -> DecompositionReport:
    """Check ``submodule = meet of components`` and that each component is primary."""
    components = list(components)
    report = DecompositionReport(title, box, components=components)
    logger.info("checking %d components of %s in box %d", len(components), title, box)
    report.verdicts['intersection'] = intersect_check([c.module for c in components], submodule, box, jobs)
    for c in components:
        report.verdicts[f"primary {c.label}"] = verify_primary(c.module, module, c.prime, box, k_max,
                                                               minor_bound, jobs)
    report.table = _certificate_table(module, submodule, components, box, setup, jobs)
    return report


def descent_report(setup: GradingSetup, module: ModuleExpr, submodule: ModuleExpr,
                   components: Sequence[PrimaryComponent], box: int = 6, k_max: int = 20,
                   minor_bound: int = 6, chart_box: int = 4, jobs: int = 1,
                   title: str = "graded primary decomposition") -> DecompositionReport:
    """Verify a decomposition and push it down to the toric variety.

    Components with irrelevant primes are dropped. When the group does not
    act freely, kept components whose quotient still sheafifies to zero are
    recorded as degenerate and left out of the descended decomposition.
    """
    report = verify_decomposition(module, submodule, components, box, k_max, minor_bound, setup, jobs, title)
    kept, dropped = descent_filter(report.components, setup)
    report.components, report.discarded = kept, dropped
    free = acts_freely(setup)
    if free:
        report.verdicts['free action'] = Verdict.verified()
    else:
        report.notes.append("the grading group does not act freely; descent may degenerate")
        for c in kept:
            verdict = sheafification_zero(QuotientBy(module, c.module), setup, chart_box, k_max, jobs)
            if verdict.ok:
                report.degenerate.append(c)
        if report.degenerate:
            report.notes.append(
                f"{len(report.degenerate)} relevant component(s) sheafify to zero: "
                + ", ".join(c.label for c in report.degenerate))
    logger.info("descent keeps %d of %d components", len(report.descended), len(components), extra=OK)
    return report
