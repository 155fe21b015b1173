"""Built-in decompositions: a cubic-support sheaf on P2 and two degenerate descents."""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

from src.cox_ring import GradingSetup, Monomial, MonomialIdeal, invariant_hom_dim, setup_explicit, setup_from_fan
from src.decomposition import (DecompositionReport, PrimaryComponent, Verdict, ass_fine, descent_report,
                               gap_module, sheafification_zero, verify_decomposition)
from src.errors import InvalidArgumentError
from src.fan import projective_plane, quadric_cone
from src.lattice import IntMatrix
from src.log import OK
from src.modules import (Cokernel, Free, FreeModuleSpec, Image, ModuleExpr, MonomialMatrix, QuotientBy,
                         Sum, ZeroIn, degree_box, dims_frame, equivariant_shifts, hilbert_function,
                         same_module_at)

logger = logging.getLogger(__name__)


def unit(i: int, n: int = 3) -> Tuple[int, ...]:
    return tuple(int(k == i) for k in range(n))


def mono(*variables: int, n: int = 3, coefficient: int = 1) -> Monomial:
    exponents = [0] * n
    for v in variables:
        exponents[v] += 1
    return Monomial(tuple(exponents), coefficient)


def _plus(*vectors):
    return tuple(sum(parts) for parts in zip(*vectors))


@dataclass(frozen=True)
class WorkedExample:
    name: str
    setup: GradingSetup
    module: ModuleExpr
    submodule: ModuleExpr
    components: Tuple[PrimaryComponent, ...]


@dataclass(frozen=True)
class CubicExample(WorkedExample):
    presentation: MonomialMatrix = None
    factorizations: Tuple[Tuple[MonomialMatrix, MonomialMatrix], ...] = ()


def submodule_of(module: ModuleExpr, generators: MonomialMatrix) -> ModuleExpr:
    """The submodule of a quotient ``module`` generated by the columns of ``generators``."""
    return Sum((Image(generators), ZeroIn(module)))


def p2_cubic_example() -> CubicExample:
    """Cokernel of ``[[x1, x2], [x0 x1, 0]]`` on P2, a sheaf supported on three lines.

    ``F = F_0 & F_1 & F_2`` inside ``F`` with ``F_v`` the image of ``B_v``;
    each ``B_v A_v = A`` and ``F / F_v`` lives on the line ``x_v = 0``.
    """
    setup = setup_from_fan(projective_plane())
    e0, e1, e2 = unit(0), unit(1), unit(2)
    zero = (0, 0, 0)
    target = FreeModuleSpec(3, (e0, zero))
    source = FreeModuleSpec(3, (_plus(e0, e1), _plus(e0, e2)))
    A = MonomialMatrix(source, target, ((mono(1), mono(2)), (mono(0, 1), None)))
    F = Cokernel(A)

    shifts = {0: (e0, e0), 1: (e0, e1), 2: (e0, e2)}
    B = {
        0: ((mono(), None), (None, mono(0))),
        1: ((mono(), None), (None, mono(1))),
        2: ((mono(), None), (mono(0), mono(2))),
    }
    A_nu = {
        0: ((mono(1), mono(2)), (mono(1), None)),
        1: ((mono(1), mono(2)), (mono(0), None)),
        2: ((mono(1), mono(2)), (None, mono(0, coefficient=-1))),
    }
    factorizations = []
    components = []
    for nu in range(3):
        middle = FreeModuleSpec(3, shifts[nu])
        B_nu = MonomialMatrix(middle, target, B[nu])
        factorizations.append((B_nu, MonomialMatrix(source, middle, A_nu[nu])))
        components.append(PrimaryComponent(submodule_of(F, B_nu), frozenset({nu}), f"F{nu}"))

    return CubicExample("P2 cubic support", setup, F, ZeroIn(F), tuple(components), A, tuple(factorizations))


def cubic_support_resolution(z1: int, z2: int, w1: int, w2: int) -> CubicExample:
    """Equivariant sheaf on P2 presented by ``[[z1, w1 w2], [z2, 0]]``.

    Coordinates are variable indices; ``z1`` and ``z2`` must differ. Shifts
    follow the resolution ``O(-D-L1+L2) + O(-D) -> O(-D+L2) + O(-L1+L2)``.
    """
    for v in (z1, z2, w1, w2):
        if v not in (0, 1, 2):
            raise InvalidArgumentError(f"coordinate {v} is not one of 0, 1, 2")
    if z1 == z2:
        raise InvalidArgumentError("z1 and z2 must be independent coordinates")
    grid = ((mono(z1), mono(z2)), (mono(w1, w2), None))
    target_shifts, source_shifts = equivariant_shifts(grid, 3)
    offset = tuple(a - b for a, b in zip(_plus(unit(w1), unit(w2)), unit(z2)))
    target_shifts = tuple(_plus(s, offset) for s in target_shifts)
    source_shifts = tuple(_plus(s, offset) for s in source_shifts)
    A = MonomialMatrix.from_grid(grid, 3, source_shifts, target_shifts)
    F = Cokernel(A)
    return CubicExample(f"cubic support z=({z1},{z2}) w=({w1},{w2})", setup_from_fan(projective_plane()),
                        F, ZeroIn(F), (), A, ())


def quadric_cone_example() -> WorkedExample:
    """``k`` placed in the odd class on the quadric cone, where the class group is ``Z/2``."""
    setup = setup_from_fan(quadric_cone())
    n = 2
    target = FreeModuleSpec(n, (unit(0, n),))
    source = FreeModuleSpec(n, ((2, 0), (1, 1)))
    relations = MonomialMatrix(source, target, ((mono(0, n=n), mono(1, n=n)),))
    module = Free(target)
    submodule = Image(relations)
    components = (PrimaryComponent(submodule, frozenset({0, 1}), "Q"),)
    return WorkedExample("quadric cone", setup, module, submodule, components)


def z_graded_4var_example() -> WorkedExample:
    """The image of ``x0`` in ``S / <x0^2, x1, x2, x3>`` for ``deg = (1, -1, -1, 1)`` and ``B = S``."""
    n = 4
    setup = setup_explicit(n, IntMatrix.from_rows([[1, -1, -1, 1]]), (), [(0,) * n], name="Z-graded A4")
    ambient = FreeModuleSpec.zeros(n, 1)
    ideal = MonomialMatrix(FreeModuleSpec(n, ((2, 0, 0, 0), unit(1, n), unit(2, n), unit(3, n))), ambient,
                           ((mono(0, 0, n=n), mono(1, n=n), mono(2, n=n), mono(3, n=n)),))
    generator = MonomialMatrix(FreeModuleSpec(n, (unit(0, n),)), ambient, ((mono(0, n=n),),))
    module = submodule_of(Cokernel(ideal), generator)
    submodule = ZeroIn(module)
    components = (PrimaryComponent(submodule, frozenset(range(n)), "Q"),)
    return WorkedExample("Z-graded A4", setup, module, submodule, components)


def commuting_squares(example: CubicExample) -> List[bool]:
    return [B @ A_nu == example.presentation for B, A_nu in example.factorizations]


def run_cubic_suite(example: CubicExample = None, box: int = 6, k_max: int = 20, minor_bound: int = 6,
                    max_power: int = 12, jobs: int = 1) -> DecompositionReport:
    """Every identity claimed for the cubic-support example, as one report."""
    example = example or p2_cubic_example()
    logger.info("running the %s suite in box %d", example.name, box)
    report = verify_decomposition(example.module, example.submodule, example.components, box, k_max,
                                  minor_bound, example.setup, jobs, title=example.name)

    squares = commuting_squares(example)
    report.verdicts['commuting squares'] = Verdict.verified(f"{len(squares)} factorizations") \
        if all(squares) else Verdict.failed(None, f"B A != A for index {squares.index(False)}")

    lines = {frozenset({v}) for v in range(3)}
    found = ass_fine(example.module, box, k_max, jobs)
    report.verdicts['associated primes'] = Verdict.verified(
        ", ".join(f"<x{min(p)}>" for p in sorted(found, key=min))) if set(found) == lines else \
        Verdict.failed(None, f"found {sorted(sorted(p) for p in found)}")

    gaps = Verdict.verified()
    for component in example.components:
        (nu,) = component.prime
        others = [v for v in range(3) if v != nu]
        ideal = MonomialIdeal.prime(3, [others[0]]).intersection(MonomialIdeal.prime(3, [others[1]]))
        gap = gap_module(example.submodule, example.module, ideal, max_power)
        bad = next((a for a in degree_box(example.module.ambient, box)
                    if not same_module_at(gap, component.module, a)), None)
        if bad is not None:
            gaps = Verdict.failed(bad, f"{component.label} differs from the gap along the other two lines")
            break
    report.verdicts['gap identities'] = gaps

    report.verdicts['hilbert function'] = hilbert_check(example, box, jobs)
    logger.info("%s: %s", example.name, report.overall.describe(), extra=OK)
    return report


def presentation_count(example: CubicExample, d: int) -> int:
    """``dim F_d`` read off the injective presentation: target sections minus source sections."""
    setup, matrix = example.setup, example.presentation
    shifts = matrix.source.shifts + matrix.target.shifts
    bound = d + max(sum(abs(x) for x in s) for s in shifts)

    def sections(spec):
        return sum(invariant_hom_dim(setup, (d,), setup.class_degree(s), bound) for s in spec.shifts)

    return sections(matrix.target) - sections(matrix.source)


def hilbert_check(example: CubicExample, box: int, jobs: int = 1) -> Verdict:
    for d in range(box + 1):
        value = hilbert_function(example.module, example.setup, (d,), d, jobs)
        if value != 3 * d + 1:
            return Verdict.failed(None, f"class degree {d} has dimension {value}, expected {3 * d + 1}")
        counted = presentation_count(example, d)
        if counted != value:
            return Verdict.failed(None, f"class degree {d}: presentation gives {counted}, pieces give {value}")
    return Verdict.verified("3d + 1")


def run_resolution_suite(example: CubicExample, box: int = 6, k_max: int = 20, jobs: int = 1) -> DecompositionReport:
    """Support and Hilbert function of a presented cubic-support sheaf."""
    report = DecompositionReport(example.name, box)
    grid = example.presentation.entries
    report.verdicts['equivariant shifts'] = Verdict.verified(example.presentation.describe())
    expected = set()
    for entry in (grid[0][1], grid[1][0]):
        expected |= {frozenset({v}) for v, e in enumerate(entry.exponents) if e}
    found = ass_fine(example.module, box, k_max, jobs)
    names = ", ".join(f"<x{min(p)}>" for p in sorted(found, key=min))
    report.verdicts['associated primes'] = Verdict.verified(names) if set(found) == expected else \
        Verdict.failed(None, f"found {names or 'none'}")
    report.verdicts['hilbert function'] = hilbert_check(example, box, jobs)
    report.table = dims_frame(example.module, degree_box(example.module.ambient, box), example.setup, jobs)
    return report


def run_degenerate_suite(example: WorkedExample, box: int = 6, k_max: int = 20, minor_bound: int = 6,
                         chart_box: int = 4, jobs: int = 1) -> DecompositionReport:
    """Descent of a decomposition whose relevant component sheafifies to zero."""
    report = descent_report(example.setup, example.module, example.submodule, example.components,
                            box, k_max, minor_bound, chart_box, jobs, title=example.name)
    quotient = QuotientBy(example.module, example.submodule)
    report.verdicts['sheafification zero'] = sheafification_zero(quotient, example.setup, chart_box, k_max, jobs)
    return report


EXAMPLES: Dict[str, Callable] = {
    'p2-cubic': p2_cubic_example,
    'quadric-cone': quadric_cone_example,
    'z-graded-4var': z_graded_4var_example,
}
