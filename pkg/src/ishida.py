"""Zariski 1-forms of a toric variety through the first terms of the Ishida complex.

``Omega = ker(S^n -> (+)_rho S/x_rho)`` with the map ``v -> (<v, n(rho)>)_rho``;
its components ``F_rho`` are the kernels of the single summands.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from src import rational
from src.cox_ring import GradingSetup, Monomial, setup_from_fan
from src.decomposition import (DecompositionReport, PrimaryComponent, Verdict, intersect_check,
                               verify_primary)
from src.errors import NotInDualConeError
from src.fan import Cone, Fan, dual_membership, nonsimplicial_locus
from src.lattice import IntMatrix, kernel_basis, primitive_dual_vector
from src.log import OK
from src.modules import (Free, FreeModuleSpec, Image, Kernel, ModuleExpr, MonomialMatrix, chart_piece,
                         degree_box, fitting_ideal, piece, same_module_at, sweep)

logger = logging.getLogger(__name__)


def _pairing(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


@dataclass(frozen=True)
class IshidaData:
    fan: Fan
    setup: GradingSetup
    lattice_module: Free
    pairing: IntMatrix
    beta: MonomialMatrix
    omega: ModuleExpr
    f_rho: Tuple[ModuleExpr, ...]

    def components(self) -> List[PrimaryComponent]:
        return [PrimaryComponent(f, frozenset({rho}), f"F{rho}") for rho, f in enumerate(self.f_rho)]


def _ray_row(fan: Fan, rho: int) -> MonomialMatrix:
    return MonomialMatrix.constant([fan.rays[rho].vector], fan.num_rays)


def build_ishida(fan: Fan) -> IshidaData:
    """``Omega`` and its components ``F_rho`` as kernels modulo ``x_rho``."""
    r, n = fan.num_rays, fan.ambient_dim
    lattice_module = Free(FreeModuleSpec.zeros(r, n))
    beta = MonomialMatrix.constant([ray.vector for ray in fan.rays], r)
    variables = Image(MonomialMatrix.variable_diagonal(r, range(r)))
    omega = Kernel(beta, modulo=variables)
    f_rho = tuple(Kernel(_ray_row(fan, rho), modulo=Image(MonomialMatrix.variable_diagonal(r, [rho])))
                  for rho in range(r))
    return IshidaData(fan, setup_from_fan(fan), lattice_module, fan.ray_matrix(), beta, omega, f_rho)


def f_rho_generators(fan: Fan, rho: int) -> MonomialMatrix:
    """Generators of ``F_rho``: a basis of ``n(rho)``-perp and ``x_rho w`` with ``<w, n(rho)> = 1``.

    The columns form a square matrix of determinant ``+-x_rho``.
    """
    r, n = fan.num_rays, fan.ambient_dim
    normal = fan.rays[rho].vector
    perp = kernel_basis(IntMatrix.from_rows([normal], cols=n)).columns()
    w = primitive_dual_vector(normal)
    x_rho = tuple(int(k == rho) for k in range(r))
    zero = (0,) * r
    columns = [[Monomial(zero, c) if c else None for c in vector] for vector in perp]
    columns.append([Monomial(x_rho, c) if c else None for c in w])
    grid = tuple(tuple(columns[j][i] for j in range(len(columns))) for i in range(n))
    source = FreeModuleSpec(r, tuple([zero] * len(perp) + [x_rho]))
    return MonomialMatrix(source, FreeModuleSpec.zeros(r, n), grid)


def omega_dimension_formula(fan: Fan, degree: Sequence[int]) -> int:
    """``dim Omega_a = n - rank{n(rho) : a_rho = 0}`` for ``a >= 0`` and 0 otherwise."""
    if any(a < 0 for a in degree):
        return 0
    rays = [fan.rays[rho].vector for rho, a in enumerate(degree) if a == 0]
    return fan.ambient_dim - rational.rank(rays, fan.ambient_dim)


def _vanishing_rays(fan: Fan, cone: Cone, m: Sequence[int]) -> List[int]:
    return [rho for rho in cone.ray_indices if _pairing(m, fan.rays[rho].vector) == 0]


def chart_omega_closed_form(fan: Fan, cone, m: Sequence[int]) -> rational.Rows:
    """``F^sigma_m``: zero off the dual cone, else the common kernel of ``n(rho)``, ``rho in I_m``."""
    cone = fan.resolve_cone(cone)
    if not dual_membership(fan, cone, m):
        return ()
    rows = [fan.rays[rho].vector for rho in _vanishing_rays(fan, cone, m)]
    return rational.row_space(rational.nullspace(rows, fan.ambient_dim), fan.ambient_dim)


def chart_f_rho_closed_form(fan: Fan, cone, rho: int, m: Sequence[int]) -> rational.Rows:
    cone = fan.resolve_cone(cone)
    n = fan.ambient_dim
    if not dual_membership(fan, cone, m):
        return ()
    if rho in cone and _pairing(m, fan.rays[rho].vector) == 0:
        return rational.row_space(rational.nullspace([fan.rays[rho].vector], n), n)
    return rational.identity(n)


@dataclass(frozen=True)
class SiplReport:
    cone: Cone
    character: Tuple[int, ...]
    vanishing: Tuple[int, ...]
    rank: int

    @property
    def surjective(self) -> bool:
        return self.rank == len(self.vanishing)


def sipl_rank_report(fan: Fan, cone, m: Sequence[int]) -> SiplReport:
    """Rank of ``B_m: V -> k^{I_m}``, ``v -> (<v, n(rho)>)``, for ``m`` in the dual cone."""
    cone = fan.resolve_cone(cone)
    if not dual_membership(fan, cone, m):
        raise NotInDualConeError(f"{tuple(m)} is not in the dual of cone {cone.label()}")
    vanishing = _vanishing_rays(fan, cone, m)
    rank = rational.rank([fan.rays[rho].vector for rho in vanishing], fan.ambient_dim)
    return SiplReport(cone, tuple(m), tuple(vanishing), rank)


def cokernel_support(fan: Fan, box: int = 2) -> Tuple[Cone, ...]:
    """Cones carrying some ``m`` in their dual with ``|m| <= box`` and ``B_m`` not onto."""
    support = []
    points = list(itertools.product(range(-box, box + 1), repeat=fan.ambient_dim))
    for cone in fan.all_cones:
        for m in points:
            if dual_membership(fan, cone, m) and not sipl_rank_report(fan, cone, m).surjective:
                support.append(cone)
                break
    return tuple(support)


def alpha_fitting_support(fan: Fan, minor_bound: int = 6) -> Tuple[Cone, ...]:
    """Cones whose generic point lies on the zero set of the maximal minors of ``P diag(x_rho)``.

    ``P`` is the free part of the class projection; torsion is ignored.
    """
    setup = setup_from_fan(fan)
    group = setup.class_group
    r = fan.num_rays
    rows = group.projection.to_rows()[:group.free_rank]
    units = [tuple(int(k == rho) for k in range(r)) for rho in range(r)]
    grid = tuple(tuple(Monomial(units[rho], row[rho]) if row[rho] else None for rho in range(r)) for row in rows)
    alpha = MonomialMatrix(FreeModuleSpec(r, tuple(units)), FreeModuleSpec.zeros(r, len(rows)), grid)
    fitting = fitting_ideal(alpha, 0, minor_bound)
    support = []
    for cone in fan.all_cones:
        inside = set(cone.ray_indices)
        if not any(not (inside & {k for k, e in enumerate(g) if e}) for g in fitting.ideal.generators):
            support.append(cone)
    return tuple(support)


def _chart_check(data: IshidaData, chart_box: int, k_max: int, jobs: int) -> Verdict:
    fan = data.fan
    n = fan.ambient_dim
    tasks = [(cone, m) for cone in fan.maximal_cones
             for m in itertools.product(range(-chart_box, chart_box + 1), repeat=n)]

    def check(task):
        cone, m = task
        result = chart_piece(data.omega, data.setup, cone, m, k_max)
        if not result.conclusive:
            return Verdict.inconclusive(None, f"Omega on cone {cone.label()}, m={list(m)}")
        if result.piece.span != chart_omega_closed_form(fan, cone, m):
            return Verdict.failed(None, f"Omega on cone {cone.label()}, m={list(m)} has dim {result.dim}")
        for rho, f in enumerate(data.f_rho):
            local = chart_piece(f, data.setup, cone, m, k_max)
            if local.conclusive and local.piece.span != chart_f_rho_closed_form(fan, cone, rho, m):
                return Verdict.failed(None, f"F{rho} on cone {cone.label()}, m={list(m)}")
        return None

    for verdict in sweep(check, tasks, jobs):
        if verdict is not None:
            return verdict
    return Verdict.verified(f"{len(tasks)} chart degrees")


def omega_decomposition_check(fan: Fan, box: int = 4, k_max: int = 20, chart_box: int = 2,
                              minor_bound: int = 6, jobs: int = 1,
                              components: Optional[Sequence[ModuleExpr]] = None) -> DecompositionReport:
    """``Omega = meet of F_rho`` with each ``F_rho`` primary, plus chart closed forms.

    ``components`` replaces the ``F_rho`` in the intersection check only.
    """
    data = build_ishida(fan)
    members = list(components) if components is not None else list(data.f_rho)
    report = DecompositionReport(f"Omega of {fan.name}", box, components=data.components())
    logger.info("checking Omega of %s in box %d", fan.name, box)

    report.verdicts['intersection'] = intersect_check(members, data.omega, box, jobs)
    degrees = degree_box(data.omega.ambient, box)
    for rho, f in enumerate(data.f_rho):
        report.verdicts[f"primary F{rho}"] = verify_primary(f, data.lattice_module, {rho}, box, k_max,
                                                             minor_bound, jobs)
        generated = Image(f_rho_generators(fan, rho))
        bad = next((a for a in degrees if not same_module_at(generated, f, a)), None)
        report.verdicts[f"generators F{rho}"] = Verdict.verified() if bad is None else \
            Verdict.failed(bad, f"F{rho} is not generated by the kernel basis and x{rho} w")

    bad = next((a for a in degrees if piece(data.omega, a).dim != omega_dimension_formula(fan, a)), None)
    report.verdicts['dimension formula'] = Verdict.verified() if bad is None else \
        Verdict.failed(bad, f"dim {piece(data.omega, bad).dim}, formula {omega_dimension_formula(fan, bad)}")
    report.verdicts['charts'] = _chart_check(data, chart_box, k_max, jobs)

    locus = set(nonsimplicial_locus(fan))
    support = set(cokernel_support(fan, chart_box))
    report.verdicts['cokernel support'] = Verdict.verified() if support == locus else \
        Verdict.failed(None, f"cokernel on {sorted(c.label() for c in support)}, "
                             f"non-simplicial {sorted(c.label() for c in locus)}")
    report.table = _dimension_table(data, degrees, jobs)
    logger.info("Omega of %s: %s", fan.name, report.overall.describe(), extra=OK)
    return report


def _dimension_table(data: IshidaData, degrees, jobs):
    def row(a):
        record = {'degree': str(list(a)), 'omega': piece(data.omega, a).dim,
                  'formula': omega_dimension_formula(data.fan, a)}
        for rho, f in enumerate(data.f_rho):
            record[f"F{rho}"] = piece(f, a).dim
        return record

    return pd.DataFrame(sweep(row, degrees, jobs))
