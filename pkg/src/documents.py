"""YAML documents for fans, gradings, ideals, matrices, modules and reports.

Every document carries ``version`` and ``kind``. Integers may be written as
YAML integers or decimal strings; they are always dumped as strings so large
values survive any YAML reader.
"""
import logging
import os
import re
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
import yaml

from src.cox_ring import (GradingSetup, Monomial, MonomialIdeal, setup_explicit, setup_from_fan)
from src.decomposition import DecompositionReport, PrimaryComponent, Verdict
from src.errors import DocumentError, ToricError
from src.fan import BUILTIN_FANS, Fan
from src.lattice import IntMatrix
from src.modules import (Cokernel, Colon, Free, FreeModuleSpec, Image, Intersection, Kernel, ModuleExpr,
                         MonomialMatrix, QuotientBy, Saturation, Shift, Sum, ZeroIn)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
KINDS = ("fan", "grading", "ideal", "matrix", "module", "decomposition", "report")

_FACTOR = re.compile(r"^x(\d+)(?:\^(\d+))?$")


def _int(value, location: str) -> int:
    if isinstance(value, bool):
        raise DocumentError(f"expected an integer, got {value!r}", location)
    if isinstance(value, int):
        return value
    if isinstance(value, str) and re.fullmatch(r"[+-]?\d+", value.strip()):
        return int(value)
    raise DocumentError(f"expected an integer, got {value!r}", location)


def _ints(values, location: str) -> Tuple[int, ...]:
    if not isinstance(values, (list, tuple)):
        raise DocumentError(f"expected a list of integers, got {values!r}", location)
    return tuple(_int(v, f"{location}[{i}]") for i, v in enumerate(values))


def _int_rows(values, location: str) -> Tuple[Tuple[int, ...], ...]:
    if not isinstance(values, (list, tuple)):
        raise DocumentError(f"expected a list of rows, got {values!r}", location)
    return tuple(_ints(row, f"{location}[{i}]") for i, row in enumerate(values))


def _strs(values: Sequence[int]) -> List[str]:
    return [str(int(v)) for v in values]


def _fraction(value, location: str) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise DocumentError(f"expected a rational number, got {value!r}", location)


def _mapping(doc, location: str) -> Dict[str, Any]:
    if not isinstance(doc, dict):
        raise DocumentError(f"expected a mapping, got {type(doc).__name__}", location)
    return doc


def _list(values, location: str) -> list:
    if not isinstance(values, list):
        raise DocumentError(f"expected a list, got {type(values).__name__}", location)
    return values


def _require(doc: Dict[str, Any], key: str, location: str):
    _mapping(doc, location)
    if key not in doc:
        raise DocumentError(f"missing field '{key}'", location)
    return doc[key]


def _header(kind: str) -> Dict[str, Any]:
    return {'version': SCHEMA_VERSION, 'kind': kind}


def check_header(doc: Dict[str, Any], kinds: Sequence[str], location: str = "document") -> str:
    if not isinstance(doc, dict):
        raise DocumentError("a document must be a mapping", location)
    version = str(doc.get('version', ''))
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported version {version!r}, expected {SCHEMA_VERSION!r}", location)
    kind = doc.get('kind')
    if kind not in kinds:
        raise DocumentError(f"expected kind {' or '.join(kinds)}, got {kind!r}", location)
    return kind


def load_document(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise DocumentError("no such file", path)
    with open(path, 'r') as file:
        try:
            doc = yaml.safe_load(file)
        except yaml.YAMLError as exc:
            raise DocumentError(f"invalid YAML: {exc}", path)
    check_header(doc, KINDS, path)
    logger.debug("loaded %s document from %s", doc['kind'], path)
    return doc


def dump_document(doc: Dict[str, Any], path: Optional[str] = None) -> str:
    text = yaml.safe_dump(doc, sort_keys=True, default_flow_style=None, allow_unicode=True)
    if path:
        with open(path, 'w') as file:
            file.write(text)
    return text


def parse_fan(doc, location: str = "fan") -> Fan:
    if isinstance(doc, str):
        if doc not in BUILTIN_FANS:
            raise DocumentError(f"unknown built-in fan {doc!r}, expected one of {sorted(BUILTIN_FANS)}", location)
        return BUILTIN_FANS[doc]()
    n = _int(_require(doc, 'ambient_dim', location), f"{location}.ambient_dim")
    rays = _int_rows(_require(doc, 'rays', location), f"{location}.rays")
    cones = _int_rows(_require(doc, 'max_cones', location), f"{location}.max_cones")
    try:
        return Fan(n, rays, cones, name=str(doc.get('name', 'fan')))
    except ToricError as exc:
        raise DocumentError(str(exc), location)


def fan_to_document(fan: Fan) -> Dict[str, Any]:
    doc = _header('fan')
    doc.update({
        'name': fan.name,
        'ambient_dim': str(fan.ambient_dim),
        'rays': [_strs(r.vector) for r in fan.rays],
        'max_cones': [_strs(c.ray_indices) for c in fan.maximal_cones],
    })
    return doc


def parse_setup(doc, location: str = "setup") -> GradingSetup:
    """A fan (inline, by file kind, or a built-in name) or an explicit grading."""
    if isinstance(doc, str) or _mapping(doc, location).get('kind', 'fan') == 'fan':
        return setup_from_fan(parse_fan(doc, location))
    num_vars = _int(_require(doc, 'num_vars', location), f"{location}.num_vars")
    classes = _int_rows(_require(doc, 'class_matrix', location), f"{location}.class_matrix")
    torsion = _ints(doc.get('torsion', []), f"{location}.torsion")
    irrelevant = _int_rows(_require(doc, 'irrelevant', location), f"{location}.irrelevant")
    return setup_explicit(num_vars, IntMatrix.from_rows(classes, cols=num_vars), torsion, irrelevant,
                          name=str(doc.get('name', 'explicit')))


def setup_to_document(setup: GradingSetup) -> Dict[str, Any]:
    if setup.fan is not None:
        return fan_to_document(setup.fan)
    doc = _header('grading')
    doc.update({
        'name': setup.name,
        'num_vars': str(setup.num_vars),
        'class_matrix': [_strs(r) for r in setup.class_group.projection.to_rows()],
        'torsion': _strs(setup.class_group.torsion),
        'irrelevant': [_strs(g) for g in setup.irrelevant.generators],
    })
    return doc


def parse_ideal(doc, location: str = "ideal") -> MonomialIdeal:
    nvars = _int(_require(doc, 'num_vars', location), f"{location}.num_vars")
    generators = _int_rows(_require(doc, 'generators', location), f"{location}.generators")
    try:
        return MonomialIdeal(nvars, generators)
    except ToricError as exc:
        raise DocumentError(str(exc), location)


def ideal_to_document(ideal: MonomialIdeal) -> Dict[str, Any]:
    doc = _header('ideal')
    doc.update({'num_vars': str(ideal.nvars), 'generators': [_strs(g) for g in ideal.generators]})
    return doc


def parse_monomial(value, nvars: int, location: str) -> Optional[Monomial]:
    """``null``, ``0``, a mapping with coefficient and exponents, or text like ``-3/2*x0^2*x1``."""
    if value is None:
        return None
    if isinstance(value, dict):
        exponents = _ints(_require(value, 'exponents', location), f"{location}.exponents")
        if len(exponents) != nvars:
            raise DocumentError(f"monomial needs {nvars} exponents", location)
        return Monomial(exponents, _fraction(value.get('coefficient', 1), f"{location}.coefficient"))
    text = str(value).replace(" ", "")
    sign = 1
    if text.startswith("-"):
        sign, text = -1, text[1:]
    coefficient = Fraction(sign)
    exponents = [0] * nvars
    for factor in text.split("*"):
        match = _FACTOR.match(factor)
        if match:
            index = int(match.group(1))
            if index >= nvars:
                raise DocumentError(f"variable x{index} out of range for {nvars} variables", location)
            exponents[index] += int(match.group(2) or 1)
        else:
            coefficient *= _fraction(factor, location)
    if coefficient == 0:
        return None
    return Monomial(tuple(exponents), coefficient)


def monomial_to_text(entry: Optional[Monomial]) -> Optional[str]:
    return None if entry is None else str(entry)


def parse_matrix(doc, nvars: int, location: str = "matrix") -> MonomialMatrix:
    grid = parse_grid(doc, nvars, location)
    source = doc.get('source')
    target = doc.get('target')
    try:
        return MonomialMatrix.from_grid(
            grid, nvars,
            _int_rows(source, f"{location}.source") if source is not None else None,
            _int_rows(target, f"{location}.target") if target is not None else None)
    except ToricError as exc:
        raise DocumentError(str(exc), location)


def parse_grid(doc, nvars: int, location: str = "matrix"):
    """The entry grid: a list of rows, all of the same length."""
    entries = _list(_require(doc, 'entries', location), f"{location}.entries")
    for i, row in enumerate(entries):
        _list(row, f"{location}.entries[{i}]")
        if len(row) != len(entries[0]):
            raise DocumentError(f"row has {len(row)} entries, the first row has {len(entries[0])}",
                                f"{location}.entries[{i}]")
    return tuple(tuple(parse_monomial(v, nvars, f"{location}.entries[{i}][{j}]") for j, v in enumerate(row))
                 for i, row in enumerate(entries))


def parse_matrix_document(doc: Dict[str, Any], location: str = "matrix"):
    """A ``matrix`` document: its variable count and entry grid, shifts left to be inferred."""
    nvars = _int(_require(doc, 'num_vars', location), f"{location}.num_vars")
    return nvars, parse_grid(doc, nvars, location)


def matrix_to_document(matrix: MonomialMatrix) -> Dict[str, Any]:
    return {
        'source': [_strs(s) for s in matrix.source.shifts],
        'target': [_strs(s) for s in matrix.target.shifts],
        'entries': [[monomial_to_text(e) for e in row] for row in matrix.entries],
    }


def parse_module(doc, nvars: int, location: str = "module") -> ModuleExpr:
    node = _require(doc, 'node', location)

    def child(key):
        return parse_module(_require(doc, key, location), nvars, f"{location}.{key}")

    def members():
        values = _list(_require(doc, 'members', location), f"{location}.members")
        return tuple(parse_module(v, nvars, f"{location}.members[{i}]") for i, v in enumerate(values))

    try:
        if node == 'free':
            return Free(FreeModuleSpec(nvars, _int_rows(_require(doc, 'shifts', location), f"{location}.shifts")))
        if node == 'image':
            return Image(parse_matrix(_require(doc, 'matrix', location), nvars, f"{location}.matrix"))
        if node == 'cokernel':
            return Cokernel(parse_matrix(_require(doc, 'matrix', location), nvars, f"{location}.matrix"))
        if node == 'kernel':
            modulo = child('modulo') if doc.get('modulo') is not None else None
            return Kernel(parse_matrix(_require(doc, 'matrix', location), nvars, f"{location}.matrix"), modulo)
        if node == 'zero':
            return ZeroIn(child('of'))
        if node == 'intersection':
            return Intersection(members())
        if node == 'sum':
            return Sum(members())
        if node == 'quotient':
            return QuotientBy(child('base'), child('sub'))
        if node == 'colon':
            return Colon(child('of'), _ints(_require(doc, 'monomial', location), f"{location}.monomial"))
        if node == 'saturation':
            ideal = MonomialIdeal(nvars, _int_rows(_require(doc, 'ideal', location), f"{location}.ideal"))
            within = child('within') if doc.get('within') is not None else None
            return Saturation(child('of'), ideal, within, _int(doc.get('max_power', 12), f"{location}.max_power"))
        if node == 'shift':
            return Shift(child('of'), _ints(_require(doc, 'degree', location), f"{location}.degree"))
    except DocumentError:
        raise
    except ToricError as exc:
        raise DocumentError(str(exc), location)
    raise DocumentError(f"unknown module node {node!r}", location)


def module_to_document(expr: ModuleExpr) -> Dict[str, Any]:
    if isinstance(expr, Free):
        return {'node': 'free', 'shifts': [_strs(s) for s in expr.spec.shifts]}
    if isinstance(expr, Image):
        return {'node': 'image', 'matrix': matrix_to_document(expr.matrix)}
    if isinstance(expr, Cokernel):
        return {'node': 'cokernel', 'matrix': matrix_to_document(expr.matrix)}
    if isinstance(expr, Kernel):
        doc = {'node': 'kernel', 'matrix': matrix_to_document(expr.matrix)}
        if expr.modulo is not None:
            doc['modulo'] = module_to_document(expr.modulo)
        return doc
    if isinstance(expr, ZeroIn):
        return {'node': 'zero', 'of': module_to_document(expr.expr)}
    if isinstance(expr, (Intersection, Sum)):
        return {'node': 'intersection' if isinstance(expr, Intersection) else 'sum',
                'members': [module_to_document(m) for m in expr.members]}
    if isinstance(expr, QuotientBy):
        return {'node': 'quotient', 'base': module_to_document(expr.base), 'sub': module_to_document(expr.sub)}
    if isinstance(expr, Colon):
        return {'node': 'colon', 'of': module_to_document(expr.expr), 'monomial': _strs(expr.exponents)}
    if isinstance(expr, Saturation):
        doc = {'node': 'saturation', 'of': module_to_document(expr.expr),
               'ideal': [_strs(g) for g in expr.ideal.generators], 'max_power': str(expr.max_power)}
        if expr.within is not None:
            doc['within'] = module_to_document(expr.within)
        return doc
    if isinstance(expr, Shift):
        return {'node': 'shift', 'of': module_to_document(expr.expr), 'degree': _strs(expr.degree)}
    raise DocumentError(f"cannot serialize {type(expr).__name__}")


def parse_module_document(doc: Dict[str, Any], location: str = "module"):
    """A ``module`` document: its setup (if any) and expression."""
    _mapping(doc, location)
    setup = parse_setup(doc['setup'], f"{location}.setup") if doc.get('setup') is not None else None
    nvars = setup.num_vars if setup is not None else _int(_require(doc, 'num_vars', location),
                                                          f"{location}.num_vars")
    return setup, parse_module(_require(doc, 'expr', location), nvars, f"{location}.expr")


def module_document(expr: ModuleExpr, setup: Optional[GradingSetup] = None) -> Dict[str, Any]:
    doc = _header('module')
    doc['num_vars'] = str(expr.ambient.nvars)
    doc['expr'] = module_to_document(expr)
    if setup is not None:
        doc['setup'] = setup_to_document(setup)
    return doc


def parse_decomposition(doc: Dict[str, Any], location: str = "decomposition"):
    """Setup, ambient module ``E``, submodule ``N`` and the proposed primary components."""
    setup = parse_setup(_require(doc, 'setup', location), f"{location}.setup")
    nvars = setup.num_vars
    module = parse_module(_require(doc, 'module', location), nvars, f"{location}.module")
    submodule = parse_module(_require(doc, 'submodule', location), nvars, f"{location}.submodule")
    components = []
    for i, entry in enumerate(_list(_require(doc, 'components', location), f"{location}.components")):
        where = f"{location}.components[{i}]"
        _mapping(entry, where)
        components.append(PrimaryComponent(
            parse_module(_require(entry, 'module', where), nvars, f"{where}.module"),
            frozenset(_ints(_require(entry, 'prime', where), f"{where}.prime")),
            str(entry.get('label', f"Q{i}"))))
    return setup, module, submodule, components


def decomposition_document(setup: GradingSetup, module: ModuleExpr, submodule: ModuleExpr,
                           components: Sequence[PrimaryComponent]) -> Dict[str, Any]:
    doc = _header('decomposition')
    doc.update({
        'setup': setup_to_document(setup),
        'module': module_to_document(module),
        'submodule': module_to_document(submodule),
        'components': [{'label': c.label, 'prime': _strs(sorted(c.prime)), 'module': module_to_document(c.module)}
                       for c in components],
    })
    return doc


def _verdict_doc(verdict: Verdict) -> Dict[str, Any]:
    return {'status': verdict.status,
            'degree': _strs(verdict.degree) if verdict.degree is not None else None,
            'witness': verdict.witness}


def report_to_document(report: DecompositionReport) -> Dict[str, Any]:
    doc = _header('report')
    doc.update({
        'title': report.title,
        'box': str(report.box),
        'overall': report.overall.status,
        'verdicts': {name: _verdict_doc(v) for name, v in report.verdicts.items()},
        'components': [{'label': c.label, 'prime': _strs(sorted(c.prime)),
                        'degenerate': c in report.degenerate} for c in report.components],
        'discarded': [{'label': c.label, 'prime': _strs(sorted(c.prime))} for c in report.discarded],
        'notes': list(report.notes),
        'table': [{k: str(v) for k, v in row.items()} for row in report.table.to_dict(orient='records')],
    })
    return doc


def _labels(doc: Dict[str, Any], key: str) -> List[str]:
    entries = _list(doc.get(key, []), f"report.{key}")
    return [str(_require(c, 'label', f"report.{key}[{i}]")) for i, c in enumerate(entries)]


def report_summary_from_document(doc: Dict[str, Any]) -> Dict[str, Any]:
    """Verdicts and component labels of a report document, for comparing runs."""
    check_header(doc, ('report',))
    verdicts = {}
    for name, v in _mapping(_require(doc, 'verdicts', 'report'), 'report.verdicts').items():
        where = f"report.verdicts.{name}"
        degree = _mapping(v, where).get('degree')
        verdicts[name] = Verdict(str(_require(v, 'status', where)), _ints(degree, where) if degree else None,
                                 v.get('witness'))
    return {
        'title': doc.get('title'),
        'box': _int(doc.get('box', 0), 'report.box'),
        'verdicts': verdicts,
        'components': _labels(doc, 'components'),
        'discarded': _labels(doc, 'discarded'),
        'table': pd.DataFrame(_list(doc.get('table', []), 'report.table')),
    }
