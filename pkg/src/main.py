"""Command-line front end.

    python -m src.main classgroup P2
    python -m src.main example p2-cubic --box 6
    python -m src.main decompose verify decomposition.yaml --format structured

Exit codes: 0 every check verified in the box, 1 a check failed (the
witness is printed), 2 inconclusive, 64 usage or input error.
"""
import argparse
import logging
import os
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.config import OUTPUT_FORMATS, Config
from src.cox_ring import (GradingSetup, associated_primes, format_monomial, irreducible_decomposition,
                          minimal_primes, setup_from_fan)
from src.decomposition import (EXIT_CODES, DecompositionReport, Verdict, combine, descent_report,
                               minors_all_monomial, sheafification_zero)
from src.documents import (check_header, decomposition_document, dump_document, ideal_to_document, load_document,
                           parse_decomposition, parse_fan, parse_ideal, parse_matrix_document,
                           parse_module_document, parse_setup, report_summary_from_document, report_to_document,
                           setup_to_document)
from src.errors import ToricError
from src.fan import (BUILTIN_FANS, Fan, cone_dimension, cone_volume, is_complete_in_box, is_simplicial,
                     is_simplicial_fan, is_smooth, is_smooth_fan, orbit_dimension)
from src.ishida import omega_decomposition_check
from src.log import OK, setup_logging
from src.modules import degree_box, dims_frame, equivariant_shifts, piece
from src.worked_examples import (EXAMPLES, cubic_support_resolution, run_cubic_suite, run_degenerate_suite,
                                 run_resolution_suite)

logger = logging.getLogger("src.main")

EXIT_USAGE = 64


class UsageError(Exception):
    pass


class ToricArgumentParser(argparse.ArgumentParser):
    """Reports bad command lines as :class:`UsageError` instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class CommandResult:
    text: str
    exit_code: int = 0
    document: Optional[Dict[str, Any]] = None
    frame: Optional[pd.DataFrame] = None


def _degree(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _degrees_text(degrees: Sequence[Sequence[int]]) -> str:
    if all(len(d) == 1 for d in degrees):
        return "(" + ",".join(str(d[0]) for d in degrees) + ")"
    return "(" + ", ".join("(" + ",".join(map(str, d)) + ")" for d in degrees) + ")"


def _blank_if_none(value):
    return '' if value is None else value


def _verdict_document(kind: str, verdict: Verdict, **extra) -> Dict[str, Any]:
    doc = {'version': '1', 'kind': 'report', 'title': kind, 'overall': verdict.status,
           'verdicts': {kind: {'status': verdict.status,
                               'degree': [str(x) for x in verdict.degree] if verdict.degree else None,
                               'witness': verdict.witness}}}
    doc.update(extra)
    return doc


class DecompositionWorkbench:
    def __init__(self, config: Config):
        self.config = config
        self.engine = config.engine
        self.jobs = config.runner.jobs
        logger.debug("configuration %s", config.to_dict())

    def load_setup(self, source: str) -> GradingSetup:
        """A built-in fan name or a fan/grading document."""
        if source in BUILTIN_FANS:
            return setup_from_fan(BUILTIN_FANS[source]())
        doc = load_document(source)
        check_header(doc, ('fan', 'grading'), source)
        return parse_setup(doc, source)

    def load_fan(self, source: str) -> Fan:
        if source in BUILTIN_FANS:
            return BUILTIN_FANS[source]()
        doc = load_document(source)
        check_header(doc, ('fan',), source)
        return parse_fan(doc, source)

    def fan_info(self, source: str) -> CommandResult:
        fan = self.load_fan(source)
        setup = setup_from_fan(fan)
        complete = is_complete_in_box(fan, self.engine.chart_box)
        lines = [
            fan.describe(),
            f"dimension: {fan.ambient_dim}",
            f"rays: {fan.num_rays}, maximal cones: {len(fan.maximal_cones)}, cones: {len(fan.all_cones)}",
            f"simplicial: {'yes' if is_simplicial_fan(fan) else 'no'}",
            f"smooth: {'yes' if is_smooth_fan(fan) else 'no'}",
            f"complete in box {self.engine.chart_box}: {'yes' if complete else 'no'}",
            f"class group: {setup.class_group.describe()}",
        ]
        return CommandResult("\n".join(lines), 0, setup_to_document(setup))

    def fan_faces(self, source: str) -> CommandResult:
        fan = self.load_fan(source)
        frame = pd.DataFrame([{
            'cone': cone.label(),
            'dim': cone_dimension(fan, cone),
            'orbit_dim': orbit_dimension(fan, cone),
            'simplicial': is_simplicial(fan, cone),
            'smooth': is_smooth(fan, cone),
            'index': _blank_if_none(cone_volume(fan, cone)),
        } for cone in fan.all_cones])
        doc = {'version': '1', 'kind': 'report', 'title': f"faces of {fan.name}",
               'table': [{k: str(v) for k, v in row.items()} for row in frame.to_dict(orient='records')]}
        return CommandResult(frame.to_string(index=False), 0, doc, frame)

    def classgroup(self, source: str) -> CommandResult:
        setup = self.load_setup(source)
        text = f"{setup.class_group.describe()}, degrees {_degrees_text(setup.class_of_var)}"
        doc = setup_to_document(setup)
        doc['class_of_var'] = [[str(x) for x in c] for c in setup.class_of_var]
        return CommandResult(text, 0, doc)

    def irrelevant(self, source: str) -> CommandResult:
        setup = self.load_setup(source)
        doc = ideal_to_document(setup.irrelevant)
        return CommandResult(f"B = {setup.irrelevant}", 0, doc)

    def matrix_check(self, source: str) -> CommandResult:
        doc = load_document(source)
        check_header(doc, ('matrix',), source)
        nvars, grid = parse_matrix_document(doc, source)
        shifts = equivariant_shifts(grid, nvars)
        monomial = minors_all_monomial(grid, nvars, self.engine.minor_bound)
        if shifts is not None:
            target, sources = shifts
            equivariance = Verdict.verified(f"target {_degrees_text(target)}, source {_degrees_text(sources)}")
        else:
            equivariance = Verdict.failed(None, "no consistent fine shifts for the entries")
        minors = Verdict.verified() if monomial else Verdict.failed(None, "some minor is not a monomial")
        verdicts = {'equivariant shifts': equivariance, 'monomial minors': minors}
        if (shifts is not None) != monomial:
            logger.warning("equivariance and monomial minors disagree")
        overall = combine(verdicts.values())
        lines = [f"{name}: {v.describe()}" for name, v in verdicts.items()]
        out = _verdict_document('matrix check', overall)
        out['verdicts'] = {name: {'status': v.status, 'degree': None, 'witness': v.witness}
                           for name, v in verdicts.items()}
        return CommandResult("\n".join(lines), overall.exit_code, out)

    def module_piece(self, source: str, degree: Optional[tuple]) -> CommandResult:
        doc = load_document(source)
        check_header(doc, ('module',), source)
        setup, expr = parse_module_document(doc, source)
        if degree is None:
            frame = dims_frame(expr, degree_box(expr.ambient, self.engine.box), setup, self.jobs)
            frame['degree'] = frame['degree'].map(lambda d: ",".join(map(str, d)))
            out = {'version': '1', 'kind': 'report', 'title': f"pieces of {expr.describe()}",
                   'box': str(self.engine.box),
                   'table': [{k: str(v) for k, v in row.items()} for row in frame.to_dict(orient='records')]}
            return CommandResult(frame.to_string(index=False), 0, out, frame)
        if len(degree) != expr.ambient.nvars:
            raise UsageError(f"--degree needs {expr.ambient.nvars} entries, got {len(degree)}")
        p = piece(expr, degree)
        lines = [f"degree {list(degree)}: dim {p.dim}",
                 f"ambient basis: {', '.join(f'e{i}*{format_monomial(m)}' for i, m in p.basis) or 'none'}",
                 f"span {len(p.span)}, relations {len(p.relations)}"]
        if p.witness() is not None:
            lines.append(f"witness: {p.describe_vector(p.witness())}")
        out = {'version': '1', 'kind': 'report', 'title': 'module piece',
               'degree': [str(x) for x in degree], 'dim': str(p.dim)}
        return CommandResult("\n".join(lines), 0, out)

    def sheaf_zero_test(self, source: str) -> CommandResult:
        doc = load_document(source)
        check_header(doc, ('module',), source)
        setup, expr = parse_module_document(doc, source)
        if setup is None:
            raise UsageError(f"{source}: a module document needs a 'setup' for the sheaf test")
        verdict = sheafification_zero(expr, setup, self.engine.chart_box, self.engine.k_max, self.jobs)
        if verdict.ok:
            text = "B-torsion: sheafification zero"
        elif verdict.status == 'failed':
            text = f"sheafification nonzero: {verdict.witness} at degree {list(verdict.degree)}"
        else:
            text = f"inconclusive: {verdict.witness}"
        return CommandResult(text, verdict.exit_code, _verdict_document('sheaf zero-test', verdict))

    def decompose_verify(self, source: str) -> CommandResult:
        doc = load_document(source)
        check_header(doc, ('decomposition',), source)
        setup, module, submodule, components = parse_decomposition(doc, source)
        report = descent_report(setup, module, submodule, components, self.engine.box, self.engine.k_max,
                                self.engine.minor_bound, self.engine.chart_box, self.jobs,
                                title=os.path.basename(source))
        return self.report_result(report)

    def decompose_export(self, name: str) -> CommandResult:
        """A built-in example as a decomposition document, ready to edit and verify."""
        example = EXAMPLES[name]()
        doc = decomposition_document(example.setup, example.module, example.submodule, example.components)
        return CommandResult(dump_document(doc).rstrip("\n"), 0, doc)

    def report_compare(self, first: str, second: str) -> CommandResult:
        """Whether two structured reports agree on every verdict, component and table row."""
        summaries = []
        for source in (first, second):
            doc = load_document(source)
            check_header(doc, ('report',), source)
            summaries.append(report_summary_from_document(doc))
        a, b = summaries
        differences = []
        for key in ('box', 'components', 'discarded'):
            if a[key] != b[key]:
                differences.append(f"{key}: {a[key]} vs {b[key]}")
        for name in sorted(set(a['verdicts']) | set(b['verdicts'])):
            left, right = a['verdicts'].get(name), b['verdicts'].get(name)
            if left != right:
                differences.append(f"{name}: {left.describe() if left else 'missing'} vs "
                                   f"{right.describe() if right else 'missing'}")
        if not a['table'].equals(b['table']):
            differences.append("certificate tables differ")
        verdict = Verdict.failed(None, "; ".join(differences)) if differences else \
            Verdict.verified(f"{len(a['verdicts'])} checks")
        lines = ["reports agree" if verdict.ok else "reports differ"] + [f"   {d}" for d in differences]
        return CommandResult("\n".join(lines), verdict.exit_code, _verdict_document('report compare', verdict))

    def omega_check(self, source: str) -> CommandResult:
        fan = self.load_fan(source)
        report = omega_decomposition_check(fan, self.engine.box, self.engine.k_max, self.engine.chart_box,
                                           self.engine.minor_bound, self.jobs)
        return self.report_result(report)

    def ideal_decompose(self, source: str) -> CommandResult:
        doc = load_document(source)
        check_header(doc, ('ideal',), source)
        ideal = parse_ideal(doc, source)
        components = irreducible_decomposition(ideal)
        primes = associated_primes(ideal)
        minimal = set(minimal_primes(ideal))
        frame = pd.DataFrame([{
            'prime': "<" + ", ".join(f"x{v}" for v in sorted(p)) + ">",
            'witness': format_monomial(w),
            'minimal': p in minimal,
        } for p, w in sorted(primes.items(), key=lambda item: (len(item[0]), sorted(item[0])))])
        lines = [f"I = {ideal}", "irreducible components:"]
        lines += [f"   {i}. {c}" for i, c in enumerate(components, 1)]
        out = ideal_to_document(ideal)
        out['components'] = [[[str(e) for e in g] for g in c.generators] for c in components]
        out['associated_primes'] = [[str(v) for v in sorted(p)] for p in primes]
        return CommandResult("\n".join(lines), 0, out, frame)

    def example(self, name: str, z1: int = 1, z2: int = 2, w1: int = 0, w2: int = 1) -> CommandResult:
        engine = self.engine
        if name == 'p2-cubic':
            report = run_cubic_suite(None, engine.box, engine.k_max, engine.minor_bound,
                                     engine.saturation_max_power, self.jobs)
        elif name == 'cubic':
            report = run_resolution_suite(cubic_support_resolution(z1, z2, w1, w2), engine.box, engine.k_max,
                                          self.jobs)
        else:
            report = run_degenerate_suite(EXAMPLES[name](), engine.box, engine.k_max, engine.minor_bound,
                                          engine.chart_box, self.jobs)
        return self.report_result(report)

    def report_result(self, report: DecompositionReport) -> CommandResult:
        text = report.render()
        if not report.table.empty:
            text += "\n\nCERTIFICATE:\n" + report.table.to_string(index=False)
        return CommandResult(text, report.exit_code, report_to_document(report), report.verdict_frame())

    def display(self, result: CommandResult, output_format: str, output: Optional[str] = None):
        """Render a result in the chosen format to ``output`` or stdout."""
        if output_format == 'structured':
            text = dump_document(result.document or {'version': '1', 'kind': 'report', 'text': result.text})
        elif output_format == 'csv':
            frame = result.frame if result.frame is not None else pd.DataFrame([{'result': result.text}])
            text = frame.to_csv(index=False)
        else:
            text = result.text
        if output:
            with open(output, 'w') as file:
                file.write(text if text.endswith("\n") else text + "\n")
            logger.info("wrote %s", output, extra=OK)
        else:
            print(text)


def _common_options() -> argparse.ArgumentParser:
    common = ToricArgumentParser(add_help=False)
    common.add_argument('--box', type=int, help='total fine-degree bound for degree sweeps')
    common.add_argument('--k-max', dest='k_max', type=int, help='localization power bound')
    common.add_argument('--jobs', type=int, help='parallel workers for degree and chart sweeps')
    common.add_argument('--format', dest='output_format', choices=OUTPUT_FORMATS, help='output format')
    common.add_argument('--output', help='write the result to this path instead of stdout')
    common.add_argument('--config', help='YAML configuration file')
    common.add_argument('--log-level', dest='log_level', help='DEBUG, INFO or WARNING')
    return common


def build_parser() -> ToricArgumentParser:
    common = _common_options()
    parser = ToricArgumentParser(prog='toric-decompose', description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    def leaf(group, name, help_text, source_help=None):
        sub = group.add_parser(name, help=help_text, parents=[common])
        if source_help:
            sub.add_argument('source', help=source_help)
        return sub

    fan = commands.add_parser('fan', help='fan summaries')
    fan_commands = fan.add_subparsers(dest='action', metavar='action')
    fan_commands.required = True
    leaf(fan_commands, 'info', 'rays, cones, smoothness and class group', 'fan document or built-in name')
    leaf(fan_commands, 'faces', 'every cone with its dimension', 'fan document or built-in name')

    leaf(commands, 'classgroup', 'class group and variable degrees', 'fan/grading document or built-in name')
    leaf(commands, 'irrelevant', 'irrelevant ideal B', 'fan/grading document or built-in name')

    matrix = commands.add_parser('matrix', help='monomial matrices')
    matrix_commands = matrix.add_subparsers(dest='action', metavar='action')
    matrix_commands.required = True
    leaf(matrix_commands, 'check', 'equivariance and monomial minors', 'matrix document')

    module = commands.add_parser('module', help='module expressions')
    module_commands = module.add_subparsers(dest='action', metavar='action')
    module_commands.required = True
    piece_parser = leaf(module_commands, 'piece', 'graded pieces of a module', 'module document')
    piece_parser.add_argument('--degree', type=_degree, help='fine degree, e.g. 1,0,2; omit for the box')

    sheaf = commands.add_parser('sheaf', help='sheafification')
    sheaf_commands = sheaf.add_subparsers(dest='action', metavar='action')
    sheaf_commands.required = True
    leaf(sheaf_commands, 'zero-test', 'whether a module sheafifies to zero', 'module document with setup')

    decompose = commands.add_parser('decompose', help='primary decompositions')
    decompose_commands = decompose.add_subparsers(dest='action', metavar='action')
    decompose_commands.required = True
    leaf(decompose_commands, 'verify', 'verify and descend user-supplied components', 'decomposition document')
    export = leaf(decompose_commands, 'export', 'write a built-in example as a decomposition document')
    export.add_argument('name', choices=sorted(EXAMPLES))

    omega = commands.add_parser('omega', help='Zariski 1-forms')
    omega_commands = omega.add_subparsers(dest='action', metavar='action')
    omega_commands.required = True
    leaf(omega_commands, 'check', 'decomposition of Omega into the F_rho', 'fan document or built-in name')

    ideal = commands.add_parser('ideal', help='monomial ideals')
    ideal_commands = ideal.add_subparsers(dest='action', metavar='action')
    ideal_commands.required = True
    leaf(ideal_commands, 'decompose', 'irreducible components and associated primes', 'ideal document')

    report = commands.add_parser('report', help='structured reports')
    report_commands = report.add_subparsers(dest='action', metavar='action')
    report_commands.required = True
    compare = leaf(report_commands, 'compare', 'whether two structured reports agree')
    compare.add_argument('first', help='report document')
    compare.add_argument('second', help='report document')

    example = leaf(commands, 'example', 'built-in worked examples')
    example.add_argument('name', choices=sorted(EXAMPLES) + ['cubic'])
    for variable, default in (('z1', 1), ('z2', 2), ('w1', 0), ('w2', 1)):
        example.add_argument(f'--{variable}', type=int, default=default, help='coordinate index for cubic')
    return parser


def dispatch(workbench: DecompositionWorkbench, args: argparse.Namespace) -> CommandResult:
    command = (args.command, getattr(args, 'action', None))
    if command == ('fan', 'info'):
        return workbench.fan_info(args.source)
    if command == ('fan', 'faces'):
        return workbench.fan_faces(args.source)
    if args.command == 'classgroup':
        return workbench.classgroup(args.source)
    if args.command == 'irrelevant':
        return workbench.irrelevant(args.source)
    if command == ('matrix', 'check'):
        return workbench.matrix_check(args.source)
    if command == ('module', 'piece'):
        return workbench.module_piece(args.source, args.degree)
    if command == ('sheaf', 'zero-test'):
        return workbench.sheaf_zero_test(args.source)
    if command == ('decompose', 'verify'):
        return workbench.decompose_verify(args.source)
    if command == ('decompose', 'export'):
        return workbench.decompose_export(args.name)
    if command == ('report', 'compare'):
        return workbench.report_compare(args.first, args.second)
    if command == ('omega', 'check'):
        return workbench.omega_check(args.source)
    if command == ('ideal', 'decompose'):
        return workbench.ideal_decompose(args.source)
    if args.command == 'example':
        return workbench.example(args.name, args.z1, args.z2, args.w1, args.w2)
    raise UsageError(f"unknown command {' '.join(c for c in command if c)}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    try:
        args = build_parser().parse_args(argv)
        config = Config(args.config).override(box=args.box, k_max=args.k_max, jobs=args.jobs,
                                              output_format=args.output_format, log_level=args.log_level)
        setup_logging(config.runner.log_level)
        workbench = DecompositionWorkbench(config)
        result = dispatch(workbench, args)
        workbench.display(result, config.runner.output_format, args.output)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    except (UsageError, ToricError, OSError) as exc:
        print(f"[!] {exc}", file=sys.stderr)
        return EXIT_USAGE
    if result.exit_code not in EXIT_CODES.values():
        return EXIT_USAGE
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
