import unittest
import os
import sys
import tempfile
from fractions import Fraction

import yaml

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.cox_ring import Monomial, MonomialIdeal
from src.decomposition import FAILED, PrimaryComponent, Verdict, verify_decomposition
from src.documents import (SCHEMA_VERSION, check_header, decomposition_document, dump_document, fan_to_document,
                           ideal_to_document, load_document, module_document, parse_decomposition, parse_fan,
                           parse_ideal, parse_matrix, parse_matrix_document, parse_module,
                           parse_module_document, parse_monomial, parse_setup, report_summary_from_document,
                           report_to_document)
from src.errors import DocumentError
from src.fan import projective_plane
from src.modules import Free, FreeModuleSpec, Saturation, degree_box, same_module_at
from src.worked_examples import p2_cubic_example


class TestHeaders(unittest.TestCase):
    def test_version_and_kind(self):
        self.assertEqual(check_header({'version': SCHEMA_VERSION, 'kind': 'fan'}, ('fan',)), 'fan')
        with self.assertRaises(DocumentError):
            check_header({'version': '2', 'kind': 'fan'}, ('fan',))
        with self.assertRaises(DocumentError):
            check_header({'version': SCHEMA_VERSION, 'kind': 'ideal'}, ('fan', 'module'))
        with self.assertRaises(DocumentError):
            check_header(['not', 'a', 'mapping'], ('fan',))

    def test_load_missing_file(self):
        with self.assertRaises(DocumentError) as context:
            load_document('/nonexistent/fan.yaml')
        self.assertEqual(context.exception.location, '/nonexistent/fan.yaml')

    def test_load_and_dump(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'ideal.yaml')
            dump_document(ideal_to_document(MonomialIdeal(2, ((2, 0), (1, 1)))), path)
            doc = load_document(path)
        self.assertEqual(parse_ideal(doc), MonomialIdeal(2, ((2, 0), (1, 1))))


class TestFansAndSetups(unittest.TestCase):
    def test_builtin_name(self):
        self.assertEqual(parse_fan('P2').num_rays, 3)
        with self.assertRaises(DocumentError) as context:
            parse_fan('P7', 'input.fan')
        self.assertEqual(context.exception.location, 'input.fan')

    def test_fan_document(self):
        doc = yaml.safe_load(dump_document(fan_to_document(projective_plane())))
        fan = parse_fan(doc)
        self.assertEqual([r.vector for r in fan.rays], [(1, 0), (0, 1), (-1, -1)])
        self.assertEqual(len(fan.maximal_cones), 3)

    def test_invalid_fan_is_a_document_error(self):
        doc = {'ambient_dim': 2, 'rays': [[2, 0], [0, 1]], 'max_cones': [[0, 1]]}
        with self.assertRaises(DocumentError):
            parse_fan(doc)

    def test_integers_as_strings(self):
        doc = {'ambient_dim': '1', 'rays': [['1'], ['-1']], 'max_cones': [['0'], ['1']]}
        self.assertEqual(parse_fan(doc).ambient_dim, 1)
        with self.assertRaises(DocumentError):
            parse_fan({'ambient_dim': True, 'rays': [], 'max_cones': []})

    def test_explicit_grading(self):
        doc = {'kind': 'grading', 'num_vars': 4, 'class_matrix': [[1, -1, -1, 1]],
               'irrelevant': [[0, 0, 0, 0]]}
        setup = parse_setup(doc)
        self.assertIsNone(setup.fan)
        self.assertEqual(setup.class_degree((1, 1, 0, 0)), (0,))
        with self.assertRaises(DocumentError):
            parse_setup({'kind': 'grading', 'num_vars': 4})


class TestMonomialsAndMatrices(unittest.TestCase):
    def test_monomial_text(self):
        self.assertEqual(parse_monomial("-3/2*x0^2*x1", 3, "m"), Monomial((2, 1, 0), Fraction(-3, 2)))
        self.assertEqual(parse_monomial("x2", 3, "m"), Monomial((0, 0, 1)))
        self.assertEqual(parse_monomial("-1", 3, "m"), Monomial((0, 0, 0), -1))
        self.assertIsNone(parse_monomial("0", 3, "m"))
        self.assertIsNone(parse_monomial(None, 3, "m"))

    def test_monomial_mapping(self):
        value = {'coefficient': '7', 'exponents': ['1', '0']}
        self.assertEqual(parse_monomial(value, 2, "m"), Monomial((1, 0), 7))
        with self.assertRaises(DocumentError):
            parse_monomial({'exponents': [1]}, 2, "m")

    def test_variable_out_of_range(self):
        with self.assertRaises(DocumentError) as context:
            parse_monomial("x5", 3, "matrix.entries[0][1]")
        self.assertEqual(context.exception.location, "matrix.entries[0][1]")

    def test_matrix_shifts(self):
        matrix = parse_matrix({'entries': [['x1', 'x2'], ['x0*x1', None]]}, 3)
        self.assertEqual(matrix.shape, (2, 2))
        explicit = parse_matrix({'entries': [['x0']], 'source': [[1, 0]], 'target': [[0, 0]]}, 2)
        self.assertEqual(explicit.source.shifts, ((1, 0),))
        with self.assertRaises(DocumentError):
            parse_matrix({'entries': [['x0']], 'source': [[0, 1]], 'target': [[0, 0]]}, 2)

    def test_matrix_document(self):
        nvars, grid = parse_matrix_document({'num_vars': 2, 'entries': [['x0', 'x1']]})
        self.assertEqual(nvars, 2)
        self.assertEqual(grid, ((Monomial((1, 0)), Monomial((0, 1))),))


class TestModules(unittest.TestCase):
    def test_unknown_node(self):
        with self.assertRaises(DocumentError) as context:
            parse_module({'node': 'tensor'}, 2, 'module.expr')
        self.assertEqual(context.exception.location, 'module.expr')

    def test_module_document_reparses(self):
        example = p2_cubic_example()
        doc = yaml.safe_load(dump_document(module_document(example.module, example.setup)))
        setup, expr = parse_module_document(doc)
        self.assertEqual(setup.num_vars, 3)
        for a in degree_box(expr.ambient, 2):
            self.assertTrue(same_module_at(expr, example.module, a))

    def test_saturation_node(self):
        doc = {'node': 'saturation', 'ideal': [[1, 0], [0, 1]], 'max_power': 6,
               'of': {'node': 'image', 'matrix': {'entries': [['x0^2', 'x0*x1']]}}}
        expr = parse_module(doc, 2)
        self.assertIsInstance(expr, Saturation)
        self.assertEqual(expr.max_power, 6)

    def test_decomposition_document(self):
        example = p2_cubic_example()
        doc = decomposition_document(example.setup, example.module, example.submodule, example.components)
        setup, module, submodule, components = parse_decomposition(yaml.safe_load(dump_document(doc)))
        self.assertEqual([c.label for c in components], ['F0', 'F1', 'F2'])
        self.assertEqual(components[1].prime, frozenset({1}))
        self.assertEqual(setup.class_group.describe(), "Z")


class TestReports(unittest.TestCase):
    def test_report_summary(self):
        S = Free(FreeModuleSpec.zeros(2, 1))
        I = parse_module({'node': 'image', 'matrix': {'entries': [['x0^2', 'x0*x1']]}}, 2)
        Q = parse_module({'node': 'image', 'matrix': {'entries': [['x0']]}}, 2)
        report = verify_decomposition(S, I, [PrimaryComponent(Q, frozenset({0}), "Q0")], box=2, k_max=6)
        report.verdicts['extra'] = Verdict.failed((1, 0), "planted")
        doc = yaml.safe_load(dump_document(report_to_document(report)))
        summary = report_summary_from_document(doc)
        self.assertEqual(summary['box'], 2)
        self.assertEqual(summary['components'], ['Q0'])
        self.assertEqual(summary['verdicts']['extra'], Verdict(FAILED, (1, 0), "planted"))
        self.assertEqual(set(summary['verdicts']), set(report.verdicts))
        self.assertEqual(len(summary['table']), len(report.table))


if __name__ == '__main__':
    unittest.main()
