import unittest
import io
import os
import sys
import tempfile
from contextlib import redirect_stderr, redirect_stdout

import yaml

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.cox_ring import MonomialIdeal, setup_from_fan
from src.documents import dump_document, ideal_to_document, module_document
from src.fan import projective_plane
from src.main import EXIT_USAGE, main
from src.modules import Free, FreeModuleSpec, Image, MonomialMatrix, QuotientBy
from src.worked_examples import mono, unit


class TestCommandLine(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.config = self.path('config.yaml')
        with open(self.config, 'w') as file:
            file.write("engine:\n  box: 2\n  k_max: 6\n  chart_box: 1\nrunner:\n  log_level: WARNING\n")

    def tearDown(self):
        self.directory.cleanup()

    def path(self, name):
        return os.path.join(self.directory.name, name)

    def run_cli(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv) + ['--config', self.config])
        return code, out.getvalue(), err.getvalue()

    def test_classgroup(self):
        code, out, _ = self.run_cli('classgroup', 'P2')
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), "Z, degrees (1,1,1)")
        code, out, _ = self.run_cli('classgroup', 'quadric-cone')
        self.assertEqual(out.strip(), "Z/2, degrees (1,1)")

    def test_irrelevant_ideal(self):
        code, out, _ = self.run_cli('irrelevant', 'P2')
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), "B = <x0, x1, x2>")

    def test_usage_errors(self):
        self.assertEqual(self.run_cli('frobnicate')[0], EXIT_USAGE)
        self.assertEqual(self.run_cli('fan')[0], EXIT_USAGE)
        code, _, err = self.run_cli('ideal', 'decompose', self.path('missing.yaml'))
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("[!]", err)

    def test_wrong_document_kind(self):
        source = self.path('ideal.yaml')
        dump_document(ideal_to_document(MonomialIdeal(2, ((1, 0),))), source)
        self.assertEqual(self.run_cli('matrix', 'check', source)[0], EXIT_USAGE)

    def test_ideal_decompose_structured(self):
        source = self.path('ideal.yaml')
        dump_document(ideal_to_document(MonomialIdeal(2, ((2, 0), (1, 1)))), source)
        code, out, _ = self.run_cli('ideal', 'decompose', source, '--format', 'structured')
        self.assertEqual(code, 0)
        doc = yaml.safe_load(out)
        self.assertEqual(doc['kind'], 'ideal')
        self.assertEqual(len(doc['components']), 2)
        self.assertEqual(sorted(doc['associated_primes']), [['0'], ['0', '1']])

    def test_matrix_check_exit_codes(self):
        good, bad = self.path('good.yaml'), self.path('bad.yaml')
        dump_document({'version': '1', 'kind': 'matrix', 'num_vars': '3',
                       'entries': [['x1', 'x2'], ['x0*x1', None]]}, good)
        dump_document({'version': '1', 'kind': 'matrix', 'num_vars': '2',
                       'entries': [['x0', 'x1'], ['x1', 'x0']]}, bad)
        self.assertEqual(self.run_cli('matrix', 'check', good)[0], 0)
        code, out, _ = self.run_cli('matrix', 'check', bad)
        self.assertEqual(code, 1)
        self.assertIn("monomial minors: failed", out)

    def test_sheaf_zero_test(self):
        setup = setup_from_fan(projective_plane())
        S = Free(FreeModuleSpec.zeros(3, 1))
        variables = MonomialMatrix(FreeModuleSpec(3, (unit(0), unit(1), unit(2))), S.spec,
                                   ((mono(0), mono(1), mono(2)),))
        torsion = self.path('torsion.yaml')
        dump_document(module_document(QuotientBy(S, Image(variables)), setup), torsion)
        code, out, _ = self.run_cli('sheaf', 'zero-test', torsion)
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), "B-torsion: sheafification zero")

        structure = self.path('structure.yaml')
        dump_document(module_document(S, setup), structure)
        self.assertEqual(self.run_cli('sheaf', 'zero-test', structure)[0], 1)

    def test_sheaf_test_needs_setup(self):
        source = self.path('bare.yaml')
        dump_document(module_document(Free(FreeModuleSpec.zeros(2, 1))), source)
        self.assertEqual(self.run_cli('sheaf', 'zero-test', source)[0], EXIT_USAGE)

    def test_module_piece(self):
        source = self.path('free.yaml')
        dump_document(module_document(Free(FreeModuleSpec.zeros(2, 1))), source)
        code, out, _ = self.run_cli('module', 'piece', source, '--degree', '1,2')
        self.assertEqual(code, 0)
        self.assertIn("dim 1", out)
        self.assertEqual(self.run_cli('module', 'piece', source, '--degree', '1,2,3')[0], EXIT_USAGE)

    def test_fan_faces_csv_to_file(self):
        target = self.path('faces.csv')
        code, out, _ = self.run_cli('fan', 'faces', 'P2', '--format', 'csv', '--output', target)
        self.assertEqual(code, 0)
        self.assertEqual(out, "")
        with open(target) as file:
            lines = file.read().strip().splitlines()
        self.assertEqual(lines[0], "cone,dim,orbit_dim,simplicial,smooth,index")
        self.assertEqual(len(lines), 8)

    def test_example_quadric_cone(self):
        code, out, _ = self.run_cli('example', 'quadric-cone')
        self.assertEqual(code, 0)
        self.assertIn("sheafifies to zero", out)

    def test_fan_info_completeness(self):
        code, out, _ = self.run_cli('fan', 'info', 'P2')
        self.assertEqual(code, 0)
        self.assertIn("complete in box 1: yes", out)
        code, out, _ = self.run_cli('fan', 'info', 'quadric-cone')
        self.assertIn("complete in box 1: no", out)

    def test_fan_faces_index_column(self):
        code, out, _ = self.run_cli('fan', 'faces', 'quadric-cone', '--format', 'csv')
        self.assertEqual(code, 0)
        rows = out.strip().splitlines()
        self.assertTrue(rows[0].endswith(",index"))
        self.assertIn("2", [row.split(",")[-1] for row in rows[1:]])

    def test_example_z_graded(self):
        code, out, _ = self.run_cli('example', 'z-graded-4var')
        self.assertEqual(code, 0)
        self.assertIn("sheafifies to zero", out)

    def test_example_p2_cubic(self):
        code, out, _ = self.run_cli('example', 'p2-cubic')
        self.assertEqual(code, 0)
        self.assertIn("hilbert function", out)

    def test_example_output_independent_of_jobs(self):
        code, serial, _ = self.run_cli('example', 'p2-cubic', '--jobs', '1')
        self.assertEqual(code, 0)
        code, parallel, _ = self.run_cli('example', 'p2-cubic', '--jobs', '8')
        self.assertEqual(code, 0)
        self.assertEqual(serial.encode(), parallel.encode())

    def test_structured_reports_compare(self):
        first, second = self.path('serial.yaml'), self.path('parallel.yaml')
        for target, jobs in ((first, '1'), (second, '8')):
            code, _, _ = self.run_cli('example', 'p2-cubic', '--jobs', jobs, '--format', 'structured',
                                      '--output', target)
            self.assertEqual(code, 0)
        with open(first, 'rb') as a, open(second, 'rb') as b:
            self.assertEqual(a.read(), b.read())
        code, out, _ = self.run_cli('report', 'compare', first, second)
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), "reports agree")

    def test_reports_of_different_examples_differ(self):
        first, second = self.path('cubic.yaml'), self.path('cone.yaml')
        self.run_cli('example', 'p2-cubic', '--format', 'structured', '--output', first)
        self.run_cli('example', 'quadric-cone', '--format', 'structured', '--output', second)
        code, out, _ = self.run_cli('report', 'compare', first, second)
        self.assertEqual(code, 1)
        self.assertTrue(out.startswith("reports differ"))
        self.assertEqual(self.run_cli('report', 'compare', first, self.path('missing.yaml'))[0], EXIT_USAGE)

    def test_exported_decomposition_verifies(self):
        target = self.path('cubic.yaml')
        code, _, _ = self.run_cli('decompose', 'export', 'p2-cubic', '--output', target)
        self.assertEqual(code, 0)
        with open(target) as file:
            self.assertEqual(yaml.safe_load(file)['kind'], 'decomposition')
        code, out, _ = self.run_cli('decompose', 'verify', target)
        self.assertEqual(code, 0)
        self.assertIn("intersection", out)

    def test_omega_check(self):
        code, out, _ = self.run_cli('omega', 'check', 'P1')
        self.assertEqual(code, 0)
        self.assertIn("OMEGA OF P1", out)

    def test_ragged_matrix_is_a_document_error(self):
        source = self.path('ragged.yaml')
        dump_document({'version': '1', 'kind': 'matrix', 'num_vars': '2',
                       'entries': [['x0', 'x1'], ['x1']]}, source)
        code, _, err = self.run_cli('matrix', 'check', source)
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("[!]", err)
        self.assertIn("entries[1]", err)

    def test_malformed_documents_exit_with_usage(self):
        exported = self.path('export.yaml')
        self.run_cli('decompose', 'export', 'quadric-cone', '--output', exported)
        with open(exported) as file:
            doc = yaml.safe_load(file)
        for field, value in (('setup', 5), ('components', 'Q'), ('module', ['free'])):
            broken = dict(doc, **{field: value})
            source = self.path(f'broken-{field}.yaml')
            dump_document(broken, source)
            code, _, err = self.run_cli('decompose', 'verify', source)
            self.assertEqual(code, EXIT_USAGE, field)
            self.assertIn(os.path.basename(source), err)
            self.assertIn("[!]", err)

        matrix = self.path('flat.yaml')
        dump_document({'version': '1', 'kind': 'matrix', 'num_vars': '2', 'entries': 'x0'}, matrix)
        self.assertEqual(self.run_cli('matrix', 'check', matrix)[0], EXIT_USAGE)


if __name__ == '__main__':
    unittest.main()
