import unittest
import os
import sys

import numpy as np

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.config import Config
from src.cox_ring import Monomial, MonomialIdeal, setup_from_fan
from src.decomposition import (FAILED, INCONCLUSIVE, VERIFIED, DecompositionReport, PrimaryComponent, Verdict,
                               ass_fine, combine, descent_filter, dimension_gap_module, dimension_gap_primes,
                               gap_module, intersect_check, minors_all_monomial,
                               quotient_presentation, sheafification_zero, verify_decomposition, verify_primary)
from src.errors import AmbientMismatchError
from src.fan import projective_plane, square_cone
from src.modules import (Free, FreeModuleSpec, Image, MonomialMatrix, QuotientBy, degree_box, equivariant_shifts,
                         minors, piece, same_module_at)


def ideal_image(nvars, generators):
    source = FreeModuleSpec(nvars, tuple(generators))
    return Image(MonomialMatrix(source, FreeModuleSpec.zeros(nvars, 1), (tuple(Monomial(g) for g in generators),)))


class TestVerdicts(unittest.TestCase):
    def test_combine_prefers_failure(self):
        verified = Verdict.verified()
        unsure = Verdict.inconclusive((1, 0), "colimit")
        failed = Verdict.failed((0, 1), "witness")
        self.assertEqual(combine([verified, unsure, failed]), failed)
        self.assertEqual(combine([verified, unsure]), unsure)
        self.assertEqual(combine([]).status, VERIFIED)
        self.assertEqual([v.exit_code for v in (verified, failed, unsure)], [0, 1, 2])

    def test_report_exit_code_and_render(self):
        report = DecompositionReport("sample", 2)
        report.verdicts['one'] = Verdict.verified()
        self.assertEqual(report.exit_code, 0)
        report.verdicts['two'] = Verdict.failed((1, 1), "x0 is a zero divisor")
        self.assertEqual(report.exit_code, 1)
        text = report.render()
        self.assertIn("SAMPLE", text)
        self.assertIn("2. two: failed at [1, 1] (x0 is a zero divisor)", text)


class TestEquivariance(unittest.TestCase):
    def setUp(self):
        self.config = Config(os.path.join(os.path.dirname(__file__), 'missing.yaml'))
        self.rng = np.random.default_rng(self.config.random.seed)

    def coefficient(self):
        value = int(self.rng.integers(1, 1000))
        return value if self.rng.random() < 0.5 else -value

    def random_grid(self, nvars=3):
        rows, cols = (int(x) for x in self.rng.integers(2, 5, size=2))
        density = self.rng.uniform(0.0, 0.5)
        if self.rng.random() < 0.5:
            targets = self.rng.integers(0, 2, size=(rows, nvars))
            sources = self.rng.integers(1, 4, size=(cols, nvars))
            exponent = lambda i, j: tuple(int(s - t) for s, t in zip(sources[j], targets[i]))
        else:
            exponent = lambda i, j: tuple(int(x) for x in self.rng.integers(0, 4, size=nvars))
        grid = []
        for i in range(rows):
            row = []
            for j in range(cols):
                row.append(None if self.rng.random() < density else Monomial(exponent(i, j), self.coefficient()))
            grid.append(tuple(row))
        return tuple(grid)

    def test_shifts_exist_iff_minors_are_monomials(self):
        """Equivariant monomial matrices are exactly those with monomial minors"""
        agreements = 0
        for _ in range(self.config.random.matrix_trials):
            grid = self.random_grid()
            shifts = equivariant_shifts(grid, 3)
            self.assertEqual(shifts is not None, minors_all_monomial(grid, 3))
            agreements += 1
            if shifts is not None:
                MonomialMatrix.from_grid(grid, 3, shifts[1], shifts[0])
        self.assertEqual(agreements, self.config.random.matrix_trials)

    def test_inconsistent_cycle(self):
        x, y = Monomial((1, 0)), Monomial((0, 1))
        grid = ((x, y), (y, x))
        self.assertIsNone(equivariant_shifts(grid, 2))
        self.assertFalse(minors_all_monomial(grid, 2))
        self.assertEqual(sum(1 for _ in minors(grid, 2, 2)), 1)


class TestGapsAndPrimary(unittest.TestCase):
    def setUp(self):
        self.S = Free(FreeModuleSpec.zeros(2, 1))
        self.I = ideal_image(2, [(2, 0), (1, 1)])

    def test_primary_component(self):
        square = ideal_image(2, [(2, 0)])
        self.assertEqual(verify_primary(square, self.S, {0}, box=4, k_max=6).status, VERIFIED)

    def test_embedded_prime_is_not_primary(self):
        verdict = verify_primary(self.I, self.S, {0}, box=4, k_max=6)
        self.assertEqual(verdict.status, FAILED)

    def test_zero_quotient_is_not_primary(self):
        verdict = verify_primary(self.S, self.S, {0}, box=3, k_max=6)
        self.assertEqual(verdict.status, FAILED)

    def test_intersection(self):
        components = [ideal_image(2, [(1, 0)]), ideal_image(2, [(2, 0), (0, 1)])]
        self.assertEqual(intersect_check(components, self.I, box=4).status, VERIFIED)
        wrong = [ideal_image(2, [(1, 0)])]
        verdict = intersect_check(wrong, self.I, box=4)
        self.assertEqual(verdict.status, FAILED)
        self.assertEqual(verdict.degree, (1, 0))

    def test_gap_module_is_saturation(self):
        gap = gap_module(self.I, self.S, MonomialIdeal.prime(2, [0, 1]))
        x0 = ideal_image(2, [(1, 0)])
        for a in degree_box(self.S.ambient, 4):
            self.assertTrue(same_module_at(gap, x0, a))

    def test_gap_with_unit_and_zero_ideal(self):
        kept = gap_module(self.I, self.S, MonomialIdeal.unit(2))
        everything = gap_module(self.I, self.S, MonomialIdeal.zero(2))
        for a in degree_box(self.S.ambient, 3):
            self.assertTrue(same_module_at(kept, self.I, a))
            self.assertTrue(same_module_at(everything, self.S, a))

    def test_mismatched_ambients(self):
        with self.assertRaises(AmbientMismatchError):
            gap_module(self.I, Free(FreeModuleSpec.zeros(2, 2)), MonomialIdeal.unit(2))

    def test_ass_fine(self):
        quotient = QuotientBy(self.S, self.I)
        found = ass_fine(quotient, box=3, k_max=4)
        self.assertEqual(set(found), {frozenset({0}), frozenset({0, 1})})

    def test_quotient_presentation(self):
        presentation = quotient_presentation(self.S, self.I)
        self.assertEqual(presentation.shape, (1, 2))
        self.assertIsNone(quotient_presentation(QuotientBy(self.S, self.I), self.I))


class TestToricDescent(unittest.TestCase):
    def setUp(self):
        self.setup = setup_from_fan(projective_plane())
        self.S = Free(FreeModuleSpec.zeros(3, 1))

    def test_dimension_gap_primes(self):
        points = dimension_gap_primes(self.setup, 0)
        self.assertEqual(points, [frozenset({0, 1}), frozenset({0, 2}), frozenset({1, 2})])
        self.assertEqual(len(dimension_gap_primes(self.setup, 1)), 6)
        self.assertEqual(dimension_gap_primes(self.setup, -1), [])

    def test_dimension_gap_primes_follow_cones(self):
        """On the square cone only faces count, not every large relevant subset"""
        setup = setup_from_fan(square_cone())
        self.assertEqual(dimension_gap_primes(setup, 0), [frozenset({0, 1, 2, 3})])
        edges = [frozenset({0, 1}), frozenset({0, 3}), frozenset({1, 2}), frozenset({2, 3})]
        self.assertEqual(dimension_gap_primes(setup, 1), edges + [frozenset({0, 1, 2, 3})])
        self.assertNotIn(frozenset({0, 2}), dimension_gap_primes(setup, 1))
        self.assertNotIn(frozenset({0, 1, 2}), dimension_gap_primes(setup, 0))

    def test_dimension_gap_module(self):
        irrelevant = ideal_image(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
        self.assertIs(dimension_gap_module(irrelevant, self.S, self.setup, -1), irrelevant)
        gap = dimension_gap_module(irrelevant, self.S, self.setup, 0)
        self.assertEqual(piece(gap, (0, 0, 0)).dim, 1)
        self.assertEqual(piece(irrelevant, (0, 0, 0)).dim, 0)

    def test_sheafification(self):
        self.assertEqual(sheafification_zero(self.S, self.setup, chart_box=1, k_max=6).status, FAILED)
        torsion = QuotientBy(self.S, ideal_image(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)]))
        self.assertEqual(sheafification_zero(torsion, self.setup, chart_box=1, k_max=6).status, VERIFIED)

    def test_descent_filter(self):
        line = PrimaryComponent(self.S, frozenset({0}), "L")
        point = PrimaryComponent(self.S, frozenset({0, 1}), "P")
        irrelevant = PrimaryComponent(self.S, frozenset({0, 1, 2}), "B")
        kept, dropped = descent_filter([line, point, irrelevant], self.setup)
        self.assertEqual(kept, [line, point])
        self.assertEqual(dropped, [irrelevant])

    def test_verify_decomposition_report(self):
        S = Free(FreeModuleSpec.zeros(2, 1))
        I = ideal_image(2, [(2, 0), (1, 1)])
        components = [PrimaryComponent(ideal_image(2, [(1, 0)]), frozenset({0}), "Q0"),
                      PrimaryComponent(ideal_image(2, [(2, 0), (0, 1)]), frozenset({0, 1}), "Q1")]
        report = verify_decomposition(S, I, components, box=3, k_max=6)
        self.assertEqual(report.overall.status, VERIFIED)
        self.assertEqual(len(report.to_frame()), len(degree_box(S.ambient, 3)))
        self.assertIn('Q0', report.to_frame().columns)
        self.assertNotEqual(report.overall.status, INCONCLUSIVE)


if __name__ == '__main__':
    unittest.main()
