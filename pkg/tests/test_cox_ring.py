import unittest
import os
import sys

import numpy as np

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.config import Config
from src.cox_ring import (Monomial, MonomialIdeal, acts_freely, associated_primes, char_monomial, colon,
                          colon_ideal, format_monomial, invariant_hom_dim, invariant_sections_dim,
                          invertible_degrees, irreducible_decomposition, irrelevant_ideal, is_relevant,
                          minimal_primes, monomials_up_to, pure_powers, radical, saturate, setup_explicit,
                          setup_from_fan, x_sigma)
from src.errors import ClassMapError, FanRequiredError, UnitIdealError
from src.fan import p1_times_p1, projective_plane, quadric_cone
from src.lattice import IntMatrix


class TestClassGroups(unittest.TestCase):
    def test_projective_plane(self):
        setup = setup_from_fan(projective_plane())
        self.assertEqual(setup.class_group.describe(), "Z")
        self.assertEqual(setup.class_of_var, ((1,), (1,), (1,)))

    def test_quadric_cone(self):
        """deg(x) = deg(y) = 1 in Z/2"""
        setup = setup_from_fan(quadric_cone())
        self.assertEqual(setup.class_group.describe(), "Z/2")
        self.assertEqual(setup.class_of_var, ((1,), (1,)))

    def test_p1_times_p1(self):
        setup = setup_from_fan(p1_times_p1())
        self.assertEqual(setup.class_group.describe(), "Z + Z")
        self.assertEqual(setup.class_of_var, ((1, 0), (1, 0), (0, 1), (0, 1)))

    def test_class_degree_of_characters_is_zero(self):
        setup = setup_from_fan(projective_plane())
        laurent = char_monomial(setup, (2, -1))
        self.assertEqual(laurent.exponents, (2, -1, -1))
        self.assertEqual(setup.class_degree(laurent.exponents), (0,))

    def test_explicit_setup(self):
        setup = setup_explicit(4, IntMatrix.from_rows([[1, -1, -1, 1]]), (), [(0, 0, 0, 0)])
        self.assertEqual(setup.class_degree((1, 1, 0, 0)), (0,))
        self.assertTrue(setup.irrelevant.is_unit())
        with self.assertRaises(FanRequiredError):
            setup.require_fan()

    def test_explicit_setup_must_generate(self):
        with self.assertRaises(ClassMapError):
            setup_explicit(2, IntMatrix.from_rows([[2, 2]]), (), [(0, 0)])


class TestIrrelevantIdeal(unittest.TestCase):
    def test_projective_plane(self):
        fan = projective_plane()
        self.assertEqual(x_sigma(fan, fan.maximal_cones[0]), (0, 0, 1))
        self.assertEqual(str(irrelevant_ideal(fan)), "<x0, x1, x2>")

    def test_p1_times_p1(self):
        ideal = irrelevant_ideal(p1_times_p1())
        self.assertEqual(len(ideal.generators), 4)
        self.assertTrue(all(sum(g) == 2 for g in ideal.generators))

    def test_relevance(self):
        setup = setup_from_fan(projective_plane())
        self.assertTrue(is_relevant(setup, {0}))
        self.assertTrue(is_relevant(setup, {0, 1}))
        self.assertFalse(is_relevant(setup, {0, 1, 2}))

    def test_free_action(self):
        self.assertTrue(acts_freely(setup_from_fan(projective_plane())))
        quadric = setup_from_fan(quadric_cone())
        self.assertFalse(acts_freely(quadric))
        self.assertFalse(invertible_degrees(quadric, (0, 0)))


class TestInvariantSections(unittest.TestCase):
    def test_projective_plane_counts(self):
        setup = setup_from_fan(projective_plane())
        self.assertEqual(invariant_sections_dim(setup, (2,), 2), 6)
        self.assertEqual(invariant_sections_dim(setup, (-1,), 4), 0)
        self.assertEqual(invariant_hom_dim(setup, (3,), (2,), 3), 3)


class TestMonomialIdeals(unittest.TestCase):
    def setUp(self):
        self.config = Config(os.path.join(os.path.dirname(__file__), 'missing.yaml'))
        self.rng = np.random.default_rng(self.config.random.seed)

    def test_minimal_generators(self):
        ideal = MonomialIdeal(2, ((2, 0), (2, 1), (0, 3)))
        self.assertEqual(ideal.generators, ((0, 3), (2, 0)))
        self.assertEqual(format_monomial((2, 1)), "x0^2*x1")
        self.assertEqual(str(Monomial((1, 0), -1)), "-x0")

    def test_colon_and_saturation(self):
        ideal = MonomialIdeal(2, ((2, 0), (1, 1)))
        self.assertEqual(colon(ideal, (1, 0)), MonomialIdeal(2, ((1, 0), (0, 1))))
        maximal = MonomialIdeal.prime(2, [0, 1])
        self.assertEqual(saturate(ideal, maximal), MonomialIdeal(2, ((1, 0),)))
        self.assertEqual(saturate(ideal, MonomialIdeal.unit(2)), ideal)
        self.assertTrue(colon_ideal(ideal, MonomialIdeal.zero(2)).is_unit())

    def test_irreducible_decomposition(self):
        ideal = MonomialIdeal(2, ((2, 0), (1, 1)))
        components = irreducible_decomposition(ideal)
        self.assertEqual(set(components), {MonomialIdeal(2, ((1, 0),)), MonomialIdeal(2, ((2, 0), (0, 1)))})
        with self.assertRaises(UnitIdealError):
            irreducible_decomposition(MonomialIdeal.unit(2))

    def test_associated_and_minimal_primes(self):
        ideal = MonomialIdeal(2, ((2, 0), (1, 1)))
        primes = associated_primes(ideal)
        self.assertEqual(set(primes), {frozenset({0}), frozenset({0, 1})})
        self.assertEqual(minimal_primes(ideal), [frozenset({0})])
        self.assertEqual(radical(ideal), MonomialIdeal(2, ((1, 0),)))
        self.assertEqual(pure_powers(ideal), {0: 2})

    def random_ideal(self):
        nvars = int(self.rng.integers(1, 5))
        count = int(self.rng.integers(1, 5))
        generators = []
        for _ in range(count):
            degree = int(self.rng.integers(1, 5))
            exponents = [0] * nvars
            for v in self.rng.integers(0, nvars, size=degree):
                exponents[int(v)] += 1
            generators.append(tuple(exponents))
        return MonomialIdeal(nvars, tuple(generators))

    def test_random_decompositions(self):
        """The components intersect back to the ideal; witnesses have the right colon"""
        for _ in range(self.config.random.ideal_trials):
            ideal = self.random_ideal()
            components = irreducible_decomposition(ideal)
            meet = components[0]
            for q in components[1:]:
                meet = meet.intersection(q)
            self.assertEqual(meet, ideal)
            top = max(sum(g) for g in ideal.generators) + 2
            for w in monomials_up_to(ideal.nvars, [top] * ideal.nvars):
                if sum(w) > top:
                    continue
                self.assertEqual(ideal.contains(w), all(q.contains(w) for q in components))
            for prime, witness in associated_primes(ideal).items():
                self.assertFalse(ideal.contains(witness))
                self.assertEqual(colon(ideal, witness), MonomialIdeal.prime(ideal.nvars, sorted(prime)))


if __name__ == '__main__':
    unittest.main()
