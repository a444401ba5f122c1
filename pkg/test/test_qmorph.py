#!/usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

PKG = 'catmix'

import json
import logging
import math
import unittest

import numpy as np

from catmix.euclid import IntVector2, vector_lower_bound
from catmix.exceptions import *
from catmix.qmorph import *
from catmix.sl2core import IDENTITY, L, R, UnimodularMatrix, mat_pow, random_word

H_GOLDEN = UnimodularMatrix(2, 1, 1, 1)
H_BASE = UnimodularMatrix(4, 9, 7, 16)


def moebius_real(m, x):
    return (m.a * x + m.b) / (m.c * x + m.d)


class TestAxis(unittest.TestCase):

    def test_golden_axis(self):
        L_ = axis(H_GOLDEN)
        self.assertAlmostEqual((1.0 + math.sqrt(5.0)) / 2.0, L_.head)
        self.assertAlmostEqual((1.0 - math.sqrt(5.0)) / 2.0, L_.tail)
        self.assertFalse(L_.is_vertical())

    def test_endpoints_are_fixed(self):
        for m in (H_GOLDEN, H_BASE, -H_BASE, UnimodularMatrix(3, -1, 1, 0)):
            L_ = axis(m)
            for x in (L_.tail, L_.head):
                self.assertAlmostEqual(x, moebius_real(m, x), places=9)

    def test_head_is_attracting(self):
        L_ = axis(H_BASE)
        x = L_.tail + 0.3 * (L_.head - L_.tail)
        for _ in range(20):
            x = moebius_real(H_BASE, x)
        self.assertAlmostEqual(L_.head, x, places=9)

    def test_inverse_reverses(self):
        L_ = axis(H_BASE)
        Li = axis(H_BASE.inverse())
        self.assertTrue(L_.same_set(Li))
        self.assertAlmostEqual(L_.head, Li.tail)
        self.assertAlmostEqual(L_.head, L_.reversed().tail)
        self.assertAlmostEqual(L_.head, axis(-H_BASE).head)

    def test_errors(self):
        self.assertRaises(NotHyperbolic, axis, R)
        self.assertRaises(NotHyperbolic, axis, IDENTITY)
        self.assertRaises(InvalidParameter, HPoint, 0.0, -1.0)
        self.assertRaises(InvalidParameter, Geodesic, 1.0, 1.0)

    def test_model_chart(self):
        z = HPoint(0.25, 2.0)
        k = z.to_model()
        back = HPoint.from_model(k)
        self.assertAlmostEqual(z.x, back.x)
        self.assertAlmostEqual(z.y, back.y)
        w = z.moebius(UnimodularMatrix(0, -1, 1, 0))
        self.assertAlmostEqual(-1.0 / z.to_complex(), w.to_complex())


class TestBuildErrors(unittest.TestCase):

    def test_conjugate_to_inverse(self):
        self.assertRaises(ConjugateToInverse, build_engine, H_GOLDEN, defect_samples=0)

    def test_not_primitive(self):
        try:
            build_engine(mat_pow(H_BASE, 2), defect_samples=0)
            self.fail("proper power accepted")
        except NotPrimitive as e:
            self.assertEqual(H_BASE, e.root)
            self.assertEqual(2, e.power)

    def test_not_hyperbolic(self):
        self.assertRaises(NotHyperbolic, build_engine, R)
        self.assertRaises(NotHyperbolic, build_engine, UnimodularMatrix(0, -1, 1, 0))


class TestEngine(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.engine = build_engine(H_BASE, seed=0)

    def test_describe(self):
        d = self.engine.describe()
        self.assertEqual("4,9,7,16", d['h'])
        self.assertTrue(d['strands_per_period'] >= 1)
        self.assertTrue(0 < d['sigma'] <= 1.0)
        json.dumps(d)

    def test_identity(self):
        self.assertEqual(0, r_raw(self.engine, IDENTITY))

    def test_powers(self):
        for n in range(1, 33):
            self.assertEqual(n, r_raw(self.engine, mat_pow(H_BASE, n)), "n = %d" % n)
        for n in range(1, 9):
            self.assertEqual(-n, r_raw(self.engine, mat_pow(H_BASE, -n)), "n = -%d" % n)

    def test_homogenization_on_h(self):
        est = r_hom(self.engine, H_BASE, 128)
        self.assertEqual(1.0, est.estimate)
        self.assertTrue(est.error_bar >= 0.0)
        self.assertEqual(-1.0, r_hom(self.engine, H_BASE.inverse(), 32).estimate)
        self.assertEqual(3.0, r_hom(self.engine, mat_pow(H_BASE, 3), 8).estimate)

    def test_vanishes_on_parabolics(self):
        for k in range(-10, 11):
            if k == 0:
                continue
            for p in (UnimodularMatrix(1, k, 0, 1), UnimodularMatrix(1, 0, k, 1)):
                est = r_hom(self.engine, p, 128)
                self.assertTrue(abs(est.estimate) <= est.error_bar, "%s: %r" % (p, est))
        est = r_hom(self.engine, -R, 128)
        self.assertTrue(abs(est.estimate) <= est.error_bar)

    def test_error_bar_without_samples(self):
        e = build_engine(H_BASE, defect_samples=0)
        est = r_hom(e, R, 16)
        self.assertTrue(est.error_bar >= 1.0 / 16)

    def test_conjugation_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            w = random_word(rng, int(rng.integers(1, 9)))
            est = r_hom(self.engine, H_BASE.conjugate_by(w), 128)
            self.assertTrue(abs(est.estimate - 1.0) <= 2 * est.error_bar + 1e-12,
                            "w = %s: %r" % (w, est))

    def test_defect_is_bounded(self):
        d8 = defect_estimate(self.engine, 1000, 8, seed=1)
        d16 = defect_estimate(self.engine, 1000, 16, seed=2)
        self.assertTrue(d16 - d8 <= 2, "word_len 8: %d, word_len 16: %d" % (d8, d16))
        self.assertTrue(self.engine.defect >= max(d8, d16))

    def test_defect_parameters(self):
        self.assertEqual(0, defect_estimate(self.engine, 0, 8))
        self.assertRaises(InvalidParameter, defect_estimate, self.engine, -1, 8)
        self.assertRaises(InvalidParameter, defect_estimate, self.engine, 10, 0)
        self.assertRaises(InvalidParameter, r_hom, self.engine, H_BASE, 3)

    def test_seeded_defect_is_reproducible(self):
        self.assertEqual(defect_estimate(self.engine, 50, 8, seed=5),
                         defect_estimate(self.engine, 50, 8, seed=5))

    def test_perturbed_base_points(self):
        e = self.engine
        self.assertEqual(e.base_point, e.base_for_attempt(0))
        z1 = e.base_for_attempt(1)
        self.assertNotEqual(e.base_point, z1)
        self.assertEqual(z1, e.base_for_attempt(1))
        self.assertEqual(5, r_raw(e, mat_pow(H_BASE, 5), z1))

    def test_records(self):
        records = evaluate_records(self.engine, [H_BASE, R], 16)
        self.assertEqual(['4,9,7,16', '1,1,0,1'], [r['g'] for r in records])
        self.assertEqual(1.0, records[0]['estimate'])
        self.assertEqual(16, records[1]['n_max'])

    def test_vector_lower_bound(self):
        dr = max(self.engine.defect, 1)
        for k in range(1, 7):
            f = mat_pow(H_BASE, k)
            r = r_hom(self.engine, f, 4).estimate
            for v in ((1, 0), (0, 1), (3, -2), (16, -7)):
                v = IntVector2(*v)
                self.assertTrue(vector_lower_bound(v, f, r, dr) <= v.times(f).norm())


class TestInvariants(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.engine = build_engine(H_BASE, seed=0)
        defect_estimate(cls.engine, 1000, 8, seed=7)

    def test_axis_through_order_three_point(self):
        ## the axis |z| = sqrt 3 of g runs through (3 + i sqrt 3)/2
        g = UnimodularMatrix(2, 3, 1, 2)
        values = [r_raw(self.engine, mat_pow(g, n)) for n in (4, 8, 16)]
        self.assertEqual([-1, -5, -13], values)
        dr = max(self.engine.defect, 1)
        for n in (32, 64):
            self.assertTrue(abs(r_raw(self.engine, mat_pow(g, n)) + n) <= dr + 3, "n = %d" % n)
        est = r_hom(self.engine, g, 64)
        self.assertTrue(abs(est.estimate + 1.0) <= 2 * est.error_bar, repr(est))
        for m in (UnimodularMatrix(3, 1, 2, 1), UnimodularMatrix(3, 2, 1, 1),
                  UnimodularMatrix(1, 1, 2, 3)):
            est = r_hom(self.engine, m, 32)
            self.assertTrue(abs(est.estimate) <= 1.0 + 2 * est.error_bar, "%s: %r" % (m, est))

    def test_homogeneity(self):
        rng = np.random.default_rng(29)
        elements = [random_word(rng, int(rng.integers(1, 7))) for _ in range(50)]
        worst = 0.0
        for g in elements:
            est = r_hom(self.engine, g, 64)
            for n in (1, 2, 3, 5, 8, 13, 21, 34, 55, 64):
                worst = max(worst, abs(r_raw(self.engine, mat_pow(g, n)) - n * est.estimate))
        dr = max(self.engine.defect, 1)
        logging.getLogger('catmix.test').info("homogeneity gap %g, defect %d", worst, dr)
        self.assertTrue(worst <= 2 * dr, "gap %g, defect %d" % (worst, dr))

    def test_bounded_trace_ball(self):
        rng = np.random.default_rng(31)
        estimates = []
        while len(estimates) < 60:
            g = random_word(rng, int(rng.integers(1, 11)))
            if not 2 < abs(g.trace()) <= 10:
                continue
            estimates.append((g, r_hom(self.engine, g, 32)))
        bound = max(abs(est.estimate) for _, est in estimates)
        dr = max(self.engine.defect, 1)
        logging.getLogger('catmix.test').info("|r| <= %g on |trace| <= 10, defect %d", bound, dr)
        slack = max(est.error_bar for _, est in estimates)
        self.assertTrue(bound <= dr * math.log(10.0) / math.log(2.0 * math.sqrt(5.0)) + slack,
                        "bound %g, defect %d" % (bound, dr))


if __name__ == '__main__':
    unittest.main()
