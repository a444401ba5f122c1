#!/usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

PKG = 'catmix'

import json
import math
import unittest

import numpy as np
from hypothesis import assume, given, settings
from hypothesis.strategies import integers

from catmix import qmorph
from catmix.euclid import *
from catmix.exceptions import *
from catmix.sl2core import IDENTITY, UnimodularMatrix, random_word

H_BASE = UnimodularMatrix(4, 9, 7, 16)
E2 = IntVector2(0, 1)


class TestIntVector2(unittest.TestCase):

    def test_parse(self):
        self.assertEqual(IntVector2(3, -5), IntVector2.parse("3, -5"))
        self.assertEqual("3,-5", str(IntVector2(3, -5)))
        self.assertRaises(MalformedInput, IntVector2.parse, "3")
        self.assertRaises(MalformedInput, IntVector2.parse, "3,a")

    def test_action(self):
        ## row vector times matrix
        self.assertEqual(IntVector2(7, 16), E2.times(H_BASE))
        self.assertEqual(IntVector2(4, 9), IntVector2(1, 0).times(H_BASE))
        self.assertEqual(25, IntVector2(3, 4).norm_sq())
        self.assertEqual(5.0, IntVector2(3, 4).norm())
        self.assertFalse(IntVector2(2, 4).is_primitive())


class TestElementaryWord(unittest.TestCase):

    def test_merging(self):
        w = ElementaryWord([(UPPER, 1), (UPPER, -1), (LOWER, 2), (LOWER, 3)])
        self.assertEqual(((LOWER, 5),), w.factors)
        self.assertEqual(UnimodularMatrix(1, 0, 5, 1), w.matrix())
        self.assertEqual(0, len(ElementaryWord()))
        self.assertEqual(IDENTITY, ElementaryWord().matrix())

    def test_json(self):
        w = ElementaryWord([(LOWER, 1), (UPPER, -1)])
        self.assertEqual([{'side': 'Lower', 'k': 1}, {'side': 'Upper', 'k': -1}],
                         json.loads(w.to_json()))


class TestDecompose(unittest.TestCase):

    def assertDecomposes(self, v):
        word = decompose_primitive(v)
        self.assertEqual(IntVector2(*v), E2.times(word.matrix()), str(v))
        norm = math.hypot(*v)
        self.assertTrue(len(word) <= math.log2(norm) + 10, "%s: length %d" % (v, len(word)))
        return word

    def test_endpoints(self):
        self.assertEqual(0, len(self.assertDecomposes((0, 1))))
        self.assertEqual(ElementaryWord([(LOWER, 1), (UPPER, -1)]), self.assertDecomposes((1, 0)))
        self.assertDecomposes((0, -1))
        self.assertDecomposes((-1, 0))

    def test_small_vectors(self):
        for p in range(-30, 31):
            for q in range(-30, 31):
                if math.gcd(p, q) == 1:
                    self.assertDecomposes((p, q))

    def test_fibonacci(self):
        a, b = 1, 1
        for _ in range(60):
            a, b = b, a + b
            self.assertDecomposes((a, b))
            self.assertDecomposes((-b, a))

    def test_random_vectors(self):
        rng = np.random.default_rng(2024)
        done = 0
        while done < 10000:
            p, q = (int(x) for x in rng.integers(-10 ** 6, 10 ** 6 + 1, size=2))
            if math.gcd(p, q) != 1 or p * p + q * q > 10 ** 12:
                continue
            self.assertDecomposes((p, q))
            done += 1

    @given(integers(-10 ** 12, 10 ** 12), integers(-10 ** 12, 10 ** 12))
    @settings(max_examples=300, deadline=None)
    def test_reconstruction(self, p, q):
        assume(math.gcd(p, q) == 1)
        self.assertDecomposes((p, q))

    def test_errors(self):
        self.assertRaises(ZeroVector, decompose_primitive, (0, 0))
        self.assertRaises(NonPrimitive, decompose_primitive, (2, 4))
        self.assertRaises(NonPrimitive, decompose_primitive, (0, 3))


class TestCompletion(unittest.TestCase):

    def test_parabolic_completion(self):
        for v in ((1, 2), (5, -3), (0, 1), (-8, 13)):
            h1, h2, h3 = parabolic_completion(v, H_BASE)
            self.assertEqual(IntVector2(*v), E2.times(h1))
            self.assertEqual(IntVector2(*v).times(H_BASE), E2.times(h2))
            self.assertEqual((0, 1), (h3.c, h3.d))
            self.assertEqual(h1 * H_BASE, h3 * h2)

    def test_lower_bound(self):
        v = IntVector2(1, 2)
        exact = v.times(H_BASE).norm()
        self.assertTrue(vector_lower_bound(v, H_BASE, 1.0, 1) <= exact)
        self.assertAlmostEqual(2.0 ** -21 / v.norm(), vector_lower_bound(v, H_BASE, -1.0, 1))
        self.assertEqual(float('inf'), vector_lower_bound(v, H_BASE, 1e6, 1))
        self.assertRaises(InvalidParameter, vector_lower_bound, v, H_BASE, 1.0, 0)


class TestQuasiMorphismOnFactors(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.engine = qmorph.build_engine(H_BASE, seed=0)

    def test_vanishes_on_factors(self):
        rng = np.random.default_rng(17)
        factors = []
        while len(factors) < 100:
            p, q = (int(x) for x in rng.integers(-20, 21, size=2))
            if math.gcd(p, q) != 1:
                continue
            factors.extend(decompose_primitive(IntVector2(p, q)).matrices())
        for g in factors[:100]:
            self.assertEqual(2, g.trace())
            est = qmorph.r_hom(self.engine, g, 64)
            self.assertTrue(abs(est.estimate) <= est.error_bar, "%s: %r" % (g, est))

    def test_lower_bound_on_samples(self):
        rng = np.random.default_rng(23)
        pairs = 0
        for _ in range(50):
            f = random_word(rng, int(rng.integers(1, 9)))
            r = qmorph.r_hom(self.engine, f, 16).estimate
            dr = max(self.engine.defect, 1)
            for _ in range(20):
                p, q = (int(x) for x in rng.integers(-10 ** 6, 10 ** 6 + 1, size=2))
                if (p, q) == (0, 0):
                    q = 1
                v = IntVector2(p, q)
                self.assertTrue(vector_lower_bound(v, f, r, dr) <= v.times(f).norm(),
                                "v = %s, f = %s, r = %g" % (v, f, r))
                pairs += 1
        self.assertEqual(1000, pairs)


if __name__ == '__main__':
    unittest.main()
