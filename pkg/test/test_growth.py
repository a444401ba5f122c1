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

from catmix import qmorph
from catmix.exceptions import *
from catmix.growth import *
from catmix.mixing import AlphabetKicks, KickedSystemSpec, PeriodicKicks, compose
from catmix.sl2core import (IDENTITY, MINUS_IDENTITY, L, R, S, UnimodularMatrix, classify,
                            ElementClass, mat_pow, random_word)

H_GOLDEN = UnimodularMatrix(2, 1, 1, 1)
H_BASE = UnimodularMatrix(4, 9, 7, 16)
G = UnimodularMatrix(0, 1, -1, 0)


def depth_bound(trace):
    return math.log(abs(trace)) / math.log(2.0 * math.sqrt(5.0)) + 1


class TestReduction(unittest.TestCase):

    def test_split_parabolic(self):
        self.assertEqual((UnimodularMatrix(2, -5, 1, -2), -3), split_parabolic(H_GOLDEN))
        self.assertRaises(InvalidParameter, split_parabolic, UnimodularMatrix(1, 1, 5, 6))
        self.assertRaises(NotHyperbolic, split_parabolic, R)
        self.assertRaises(NotHyperbolic, split_parabolic, UnimodularMatrix(-1, 4, 0, -1))
        from catmix import exceptions
        self.assertFalse(hasattr(exceptions, "UpperTriangular"))

    def test_reduce_small_c(self):
        f = UnimodularMatrix(1, 1, 5, 6)
        g, conj = reduce_small_c(f)
        self.assertEqual(g, f.conjugate_by(conj))
        self.assertEqual(1, abs(g.c))
        self.assertEqual(f.trace(), g.trace())
        ## already small
        self.assertEqual((H_BASE, IDENTITY), reduce_small_c(H_BASE))

    def test_certificate(self):
        cert = trace_certificate(H_BASE)
        self.assertTrue(cert.depth >= 1)
        self.assertTrue(cert.depth <= depth_bound(H_BASE.trace()))
        self.assertTrue(abs(cert.final.trace()) <= 2)
        self.assertTrue(cert.replay())
        self.assertEqual(H_BASE, cert.chain[0][0])
        doc = json.loads(cert.to_json())
        self.assertEqual(cert.depth, doc['depth'])
        self.assertEqual(cert.depth + 1, len(doc['chain']))

    def test_large_trace(self):
        f = mat_pow(H_BASE, 12).conjugate_by(UnimodularMatrix(3, 5, 1, 2))
        cert = trace_certificate(f)
        self.assertTrue(cert.replay())
        self.assertTrue(cert.depth <= depth_bound(f.trace()))

    def test_random_sweep(self):
        rng = np.random.default_rng(5)
        rows = reduction_sweep(rng, 1000, 10 ** 4)
        self.assertEqual(1000, len(rows))
        for row in rows:
            tr, c, trp = row['trace'], row['c'], row['trace_prime']
            self.assertTrue(5 * c * c <= tr * tr, row)
            self.assertTrue(2 * abs(trp) <= abs(c), row)
            self.assertTrue(row['depth'] <= depth_bound(tr), row)
            self.assertTrue(3 <= abs(tr) <= 10 ** 4)

    def test_random_hyperbolic(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            self.assertEqual(ElementClass.HYPERBOLIC, classify(random_hyperbolic(rng, 50)))
        self.assertRaises(InvalidParameter, random_hyperbolic, rng, 2)

    def test_trace_bound_check(self):
        tb = trace_bound_check(H_BASE, 1.0, 1)
        self.assertEqual(20, tb.lhs)
        self.assertAlmostEqual(2.0 * math.sqrt(5.0), tb.rhs)
        self.assertTrue(tb.holds)
        self.assertFalse(trace_bound_check(H_BASE, 3.0, 1).holds)
        self.assertRaises(InvalidParameter, trace_bound_check, H_BASE, 1.0, 0)


class TestRhoUpper(unittest.TestCase):

    def test_small_classes(self):
        self.assertEqual(0, rho_upper(IDENTITY).upper)
        self.assertEqual(0, rho_upper(MINUS_IDENTITY).upper)
        up = rho_upper(S)
        self.assertEqual(1, up.upper)
        self.assertEqual(FactorTag.ELLIPTIC, up.witness[0].tag)
        self.assertEqual(1, rho_upper(mat_pow(L, 7)).upper)

    def test_euclid_witness(self):
        up = rho_upper(H_BASE)
        self.assertEqual(len(up.witness), up.upper)
        prod = IDENTITY
        for w in up.witness:
            self.assertEqual(FactorTag.PARABOLIC, w.tag)
            self.assertEqual(2, abs(w.matrices['g'].trace()))
            prod = prod * w.matrices['g']
        self.assertEqual(H_BASE, prod)

    def test_commutator_witness(self):
        for k in range(1, 11):
            g = mat_pow(H_GOLDEN, 2 * k)
            up = rho_upper(g)
            self.assertTrue(up.upper <= 1, "k = %d" % k)
            w = up.witness[0]
            self.assertEqual(FactorTag.COMMUTATOR, w.tag)
            a, b = w.matrices['a'], w.matrices['b']
            self.assertEqual(g, a * b * a.inverse() * b.inverse())

    def test_rho_lower(self):
        self.assertEqual(0.5, rho_lower(H_BASE, 2.0, 1))
        self.assertEqual(0.25, rho_lower(H_BASE, -2.0, 2))
        self.assertRaises(InvalidParameter, rho_lower, H_BASE, 1.0, 0)
        self.assertRaises(InvalidParameter, rho_lower, H_BASE, 1.0, 1, 0.0)

    def test_bounds_warn_on_inversion(self):
        with self.assertLogs('catmix.growth', level='WARNING'):
            b = rho_bounds(R, 100.0, 1)
        self.assertEqual(25.0, b.lower)
        self.assertEqual(1, b.upper)
        self.assertEqual('Parabolic', b.to_dict()['upper_witness'][0]['tag'])


class TestKickDistance(unittest.TestCase):

    def test_unkicked(self):
        self.assertEqual(0, rho_bar_kick_distance(KickedSystemSpec(H_BASE, 2), 10))

    def test_parabolic_kicks(self):
        spec = KickedSystemSpec(H_BASE, 1, PeriodicKicks([R, mat_pow(L, -2)]))
        self.assertTrue(rho_bar_kick_distance(spec, 10) <= 10)

    def test_counterexample(self):
        spec = KickedSystemSpec(H_GOLDEN, 1, PeriodicKicks([G.inverse(), G]))
        system = compose(spec, 12)
        d = rho_bar_kick_distance(system, 12)
        self.assertTrue(1 <= d <= 12)

    def test_alphabet(self):
        spec = KickedSystemSpec(H_BASE, 2, AlphabetKicks([R, L, S], 0))
        system = compose(spec, 15)
        self.assertTrue(rho_bar_kick_distance(system, 15) <= 15)
        self.assertRaises(InvalidParameter, rho_bar_kick_distance, system, 0)


class TestMixingMargin(unittest.TestCase):

    def test_growth_rate(self):
        self.assertAlmostEqual(0.25, linear_growth_rate([1, 2, 3, 4], [0.25, 0.5, 0.75, 1.0]))
        self.assertRaises(InvalidParameter, linear_growth_rate, [1], [0.25])

    def test_margin(self):
        m = mixing_margin(0, 2, 0.125)
        self.assertEqual(0.25, m.margin)
        self.assertTrue(m.holds)
        self.assertFalse(mixing_margin(3, 2, 0.125).holds)
        self.assertRaises(InvalidParameter, mixing_margin, 0, 0, 0.125)


class TestLyapunov(unittest.TestCase):

    def test_is_cauchy(self):
        self.assertTrue(is_cauchy([1.0, 1.04, 1.02], 0.05))
        self.assertFalse(is_cauchy([1.0, 1.2], 0.05))
        ## measured against the window mean, not the spread
        self.assertTrue(is_cauchy([5.3048, 5.4, 5.5726], 0.05))
        self.assertFalse(is_cauchy([5.0, 5.0, 5.0, 6.0], 0.05))
        self.assertTrue(is_cauchy([], 0.05))

    def test_trace_growth(self):
        spec = KickedSystemSpec(H_BASE, 2, AlphabetKicks([R, L, S], 0))
        system = compose(spec, 40)
        series = lyapunov_series(system, range(20, 41))
        values = [v for _, v in series]
        self.assertTrue(min(values) > 0)
        self.assertTrue(is_cauchy(values, 0.05), values)

    def test_unkicked_limit(self):
        system = compose(KickedSystemSpec(H_BASE, 1), 30)
        n, v = lyapunov_series(system, [30])[0]
        lam = (20 + math.sqrt(396)) / 2.0
        self.assertAlmostEqual(math.log(lam), v, places=6)


class TestQuasiMorphismBounds(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.engine = qmorph.build_engine(H_BASE, seed=0)

    def test_sandwich(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            g = random_word(rng, int(rng.integers(1, 9)))
            r = qmorph.r_hom(self.engine, g, 32).estimate
            b = rho_bounds(g, r, max(self.engine.defect, 1))
            self.assertTrue(b.lower <= b.upper, "g = %s: %r" % (g, b))

    def test_linear_growth(self):
        dr = max(self.engine.defect, 1)
        ks = list(range(1, 33))
        lows = [rho_lower(mat_pow(H_BASE, k), qmorph.r_hom(self.engine, mat_pow(H_BASE, k), 4).estimate, dr)
                for k in ks]
        slope = np.polyfit(ks, lows, 1)[0]
        self.assertTrue(slope > 0)
        self.assertAlmostEqual(1.0 / (DEFAULT_LIP_CONST * dr), slope, places=9)

    def test_trace_bound_holds(self):
        dr = max(self.engine.defect, 1)
        for k in range(1, 6):
            f = mat_pow(H_BASE, k)
            r = qmorph.r_hom(self.engine, f, 8).estimate
            self.assertTrue(trace_bound_check(f, r, dr).holds)


if __name__ == '__main__':
    unittest.main()
