#! /usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

"""
Trace growth of hyperbolic matrices and two-sided bounds for the
biinvariant metric rho on PSL(2,Z).

The trace reduction conjugates f until its lower left entry is small
against the trace, then splits off a parabolic factor; the remaining
factor has trace at most |trace f|/(2 sqrt 5). Every inequality of
the chain is checked on integers with sqrt 5 squared away.
"""

import collections
import json
import logging
import math

import numpy as np
from sympy import divisors
from sympy.core.intfunc import igcdex

from catmix.euclid import UPPER, ElementaryWord, IntVector2, decompose_primitive
from catmix.exceptions import *
from catmix.mixing import SequentialSystem, compose
from catmix.sl2core import (IDENTITY, ElementClass, UnimodularMatrix,
                            classify, form_of, get_name_of_constant,
                            is_conjugate_to_inverse, mat_pow, primitive_root,
                            random_word, require_hyperbolic)

__all__ = [
    'FactorTag', 'WitnessFactor', 'RhoBounds', 'RhoUpper', 'TraceCertificate',
    'TraceBoundCheck', 'reduce_small_c', 'split_parabolic', 'trace_bound_check',
    'trace_certificate', 'rho_upper', 'rho_lower', 'rho_bounds',
    'rho_bar_kick_distance', 'lyapunov_series', 'is_cauchy', 'reduction_sweep',
    'random_hyperbolic', 'MixingMargin', 'linear_growth_rate', 'mixing_margin',
    'DEFAULT_LIP_CONST',
]

logger = logging.getLogger(__name__)

DEFAULT_LIP_CONST = 4.0
DEFAULT_BOX_BOUND = 200
DEFAULT_CF_TERMS = 512
LOG_2_SQRT5 = math.log(2.0 * math.sqrt(5.0))


class FactorTag(object):
    ELLIPTIC = 0
    PARABOLIC = 1
    COMMUTATOR = 2


FactorTag.to_string = classmethod(get_name_of_constant)


def _upper(k):
    return UnimodularMatrix._unchecked(1, k, 0, 1)


def _shell(r):
    """Primitive vectors with max(|x|, |y|) = r."""
    for x in range(-r, r + 1):
        for y in (-r, r) if abs(x) < r else range(-r, r + 1):
            if math.gcd(x, y) == 1:
                yield x, y


def _conjugator_for(x, y):
    """Unimodular matrix with bottom row (y, x)."""
    s, t, g = (int(e) for e in igcdex(x, y))
    if g < 0:
        s, t = -s, -t
    return UnimodularMatrix(s, -t, y, x)


def reduce_small_c(f, box_bound=DEFAULT_BOX_BOUND, cf_terms=DEFAULT_CF_TERMS):
    """
    * @brief Conjugate f so that 5 c^2 <= trace^2.
    *
    * The lower left entry of conj*f*conj^-1 is Q(x, y) for the form Q of f
    * and the primitive vector (x, y) on the bottom row of conj, so a small
    * value of Q is searched along the convergents of both roots of Q,
    * then in a box.
    * @return (g, conj) with g = conj f conj^-1
    """
    require_hyperbolic(f)
    tr2 = f.trace() ** 2
    if 5 * f.c * f.c <= tr2:
        return f, IDENTITY
    Q = form_of(f)

    def candidates():
        for root in Q.roots():
            for i, (p, q) in enumerate(root.convergents()):
                if i >= cf_terms:
                    break
                yield p, q
        logger.warning("convergents of (%s) gave no small value, scanning box %d", f, box_bound)
        for r in range(1, box_bound + 1):
            for x, y in _shell(r):
                yield x, y

    for x, y in candidates():
        value = Q.evaluate(x, y)
        if 5 * value * value <= tr2:
            conj = _conjugator_for(x, y)
            g = conj * f * conj.inverse()
            if g.c != value:
                raise SearchExhausted("conjugator (%s) gives c = %d, expected %d" % (conj, g.c, value))
            logger.debug("(%s) reduced by (%s): c = %d", f, conj, g.c)
            return g, conj
    raise SearchExhausted("no primitive vector with 5 Q^2 <= trace^2 for (%s)" % f)


def split_parabolic(f):
    """
    f' = f (1 k; 0 1) with k nearest to -trace/c, so f = f' (1 -k; 0 1).
    @return (f', k)
    """
    require_hyperbolic(f)
    tr = f.trace()
    if 5 * f.c * f.c > tr * tr:
        raise InvalidParameter("(%s) needs 5 c^2 <= trace^2; apply reduce_small_c first" % f)
    k0 = -tr // f.c
    k = min((k0, k0 + 1), key=lambda k: (abs(tr + f.c * k), abs(k)))
    return f * _upper(k), k


TraceBoundCheck = collections.namedtuple('TraceBoundCheck', 'lhs rhs holds')


def trace_bound_check(f, r_of_f, dr_norm):
    """|trace f| >= (2 sqrt 5)^(|r(f)|/|dr|), compared through logarithms."""
    require_hyperbolic(f)
    if not dr_norm > 0:
        raise InvalidParameter("defect norm must be positive, got %r" % (dr_norm,))
    lhs = abs(f.trace())
    exponent = abs(r_of_f) / float(dr_norm)
    holds = math.log(lhs) >= exponent * LOG_2_SQRT5
    try:
        rhs = math.exp(exponent * LOG_2_SQRT5)
    except OverflowError:
        rhs = float('inf')
    return TraceBoundCheck(lhs, rhs, holds)


class TraceCertificate(object):
    """
    * @class TraceCertificate
    * @brief Chain of trace reductions down to |trace| <= 2.
    *
    * steps[i] holds the matrix entering step i, the conjugator, the
    * reduced matrix, the split k and the factor f' passed on.
    """

    def __init__(self, steps, final):
        self.steps = steps
        self.final = final

    @property
    def depth(self):
        return len(self.steps)

    @property
    def chain(self):
        out = [(s['matrix'], s['matrix'].trace()) for s in self.steps]
        out.append((self.final, self.final.trace()))
        return out

    def replay(self):
        """Re-check every step by exact multiplication."""
        for s in self.steps:
            f, conj, g, k, fp = s['matrix'], s['conj'], s['reduced'], s['k'], s['f_prime']
            if conj * f * conj.inverse() != g or fp * _upper(-k) != g:
                return False
            if 5 * g.c * g.c > f.trace() ** 2 or 20 * fp.trace() ** 2 > f.trace() ** 2:
                return False
        return True

    def to_dict(self):
        return {
            'depth': self.depth,
            'chain': [{'matrix': str(m), 'trace': t} for m, t in self.chain],
            'steps': [{'matrix': str(s['matrix']), 'conj': str(s['conj']),
                       'reduced': str(s['reduced']), 'k': s['k'],
                       'f_prime': str(s['f_prime'])} for s in self.steps],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def trace_certificate(f, box_bound=DEFAULT_BOX_BOUND, cf_terms=DEFAULT_CF_TERMS):
    """
    * @brief Reduce and split until |trace| <= 2.
    *
    * Each step checks 20 trace'^2 <= trace^2 exactly; the depth m meets
    * 20^(m-1) <= trace^2.
    """
    require_hyperbolic(f)
    steps = []
    current = f
    while abs(current.trace()) > 2:
        g, conj = reduce_small_c(current, box_bound, cf_terms)
        fp, k = split_parabolic(g)
        if 20 * fp.trace() ** 2 > current.trace() ** 2:
            raise SearchExhausted("split of (%s) left trace %d" % (g, fp.trace()))
        steps.append({'matrix': current, 'conj': conj, 'reduced': g, 'k': k, 'f_prime': fp})
        logger.debug("step %d: trace %d -> %d", len(steps), current.trace(), fp.trace())
        current = fp
    cert = TraceCertificate(steps, current)
    if 20 ** (cert.depth - 1) > f.trace() ** 2:
        logger.error("certificate depth %d too large for trace %d", cert.depth, f.trace())
        raise SearchExhausted("certificate of (%s) exceeds the depth bound" % f)
    return cert


WitnessFactor = collections.namedtuple('WitnessFactor', 'tag matrices')
RhoUpper = collections.namedtuple('RhoUpper', 'upper witness')


class RhoBounds(collections.namedtuple('RhoBounds', 'lower upper upper_witness')):
    __slots__ = ()

    def to_dict(self):
        return {
            'lower': self.lower,
            'upper': self.upper,
            'upper_witness': [_witness_dict(w) for w in self.upper_witness],
        }


def _witness_dict(w):
    return {'tag': FactorTag.to_string(w.tag),
            'matrices': {k: str(m) for k, m in w.matrices.items()}}


def _verify_factor(w):
    if w.tag == FactorTag.COMMUTATOR:
        a, b = w.matrices['a'], w.matrices['b']
        prod = a * b * a.inverse() * b.inverse()
        return prod == w.matrices['g'] or prod == -w.matrices['g']
    t = abs(w.matrices['g'].trace())
    return t < 2 if w.tag == FactorTag.ELLIPTIC else t == 2


def _euclid_presentation(g):
    """g = (1 b; 0 1) W with (0,1) W = (c, d), as parabolic factors."""
    W = decompose_primitive(IntVector2(g.c, g.d))
    head = g * W.matrix().inverse()
    if head.c != 0 or head.a != 1 or head.d != 1:
        raise SearchExhausted("column Euclid left (%s) for (%s)" % (head, g))
    word = ElementaryWord(((UPPER, head.b),) + W.factors)
    witness = [WitnessFactor(FactorTag.PARABOLIC, {'g': m}) for m in word.matrices()]
    if word.matrix() != g:
        raise SearchExhausted("elementary word does not reproduce (%s)" % g)
    return witness


def _commutator_presentation(g):
    """g = +-[x^j, w] when g = +-x^(2j) and w x w^-1 = x^-1."""
    x, k, sign = primitive_root(g)
    if k % 2:
        return None
    verdict = is_conjugate_to_inverse(x)
    if not verdict.answer:
        return None
    a = mat_pow(x, k // 2)
    w = verdict.witness
    if a * w * a.inverse() * w.inverse() != (g if sign == 1 else -g):
        raise SearchExhausted("commutator witness failed for (%s)" % g)
    return [WitnessFactor(FactorTag.COMMUTATOR, {'g': g, 'a': a, 'b': w})]


def rho_upper(g):
    """
    * @brief Upper bound for rho(1, g) with an explicit presentation.
    *
    * Elements are taken in PSL(2,Z), so -I counts as the identity.
    * @return RhoUpper(upper, witness)
    """
    cls = classify(g)
    if cls in (ElementClass.IDENTITY, ElementClass.MINUS_IDENTITY):
        return RhoUpper(0, [])
    if cls == ElementClass.ELLIPTIC:
        return RhoUpper(1, [WitnessFactor(FactorTag.ELLIPTIC, {'g': g})])
    if cls == ElementClass.PARABOLIC:
        return RhoUpper(1, [WitnessFactor(FactorTag.PARABOLIC, {'g': g})])
    witness = _euclid_presentation(g)
    commutator = _commutator_presentation(g)
    if commutator is not None and len(commutator) < len(witness):
        witness = commutator
    for w in witness:
        if not _verify_factor(w):
            raise SearchExhausted("witness factor %s failed its check" % (_witness_dict(w),))
    return RhoUpper(len(witness), witness)


def rho_lower(g, r_of_g, dr_norm, lip_const=DEFAULT_LIP_CONST):
    """|r(g)| / (lip_const |dr|)"""
    if not dr_norm > 0 or not lip_const > 0:
        raise InvalidParameter("dr_norm and lip_const must be positive, got %r, %r"
                               % (dr_norm, lip_const))
    return abs(r_of_g) / (lip_const * float(dr_norm))


def rho_bounds(g, r_of_g, dr_norm, lip_const=DEFAULT_LIP_CONST):
    upper = rho_upper(g)
    lower = rho_lower(g, r_of_g, dr_norm, lip_const)
    if lower > upper.upper:
        logger.warning("rho lower bound %g exceeds upper bound %d for (%s); "
                       "the defect estimate is probably too small", lower, upper.upper, g)
    return RhoBounds(lower, upper.upper, upper.witness)


def rho_bar_kick_distance(spec, n_max):
    """
    * @brief Upper bound for sup_n rho(h^(nt), f(n)), n <= n_max.
    *
    * h^(-nt) f(n) is the product of the conjugated kicks
    * h^(-jt) phi_j h^(jt), j = n .. 1, checked exactly for each n. Each
    * conjugated kick costs at most rho_upper(phi_j), and the product is
    * also bounded directly.
    * @param spec a KickedSystemSpec, or a SequentialSystem already composed
    *        to at least n_max
    """
    if n_max < 1:
        raise InvalidParameter("n_max must be >= 1, got %d" % n_max)
    system = spec if isinstance(spec, SequentialSystem) else compose(spec, n_max)
    h, t = system.spec.h, system.spec.t
    ht = mat_pow(h, t)
    per_kick = {}
    total = 0
    power = IDENTITY
    D = IDENTITY
    bound = 0
    for n in range(1, n_max + 1):
        phi = system.kick(n)
        if phi not in per_kick:
            per_kick[phi] = rho_upper(phi).upper
        total += per_kick[phi]
        power = power * ht
        D = power.inverse() * phi * power * D
        if D != power.inverse() * system.product(n):
            raise SearchExhausted("conjugated kick identity fails at n = %d" % n)
        direct = rho_upper(D).upper
        bound = max(bound, min(total, direct))
        logger.debug("n=%d: kicks %d, direct %d", n, total, direct)
    return bound


MixingMargin = collections.namedtuple('MixingMargin', 'distance t epsilon margin holds')


def linear_growth_rate(ks, lowers):
    """Least-squares slope of rho_lower(h^k) against k."""
    ks = list(ks)
    if len(ks) < 2:
        raise InvalidParameter("need at least two powers, got %d" % len(ks))
    return float(np.polyfit(ks, list(lowers), 1)[0])


def mixing_margin(distance, t, epsilon):
    """
    * @brief Sufficient check distance < t * epsilon for mixing of the kicked system.
    *
    * epsilon is an empirical growth rate of rho along the powers of h
    * (see linear_growth_rate), not the constant the mixing theorem
    * supplies, so a passing check is a heuristic.
    """
    if t < 1:
        raise InvalidParameter("t must be >= 1, got %d" % t)
    margin = t * epsilon
    holds = distance < margin
    if not holds:
        logger.info("kick distance %d not below t * epsilon = %g", distance, margin)
    return MixingMargin(distance, t, epsilon, margin, holds)


def lyapunov_series(system, n_values):
    """[(n, log|trace f(n)|/n)]"""
    out = []
    for n in n_values:
        tr = abs(system.product(n).trace())
        out.append((n, math.log(tr) / n if tr else float('-inf')))
    return out


def is_cauchy(values, rel_tol):
    """
    * @brief Whether a window of a convergent sequence has settled.
    *
    * The window mean stands in for the limit; every value must lie within
    * rel_tol * |mean| of it. An empty window has settled.
    """
    values = list(values)
    if not values:
        return True
    limit = float(np.mean(values))
    return max(abs(v - limit) for v in values) <= rel_tol * abs(limit)


def random_hyperbolic(rng, max_trace):
    """Hyperbolic matrix with 3 <= |trace| <= max_trace drawn from rng."""
    if max_trace < 3:
        raise InvalidParameter("max_trace must be >= 3, got %d" % max_trace)
    while True:
        T = int(rng.integers(3, max_trace + 1)) * (1 if rng.integers(0, 2) else -1)
        a = int(rng.integers(-abs(T), abs(T) + 1))
        d = T - a
        n = a * d - 1
        if n == 0:
            continue
        divs = divisors(abs(n))
        b = int(divs[int(rng.integers(0, len(divs)))]) * (1 if rng.integers(0, 2) else -1)
        m = UnimodularMatrix(a, b, n // b, d)
        w = random_word(rng, 3)
        return w * m * w.inverse()


def reduction_sweep(rng, count, max_trace, box_bound=DEFAULT_BOX_BOUND):
    """Rows (matrix, trace, c, trace', depth) over random hyperbolic matrices."""
    rows = []
    for _ in range(count):
        f = random_hyperbolic(rng, max_trace)
        g, _ = reduce_small_c(f, box_bound)
        fp, _ = split_parabolic(g)
        cert = trace_certificate(f, box_bound)
        rows.append(collections.OrderedDict([
            ('matrix', str(f)), ('trace', f.trace()), ('c', g.c),
            ('trace_prime', fp.trace()), ('depth', cert.depth),
        ]))
    return rows
