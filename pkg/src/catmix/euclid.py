#! /usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

"""
Euclidean decomposition of primitive integer vectors into elementary
matrices, parabolic completion, and the lower bound on |v f| coming
from a quasi-morphism.
"""

import collections
import json
import logging
import math

from catmix.exceptions import *
from catmix.sl2core import IDENTITY, UnimodularMatrix

__all__ = [
    'UPPER', 'LOWER', 'IntVector2', 'ElementaryWord', 'decompose_primitive',
    'parabolic_completion', 'vector_lower_bound',
]

logger = logging.getLogger(__name__)

UPPER = 'Upper'
LOWER = 'Lower'


class IntVector2(collections.namedtuple('IntVector2', 'p q')):
    """
    Integer row vector (p, q), acted on the right: v -> v*M.
    """
    __slots__ = ()

    @staticmethod
    def parse(text):
        parts = [s.strip() for s in str(text).split(',')]
        if len(parts) != 2:
            raise MalformedInput("vector [%s] must have the form p,q" % text)
        try:
            return IntVector2(int(parts[0]), int(parts[1]))
        except ValueError:
            raise MalformedInput("vector [%s] has a non-integer entry" % text)

    def norm_sq(self):
        return self.p * self.p + self.q * self.q

    def norm(self):
        return math.hypot(self.p, self.q)

    def is_primitive(self):
        return math.gcd(self.p, self.q) == 1

    def times(self, m):
        return IntVector2(self.p * m.a + self.q * m.c, self.p * m.b + self.q * m.d)

    def __neg__(self):
        return IntVector2(-self.p, -self.q)

    def __str__(self):
        return "%d,%d" % (self.p, self.q)


def _factor(side, k):
    if side == UPPER:
        return UnimodularMatrix._unchecked(1, k, 0, 1)
    return UnimodularMatrix._unchecked(1, 0, k, 1)


class ElementaryWord(object):
    """
    * @class ElementaryWord
    * @brief Ordered list of (side, k): Upper is (1 k; 0 1), Lower is (1 0; k 1).
    """

    def __init__(self, factors=()):
        merged = []
        for side, k in factors:
            if merged and merged[-1][0] == side:
                merged[-1] = (side, merged[-1][1] + k)
            else:
                merged.append((side, k))
            if merged[-1][1] == 0:
                merged.pop()
        self.factors = tuple(merged)

    def __len__(self):
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __eq__(self, o):
        return isinstance(o, ElementaryWord) and self.factors == o.factors

    def __hash__(self):
        return hash(self.factors)

    def matrices(self):
        return [_factor(side, k) for side, k in self.factors]

    def matrix(self):
        result = IDENTITY
        for m in self.matrices():
            result = result * m
        return result

    def to_json(self):
        return json.dumps([{'side': side, 'k': k} for side, k in self.factors])

    def __repr__(self):
        return "ElementaryWord(%r)" % (list(self.factors),)


def _nearest_quotient(num, den):
    """
    Nearest integer quotient of num by den; a tie goes to the
    nonnegative remainder.
    @return (k, num - k*den)
    """
    k = num // den
    r = num - k * den
    return min(((k, r), (k + 1, r - den)), key=lambda c: (abs(c[1]), c[1] < 0))


# (0,1) * word = endpoint
_ENDPOINT_WORDS = {
    (0, 1): (),
    (0, -1): ((LOWER, 1), (UPPER, -2), (LOWER, 1)),
    (1, 0): ((LOWER, 1), (UPPER, -1)),
    (-1, 0): ((LOWER, -1), (UPPER, 1)),
}


def decompose_primitive(v):
    """
    * @brief Elementary word W with (0,1)*W = v.
    *
    * Runs the Euclidean algorithm with nearest integer quotients down to
    * a unit vector, then prepends the short word reaching that unit
    * vector from (0,1).
    """
    v = IntVector2(*v)
    if v.p == 0 and v.q == 0:
        raise ZeroVector("the zero vector has no decomposition")
    if not v.is_primitive():
        raise NonPrimitive("vector (%s) is not primitive, gcd %d" % (v, math.gcd(v.p, v.q)))
    p, q = v.p, v.q
    steps = []
    while p != 0 and q != 0:
        if abs(q) >= abs(p):
            k, q = _nearest_quotient(q, p)
            steps.append((UPPER, k))
        else:
            k, p = _nearest_quotient(p, q)
            steps.append((LOWER, k))
    word = ElementaryWord(_ENDPOINT_WORDS[(p, q)] + tuple(reversed(steps)))
    logger.debug("decomposed (%s) into %d factors", v, len(word))
    return word


def parabolic_completion(v, f):
    """
    * @brief h1, h2 from the words of v and v*f, and h3 = h1 f h2^-1.
    * @return (h1, h2, h3) where h3 = (1 b; 0 1) fixes (0,1)
    """
    v = IntVector2(*v)
    h1 = decompose_primitive(v).matrix()
    h2 = decompose_primitive(v.times(f)).matrix()
    h3 = h1 * f * h2.inverse()
    if h3.c != 0 or h3.d != 1:
        raise SearchExhausted("completion (%s) does not fix (0,1)" % h3)
    return h1, h2, h3


def vector_lower_bound(v, f, r_of_f, dr_norm):
    """
    Lower bound 2^-22 * 2^(|r(f)|/|dr|) / |v| for |v f|.
    """
    if dr_norm <= 0:
        raise InvalidParameter("defect norm must be positive, got %r" % (dr_norm,))
    v = IntVector2(*v)
    exponent = -22.0 + abs(r_of_f) / float(dr_norm)
    try:
        return math.pow(2.0, exponent) / v.norm()
    except OverflowError:
        return float('inf')
