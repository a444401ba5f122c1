#! /usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

"""
Exact SL(2,Z) arithmetic: unimodular matrices, element classes, the
binary quadratic form of a hyperbolic matrix and the decision whether a
hyperbolic matrix is conjugate to its inverse.

Row vectors act on the left of matrices throughout (v -> v*M). Points
of the upper half-plane are acted on by the usual Moebius action
z -> (az+b)/(cz+d).
"""

import collections
import logging
import math
import operator

from sympy import factorint, isprime

from catmix.exceptions import *

__all__ = [
    'ElementClass', 'ConjMethod', 'PrimeVerdict', 'UnimodularMatrix',
    'QuadraticForm', 'QuadraticIrrational', 'ConjInverseVerdict',
    'IDENTITY', 'MINUS_IDENTITY', 'R', 'L', 'S', 'GENERATORS',
    'classify', 'require_hyperbolic', 'mat_pow', 'form_of',
    'is_conjugate_to_inverse', 'prime_criterion', 'conjugacy_word',
    'primitive_root', 'log_eigenvalue', 'translation_length',
    'random_word', 'run_matrix',
]

logger = logging.getLogger(__name__)

DEFAULT_FACTOR_BOUND = 10 ** 6

# golden ratio squared: eigenvalue of the shortest hyperbolic class
LAMBDA_MIN = (3.0 + math.sqrt(5.0)) / 2.0


def get_name_of_constant(C, n):
    for k, v in C.__dict__.items():
        if type(v) is int and v == n:
            return ''.join(w.capitalize() for w in k.split('_'))
    return "NoSuchConstant%d" % n


class ElementClass(object):
    IDENTITY = 0
    MINUS_IDENTITY = 1
    ELLIPTIC = 2
    PARABOLIC = 3
    HYPERBOLIC = 4


class ConjMethod(object):
    FORM_CYCLE = 0
    PRIME_CRITERION = 1
    SYMMETRIC_SHORTCUT = 2


class PrimeVerdict(object):
    NOT_CONJUGATE = 0
    INCONCLUSIVE = 1


ElementClass.to_string = classmethod(get_name_of_constant)
ConjMethod.to_string = classmethod(get_name_of_constant)
PrimeVerdict.to_string = classmethod(get_name_of_constant)


def _as_int(x):
    if isinstance(x, bool):
        raise MalformedInput("boolean is not a matrix entry")
    try:
        return operator.index(x)
    except TypeError:
        raise MalformedInput("matrix entry [%r] is not an integer" % (x,))


class UnimodularMatrix(object):
    """
    * @class UnimodularMatrix
    * @brief 2x2 integer matrix (a b; c d) with determinant 1.
    *
    * Instances are immutable and hashable. Entries are python ints, so
    * there is no overflow at any size.
    """

    __slots__ = ('a', 'b', 'c', 'd')

    def __init__(self, a, b, c, d):
        a, b, c, d = _as_int(a), _as_int(b), _as_int(c), _as_int(d)
        if a * d - b * c != 1:
            raise DeterminantNotOne(
                "determinant of (%d %d; %d %d) is %d, not 1" % (a, b, c, d, a * d - b * c))
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'c', c)
        object.__setattr__(self, 'd', d)

    @classmethod
    def _unchecked(cls, a, b, c, d):
        m = object.__new__(cls)
        object.__setattr__(m, 'a', a)
        object.__setattr__(m, 'b', b)
        object.__setattr__(m, 'c', c)
        object.__setattr__(m, 'd', d)
        return m

    def __setattr__(self, name, value):
        raise AttributeError("UnimodularMatrix is immutable")

    @classmethod
    def identity(cls):
        return cls._unchecked(1, 0, 0, 1)

    @staticmethod
    def parse(text):
        """
        Parse the text form "a,b,c,d" (row-major, optional signs).
        """
        parts = [p.strip() for p in str(text).split(',')]
        if len(parts) != 4:
            raise MalformedInput("matrix [%s] must have the form a,b,c,d" % text)
        try:
            entries = [int(p) for p in parts]
        except ValueError:
            raise MalformedInput("matrix [%s] has a non-integer entry" % text)
        return UnimodularMatrix(*entries)

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def __mul__(self, o):
        if not isinstance(o, UnimodularMatrix):
            return NotImplemented
        return UnimodularMatrix._unchecked(
            self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def __pow__(self, k):
        return mat_pow(self, k)

    def __neg__(self):
        return UnimodularMatrix._unchecked(-self.a, -self.b, -self.c, -self.d)

    def inverse(self):
        return UnimodularMatrix._unchecked(self.d, -self.b, -self.c, self.a)

    def transpose(self):
        return UnimodularMatrix._unchecked(self.a, self.c, self.b, self.d)

    def conjugate_by(self, g):
        """@return g * self * g^-1"""
        return g * self * g.inverse()

    def is_symmetric(self):
        return self.b == self.c

    def max_norm(self):
        """Largest absolute entry; the matrix norm used for gating."""
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))

    def to_list(self):
        return [self.a, self.b, self.c, self.d]

    def __eq__(self, o):
        if not isinstance(o, UnimodularMatrix):
            return NotImplemented
        return (self.a, self.b, self.c, self.d) == (o.a, o.b, o.c, o.d)

    def __ne__(self, o):
        r = self.__eq__(o)
        return r if r is NotImplemented else not r

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __str__(self):
        return "%d,%d,%d,%d" % (self.a, self.b, self.c, self.d)

    def __repr__(self):
        return "UnimodularMatrix(%d, %d, %d, %d)" % (self.a, self.b, self.c, self.d)


IDENTITY = UnimodularMatrix(1, 0, 0, 1)
MINUS_IDENTITY = UnimodularMatrix(-1, 0, 0, -1)
R = UnimodularMatrix(1, 1, 0, 1)
L = UnimodularMatrix(1, 0, 1, 1)
# z -> -1/z
S = UnimodularMatrix(0, -1, 1, 0)
GENERATORS = (R, R.inverse(), L, L.inverse(), UnimodularMatrix(0, 1, -1, 0))


def classify(m):
    if m == IDENTITY:
        return ElementClass.IDENTITY
    if m == MINUS_IDENTITY:
        return ElementClass.MINUS_IDENTITY
    t = abs(m.trace())
    if t < 2:
        return ElementClass.ELLIPTIC
    if t == 2:
        return ElementClass.PARABOLIC
    return ElementClass.HYPERBOLIC


def require_hyperbolic(m):
    if abs(m.trace()) <= 2:
        raise NotHyperbolic("matrix (%s) is %s, not hyperbolic"
                            % (m, ElementClass.to_string(classify(m))))


def mat_pow(m, k):
    """
    Exact k-th power by repeated squaring; negative k uses the inverse.
    """
    k = _as_int(k)
    if k < 0:
        m, k = m.inverse(), -k
    result = IDENTITY
    base = m
    while k:
        if k & 1:
            result = result * base
        base = base * base
        k >>= 1
    return result


def run_matrix(letter, k):
    """R^k or L^k."""
    if letter == 'R':
        return UnimodularMatrix._unchecked(1, k, 0, 1)
    return UnimodularMatrix._unchecked(1, 0, k, 1)


class QuadraticIrrational(object):
    """
    The real number (P + sqrt(D)) / Q with D > 0 not a perfect square.
    """

    __slots__ = ('P', 'D', 'Q')

    def __init__(self, P, D, Q):
        if Q == 0:
            raise InvalidParameter("quadratic irrational with zero denominator")
        self.P, self.D, self.Q = P, D, Q

    def floor(self):
        s = math.isqrt(self.D)
        if self.Q > 0:
            return (self.P + s) // self.Q
        return (-self.P - s - 1) // (-self.Q)

    def conjugate(self):
        return QuadraticIrrational(-self.P, self.D, -self.Q)

    def __float__(self):
        try:
            return (self.P + math.sqrt(self.D)) / self.Q
        except OverflowError:
            return float((self.P + math.isqrt(self.D)) / self.Q)

    def partial_quotients(self):
        """
        Generator of the regular continued fraction digits a0, a1, ...
        """
        P, D, Q = self.P, self.D, self.Q
        if (D - P * P) % Q != 0:
            P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
        s = math.isqrt(D)
        while True:
            if Q > 0:
                a = (P + s) // Q
            else:
                a = (-P - s - 1) // (-Q)
            yield a
            P = a * Q - P
            Q = (D - P * P) // Q

    def convergents(self):
        """
        Generator of (p, q) with p/q the successive convergents.
        """
        p0, q0, p1, q1 = 1, 0, 0, 1
        for a in self.partial_quotients():
            p0, q0, p1, q1 = a * p0 + p1, a * q0 + q1, p0, q0
            yield p0, q0

    def __repr__(self):
        return "(%d + sqrt(%d))/%d" % (self.P, self.D, self.Q)


class QuadraticForm(object):
    """
    Binary quadratic form A x^2 + B xy + C y^2.
    """

    __slots__ = ('A', 'B', 'C')

    def __init__(self, A, B, C):
        self.A, self.B, self.C = A, B, C

    def discriminant(self):
        return self.B * self.B - 4 * self.A * self.C

    def evaluate(self, x, y):
        return self.A * x * x + self.B * x * y + self.C * y * y

    def roots(self):
        """
        Both roots t of A t^2 + B t + C = 0, so Q(t, 1) = 0.
        """
        D = self.discriminant()
        return (QuadraticIrrational(-self.B, D, 2 * self.A),
                QuadraticIrrational(self.B, D, -2 * self.A))

    def __neg__(self):
        return QuadraticForm(-self.A, -self.B, -self.C)

    def __eq__(self, o):
        if not isinstance(o, QuadraticForm):
            return NotImplemented
        return (self.A, self.B, self.C) == (o.A, o.B, o.C)

    def __hash__(self):
        return hash((self.A, self.B, self.C))

    def to_list(self):
        return [self.A, self.B, self.C]

    def __str__(self):
        out = []
        for coef, mono in ((self.A, 'x^2'), (self.B, 'xy'), (self.C, 'y^2')):
            if coef == 0:
                continue
            sign = '-' if coef < 0 else '+'
            mag = '' if abs(coef) == 1 else str(abs(coef))
            out.append((sign, mag + mono))
        if not out:
            return '0'
        first = ('-' if out[0][0] == '-' else '') + out[0][1]
        return ' '.join([first] + ['%s %s' % t for t in out[1:]])

    def __repr__(self):
        return "QuadraticForm(%d, %d, %d)" % (self.A, self.B, self.C)


def form_of(m):
    """
    The form Q(x,y) = c x^2 + (a-d) xy - b y^2 of a hyperbolic matrix.

    With g a unimodular matrix whose bottom row is (y, x), the lower
    left entry of g*m*g^-1 equals Q(x, y).
    """
    require_hyperbolic(m)
    return QuadraticForm(m.c, m.a - m.d, -m.b)


ConjInverseVerdict = collections.namedtuple('ConjInverseVerdict', 'answer witness method')


def _positive_form(p):
    """
    Conjugate p (trace > 2) to a matrix with nonnegative entries.

    The attracting fixed point w and the repelling one w' of the current
    matrix are moved by translations and z -> -1/z until w > 0 > w',
    which is exactly when the matrix is nonnegative.
    @return (G, P) with P = G p G^-1 nonnegative
    """
    G = IDENTITY
    M = p
    D = p.trace() ** 2 - 4
    budget = 64 + 8 * p.max_norm().bit_length()
    for _ in range(budget):
        if M.a >= 0 and M.b >= 0 and M.c >= 0 and M.d >= 0:
            return G, M
        nw = QuadraticIrrational(M.a - M.d, D, 2 * M.c).floor()
        nr = QuadraticIrrational(M.d - M.a, D, -2 * M.c).floor()
        if nw > nr:
            X = run_matrix('R', -nw)
        elif nw < nr:
            X = S * run_matrix('R', -nr)
        else:
            X = S * run_matrix('R', -nw)
        M = X * M * X.inverse()
        G = X * G
    raise SearchExhausted("reduction of (%s) did not reach a nonnegative matrix" % p)


def _peel_runs(P):
    """
    Write a nonnegative matrix as a word R^k1 L^k2 ... in run-length form.
    """
    runs = []
    M = P
    while M != IDENTITY:
        if M.a >= M.c and M.b >= M.d:
            k = min(M.a // M.c if M.c else M.b // M.d, M.b // M.d if M.d else M.a // M.c)
            M = UnimodularMatrix._unchecked(M.a - k * M.c, M.b - k * M.d, M.c, M.d)
            letter = 'R'
        elif M.c >= M.a and M.d >= M.b:
            k = min(M.c // M.a if M.a else M.d // M.b, M.d // M.b if M.b else M.c // M.a)
            M = UnimodularMatrix._unchecked(M.a, M.b, M.c - k * M.a, M.d - k * M.b)
            letter = 'L'
        else:
            raise SearchExhausted("matrix (%s) is not a positive word" % P)
        if runs and runs[-1][0] == letter:
            runs[-1] = (letter, runs[-1][1] + k)
        else:
            runs.append((letter, k))
    return runs


def _word_product(runs):
    result = IDENTITY
    for letter, k in runs:
        result = result * run_matrix(letter, k)
    return result


def _aligned_positive_form(p):
    """
    @return (G, runs) with G p G^-1 equal to the product of runs, where
    runs alternate letters and start and end on different letters
    """
    G, P = _positive_form(p)
    runs = _peel_runs(P)
    if len(runs) >= 2 and runs[0][0] == runs[-1][0]:
        X = run_matrix(*runs[0])
        runs = runs[1:-1] + [(runs[-1][0], runs[-1][1] + runs[0][1])]
        G = X.inverse() * G
    return G, runs


def _canonical_rotation(runs):
    return min(tuple(runs[i:] + runs[:i]) for i in range(0, len(runs)) if runs[i][0] == 'R')


def conjugacy_word(m):
    """
    Canonical cyclic word in R, L of a hyperbolic matrix.

    Two hyperbolic matrices with traces of the same sign are conjugate in
    SL(2,Z) exactly when their words agree. The word is returned in
    run-length form, rotated to the lexicographically least rotation that
    starts with R.
    """
    require_hyperbolic(m)
    p = m if m.trace() > 0 else -m
    _, runs = _aligned_positive_form(p)
    return _canonical_rotation(runs)


def is_conjugate_to_inverse(m):
    """
    * @brief Decide whether m is conjugate to m^-1 in SL(2,Z).
    *
    * Symmetric matrices are conjugated to their inverse by (0 1; -1 0).
    * Otherwise m and m^-1 are both brought to reduced nonnegative form;
    * they are conjugate iff their reduction cycles coincide, and the
    * witness is assembled from the two reduction chains and the
    * rotation aligning the cycles.
    * @return ConjInverseVerdict
    """
    require_hyperbolic(m)
    inv = m.inverse()
    if m.is_symmetric():
        w = UnimodularMatrix(0, 1, -1, 0)
        if w * m * w.inverse() != inv:
            raise SearchExhausted("symmetric shortcut failed on (%s)" % m)
        return ConjInverseVerdict(True, w, ConjMethod.SYMMETRIC_SHORTCUT)

    p = m if m.trace() > 0 else -m
    G1, runs1 = _aligned_positive_form(p)
    G2, runs2 = _aligned_positive_form(p.inverse())
    logger.debug("reduction cycles of (%s): %s / %s", m, runs1, runs2)
    if len(runs1) != len(runs2) or _canonical_rotation(runs1) != _canonical_rotation(runs2):
        return ConjInverseVerdict(False, None, ConjMethod.FORM_CYCLE)

    for j in range(len(runs1)):
        if runs1[j:] + runs1[:j] == runs2:
            V = _word_product(runs1[:j])
            g = G2.inverse() * V.inverse() * G1
            if g * m * g.inverse() != inv:
                logger.error("witness (%s) failed verification for (%s)", g, m)
                raise SearchExhausted("witness verification failed for (%s)" % m)
            return ConjInverseVerdict(True, g, ConjMethod.FORM_CYCLE)
    raise SearchExhausted("no rotation aligns the cycles of (%s)" % m)


def prime_criterion(m, bound=DEFAULT_FACTOR_BOUND):
    """
    * @brief One-sided test: NOT_CONJUGATE when trace^2 - 4 has a prime
    *        3 mod 4 with odd exponent, INCONCLUSIVE otherwise.
    * @param bound trial division bound; a cofactor that is not proven
    *        prime after it raises FactorizationTimeout
    """
    require_hyperbolic(m)
    t = m.trace()
    delta = t * t - 4
    factors = factorint(delta, limit=bound)
    for p in factors:
        if not isprime(p):
            raise FactorizationTimeout(
                "trace^2-4 = %d has cofactor %d beyond trial division bound %d" % (delta, p, bound))
    for p, e in sorted(factors.items()):
        if p % 4 == 3 and e % 2 == 1:
            logger.debug("prime %d enters trace^2-4 = %d with odd exponent %d", p, delta, e)
            return PrimeVerdict.NOT_CONJUGATE
    return PrimeVerdict.INCONCLUSIVE


def log_eigenvalue(m):
    """log of the spectral radius of a hyperbolic matrix."""
    t = abs(m.trace())
    if t.bit_length() > 1000:
        return math.log(t)
    return math.log((t + math.sqrt(t * t - 4)) / 2.0)


def translation_length(m):
    """Hyperbolic translation length 2*arccosh(|trace|/2)."""
    require_hyperbolic(m)
    return 2.0 * log_eigenvalue(m)


def _chebyshev(T, k):
    u0, u1 = 0, 1
    for _ in range(k - 1):
        u0, u1 = u1, T * u1 - u0
    return u1, u0


def primitive_root(m):
    """
    * @brief Largest k with m = sign * x^k for a unimodular x.
    *
    * Candidate traces of x come from the k-th root of the eigenvalue;
    * each candidate is checked exactly through x^k = u_k x - u_{k-1} I.
    * @return (x, k, sign), (m, 1, 1) when m is primitive
    """
    require_hyperbolic(m)
    log_lam = log_eigenvalue(m)
    kmax = int(log_lam / math.log(LAMBDA_MIN) + 1e-9)
    for k in range(kmax, 1, -1):
        guess = int(round(2.0 * math.cosh(log_lam / k)))
        for T0 in (guess - 1, guess, guess + 1):
            if T0 <= 2:
                continue
            for T in (T0, -T0):
                uk, ukm1 = _chebyshev(T, k)
                for sign in (1, -1):
                    a, b, c, d = sign * m.a + ukm1, sign * m.b, sign * m.c, sign * m.d + ukm1
                    if a % uk or b % uk or c % uk or d % uk:
                        continue
                    xa, xb, xc, xd = a // uk, b // uk, c // uk, d // uk
                    if xa * xd - xb * xc != 1:
                        continue
                    x = UnimodularMatrix(xa, xb, xc, xd)
                    if mat_pow(x, k) == (m if sign == 1 else -m):
                        logger.debug("(%s) = %d*(%s)^%d", m, sign, x, k)
                        return x, k, sign
    return m, 1, 1


def random_word(rng, length, generators=GENERATORS):
    """
    Product of `length` generators drawn with a numpy Generator.
    """
    g = IDENTITY
    for i in rng.integers(0, len(generators), size=length):
        g = g * generators[int(i)]
    return g
