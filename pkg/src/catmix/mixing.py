#! /usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

"""
Kicked cat maps f(n) = phi_n h^t ... phi_1 h^t and the correlation
functions of finite-Fourier observables under them.

Everything happens in coefficient space. A frequency v (row vector)
is carried to v*f, and the correlation of F1, F2 under f is

    C(F1, F2; f) = sum over v in supp F2 of a1(-v f) a2(v),

which is the integral of F1(f^-1 x) F2(x) over the torus.
"""

import collections
import json
import logging
import math
import threading

import numpy as np

from catmix.euclid import IntVector2
from catmix.exceptions import *
from catmix.sl2core import IDENTITY, mat_pow

__all__ = [
    'KickSource', 'NoKicks', 'ExplicitKicks', 'PeriodicKicks', 'AlphabetKicks',
    'KickedSystemSpec', 'SequentialSystem', 'Observable', 'compose',
    'correlation', 'correlation_bound_holder', 'min_expansion', 'zero_time',
    'decay_fit', 'expansion_slope', 'truncation_level', 'empirical_t0',
    'mix_row',
]

logger = logging.getLogger(__name__)


def _sqrt_int(n):
    try:
        return math.sqrt(n)
    except OverflowError:
        return math.exp(math.log(n) / 2.0)


class KickSource(object):
    """
    * @class KickSource
    * @brief Supplies phi_i for i = 1, 2, ...
    """

    def kick(self, i):
        raise NotImplementedError()

    def declared_trace_bound(self):
        raise NotImplementedError()

    def describe(self):
        return {'source': type(self).__name__}


class NoKicks(KickSource):
    def kick(self, i):
        return IDENTITY

    def declared_trace_bound(self):
        return 2

    def describe(self):
        return {'source': 'none'}


class ExplicitKicks(KickSource):
    def __init__(self, matrices):
        self.matrices = tuple(matrices)
        if not self.matrices:
            raise InvalidParameter("explicit kick list is empty")

    def kick(self, i):
        if i > len(self.matrices):
            raise InvalidParameter("kick %d requested but only %d kicks given"
                                   % (i, len(self.matrices)))
        return self.matrices[i - 1]

    def declared_trace_bound(self):
        return max(abs(m.trace()) for m in self.matrices)

    def describe(self):
        return {'source': 'file', 'count': len(self.matrices)}


class PeriodicKicks(ExplicitKicks):
    def kick(self, i):
        return self.matrices[(i - 1) % len(self.matrices)]

    def describe(self):
        return {'source': 'periodic', 'matrices': [str(m) for m in self.matrices]}


class AlphabetKicks(KickSource):
    """
    Kicks drawn uniformly from a finite alphabet with a seeded numpy
    generator. Draws happen in index order, so kick(i) does not depend
    on the order in which indices are requested.
    """

    def __init__(self, alphabet, seed):
        self.alphabet = tuple(alphabet)
        if not self.alphabet:
            raise InvalidParameter("kick alphabet is empty")
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self._drawn = []
        self._lock = threading.Lock()

    def kick(self, i):
        with self._lock:
            while len(self._drawn) < i:
                self._drawn.extend(int(j) for j in self._rng.integers(0, len(self.alphabet), size=64))
            return self.alphabet[self._drawn[i - 1]]

    def declared_trace_bound(self):
        return max(abs(m.trace()) for m in self.alphabet)

    def describe(self):
        return {'source': 'alphabet', 'alphabet': [str(m) for m in self.alphabet],
                'seed': self.seed}


class KickedSystemSpec(object):
    """
    * @class KickedSystemSpec
    * @brief Base map h, kick period t and kick source with a trace bound.
    """

    def __init__(self, h, t, kicks=None, trace_bound=None):
        if t < 1:
            raise InvalidParameter("kick period t must be >= 1, got %d" % t)
        self.h = h
        self.t = t
        self.kicks = NoKicks() if kicks is None else kicks
        self.trace_bound = self.kicks.declared_trace_bound() if trace_bound is None else trace_bound

    def describe(self):
        d = {'h': str(self.h), 't': self.t, 'trace_bound': self.trace_bound}
        d.update(self.kicks.describe())
        return d


class SequentialSystem(object):
    """
    * @class SequentialSystem
    * @brief Memoized products f(n) = phi_n h^t f(n-1), f(0) = identity.
    *
    * The memo is extended under an RLock, so readers on several threads
    * see one consistent sequence.
    """

    def __init__(self, spec, n_max):
        self.spec = spec
        self.n_max = n_max
        self._ht = mat_pow(spec.h, spec.t)
        self._products = [IDENTITY]
        self._lock = threading.RLock()

    def product(self, n):
        if n < 0 or n > self.n_max:
            raise InvalidParameter("product %d outside 0..%d" % (n, self.n_max))
        with self._lock:
            while len(self._products) <= n:
                k = len(self._products)
                phi = self.spec.kicks.kick(k)
                if abs(phi.trace()) > self.spec.trace_bound:
                    logger.error("kick %d = (%s) has trace %d", k, phi, phi.trace())
                    raise TraceBoundViolated("kick %d = (%s) exceeds trace bound %d"
                                             % (k, phi, self.spec.trace_bound))
                self._products.append(phi * self._ht * self._products[-1])
            return self._products[n]

    def kick(self, n):
        return self.spec.kicks.kick(n)

    def materialized(self):
        with self._lock:
            return len(self._products) - 1

    def __iter__(self):
        for n in range(1, self.n_max + 1):
            yield n, self.product(n)


def compose(spec, n_max):
    """Materialize f(1) .. f(n_max) exactly."""
    if n_max < 1:
        raise InvalidParameter("n_max must be >= 1, got %d" % n_max)
    system = SequentialSystem(spec, n_max)
    system.product(n_max)
    logger.debug("composed %d products, |f(n_max)| has %d bits", n_max,
                 system.product(n_max).max_norm().bit_length())
    return system


class Observable(object):
    """
    * @class Observable
    * @brief Mean-zero Fourier coefficients {v: a(v)}, optionally with a
    *        Hoelder tail |a(v)| <= c_F |v|^(-1-gamma) beyond the terms.
    """

    def __init__(self, terms, tail=None):
        self.terms = {}
        for v, a in terms.items():
            v = IntVector2(*v)
            if v.p == 0 and v.q == 0:
                raise InvalidParameter("observable must be mean-zero; found a (0,0) term")
            self.terms[v] = complex(a)
        if tail is not None:
            c_F, gamma = tail
            if not gamma > 0 or c_F < 0:
                raise InvalidParameter("tail needs gamma > 0 and c_F >= 0, got (%r, %r)" % (c_F, gamma))
            tail = (float(c_F), float(gamma))
        self.tail = tail

    @classmethod
    def cosine(cls, v, amplitude=1.0):
        """amplitude * cos(2 pi <v, x>)"""
        v = IntVector2(*v)
        return cls({v: amplitude / 2.0, -v: amplitude / 2.0})

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except ValueError as e:
                raise MalformedInput("observable is not valid JSON: %s" % e)
        if not isinstance(doc, dict) or 'terms' not in doc:
            raise MalformedInput("observable document needs a 'terms' list")
        terms = {}
        try:
            for term in doc['terms']:
                v = IntVector2(int(term['v'][0]), int(term['v'][1]))
                terms[v] = terms.get(v, 0) + complex(float(term.get('re', 0.0)),
                                                     float(term.get('im', 0.0)))
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise MalformedInput("malformed observable term: %s" % e)
        tail = doc.get('tail')
        if tail is not None:
            try:
                tail = (float(tail['c_F']), float(tail['gamma']))
            except (KeyError, TypeError, ValueError) as e:
                raise MalformedInput("malformed observable tail: %s" % e)
        return cls(terms, tail)

    def to_json(self):
        terms = [{'v': [v.p, v.q], 're': a.real, 'im': a.imag}
                 for v, a in sorted(self.terms.items())]
        tail = None if self.tail is None else {'c_F': self.tail[0], 'gamma': self.tail[1]}
        return json.dumps({'terms': terms, 'tail': tail}, sort_keys=True)

    def is_finite(self):
        return self.tail is None

    def is_real(self):
        return all(abs(self.terms.get(-v, 0) - a.conjugate()) == 0 for v, a in self.terms.items())

    def coefficient(self, v):
        return self.terms.get(IntVector2(*v), 0j)

    def l2_norm(self):
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def max_frequency_sq(self):
        return max((v.norm_sq() for v in self.terms), default=0)

    def max_frequency(self):
        return math.sqrt(self.max_frequency_sq())

    def truncate(self, N):
        """Head F_N: the terms with |v| < N, without tail."""
        return Observable({v: a for v, a in self.terms.items() if v.norm_sq() < N * N})

    def evaluate(self, x, y):
        """Values at torus points; x, y are numpy arrays of equal shape."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for v, a in self.terms.items():
            total += a * np.exp(2j * np.pi * (v.p * x + v.q * y))
        return total

    def __repr__(self):
        return "Observable(%d terms, tail=%r)" % (len(self.terms), self.tail)


def correlation(F1, F2, f):
    """Exact sum of a1(-v f) a2(v) over the support of F2."""
    if not (F1.is_finite() and F2.is_finite()):
        raise InfiniteObservable("correlation needs finitely supported observables; "
                                 "use correlation_bound_holder for Hoelder tails")
    total = 0j
    for v, a2 in F2.terms.items():
        a1 = F1.terms.get(-v.times(f))
        if a1 is not None:
            total += a1 * a2
    return total


HolderBound = collections.namedtuple('HolderBound', 'exact_head tail_bound')


def correlation_bound_holder(F, f, N):
    """
    * @brief Split F = F_N + R_N at frequency N.
    * @return (correlation of the heads, 2 |F|_2 c_F N^-gamma)
    """
    if F.tail is None:
        raise MissingTail("observable has no Hoelder tail descriptor")
    if N < 1:
        raise InvalidParameter("truncation level must be >= 1, got %d" % N)
    head = F.truncate(N)
    c_F, gamma = F.tail
    return HolderBound(correlation(head, head, f), 2.0 * F.l2_norm() * c_F * N ** -gamma)


def _min_expansion_sq(f, radius_sq):
    """Exact min of |v f|^2 over 0 < |v|^2 <= radius_sq, first minimum in scan order."""
    V = math.isqrt(radius_sq)
    best, argmin = None, None
    for p in range(-V, V + 1):
        for q in range(-V, V + 1):
            n2 = p * p + q * q
            if n2 == 0 or n2 > radius_sq:
                continue
            x, y = p * f.a + q * f.c, p * f.b + q * f.d
            value = x * x + y * y
            if best is None or value < best:
                best, argmin = value, IntVector2(p, q)
    return best, argmin


def min_expansion(f, V):
    """
    * @brief min |v f| over nonzero integer v with |v| <= V.
    * @return (value, argmin); the first minimizer in the scan order p, then q,
    *         from -V to V
    """
    if V < 1:
        raise InvalidParameter("probe radius must be >= 1, got %d" % V)
    best, argmin = _min_expansion_sq(f, V * V)
    return _sqrt_int(best), argmin


def zero_time(F, system):
    """
    Smallest n0 such that every materialized n >= n0 carries each
    frequency of F outside its support window, so the correlations of
    F vanish identically from n0 on. None when the range is exhausted.
    """
    if not F.is_finite():
        raise InfiniteObservable("zero time is defined for finitely supported observables")
    radius_sq = F.max_frequency_sq()
    if radius_sq == 0:
        return 1
    n0 = 1
    for n, f in system:
        best, argmin = _min_expansion_sq(f, radius_sq)
        if best <= radius_sq:
            logger.debug("n=%d: v=(%s) maps inside the window, |v f|^2 = %d", n, argmin, best)
            n0 = n + 1
    if n0 > system.n_max:
        return None
    return n0


DecayFit = collections.namedtuple('DecayFit', 'rate r2')


def _linear_fit(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = ys - (slope * xs + intercept)
    ss_res = float(np.sum(residual ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), r2


def decay_fit(series):
    """
    Least-squares fit of log|C| against n; exact zeros are left out.
    @return DecayFit(rate = -slope, r2)
    """
    points = [(n, c) for n, c in series if c > 0]
    if not points:
        raise AllZero("every correlation is exactly zero (finite-time decay)")
    if len(points) < 4:
        raise InvalidParameter("decay fit needs at least 4 nonzero points, got %d" % len(points))
    if len(points) < len(series):
        logger.debug("decay fit skips %d exact zeros", len(series) - len(points))
    slope, r2 = _linear_fit([n for n, _ in points], [math.log(c) for _, c in points])
    return DecayFit(-slope, r2)


def expansion_slope(system, V):
    """Least-squares slope of log min_expansion(f(n), V) against n."""
    ns, logs = [], []
    for n, f in system:
        value, _ = min_expansion(f, V)
        ns.append(n)
        logs.append(math.log(value))
    if len(ns) < 2:
        raise InvalidParameter("expansion slope needs at least two products")
    return _linear_fit(ns, logs)[0]


def truncation_level(f, V):
    """
    Largest N with N^2 <= min |v f| |v| over the probe window; below
    this frequency the heads of a Hoelder observable decorrelate.
    """
    V2 = V * V
    best = None
    for p in range(-V, V + 1):
        for q in range(-V, V + 1):
            n2 = p * p + q * q
            if n2 == 0 or n2 > V2:
                continue
            x, y = p * f.a + q * f.c, p * f.b + q * f.d
            value = (x * x + y * y) * n2
            if best is None or value < best:
                best = value
    return max(1, math.isqrt(math.isqrt(best)))


def empirical_t0(spec_for_t, F, t_values, n_max):
    """
    First t whose system reaches zero_time within n_max.
    @param spec_for_t callable t -> KickedSystemSpec
    @return (t, n0) or None
    """
    for t in t_values:
        n0 = zero_time(F, compose(spec_for_t(t), n_max))
        logger.debug("t=%d: zero time %s", t, n0)
        if n0 is not None:
            return t, n0
    return None


def mix_row(system, F, n, V):
    """
    Report row for step n: min expansion over the probe window and the
    correlation of F with itself (head plus tail bound for Hoelder F).
    """
    f = system.product(n)
    value, _ = min_expansion(f, V)
    if F.is_finite():
        corr, tail = correlation(F, F, f), 0.0
    else:
        corr, tail = correlation_bound_holder(F, f, truncation_level(f, V))
    return collections.OrderedDict([
        ('n', n), ('min_expansion', value), ('corr_re', corr.real),
        ('corr_im', corr.imag), ('corr_abs', abs(corr)), ('tail_bound', tail),
    ])
