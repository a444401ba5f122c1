#! /usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

"""
A computable homogeneous quasi-morphism on PSL(2,Z) that is 1 on a
chosen primitive hyperbolic h and vanishes on parabolic elements.

The one-form of the construction is replaced by its integer shadow: a
short geodesic wall crossing the axis L of h transversally at a point
p0. The raw quasi-morphism r_raw(g) counts, with sign, the crossings of
the geodesic segment from z0 to g z0 with the G-orbit of the wall.

Geometry is done in a projective chart of the Klein model,

    (x, y) -> (kx, ky) = (2, -2x) / (x^2 + y^2 + 1),

where geodesics are straight lines, the standard fundamental domain F
is the triangle with vertices (0,0) (the cusp), (1, 1/2) and (1, -1/2),
and points high in the cusp keep their relative precision.
"""

import collections
import logging
import math
import threading

import mpmath
import numpy as np

from catmix.exceptions import *
from catmix.sl2core import (IDENTITY, R, S, QuadraticIrrational, UnimodularMatrix,
                            is_conjugate_to_inverse, mat_pow, primitive_root,
                            random_word, require_hyperbolic, translation_length)

__all__ = [
    'HPoint', 'Geodesic', 'QmEngine', 'axis', 'build_engine', 'r_raw',
    'r_hom', 'defect_estimate', 'evaluate_records',
    'DEFAULT_TOL', 'SIGMA_MIN', 'DEFAULT_RETRIES',
]

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
SIGMA_MIN = 2.0 ** -20
DEFAULT_RETRIES = 8
DEFAULT_DEFECT_SAMPLES = 32
DEFAULT_DEFECT_WORD_LEN = 8

WALL_HALF_LENGTH = 0.05
POINT_MARGIN = 1e-4
PERTURBATION = 1e-6
CORNER_RADIUS = 1e-7
MAX_WALK_STEPS = 500000


class HPoint(collections.namedtuple('HPoint', 'x y')):
    """Point x + iy of the upper half-plane."""
    __slots__ = ()

    def __new__(cls, x, y):
        if not y > 0:
            raise InvalidParameter("point (%r, %r) is not in the upper half-plane" % (x, y))
        return super(HPoint, cls).__new__(cls, float(x), float(y))

    @classmethod
    def from_model(cls, k):
        kx, ky = k
        x = -ky / kx
        y2 = 2.0 / kx - 1.0 - x * x
        return cls(x, math.sqrt(max(y2, 1e-300)))

    def to_model(self):
        r2p1 = self.x * self.x + self.y * self.y + 1.0
        return (2.0 / r2p1, -2.0 * self.x / r2p1)

    def moebius(self, m):
        z = complex(self.x, self.y)
        w = (m.a * z + m.b) / (m.c * z + m.d)
        return HPoint(w.real, w.imag)

    def to_complex(self):
        return complex(self.x, self.y)


class Geodesic(object):
    """
    * @class Geodesic
    * @brief Oriented geodesic tail -> head; an endpoint math.inf makes
    *        it a vertical line.
    *
    * For the axis of a hyperbolic matrix `exact` holds (u, D, w) with
    * head = (u + sqrt(D))/w and tail = (u - sqrt(D))/w.
    """

    def __init__(self, tail, head, exact=None):
        if tail == head:
            raise InvalidParameter("geodesic endpoints must differ")
        self.tail = tail
        self.head = head
        self.exact = exact

    def is_vertical(self):
        return math.isinf(self.tail) or math.isinf(self.head)

    def reversed(self):
        exact = None
        if self.exact is not None:
            u, D, w = self.exact
            exact = (-u, D, -w)
        return Geodesic(self.head, self.tail, exact)

    def same_set(self, o):
        return {self.tail, self.head} == {o.tail, o.head}

    def top(self):
        return HPoint((self.tail + self.head) / 2.0, abs(self.head - self.tail) / 2.0)

    def to_dict(self):
        d = {'tail': self.tail, 'head': self.head}
        if self.exact is not None:
            d['exact'] = {'u': self.exact[0], 'D': self.exact[1], 'w': self.exact[2]}
        return d

    def __repr__(self):
        return "Geodesic(%r -> %r)" % (self.tail, self.head)


def axis(m):
    """
    Oriented axis of a hyperbolic matrix; the head is the attracting
    fixed point of z -> (az+b)/(cz+d).
    """
    require_hyperbolic(m)
    p = m if m.trace() > 0 else -m
    u, D, w = p.a - p.d, p.trace() ** 2 - 4, 2 * p.c
    head = float(QuadraticIrrational(u, D, w))
    tail = float(QuadraticIrrational(-u, D, -w))
    return Geodesic(tail, head, (u, D, w))


def _axis_chart(L):
    """
    Moebius map psi sending the axis to the positive imaginary axis,
    tail to 0 and head to infinity, with its inverse.
    """
    s = -1.0 if L.tail < L.head else 1.0

    def psi(z):
        return s * (z - L.tail) / (z - L.head)

    def psi_inv(w):
        return (w * L.head - s * L.tail) / (w - s)

    return psi, psi_inv


def _point_on_axis(L, z, shift):
    """The point of L at hyperbolic distance `shift` beyond z, toward the head."""
    psi, psi_inv = _axis_chart(L)
    y = abs(psi(z.to_complex()))
    w = psi_inv(complex(0.0, y * math.exp(shift)))
    return HPoint(w.real, w.imag)


# -- model geometry ---------------------------------------------------------

# inside F iff every value is positive; pairing maps the side to its partner
_SIDES = (
    ('arc', (-1.0, 0.0), 1.0, S),
    ('left', (1.0, -2.0), 0.0, R),
    ('right', (1.0, 2.0), 0.0, R.inverse()),
)
_VERTICES = ((0.0, 0.0), (1.0, 0.5), (1.0, -0.5))


def _side_values(k):
    return [g[0] * k[0] + g[1] * k[1] + c for _, g, c, _ in _SIDES]


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _dist(a, b):
    return math.hypot(b[0] - a[0], b[1] - a[1])


def _point_segment_distance(p, a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    n2 = dx * dx + dy * dy
    if n2 == 0.0:
        return _dist(p, a)
    t = max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / n2))
    return _dist(p, (a[0] + t * dx, a[1] + t * dy))


def _crossing(P, Q, A, B, positive, tol):
    """
    Signed crossing of the piece P->Q with the wall A-B: +1 when Q lies
    on the positive side, 0 when they do not meet.
    """
    pq, ab = _dist(P, Q), _dist(A, B)
    if pq == 0.0:
        return 0
    d1, d2 = _orient(A, B, P) / ab, _orient(A, B, Q) / ab
    d3, d4 = _orient(P, Q, A) / pq, _orient(P, Q, B) / pq
    proper = d1 * d2 < 0 and d3 * d4 < 0
    if proper and min(abs(d1), abs(d2), abs(d3), abs(d4)) >= tol:
        return 1 if (d2 > 0) == (positive > 0) else -1
    if not proper:
        gap = min(_point_segment_distance(P, A, B), _point_segment_distance(Q, A, B),
                  _point_segment_distance(A, P, Q), _point_segment_distance(B, P, Q))
        if gap >= tol:
            return 0
    raise NumericallyAmbiguous("geodesic piece passes within tolerance of the wall")


def _reduce_point(z):
    """
    @return (delta, point) with point = delta z in the standard fundamental domain
    """
    delta = IDENTITY
    x, y = z.x, z.y
    for _ in range(100000):
        n = math.floor(x + 0.5)
        if n:
            x -= n
            delta = UnimodularMatrix._unchecked(1, -n, 0, 1) * delta
        r2 = x * x + y * y
        if r2 < 1.0:
            x, y = -x / r2, y / r2
            delta = S * delta
        else:
            return delta, HPoint(x, y)
    raise DegenerateGeometry("point (%r, %r) did not reduce" % (z.x, z.y))


def _model_image(m, z):
    """Model coordinates of m z, exact enough for matrices of any size."""
    bits = m.max_norm().bit_length()
    with mpmath.workprec(max(96, 2 * bits + 96)):
        zz = mpmath.mpc(z.x, z.y)
        w = (m.a * zz + m.b) / (m.c * zz + m.d)
        r2p1 = w.real ** 2 + w.imag ** 2 + 1
        return (float(2 / r2p1), float(-2 * w.real / r2p1))


def _exit(P, Q):
    """
    First side of F crossed by P->Q.
    @return (s, side index) with the exit point P + s (Q - P)
    """
    d = (Q[0] - P[0], Q[1] - P[1])
    values = _side_values(P)
    hits = []
    for i, (_, g, _, _) in enumerate(_SIDES):
        rate = g[0] * d[0] + g[1] * d[1]
        if rate < 0.0:
            hits.append((max(values[i], 0.0) / -rate, i))
    if not hits:
        raise NumericallyAmbiguous("piece runs along the boundary of the fundamental domain")
    return min(hits)


def _corner_radius(tol):
    return max(CORNER_RADIUS, 10.0 * tol)


def _walk(g, z, tol, visit):
    """
    Follow the segment from z to g z through translates of F.

    visit(P, Q, delta) receives each piece reduced into F together with
    the element delta that carries the piece's cell onto F. A segment
    passing within the corner radius of a vertex of F skips past the
    vertex and continues in whichever cell it lands in; the skipped
    pieces lie near corners of F, away from any wall.
    """
    radius = _corner_radius(tol)
    delta, start = _reduce_point(z)
    P = start.to_model()
    for _ in range(MAX_WALK_STEPS):
        Q = _model_image(delta * g, z)
        if min(_side_values(Q)) >= -tol:
            visit(P, Q, delta)
            return
        s, side = _exit(P, Q)
        E = (P[0] + s * (Q[0] - P[0]), P[1] + s * (Q[1] - P[1]))
        visit(P, E, delta)
        if min(_dist(E, vertex) for vertex in _VERTICES[1:]) < radius:
            length = _dist(P, Q)
            s_past = s + 4.0 * radius / length
            if s_past >= 1.0:
                return
            X = HPoint.from_model((P[0] + s_past * (Q[0] - P[0]),
                                   P[1] + s_past * (Q[1] - P[1])))
            eps, X = _reduce_point(X)
            delta = eps * delta
            P = X.to_model()
            continue
        pairing = _SIDES[side][3]
        delta = pairing * delta
        P = HPoint.from_model(E).moebius(pairing).to_model()
    raise DegenerateGeometry("walk from z to g z exceeded %d cells" % MAX_WALK_STEPS)


class QmEngine(object):
    """
    * @class QmEngine
    * @brief Geometric data evaluating the quasi-morphism attached to h.
    *
    * Geometry is fixed after build_engine returns; only the running
    * defect estimate changes, under a lock.
    """

    def __init__(self, h, axis_, segment, wall, positive, sigma, base_point, p0,
                 tol, retries, strands, seed):
        self.h = h
        self.axis = axis_
        self.segment = segment
        self.wall = wall
        self.positive = positive
        self.sigma = sigma
        self.base_point = base_point
        self.p0 = p0
        self.tol = tol
        self.retries = retries
        self.strands = strands
        self.seed = seed
        self._defect = 0
        self._defect_lock = threading.Lock()

    @property
    def defect(self):
        with self._defect_lock:
            return self._defect

    def observe_defect(self, value):
        with self._defect_lock:
            if abs(value) > self._defect:
                logger.debug("defect estimate raised from %d to %d", self._defect, abs(value))
                self._defect = abs(value)

    def base_for_attempt(self, attempt):
        if attempt == 0:
            return self.base_point
        rng = np.random.default_rng([self.seed, attempt])
        xi = rng.uniform(-1.0, 1.0, size=2)
        z = self.base_point
        eps = PERTURBATION * attempt
        return HPoint(z.x + eps * z.y * xi[0], z.y * (1.0 + eps * xi[1]))

    def describe(self):
        return {
            'h': str(self.h),
            'axis': self.axis.to_dict(),
            'segment': [list(self.segment[0]), list(self.segment[1])],
            'wall': [list(self.wall[0]), list(self.wall[1])],
            'sigma': self.sigma,
            'base_point': list(self.base_point),
            'tol': self.tol,
            'retries': self.retries,
            'strands_per_period': len(self.strands),
            'defect': self.defect,
        }


def _period_strands(h, L, tol):
    """
    Pieces of one period of L reduced into F, trying a few start points.
    """
    start = L.top()
    period = translation_length(h)
    for fraction in (0.0, 0.137, 0.291, 0.413, 0.587, 0.733):
        z = _point_on_axis(L, start, fraction * period)
        pieces = []
        try:
            _walk(h, z, tol, lambda P, Q, delta: pieces.append((P, Q, delta)))
        except NumericallyAmbiguous:
            logger.debug("period walk from fraction %.3f ambiguous, moving start", fraction)
            continue
        return pieces
    raise DegenerateGeometry("every period walk along the axis of (%s) was ambiguous" % h)


def _perpendicular_direction(P, Q):
    """
    Unit direction at a point of the chord P-Q along the geodesics
    perpendicular to it: lines through the pole of the chord.
    """
    # the boundary circle of the chart is centred at (1, 0) with radius 1
    p = (P[0] - 1.0, P[1])
    d = (Q[0] - P[0], Q[1] - P[1])
    a = d[0] * d[0] + d[1] * d[1]
    b = 2.0 * (p[0] * d[0] + p[1] * d[1])
    c = p[0] * p[0] + p[1] * p[1] - 1.0
    root = math.sqrt(max(b * b - 4.0 * a * c, 0.0))
    e1 = (p[0] + (-b - root) / (2.0 * a) * d[0], p[1] + (-b - root) / (2.0 * a) * d[1])
    e2 = (p[0] + (-b + root) / (2.0 * a) * d[0], p[1] + (-b + root) / (2.0 * a) * d[1])
    return e1, e2


def _wall_through(piece, sigma):
    P, Q, _ = piece
    mid = ((P[0] + Q[0]) / 2.0, (P[1] + Q[1]) / 2.0)
    e1, e2 = _perpendicular_direction(P, Q)
    dot = 1.0 + e1[0] * e2[0] + e1[1] * e2[1]
    if abs(dot) < 1e-12:
        n = (-(Q[1] - P[1]), Q[0] - P[0])
    else:
        pole = ((e1[0] + e2[0]) / dot + 1.0, (e1[1] + e2[1]) / dot)
        n = (pole[0] - mid[0], pole[1] - mid[1])
    norm = math.hypot(*n)
    half = sigma * WALL_HALF_LENGTH / norm
    A = (mid[0] - half * n[0], mid[1] - half * n[1])
    B = (mid[0] + half * n[0], mid[1] + half * n[1])
    positive = _orient(A, B, (mid[0] + Q[0] - P[0], mid[1] + Q[1] - P[1]))
    return mid, (A, B), (1.0 if positive > 0 else -1.0)


def _wall_is_clear(wall, own, strands, positive, tol):
    A, B = wall
    if min(_side_values(A) + _side_values(B)) < POINT_MARGIN:
        return False
    try:
        if _crossing(own[0], own[1], A, B, positive, 10 * tol) != 1:
            return False
        for P, Q, _ in strands:
            if (P, Q) == (own[0], own[1]):
                continue
            if _crossing(P, Q, A, B, positive, 10 * tol) != 0:
                return False
    except NumericallyAmbiguous:
        return False
    return True


def build_engine(h, tol=DEFAULT_TOL, sigma_min=SIGMA_MIN, retries=DEFAULT_RETRIES,
                 defect_samples=DEFAULT_DEFECT_SAMPLES, defect_word_len=DEFAULT_DEFECT_WORD_LEN,
                 seed=0):
    """
    * @brief Build the quasi-morphism engine of a primitive hyperbolic h.
    *
    * One period of the axis is walked through the tessellation. A wall
    * perpendicular to the longest strand is shrunk by halving sigma until
    * no other strand of the closed geodesic meets it; periodicity carries
    * that to every period.
    """
    require_hyperbolic(h)
    root, k, _ = primitive_root(h)
    if k > 1:
        raise NotPrimitive(root, k)
    verdict = is_conjugate_to_inverse(h)
    if verdict.answer:
        raise ConjugateToInverse(
            "(%s) is conjugate to its inverse by (%s); every homogeneous "
            "quasi-morphism vanishes on it" % (h, verdict.witness))

    L = axis(h)
    strands = _period_strands(h, L, tol)
    logger.debug("axis of (%s) crosses %d cells per period", h, len(strands))

    chosen = None
    for piece in sorted(strands, key=lambda s: -_dist(s[0], s[1])):
        sigma = 1.0
        while sigma >= sigma_min:
            mid, wall, positive = _wall_through(piece, sigma)
            if _wall_is_clear(wall, piece, strands, positive, tol):
                chosen = (piece, mid, wall, positive, sigma)
                break
            logger.debug("wall at sigma %g meets another strand, shrinking", sigma)
            sigma /= 2.0
        if chosen is not None:
            break
    if chosen is None:
        raise DegenerateGeometry("no wall on the axis of (%s) survives shrinking to %g"
                                 % (h, sigma_min))
    piece, mid, wall, positive, sigma = chosen

    back = piece[2].inverse()
    p0 = HPoint.from_model(mid).moebius(back)
    segment = (HPoint.from_model(piece[0]).moebius(back),
               HPoint.from_model(piece[1]).moebius(back))
    period = translation_length(h)

    engine = None
    for fraction in (0.5, 0.4, 0.6, 0.3, 0.7, 0.2, 0.8):
        z0 = _point_on_axis(L, p0, fraction * period)
        _, reduced = _reduce_point(z0)
        k0 = reduced.to_model()
        if min(_side_values(k0)) < POINT_MARGIN:
            continue
        if _point_segment_distance(k0, wall[0], wall[1]) < POINT_MARGIN:
            continue
        engine = QmEngine(h, L, segment, wall, positive, sigma, z0, p0, tol, retries,
                          strands, seed)
        break
    if engine is None:
        raise DegenerateGeometry("no base point on the axis of (%s) clears the tessellation" % h)

    own = _with_retries(engine, lambda z: r_raw(engine, h, z))
    if own != 1:
        logger.error("r_raw(h) = %d for h = (%s)", own, h)
        raise DegenerateGeometry(
            "one period of the axis crosses %d walls; the stabilizer of the axis "
            "is not generated by h" % own)

    if defect_samples > 0:
        defect_estimate(engine, defect_samples, defect_word_len, seed=seed)
    logger.debug("engine for (%s): sigma %g, defect %d", h, sigma, engine.defect)
    return engine


def r_raw(e, g, base_point=None):
    """
    * @brief Signed number of walls crossed by the segment from z to g z.
    * @param base_point z, the engine's base point by default
    * @throws NumericallyAmbiguous when a crossing is within tolerance
    """
    z = e.base_point if base_point is None else base_point
    A, B = e.wall
    total = [0]

    def visit(P, Q, delta):
        total[0] += _crossing(P, Q, A, B, e.positive, e.tol)

    _walk(g, z, e.tol, visit)
    return total[0]


def _with_retries(e, fn):
    for attempt in range(e.retries + 1):
        try:
            return fn(e.base_for_attempt(attempt))
        except NumericallyAmbiguous as ex:
            logger.warning("ambiguous evaluation (%s), perturbing base point, attempt %d",
                           ex, attempt + 1)
    raise NumericallyAmbiguous("retry budget of %d perturbations exhausted" % e.retries)


HomEstimate = collections.namedtuple('HomEstimate', 'estimate error_bar')


def r_hom(e, g, n_max=128):
    """
    * @brief Homogenisation r(g) ~ r_raw(g^n)/n with error bar max(D, 1)/n.
    *
    * The split g^n = g^m g^(n-m) is evaluated alongside and its defect
    * feeds the engine's running estimate D.
    """
    if n_max < 4:
        raise InvalidParameter("n_max must be at least 4, got %d" % n_max)
    m = n_max // 2
    gm = mat_pow(g, m)
    gn = mat_pow(g, n_max)

    def evaluate(z):
        full = r_raw(e, gn, z)
        half = r_raw(e, gm, z)
        rest = half if n_max == 2 * m else r_raw(e, gm * g, z)
        return full, half, rest

    full, half, rest = _with_retries(e, evaluate)
    e.observe_defect(full - half - rest)
    return HomEstimate(full / float(n_max), max(e.defect, 1) / float(n_max))


def defect_estimate(e, sample_size, word_len, seed=0):
    """
    Largest |r_raw(g1 g2) - r_raw(g1) - r_raw(g2)| over random pairs of
    words of length at most word_len; a lower bound for the defect norm.
    """
    if sample_size < 0 or word_len < 1:
        raise InvalidParameter("sample_size must be >= 0 and word_len >= 1")
    rng = np.random.default_rng(seed)
    worst = 0
    for _ in range(sample_size):
        g1 = random_word(rng, int(rng.integers(1, word_len + 1)))
        g2 = random_word(rng, int(rng.integers(1, word_len + 1)))

        def evaluate(z):
            return r_raw(e, g1 * g2, z) - r_raw(e, g1, z) - r_raw(e, g2, z)

        worst = max(worst, abs(_with_retries(e, evaluate)))
    logger.debug("defect sample: %d pairs, word length <= %d, seed %d: max %d",
                 sample_size, word_len, seed, worst)
    e.observe_defect(worst)
    return worst


def evaluate_records(e, elements, n_max):
    """JSON-ready records {g, n_max, estimate, error_bar}."""
    records = []
    for g in elements:
        est = r_hom(e, g, n_max)
        records.append({'g': str(g), 'n_max': n_max,
                        'estimate': est.estimate, 'error_bar': est.error_bar})
    return records
