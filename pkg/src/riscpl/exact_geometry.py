"""Exact, float-free model of the strip poset and its symmetries.

Points of the strip live between the two slope -1 lines through (-pi, 0) and
(pi, 0).  Every coordinate is stored as an integer multiple of pi plus the
arctangent of an exact rational (or +infinity, encoding an offset of pi/2), so
all comparisons, the glide reflection T, the shift action alpha, and the
region bookkeeping are decided with rational arithmetic only.  Floating point
enters exclusively through the `float_*` oracle helpers used by the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Tuple, Union


class _PosInf:
    """Positive infinity sentinel, comparable with Fraction."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is INF

    def __gt__(self, other):
        return other is not INF

    def __ge__(self, other):
        return True

    def __eq__(self, other):
        return other is INF

    def __hash__(self):
        return hash("riscpl.+inf")

    def __neg__(self):
        return NEG_INF

    def __repr__(self):
        return "inf"


class _NegInf:
    """Negative infinity sentinel.

    Never stored inside a Coord (the canonical encoding replaces it by +inf on
    the previous branch); it only appears transiently and as an interval
    endpoint.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __lt__(self, other):
        return other is not NEG_INF

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is NEG_INF

    def __eq__(self, other):
        return other is NEG_INF

    def __hash__(self):
        return hash("riscpl.-inf")

    def __neg__(self):
        return INF

    def __repr__(self):
        return "-inf"


INF = _PosInf()
NEG_INF = _NegInf()

ExtRational = Union[Fraction, _PosInf]
# Interval endpoints may additionally be -inf.
Endpoint = Union[Fraction, _PosInf, _NegInf]


def ext_neg(v):
    """Negate an extended rational (or interval endpoint)."""
    return -v


@dataclass(frozen=True, order=False)
class Coord:
    """The real number k*pi + arctan(v), with arctan(v) in (-pi/2, pi/2].

    v = +inf encodes an offset of exactly pi/2.  The representation (k, -inf)
    is forbidden; construction canonicalizes it to (k - 1, +inf).
    """

    k: int
    v: ExtRational

    def __post_init__(self):
        if self.v is NEG_INF:
            object.__setattr__(self, "k", self.k - 1)
            object.__setattr__(self, "v", INF)
        elif not (self.v is INF or isinstance(self.v, Fraction)):
            object.__setattr__(self, "v", Fraction(self.v))

    def _key(self):
        # (k, v) lexicographic order agrees with real-number order.
        return (self.k, self.v)

    def __lt__(self, other):
        if self.k != other.k:
            return self.k < other.k
        return self.v < other.v

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        return other < self

    def __ge__(self, other):
        return other <= self

    def __neg__(self):
        if self.v is INF:
            return Coord(-self.k - 1, INF)
        return Coord(-self.k, -self.v)

    def shift_pi(self, m: int) -> "Coord":
        return Coord(self.k + m, self.v)

    def to_float(self) -> float:
        a = math.pi / 2 if self.v is INF else math.atan(self.v)
        return self.k * math.pi + a

    def __repr__(self):
        return f"({self.k},{self.v})"


# pi/2 and -pi/2 in the Coord encoding.
HALF_PI = Coord(0, INF)
NEG_HALF_PI = Coord(-1, INF)


@dataclass(frozen=True)
class StripPoint:
    x: Coord
    y: Coord

    def precedes(self, other: "StripPoint") -> bool:
        """The strip's partial order: self comes before other when its x is
        at least other's and its y is at most other's."""
        return self.x >= other.x and self.y <= other.y

    def to_float(self) -> Tuple[float, float]:
        return (self.x.to_float(), self.y.to_float())

    def __repr__(self):
        return f"[{self.x};{self.y}]"


@dataclass(frozen=True)
class ShiftVector:
    """A pair of rationals ordered like the strip: a before b iff
    a1 >= b1 and a2 <= b2."""

    a1: Fraction
    a2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a1", Fraction(self.a1))
        object.__setattr__(self, "a2", Fraction(self.a2))

    def __add__(self, other: "ShiftVector") -> "ShiftVector":
        return ShiftVector(self.a1 + other.a1, self.a2 + other.a2)

    def __neg__(self) -> "ShiftVector":
        return ShiftVector(-self.a1, -self.a2)

    def precedes(self, other: "ShiftVector") -> bool:
        return self.a1 >= other.a1 and self.a2 <= other.a2


def point(xk, xv, yk, yv) -> StripPoint:
    """Shorthand constructor used heavily in tests."""
    return StripPoint(Coord(xk, xv), Coord(yk, yv))


# ---------------------------------------------------------------------------
# Membership in the strip


def _cmp_v_neg(xv, yv) -> int:
    """Compare arctan(xv) with -arctan(yv); returns -1, 0 or 1."""
    if yv is INF:
        # -arctan(yv) = -pi/2 and arctan(xv) > -pi/2 always.
        return 1
    if xv is INF:
        return 1
    if xv < -yv:
        return -1
    if xv == -yv:
        return 0
    return 1


def strip_location(p: StripPoint) -> str:
    """Exact membership test: 'interior', 'boundary', or 'outside'."""
    s = p.x.k + p.y.k
    both_inf = p.x.v is INF and p.y.v is INF
    if s >= 2:
        return "outside"
    if s <= -2:
        # x + y = -2*pi + arctan(x.v) + arctan(y.v); this reaches -pi only in
        # the corner case where both offsets are pi/2.
        if s == -2 and both_inf:
            return "boundary"
        return "outside"
    if s == 0:
        return "boundary" if both_inf else "interior"
    if s == 1:
        c = _cmp_v_neg(p.x.v, p.y.v)
        if c < 0:
            return "interior"
        if c == 0:
            return "boundary"
        return "outside"
    # s == -1
    c = _cmp_v_neg(p.x.v, p.y.v)
    if c > 0:
        return "interior"
    if c == 0:
        return "boundary"
    return "outside"


def in_strip(p: StripPoint) -> bool:
    return strip_location(p) != "outside"


def in_interior(p: StripPoint) -> bool:
    return strip_location(p) == "interior"


def _require_in_strip(p: StripPoint):
    if not in_strip(p):
        raise ValueError(f"point {p} lies outside the strip")


# ---------------------------------------------------------------------------
# The glide reflection T and the shift action alpha


def t_apply(p: StripPoint) -> StripPoint:
    """The glide reflection (x, y) -> (-pi - y, pi - x)."""
    _require_in_strip(p)
    return StripPoint((-p.y).shift_pi(-1), (-p.x).shift_pi(1))


def t_inverse(p: StripPoint) -> StripPoint:
    """The inverse glide reflection (x, y) -> (pi - y, -pi - x)."""
    _require_in_strip(p)
    return StripPoint((-p.y).shift_pi(1), (-p.x).shift_pi(-1))


def t_power(p: StripPoint, n: int) -> StripPoint:
    """Apply T n times (or its inverse -n times).

    T^2 is the translation by (-2*pi, +2*pi), so only the parity of n needs an
    actual reflection."""
    q, r = divmod(n, 2)
    out = StripPoint(p.x.shift_pi(-2 * q), p.y.shift_pi(2 * q))
    if r:
        out = t_apply(out)
    return out


def _alpha_coord(c: Coord, even_shift: Fraction, odd_shift: Fraction) -> Coord:
    if c.v is INF:
        return c
    if c.k % 2 == 0:
        return Coord(c.k, c.v + even_shift)
    return Coord(c.k, c.v - odd_shift)


def alpha_apply(a: ShiftVector, p: StripPoint) -> StripPoint:
    """The exact coordinate action of the shift by a = (a1, a2)."""
    _require_in_strip(p)
    return StripPoint(
        _alpha_coord(p.x, a.a1, a.a2),
        _alpha_coord(p.y, a.a2, a.a1),
    )


def omega_apply(delta: Fraction, p: StripPoint) -> StripPoint:
    """The one-parameter superlinear family: the shift by (-delta, delta)."""
    delta = Fraction(delta)
    if delta < 0:
        raise ValueError("omega requires a nonnegative parameter")
    return alpha_apply(ShiftVector(-delta, delta), p)


def reflect(p: StripPoint) -> StripPoint:
    """Reflection at the diagonal; an order-reversing involution."""
    _require_in_strip(p)
    return StripPoint(p.y, p.x)


# ---------------------------------------------------------------------------
# Open subsets of the real line


@dataclass(frozen=True)
class RealOpenSet:
    """A finite union of disjoint open intervals, sorted by left endpoint.

    Endpoints are exact rationals or the two infinity sentinels."""

    intervals: Tuple[Tuple[Endpoint, Endpoint], ...]

    @staticmethod
    def make(intervals: Iterable[Tuple[Endpoint, Endpoint]]) -> "RealOpenSet":
        """Normalize: drop empty intervals, sort, merge overlapping ones."""
        norm = []
        for lo, hi in intervals:
            if lo is not NEG_INF:
                lo = Fraction(lo) if not isinstance(lo, Fraction) else lo
            if hi is not INF:
                hi = Fraction(hi) if not isinstance(hi, Fraction) else hi
            if lo < hi:
                norm.append((lo, hi))
        norm.sort(key=lambda iv: ((0 if iv[0] is NEG_INF else 1), iv[0] if iv[0] is not NEG_INF else 0))
        merged = []
        for lo, hi in norm:
            if merged and lo <= merged[-1][1]:
                # Open intervals merge only on genuine overlap; touching ones
                # (lo == previous hi) stay separate.
                if lo < merged[-1][1]:
                    merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
                    continue
            merged.append((lo, hi))
        return RealOpenSet(tuple(merged))

    @staticmethod
    def whole_line() -> "RealOpenSet":
        return RealOpenSet(((NEG_INF, INF),))

    @staticmethod
    def empty() -> "RealOpenSet":
        return RealOpenSet(())

    def contains(self, t) -> bool:
        t = Fraction(t)
        return any(lo < t < hi for lo, hi in self.intervals)

    def is_subset_of(self, other: "RealOpenSet") -> bool:
        return self.intersect(other) == self

    def union(self, other: "RealOpenSet") -> "RealOpenSet":
        return RealOpenSet.make(self.intervals + other.intervals)

    def intersect(self, other: "RealOpenSet") -> "RealOpenSet":
        out = []
        for lo1, hi1 in self.intervals:
            for lo2, hi2 in other.intervals:
                lo = lo1 if lo2 <= lo1 else lo2
                hi = hi1 if hi1 <= hi2 else hi2
                if lo < hi:
                    out.append((lo, hi))
        return RealOpenSet.make(out)

    def __bool__(self):
        return bool(self.intervals)


@dataclass(frozen=True)
class TypedInterval:
    """An interval with per-endpoint open/closed flags; may be a point or
    empty (empty is represented by `None` at the call sites)."""

    lo: Endpoint
    hi: Endpoint
    lo_closed: bool
    hi_closed: bool

    def contains(self, t) -> bool:
        t = Fraction(t)
        if self.lo is not NEG_INF:
            if t < self.lo or (t == self.lo and not self.lo_closed):
                return False
        if self.hi is not INF:
            if t > self.hi or (t == self.hi and not self.hi_closed):
                return False
        return True


# ---------------------------------------------------------------------------
# The map rho


def rho(p: StripPoint) -> Tuple[RealOpenSet, RealOpenSet]:
    """The pair of open subsets of the line attached to a strip point.

    The first component collects the levels t with -pi - y < arctan t
    < pi - x; the second is the complement of {t : y <= arctan t <= x}."""
    _require_in_strip(p)

    # First component: one open interval, clamped to the range of arctan.
    lowc = (-p.y).shift_pi(-1)   # the coordinate -pi - y
    upc = (-p.x).shift_pi(1)     # the coordinate pi - x
    if lowc >= HALF_PI or upc <= NEG_HALF_PI:
        rho1 = RealOpenSet.empty()
    else:
        lo = NEG_INF if lowc <= NEG_HALF_PI else lowc.v
        hi = INF if upc >= HALF_PI else upc.v
        rho1 = RealOpenSet.make([(lo, hi)])

    # Second component: complement of a closed arctan-interval; at most two
    # open rays.
    if p.y > p.x or p.y >= HALF_PI or p.x <= NEG_HALF_PI:
        rho0 = RealOpenSet.whole_line()
    else:
        rays = []
        if p.y > NEG_HALF_PI:
            # here p.y = (0, v) with v finite
            rays.append((NEG_INF, p.y.v))
        if p.x < HALF_PI:
            rays.append((p.x.v, INF))
        rho0 = RealOpenSet.make(rays)
    return rho1, rho0


# ---------------------------------------------------------------------------
# Fundamental domain, tiles, blocks


def in_diag_downset(p: StripPoint) -> bool:
    """Membership in the downset of the diagonal embedding's image."""
    return p.y <= p.x and p.y <= HALF_PI and p.x >= NEG_HALF_PI


def in_shifted_diag_downset(p: StripPoint) -> bool:
    """Membership in the T-preimage of the diagonal downset."""
    return p.x >= HALF_PI and p.y <= NEG_HALF_PI and p.y.shift_pi(2) <= p.x


def in_fundamental_domain(p: StripPoint) -> bool:
    return in_diag_downset(p) and not in_shifted_diag_downset(p)


TILE_WINDOW = 16


def tile_index(p: StripPoint) -> int:
    """The unique n such that applying T n times lands in the fundamental
    domain.  Only defined away from the strip boundary."""
    if strip_location(p) != "interior":
        raise ValueError(f"tile index undefined for non-interior point {p}")
    found = None
    for n in range(-TILE_WINDOW, TILE_WINDOW + 1):
        if in_fundamental_domain(t_power(p, n)):
            if found is not None:
                raise AssertionError(f"tile index not unique for {p}")
            found = n
    if found is None:
        raise ValueError(f"no tile index found for {p} within the window")
    return found


def block_contains(v: StripPoint, p: StripPoint) -> bool:
    """Support predicate of the indecomposable block at v: p must be below v
    and interior to the upset of T^-1(v); boundary points never qualify."""
    if strip_location(p) != "interior":
        return False
    if not p.precedes(v):
        return False
    w = t_inverse(v)
    return p.x < w.x and p.y > w.y


# ---------------------------------------------------------------------------
# Region classification and the levelset bijection

ORD = "Ord"
REL = "Rel"
EXT = "Ext"


def classify_region(u: StripPoint):
    """Classify a diagram point: returns (degree n, region, classical pair).

    The degree is the unique n whose T-translate meets the classical
    persistence line; births/deaths at exactly pi/2 count as absolute."""
    if strip_location(u) != "interior" or not in_diag_downset(u):
        raise ValueError(f"not a diagram point: {u}")
    found = None
    for n in range(-TILE_WINDOW, TILE_WINDOW + 1):
        q = t_power(u, n)
        if q.x > NEG_HALF_PI and q.y >= NEG_HALF_PI:
            if found is not None:
                raise AssertionError(f"classification degree not unique for {u}")
            found = (n, q)
    if found is None:
        raise ValueError(f"no classification degree found for {u}")
    n, q = found
    birth_rel = q.x < HALF_PI
    death_abs = q.y < HALF_PI
    if birth_rel and death_abs:
        region = EXT
        pair = (q.y.v, q.x.v)
    elif birth_rel:
        region = REL
        pair = (-q.y.v, q.x.v)
    else:
        assert death_abs, f"forbidden (absolute birth, relative death) at {u}"
        region = ORD
        pair = (q.y.v, -q.x.v)
    return n, region, pair


def beta_levelset(u: StripPoint) -> Tuple[int, Optional[TypedInterval]]:
    """The levelset bar of a diagram point: its tile index together with the
    difference of the two rho components at the fundamental-domain
    representative."""
    n = tile_index(u)
    rho1, rho0 = rho(t_power(u, n))
    if not rho1.intervals:
        return n, None
    (a, b), = rho1.intervals
    # rho0 is a union of at most two rays (or the whole line); the bar is the
    # part of rho1 outside them.
    c = NEG_INF
    d = INF
    for lo, hi in rho0.intervals:
        if lo is NEG_INF and hi is INF:
            return n, None
        if lo is NEG_INF:
            c = hi
        elif hi is INF:
            d = lo
        else:
            raise AssertionError(f"unexpected rho0 shape at {u}: {rho0}")
    if c is NEG_INF or c <= a:
        lo, lo_closed = a, False
    else:
        lo, lo_closed = c, True
    if d is INF or d >= b:
        hi, hi_closed = b, False
    else:
        hi, hi_closed = d, True
    if lo is not NEG_INF and hi is not INF:
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            return n, None
    return n, TypedInterval(lo, hi, lo_closed, hi_closed)


def diag_point(t) -> StripPoint:
    """The diagonal embedding of a level t (rational or +inf)."""
    v = t if t is INF else Fraction(t)
    return StripPoint(Coord(0, v), Coord(0, v))


# ---------------------------------------------------------------------------
# Floating-point oracle (tests only)
#
# These evaluate the transcendental definitions of the maps above: the circle
# map phi(s) = (1, s)/sqrt(1+s^2), the piecewise map g_a on the circle, its
# equivariant lift, and the conjugation sigma(t) = pi - t.


def float_g_lift(a: ShiftVector, theta: float) -> float:
    """The lift of the circle self-map associated with a shift, normalized to
    fix pi/2 and commute with full turns."""
    a1 = float(a.a1)
    a2 = float(a.a2)
    m = math.floor((theta + math.pi / 2) / (2 * math.pi))
    th0 = theta - 2 * math.pi * m  # in [-pi/2, 3*pi/2)
    eps = 1e-13
    if abs(th0 + math.pi / 2) < eps:
        r = -math.pi / 2
    elif abs(th0 - math.pi / 2) < eps:
        r = math.pi / 2
    elif th0 < math.pi / 2:
        r = math.atan(math.tan(th0) + a2)
    else:
        r = math.atan(math.tan(th0) - a1) + math.pi
    return r + 2 * math.pi * m


def float_alpha(a: ShiftVector, xy: Tuple[float, float]) -> Tuple[float, float]:
    x, y = xy
    return (math.pi - float_g_lift(a, math.pi - x), float_g_lift(a, y))


def float_t(xy: Tuple[float, float]) -> Tuple[float, float]:
    x, y = xy
    return (-math.pi - y, math.pi - x)


def float_t_inverse(xy: Tuple[float, float]) -> Tuple[float, float]:
    x, y = xy
    return (math.pi - y, -math.pi - x)


def float_rho1_bounds(xy: Tuple[float, float]) -> Tuple[float, float]:
    """Angle-space bounds of the first rho component, clamped to the range of
    arctan."""
    x, y = xy
    return (max(-math.pi - y, -math.pi / 2), min(math.pi - x, math.pi / 2))


def float_in_strip(xy: Tuple[float, float], tol: float = 0.0) -> bool:
    x, y = xy
    return -math.pi - tol <= x + y <= math.pi + tol
