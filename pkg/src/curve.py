"""
Exact arithmetic for Weierstrass curves over the rationals.

Curves, points and symbolic logarithms are immutable values, so every
function here can be shared freely between threads.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Optional, Tuple, Union

from sympy import factorint, multiplicity

from src.config import Config
from src.errors import (NonMinimalModel, NonSemistable, ParseError,
                        PointNotOnCurve, SingularCurve)

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


def valuation(value: Rational, p: int) -> Union[int, float]:
    """p-adic valuation of a rational; math.inf for zero"""
    value = Fraction(value)
    if value == 0:
        return math.inf
    return (multiplicity(p, abs(value.numerator))
            - multiplicity(p, value.denominator))


def half_b2(t: Fraction) -> Fraction:
    """One half of the periodic second Bernoulli polynomial"""
    t = Fraction(t) % 1
    return (t * t - t + Fraction(1, 6)) / 2


@total_ordering
@dataclass(frozen=True)
class LogValue:
    """coefficient * log(base_prime), kept exact"""
    coefficient: Fraction
    base_prime: int

    def __post_init__(self):
        object.__setattr__(self, 'coefficient', Fraction(self.coefficient))

    @classmethod
    def zero(cls, p: int) -> 'LogValue':
        return cls(Fraction(0), p)

    def _same_prime(self, other: 'LogValue'):
        if other.base_prime != self.base_prime:
            raise ValueError(
                f"cannot combine log {self.base_prime} with log {other.base_prime}")

    def __add__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        self._same_prime(other)
        return LogValue(self.coefficient + other.coefficient, self.base_prime)

    def __sub__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        self._same_prime(other)
        return LogValue(self.coefficient - other.coefficient, self.base_prime)

    def __neg__(self):
        return LogValue(-self.coefficient, self.base_prime)

    def __mul__(self, scalar: Rational):
        return LogValue(self.coefficient * Fraction(scalar), self.base_prime)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Rational):
        return LogValue(self.coefficient / Fraction(scalar), self.base_prime)

    def __lt__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        self._same_prime(other)
        return self.coefficient < other.coefficient

    def to_real(self) -> float:
        return float(self.coefficient) * math.log(self.base_prime)

    def as_json(self) -> dict:
        return {
            'coeff_num': self.coefficient.numerator,
            'coeff_den': self.coefficient.denominator,
            'prime': self.base_prime,
        }


class ReductionKind(str, Enum):
    GOOD = 'Good'
    MULTIPLICATIVE = 'Multiplicative'


@dataclass(frozen=True)
class BadPrime:
    p: int
    ord_disc: int
    ord_c4: Union[int, float]
    kind: ReductionKind


@dataclass(frozen=True)
class Point:
    """An affine rational point, or the identity when x and y are None"""
    x: Optional[Fraction] = None
    y: Optional[Fraction] = None

    @classmethod
    def identity(cls) -> 'Point':
        return cls()

    @property
    def is_identity(self) -> bool:
        return self.x is None

    def __str__(self):
        if self.is_identity:
            return 'O'
        return f"{self.x},{self.y}"


O = Point.identity()


@dataclass(frozen=True)
class Curve:
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction
    b2: Fraction = field(compare=False)
    b4: Fraction = field(compare=False)
    b6: Fraction = field(compare=False)
    b8: Fraction = field(compare=False)
    c4: Fraction = field(compare=False)
    c6: Fraction = field(compare=False)
    disc: Fraction = field(compare=False)
    j: Fraction = field(compare=False)
    bad_primes: Tuple[BadPrime, ...] = field(compare=False)

    @property
    def a_invariants(self) -> Tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def label(self) -> str:
        return ','.join(str(a) for a in self.a_invariants)

    def bad_prime(self, p: int) -> Optional[BadPrime]:
        for bad in self.bad_primes:
            if bad.p == p:
                return bad
        return None

    def contains(self, P: Point) -> bool:
        if P.is_identity:
            return True
        x, y = P.x, P.y
        return (y * y + self.a1 * x * y + self.a3 * y
                == x ** 3 + self.a2 * x * x + self.a4 * x + self.a6)

    def __str__(self):
        return f"[{self.label}]"


def weierstrass_invariants(a1, a2, a3, a4, a6) -> dict:
    """b-, c-quantities, discriminant and (when defined) j of a Weierstrass model"""
    a1, a2, a3, a4, a6 = (Fraction(a) for a in (a1, a2, a3, a4, a6))
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return {
        'b2': b2, 'b4': b4, 'b6': b6, 'b8': b8, 'c4': c4, 'c6': c6, 'disc': disc,
        'j': c4 ** 3 / disc if disc != 0 else None,
    }


def make_curve(a1, a2, a3, a4, a6) -> Curve:
    """
    Build a curve from an integral minimal semistable model

    Raises:
        SingularCurve, NonMinimalModel, NonSemistable
    """
    coeffs = tuple(Fraction(a) for a in (a1, a2, a3, a4, a6))
    if any(a.denominator != 1 for a in coeffs):
        raise NonMinimalModel(f"❌ ERROR: Model {coeffs} is not integral")
    inv = weierstrass_invariants(*coeffs)
    if inv['disc'] == 0:
        raise SingularCurve(f"❌ ERROR: Model {coeffs} has zero discriminant")

    bad_primes = []
    for p, ord_disc in sorted(factorint(abs(inv['disc'].numerator)).items()):
        ord_c4 = valuation(inv['c4'], p)
        if ord_c4 >= 4 and ord_disc >= 12:
            raise NonMinimalModel(f"❌ ERROR: Model is not minimal at p = {p}")
        if ord_c4 > 0:
            raise NonSemistable(f"❌ ERROR: Additive reduction at p = {p}")
        bad_primes.append(BadPrime(p, ord_disc, ord_c4, ReductionKind.MULTIPLICATIVE))

    curve = Curve(*coeffs, bad_primes=tuple(bad_primes), **inv)
    logger.debug("Built curve %s with bad primes %s", curve, [b.p for b in bad_primes])
    return curve


def parse_curve(text: str) -> Curve:
    """Parse 'a1,a2,a3,a4,a6' into a Curve"""
    parts = [part.strip() for part in text.split(',')]
    if len(parts) != 5:
        raise ParseError(f"❌ ERROR: Expected five coefficients, got {text!r}")
    try:
        coeffs = [int(part) for part in parts]
    except ValueError:
        raise ParseError(f"❌ ERROR: Curve coefficients must be integers: {text!r}")
    return make_curve(*coeffs)


def parse_point(text: str, curve: Optional[Curve] = None) -> Point:
    """Parse 'x,y' (rationals such as '-5/9') or 'O'; checks membership when a curve is given"""
    text = text.strip()
    if text.upper() == 'O':
        return O
    parts = [part.strip() for part in text.split(',')]
    if len(parts) != 2:
        raise ParseError(f"❌ ERROR: Expected 'x,y' or 'O', got {text!r}")
    try:
        P = Point(Fraction(parts[0]), Fraction(parts[1]))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"❌ ERROR: Malformed point {text!r}")
    if curve is not None:
        _require_on_curve(curve, P)
    return P


def _require_on_curve(C: Curve, P: Point):
    if not C.contains(P):
        raise PointNotOnCurve(f"❌ ERROR: Point ({P}) is not on curve {C}")


def point_neg(C: Curve, P: Point) -> Point:
    _require_on_curve(C, P)
    if P.is_identity:
        return P
    return Point(P.x, -P.y - C.a1 * P.x - C.a3)


@lru_cache(maxsize=65536)
def point_add(C: Curve, P: Point, Q: Point) -> Point:
    _require_on_curve(C, P)
    _require_on_curve(C, Q)
    if P.is_identity:
        return Q
    if Q.is_identity:
        return P
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if y1 + y2 + C.a1 * x2 + C.a3 == 0:
            return O
        denom = 2 * y1 + C.a1 * x1 + C.a3
        slope = (3 * x1 * x1 + 2 * C.a2 * x1 + C.a4 - C.a1 * y1) / denom
        intercept = (-x1 ** 3 + C.a4 * x1 + 2 * C.a6 - C.a3 * y1) / denom
    else:
        slope = (y2 - y1) / (x2 - x1)
        intercept = (y1 * x2 - y2 * x1) / (x2 - x1)
    x3 = slope * slope + C.a1 * slope - C.a2 - x1 - x2
    y3 = -(slope + C.a1) * x3 - intercept - C.a3
    return Point(x3, y3)


def point_sub(C: Curve, P: Point, Q: Point) -> Point:
    return point_add(C, P, point_neg(C, Q))


def point_mul(C: Curve, n: int, P: Point) -> Point:
    """n*P by double-and-add"""
    _require_on_curve(C, P)
    if n < 0:
        return point_mul(C, -n, point_neg(C, P))
    result, addend = O, P
    while n:
        if n & 1:
            result = point_add(C, result, addend)
        addend = point_add(C, addend, addend)
        n >>= 1
    return result


def torsion_order(C: Curve, P: Point) -> Optional[int]:
    """Exact order of P when it is at most 12, else None"""
    _require_on_curve(C, P)
    Q = P
    for m in range(1, Config.TORSION_ORDER_LIMIT + 1):
        if Q.is_identity:
            return m
        Q = point_add(C, Q, P)
    return None


def weil_height(alpha: Rational) -> float:
    """log max(|m|, |n|) for alpha = m/n in lowest terms"""
    alpha = Fraction(alpha)
    if alpha == 0:
        return 0.0
    return math.log(max(abs(alpha.numerator), alpha.denominator))


def logplus_abs(value: Rational) -> float:
    """Archimedean log+ |value|"""
    value = abs(Fraction(value))
    if value <= 1:
        return 0.0
    return math.log(value.numerator) - math.log(value.denominator)


def j_height(C: Curve) -> float:
    return weil_height(C.j)


@lru_cache(maxsize=65536)
def denominator_primes(P: Point) -> Tuple[int, ...]:
    """Primes p with ord_p(x(P)) < 0"""
    if P.is_identity:
        return ()
    root = math.isqrt(P.x.denominator)
    return tuple(sorted(factorint(root))) if root > 1 else ()
