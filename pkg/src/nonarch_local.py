"""
p-adic side of the height machinery: reduction data, the retraction onto the
skeleton, the Neron function and the exact non-archimedean discrepancy.

Every value is an exact LogValue, so identities between them are checked with
zero tolerance.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime
from sympy.ntheory import sqrt_mod

from src.curve import (Curve, LogValue, O, Point, ReductionKind, denominator_primes,
                       half_b2, point_sub, valuation)
from src.errors import DomainError, DuplicatePoints, SingularAtOrigin

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlaceData:
    p: int
    kind: ReductionKind
    nu: int
    logplus_j: LogValue

    @property
    def is_good(self) -> bool:
        return self.kind is ReductionKind.GOOD


@dataclass(frozen=True)
class PairSplit:
    i_star: LogValue
    j_pair: LogValue


@dataclass(frozen=True)
class NonarchDiscrepancy:
    D: LogValue
    D_i: LogValue
    D_j: LogValue


@dataclass(frozen=True)
class BallCounts:
    counts: Dict[int, int]
    D_i_r: float


def reduction_type(C: Curve, p: int) -> PlaceData:
    if not isprime(p):
        raise DomainError(f"❌ ERROR: {p} is not a prime")
    bad = C.bad_prime(p)
    if bad is None:
        return PlaceData(p, ReductionKind.GOOD, 0, LogValue.zero(p))
    return PlaceData(p, bad.kind, bad.ord_disc, LogValue(Fraction(bad.ord_disc), p))


def has_singular_reduction(C: Curve, place: PlaceData, P: Point) -> bool:
    """P reduces to the node: p-integral with both partial derivatives divisible by p"""
    if place.is_good or P.is_identity or valuation(P.x, place.p) < 0:
        return False
    p = place.p
    grad_x = C.a1 * P.y - 3 * P.x ** 2 - 2 * C.a2 * P.x - C.a4
    grad_y = 2 * P.y + C.a1 * P.x + C.a3
    return valuation(grad_x, p) > 0 and valuation(grad_y, p) > 0


def _node_mod_p(C: Curve, p: int) -> Tuple[int, int]:
    a1, a2, a3, a4, a6 = (int(a) for a in C.a_invariants)
    if p > 3:
        # Double root X0 = -3 c6 / c4 of X^3 - 27 c4 X - 54 c6, with X = 36x + 3 b2
        c4, c6, b2 = int(C.c4), int(C.c6), int(C.b2)
        X0 = -3 * c6 * pow(c4, -1, p) % p
        x0 = (X0 - 3 * b2) * pow(36, -1, p) % p
        y0 = -(a1 * x0 + a3) * pow(2, -1, p) % p
        return x0, y0
    for x0 in range(p):
        for y0 in range(p):
            f = y0 * y0 + a1 * x0 * y0 + a3 * y0 - x0 ** 3 - a2 * x0 * x0 - a4 * x0 - a6
            gx = a1 * y0 - 3 * x0 * x0 - 2 * a2 * x0 - a4
            gy = 2 * y0 + a1 * x0 + a3
            if f % p == 0 and gx % p == 0 and gy % p == 0:
                return x0, y0
    raise ValueError(f"no singular point mod {p}")


def tangent_slopes(a1: int, constant: int, p: int, precision: int) -> Optional[Tuple[int, int]]:
    """
    The two roots of t^2 + a1 t - constant mod p^precision, distinct mod p, from
    the square roots s = 2t + a1 of a1^2 + 4 constant mod 4 p^precision.

    None when the roots are not defined over Q_p or collide mod p.
    """
    modulus = p ** precision
    roots = sqrt_mod((a1 * a1 + 4 * constant) % (4 * modulus), 4 * modulus, all_roots=True)
    slopes = sorted({((s - a1) // 2) % modulus for s in roots or ()})
    if len(slopes) != 2 or (slopes[1] - slopes[0]) % p == 0:
        return None
    return slopes[0], slopes[1]


@lru_cache(maxsize=256)
def node_branches(C: Curve, p: int, nu: int) -> Optional[Tuple[int, int, int, int, int]]:
    """
    p-adic critical point (xc, yc) of the Weierstrass equation near the node and
    the slopes alpha < beta of its two tangent lines, all mod p^(nu+2).

    Returns (xc, yc, alpha, beta, precision), or None when the tangent slopes
    are not defined over Q_p.
    """
    a1, a2, a3, a4, a6 = (int(a) for a in C.a_invariants)
    precision = nu + 2
    modulus = p ** precision
    x, y = _node_mod_p(C, p)
    for _ in range(4 * precision + 8):
        grad_x = (a1 * y - 3 * x * x - 2 * a2 * x - a4) % modulus
        grad_y = (2 * y + a1 * x + a3) % modulus
        if grad_x == 0 and grad_y == 0:
            break
        hxx, hxy, hyy = -6 * x - 2 * a2, a1, 2
        inverse = pow((hxx * hyy - hxy * hxy) % modulus, -1, modulus)
        x = (x - (hyy * grad_x - hxy * grad_y) * inverse) % modulus
        y = (y - (-hxy * grad_x + hxx * grad_y) * inverse) % modulus
    slopes = tangent_slopes(a1, 3 * x + a2, p, precision)
    if slopes is None:
        return None
    alpha, beta = slopes
    return x, y, alpha, beta, precision


def retraction(C: Curve, place: PlaceData, P: Point) -> Fraction:
    """
    Position of P on the skeleton R/Z, an element of (1/nu)Z mod 1.

    The component index is n = min(ord_p(2y + a1 x + a3), nu/2); the sign is
    read off the tangent branch through the node along which P lies deeper.
    """
    if not has_singular_reduction(C, place, P):
        return Fraction(0)
    p, nu = place.p, place.nu
    order = valuation(2 * P.y + C.a1 * P.x + C.a3, p)
    depth = Fraction(nu, 2) if 2 * order >= nu else Fraction(order)
    if 2 * depth == nu:
        return Fraction(1, 2)
    branches = node_branches(C, p, nu)
    if branches is None:
        logger.warning("⚠️ Node at p=%d has no rational tangents; using n/nu for %s", p, P)
        return depth / nu
    xc, yc, alpha, beta, precision = branches
    along_alpha = min(valuation(P.y - yc - alpha * (P.x - xc), p), precision)
    along_beta = min(valuation(P.y - yc - beta * (P.x - xc), p), precision)
    if along_alpha > along_beta:
        return depth / nu
    if along_alpha < along_beta:
        return 1 - depth / nu
    return Fraction(1, 2)


def neron_lambda_nonarch(C: Curve, place: PlaceData, P: Point) -> LogValue:
    """Neron function at p, normalized to absorb (1/12) log+|j|_p"""
    if P.is_identity:
        raise SingularAtOrigin("❌ ERROR: The Neron function is singular at the origin")
    p, nu = place.p, place.nu
    if has_singular_reduction(C, place, P):
        return LogValue(half_b2(retraction(C, place, P)) * nu, p)
    pole = max(0, -valuation(P.x, p))
    return LogValue(Fraction(pole, 2) + Fraction(nu, 12), p)


def lambda_star(C: Curve, place: PlaceData, P: Point) -> LogValue:
    if P.is_identity:
        return LogValue(Fraction(place.nu, 12), place.p)
    return neron_lambda_nonarch(C, place, P)


def pair_split(C: Curve, place: PlaceData, P: Point, Q: Point) -> PairSplit:
    """lambda*(P - Q) = i* + j with j = 1/2 B2(r(P - Q)) nu log p"""
    difference = point_sub(C, P, Q)
    j_pair = LogValue(half_b2(retraction(C, place, difference)) * place.nu, place.p)
    return PairSplit(lambda_star(C, place, difference) - j_pair, j_pair)


def _require_distinct(Z: Sequence[Point]):
    seen = set()
    for P in Z:
        if P in seen:
            raise DuplicatePoints(f"❌ ERROR: Point {P} occurs twice")
        seen.add(P)


def nonarch_discrepancy(C: Curve, place: PlaceData, Z: Sequence[Point]) -> NonarchDiscrepancy:
    """D = (1/N^2) sum_{i,j} lambda*(P_i - P_j) = D_i + D_j"""
    _require_distinct(Z)
    N = len(Z)
    p = place.p
    diagonal = pair_split(C, place, Z[0], Z[0]) if N else None
    D_i = LogValue.zero(p)
    D_j = LogValue.zero(p)
    D = LogValue.zero(p)
    if diagonal is not None:
        D_j += diagonal.j_pair * N
        D += lambda_star(C, place, O) * N
    for i in range(N):
        for k in range(i + 1, N):
            split = pair_split(C, place, Z[i], Z[k])
            D_i += split.i_star * 2
            D_j += split.j_pair * 2
            D += lambda_star(C, place, point_sub(C, Z[i], Z[k])) * 2
    scale = Fraction(1, N * N) if N else Fraction(0)
    return NonarchDiscrepancy(D * scale, D_i * scale, D_j * scale)


def retraction_discrepancy_fourier(place: PlaceData, r_values: Sequence[Fraction],
                                   k_max: int) -> Tuple[float, float]:
    """
    nu log p sum_{0<|k|<=K} (2 pi k)^-2 |mean exp(2 pi i k r_j)|^2 and its tail bound
    nu log p / (2 pi^2 K).
    """
    if place.nu < 1:
        raise DomainError("❌ ERROR: The retraction discrepancy needs nu >= 1")
    r = np.array([float(Fraction(value) % 1) for value in r_values])
    k = np.arange(1, k_max + 1)
    phase = 2 * math.pi * np.outer(k, r)
    power = np.mean(np.cos(phase), axis=1) ** 2 + np.mean(np.sin(phase), axis=1) ** 2
    scale = place.nu * math.log(place.p)
    value = scale * math.fsum((2 * power / (2 * math.pi * k) ** 2).tolist())
    return value, scale / (2 * math.pi ** 2 * k_max)


def retraction_measure_discrepancy(place: PlaceData, m: int) -> LogValue:
    """D_j of m retraction values equidistributed on (1/m)Z/Z: nu log p / (12 m^2)"""
    return LogValue(Fraction(place.nu, 12 * m * m), place.p)


def retraction_homomorphism_check(C: Curve, place: PlaceData, Z: Sequence[Point]) -> bool:
    """r(P_i) - r(P_j) == r(P_i - P_j) mod 1 for all pairs"""
    values = [retraction(C, place, P) for P in Z]
    for i, P in enumerate(Z):
        for k, Q in enumerate(Z):
            expected = (values[i] - values[k]) % 1
            if retraction(C, place, point_sub(C, P, Q)) != expected:
                logger.error("❌ Retraction is not additive at p=%d on %s, %s", place.p, P, Q)
                return False
    return True


def elkiesna_check(C: Curve, place: PlaceData, Z: Sequence[Point]) -> bool:
    """sum_{i != j} lambda(P_i - P_j) == N^2 D - (N/12) nu log p, exactly, and D >= 0"""
    N = len(Z)
    p = place.p
    off_diagonal = LogValue.zero(p)
    for i in range(N):
        for k in range(N):
            if i != k:
                off_diagonal += neron_lambda_nonarch(C, place, point_sub(C, Z[i], Z[k]))
    result = nonarch_discrepancy(C, place, Z)
    rhs = result.D * (N * N) - LogValue(Fraction(N * place.nu, 12), p)
    holds = (off_diagonal == rhs and result.D.coefficient >= 0
             and result.D_i.coefficient >= 0 and result.D_j.coefficient >= 0
             and result.D == result.D_i + result.D_j)
    if not holds:
        logger.error("❌ Non-archimedean identity failed at p=%d for %d points", p, N)
    return holds


def ball_counts(C: Curve, place: PlaceData, Z: Sequence[Point], k: int) -> BallCounts:
    """
    Classes of Z under i*(P, Q) >= k log p, keyed by the index of their first
    member, and D_{i,r} = sum (N_class / N)^2 for r = p^-k.
    """
    if k < 1:
        raise DomainError("❌ ERROR: Ball radius exponent must be positive")
    _require_distinct(Z)
    N = len(Z)
    parent = list(range(N))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(N):
        for m in range(i + 1, N):
            if pair_split(C, place, Z[i], Z[m]).i_star.coefficient >= k:
                a, b = find(i), find(m)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    counts: Dict[int, int] = {}
    for i in range(N):
        root = find(i)
        counts[root] = counts.get(root, 0) + 1
    D_i_r = math.fsum((count / N) ** 2 for count in counts.values())
    return BallCounts(counts, D_i_r)


def pigeonhole_lower_bound(N: int, classes: int, p: int) -> float:
    """Lower bound (1/m - 1/N) log p for D_i when Z meets at most m residue classes"""
    return (1 / classes - 1 / N) * math.log(p)


def congruence_primes(C: Curve, Z: Sequence[Point]) -> List[int]:
    """Good primes at which some pair of Z is congruent: primes in denominators of x(P_i - P_j)"""
    bad = {b.p for b in C.bad_primes}
    primes = set()
    for i in range(len(Z)):
        for k in range(i + 1, len(Z)):
            primes.update(denominator_primes(point_sub(C, Z[i], Z[k])))
    return sorted(primes - bad)
