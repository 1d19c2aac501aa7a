"""
Closed-form torsion and small-height bounds for elliptic curves over
infinite algebraic extensions: totally real, cyclotomic and totally p-adic.

The calculators accept a rational h(j) (int or Fraction) and then return exact
Fractions wherever the formula is rational, so tabulated values can be
compared without tolerance.
"""
import logging
import math
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from sympy import isprime

from src.errors import DomainError

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]

E_RATIO = math.e / (math.e - 1)
H_STAR_OFFSET = 10
H_DAGGER_OFFSET = Fraction(32, 5)


class BoundsReport(BaseModel):
    """Bounds of one regime for one value of h(j)"""
    regime: str
    h_j: float = Field(ge=0.0)
    h_star: float = Field(ge=10.0, description="h(j) + 10")
    h_dagger: float = Field(ge=6.4, description="h(j)/6 + 32/5")
    torsion_bound: float = Field(gt=0.0)
    liminf_bound: float = Field(gt=0.0)
    min_height_bound: float = Field(gt=0.0)
    exact: Dict[str, str] = Field(
        default_factory=dict, description="Exact rational values when h(j) is rational"
    )
    params: Dict[str, float] = Field(default_factory=dict)
    proof_side_torsion: Optional[float] = Field(
        default=None, description="Torsion count from N <= A log N + B before rounding up"
    )


def _exact(value: Number) -> Number:
    return Fraction(value) if isinstance(value, (int, Fraction)) else float(value)


def solve_nlogn(A: Number, B: Number) -> float:
    """(e/(e-1))(A log A + B): every N >= 1 with N <= A log N + B is at most this"""
    if A <= 0 or B < 0:
        raise DomainError(f"❌ ERROR: Need A > 0 and B >= 0, got A={A}, B={B}")
    core = float(A) * math.log(float(A)) + float(B)
    if core <= 0:
        raise DomainError(f"❌ ERROR: A log A + B = {core} is not positive")
    return E_RATIO * core


def max_nlogn_solution(A: Number, B: Number, n_max: int = 10 ** 6) -> int:
    """Largest integer N <= n_max with N <= A log N + B (0 if none)"""
    N = np.arange(1, n_max + 1, dtype=float)
    ok = np.nonzero(N <= float(A) * np.log(N) + float(B))[0]
    return int(ok[-1]) + 1 if len(ok) else 0


def small_points_consequences(S: Number, T: Number) -> Tuple[Number, Number, Number]:
    """
    From #{P : hhat(P) <= S} <= T: torsion count <= T, liminf hhat >= S and
    hhat(P) >= S/T^2 for non-torsion P.
    """
    if S < 0 or T < 1:
        raise DomainError(f"❌ ERROR: Need S >= 0 and T >= 1, got S={S}, T={T}")
    S, T = _exact(S), _exact(T)
    return T, S, S / (T * T)


def _h_star(h_j: Number) -> Number:
    if h_j < 0:
        raise DomainError(f"❌ ERROR: h(j) must be nonnegative, got {h_j}")
    return _exact(h_j) + H_STAR_OFFSET


def totally_real_bounds(h_j: Number) -> Tuple[Number, Number, Number]:
    """(3 h*^2, 1/(24 h*), 1/(216 h*^5)) with h* = h(j) + 10"""
    h_star = _h_star(h_j)
    return 3 * h_star ** 2, 1 / (24 * h_star), 1 / (216 * h_star ** 5)


def cyclotomic_bounds(h_j: Number) -> Tuple[Number, Number, Number]:
    """(36 h*^4, 1/(96 h*), 1/(864 h*^5))"""
    h_star = _h_star(h_j)
    return 36 * h_star ** 4, 1 / (96 * h_star), 1 / (864 * h_star ** 5)


def h_dagger(h_j: Number) -> Number:
    return _exact(h_j) / 6 + H_DAGGER_OFFSET


def _check_odd_prime(p: int):
    if p == 2 or not isprime(p):
        raise DomainError(f"❌ ERROR: p must be an odd prime, got {p}")


def padic_M(p: int, nu: int, e: int = 1, f: int = 1) -> float:
    """max(q + 1 + 2 sqrt q, 12 e nu) with q = p^f"""
    q = p ** f
    return max(q + 1 + 2 * math.sqrt(q), 12 * e * nu)


def _padic_triple(h_j: Number, p: int, M: float, e: int) -> Tuple[float, float, float]:
    log_p = math.log(p)
    scaled = e * M
    inner = math.log(scaled) + 2 * log_p / e + float(h_dagger(h_j))
    torsion = 8 * scaled / (5 * log_p) * inner
    liminf = log_p / (8 * scaled)
    minimum = 25 / 512 * (log_p / scaled) ** 3 * inner ** -2
    return torsion, liminf, minimum


def totally_padic_bounds(h_j: Number, p: int, nu: int) -> Tuple[float, float, float]:
    """
    Bounds for points over a totally p-adic field; M = max(p + 1 + 2 sqrt p, 12 nu)
    and h_dagger = h(j)/6 + 32/5.
    """
    return totally_padic_ef_bounds(h_j, p, nu, 1, 1)


def totally_padic_ef_bounds(h_j: Number, p: int, nu: int, e: int, f: int
                            ) -> Tuple[float, float, float]:
    """Bounds for fields totally p-adic of type (e, f); q = p^f"""
    _check_odd_prime(p)
    if h_j < 0 or nu < 0:
        raise DomainError("❌ ERROR: h(j) and nu must be nonnegative")
    if e < 1 or f < 1:
        raise DomainError(f"❌ ERROR: Need e, f >= 1, got e={e}, f={f}")
    return _padic_triple(h_j, p, padic_M(p, nu, e, f), e)


def padic_proof_side_torsion(h_j: Number, p: int, nu: int) -> float:
    """Largest N with N <= A log N + B for A = M / log p and B = A (2 log p + h_dagger)"""
    _check_odd_prime(p)
    A = padic_M(p, nu) / math.log(p)
    B = A * (2 * math.log(p) + float(h_dagger(h_j)))
    return solve_nlogn(A, B)


def totally_real_proof_side_torsion(h_j: Number) -> float:
    """Largest N with N <= A log N + B for A = 2 h* and B = 4 h* (h/12 + 16/5)"""
    h_star = float(_h_star(h_j))
    return solve_nlogn(2 * h_star, 4 * h_star * (float(h_j) / 12 + 16 / 5))


def bounds_report(regime: str, h_j: Number, p: Optional[int] = None, nu: int = 0,
                  e: int = 1, f: int = 1) -> BoundsReport:
    """Run one calculator and package its result"""
    params: Dict[str, float] = {}
    proof_side = None
    if regime == 'tr':
        triple = totally_real_bounds(h_j)
        proof_side = totally_real_proof_side_torsion(h_j)
    elif regime == 'cyc':
        triple = cyclotomic_bounds(h_j)
    elif regime in ('padic', 'padic-ef'):
        if p is None:
            raise DomainError("❌ ERROR: The p-adic regimes need --p")
        if regime == 'padic':
            triple = totally_padic_bounds(h_j, p, nu)
            proof_side = padic_proof_side_torsion(h_j, p, nu)
        else:
            triple = totally_padic_ef_bounds(h_j, p, nu, e, f)
            params.update({'e': e, 'f': f})
        params.update({'p': p, 'nu': nu, 'M': padic_M(p, nu, e if regime == 'padic-ef' else 1,
                                                      f if regime == 'padic-ef' else 1)})
    else:
        raise DomainError(f"❌ ERROR: Unknown regime {regime!r}")

    exact = {}
    names = ('torsion_bound', 'liminf_bound', 'min_height_bound')
    for name, value in zip(names, triple):
        if isinstance(value, Fraction):
            exact[name] = str(value)
    logger.debug("Bounds %s at h(j)=%s: %s", regime, h_j, triple)
    return BoundsReport(
        regime=regime, h_j=float(h_j), h_star=float(_h_star(h_j)),
        h_dagger=float(h_dagger(h_j)),
        torsion_bound=float(triple[0]), liminf_bound=float(triple[1]),
        min_height_bound=float(triple[2]), exact=exact, params=params,
        proof_side_torsion=proof_side,
    )
