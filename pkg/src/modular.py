"""
q-series for the modular j-function and reduction into the fundamental domain
"""
import logging

import mpmath
from mpmath import mp, mpc, mpf
from sympy import divisor_sigma

from src.errors import PrecisionExhausted

logger = logging.getLogger(__name__)

MAX_SERIES_TERMS = 10000


def reduce_basis(w1, w2, tol):
    """
    Move the basis (w1, w2) of a lattice so that w2/w1 lies in the standard
    fundamental domain: -1/2 < Re <= 1/2, |tau| >= 1, Re >= 0 on the unit arc.
    Works in the current mpmath precision.
    """
    w1, w2 = mpc(w1), mpc(w2)
    if (w2 / w1).imag < 0:
        w2 = -w2
    for _ in range(1000):
        tau = w2 / w1
        shift = int(mpmath.ceil(tau.real - mpf(1) / 2 - tol))
        if shift:
            w2 -= shift * w1
            tau = w2 / w1
        if abs(tau) < 1 - tol:
            w1, w2 = w2, -w1
            continue
        break
    else:
        raise PrecisionExhausted("❌ ERROR: Basis reduction did not terminate")
    tau = w2 / w1
    if abs(abs(tau) - 1) <= tol and tau.real < -tol:
        w1, w2 = w2, -w1
    return w1, w2


def reduce_tau(tau, tol):
    w1, w2 = reduce_basis(mpc(1), mpc(tau), tol)
    return w2 / w1


def _e4(q, eps):
    """Normalized Eisenstein series 1 + 240 sum sigma_3(n) q^n"""
    abs_q = abs(q)
    ratio = 16 * abs_q
    if ratio >= 1:
        raise PrecisionExhausted(f"❌ ERROR: |q| = {mpmath.nstr(abs_q, 5)} too large for E4 series")
    total, qn = mpc(0), mpc(1)
    for n in range(1, MAX_SERIES_TERMS):
        qn *= q
        total += int(divisor_sigma(n, 3)) * qn
        tail = 240 * (n + 1) ** 4 * abs_q ** (n + 1) / (1 - ratio)
        if tail < eps:
            return 1 + 240 * total
    raise PrecisionExhausted("❌ ERROR: E4 series did not converge")


def _eta_product(q, eps):
    """prod_{n>=1} (1 - q^n)"""
    abs_q = abs(q)
    product, qn = mpc(1), mpc(1)
    for n in range(1, MAX_SERIES_TERMS):
        qn *= q
        product *= 1 - qn
        if 2 * abs_q ** (n + 1) / (1 - abs_q) < eps:
            return product
    raise PrecisionExhausted("❌ ERROR: Discriminant product did not converge")


def j_invariant(tau, precision_bits: int):
    """
    j(tau) = E4^3 / (q prod (1 - q^n)^24), which equals 1728 g2^3 / Delta.
    tau is first moved into the fundamental domain, where |q| <= exp(-pi sqrt 3).
    """
    with mp.workprec(precision_bits + 30):
        tau = mpc(tau)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half plane")
        tol = mpf(2) ** (-(precision_bits // 2))
        tau = reduce_tau(tau, tol)
        q = mpmath.expjpi(2 * tau)
        eps = mpf(2) ** (-(precision_bits + 10))
        e4 = _e4(q, eps)
        eta = _eta_product(q, eps)
        value = e4 ** 3 / (q * eta ** 24)
    with mp.workprec(precision_bits):
        return +value
