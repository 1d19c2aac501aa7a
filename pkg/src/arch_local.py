"""
Complex-analytic side of the height machinery.

A curve over the reals is uniformized as C/L with L = omega1 (Z + tau Z) and tau
in the fundamental domain. Points are stored by their real coordinates (r1, r2)
with z = r1 + r2 tau. High-precision work (periods, elliptic logarithms and
the Neron function) uses mpmath; the heat-kernel lattice sums run in numpy.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from mpmath import mp, mpc, mpf

from src.config import Config
from src.curve import Curve, Point, logplus_abs, weierstrass_invariants
from src.errors import (DuplicatePoints, PointNotOnCurve, PrecisionExhausted,
                        SingularAtOrigin, SingularCurve, TauNotReal)
from src.lattice_sums import LatticeSeries
from src.modular import j_invariant, reduce_basis

logger = logging.getLogger(__name__)

MAX_LANDEN_STEPS = 200


@dataclass(frozen=True)
class TauLattice:
    """Normalized period ratio tau, q = exp(2 pi i tau) and the scale omega1 of the curve lattice"""
    tau: mpc
    q: mpc
    precision_bits: int
    fundamental: bool
    omega1: Optional[mpc] = None

    @classmethod
    def from_tau(cls, tau, precision_bits: int = Config.DEFAULT_PRECISION_BITS,
                 reduce: bool = False) -> 'TauLattice':
        """Synthetic lattice Z + tau Z, optionally moved into the fundamental domain"""
        with mp.workprec(precision_bits):
            tau = mpc(tau)
            if tau.imag <= 0:
                raise ValueError("tau must lie in the upper half plane")
            if reduce:
                _, tau = reduce_basis(mpc(1), tau, _tolerance(precision_bits))
            fundamental = _in_fundamental_domain(tau, _tolerance(precision_bits))
            return cls(tau, mpmath.expjpi(2 * tau), precision_bits, fundamental)

    @property
    def a(self) -> float:
        return float(self.tau.real)

    @property
    def b(self) -> float:
        return float(self.tau.imag)

    @property
    def tau_complex(self) -> complex:
        return complex(self.tau)


@dataclass(frozen=True)
class LatticeCharacterIndex:
    """The character attached to w = n1 + n2 tau"""
    n1: int
    n2: int

    @property
    def is_zero(self) -> bool:
        return self.n1 == 0 and self.n2 == 0

    def prime(self) -> 'LatticeCharacterIndex':
        """w' = n2 - n1 tau"""
        return LatticeCharacterIndex(self.n2, -self.n1)


@dataclass(frozen=True)
class ArchPoint:
    """z = r1 + r2 tau mod L, both coordinates in [0, 1)"""
    r1: mpf
    r2: mpf
    bits: int = field(default=Config.DEFAULT_PRECISION_BITS, compare=False)

    def __post_init__(self):
        with mp.workprec(self.bits):
            object.__setattr__(self, 'r1', _frac_part(self.r1))
            object.__setattr__(self, 'r2', _frac_part(self.r2))

    @classmethod
    def origin(cls) -> 'ArchPoint':
        return cls(mpf(0), mpf(0))

    @classmethod
    def from_fractions(cls, r1: Fraction, r2: Fraction,
                       bits: int = Config.DEFAULT_PRECISION_BITS) -> 'ArchPoint':
        r1, r2 = Fraction(r1) % 1, Fraction(r2) % 1
        with mp.workprec(bits):
            return cls(mpf(r1.numerator) / r1.denominator,
                       mpf(r2.numerator) / r2.denominator, bits)

    @property
    def is_origin(self) -> bool:
        return self.r1 == 0 and self.r2 == 0

    def _combine(self, other: 'ArchPoint', sign: int) -> 'ArchPoint':
        bits = max(self.bits, other.bits)
        with mp.workprec(bits):
            return ArchPoint(self.r1 + sign * other.r1, self.r2 + sign * other.r2, bits)

    def __add__(self, other: 'ArchPoint') -> 'ArchPoint':
        return self._combine(other, 1)

    def __sub__(self, other: 'ArchPoint') -> 'ArchPoint':
        return self._combine(other, -1)

    def __neg__(self) -> 'ArchPoint':
        with mp.workprec(self.bits):
            return ArchPoint(-self.r1, -self.r2, self.bits)

    def scale(self, n: int) -> 'ArchPoint':
        with mp.workprec(self.bits):
            return ArchPoint(n * self.r1, n * self.r2, self.bits)

    def distance(self, other: 'ArchPoint') -> float:
        """Distance of the coordinates on the torus R^2/Z^2"""
        d1 = float(self.r1 - other.r1) % 1.0
        d2 = float(self.r2 - other.r2) % 1.0
        return math.hypot(min(d1, 1 - d1), min(d2, 1 - d2))


def _frac_part(value) -> mpf:
    value = mpf(value)
    value = value - mpmath.floor(value)
    if value >= 1:
        value = mpf(0)
    return value


def _tolerance(precision_bits: int) -> mpf:
    return mpf(2) ** (-(precision_bits // 2))


def _in_fundamental_domain(tau, tol) -> bool:
    return (-mpf(1) / 2 - tol < tau.real <= mpf(1) / 2 + tol) and abs(tau) >= 1 - tol


# ---------------------------------------------------------------------------
# Periods and elliptic logarithm
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _RealPeriods:
    """Period data of y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over R"""
    coefficients: Tuple[mpf, ...]
    positive_disc: bool
    roots: Tuple[mpf, ...]       # e1 > e2 > e3, or (e1,) when the discriminant is negative
    alpha: Optional[mpf]
    beta: Optional[mpf]
    omega_real: mpf
    omega_other: mpc
    basis: Tuple[mpc, mpc]       # reduced basis (w1, w2) with w2/w1 in the fundamental domain


@lru_cache(maxsize=64)
def _real_periods(a_invariants: Tuple[Fraction, ...], precision_bits: int) -> _RealPeriods:
    inv = weierstrass_invariants(*a_invariants)
    if inv['disc'] == 0:
        raise SingularCurve(f"❌ ERROR: Model {a_invariants} has zero discriminant")
    with mp.workprec(precision_bits + 40):
        coefficients = tuple(mpf(a.numerator) / a.denominator for a in a_invariants)
        b2, b4, b6 = (mpf(inv[k].numerator) / inv[k].denominator for k in ('b2', 'b4', 'b6'))
        try:
            roots = mpmath.polyroots([4, b2, 2 * b4, b6], maxsteps=400,
                                     extraprec=2 * precision_bits)
        except mpmath.libmp.NoConvergence:
            raise PrecisionExhausted("❌ ERROR: Root finding for the period cubic failed")
        if inv['disc'] > 0:
            e1, e2, e3 = sorted((mpmath.re(r) for r in roots), reverse=True)
            omega_real = mp.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            omega_other = mpc(0, mp.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3)))
            real_roots, alpha, beta = (e1, e2, e3), None, None
        else:
            e1 = mpmath.re(min(roots, key=lambda r: abs(mpmath.im(r))))
            alpha = 3 * e1 + b2 / 4
            beta = mpmath.sqrt(3 * e1 * e1 + b2 * e1 / 2 + b4 / 2)
            omega_real = 2 * mp.pi / mpmath.agm(2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta + alpha))
            omega_other = mpc(-omega_real / 2,
                              mp.pi / mpmath.agm(2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta - alpha)))
            real_roots = (e1,)
        basis = reduce_basis(mpc(omega_real), omega_other, _tolerance(precision_bits))
    logger.debug("Periods of %s: omega_real=%s", a_invariants, mpmath.nstr(omega_real, 15))
    return _RealPeriods(coefficients, inv['disc'] > 0, real_roots, alpha, beta,
                        omega_real, omega_other, basis)


def lattice_from_model(a1, a2, a3, a4, a6,
                       precision_bits: int = Config.DEFAULT_PRECISION_BITS) -> TauLattice:
    """
    Reduced period lattice of any nonsingular Weierstrass model, with the
    j(tau) round-trip check against the model's exact j-invariant.
    """
    a_invariants = tuple(Fraction(a) for a in (a1, a2, a3, a4, a6))
    periods = _real_periods(a_invariants, precision_bits)
    w1, w2 = periods.basis
    with mp.workprec(precision_bits):
        tau = w2 / w1
        lattice = TauLattice(+tau, mpmath.expjpi(2 * tau), precision_bits, True, +w1)
    exact_j = weierstrass_invariants(*a_invariants)['j']
    computed = j_invariant(lattice.tau, precision_bits)
    with mp.workprec(precision_bits):
        target = mpf(exact_j.numerator) / exact_j.denominator
        error = abs(computed - target) / max(1, abs(target))
        if error > _tolerance(precision_bits):
            raise PrecisionExhausted(
                f"❌ ERROR: j(tau) misses j = {exact_j} by relative {mpmath.nstr(error, 5)}")
    return lattice


def period_tau(C: Curve, precision_bits: int = Config.DEFAULT_PRECISION_BITS) -> TauLattice:
    return lattice_from_model(*C.a_invariants, precision_bits=precision_bits)


def _landen_integral(a, b, c, precision_bits):
    """
    T(a, b, c) = int_c^inf dv / sqrt((v^2 - a^2)(v^2 - a^2 + b^2)) for c >= a >= b > 0,
    by the descending Landen iteration, which leaves T invariant.
    """
    tol = mpf(2) ** (-precision_bits)
    for _ in range(MAX_LANDEN_STEPS):
        if abs(a - b) <= tol * a:
            return mpmath.asin(min(a / c, mpf(1))) / a
        a, b, c = (a + b) / 2, mpmath.sqrt(a * b), (c + mpmath.sqrt(c * c - a * a + b * b)) / 2
    raise PrecisionExhausted("❌ ERROR: Landen iteration did not converge")


def _to_arch_point(z, basis, bits: int) -> ArchPoint:
    w1, w2 = basis
    ratio = z / w1
    tau = w2 / w1
    r2 = ratio.imag / tau.imag
    r1 = ratio.real - r2 * tau.real
    return ArchPoint(r1, r2, bits)


def elliptic_log(C: Curve, L: TauLattice, P: Point) -> ArchPoint:
    """Coordinates (r1, r2) of the complex point z with (wp(z), wp'(z)) matching P"""
    if P.is_identity:
        return ArchPoint.origin()
    if not C.contains(P):
        raise PointNotOnCurve(f"❌ ERROR: Point ({P}) is not on curve {C}")
    bits = L.precision_bits
    periods = _real_periods(C.a_invariants, bits)
    a1, a2, a3, a4, a6 = periods.coefficients
    with mp.workprec(bits + 40):
        x = mpf(P.x.numerator) / P.x.denominator
        y = mpf(P.y.numerator) / P.y.denominator
        shift = mpc(0)
        if periods.positive_disc:
            e1, e2, e3 = periods.roots
            if x < e1:
                # Egg component: translate by the 2-torsion point over e3
                y3 = -(a1 * e3 + a3) / 2
                if abs(x - e3) <= mpf(2) ** (-bits // 2) * (1 + abs(e3)):
                    return _to_arch_point(periods.omega_other / 2, periods.basis, bits)
                slope = (y3 - y) / (e3 - x)
                intercept = y - slope * x
                x_new = slope * slope + a1 * slope - a2 - x - e3
                y = -(slope + a1) * x_new - intercept - a3
                x = x_new
                shift = periods.omega_other / 2
            z0 = _landen_integral(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2),
                                  mpmath.sqrt(max(x - e3, e1 - e3)), bits + 20)
        else:
            e1, = periods.roots
            alpha, beta = periods.alpha, periods.beta
            s = max(x - e1, mpf(0))
            if s == 0:
                z0 = periods.omega_real / 2
            else:
                c = (s + beta) / mpmath.sqrt(s)
                integral = _landen_integral(2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta + alpha),
                                            c, bits + 20)
                z0 = integral if s >= beta else periods.omega_real / 2 - integral
        big_y = 2 * y + a1 * x + a3
        z = periods.omega_real - z0 if big_y > 0 else z0
        return _to_arch_point(z + shift, periods.basis, bits)


# ---------------------------------------------------------------------------
# Neron function, Fourier coefficients and heat-kernel smoothing
# ---------------------------------------------------------------------------

def neron_lambda_arch(z: ArchPoint, L: TauLattice) -> mpf:
    """
    lambda(z) = -1/2 B2(r2) log|q| - log|1 - u| - sum_n log|(1 - q^n u)(1 - q^n / u)|
    with u = exp(2 pi i z) and r2 = log|u| / log|q| in [0, 1).
    """
    if z.is_origin:
        raise SingularAtOrigin("❌ ERROR: The Neron function is singular at the origin")
    bits = L.precision_bits
    with mp.workprec(bits + 20):
        r1, r2 = mpf(z.r1), mpf(z.r2)
        log_q = -2 * mp.pi * L.tau.imag
        u = mpmath.expjpi(2 * (r1 + r2 * L.tau))
        value = -(r2 * r2 - r2 + mpf(1) / 6) * log_q / 2 - mpmath.log(abs(1 - u))
        abs_q = abs(L.q)
        eps = mpf(2) ** (-bits)
        qn = mpc(1)
        for n in range(1, 100000):
            qn *= L.q
            value -= mpmath.log(abs(1 - qn * u)) + mpmath.log(abs(1 - qn / u))
            # |q^m u| <= |q|^m and |q^m / u| <= |q|^(m-1) for m > n
            if abs_q ** n <= mpf(1) / 2 and 4 * abs_q ** n / (1 - abs_q) < eps / 10:
                break
        else:
            raise PrecisionExhausted("❌ ERROR: Neron q-series did not converge")
    with mp.workprec(bits):
        return +value


def fourier_coeff(omega: LatticeCharacterIndex, L: TauLattice) -> float:
    """b / (2 pi |w'|^2), and 0 for the trivial character"""
    if omega.is_zero:
        return 0.0
    tau = L.tau_complex
    dual = omega.prime()
    norm = abs(dual.n1 + dual.n2 * tau) ** 2
    return L.b / (2 * math.pi * norm)


def laplace_eigenvalue(omega: LatticeCharacterIndex, L: TauLattice) -> float:
    """c_w = 2 pi |w'|^2 / b"""
    tau = L.tau_complex
    dual = omega.prime()
    return 2 * math.pi * abs(dual.n1 + dual.n2 * tau) ** 2 / L.b


def character(omega: LatticeCharacterIndex, x, y, L: TauLattice):
    """gamma_w at the complex points x + iy (numpy-vectorised)"""
    r2 = np.asarray(y, dtype=float) / L.b
    r1 = np.asarray(x, dtype=float) - L.a * r2
    return np.exp(2j * math.pi * (omega.n1 * r1 + omega.n2 * r2))


@lru_cache(maxsize=256)
def _series(tau: complex, t: float, eps: float, cap: int, smoothed_green: bool) -> LatticeSeries:
    return LatticeSeries.heat(tau, t, eps, cap, smoothed_green)


def smoothed_series(L: TauLattice, t: float, eps: float = Config.DEFAULT_TAIL_EPS,
                    cap: int = Config.DEFAULT_LATTICE_TERM_CAP) -> LatticeSeries:
    return _series(L.tau_complex, float(t), float(eps), int(cap), True)


def heat_series(L: TauLattice, t: float, eps: float = Config.DEFAULT_TAIL_EPS,
                cap: int = Config.DEFAULT_LATTICE_TERM_CAP) -> LatticeSeries:
    return _series(L.tau_complex, float(t), float(eps), int(cap), False)


def lambda_t(z: ArchPoint, t: float, L: TauLattice, eps: float = Config.DEFAULT_TAIL_EPS,
             cap: int = Config.DEFAULT_LATTICE_TERM_CAP) -> float:
    """sum_{w != 0} lambda_hat(w) exp(-t / lambda_hat(w)) gamma_w(z)"""
    series = smoothed_series(L, t, eps, cap)
    values, residue = series.evaluate([float(z.r1)], [float(z.r2)])
    assert residue <= 100 * series.error_bound + 1e-12, "imaginary residue in lambda_t"
    return float(values[0])


def heat_kernel(z: ArchPoint, t: float, L: TauLattice, eps: float = Config.DEFAULT_TAIL_EPS,
                cap: int = Config.DEFAULT_LATTICE_TERM_CAP) -> float:
    """g_t(z) = sum over all characters of exp(-t c_w) gamma_w(z); the constant term is 1"""
    series = heat_series(L, t, eps, cap)
    values, _ = series.evaluate([float(z.r1)], [float(z.r2)])
    return 1.0 + float(values[0])


# ---------------------------------------------------------------------------
# Archimedean discrepancy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArchDiscrepancy:
    value: float
    error_bound: float
    terms: int


def _coordinates(Z: Sequence[ArchPoint]) -> Tuple[list, list]:
    return [float(z.r1) for z in Z], [float(z.r2) for z in Z]


def _require_distinct(Z: Sequence[ArchPoint]):
    keys = set()
    scale = 2 ** 40
    for z in Z:
        key = (round(float(z.r1) * scale) % scale, round(float(z.r2) * scale) % scale)
        if key in keys:
            raise DuplicatePoints(f"❌ ERROR: Point set repeats ({z.r1}, {z.r2}) mod L")
        keys.add(key)


def _collapse_differences(Z: Sequence[ArchPoint]) -> Tuple[list, list, list]:
    """Distinct differences z_i - z_j (i < j) with multiplicities"""
    scale = 2 ** 40
    r1, r2 = _coordinates(Z)
    groups = {}
    for i in range(len(Z)):
        for j in range(i + 1, len(Z)):
            d1 = (r1[i] - r1[j]) % 1.0
            d2 = (r2[i] - r2[j]) % 1.0
            key = (round(d1 * scale) % scale, round(d2 * scale) % scale)
            if key in groups:
                groups[key][2] += 1
            else:
                groups[key] = [d1, d2, 1]
    d1s = [g[0] for g in groups.values()]
    d2s = [g[1] for g in groups.values()]
    counts = [g[2] for g in groups.values()]
    return d1s, d2s, counts


def arch_discrepancy_direct(Z: Sequence[ArchPoint], L: TauLattice, t: Optional[float] = None,
                            eps: float = Config.DEFAULT_TAIL_EPS,
                            cap: int = Config.DEFAULT_LATTICE_TERM_CAP) -> ArchDiscrepancy:
    """(1/N^2) sum_{i,j} lambda_t(z_i - z_j), diagonal included, t = 1/N by default"""
    N = len(Z)
    if N == 0:
        raise ValueError("empty point set")
    _require_distinct(Z)
    t = 1.0 / N if t is None else t
    series = smoothed_series(L, t, eps, cap)
    at_origin, _ = series.evaluate([0.0], [0.0])
    d1s, d2s, counts = _collapse_differences(Z)
    values, _ = series.evaluate(d1s, d2s) if counts else ([], 0.0)
    total = math.fsum([N * float(at_origin[0])]
                      + [2 * count * float(value) for count, value in zip(counts, values)])
    return ArchDiscrepancy(total / (N * N), series.error_bound, len(series.weights))


def arch_discrepancy_parseval(Z: Sequence[ArchPoint], L: TauLattice, t: Optional[float] = None,
                              eps: float = Config.DEFAULT_TAIL_EPS,
                              cap: int = Config.DEFAULT_LATTICE_TERM_CAP) -> ArchDiscrepancy:
    """sum_{w != 0} lambda_hat_t(w) |delta_hat(w)|^2"""
    N = len(Z)
    if N == 0:
        raise ValueError("empty point set")
    _require_distinct(Z)
    t = 1.0 / N if t is None else t
    series = smoothed_series(L, t, eps, cap)
    r1, r2 = _coordinates(Z)
    return ArchDiscrepancy(series.spectral_energy(r1, r2), series.error_bound,
                           len(series.weights))


def logplus_j_of_lattice(L: TauLattice) -> float:
    value = abs(j_invariant(L.tau, L.precision_bits))
    return float(mpmath.log(value)) if value > 1 else 0.0


def elkies_gap(Z: Sequence[ArchPoint], L: TauLattice, logplus_j: Optional[float] = None,
               eps: float = Config.DEFAULT_TAIL_EPS,
               cap: int = Config.DEFAULT_LATTICE_TERM_CAP) -> float:
    """
    sum_{i != j} lambda(z_i - z_j) - [N^2 D(Z) - (N log N)/2 - (N/12) log+|j| - 16N/5];
    nonnegative up to rounding.
    """
    N = len(Z)
    _require_distinct(Z)
    if logplus_j is None:
        logplus_j = logplus_j_of_lattice(L)
    pair_terms = []
    for i in range(N):
        for j in range(i + 1, N):
            pair_terms.append(2 * float(neron_lambda_arch(Z[i] - Z[j], L)))
    discrepancy = arch_discrepancy_direct(Z, L, eps=eps, cap=cap).value
    lower = N * N * discrepancy - N * math.log(N) / 2 - N * logplus_j / 12 - 16 * N / 5
    return math.fsum(pair_terms) - lower


def in_real_tau_set(L: TauLattice, tol: float = 1e-12) -> bool:
    """tau = it with t >= 1, or tau = 1/2 + it with t > 1/2"""
    a, b = L.a, L.b
    if abs(a) <= tol:
        return b >= 1 - tol
    if abs(a - 0.5) <= tol:
        return b > 0.5
    return False


def real_points_lower_bound(N: int, L: TauLattice) -> float:
    """(b / (4 pi |tau|^2)) exp(-8 pi |tau|^2 / (b N)) for real-locus sets of size N"""
    if not in_real_tau_set(L):
        raise TauNotReal(f"❌ ERROR: tau = {L.tau_complex} is not a real-curve period ratio")
    b = L.b
    tau_sq = abs(L.tau_complex) ** 2
    return b / (4 * math.pi * tau_sq) * math.exp(-8 * math.pi * tau_sq / (b * N))


def real_locus_points(r2_values: Iterable, components: Iterable[int] = (0,)) -> List[ArchPoint]:
    """Points with r1 in {0, 1/2}: component 0 or 1, one point per (component, r2)"""
    points = []
    for component in components:
        for r2 in r2_values:
            points.append(ArchPoint.from_fractions(Fraction(component, 2), Fraction(r2)))
    return points


def curve_logplus_j(C: Curve) -> float:
    return logplus_abs(C.j)
