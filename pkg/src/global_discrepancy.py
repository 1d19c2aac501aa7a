"""
Canonical heights as sums of local Neron functions, and the global
discrepancy of a finite set of rational points.

Over Q every place has degree weight 1: the archimedean place and one place
per prime. Only finitely many primes contribute: the bad primes and the
primes at which two points of the set reduce to the same point.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Union

from sympy import primefactors

from src.arch_local import (ArchPoint, TauLattice, arch_discrepancy_direct,
                            arch_discrepancy_parseval, curve_logplus_j, elliptic_log,
                            lambda_t, neron_lambda_arch, period_tau)
from src.config import Config
from src.config_manager import RunConfig
from src.curve import (Curve, LogValue, Point, denominator_primes, j_height,
                       point_mul, point_sub, weil_height)
from src.errors import CoordinateOverflowBudget, DomainError, DuplicatePoints
from src.nonarch_local import (congruence_primes, has_singular_reduction,
                               neron_lambda_nonarch, nonarch_discrepancy,
                               reduction_type, retraction, retraction_measure_discrepancy)
from src.reports import DiscrepancyReport, GlobalReport

logger = logging.getLogger(__name__)

ARCH = 'inf'
# Absolute error allowed for one high-precision local height
HEIGHT_TOLERANCE = 1e-9
# Largest m for which the torsion closed form is cross-checked by the double sum
TORSION_DIRECT_CHECK_MAX = 5
TORSION_AGREEMENT = 1e-8

Place = Union[str, int]


@lru_cache(maxsize=64)
def curve_lattice(C: Curve, precision_bits: int) -> TauLattice:
    return period_tau(C, precision_bits)


def height_primes(C: Curve, P: Point) -> List[int]:
    """Primes where lambda_p(P) can be nonzero"""
    return sorted({bad.p for bad in C.bad_primes} | set(denominator_primes(P)))


def local_heights(C: Curve, P: Point, precision_bits: int = Config.DEFAULT_PRECISION_BITS
                  ) -> Dict[Place, object]:
    """
    lambda_v(P) at every place where it can be nonzero: 'inf' maps to an mpf,
    each prime to an exact LogValue. Empty for the identity.
    """
    if P.is_identity:
        return {}
    L = curve_lattice(C, precision_bits)
    heights: Dict[Place, object] = {ARCH: neron_lambda_arch(elliptic_log(C, L, P), L)}
    for p in height_primes(C, P):
        heights[p] = neron_lambda_nonarch(C, reduction_type(C, p), P)
    return heights


def canonical_height(C: Curve, P: Point,
                     precision_bits: int = Config.DEFAULT_PRECISION_BITS) -> float:
    """hhat(P) = lambda_inf(P) + sum_p lambda_p(P); zero at the identity"""
    heights = local_heights(C, P, precision_bits)
    if not heights:
        return 0.0
    finite = [value.to_real() for key, value in heights.items() if key != ARCH]
    return math.fsum([float(heights[ARCH])] + finite)


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    gap: float
    k_max: int
    terms: List[float] = field(default_factory=list)


def canonical_height_oracle(C: Curve, P: Point,
                            k_max: int = Config.DEFAULT_ORACLE_KMAX) -> OracleEstimate:
    """
    4^-k * (1/2) h(x(2^k P)) for k = 0..k_max, by exact doubling.
    The gap is the last difference of consecutive terms.
    """
    if k_max > Config.MAX_ORACLE_KMAX:
        raise CoordinateOverflowBudget(
            f"❌ ERROR: k_max = {k_max} exceeds the doubling budget {Config.MAX_ORACLE_KMAX}")
    if k_max < 1:
        raise DomainError("❌ ERROR: k_max must be at least 1")
    terms = []
    Q = P
    for k in range(k_max + 1):
        x_height = 0.0 if Q.is_identity else weil_height(Q.x)
        terms.append(x_height / (2 * 4 ** k))
        Q = point_mul(C, 2, Q)
    return OracleEstimate(terms[-1], abs(terms[-1] - terms[-2]), k_max, terms)


def set_height(C: Curve, Z: Sequence[Point],
               precision_bits: int = Config.DEFAULT_PRECISION_BITS) -> float:
    """Average canonical height of the points of Z"""
    if not Z:
        return 0.0
    return math.fsum(canonical_height(C, P, precision_bits) for P in Z) / len(Z)


def _require_distinct(Z: Sequence[Point]):
    if len(set(Z)) != len(Z):
        raise DuplicatePoints("❌ ERROR: Point set contains repeated points")


def discrepancy_primes(C: Curve, Z: Sequence[Point]) -> List[int]:
    """Bad primes together with the good primes where two points of Z are congruent"""
    return sorted({bad.p for bad in C.bad_primes} | set(congruence_primes(C, Z)))


@dataclass(frozen=True)
class LambdaSum:
    per_place: Dict[Place, float]
    total: float


def lambda_sum(C: Curve, Z: Sequence[Point],
               precision_bits: int = Config.DEFAULT_PRECISION_BITS) -> LambdaSum:
    """Lambda_v = (1/N^2) sum_{i != j} lambda_v(P_i - P_j) and their sum Lambda"""
    _require_distinct(Z)
    N = len(Z)
    places = [ARCH] + discrepancy_primes(C, Z)
    if N < 2:
        return LambdaSum({place: 0.0 for place in places}, 0.0)
    L = curve_lattice(C, precision_bits)
    images = [elliptic_log(C, L, P) for P in Z]
    arch_terms = []
    finite: Dict[int, LogValue] = {p: LogValue.zero(p) for p in places[1:]}
    for i in range(N):
        for k in range(i + 1, N):
            arch_terms.append(2 * float(neron_lambda_arch(images[i] - images[k], L)))
            difference = point_sub(C, Z[i], Z[k])
            for p in finite:
                finite[p] += 2 * neron_lambda_nonarch(C, reduction_type(C, p), difference)
    per_place: Dict[Place, float] = {ARCH: math.fsum(arch_terms) / (N * N)}
    for p, value in finite.items():
        per_place[p] = (value / (N * N)).to_real()
    return LambdaSum(per_place, math.fsum(per_place.values()))


def main_rhs(N: int, h_j: float) -> float:
    """(1/N)(log N / 2 + h(j)/12 + 16/5)"""
    return (math.log(N) / 2 + h_j / 12 + 16 / 5) / N


def logplus_j_total(C: Curve) -> float:
    """Archimedean log+|j| plus sum over bad primes of nu_p log p; equals h(j)"""
    finite = math.fsum(bad.ord_disc * math.log(bad.p) for bad in C.bad_primes)
    return curve_logplus_j(C) + finite


def height_of_j(C: Curve) -> float:
    """h(j) for the right-hand side, cross-checked against its local decomposition"""
    exact = j_height(C)
    local = logplus_j_total(C)
    if abs(local - exact) > HEIGHT_TOLERANCE * max(1.0, exact):
        logger.warning("⚠️ log+|j| + sum nu_p log p = %.12g differs from h(j) = %.12g on %s",
                       local, exact, C)
    return exact


def _arch_report(C: Curve, Z: Sequence[Point], config: RunConfig,
                 Lambda: float) -> DiscrepancyReport:
    L = curve_lattice(C, config.precision_bits)
    images = [elliptic_log(C, L, P) for P in Z]
    direct = arch_discrepancy_direct(images, L, eps=config.tail_eps, cap=config.lattice_term_cap)
    parseval = arch_discrepancy_parseval(images, L, eps=config.tail_eps,
                                         cap=config.lattice_term_cap)
    return DiscrepancyReport(
        place=ARCH, D=direct.value, D_direct=direct.value, D_parseval=parseval.value,
        Lambda=Lambda, error_bound=direct.error_bound + parseval.error_bound,
        terms=direct.terms,
    )


def global_discrepancy(C: Curve, Z: Sequence[Point],
                       config: Optional[RunConfig] = None) -> GlobalReport:
    """
    Local discrepancies at every contributing place, their sum, and the slack
    of D(Z) <= 4 hhat(Z) + (1/N)(log N / 2 + h(j)/12 + 16/5).
    """
    config = config or RunConfig()
    if not Z:
        raise DomainError("❌ ERROR: The point set is empty")
    _require_distinct(Z)
    N = len(Z)
    logger.info("🔍 Global discrepancy of %d points on %s", N, C)
    lambdas = lambda_sum(C, Z, config.precision_bits)
    hhat = set_height(C, Z, config.precision_bits)

    per_place = [_arch_report(C, Z, config, lambdas.per_place[ARCH])]
    for p in discrepancy_primes(C, Z):
        local = nonarch_discrepancy(C, reduction_type(C, p), Z)
        per_place.append(DiscrepancyReport(
            place=str(p), D=local.D.to_real(), D_exact=local.D.as_json(),
            D_i=local.D_i.as_json(), D_j=local.D_j.as_json(),
            Lambda=lambdas.per_place[p],
        ))

    D_global = math.fsum(report.D for report in per_place)
    error_budget = per_place[0].error_bound + HEIGHT_TOLERANCE * (len(per_place) + 4 * N)
    rhs = main_rhs(N, height_of_j(C))
    slack = rhs + 4 * hhat - D_global
    if slack < -error_budget:
        logger.warning("⚠️ Negative slack %.3e for %d points on %s", slack, N, C)
    return GlobalReport(
        curve=C.label, Z=[str(P) for P in Z], N=N, hhat_Z=hhat, Lambda_Z=lambdas.total,
        D_global=D_global, error_budget=error_budget, rhs_main=rhs, slack=slack,
        per_place=per_place,
    )


def local_global_check(C: Curve, Z: Sequence[Point], v0: Place,
                       config: Optional[RunConfig] = None,
                       report: Optional[GlobalReport] = None) -> bool:
    """D_{v0}(Z) <= D(Z) + error budget; places absent from the report contribute 0"""
    report = report or global_discrepancy(C, Z, config)
    local = report.place(v0)
    value = local.D if local is not None else 0.0
    return value <= report.D_global + report.error_budget


def torsion_grid(m: int, bits: int = Config.DEFAULT_PRECISION_BITS) -> List[ArchPoint]:
    """The m^2 points (a/m, b/m) of C/L: the image of E[m]"""
    return [ArchPoint.from_fractions(Fraction(a, m), Fraction(b, m), bits)
            for a in range(m) for b in range(m)]


def torsion_orbit_global(C: Curve, m: int, config: Optional[RunConfig] = None) -> GlobalReport:
    """
    Certified lower bound for the global discrepancy of E[m], N = m^2, with
    hhat = 0. Places over primes dividing m are skipped.
    """
    config = config or RunConfig()
    if m < 2:
        raise DomainError(f"❌ ERROR: Torsion level must be at least 2, got {m}")
    N = m * m
    L = curve_lattice(C, config.precision_bits)
    series_origin = lambda_t(ArchPoint.origin(), 1.0, L, config.tail_eps, config.lattice_term_cap)
    D_arch = series_origin / N
    arch = DiscrepancyReport(place=ARCH, D=D_arch, D_parseval=D_arch)
    if m <= TORSION_DIRECT_CHECK_MAX:
        direct = arch_discrepancy_direct(torsion_grid(m, config.precision_bits), L,
                                         eps=config.tail_eps, cap=config.lattice_term_cap)
        arch = arch.model_copy(update={'D_direct': direct.value,
                                       'error_bound': direct.error_bound,
                                       'terms': direct.terms})
        if abs(direct.value - D_arch) > TORSION_AGREEMENT + direct.error_bound:
            logger.warning("⚠️ E[%d]: direct %.12g vs closed form %.12g",
                           m, direct.value, D_arch)

    skipped = primefactors(m)
    per_place = [arch]
    for bad in C.bad_primes:
        if bad.p in skipped:
            continue
        exact = retraction_measure_discrepancy(reduction_type(C, bad.p), m)
        per_place.append(DiscrepancyReport(place=str(bad.p), D=exact.to_real(),
                                           D_exact=exact.as_json(), D_j=exact.as_json(),
                                           D_i=LogValue.zero(bad.p).as_json()))

    D_lower = math.fsum(report.D for report in per_place)
    rhs = main_rhs(N, height_of_j(C))
    error_budget = arch.error_bound + HEIGHT_TOLERANCE
    return GlobalReport(
        curve=C.label, Z=[f"E[{m}]"], N=N, hhat_Z=0.0, Lambda_Z=0.0, D_global=D_lower,
        error_budget=error_budget, rhs_main=rhs, slack=rhs - D_lower, per_place=per_place,
        lower_bound_mode=True, skipped_primes=skipped,
    )


def place_breakdown(C: Curve, P: Point, precision_bits: int = Config.DEFAULT_PRECISION_BITS
                    ) -> List[dict]:
    """Rows {place, value, exact, retraction} for the height report"""
    rows = []
    for place, value in local_heights(C, P, precision_bits).items():
        if place == ARCH:
            rows.append({'place': ARCH, 'value': float(value)})
            continue
        data = reduction_type(C, place)
        row = {'place': str(place), 'value': value.to_real(), 'exact': value.as_json()}
        if has_singular_reduction(C, data, P):
            row['retraction'] = str(retraction(C, data, P))
        rows.append(row)
    return rows


def multiples(C: Curve, P: Point, N: int) -> List[Point]:
    """[P, 2P, ..., NP]"""
    return [point_mul(C, k, P) for k in range(1, N + 1)]
