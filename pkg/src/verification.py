"""
Verification suites run by `main.py verify`

identities  exact p-adic identities, ball counts and retraction Fourier sums over a
            seeded corpus of point sets
inequality  slack of the height-discrepancy inequality and its local consequences
appendix    the analytic estimates checked by appendix_verify
"""
import logging
import math
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.appendix_verify import (elkies_constant_assembly, heat_positivity_and_smoothing_check,
                                 jinv_lemma_check, lambda_t_origin_bound_check,
                                 laplace_eigenrelation_check, lattice_count_check,
                                 reference_lattices, t0_root_bracket)
from src.arch_local import (TauLattice, arch_discrepancy_direct, lattice_from_model,
                            real_locus_points, real_points_lower_bound)
from src.config_manager import RunConfig
from src.curve import Curve, O, Point, make_curve, point_mul
from src.errors import HeightDiscrepancyError, ParseError
from src.global_discrepancy import (global_discrepancy, local_global_check, multiples,
                                    torsion_orbit_global)
from src.nonarch_local import (ball_counts, elkiesna_check, nonarch_discrepancy,
                               pigeonhole_lower_bound, reduction_type, retraction,
                               retraction_discrepancy_fourier, retraction_homomorphism_check,
                               retraction_measure_discrepancy)

logger = logging.getLogger(__name__)

SUITES = ('identities', 'inequality', 'appendix')
SLACK_TOLERANCE = 1e-6
REAL_LOCUS_TOLERANCE = 1e-9
# Fourier modes used when a retraction discrepancy is cross-checked
RETRACTION_MODES = 400
MULTIPLE_SIZES = (2, 5, 10, 25)
TORSION_LEVELS = (2, 3, 4, 5)


def _pt(x, y) -> Point:
    return Point(Fraction(x), Fraction(y))


@dataclass(frozen=True)
class ReferenceCurve:
    name: str
    curve: Curve
    pool: Tuple[Point, ...]


def reference_curves() -> List[ReferenceCurve]:
    """Three semistable curves with a pool of rational points each"""
    c37 = make_curve(0, 0, 1, -1, 0)
    generator = _pt(0, 0)
    c11 = make_curve(0, -1, 1, 0, 0)
    c14 = make_curve(1, 0, 1, 4, -6)
    return [
        ReferenceCurve('y^2+y=x^3-x', c37,
                       tuple(point_mul(c37, k, generator) for k in range(-5, 6))),
        ReferenceCurve('y^2+y=x^3-x^2', c11,
                       (O, _pt(0, 0), _pt(1, 0), _pt(1, -1), _pt(0, -1))),
        ReferenceCurve('y^2+xy+y=x^3+4x-6', c14,
                       (O, _pt(1, -1), _pt(2, 2), _pt(2, -5), _pt(9, 23), _pt(9, -33))),
    ]


class CheckOutcome(BaseModel):
    name: str
    passed: bool
    detail: str = ''
    seconds: float = Field(default=0.0, ge=0.0)


class SuiteResult(BaseModel):
    suite: str
    checks: List[CheckOutcome] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> int:
        return sum(not check.passed for check in self.checks)


def _run_check(name: str, check: Callable[[], Tuple[bool, str]]) -> CheckOutcome:
    start = time.perf_counter()
    try:
        passed, detail = check()
        passed = bool(passed)
    except HeightDiscrepancyError as e:
        passed, detail = False, str(e)
    elapsed = time.perf_counter() - start
    status = "✅" if passed else "❌"
    logger.info("%s %s (%.2fs) %s", status, name, elapsed, detail)
    return CheckOutcome(name=name, passed=passed, detail=detail, seconds=elapsed)


def identity_corpus(seed: int, per_place: int = 5) -> List[Tuple[ReferenceCurve, int, List[Point]]]:
    """(curve, prime, Z) triples: every bad prime and 2, 3, 5 on each curve"""
    rng = np.random.default_rng(seed)
    corpus = []
    for ref in reference_curves():
        primes = sorted({bad.p for bad in ref.curve.bad_primes} | {2, 3, 5})
        for p in primes:
            sizes = [1, len(ref.pool)] + list(rng.integers(2, min(10, len(ref.pool)) + 1,
                                                         per_place - 2))
            for size in sizes:
                chosen = rng.choice(len(ref.pool), size=int(size), replace=False)
                corpus.append((ref, p, [ref.pool[k] for k in sorted(chosen)]))
    return corpus


def _ball_check(C: Curve, place, Z: Sequence[Point]) -> bool:
    """D_i >= k log p (D_{i,r} - 1/N) for r = p^-1, p^-2, and the pigeonhole bound at r = p^-1"""
    N = len(Z)
    if N < 2:
        return True
    D_i = nonarch_discrepancy(C, place, Z).D_i.to_real()
    log_p = math.log(place.p)
    holds = True
    for k in (1, 2):
        counts = ball_counts(C, place, Z, k)
        holds &= D_i >= k * log_p * (counts.D_i_r - 1 / N) - 1e-12
        if k == 1:
            holds &= D_i >= pigeonhole_lower_bound(N, len(counts.counts), place.p) - 1e-12
    return bool(holds)


def _retraction_fourier_check(C: Curve, place, Z: Sequence[Point]) -> bool:
    """Exact D_j against its Fourier expansion in the retraction values, within the tail"""
    if place.nu < 1:
        return True
    exact = nonarch_discrepancy(C, place, Z).D_j.to_real()
    values = [retraction(C, place, P) for P in Z]
    series, tail = retraction_discrepancy_fourier(place, values, RETRACTION_MODES)
    return bool(series - 1e-9 <= exact <= series + tail + 1e-9)


def _retraction_measure_check(place) -> Tuple[bool, str]:
    """Fourier discrepancy of m equally spaced retraction values against nu log p / (12 m^2)"""
    worst = 0.0
    for m in range(1, place.nu + 1):
        series, tail = retraction_discrepancy_fourier(
            place, [Fraction(k, m) for k in range(m)], RETRACTION_MODES)
        closed = retraction_measure_discrepancy(place, m).to_real()
        worst = max(worst, abs(series - closed) - tail)
    return worst <= 1e-9, f"nu={place.nu} worst excess={worst:.3g}"


def identities_suite(config: RunConfig) -> SuiteResult:
    result = SuiteResult(suite='identities')
    for index, (ref, p, Z) in enumerate(identity_corpus(config.seed)):
        place = reduction_type(ref.curve, p)

        def check(ref=ref, place=place, Z=Z):
            exact = elkiesna_check(ref.curve, place, Z)
            additive = retraction_homomorphism_check(ref.curve, place, Z)
            balls = _ball_check(ref.curve, place, Z)
            fourier = _retraction_fourier_check(ref.curve, place, Z)
            return exact and additive and balls and fourier, f"N={len(Z)}"

        result.checks.append(_run_check(f"identity[{index}] {ref.name} p={p}", check))
    for ref in reference_curves():
        for bad in ref.curve.bad_primes:
            place = reduction_type(ref.curve, bad.p)
            result.checks.append(_run_check(f"retraction measure {ref.name} p={bad.p}",
                                            lambda place=place: _retraction_measure_check(place)))
    return result


def _slack_check(C: Curve, Z: Sequence[Point], config: RunConfig):
    report = global_discrepancy(C, Z, config)
    places_ok = all(local_global_check(C, Z, place.place, report=report)
                    for place in report.per_place)
    dual_ok = abs(report.per_place[0].D_direct - report.per_place[0].D_parseval) \
        <= report.per_place[0].error_bound + 1e-9
    passed = report.slack >= -SLACK_TOLERANCE and places_ok and dual_ok
    return passed, f"slack={report.slack:.6g} D={report.D_global:.6g}"


def _torsion_check(C: Curve, m: int, config: RunConfig):
    report = torsion_orbit_global(C, m, config)
    arch = report.per_place[0]
    agrees = arch.D_direct is None or abs(arch.D_direct - arch.D) <= 1e-8 + arch.error_bound
    return report.slack >= 0 and agrees, f"slack={report.slack:.6g}"


def _real_locus_check(tau: complex, N: int, config: RunConfig):
    L = TauLattice.from_tau(tau, config.precision_bits)
    rng = np.random.default_rng(config.seed + N)
    sets = [real_locus_points([Fraction(k, N) for k in range(N)])]
    components = (0, 1)
    values = sorted({Fraction(int(v), 997) for v in rng.choice(997, size=N, replace=False)})
    sets.append(real_locus_points(values[:N // 2], components)[:N])
    bound = real_points_lower_bound(N, L)
    worst = math.inf
    for Z in sets:
        D = arch_discrepancy_direct(Z, L, t=1.0 / len(Z), eps=config.tail_eps,
                                    cap=config.lattice_term_cap).value
        worst = min(worst, D - real_points_lower_bound(len(Z), L))
    return bool(worst >= -REAL_LOCUS_TOLERANCE), f"bound={bound:.6g} worst margin={worst:.3g}"


def inequality_suite(config: RunConfig) -> SuiteResult:
    result = SuiteResult(suite='inequality')
    refs = {ref.name: ref for ref in reference_curves()}
    c37 = refs['y^2+y=x^3-x'].curve
    c11 = refs['y^2+y=x^3-x^2'].curve
    generator = _pt(0, 0)

    for N in MULTIPLE_SIZES:
        result.checks.append(_run_check(
            f"multiples N={N}", lambda N=N: _slack_check(c37, multiples(c37, generator, N), config)))
    result.checks.append(_run_check(
        "five-torsion", lambda: _slack_check(c11, list(refs['y^2+y=x^3-x^2'].pool), config)))
    for name, C in (('identity 37', c37), ('identity 11', c11)):
        result.checks.append(_run_check(name, lambda C=C: _slack_check(C, [O], config)))
    for m in TORSION_LEVELS:
        result.checks.append(_run_check(f"torsion m={m}", lambda m=m: _torsion_check(c37, m, config)))
    for tau in (complex(0, 1), complex(0.5, 1)):
        for N in (5, 10, 20):
            result.checks.append(_run_check(
                f"real locus tau={tau} N={N}",
                lambda tau=tau, N=N: _real_locus_check(tau, N, config)))
    return result


def appendix_suite(config: RunConfig) -> SuiteResult:
    result = SuiteResult(suite='appendix')

    def bracket():
        lo, hi = t0_root_bracket()
        return True, f"[{lo}, {hi}]"

    def lemma(check):
        outcome = check()
        return outcome.passed, f"worst margin={outcome.worst_margin:.4g}"

    result.checks.append(_run_check("t0 bracket", bracket))
    result.checks.append(_run_check("j growth", lambda: lemma(
        lambda: jinv_lemma_check(seed=config.seed))))
    result.checks.append(_run_check("lambda_t at origin", lambda: lemma(
        lambda: lambda_t_origin_bound_check(reference_lattices(config.precision_bits),
                                            eps=config.tail_eps, cap=config.lattice_term_cap))))
    square = lattice_from_model(0, 0, 0, -1, 0, precision_bits=config.precision_bits)
    result.checks.append(_run_check("heat kernel and smoothing", lambda: lemma(
        lambda: heat_positivity_and_smoothing_check(square, seed=config.seed,
                                                    eps=config.tail_eps,
                                                    cap=config.lattice_term_cap))))
    for tau in (complex(0, 1), complex(0.5, math.sqrt(3) / 2), complex(0.5, 2)):
        result.checks.append(_run_check(f"laplace eigenvalues tau={tau}", lambda tau=tau: lemma(
            lambda: laplace_eigenrelation_check(TauLattice.from_tau(tau), seed=config.seed))))
        result.checks.append(_run_check(f"lattice count tau={tau}", lambda tau=tau: lemma(
            lambda: lattice_count_check(tau))))
    result.checks.append(_run_check("constant assembly", lambda: lemma(elkies_constant_assembly)))
    return result


def run_suite(name: str, config: Optional[RunConfig] = None) -> SuiteResult:
    config = config or RunConfig()
    if name == 'identities':
        return identities_suite(config)
    if name == 'inequality':
        return inequality_suite(config)
    if name == 'appendix':
        return appendix_suite(config)
    raise ParseError(f"❌ ERROR: Unknown suite {name!r}; choose from {', '.join(SUITES)}")


def write_junit(result: SuiteResult, path: Path) -> Path:
    """JUnit-style XML: one testcase per check"""
    suite = ET.Element('testsuite', name=result.suite, tests=str(len(result.checks)),
                       failures=str(result.failures),
                       time=f"{sum(c.seconds for c in result.checks):.3f}")
    for check in result.checks:
        case = ET.SubElement(suite, 'testcase', classname=result.suite, name=check.name,
                             time=f"{check.seconds:.3f}")
        if not check.passed:
            failure = ET.SubElement(case, 'failure', message=check.detail)
            failure.text = check.detail
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ET.ElementTree(suite).write(path, encoding='utf-8', xml_declaration=True)
    logger.info("📁 Wrote JUnit summary to %s", path)
    return path
