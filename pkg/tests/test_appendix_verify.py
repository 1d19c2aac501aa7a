import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from src import appendix_verify
from src.appendix_verify import (REVERSE_J_CONSTANT, LemmaCheckResult,
                                 elkies_constant_assembly, fundamental_domain_grid,
                                 heat_positivity_and_smoothing_check, j_from_tau,
                                 jinv_lemma_check, lambda_t_origin_bound_check,
                                 laplace_eigenrelation_check, lattice_count,
                                 lattice_count_check, origin_bound, reference_lattices,
                                 t0_polynomial, t0_root_bracket)
from src.arch_local import TauLattice, lattice_from_model, period_tau


def test_t0_root_is_bracketed():
    lo, hi = t0_root_bracket()
    assert (lo, hi) == (Fraction(1, 250), Fraction(1, 249))
    assert t0_polynomial(lo) < 0 < t0_polynomial(hi)


def test_grid_is_seeded_and_inside_the_domain():
    grid = fundamental_domain_grid(50, 20.0, seed=11)
    assert grid == fundamental_domain_grid(50, 20.0, seed=11)
    assert len(grid) == 50
    for tau in grid:
        assert -0.5 <= tau.real <= 0.5
        assert abs(tau) >= 1 - 1e-12


def test_j_growth_estimates():
    result = jinv_lemma_check(samples=200, b_max=15.0, seed=3)
    assert result.passed
    assert result.samples == 200
    assert result.details['t0_constant'] < 6
    assert result.details['reverse_margin'] == pytest.approx(
        result.details['reverse_worst'] + REVERSE_J_CONSTANT)


def test_reverse_j_margin_does_not_decide_the_result(monkeypatch):
    monkeypatch.setattr(appendix_verify, 'REVERSE_J_CONSTANT', -1000.0)
    result = jinv_lemma_check(samples=20, b_max=5.0, seed=3)
    assert result.passed
    assert result.details['reverse_margin'] < 0


def test_check_results_hold_plain_python_types():
    with warnings.catch_warnings():
        warnings.simplefilter('error', DeprecationWarning)
        result = LemmaCheckResult.from_margins(
            'x', np.array([0.5, 0.25]), certified_error=np.float64(1e-9),
            details={'flag': np.bool_(True), 'value': np.float64(2.0)})
    assert type(result.passed) is bool
    assert type(result.worst_margin) is float
    assert type(result.details['flag']) is float


@pytest.mark.parametrize("tau", [1j, complex(0.5, math.sqrt(3) / 2), complex(0.3, 1.7)])
def test_laplace_eigenrelation(tau):
    result = laplace_eigenrelation_check(TauLattice.from_tau(tau), samples=8)
    assert result.passed
    assert result.samples == 24 * 8
    assert result.details['worst_relative'] < 1e-3


def test_origin_bound():
    result = lambda_t_origin_bound_check(reference_lattices(), t_grid=(1.0, 0.1, 0.01))
    assert result.passed
    assert result.details['monotone_worst'] > 0
    assert result.details['sharper_constant'] < result.details['constant']


def test_origin_bound_on_special_lattices():
    lattices = [lattice_from_model(0, 0, 0, -1, 0), lattice_from_model(0, 0, 1, 0, 0)]
    assert lambda_t_origin_bound_check(lattices, t_grid=(1.0, 0.01)).passed


def test_origin_bound_rejects_t_outside_unit_interval():
    with pytest.raises(ValueError):
        lambda_t_origin_bound_check([TauLattice.from_tau(1j)], t_grid=(2.0,))


def test_origin_bound_formula():
    assert origin_bound(1.0, 0.0) == pytest.approx(11 / 5)
    assert origin_bound(0.01, 12.0) == pytest.approx(math.log(100) / 2 + 1 + 11 / 5)


@pytest.mark.parametrize("tau", [1j, complex(0.5, math.sqrt(3) / 2), complex(0.2, 1.4)])
def test_heat_kernel_positivity_and_smoothing(tau):
    result = heat_positivity_and_smoothing_check(TauLattice.from_tau(tau), samples=100)
    assert result.passed
    assert all(value >= -1e-9 for key, value in result.details.items()
               if key.startswith('min_kernel'))


@pytest.mark.parametrize("tau", [1j, complex(0.5, math.sqrt(3) / 2), complex(0.5, 2)])
def test_lattice_count(tau):
    assert lattice_count_check(tau, x_max=2000).passed


def test_lattice_count_values():
    norms, counts = lattice_count(1j, 4.0)
    # n = 1: m in {-1, 0, 1} (norms 2, 1, 2); n = 2: m = 0 (norm 4)
    assert norms.tolist() == [1.0, 2.0, 2.0, 4.0]
    assert counts.tolist() == [1, 3, 3, 4]


def test_constant_assembly():
    result = elkies_constant_assembly()
    assert result.passed
    assert result.details['assembled'] == pytest.approx(16 / 5)


def test_result_consistency_is_validated():
    with pytest.raises(ValidationError):
        LemmaCheckResult(lemma_id='x', samples=1, worst_margin=-1.0, certified_error=0.0,
                         passed=True)
    ok = LemmaCheckResult.from_margins('x', [0.5, -1e-12], certified_error=1e-9)
    assert ok.passed
    assert ok.worst_margin == -1e-12


@pytest.mark.parametrize("fixture, j_exact", [('c37', Fraction(110592, 37)),
                                              ('c11', Fraction(-4096, 11))])
def test_j_of_period_lattice_matches_curve(request, fixture, j_exact):
    L = period_tau(request.getfixturevalue(fixture))
    j = complex(j_from_tau(L))
    assert abs(j - float(j_exact)) <= 1e-12 * abs(float(j_exact))
