import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.bounds import (bounds_report, cyclotomic_bounds, h_dagger, max_nlogn_solution,
                        padic_M, padic_proof_side_torsion, small_points_consequences,
                        solve_nlogn, totally_padic_bounds, totally_padic_ef_bounds,
                        totally_real_bounds, totally_real_proof_side_torsion)
from src.errors import DomainError


def test_totally_real_at_zero_height():
    assert totally_real_bounds(0) == (300, Fraction(1, 240), Fraction(1, 21600000))


def test_cyclotomic_at_zero_height():
    assert cyclotomic_bounds(0) == (360000, Fraction(1, 960), Fraction(1, 86400000))


def test_cyclotomic_at_height_two():
    assert cyclotomic_bounds(2)[0] == 36 * 12 ** 4


@given(h=st.fractions(min_value=0, max_value=1000))
@settings(max_examples=50, deadline=None)
def test_cyclotomic_torsion_is_four_times_square_of_totally_real(h):
    assert cyclotomic_bounds(h)[0] == 4 * totally_real_bounds(h)[0] ** 2


@given(h1=st.floats(0, 500), h2=st.floats(0, 500))
@settings(max_examples=50, deadline=None)
def test_bounds_weaken_as_height_grows(h1, h2):
    low, high = sorted((h1, h2))
    for calculator in (totally_real_bounds, cyclotomic_bounds):
        tor_low, liminf_low, min_low = calculator(low)
        tor_high, liminf_high, min_high = calculator(high)
        assert tor_low <= tor_high
        assert liminf_low >= liminf_high
        assert min_low >= min_high


def test_float_height_gives_floats():
    tor, liminf, minimum = totally_real_bounds(0.5)
    assert isinstance(tor, float)
    assert tor == pytest.approx(3 * 10.5 ** 2)


def test_negative_height_rejected():
    with pytest.raises(DomainError):
        totally_real_bounds(-1)


def test_padic_formula():
    p, nu, h = 3, 0, 0
    M = 4 + 2 * math.sqrt(3)
    assert padic_M(p, nu) == pytest.approx(M)
    inner = math.log(M) + 2 * math.log(p) + 32 / 5
    tor, liminf, minimum = totally_padic_bounds(h, p, nu)
    assert tor == pytest.approx(8 * M / (5 * math.log(p)) * inner)
    assert liminf == pytest.approx(math.log(p) / (8 * M))
    assert minimum == pytest.approx(25 / 512 * (math.log(p) / M) ** 3 / inner ** 2)


def test_padic_uses_twelve_nu_when_larger():
    assert padic_M(5, 10) == 120
    assert padic_M(5, 0) == pytest.approx(6 + 2 * math.sqrt(5))


@pytest.mark.parametrize("p", [2, 9, 1])
def test_padic_needs_odd_prime(p):
    with pytest.raises(DomainError):
        totally_padic_bounds(0, p, 0)


def test_ef_variant_specializes_exactly():
    for h, p, nu in ((0, 3, 0), (Fraction(7, 2), 5, 4), (12, 101, 1)):
        assert totally_padic_ef_bounds(h, p, nu, 1, 1) == totally_padic_bounds(h, p, nu)


def test_ef_variant_parameters():
    q = 7 ** 2
    assert padic_M(7, 1, 2, 2) == pytest.approx(max(q + 1 + 2 * math.sqrt(q), 24))
    with pytest.raises(DomainError):
        totally_padic_ef_bounds(0, 7, 1, 0, 1)


def test_h_dagger_is_exact():
    assert h_dagger(0) == Fraction(32, 5)
    assert h_dagger(6) == Fraction(37, 5)


@given(A=st.floats(1.5, 50), B=st.floats(0, 100))
@settings(max_examples=40, deadline=None)
def test_nlogn_solver_bounds_every_solution(A, B):
    assert max_nlogn_solution(A, B, n_max=10 ** 4) <= solve_nlogn(A, B)


@pytest.mark.parametrize("A", [1.5, 2, 5, 20, 50])
@pytest.mark.parametrize("B", [0, 1, 10, 100, 1000])
def test_nlogn_solver_on_a_grid(A, B):
    largest = max_nlogn_solution(A, B, n_max=10 ** 6)
    assert largest < 10 ** 6
    assert largest <= solve_nlogn(A, B)


def test_nlogn_solver_rejects_bad_input():
    with pytest.raises(DomainError):
        solve_nlogn(0, 1)
    with pytest.raises(DomainError):
        solve_nlogn(0.5, 0)


def test_small_points_consequences():
    assert small_points_consequences(Fraction(1, 10), 4) == (4, Fraction(1, 10), Fraction(1, 160))
    with pytest.raises(DomainError):
        small_points_consequences(1, 0)


def test_proof_side_torsion_values():
    # A = 20, B = 128 at h(j) = 0
    expected = math.e / (math.e - 1) * (20 * math.log(20) + 128)
    assert totally_real_proof_side_torsion(0) == pytest.approx(expected)
    assert totally_real_proof_side_torsion(0) <= totally_real_bounds(0)[0]
    assert padic_proof_side_torsion(0, 3, 0) > 0


def test_bounds_report():
    report = bounds_report('tr', Fraction(0))
    assert report.torsion_bound == 300
    assert report.exact == {'torsion_bound': '300', 'liminf_bound': '1/240',
                            'min_height_bound': '1/21600000'}
    assert report.h_star == 10
    assert report.proof_side_torsion is not None

    padic = bounds_report('padic-ef', 0, p=5, nu=2, e=2, f=1)
    assert padic.params['e'] == 2
    assert padic.params['M'] == pytest.approx(padic_M(5, 2, 2, 1))
    assert padic.exact == {}


@pytest.mark.parametrize("regime, kwargs", [
    ('padic', {}),
    ('padic', {'p': 2}),
    ('bogus', {}),
])
def test_bounds_report_errors(regime, kwargs):
    with pytest.raises(DomainError):
        bounds_report(regime, 0, **kwargs)
