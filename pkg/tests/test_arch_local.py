import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pt
from src.arch_local import (ArchPoint, LatticeCharacterIndex, TauLattice, arch_discrepancy_direct,
                            arch_discrepancy_parseval, character, elkies_gap, elliptic_log,
                            fourier_coeff, heat_kernel, in_real_tau_set, lambda_t,
                            laplace_eigenvalue, lattice_from_model, neron_lambda_arch, period_tau,
                            real_locus_points, real_points_lower_bound)
from src.curve import point_mul
from src.errors import (DuplicatePoints, PointNotOnCurve, SingularAtOrigin, SingularCurve,
                        TauNotReal)

SQUARE = TauLattice.from_tau(1j)
HEXAGONAL = TauLattice.from_tau(complex(0.5, math.sqrt(3) / 2))


@pytest.fixture(scope='module')
def lattice37(c37):
    return period_tau(c37)


def test_arch_point_arithmetic_is_mod_one():
    z = ArchPoint.from_fractions(Fraction(3, 4), Fraction(1, 2))
    w = ArchPoint.from_fractions(Fraction(1, 2), Fraction(3, 4))
    total = z + w
    assert float(total.r1) == pytest.approx(0.25)
    assert float(total.r2) == pytest.approx(0.25)
    assert (z - z).is_origin
    assert z.scale(4).is_origin
    assert (-z + z).is_origin
    assert z.distance(w) == pytest.approx(math.hypot(0.25, 0.25))


def test_from_tau_flags_fundamental_domain():
    assert SQUARE.fundamental
    assert not TauLattice.from_tau(complex(0.9, 0.5)).fundamental
    reduced = TauLattice.from_tau(complex(3, 0.5), reduce=True)
    assert reduced.fundamental
    assert reduced.tau_complex == pytest.approx(2j)
    with pytest.raises(ValueError):
        TauLattice.from_tau(complex(0, -1))


def test_special_models_give_special_lattices():
    square = lattice_from_model(0, 0, 0, -1, 0)
    assert square.tau_complex == pytest.approx(1j, abs=1e-20)
    hexagonal = lattice_from_model(0, 0, 1, 0, 0)
    assert hexagonal.tau_complex == pytest.approx(complex(0.5, math.sqrt(3) / 2), abs=1e-20)
    with pytest.raises(SingularCurve):
        lattice_from_model(0, 0, 0, 0, 0)


def test_lattice_of_positive_discriminant_curve_is_rectangular(lattice37):
    assert lattice37.fundamental
    assert abs(lattice37.a) < 1e-20


def test_fourier_coefficient_and_eigenvalue_are_reciprocal():
    for omega in [LatticeCharacterIndex(1, 0), LatticeCharacterIndex(2, -3),
                  LatticeCharacterIndex(0, 5)]:
        for L in (SQUARE, HEXAGONAL):
            assert fourier_coeff(omega, L) * laplace_eigenvalue(omega, L) == pytest.approx(1.0)
    assert fourier_coeff(LatticeCharacterIndex(1, 0), SQUARE) == pytest.approx(1 / (2 * math.pi))
    assert fourier_coeff(LatticeCharacterIndex(0, 0), SQUARE) == 0.0


def test_neron_function_singular_at_origin():
    with pytest.raises(SingularAtOrigin):
        neron_lambda_arch(ArchPoint.origin(), SQUARE)


def test_neron_function_is_even_and_blows_up_near_origin():
    z = ArchPoint.from_fractions(Fraction(1, 7), Fraction(2, 5))
    assert float(neron_lambda_arch(z, SQUARE)) == pytest.approx(float(neron_lambda_arch(-z, SQUARE)))
    near = ArchPoint(1e-6, 0)
    far = ArchPoint.from_fractions(Fraction(1, 2), Fraction(1, 2))
    assert neron_lambda_arch(near, SQUARE) > neron_lambda_arch(far, SQUARE) + 10


@pytest.mark.parametrize("t", [1.0, 0.1])
def test_smoothing_is_below_neron_plus_t(t):
    rng = np.random.default_rng(7)
    for r1, r2 in rng.uniform(0, 1, (20, 2)):
        z = ArchPoint(r1, r2)
        assert float(neron_lambda_arch(z, SQUARE)) >= lambda_t(z, t, SQUARE) - t - 1e-9


def test_smoothing_converges_to_neron_function():
    z = ArchPoint.from_fractions(Fraction(1, 3), Fraction(1, 4))
    exact = float(neron_lambda_arch(z, HEXAGONAL))
    errors = [abs(lambda_t(z, t, HEXAGONAL) - exact) for t in (1e-2, 1e-3, 1e-4)]
    assert errors[2] < errors[0]
    assert errors[2] < 1e-3


def test_smoothing_at_origin_decreases_in_t():
    origin = ArchPoint.origin()
    values = [lambda_t(origin, t, SQUARE) for t in (1e-3, 1e-2, 1e-1, 1.0)]
    assert values == sorted(values, reverse=True)


@given(r1=st.floats(0, 1, exclude_max=True), r2=st.floats(0, 1, exclude_max=True))
@settings(max_examples=50, deadline=None)
def test_heat_kernel_is_nonnegative(r1, r2):
    assert heat_kernel(ArchPoint(r1, r2), 0.1, HEXAGONAL) >= -1e-9


def test_elliptic_log_of_multiples_is_linear(c37, lattice37):
    P = pt(0, 0)
    z = elliptic_log(c37, lattice37, P)
    for k in (2, 3, 5):
        zk = elliptic_log(c37, lattice37, point_mul(c37, k, P))
        assert zk.distance(z.scale(k)) < 1e-15


def test_elliptic_log_of_torsion_is_rational(c11):
    L = period_tau(c11)
    for P in (pt(0, 0), pt(1, 0), pt(1, -1), pt(0, -1)):
        z = elliptic_log(c11, L, P)
        assert z.scale(5).distance(ArchPoint.origin()) < 1e-15


def test_elliptic_log_rejects_points_off_the_curve(c37, lattice37):
    with pytest.raises(PointNotOnCurve):
        elliptic_log(c37, lattice37, pt(1, 1))


def _points(count, seed):
    rng = np.random.default_rng(seed)
    return [ArchPoint(r1, r2) for r1, r2 in rng.uniform(0, 1, (count, 2))]


@pytest.mark.parametrize("L", [SQUARE, HEXAGONAL, TauLattice.from_tau(complex(0.2, 1.7))])
def test_direct_and_fourier_discrepancies_agree(L):
    Z = _points(12, 3)
    direct = arch_discrepancy_direct(Z, L)
    parseval = arch_discrepancy_parseval(Z, L)
    assert direct.value == pytest.approx(parseval.value,
                                         abs=direct.error_bound + parseval.error_bound + 1e-10)
    assert parseval.value >= 0


@pytest.mark.parametrize("N", [5, 20, 50])
def test_direct_and_fourier_agree_on_curve_lattice(lattice37, N):
    Z = _points(N, 100 + N)
    direct = arch_discrepancy_direct(Z, lattice37)
    parseval = arch_discrepancy_parseval(Z, lattice37)
    assert abs(direct.value - parseval.value) <= direct.error_bound + parseval.error_bound + 1e-10


def test_discrepancy_of_torsion_grid_is_smoothed_origin_over_n():
    m = 3
    Z = [ArchPoint.from_fractions(Fraction(a, m), Fraction(b, m))
         for a in range(m) for b in range(m)]
    # default t = 1/N: the grid sees lambda_t at t = N / m^2 = 1
    direct = arch_discrepancy_direct(Z, SQUARE)
    assert direct.value == pytest.approx(lambda_t(ArchPoint.origin(), 1.0, SQUARE) / m ** 2,
                                         abs=1e-10)


def test_discrepancy_rejects_repeated_points():
    z = ArchPoint.from_fractions(Fraction(1, 3), Fraction(0))
    with pytest.raises(DuplicatePoints):
        arch_discrepancy_direct([z, z], SQUARE)


@pytest.mark.parametrize("seed", [1, 2])
def test_pair_sum_lower_bound(seed):
    assert elkies_gap(_points(10, seed), HEXAGONAL) >= -1e-8


def test_real_tau_set():
    assert in_real_tau_set(SQUARE)
    assert in_real_tau_set(TauLattice.from_tau(complex(0.5, 0.75)))
    assert not in_real_tau_set(TauLattice.from_tau(complex(0.5, 0.5)))
    assert not in_real_tau_set(TauLattice.from_tau(complex(0.3, 1.0)))
    with pytest.raises(TauNotReal):
        real_points_lower_bound(10, TauLattice.from_tau(complex(0.3, 1.0)))


def test_real_points_bound_formula():
    expected = 1 / (4 * math.pi) * math.exp(-8 * math.pi / 10)
    assert real_points_lower_bound(10, SQUARE) == pytest.approx(expected)


@pytest.mark.parametrize("tau", [1j, complex(0.5, 1.0), 2j])
@pytest.mark.parametrize("N", [4, 8, 16])
def test_real_locus_discrepancy_exceeds_bound(tau, N):
    L = TauLattice.from_tau(tau)
    Z = real_locus_points([Fraction(k, N // 2) for k in range(N // 2)], components=(0, 1))
    assert len(Z) == N
    D = arch_discrepancy_direct(Z, L).value
    assert D >= real_points_lower_bound(N, L) - 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("tau", [1j, complex(0.2, 1.7)])
def test_neron_function_has_mean_zero(tau):
    L = TauLattice.from_tau(tau, 64)
    grid = (np.arange(64) + 0.5) / 64
    values = [float(neron_lambda_arch(ArchPoint(r1, r2, 64), L)) for r1 in grid for r2 in grid]
    assert abs(math.fsum(values) / len(values)) < 1e-3


@pytest.mark.parametrize("L", [SQUARE, HEXAGONAL, TauLattice.from_tau(complex(0.2, 1.7))])
@pytest.mark.parametrize("n1, n2", [(1, 0), (0, 1), (2, -1), (1, 3)])
def test_characters_are_laplace_eigenfunctions(L, n1, n2):
    omega = LatticeCharacterIndex(n1, n2)
    h = 1e-3
    x = np.array([0.13, 0.71, 0.42])
    y = np.array([0.05, 0.66, 1.2]) * L.b
    centre = character(omega, x, y, L)
    stencil = (character(omega, x + h, y, L) + character(omega, x - h, y, L)
               + character(omega, x, y + h, L) + character(omega, x, y - h, L)
               - 4 * centre) / h ** 2
    expected = -2 * math.pi / L.b * laplace_eigenvalue(omega, L)
    ratio = stencil / centre
    assert np.allclose(ratio.real, expected, rtol=1e-3)
    assert np.all(np.abs(ratio.imag) < 1e-3 * abs(expected))


def test_characters_are_periodic():
    omega = LatticeCharacterIndex(2, -3)
    tau = HEXAGONAL.tau_complex
    z = complex(0.3, 0.4)
    for shift in (1, tau, 2 - 3 * tau):
        moved = z + shift
        difference = (character(omega, moved.real, moved.imag, HEXAGONAL)
                      - character(omega, z.real, z.imag, HEXAGONAL))
        assert abs(complex(difference)) < 1e-12


@pytest.mark.parametrize("L", [SQUARE, HEXAGONAL])
def test_neron_function_is_invariant_under_lattice_shifts(L):
    for r1, r2 in ((0.3, 0.7), (0.05, 0.95), (0.5, 0.0)):
        base = float(neron_lambda_arch(ArchPoint(r1, r2), L))
        shifted = float(neron_lambda_arch(ArchPoint(r1 + 3, r2 - 2), L))
        assert abs(base - shifted) < 1e-12


@pytest.mark.parametrize("L", [SQUARE, HEXAGONAL, TauLattice.from_tau(complex(0.2, 1.7))])
def test_neron_function_is_continuous_across_the_seam(L):
    for r1 in (0.25, 0.6):
        edge = float(neron_lambda_arch(ArchPoint(r1, 0.0), L))
        below = float(neron_lambda_arch(ArchPoint(r1, 1 - 1e-10), L))
        above = float(neron_lambda_arch(ArchPoint(r1, 1e-10), L))
        assert below == pytest.approx(edge, abs=1e-6)
        assert above == pytest.approx(edge, abs=1e-6)


def test_heat_smoothing_vanishes_for_large_t():
    for z in (ArchPoint.origin(), ArchPoint(0.3, 0.8), ArchPoint(0.5, 0.5)):
        assert abs(lambda_t(z, 1e3, SQUARE)) < 1e-6
        assert abs(heat_kernel(z, 1e3, SQUARE) - 1) < 1e-6
