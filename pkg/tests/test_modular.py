import math

import pytest
from mpmath import mpc, mpf

from src.modular import j_invariant, reduce_basis, reduce_tau

TOL = mpf(2) ** -60
RHO = complex(0.5, math.sqrt(3) / 2)


def test_j_at_elliptic_points():
    assert complex(j_invariant(1j, 128)) == pytest.approx(1728, abs=1e-20)
    assert abs(complex(j_invariant(RHO, 128))) < 1e-20


def test_j_is_modular():
    tau = complex(0.137, 1.29)
    value = complex(j_invariant(tau, 128))
    assert complex(j_invariant(tau + 1, 128)) == pytest.approx(value, rel=1e-12)
    assert complex(j_invariant(-1 / tau, 128)) == pytest.approx(value, rel=1e-12)


def test_j_is_real_on_the_imaginary_axis():
    value = complex(j_invariant(2j, 128))
    assert abs(value.imag) < 1e-15 * abs(value)
    # j(it) ~ exp(2 pi t) + 744
    assert value.real == pytest.approx(math.exp(4 * math.pi) + 744, rel=1e-3)


@pytest.mark.parametrize("tau, expected", [
    (complex(3, 2), 2j),
    (complex(0, 0.5), 2j),
    (complex(-0.5, math.sqrt(3) / 2), RHO),
    (complex(0.25, 0.1), None),
])
def test_reduction_lands_in_the_fundamental_domain(tau, expected):
    reduced = complex(reduce_tau(mpc(tau), TOL))
    assert -0.5 - 1e-12 < reduced.real <= 0.5 + 1e-12
    assert abs(reduced) >= 1 - 1e-12
    if expected is not None:
        assert reduced == pytest.approx(expected)


def test_reduce_basis_keeps_orientation():
    w1, w2 = reduce_basis(mpc(2), mpc(1, -3), TOL)
    assert (w2 / w1).imag > 0


def test_lower_half_plane_rejected():
    with pytest.raises(ValueError):
        j_invariant(complex(0, -1), 64)
