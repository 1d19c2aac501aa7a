import sys
from fractions import Fraction
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.curve import O, Point, make_curve  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long numerical sweeps (still run by default)")


def pt(x, y) -> Point:
    return Point(Fraction(x), Fraction(y))


@pytest.fixture(scope='session')
def c37():
    """y^2 + y = x^3 - x, rank 1 generated by (0, 0)"""
    return make_curve(0, 0, 1, -1, 0)


@pytest.fixture(scope='session')
def c11():
    """y^2 + y = x^3 - x^2, torsion of order 5"""
    return make_curve(0, -1, 1, 0, 0)


@pytest.fixture(scope='session')
def c14():
    """y^2 + xy + y = x^3 + 4x - 6, torsion of order 6, nu_2 = 6 and nu_7 = 3"""
    return make_curve(1, 0, 1, 4, -6)


@pytest.fixture(scope='session')
def five_torsion():
    return [O, pt(0, 0), pt(1, 0), pt(1, -1), pt(0, -1)]


@pytest.fixture(scope='session')
def six_torsion():
    return [O, pt(1, -1), pt(2, 2), pt(2, -5), pt(9, 23), pt(9, -33)]
