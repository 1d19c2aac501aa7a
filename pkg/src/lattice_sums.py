"""
Truncated sums over the period lattice L = Z + tau Z.

A character gamma_w(z) = exp(2 pi i (n1 r1 + n2 r2)) is indexed by w = n1 + n2 tau;
its Laplace eigenvalue is c_w = 2 pi |w'|^2 / b with w' = n2 - n1 tau.
Sums of Gaussian-damped characters are cut at |w'|^2 <= X, where X is chosen
so that a certified tail bound falls below the requested tolerance.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.errors import TruncationBudgetExceeded

logger = logging.getLogger(__name__)

# Entries per phase matrix block
_BLOCK = 4_000_000
_MACHINE_EPS = np.finfo(float).eps


def gaussian_tail_bound(X: float, kappa: float, b: float, delta: float) -> float:
    """
    Bound for sum_{|w'|^2 > X} exp(-kappa |w'|^2).

    Uses #{|w'|^2 <= x} <= pi (sqrt(x) + delta)^2 / b, delta the diameter of a
    fundamental cell, and integrates by parts against exp(-kappa x).
    """
    A = math.pi / b
    B = 2 * math.pi * delta / b
    C = math.pi * delta * delta / b
    root = math.sqrt(X)
    shifted = X + 1 / kappa
    return math.exp(-kappa * X) * (A * shifted + B * (shifted / (2 * root) + root / 2) + C)


def truncation_level(tau: complex, kappa: float, eps: float, weighted: bool, cap: int) -> tuple:
    """
    Smallest tried X whose tail bound is below eps.

    weighted=True bounds sums carrying the extra factor b/(2 pi |w'|^2).
    Returns (X, tail_bound).
    """
    b = tau.imag
    delta = 1 + abs(tau)
    X = max(1.0, math.log(1 / eps) / kappa)
    for _ in range(400):
        tail = gaussian_tail_bound(X, kappa, b, delta)
        if weighted:
            tail *= b / (2 * math.pi * X)
        if tail <= eps:
            break
        X *= 1.2
    expected_terms = math.pi * (math.sqrt(X) + delta) ** 2 / b
    if expected_terms > cap:
        raise TruncationBudgetExceeded(
            f"❌ ERROR: Lattice sum needs about {expected_terms:.3g} terms (cap {cap})")
    return X, tail


def dual_lattice_points(tau: complex, X: float) -> tuple:
    """All (n1, n2) != (0, 0) with |n2 - n1 tau|^2 <= X, and their norms"""
    a, b = tau.real, tau.imag
    n1_max = int(math.floor(math.sqrt(X) / b))
    n1_rows, n2_rows = [], []
    for n1 in range(-n1_max, n1_max + 1):
        room = X - (n1 * b) ** 2
        if room < 0:
            continue
        width = math.sqrt(room)
        n2 = np.arange(math.ceil(n1 * a - width), math.floor(n1 * a + width) + 1)
        n1_rows.append(np.full(n2.shape, n1))
        n2_rows.append(n2)
    n1 = np.concatenate(n1_rows) if n1_rows else np.zeros(0, dtype=int)
    n2 = np.concatenate(n2_rows) if n2_rows else np.zeros(0, dtype=int)
    norm = (n2 - n1 * a) ** 2 + (n1 * b) ** 2
    keep = ((n1 != 0) | (n2 != 0)) & (norm <= X)
    return n1[keep], n2[keep], norm[keep]


@dataclass(frozen=True, eq=False)
class LatticeSeries:
    """sum_w weight_w * gamma_w(z) over a truncated set of nonzero w"""
    n1: np.ndarray
    n2: np.ndarray
    weights: np.ndarray
    tail_bound: float

    @classmethod
    def heat(cls, tau: complex, t: float, eps: float, cap: int, smoothed_green: bool):
        """
        Damped character series at time t.

        smoothed_green=False gives the nonconstant part of the heat kernel
        (weights exp(-t c_w)); smoothed_green=True gives lambda_t
        (weights b/(2 pi |w'|^2) exp(-t c_w)).
        """
        if t <= 0:
            raise ValueError("t must be positive")
        b = tau.imag
        kappa = 2 * math.pi * t / b
        X, tail = truncation_level(tau, kappa, eps, smoothed_green, cap)
        n1, n2, norm = dual_lattice_points(tau, X)
        weights = np.exp(-kappa * norm)
        if smoothed_green:
            weights = weights * b / (2 * math.pi * norm)
        logger.debug("Lattice series t=%g: %d terms, tail %.2e", t, len(weights), tail)
        return cls(n1, n2, weights, tail)

    @property
    def rounding_bound(self) -> float:
        return 16 * len(self.weights) * _MACHINE_EPS * float(np.sum(np.abs(self.weights)))

    @property
    def error_bound(self) -> float:
        return self.tail_bound + self.rounding_bound

    def _blocks(self, count: int):
        step = max(1, _BLOCK // max(1, len(self.weights)))
        for start in range(0, count, step):
            yield slice(start, min(count, start + step))

    def evaluate(self, r1, r2) -> tuple:
        """
        Values of the series at the points (r1[k], r2[k]).

        Returns (real parts, largest imaginary residue).
        """
        r1 = np.atleast_1d(np.asarray(r1, dtype=float))
        r2 = np.atleast_1d(np.asarray(r2, dtype=float))
        values = np.empty(r1.shape)
        residue = 0.0
        for block in self._blocks(len(r1)):
            phase = np.mod(np.outer(self.n1, r1[block]) + np.outer(self.n2, r2[block]), 1.0)
            phase *= 2 * math.pi
            values[block] = self.weights @ np.cos(phase)
            if len(self.weights):
                residue = max(residue, float(np.max(np.abs(self.weights @ np.sin(phase)))))
        return values, residue

    def spectral_energy(self, r1, r2) -> float:
        """sum_w weight_w |(1/N) sum_j conj(gamma_w(z_j))|^2"""
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        count = len(self.weights)
        step = max(1, _BLOCK // max(1, len(r1)))
        parts = []
        for start in range(0, count, step):
            stop = min(count, start + step)
            phase = np.mod(np.outer(self.n1[start:stop], r1)
                           + np.outer(self.n2[start:stop], r2), 1.0)
            phase *= 2 * math.pi
            power = np.mean(np.cos(phase), axis=1) ** 2 + np.mean(np.sin(phase), axis=1) ** 2
            parts.extend((self.weights[start:stop] * power).tolist())
        return math.fsum(parts)
