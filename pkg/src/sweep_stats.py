"""
Statistics Calculator for torsion sweeps
Summarizes how the discrepancy of E[m] decays with m
"""
import math
from typing import Any, Dict, List, Optional

import numpy as np

from src.reports import SweepRow


class SweepStatistics:
    """Calculate statistics from torsion sweep rows"""

    def __init__(self, rows: List[SweepRow]):
        """
        Initialize with sweep rows

        Args:
            rows: One SweepRow per torsion level m
        """
        self.rows = sorted(rows, key=lambda row: row.m)

    def calculate_row_count(self) -> int:
        return len(self.rows)

    def calculate_decay_exponent(self) -> Optional[float]:
        """
        Least-squares slope of log D_arch against log m

        Returns:
            The slope (close to -2 for equidistributed torsion), or None with fewer than two rows
        """
        if len(self.rows) < 2:
            return None
        log_m = np.log([row.m for row in self.rows])
        log_d = np.log([row.D_arch for row in self.rows])
        slope, _ = np.polyfit(log_m, log_d, 1)
        return float(slope)

    def calculate_min_slack(self) -> Optional[float]:
        if not self.rows:
            return None
        return min(row.slack for row in self.rows)

    def calculate_scaled_spread(self) -> Optional[float]:
        """
        Relative spread of m^2 * D_lower across rows

        Returns:
            (max - min) / max of the scaled values; 0 when the 1/m^2 law is exact
        """
        if not self.rows:
            return None
        scaled = np.array([row.D_lower * row.m * row.m for row in self.rows])
        top = float(np.max(scaled))
        return float((top - np.min(scaled)) / top) if top > 0 else 0.0

    def is_decreasing(self) -> bool:
        """D_arch strictly decreases with m"""
        values = [row.D_arch for row in self.rows]
        return all(later < earlier for earlier, later in zip(values, values[1:]))

    def calculate_all_statistics(self) -> Dict[str, Any]:
        """
        Calculate all statistics in one call

        Returns:
            Statistics dictionary for the sweep report
        """
        exponent = self.calculate_decay_exponent()
        return {
            'rows': float(self.calculate_row_count()),
            'decay_exponent': exponent,
            'min_slack': self.calculate_min_slack(),
            'scaled_spread': self.calculate_scaled_spread(),
            'decreasing': 1.0 if self.is_decreasing() else 0.0,
            'exponent_error': None if exponent is None else abs(exponent + 2),
        }


def sweep_statistics(rows: List[SweepRow]) -> Dict[str, Any]:
    return SweepStatistics(rows).calculate_all_statistics()


def row_from_report(m: int, report) -> SweepRow:
    """SweepRow from a lower-bound GlobalReport of E[m]"""
    arch = report.place('inf')
    return SweepRow(m=m, N=report.N, D_arch=arch.D if arch else math.nan,
                    D_lower=report.D_global, rhs=report.rhs_main, slack=report.slack)
