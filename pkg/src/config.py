"""
Static configuration for the height/discrepancy toolkit
"""
import os
from pathlib import Path


class Config:
    """Default settings, overridable through ConfigManager"""

    # Base paths
    PROJECT_ROOT = Path(__file__).resolve().parent.parent
    REPORTS_DIR = Path(os.environ.get('HDISC_REPORTS_DIR', PROJECT_ROOT / 'reports'))

    # Numerical defaults
    DEFAULT_PRECISION_BITS = 160
    DEFAULT_TAIL_EPS = 1e-12
    DEFAULT_ORACLE_KMAX = 6
    MAX_ORACLE_KMAX = 7
    DEFAULT_SEED = 20240229
    DEFAULT_LATTICE_TERM_CAP = 2_000_000
    DEFAULT_OUTPUT_FORMAT = 'json'
    OUTPUT_FORMATS = ('json', 'csv')

    # Uniform bound on rational torsion orders
    TORSION_ORDER_LIMIT = 12

    # Environment variables read by ConfigManager start with this prefix
    ENV_PREFIX = 'HDISC_'

    # Report archive file pattern
    REPORT_FILENAME = 'report_{kind}_{timestamp}.json'
    TIMESTAMP_FORMAT = '%Y%m%d_%H%M%S'
