"""
Report models and emitters

Every computation the CLI exposes produces one of the pydantic models below.
Models are written to stdout as JSON (or CSV for sweeps) and can be archived
in a ReportStore directory as timestamped JSON files.
"""
import csv
import io
import json
import logging
import re
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field

from src.config import Config

logger = logging.getLogger(__name__)


def _now() -> str:
    return datetime.now().isoformat(timespec='seconds')


class ReportModel(BaseModel):
    """Common base: population by field name, JSON output by alias"""
    model_config = ConfigDict(populate_by_name=True)

    generated_at: str = Field(
        default_factory=_now,
        description="Creation time; excluded when comparing reports for determinism"
    )

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, by_alias=True)

    def to_comparable(self) -> dict:
        return self.model_dump(by_alias=True, exclude={'generated_at'})


class DiscrepancyReport(BaseModel):
    """One place's contribution to the global discrepancy"""
    model_config = ConfigDict(populate_by_name=True)

    place: str = Field(description="'inf' for the archimedean place, else the prime")
    D: float = Field(description="Local discrepancy D_v as a real number")
    D_exact: Optional[dict] = Field(
        default=None, description="D_v as {coeff_num, coeff_den, prime} at a finite place"
    )
    D_i: Optional[dict] = Field(default=None, description="Congruence part of D_v")
    D_j: Optional[dict] = Field(default=None, description="Retraction part of D_v")
    D_direct: Optional[float] = Field(default=None, description="Double-sum evaluation")
    D_parseval: Optional[float] = Field(default=None, description="Fourier-side evaluation")
    Lambda: float = Field(default=0.0, description="Off-diagonal average of lambda_v")
    error_bound: float = Field(default=0.0, ge=0.0, description="Certified truncation error")
    terms: Optional[int] = Field(default=None, description="Lattice terms used")


class GlobalReport(ReportModel):
    curve: str
    Z: List[str] = Field(default_factory=list)
    N: int = Field(ge=1)
    hhat_Z: float = Field(serialization_alias='hhat', description="Average canonical height")
    Lambda_Z: float = Field(serialization_alias='Lambda')
    D_global: float
    error_budget: float = Field(ge=0.0)
    rhs_main: float = Field(serialization_alias='rhs',
                            description="(1/N)(log N / 2 + h(j)/12 + 16/5)")
    slack: float
    per_place: List[DiscrepancyReport] = Field(serialization_alias='places')
    lower_bound_mode: bool = Field(
        default=False, description="True when D_global is a lower bound with primes skipped"
    )
    skipped_primes: List[int] = Field(default_factory=list)

    def place(self, name) -> Optional[DiscrepancyReport]:
        for report in self.per_place:
            if report.place == str(name):
                return report
        return None


class LocalHeightEntry(BaseModel):
    place: str
    value: float
    exact: Optional[dict] = None
    retraction: Optional[str] = None


class OracleSummary(BaseModel):
    value: float
    gap: float = Field(ge=0.0)
    k_max: int = Field(ge=1)
    agrees: bool


class HeightReport(ReportModel):
    curve: str
    point: str
    hhat: float
    torsion_order: Optional[int] = None
    places: List[LocalHeightEntry] = Field(default_factory=list)
    oracle: Optional[OracleSummary] = None


class SweepRow(BaseModel):
    m: int = Field(ge=2)
    N: int
    D_arch: float
    D_lower: float
    rhs: float
    slack: float


class SweepReport(ReportModel):
    curve: str
    rows: List[SweepRow] = Field(default_factory=list)
    statistics: Dict[str, Optional[float]] = Field(default_factory=dict)


SWEEP_COLUMNS = ('m', 'N', 'D_arch', 'D_lower', 'rhs', 'slack')


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    """CSV series (header always present) for external plotting"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=SWEEP_COLUMNS, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({key: repr(value) if isinstance(value, float) else value
                         for key, value in row.model_dump().items()})
    return buffer.getvalue()


def global_csv(report: GlobalReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['place', 'D', 'Lambda', 'error_bound'])
    for place in report.per_place:
        writer.writerow([place.place, repr(place.D), repr(place.Lambda), repr(place.error_bound)])
    writer.writerow(['total', repr(report.D_global), repr(report.Lambda_Z),
                     repr(report.error_budget)])
    return buffer.getvalue()


def render(report: ReportModel, output_format: str) -> str:
    """Text written to stdout for a report"""
    if output_format == 'csv':
        if isinstance(report, SweepReport):
            return sweep_csv(report.rows)
        if isinstance(report, GlobalReport):
            return global_csv(report)
    return report.to_json()


class ArchiveEntry(BaseModel):
    file: str
    kind: str
    curve: Optional[str] = None
    generated_at: Optional[str] = None


class ArchiveListing(BaseModel):
    save_dir: str
    reports: List[ArchiveEntry] = Field(default_factory=list)


_ARCHIVE_NAME = re.compile(r'^report_(?P<kind>.+?)_\d{8}_\d{6}(?:_\d+)?$')


class ReportStore:
    """Timestamped JSON archive of reports"""

    def __init__(self, save_dir: Optional[Path] = None):
        self.save_dir = Path(save_dir) if save_dir else Config.REPORTS_DIR

    def save(self, kind: str, report: ReportModel) -> Path:
        self.save_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime(Config.TIMESTAMP_FORMAT)
        path = self.save_dir / Config.REPORT_FILENAME.format(kind=kind, timestamp=timestamp)
        suffix = 1
        while path.exists():
            path = self.save_dir / Config.REPORT_FILENAME.format(
                kind=kind, timestamp=f"{timestamp}_{suffix}")
            suffix += 1
        path.write_text(report.to_json())
        logger.info("📁 Saved %s report to %s", kind, path)
        return path

    def list_reports(self, kind: Optional[str] = None) -> List[Path]:
        """Archived report files, newest first"""
        if not self.save_dir.exists():
            return []
        pattern = f"report_{kind}_*.json" if kind else "report_*.json"
        return sorted(self.save_dir.glob(pattern), key=lambda p: p.stem, reverse=True)

    def load(self, path: Path) -> dict:
        try:
            with open(path, 'r') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning("⚠️ Error reading report file %s: %s", path, e)
            return {}

    def listing(self, kind: Optional[str] = None) -> ArchiveListing:
        """Archived reports, newest first, with the curve and time read from each file"""
        entries = []
        for path in self.list_reports(kind):
            match = _ARCHIVE_NAME.match(path.stem)
            content = self.load(path)
            if not isinstance(content, dict):
                content = {}
            entries.append(ArchiveEntry(file=path.name,
                                        kind=match.group('kind') if match else 'unknown',
                                        curve=content.get('curve'),
                                        generated_at=content.get('generated_at')))
        logger.info("📁 %d archived reports in %s", len(entries), self.save_dir)
        return ArchiveListing(save_dir=str(self.save_dir), reports=entries)
