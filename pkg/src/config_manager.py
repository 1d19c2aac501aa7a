"""
Configuration Manager for height/discrepancy runs
Merges defaults, an optional key=value file, HDISC_* environment variables and CLI flags
"""
import os
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.config import Config
from src.errors import ParseError


class RunConfig(BaseModel):
    """Validated settings shared by every computation of one run"""
    model_config = ConfigDict(frozen=True)

    precision_bits: int = Field(
        default=Config.DEFAULT_PRECISION_BITS, ge=64,
        description="Working precision of the high-precision analytic computations"
    )
    tail_eps: float = Field(
        default=Config.DEFAULT_TAIL_EPS, gt=0.0, le=1e-4,
        description="Target bound for every discarded series or lattice tail"
    )
    oracle_kmax: int = Field(
        default=Config.DEFAULT_ORACLE_KMAX, ge=1, le=Config.MAX_ORACLE_KMAX,
        description="Number of doublings used by the canonical height oracle"
    )
    seed: int = Field(
        default=Config.DEFAULT_SEED, ge=0,
        description="Seed for every sampled grid or random point set"
    )
    output_format: Literal['json', 'csv'] = Field(
        default=Config.DEFAULT_OUTPUT_FORMAT,
        description="Format of the report written to stdout"
    )
    lattice_term_cap: int = Field(
        default=Config.DEFAULT_LATTICE_TERM_CAP, ge=1000,
        description="Largest number of lattice terms a single truncated sum may use"
    )
    save_dir: Optional[Path] = Field(
        default=None,
        description="Directory for archived JSON reports; nothing is archived when unset"
    )


# Parsers for values that arrive as text from files or the environment
_CASTS = {
    'precision_bits': int,
    'tail_eps': float,
    'oracle_kmax': int,
    'seed': int,
    'output_format': str,
    'lattice_term_cap': int,
    'save_dir': Path,
}


class ConfigManager:
    """Builds a RunConfig from layered sources"""

    def __init__(self, config_file: Optional[str] = None,
                 environ: Optional[Mapping[str, str]] = None):
        """
        Initialize ConfigManager

        Args:
            config_file: Optional key=value file (dotenv syntax, '#' comments)
            environ: Environment mapping; defaults to os.environ after load_dotenv()
        """
        if environ is None:
            load_dotenv()
            environ = os.environ
        self.config_file = Path(config_file) if config_file else None
        self.environ = environ
        self.default_config = RunConfig().model_dump()
        self._config = self.default_config.copy()

        if self.config_file is not None:
            if not self.config_file.exists():
                raise ParseError(f"❌ ERROR: Config file not found: {self.config_file}")
            self.update_config(self._read_file())
        self.update_config(self._read_environment())

    def _read_file(self) -> Dict[str, Any]:
        values = dotenv_values(self.config_file)
        return self._cast({key.lower(): value for key, value in values.items()
                           if value is not None})

    def _read_environment(self) -> Dict[str, Any]:
        prefix = Config.ENV_PREFIX
        raw = {key[len(prefix):].lower(): value
               for key, value in self.environ.items()
               if key.startswith(prefix) and key[len(prefix):].lower() in _CASTS}
        return self._cast(raw)

    @staticmethod
    def _cast(raw: Dict[str, str]) -> Dict[str, Any]:
        cast = {}
        for key, value in raw.items():
            if key not in _CASTS:
                raise ParseError(f"❌ ERROR: Unknown configuration key '{key}'")
            try:
                cast[key] = _CASTS[key](value)
            except ValueError as e:
                raise ParseError(f"❌ ERROR: Bad value for '{key}': {value!r} ({e})")
        return cast

    def get_config(self) -> Dict[str, Any]:
        """Return a copy of the merged configuration"""
        return self._config.copy()

    def update_config(self, updates: Dict[str, Any]) -> Dict[str, Any]:
        """
        Apply updates after validating them

        Args:
            updates: Dictionary of configuration keys to update; None values are ignored

        Returns:
            dict: Result with success status and message
        """
        updates = {key: value for key, value in updates.items() if value is not None}
        validation_result = self._validate_updates(updates)
        if not validation_result['valid']:
            raise ParseError(f"❌ ERROR: {validation_result['message']}")
        self._config.update(updates)
        return {
            'success': True,
            'message': 'Configuration updated successfully',
            'config': self.get_config()
        }

    def _validate_updates(self, updates: Dict[str, Any]) -> Dict[str, Any]:
        """
        Validate configuration updates against the RunConfig schema

        Returns:
            dict: Validation result with valid flag and message
        """
        unknown = sorted(set(updates) - set(self.default_config))
        if unknown:
            return {'valid': False, 'message': f'unknown configuration keys {unknown}'}
        candidate = self._config.copy()
        candidate.update(updates)
        try:
            RunConfig(**candidate)
        except ValidationError as e:
            first = e.errors()[0]
            field = '.'.join(str(part) for part in first['loc'])
            return {'valid': False, 'message': f"{field}: {first['msg']}"}
        return {'valid': True, 'message': 'Configuration is valid'}

    def to_run_config(self) -> RunConfig:
        return RunConfig(**self._config)
