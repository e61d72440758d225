import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError as PydanticValidationError, field_validator
from pydantic_settings import BaseSettings

from app.codec.synthetic import SynthParams
from app.core.exceptions import ConfigError


class Settings(BaseSettings):
    """Application settings loaded from environment variables and .env file."""

    # Results store
    DATABASE_URL: str = "sqlite:///address_clusters.db"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = False

    # Pipeline settings
    OUTPUT_DIR: str = "artifacts"
    PIPELINE_QUEUE_SIZE: int = Field(default=1024, ge=1, description="Records buffered between parser and engine")
    PROGRESS_EVERY: int = Field(default=100_000, ge=1, description="Log engine progress every N transactions")

    # Analytics defaults
    DEFAULT_QUANTILE_WINDOW: int = 250_000
    DEFAULT_Q_LIST_STR: str = Field(default="100,1000,10000,100000", alias="DEFAULT_Q_LIST")
    SUPERCLUSTER_MIN_SIZE: int = 1000
    SUPERCLUSTER_MAX_SIZE: int = 10_000_000

    model_config = {"env_file": ".env", "populate_by_name": True}

    @property
    def DEFAULT_Q_LIST(self) -> List[int]:
        """Return DEFAULT_Q_LIST as a list of ints."""
        return [int(q.strip()) for q in self.DEFAULT_Q_LIST_STR.split(',') if q.strip()]


# Single instance to be imported by other modules
settings = Settings()


class RunConfig(BaseModel):
    """Parameters of one CLI invocation, merged from a config file and flags."""

    inputs: List[Path] = Field(default_factory=list)
    format: Literal["text", "binary", "synthetic"] = "text"
    synth: SynthParams = Field(default_factory=SynthParams)
    strict: bool = True

    window: Union[Literal["month"], int] = "month"
    quantile_window: int = Field(default_factory=lambda: settings.DEFAULT_QUANTILE_WINDOW, ge=1)
    q_list: List[int] = Field(default_factory=lambda: settings.DEFAULT_Q_LIST)
    supercluster_min: int = Field(default_factory=lambda: settings.SUPERCLUSTER_MIN_SIZE, ge=1)
    supercluster_max: int = Field(default_factory=lambda: settings.SUPERCLUSTER_MAX_SIZE, ge=2)

    fraction: float = Field(default=0.0001, gt=0.0, le=1.0)
    large_threshold: int = Field(default=1000, ge=2)
    ordinal_range: Optional[Tuple[int, int]] = None
    time_range: Optional[Tuple[int, int]] = None

    top_n: int = Field(default=20, ge=1)
    rank_by: Literal["size", "received"] = "size"
    clusters: Optional[List[int]] = None
    min_flow: int = Field(default=0, ge=0)
    self_loops: bool = False
    tags: Optional[Path] = None
    cluster: Optional[int] = None

    out: Path = Field(default_factory=lambda: Path(settings.OUTPUT_DIR))
    snapshot: Optional[Path] = None
    database_url: Optional[str] = None

    @field_validator("window")
    @classmethod
    def _check_window(cls, value):
        if isinstance(value, int) and value < 1:
            raise ValueError("window size must be >= 1")
        return value

    @field_validator("q_list")
    @classmethod
    def _check_q_list(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("q_list must not be empty")
        if any(q < 2 for q in value):
            raise ValueError("every q must be >= 2")
        return value


def load_run_config(config_file: Optional[Path], flag_values: Dict[str, Any]) -> RunConfig:
    """Build a RunConfig: defaults, then the JSON config file, then explicit flags."""
    values: Dict[str, Any] = {}
    if config_file is not None:
        try:
            values = json.loads(Path(config_file).read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {config_file}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {config_file} is not valid JSON: {e}") from e
        if not isinstance(values, dict):
            raise ConfigError(f"config file {config_file} must contain a JSON object")

    synth_values = dict(values.pop("synth", {}) or {})
    synth_values.update(flag_values.pop("synth", {}) or {})
    values.update({key: value for key, value in flag_values.items() if value is not None})
    values["synth"] = synth_values

    try:
        return RunConfig.model_validate(values)
    except PydanticValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
