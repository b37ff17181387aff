"""
Configuration management for the Code Curator toolkit.

This module handles two layers of settings:
- AppSettings: process-wide settings (logging, threads) from environment / .env,
  validated with pydantic-settings exactly like a service config
- PipelineConfig: the reproducible, sectioned pipeline configuration that is
  read from and written back to a TOML file on every run
"""

import math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Literal, Optional, Union

import tomli_w
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from common.errors import ConfigError
from common.utils_time import validate_timezone
from corpus.render import DEFAULT_PROMPT_INPUT, DEFAULT_PROMPT_NO_INPUT


# Maximum input lengths used for the two model classes of the source experiments
MAX_LEN_PRESETS = {"7b": 4096, "13b": 2048}

SELECTION_STRATEGIES = ("cdas", "random", "complexity", "diversity", "kcenter", "graph-density")
PACKING_STRATEGIES = ("traditional", "dynamic", "dynamic-pack")


class AppSettings(BaseSettings):
    """
    Process-wide settings loaded from environment variables and an optional .env file.

    Everything that changes results lives in PipelineConfig instead; these
    settings only affect how a run is observed (logs) and scheduled (threads).
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="CURATOR_",
        case_sensitive=False,
        extra="ignore",
    )

    LOG_LEVEL: str = Field(default="INFO", description="Root log level")
    LOG_FILE: str = Field(default="storage/curator.log", description="Rotating log file path")
    THREADS: int = Field(default=1, ge=1, description="Worker threads for parallel stages")
    QUIET: bool = Field(default=False, description="Only warnings on the console, no progress bars")
    DEBUG: bool = Field(default=False, description="Enable debug logging")
    TZ: str = Field(default="UTC", description="Timezone for run metadata timestamps")

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level name."""
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Invalid log level: {v}")
        return level

    @field_validator("TZ")
    @classmethod
    def validate_tz(cls, v: str) -> str:
        """Validate timezone string."""
        return validate_timezone(v)

    def effective_log_level(self) -> str:
        """Log level after applying DEBUG."""
        return "DEBUG" if self.DEBUG else self.LOG_LEVEL

    def __repr__(self) -> str:
        return (f"AppSettings(log_level='{self.LOG_LEVEL}', threads={self.THREADS}, "
                f"quiet={self.QUIET}, tz='{self.TZ}')")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class TemplateSection(_Section):
    prompt_input: str = DEFAULT_PROMPT_INPUT
    prompt_no_input: str = DEFAULT_PROMPT_NO_INPUT

    @field_validator("prompt_input", "prompt_no_input")
    @classmethod
    def require_instruction(cls, v: str) -> str:
        if "{instruction}" not in v:
            raise ValueError("template is missing the {instruction} placeholder")
        return v


class TokenizerSection(_Section):
    kind: Literal["whitespace", "byte", "external-counts"] = "whitespace"
    external_path: Optional[str] = None

    @model_validator(mode="after")
    def require_counts_file(self) -> "TokenizerSection":
        if self.kind == "external-counts" and not self.external_path:
            raise ValueError("external-counts tokenizer requires external_path")
        return self


class DatasetSection(_Section):
    path: str = "data/toy_corpus.jsonl"
    schema_name: Literal["alpaca", "prompt-response"] = Field(default="alpaca", alias="schema")
    drop_unparsable_code: bool = False
    template: TemplateSection = Field(default_factory=TemplateSection)
    tokenizer: TokenizerSection = Field(default_factory=TokenizerSection)


class EmbeddingSection(_Section):
    source: Literal["builtin", "file"] = "builtin"
    dim: int = Field(default=256, ge=16)
    seed: int = Field(default=0, ge=0)
    path: Optional[str] = None

    @model_validator(mode="after")
    def require_file(self) -> "EmbeddingSection":
        if self.source == "file" and not self.path:
            raise ValueError("embedding source 'file' requires path")
        return self


class ClusteringSection(_Section):
    k: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)
    max_iters: int = Field(default=100, ge=1)
    tol: float = Field(default=1e-6, ge=0.0)


class ScoringSection(_Section):
    provider: Literal["ngram", "file"] = "ngram"
    order: int = Field(default=2, ge=1)
    add_k: float = Field(default=1.0, gt=0.0)
    drop_ifd_above: Optional[float] = Field(default=None, gt=0.0)
    path: Optional[str] = None

    @model_validator(mode="after")
    def require_file(self) -> "ScoringSection":
        if self.provider == "file" and not self.path:
            raise ValueError("scoring provider 'file' requires path")
        return self


class SelectionSection(_Section):
    strategy: Literal["cdas", "random", "complexity", "diversity", "kcenter", "graph-density"] = "cdas"
    m_percent: float = Field(default=40.0, gt=0.0, le=100.0)
    seed: int = Field(default=0, ge=0)
    knn: int = Field(default=10, ge=1)
    gamma: Optional[float] = Field(default=None, gt=0.0)


class PackingSection(_Section):
    strategy: Literal["traditional", "dynamic", "dynamic-pack"] = "dynamic-pack"
    max_len: int = Field(default=4096, ge=1)
    batch_size: int = Field(default=512, ge=1)
    separator_cost: int = Field(default=1, ge=0)
    global_pack: bool = False


class PipelineConfig(_Section):
    """
    Fully sectioned pipeline configuration.

    Defaults mirror the reference operating point: 40% sampling rate,
    global batch size 512, maximum input length 4096.
    """

    dataset: DatasetSection = Field(default_factory=DatasetSection)
    embedding: EmbeddingSection = Field(default_factory=EmbeddingSection)
    clustering: ClusteringSection = Field(default_factory=ClusteringSection)
    scoring: ScoringSection = Field(default_factory=ScoringSection)
    selection: SelectionSection = Field(default_factory=SelectionSection)
    packing: PackingSection = Field(default_factory=PackingSection)
    output_dir: str = "artifacts"

    def with_seed(self, seed: int) -> "PipelineConfig":
        """Copy with every section seed set to `seed`."""
        return self.model_copy(update={
            "embedding": self.embedding.model_copy(update={"seed": seed}),
            "clustering": self.clustering.model_copy(update={"seed": seed}),
            "selection": self.selection.model_copy(update={"seed": seed}),
        })

    def resolved(self, n_samples: int) -> "PipelineConfig":
        """Copy with data-dependent defaults (cluster count) filled in."""
        if self.clustering.k is not None:
            return self
        return self.model_copy(update={
            "clustering": self.clustering.model_copy(update={"k": default_k(n_samples)}),
        })


def default_k(n_samples: int) -> int:
    """max(2, round(sqrt(n/2))), never more than the number of samples."""
    return max(1, min(n_samples, max(2, round(math.sqrt(n_samples / 2)))))


def validate_config(data: dict) -> PipelineConfig:
    """
    Validate a raw mapping into a PipelineConfig.

    Raises:
        ConfigError: with the offending field path on the first failure
    """
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ())) or "config"
        raise ConfigError(f"invalid config at {where}: {first.get('msg')}") from e


def load_pipeline_config(path: Union[str, Path, None]) -> PipelineConfig:
    """
    Load a pipeline configuration from a TOML file; None gives all defaults.

    Raises:
        ConfigError: if the file is missing, not TOML, or fails validation
    """
    if path is None:
        return PipelineConfig()

    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")

    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config file {path} is not valid TOML: {e}") from e

    return validate_config(data)


def dump_pipeline_config(config: PipelineConfig, path: Union[str, Path]) -> Path:
    """Write a configuration as TOML; unset optional values are omitted."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = config.model_dump(mode="json", by_alias=True, exclude_none=True)
    with open(path, "wb") as f:
        tomli_w.dump(data, f)
    return path


# Global settings instance
settings = AppSettings()


def get_settings() -> AppSettings:
    """
    Get the global settings instance.

    Returns:
        AppSettings: Global settings object
    """
    return settings


def reload_settings(**overrides) -> AppSettings:
    """
    Reload settings from the environment, applying keyword overrides.

    Returns:
        AppSettings: Reloaded settings object
    """
    global settings
    settings = AppSettings(**overrides)
    return settings
