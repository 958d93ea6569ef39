"""
Configuration
Environment-driven settings and the validated run configuration of the CLI
"""

import math
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from plandiv.planning.metrics import MetricId, MetricSpec
from plandiv.planning.selection import DiversityMode

load_dotenv()


class Settings(BaseSettings):
    """Service and CLI defaults, read from PLANDIV_* variables and .env"""

    model_config = SettingsConfigDict(env_prefix="PLANDIV_", env_file=".env", extra="ignore")

    log_level: str = "INFO"
    log_dir: Optional[str] = None
    api_log_dir: str = "logs"
    workers: int = Field(default=1, ge=1)
    host: str = "0.0.0.0"
    port: int = 8080
    allowed_origins: str = "http://localhost:3000"
    rate_limit: str = "60/minute"
    max_plan_bytes: int = 1024 * 1024

    @property
    def origins(self) -> List[str]:
        return [origin.strip() for origin in self.allowed_origins.split(",") if origin.strip()]


@lru_cache
def get_settings() -> Settings:
    return Settings()


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class RunConfig(BaseModel):
    """Everything one CLI invocation needs, checked before any file is read"""

    domain: Path
    problem: Path
    plans: List[Path] = Field(default_factory=list)
    metrics: List[MetricId] = Field(default_factory=lambda: [MetricId.ACTIONS])
    weights: Optional[Dict[MetricId, float]] = None
    output_format: OutputFormat = OutputFormat.JSON
    select_k: Optional[int] = None
    diversity_mode: DiversityMode = DiversityMode.AVERAGE
    timing: bool = False
    output: Optional[Path] = None
    workers: int = Field(default=1, ge=1)

    @field_validator("metrics", mode="before")
    @classmethod
    def parse_metrics(cls, value):
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        return [MetricId.parse(metric) for metric in value]

    @field_validator("output_format", mode="before")
    @classmethod
    def normalize_format(cls, value):
        return value.lower() if isinstance(value, str) else value

    @field_validator("weights", mode="before")
    @classmethod
    def parse_weight_keys(cls, value):
        if value is None:
            return None
        return {MetricId.parse(metric): weight for metric, weight in value.items()}

    @field_validator("select_k")
    @classmethod
    def check_k(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError("k must be at least 1")
        return value

    @model_validator(mode="after")
    def check_metrics_and_weights(self) -> "RunConfig":
        if not self.metrics:
            raise ValueError("at least one metric is required")
        if len(set(self.metrics)) != len(self.metrics):
            raise ValueError("metrics must not repeat")
        if self.weights is not None:
            extra = [metric.value for metric in self.weights if metric not in self.metrics]
            if extra:
                raise ValueError(f"weights reference metrics that were not requested: {', '.join(extra)}")
            if not all(math.isfinite(weight) for weight in self.weights.values()):
                raise ValueError("weights must be finite")
            if any(weight < 0 for weight in self.weights.values()):
                raise ValueError("weights must be non-negative")
            if sum(self.weights.values()) <= 0:
                raise ValueError("weights must not all be zero")
        return self

    @property
    def aggregate_spec(self) -> Optional[MetricSpec]:
        return MetricSpec.weighted(self.weights) if self.weights else None

    @property
    def selection_spec(self) -> MetricSpec:
        """Aggregate when weights are given, else the first metric"""
        return self.aggregate_spec or MetricSpec.single(self.metrics[0])
