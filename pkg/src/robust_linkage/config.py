"""
Configuration management for robust-linkage.

This module provides configuration loading from environment variables
and optional JSON configuration files with validation and defaults.
Every algorithm constant that had to be recovered from prose is a knob here.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator

logger = logging.getLogger(__name__)


def _default_threads() -> int:
    return os.cpu_count() or 1


def _default_grid() -> List[float]:
    return [2.0**-e for e in range(8, 1, -1)]


class ClusteringConfig(BaseModel):
    """Clustering, evaluation and I/O settings."""

    # Threshold constants, each multiplied by (alpha + nu) * n and rounded up
    t_init_factor: int = Field(default=6, description="Initial threshold factor")
    f_margin_factor: int = Field(default=2, description="Point-graph overlap margin factor")
    h_margin_factor: int = Field(default=1, description="Singleton common-neighbor margin factor")
    merge_size_factor: int = Field(default=4, description="Minimum merged size factor")

    # Algorithm variants
    merge_order: str = Field(default="best_first", description="Merge order inside a threshold (best_first or component)")
    self_in_neighbors: bool = Field(default=True, description="Count a point as its own nearest neighbor")
    speedup_enabled: bool = Field(default=True, description="Attach leftover singletons to the best non-singleton blob")

    # Inductive settings
    sample_size_constant: float = Field(default=12.0, description="Constant C in the sample size formula")
    insertion_params: str = Field(default="original", description="Noise parameters used for N_S(x) (original or doubled)")

    # Evaluation settings
    sweep_grid: List[float] = Field(default_factory=_default_grid, description="Grid of alpha+nu values tried per run")
    threads: int = Field(default_factory=_default_threads, description="Worker threads for sweeps")

    # Output settings
    float_digits: int = Field(default=17, description="Significant digits written for matrix values")
    format_version: str = Field(default="1", description="File format version")

    # Logging settings
    log_level: str = Field(default="WARNING", description="Logging level")
    log_file: Optional[str] = Field(default=None, description="Log file path (None for stderr only)")

    @field_validator("merge_order")
    @classmethod
    def validate_merge_order(cls, v: str) -> str:
        """Validate merge order."""
        if v not in ["best_first", "component"]:
            raise ValueError("Merge order must be 'best_first' or 'component'")
        return v

    @field_validator("insertion_params")
    @classmethod
    def validate_insertion_params(cls, v: str) -> str:
        """Validate insertion parameter convention."""
        if v not in ["original", "doubled"]:
            raise ValueError("Insertion params must be 'original' or 'doubled'")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of: {valid_levels}")
        return v.upper()

    @field_validator("t_init_factor", "f_margin_factor", "h_margin_factor", "merge_size_factor", "threads", "float_digits")
    @classmethod
    def validate_positive_integers(cls, v: int) -> int:
        """Validate positive integer values."""
        if v <= 0:
            raise ValueError("Value must be positive")
        return v

    @field_validator("sample_size_constant")
    @classmethod
    def validate_sample_size_constant(cls, v: float) -> float:
        """Validate the sample size constant."""
        if v <= 0:
            raise ValueError("Sample size constant must be positive")
        return v

    @field_validator("sweep_grid")
    @classmethod
    def validate_sweep_grid(cls, v: List[float]) -> List[float]:
        """Validate the sweep grid: nonempty, values in (0, 1), sorted ascending."""
        if not v:
            raise ValueError("Sweep grid must not be empty")
        if any(not 0.0 < x < 1.0 for x in v):
            raise ValueError("Sweep grid values must lie in (0, 1)")
        return sorted(v)


class ConfigManager:
    """Configuration manager for robust-linkage."""

    # Environment variable prefix
    ENV_PREFIX = "RHC_"

    # Default configuration file paths
    DEFAULT_CONFIG_PATHS = [
        "robust-linkage.json",
        "config/robust-linkage.json",
        os.path.expanduser("~/.robust-linkage.json"),
    ]

    def __init__(self, config_file: Optional[Union[str, Path]] = None):
        """
        Initialize configuration manager.

        Args:
            config_file: Optional path to configuration file
        """
        self.config_file = Path(config_file) if config_file else None
        self._config: Optional[ClusteringConfig] = None

    def load_config(self) -> ClusteringConfig:
        """
        Load configuration from environment variables and config file.

        Returns:
            ClusteringConfig instance with loaded configuration
        """
        if self._config is not None:
            return self._config

        config_data: Dict[str, Any] = {}

        file_config = self._load_from_file()
        if file_config:
            config_data.update(file_config)

        # Environment wins over the file
        env_config = self._load_from_env()
        config_data.update(env_config)

        self._config = ClusteringConfig(**config_data)
        return self._config

    def _load_from_file(self) -> Dict[str, Any]:
        """
        Load configuration from JSON file.

        Returns:
            Dictionary with configuration data
        """
        config_file = self._find_config_file()
        if not config_file:
            return {}

        try:
            with open(config_file, "r") as f:
                data = json.load(f)

            if not isinstance(data, dict):
                raise ValueError("Configuration file must contain a JSON object")

            return {key: value for key, value in data.items() if not key.startswith("_")}

        except (FileNotFoundError, json.JSONDecodeError, ValueError) as e:
            logger.warning(f"Could not load configuration file {config_file}: {e}")
            return {}

    def _find_config_file(self) -> Optional[Path]:
        """
        Find configuration file to use.

        Returns:
            Path to configuration file or None if not found
        """
        if self.config_file:
            if self.config_file.exists():
                return self.config_file
            else:
                logger.warning(f"Specified config file {self.config_file} not found")
                return None

        for path_str in self.DEFAULT_CONFIG_PATHS:
            path = Path(path_str)
            if path.exists() and path.is_file():
                return path

        return None

    def _load_from_env(self) -> Dict[str, Any]:
        """
        Load configuration from environment variables.

        Returns:
            Dictionary with configuration data from environment
        """
        config: Dict[str, Any] = {}

        env_mappings = {
            f"{self.ENV_PREFIX}THREADS": ("threads", int),
            f"{self.ENV_PREFIX}MERGE_ORDER": "merge_order",
            f"{self.ENV_PREFIX}SELF_IN_NEIGHBORS": ("self_in_neighbors", self._parse_bool),
            f"{self.ENV_PREFIX}SPEEDUP": ("speedup_enabled", self._parse_bool),
            f"{self.ENV_PREFIX}SAMPLE_SIZE_CONSTANT": ("sample_size_constant", float),
            f"{self.ENV_PREFIX}INSERTION_PARAMS": "insertion_params",
            f"{self.ENV_PREFIX}SWEEP_GRID": ("sweep_grid", self._parse_float_list),
            f"{self.ENV_PREFIX}LOG_LEVEL": "log_level",
            f"{self.ENV_PREFIX}LOG_FILE": "log_file",
        }

        for env_var, config_key in env_mappings.items():
            value = os.getenv(env_var)
            if value is not None:
                if isinstance(config_key, tuple):
                    key, converter = config_key
                    try:
                        config[key] = converter(value)
                    except (ValueError, TypeError) as e:
                        logger.warning(f"Invalid value for {env_var}: {value} ({e})")
                else:
                    config[config_key] = value

        return config

    @staticmethod
    def _parse_bool(value: str) -> bool:
        """
        Parse boolean value from string.

        Args:
            value: String value to parse

        Returns:
            Boolean value
        """
        if isinstance(value, bool):
            return value

        if isinstance(value, str):
            return value.lower() in ("true", "1", "yes", "on")

        return bool(value)

    @staticmethod
    def _parse_float_list(value: str) -> List[float]:
        """Parse a comma-separated list of floats."""
        return [float(part) for part in value.split(",") if part.strip()]

    def save_config(self, config: ClusteringConfig, file_path: Optional[Union[str, Path]] = None) -> None:
        """
        Save configuration to JSON file.

        Args:
            config: Configuration to save
            file_path: Optional path to save to (defaults to current config file)
        """
        if file_path:
            target_file = Path(file_path)
        elif self.config_file:
            target_file = self.config_file
        else:
            target_file = Path("robust-linkage.json")

        target_file.parent.mkdir(parents=True, exist_ok=True)

        with open(target_file, "w") as f:
            json.dump(config.model_dump(), f, indent=2, sort_keys=True)

    def get_config(self) -> ClusteringConfig:
        """
        Get current configuration, loading if necessary.

        Returns:
            Current ClusteringConfig instance
        """
        if self._config is None:
            return self.load_config()
        return self._config

    def reload_config(self) -> ClusteringConfig:
        """
        Reload configuration from sources.

        Returns:
            Reloaded ClusteringConfig instance
        """
        self._config = None
        return self.load_config()


def create_example_config() -> str:
    """
    Create an example configuration file content.

    Returns:
        JSON string with example configuration
    """
    config_dict = ClusteringConfig(threads=1).model_dump()

    # JSON has no comments; keys starting with "_" are skipped on load
    example_with_comments = {
        "_comments": {
            "t_init_factor": "Initial threshold is ceil(factor * (alpha+nu) * n) + 1",
            "f_margin_factor": "Points share an F edge when common neighbors >= t - ceil(factor * (alpha+nu) * n)",
            "h_margin_factor": "Singletons connect when common F neighbors > ceil(factor * (alpha+nu) * n)",
            "merge_size_factor": "Merged size must reach ceil(factor * (alpha+nu) * n)",
            "merge_order": "best_first (pairwise, highest normalized median first) or component (whole components)",
            "self_in_neighbors": "Whether a point is its own rank-0 nearest neighbor",
            "speedup_enabled": "Attach leftover singletons to the non-singleton blob of highest median similarity",
            "sample_size_constant": "Constant C in C/eta * ln(1/(delta*eta))",
            "insertion_params": "Size N_S(x) with the original or the doubled noise parameters",
            "sweep_grid": "alpha+nu values tried when sweeping the robust algorithm",
            "threads": "Worker threads for sweeps (RHC_THREADS)",
            "float_digits": "Significant digits written for matrix values",
            "log_level": "Logging level: DEBUG, INFO, WARNING, ERROR, CRITICAL",
            "log_file": "Path to log file (null for stderr only)",
        },
        **config_dict,
    }

    return json.dumps(example_with_comments, indent=2, sort_keys=True)


# Global configuration manager instance
config_manager = ConfigManager()


def get_config() -> ClusteringConfig:
    """
    Get the global configuration instance.

    Returns:
        Current ClusteringConfig instance
    """
    return config_manager.get_config()


def reload_config() -> ClusteringConfig:
    """
    Reload the global configuration.

    Returns:
        Reloaded ClusteringConfig instance
    """
    return config_manager.reload_config()


def configure_logging(config: Optional[ClusteringConfig] = None) -> None:
    """Configure the root logger from the configuration (stderr unless a log file is set)."""
    if config is None:
        config = get_config()
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if config.log_file:
        handlers.append(logging.FileHandler(config.log_file))
    logging.basicConfig(
        level=getattr(logging, config.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )
