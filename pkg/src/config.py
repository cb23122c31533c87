import os
from pydantic_settings import BaseSettings, SettingsConfigDict

# просто логика выбора env файла
DEFAULT_ENV_FILE = os.environ.get("ENV_FILE", ".env")

__version__ = "0.1.0"


class NumericsConfig(BaseSettings):
    default_method: str = "circulant"
    # число узлов Гаусса-Лежандра на панель
    quadrature_points: int = 64
    max_quadrature_doublings: int = 6
    quadrature_tolerance: float = 1e-10
    # допуски на отрицательные собственные числа / дисперсии (округление)
    eigen_tolerance: float = 1e-10
    variance_tolerance: float = 1e-12
    besov_block_rows: int = 256
    certificate_slack: float = 1e-8
    # узлы сетки s, t с t - s <= grid_gap_tolerance * t считаются совпадающими
    grid_gap_tolerance: float = 1e-9

    model_config = SettingsConfigDict(
        env_file=DEFAULT_ENV_FILE,
        env_prefix="NUM_",
        env_file_encoding="utf-8",
        extra="allow"
    )


class ExperimentDefaults(BaseSettings):
    batches: int = 20
    chunk_size: int = 250
    epsilon: float = 0.05
    # N_ref / max(n) для эталона на мелкой сетке
    reference_ratio: int = 64
    max_stderr_fraction: float = 0.5

    model_config = SettingsConfigDict(
        env_file=DEFAULT_ENV_FILE,
        env_prefix="EXP_",
        env_file_encoding="utf-8",
        extra="allow"
    )


class LoggingConfig(BaseSettings):
    debug: bool = False
    cmd_convert_revert: bool = False
    log_dir: str = ""
    file_logging: bool = True

    model_config = SettingsConfigDict(
        env_file=DEFAULT_ENV_FILE,
        env_prefix="LOG_",
        env_file_encoding="utf-8",
        extra="allow"
    )


class StorageConfig(BaseSettings):
    enabled: bool = True
    url: str = "sqlite:///fbm_runs.sqlite3"

    model_config = SettingsConfigDict(
        env_file=DEFAULT_ENV_FILE,
        env_prefix="STORAGE_",
        env_file_encoding="utf-8",
        extra="allow"
    )


class Config(BaseSettings):
    numerics: NumericsConfig = NumericsConfig()
    experiment: ExperimentDefaults = ExperimentDefaults()
    logging: LoggingConfig = LoggingConfig()
    storage: StorageConfig = StorageConfig()

    @classmethod
    def load(cls) -> "Config":
        return cls()


settings = Config.load()
