"""
Laboratory settings
"""

from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class LabSettings(BaseSettings):
    """Define the laboratory's process-wide configuration.

    Constructor will attempt to determine the values of any fields not passed
    as keyword arguments by reading from the environment. Default values will
    still be used if the matching environment variable is not set.

    Environment variables:
        * NTKLAB_SEED
        * NTKLAB_JOBS
        * NTKLAB_LOG_LEVEL
        * NTKLAB_OUT_DIR
        * NTKLAB_GRAM_CAP
        * NTKLAB_EVENTS_N_CAP
        * NTKLAB_EVENTS_M_CAP
        * NTKLAB_ORACLE_TOLERANCE

    Attributes:
        SEED (int | None): Base seed used when a config omits one.
        JOBS (int): Default number of seeds run concurrently by ``verify``.
        LOG_LEVEL (str): Root logging level.
        OUT_DIR (Path): Default directory for artifacts.
        GRAM_CAP (int): Largest point count for dense Gram matrices and eigen-solves.
        EVENTS_N_CAP (int): Largest sample size accepted by the events suite.
        EVENTS_M_CAP (int): Largest width accepted by the events suite.
        ORACLE_TOLERANCE (float): Relative mismatch above which ``spectrum --oracle`` fails.

    Resources:
        1. https://docs.pydantic.dev/latest/usage/pydantic_settings/
    """

    SEED: Optional[int] = Field(default=None, ge=0)
    JOBS: int = Field(default=1, ge=1)
    LOG_LEVEL: str = "INFO"
    OUT_DIR: Path = Path("runs")
    GRAM_CAP: int = Field(default=4096, ge=1)
    EVENTS_N_CAP: int = Field(default=2048, ge=1)
    EVENTS_M_CAP: int = Field(default=65536, ge=2)
    ORACLE_TOLERANCE: float = Field(default=1e-6, gt=0.0)

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_prefix="NTKLAB_",
    )
