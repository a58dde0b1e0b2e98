"""
Suite settings
"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class SuiteSettings(BaseSettings):
    """Default seed-frequency thresholds of the verification suites.

    A high-probability event is asserted as the fraction of seeds on which it holds. These are configured values;
    a suite config may override any of them.

    Environment variables:
        * NTKLAB_SUITE_EVENTS_THRESHOLD
        * NTKLAB_SUITE_KERNEL_THRESHOLD
        * NTKLAB_SUITE_OVERFIT_RISK_THRESHOLD
        * NTKLAB_SUITE_OVERFIT_ENVELOPE_THRESHOLD
        * NTKLAB_SUITE_MOVEMENT_THRESHOLD
        * NTKLAB_SUITE_DRIFT_THRESHOLD
        * NTKLAB_SUITE_APPROX_THRESHOLD
        * NTKLAB_SUITE_BENIGN_THRESHOLD
        * NTKLAB_SUITE_STDERR_FACTOR
    """

    EVENTS_THRESHOLD: float = Field(default=0.95, ge=0.0, le=1.0)
    KERNEL_THRESHOLD: float = Field(default=0.9, ge=0.0, le=1.0)
    OVERFIT_RISK_THRESHOLD: float = Field(default=0.9, ge=0.0, le=1.0)
    OVERFIT_ENVELOPE_THRESHOLD: float = Field(default=0.8, ge=0.0, le=1.0)
    MOVEMENT_THRESHOLD: float = Field(default=0.9, ge=0.0, le=1.0)
    DRIFT_THRESHOLD: float = Field(default=0.9, ge=0.0, le=1.0)
    APPROX_THRESHOLD: float = Field(default=0.9, ge=0.0, le=1.0)
    BENIGN_THRESHOLD: float = Field(default=0.8, ge=0.0, le=1.0)
    STDERR_FACTOR: float = Field(default=3.0, gt=0.0)

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_prefix="NTKLAB_SUITE_",
    )
