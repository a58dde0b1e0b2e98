"""Seed resolution: explicit value, then ``NTKLAB_SEED``, then 0."""

import logging
from typing import Optional

from ntklab.settings.lab_settings import LabSettings

log = logging.getLogger(__name__)


def resolve_seed(explicit: Optional[int], settings: LabSettings) -> int:
    if explicit is not None:
        return explicit
    if settings.SEED is not None:
        log.info("Using base seed %s from NTKLAB_SEED", settings.SEED)
        return settings.SEED
    log.warning("No seed configured and NTKLAB_SEED is unset; falling back to seed 0")
    return 0
