"""Service evaluating the feasibility ledger for a parameter tuple read from a config file."""

import logging
from pathlib import Path

from ntklab.adapters.storage import read_config
from ntklab.domain.models.assumptions import AssumptionReport, ParamTuple, check

log = logging.getLogger(__name__)


class CheckService:
    """Application service for the assumption ledger."""

    def load(self, path: Path) -> ParamTuple:
        return read_config(path, ParamTuple)

    def check(self, params: ParamTuple) -> AssumptionReport:
        report = check(params)
        if report.C_source == "default":
            log.info("Condition (ii) uses the default absolute constant C=%s", report.C)
        failing = [key for key in report.binding if not report.verdicts[key]]
        if failing:
            log.info("Failing conditions, most binding first: %s", ", ".join(failing))
        return report
