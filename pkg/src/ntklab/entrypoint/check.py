"""Check command.

Evaluates the thirteen sample-size and width conditions for a parameter tuple.
"""

import argparse
from pathlib import Path

from ntklab.dependencies import emit
from ntklab.domain.errors import SUCCESS, VERDICT_FAILURE
from ntklab.service_layer.check_service import CheckService
from ntklab.settings.lab_settings import LabSettings


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="feasibility ledger for a parameter tuple")
    parser.add_argument("--config", type=Path, required=True, help="JSON file with n, m, d, epsilon, delta, ...")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: LabSettings) -> int:
    service = CheckService()
    report = service.check(service.load(args.config))
    emit(report)
    return SUCCESS if report.all_hold else VERDICT_FAILURE
