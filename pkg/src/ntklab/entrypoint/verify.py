"""Verify command.

Runs one or all verification suites over a set of seeds and writes one JSON report per suite.
"""

import argparse
from pathlib import Path

from ntklab.adapters.storage import read_config
from ntklab.dependencies import add_output_arguments, emit, get_store
from ntklab.domain.errors import SUCCESS, VERDICT_FAILURE
from ntklab.domain.models.enums import SuiteName
from ntklab.domain.schemas.config import SeedsSpec
from ntklab.domain.schemas.report import VerifySummary
from ntklab.domain.schemas.suites import VerifyConfig
from ntklab.service_layer.verify_service import VerifyService
from ntklab.settings.lab_settings import LabSettings
from ntklab.settings.suite_settings import SuiteSettings

ALL = "all"


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="seed-frequency verification suites")
    parser.add_argument("--suite", choices=[ALL] + [suite.value for suite in SuiteName], default=ALL)
    parser.add_argument("--seeds", type=int, default=None, help="number of seeds, counted from the base seed")
    parser.add_argument("--jobs", type=int, default=None, help="seeds run concurrently")
    parser.add_argument("--config", type=Path, default=None, help="JSON verify config; suite defaults otherwise")
    add_output_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: LabSettings) -> int:
    """Exit 0 iff every requested suite reaches its verdict."""
    config = read_config(args.config, VerifyConfig) if args.config is not None else VerifyConfig()
    if args.seeds is not None:
        if args.seeds < 1:
            raise ValueError(f"--seeds must be positive, got {args.seeds}")
        config = config.model_copy(update={"seeds": SeedsSpec(base=config.seeds.base, count=args.seeds)})
    service = VerifyService(settings, SuiteSettings(), jobs=args.jobs or config.jobs)
    seeds = service.seeds_for(config.seeds)
    config = config.model_copy(update={"seeds": SeedsSpec(values=seeds)})
    suites = list(SuiteName) if args.suite == ALL else [SuiteName(args.suite)]
    suites = [suite for suite in suites if args.suite != ALL or suite in config.suites]

    reports = service.run(config, suites)
    store = get_store(args, settings, "verify", config.io)
    for report in reports:
        store.write_model(f"{report.suite}.json", report)
    store.write_manifest("verify", config.model_dump() | {"run": [report.suite for report in reports]}, seeds)

    emit(
        VerifySummary(
            seeds=seeds,
            verdicts={report.suite: report.verdict for report in reports},
            frequencies={report.suite: report.frequency for report in reports},
        )
    )
    return SUCCESS if all(report.verdict for report in reports) else VERDICT_FAILURE
