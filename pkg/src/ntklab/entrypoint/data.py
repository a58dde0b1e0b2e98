"""Data command.

Samples a labeled dataset on the sphere and, on request, its Gram matrix.
"""

import argparse
from pathlib import Path

from ntklab.adapters.storage import read_config
from ntklab.dependencies import add_output_arguments, get_store
from ntklab.domain.errors import SUCCESS
from ntklab.domain.schemas.config import DataConfig
from ntklab.service_layer.data_service import DataService
from ntklab.settings.lab_settings import LabSettings


def register(subparsers) -> None:
    parser = subparsers.add_parser("data", help="sample a dataset")
    parser.add_argument("--config", type=Path, required=True, help="JSON data config")
    add_output_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: LabSettings) -> int:
    service = DataService(settings)
    config = service.effective_config(read_config(args.config, DataConfig))
    service.write(config, get_store(args, settings, "data", config.io))
    return SUCCESS
