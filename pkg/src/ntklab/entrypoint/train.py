"""Train command.

Runs gradient descent (empirical, population or both chains) and writes the trajectory, the final checkpoint and
the effective config.
"""

import argparse
from pathlib import Path

from ntklab.adapters.storage import read_config
from ntklab.dependencies import add_output_arguments, emit, get_store
from ntklab.domain.errors import SUCCESS
from ntklab.domain.models.enums import FlowMode
from ntklab.domain.schemas.config import TrainConfig
from ntklab.service_layer.train_service import TrainService
from ntklab.settings.lab_settings import LabSettings


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="gradient-descent run")
    parser.add_argument("--config", type=Path, required=True, help="JSON training config")
    parser.add_argument("--mode", choices=[mode.value for mode in FlowMode], default=None, help="overrides config")
    parser.add_argument("--seed", type=int, default=None, help="overrides config and NTKLAB_SEED")
    add_output_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: LabSettings) -> int:
    config = read_config(args.config, TrainConfig)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    service = TrainService(settings)
    config = service.effective_config(config, args.mode)
    result = service.run(config)
    service.write(result, get_store(args, settings, "train", config.io))
    emit(result.trajectory.final)
    return SUCCESS
