"""Dependency functions for the command line."""

import argparse
import sys
from pathlib import Path
from typing import Optional

from pydantic import BaseModel

from ntklab.adapters.storage import ArtifactStore, dump_json
from ntklab.domain.schemas.config import IoSpec
from ntklab.settings.lab_settings import LabSettings


def add_output_arguments(parser: argparse.ArgumentParser) -> None:
    """``--out-dir`` and ``--overwrite``, shared by every command that writes artifacts."""
    parser.add_argument("--out-dir", type=Path, default=None, help="artifact directory")
    parser.add_argument("--overwrite", action="store_true", default=None, help="replace existing artifacts")


def get_store(
    args: argparse.Namespace, settings: LabSettings, command: str, io: Optional[IoSpec] = None
) -> ArtifactStore:
    """Get the artifact store: flag, then config ``io`` block, then ``NTKLAB_OUT_DIR/<command>``."""
    io = io or IoSpec()
    out_dir = args.out_dir or io.out_dir or settings.OUT_DIR / command
    overwrite = args.overwrite if args.overwrite is not None else io.overwrite
    return ArtifactStore(out_dir, overwrite=overwrite)


def emit(model: BaseModel) -> None:
    """Write a response model as JSON to stdout."""
    sys.stdout.write(dump_json(model))
