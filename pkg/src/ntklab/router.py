"""Application configuration - root argument parser.

Defines all command-line sub-commands.

Resources:
    1. https://docs.python.org/3/library/argparse.html#sub-commands
"""

import argparse

from ntklab.entrypoint import check, data, spectrum, train, verify
from ntklab.version import __version__


def get_parser() -> argparse.ArgumentParser:
    """Root parser with one sub-command per entrypoint module."""
    parser = argparse.ArgumentParser(prog="ntklab", description="Numerical laboratory for two-layer ReLU networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides NTKLAB_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)

    data.register(subparsers)
    spectrum.register(subparsers)
    check.register(subparsers)
    train.register(subparsers)
    verify.register(subparsers)
    return parser
