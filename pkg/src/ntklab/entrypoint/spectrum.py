"""Spectrum command.

Prints the NTK eigenvalue table for one dimension, optionally cross-checked against quadrature.
"""

import argparse

from ntklab.dependencies import emit
from ntklab.domain.errors import SUCCESS, VERDICT_FAILURE
from ntklab.service_layer.spectrum_service import SpectrumService
from ntklab.settings.lab_settings import LabSettings


def register(subparsers) -> None:
    parser = subparsers.add_parser("spectrum", help="NTK eigenvalues, multiplicities and index ranges")
    parser.add_argument("--d", type=int, required=True, help="ambient dimension (>= 3)")
    parser.add_argument("--h-max", type=int, default=6, help="largest harmonic order")
    parser.add_argument("--oracle", action="store_true", help="compare closed forms with numerical quadrature")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: LabSettings) -> int:
    """Exit 1 when the quadrature oracle disagrees with the closed forms."""
    response = SpectrumService(settings).table(args.d, args.h_max, oracle=args.oracle)
    emit(response)
    if response.oracle_passed is False:
        return VERDICT_FAILURE
    return SUCCESS
