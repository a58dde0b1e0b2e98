"""
Command-line entry point of ntklab.
"""

import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

from ntklab.domain.errors import exit_code_for
from ntklab.router import get_parser
from ntklab.settings.lab_settings import LabSettings

log = logging.getLogger(__name__)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run the sub-command and return its exit code."""
    # Load environment variables from .env file
    load_dotenv()

    try:
        args = get_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        settings = LabSettings()
        logging.basicConfig(
            level=(args.log_level or settings.LOG_LEVEL).upper(),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        return args.handler(args, settings)
    except (ValueError, OSError) as exc:
        log.error("%s failed: %s", args.command, exc)
        return exit_code_for(exc)


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
