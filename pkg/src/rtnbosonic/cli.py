"""Command line: ``rtnbosonic <scenario> --config cfg.toml --out out.csv [--workers N] [--seed S]``.

Exit codes: 0 ok, 1 configuration error, 2 validation failure, 3 truncation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from .config import SCENARIOS, load_config
from .errors import ConfigError, GridTooSmall, TruncationWarning
from .scenarios import default_workers, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_TRUNCATION = 0, 1, 2, 3

log = logging.getLogger("rtnbosonic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtnbosonic", description=__doc__.splitlines()[0])
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", type=Path, required=True, help="TOML scenario file")
    parser.add_argument("--out", type=Path, required=True, help="CSV output path")
    parser.add_argument("--workers", type=int, default=default_workers(),
                        help="worker processes (default: CPU count)")
    parser.add_argument("--seed", type=int, default=None, help="overrides the seed in the config file")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.workers < 1:
        log.error("--workers must be >= 1")
        return EXIT_CONFIG
    if args.seed is not None and args.seed < 0:
        log.error("--seed must be non-negative")
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.scenario, args.seed)
        with warnings.catch_warnings():
            warnings.simplefilter("error", TruncationWarning)
            table = run_scenario(cfg, args.workers)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (TruncationWarning, GridTooSmall) as exc:
        log.error("truncation error: %s", exc)
        return EXIT_TRUNCATION
    except ValueError as exc:
        # parameter combinations the schema cannot see (e.g. a code too large for d)
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    table.write(args.out)
    log.info("wrote %d rows to %s", len(table.rows), args.out)
    if not table.passed:
        log.error("validation failed")
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
