"""`osmon <stage> --config <path>`: run pipeline stages from one declarative config file."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .affiliations import GazetteerError
from .apc import APCTableError
from .config import ConfigError, load_config, validate_config
from .disciplines import TaxonomyError
from .ingest import IngestError
from .oa import RegistryError, SnapshotError
from .pipeline import STAGES, StageDependencyError, run_stage
from .report import ReportInputError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
DATA_ERRORS = (IngestError, SnapshotError, RegistryError, APCTableError, GazetteerError, TaxonomyError)

logger = logging.getLogger("osmon")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="osmon", description=__doc__)
    p.add_argument("stage", choices=[*STAGES, "all", "validate"])
    p.add_argument("--config", required=True, type=Path, help="pipeline YAML config")
    p.add_argument("--output-dir", type=Path)
    p.add_argument("--gazetteer", type=Path, help="affiliation gazetteer CSV (kind,alias,country,weight)")
    p.add_argument("--taxonomy", type=Path, help="discipline taxonomy CSV")
    p.add_argument("--apc-min-group", type=int, help="minimum journal-year group size for APC averages")
    p.add_argument("--threshold", type=float, help="mention probability threshold in (0, 1)")
    p.add_argument("--funnel-denominator", choices=["or", "and"])
    p.add_argument("--format", default="json,csv", help="report formats, comma separated (json,csv)")
    p.add_argument("--strict", action="store_true", help="exit 2 when any line was rejected")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _overrides(args: argparse.Namespace) -> dict:
    def absolute(p: Optional[Path]) -> Optional[str]:
        return str(p.resolve()) if p is not None else None

    return {
        "output_dir": absolute(args.output_dir),
        "gazetteer": absolute(args.gazetteer),
        "taxonomy": absolute(args.taxonomy),
        "apc_min_group": args.apc_min_group,
        "mentions_threshold": args.threshold,
        "funnel_denominator": args.funnel_denominator,
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    overrides = _overrides(args)

    if args.stage == "validate":
        errors = validate_config(args.config, overrides)
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        if not errors:
            print("ok")
        return EXIT_USAGE if errors else EXIT_OK

    try:
        cfg = load_config(args.config, overrides)
        results = run_stage(args.stage, cfg, tuple(f.strip() for f in args.format.split(",") if f.strip()))
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (StageDependencyError, ReportInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    rejects = 0
    for r in results:
        print(f"{r.stage}: {r.outputs} outputs, {r.rejects} rejects", file=sys.stderr)
        rejects += r.rejects
    if args.strict and rejects:
        print(f"data error: {rejects} rejected lines (--strict)", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
