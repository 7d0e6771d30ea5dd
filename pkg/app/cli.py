"""Command-line entry point: `python -m app <subcommand> [--config file] [--set key=value ...]`."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.config import configure_logging, settings
from app.controllers.experiments import ExperimentRunner
from app.models.experiment import ExperimentConfig, ExperimentKind
from app.storage import ResultStore
from app.utils.errors import EXIT_OK, ConfigurationError, WaveError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="waves", description="Traveling waves of the alignment system")
    parser.add_argument("--log-level", default=None, help="overrides WAVES_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in ExperimentKind:
        cmd = sub.add_parser(kind.value)
        cmd.add_argument("--config", type=Path, help="JSON experiment config")
        cmd.add_argument("--out", help="output directory")
        cmd.add_argument("--workers", type=int, help="worker processes for sweeps")
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                         help="override a dotted config key, e.g. solver.grid.N=4000")
        cmd.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    return parser


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(data: Dict[str, Any], assignment: str) -> None:
    """Set data[a][b][c] = value for 'a.b.c=value'; values are JSON where they parse."""
    if "=" not in assignment:
        raise ConfigurationError(f"override '{assignment}' is not KEY=VALUE", {"override": assignment})
    key, _, raw = assignment.partition("=")
    parts = key.strip().split(".")
    node = data
    for part in parts[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[parts[-1]] = _parse_value(raw)


def load_config(kind: str, path: Optional[Path] = None, overrides: Optional[List[str]] = None,
                out: Optional[str] = None, workers: Optional[int] = None,
                seed: Optional[int] = None) -> ExperimentConfig:
    """Defaults, then the JSON file, then --set overrides, then the dedicated flags."""
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read config {path}: {e}", {"config": str(path)}) from e
    for assignment in overrides or []:
        apply_override(data, assignment)
    data["kind"] = kind
    for key, value in (("out", out), ("workers", workers), ("seed", seed)):
        if value is not None:
            data[key] = value
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError("invalid experiment config", {"errors": json.loads(e.json())}) from e


def _report_error(error: WaveError, out: Optional[str]) -> None:
    record = error.to_record()
    print(json.dumps(record, default=str), file=sys.stderr)
    if out:
        try:
            ResultStore(out).open().write_json("error.json", record)
        except (WaveError, OSError) as e:
            logger.warning(f"could not write error.json to {out}: {e}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    out = args.out
    try:
        config = load_config(args.command, args.config, args.overrides, args.out, args.workers, args.seed)
        out = config.out or f"{settings.output_dir}/{config.kind.value}"
        if args.print_config:
            print(config.model_dump_json(indent=2))
            return EXIT_OK
        manifest = ExperimentRunner(config).run()
        logger.info(f"{args.command} finished: {manifest['summary']}")
        return EXIT_OK
    except WaveError as e:
        logger.error(f"{args.command} failed: {e}")
        _report_error(e, out)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
