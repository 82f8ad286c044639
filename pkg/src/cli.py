"""spde-lab console script.

Exit codes: 0 success, 1 runtime failure (or a tuple that is not admissible
for ``regime check``), 2 invalid config or arguments.
"""
import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from src.conf.config import settings
from src.schemas import ExperimentConfig, ExperimentKind, OutputFormat
from src.services.errors import ConfigurationError, LabError
from src.services.experiments import run_experiment, run_record
from src.services.reports import Artifact, render_csv, render_json, render_markdown, write_artifacts

logger = logging.getLogger("src.cli")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

CONFIG_COMMANDS = {
    "simulate": ExperimentKind.simulate,
    "couple": ExperimentKind.couple,
    "galerkin": ExperimentKind.galerkin,
    "continuous-dependence": ExperimentKind.continuous_dependence,
}


class ConfigFileError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--seed", type=int, help="overrides every seed of the config")
    common.add_argument("--out", type=Path, help=f"artifact directory (default {settings.out_dir})")
    common.add_argument("--format", dest="formats", action="append", choices=[f.value for f in OutputFormat],
                        help="artifact format, repeatable (default: the config's formats)")
    common.add_argument("--record", action="store_true", help="store the run in the ledger database")
    common.add_argument("--log-level", default=None, help=f"logging level (default {settings.log_level})")
    return common


def _tuple_arguments(parser: argparse.ArgumentParser, with_rho: bool):
    parser.add_argument("--class", dest="example_class", help="default fractional_heat")
    parser.add_argument("--d", type=int)
    parser.add_argument("--gamma")
    parser.add_argument("--theta")
    parser.add_argument("--mu")
    parser.add_argument("--nu")
    if with_rho:
        parser.add_argument("--rho")
    parser.add_argument("--bounded", dest="drift_bounded", action="store_true", default=None)
    parser.add_argument("--p")
    parser.add_argument("--r")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="spde-lab", description="Uniqueness regimes and spectral numerics "
                                                                   "for SPDEs with Hölder drift")
    commands = parser.add_subparsers(dest="command", required=True)

    regime = commands.add_parser("regime", help="exact admissibility").add_subparsers(dest="action", required=True)
    _tuple_arguments(regime.add_parser("check", parents=[common]), with_rho=True)
    _tuple_arguments(regime.add_parser("rho-interval", parents=[common]), with_rho=False)
    table = regime.add_parser("table", parents=[common])
    table.add_argument("--class", dest="example_class")
    table.add_argument("--scenario")
    table.add_argument("--offset", help=f"positive rational p/q (default {settings.table_offset})")

    for name in CONFIG_COMMANDS:
        commands.add_parser(name, parents=[common])

    kolmogorov = commands.add_parser("kolmogorov").add_subparsers(dest="action", required=True)
    kolmogorov.add_parser("solve", parents=[common])
    kolmogorov.add_parser("monitor", parents=[common])

    demo = commands.add_parser("demo").add_subparsers(dest="action", required=True)
    nonuniqueness = demo.add_parser("nonuniqueness", parents=[common])
    nonuniqueness.add_argument("--theta", type=float)
    nonuniqueness.add_argument("--T", type=float)
    nonuniqueness.add_argument("--points", type=int)
    nonuniqueness.add_argument("--delay", dest="delays", type=float, action="append")

    commands.add_parser("run", parents=[common], help="run any experiment config file")
    return parser


def load_config_file(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigFileError(f"{path}: {err.strerror}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigFileError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}")
    if not isinstance(data, dict):
        raise ConfigFileError(f"{path}: the top level must be an object")
    return data


def _experiment(kind: ExperimentKind, args: argparse.Namespace, overrides: Optional[dict] = None) -> ExperimentConfig:
    data = load_config_file(args.config) if args.config else {}
    if "kind" not in data:
        data = {"kind": kind.value, kind.value: data}
    elif data["kind"] != kind.value:
        raise ConfigFileError(f"{args.config}: kind {data['kind']!r} given to the {kind.value} command")
    if overrides:
        data[kind.value] = {**data.get(kind.value, {}), **overrides}
    return ExperimentConfig(**data)


def experiment_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """
    The experiment_from_args function turns the parsed command line into a validated config:
    flags of the regime and demo commands, or the --config file for every other command.

    :param args: argparse.Namespace: parsed arguments
    :return: ExperimentConfig
    """
    if args.command == "run":
        if not args.config:
            raise ConfigFileError("run needs --config")
        return ExperimentConfig(**load_config_file(args.config))
    if args.command == "regime":
        kind = {"check": ExperimentKind.regime_check, "rho-interval": ExperimentKind.rho_interval,
                "table": ExperimentKind.regime_table}[args.action]
        if args.action == "table":
            names = ["example_class", "scenario", "offset"]
        else:
            names = ["d", "gamma", "theta", "mu", "nu", "drift_bounded", "example_class", "p", "r"]
            if args.action == "check":
                names.append("rho")
        flags = {name: getattr(args, name) for name in names if getattr(args, name) is not None}
        return _experiment(kind, args, flags)
    if args.command == "kolmogorov":
        kind = ExperimentKind.kolmogorov if args.action == "solve" else ExperimentKind.monitor
        return _experiment(kind, args)
    if args.command == "demo":
        flags = {name: getattr(args, name) for name in ("theta", "T", "points", "delays")
                 if getattr(args, name) is not None}
        return _experiment(ExperimentKind.demo, args, flags)
    return _experiment(CONFIG_COMMANDS[args.command], args)


def record(artifact: Artifact, config: ExperimentConfig) -> int:
    from src.database.db import DBSession
    from src.repository import runs as repository_runs

    db = DBSession()
    try:
        run = asyncio.run(repository_runs.create(run_record(artifact, config.section.dict()), db))
        return run.id
    finally:
        db.close()


def _emit(artifact: Artifact, config: ExperimentConfig, args: argparse.Namespace):
    formats = args.formats or [f.value for f in config.formats]
    out_dir = args.out or config.out_dir or settings.out_dir
    for path in write_artifacts(artifact, out_dir, formats):
        print(path, file=sys.stderr)
    if config.kind is ExperimentKind.regime_check:
        print(json.dumps(artifact.payload()["summary"]["verdict"], indent=2, ensure_ascii=False))
    elif config.kind is ExperimentKind.regime_table and args.formats and len(args.formats) == 1:
        table = artifact.tables["table"]
        renderers = {"csv": lambda: render_csv(table), "json": lambda: render_json(artifact),
                     "markdown": lambda: render_markdown(artifact)}
        print(renderers[args.formats[0]]())
    else:
        print(artifact.checksum)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=(args.log_level or settings.log_level).upper(), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = experiment_from_args(args)
    except ValidationError as err:
        for error in err.errors():
            print(f"config error at {'.'.join(str(p) for p in error['loc'])}: {error['msg']}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigFileError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        artifact = run_experiment(config, args.seed)
    except ConfigurationError as err:
        print(f"ConfigurationError: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except LabError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME

    _emit(artifact, config, args)
    if args.record:
        logger.info("recorded run %d", record(artifact, config))
    if config.kind is ExperimentKind.regime_check and not artifact.summary["admissible"]:
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
