import argparse
import asyncio
import json
import logging
import pathlib
import sys

import yaml

from ..core.classes import SweepConfig, structureSweepConfig
from ..core.errors import SubspaceGapError
from ..core.synth import generateTwoClusterSphere, trialSeedFor
from ..core.threading import getWorkerCount, runInThread
from . import registeredNames
from . import verify  # noqa: F401
from .fig1 import runFig1
from .records import writeJSON, writePointCloudCSV
from .sweep import (
    averageAffinities,
    calibrateDelta,
    runSweep,
    writeAverageAffinities,
    writeSweepOutputs,
)
from .verify import runVerify

logger = logging.getLogger(__name__)

if hasattr(logging, "getLevelNamesMapping"):
    levelNamesMapping = logging.getLevelNamesMapping()
else:
    # Python < 3.11
    levelNamesMapping = {
        "CRITICAL": 50,
        "FATAL": 50,
        "ERROR": 40,
        "WARN": 30,
        "WARNING": 30,
        "INFO": 20,
        "DEBUG": 10,
        "NOTSET": 0,
    }

sortedlevelNames = [
    name for name, value in sorted(levelNamesMapping.items(), key=lambda item: item[1])
]

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2


def yaml_or_json(path):
    path = pathlib.Path(path)
    if not path.is_file():
        raise argparse.ArgumentTypeError(f"File not found: {str(path)!r}")
    path = path.resolve()
    contents = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return json.loads(contents), path
    else:
        return yaml.safe_load(contents) or {}, path


def substitute_key_value(keyValue):
    if ":" not in keyValue:
        raise argparse.ArgumentTypeError(f"expected key:value, got {keyValue!r}")
    key, value = keyValue.split(":", 1)
    return (key, value)


def float_list(text):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def loadConfig(args) -> SweepConfig:
    rawConfig = {}
    if args.config is not None:
        rawConfig, _ = args.config
        rawConfig = dict(rawConfig)
    if args.substitute:
        rawConfig.update({k: yaml.safe_load(v) for k, v in args.substitute})
    return structureSweepConfig(rawConfig)


def addCommonArguments(parser, withConfig=True):
    parser.add_argument(
        "--logging-level",
        choices=sortedlevelNames,
        default="WARNING",
        help="The logging level for stdout output",
    )
    parser.add_argument(
        "--log-file",
        type=argparse.FileType("w"),
        help="A path for a log file that captures the run's log activity",
    )
    parser.add_argument(
        "--log-file-logging-level",
        choices=sortedlevelNames,
        default="WARNING",
        help="The logging level for the log file",
    )
    parser.add_argument(
        "--workers",
        type=int,
        help="Number of worker processes. Defaults to the SUBSPACEGAP_WORKERS "
        "environment variable, or the number of CPUs",
    )
    if withConfig:
        parser.add_argument(
            "--config",
            type=yaml_or_json,
            help="A YAML or JSON file with the sweep configuration",
        )
        parser.add_argument(
            "--substitute",
            action="append",
            type=substitute_key_value,
            help="Override a configuration key with a key:value pair",
        )


def setupLogging(args) -> None:
    rootLogger = logging.getLogger()
    rootLogger.setLevel(logging.NOTSET)
    rootLogger.handlers.clear()
    stdoutHandler = logging.StreamHandler(sys.stdout)
    stdoutHandler.setLevel(levelNamesMapping[args.logging_level])
    stdoutHandler.setFormatter(
        logging.Formatter(
            "%(asctime)s %(name)-17s %(levelname)-8s %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
    )
    rootLogger.addHandler(stdoutHandler)

    if args.log_file is not None:
        logFileHandler = logging.StreamHandler(args.log_file)
        logFileHandler.setLevel(levelNamesMapping[args.log_file_logging_level])
        logFileHandler.setFormatter(
            logging.Formatter(
                "%(asctime)s %(levelname)-8s %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
            )
        )
        rootLogger.addHandler(logFileHandler)


async def sweepCommand(args) -> int:
    config = loadConfig(args)
    records = await runSweep(
        config, workers=getWorkerCount(args.workers), timing=args.timing
    )
    writeSweepOutputs(records, config, args.out)
    return EXIT_OK


async def fig1Command(args) -> int:
    await runInThread(
        runFig1, args.gaps, args.lam, args.out, args.points_per_set, args.arc_span
    )
    return EXIT_OK


async def verifyCommand(args) -> int:
    suites = registeredNames("suite") if args.suite == "all" else [args.suite]
    reports = await runInThread(runVerify, suites, args.count, args.seed)
    for report in reports:
        status = "ok" if report.ok else f"{len(report.violations)} violation(s)"
        print(f"{report.suite}: {report.checks} checks, {status}")
    if args.out is not None:
        writeJSON(reports, args.out)
    return EXIT_OK if all(report.ok for report in reports) else EXIT_VIOLATIONS


async def calibrateCommand(args) -> int:
    config = loadConfig(args)
    reports = await calibrateDelta(
        config, deltaGrid=args.deltas, workers=getWorkerCount(args.workers)
    )
    for report in reports:
        print(
            f"{report.selector}: delta {report.delta:g} "
            f"(precision {report.precision:.3f}, recall {report.recall:.3f})"
        )
    args.out.mkdir(parents=True, exist_ok=True)
    writeJSON(reports, args.out / "calibration.json")
    return EXIT_OK


async def affinitiesCommand(args) -> int:
    config = loadConfig(args)
    averages = await averageAffinities(
        config, workers=getWorkerCount(args.workers), sigma=args.sigma
    )
    writeAverageAffinities(averages, args.out)
    return EXIT_OK


async def exportCommand(args) -> int:
    config = loadConfig(args)
    cloud = generateTwoClusterSphere(
        config,
        args.angle,
        args.sigma,
        trialSeedFor(config.seed, args.angle, args.sigma, args.trial),
    )
    writePointCloudCSV(cloud, args.out)
    return EXIT_OK


def buildParser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subspacegap")
    subParsers = parser.add_subparsers(dest="command", required=True)

    sweepParser = subParsers.add_parser(
        "sweep", help="Connectivity between two clusters over the angle grid"
    )
    addCommonArguments(sweepParser)
    sweepParser.add_argument("--out", type=pathlib.Path, required=True)
    sweepParser.add_argument(
        "--timing",
        action="store_true",
        help="Measure wall time per record (otherwise written as 0)",
    )
    sweepParser.set_defaults(run=sweepCommand)

    fig1Parser = subParsers.add_parser(
        "fig1", help="Affinity heatmaps of two planar arcs at several gaps"
    )
    addCommonArguments(fig1Parser, withConfig=False)
    fig1Parser.add_argument("--gaps", type=float_list, default=[2.0, 4.0, 10.0, 20.0])
    fig1Parser.add_argument("--lambda", dest="lam", type=float, default=0.01)
    fig1Parser.add_argument("--points-per-set", type=int, default=5)
    fig1Parser.add_argument("--arc-span", type=float, default=30.0)
    fig1Parser.add_argument("--out", type=pathlib.Path, required=True)
    fig1Parser.set_defaults(run=fig1Command)

    verifyParser = subParsers.add_parser("verify", help="Run a verification suite")
    addCommonArguments(verifyParser, withConfig=False)
    verifyParser.add_argument(
        "--suite", choices=registeredNames("suite") + ["all"], required=True
    )
    verifyParser.add_argument("--count", type=int)
    verifyParser.add_argument("--seed", type=int, default=0)
    verifyParser.add_argument(
        "--out", type=pathlib.Path, help="A path for the JSON report"
    )
    verifyParser.set_defaults(run=verifyCommand)

    calibrateParser = subParsers.add_parser(
        "calibrate-delta", help="Choose the selectors' delta on pilot data"
    )
    addCommonArguments(calibrateParser)
    calibrateParser.add_argument("--deltas", type=float_list)
    calibrateParser.add_argument("--out", type=pathlib.Path, default=pathlib.Path())
    calibrateParser.set_defaults(run=calibrateCommand)

    affinitiesParser = subParsers.add_parser(
        "affinities", help="Heatmaps of trial-averaged affinity matrices"
    )
    addCommonArguments(affinitiesParser)
    affinitiesParser.add_argument("--sigma", type=float)
    affinitiesParser.add_argument("--out", type=pathlib.Path, required=True)
    affinitiesParser.set_defaults(run=affinitiesCommand)

    exportParser = subParsers.add_parser(
        "export-data", help="Write one generated point cloud as CSV"
    )
    addCommonArguments(exportParser)
    exportParser.add_argument("--angle", type=float, required=True)
    exportParser.add_argument("--sigma", type=float, default=0.0)
    exportParser.add_argument("--trial", type=int, default=0)
    exportParser.add_argument("--out", type=pathlib.Path, required=True)
    exportParser.set_defaults(run=exportCommand)

    return parser


async def mainAsync(argv=None) -> int:
    args = buildParser().parse_args(argv)
    setupLogging(args)
    try:
        return await args.run(args)
    except SubspaceGapError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE


def main(argv=None):
    sys.exit(asyncio.run(mainAsync(argv)))


if __name__ == "__main__":
    main()
