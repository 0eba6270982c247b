from __future__ import annotations

import asyncio
import logging
import math
import os
import pathlib
import time
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..core.classes import (
    ConnectivityRecord,
    Estimator,
    SelectorMethod,
    SolverSettings,
    SweepConfig,
)
from ..core.errors import ConfigError, SubspaceGapError
from ..core.graph import buildAffinity, clusteringError, connectivityXi, spectralCluster
from ..core.selective import selectiveDantzigExtend, subspaceSelectorExtend
from ..core.solvers import codePointCloud
from ..core.synth import (
    generateTwoClusterSphere,
    trialSeedFor,
    withDistractorCluster,
)
from ..core.threading import runInWorker
from . import getMethodClass, methods  # noqa: F401
from .methods import CodingContext
from .records import writeJSON, writeRecordsCSV, writeSVG
from .svg import Series, heatmap, lineChart

logger = logging.getLogger(__name__)


def checkMethods(config: SweepConfig) -> None:
    for name in config.methods:
        try:
            getMethodClass(name)
        except KeyError as e:
            raise ConfigError(f"unknown method {name!r}") from e


def sweepCells(config: SweepConfig) -> list[tuple[float, float, int]]:
    return [
        (angleDeg, sigma, trial)
        for angleDeg in config.angleGridDeg
        for sigma in config.noiseSigmas
        for trial in range(config.trials)
    ]


def runCell(
    config: SweepConfig, angleDeg: float, sigma: float, trial: int, timing=False
) -> list[ConnectivityRecord]:
    """Generate the data of one (angle, sigma, trial) cell and score every
    configured method on it. A failing method is recorded, not raised."""
    cloud = generateTwoClusterSphere(
        config, angleDeg, sigma, trialSeedFor(config.seed, angleDeg, sigma, trial)
    )
    context = CodingContext(cloud=cloud, config=config)
    n = config.pointsPerCluster
    records = []
    for name in config.methods:
        method = getMethodClass(name)()
        start = time.perf_counter()
        try:
            coefficients = method.code(context)
            affinity = buildAffinity(coefficients, blockSizes=(n, n))
            xi = connectivityXi(affinity, n, n, config.xiReading)
            labels = spectralCluster(affinity, 2, seed=config.clusterSeed)
            error = clusteringError(labels, cloud.labels)
            failure = None
        except (SubspaceGapError, np.linalg.LinAlgError, ValueError) as e:
            logger.error(
                f"{name} failed at angle {angleDeg}, sigma {sigma}, trial {trial}: {e}"
            )
            xi = error = math.nan
            failure = f"{type(e).__name__}: {e}"
        wallTimeMs = (time.perf_counter() - start) * 1000 if timing else 0.0
        records.append(
            ConnectivityRecord(
                angleDeg=angleDeg,
                sigma=sigma,
                trial=trial,
                method=name,
                xi=xi,
                clusteringError=error,
                wallTimeMs=wallTimeMs,
                error=failure,
            )
        )
    return records


async def runSweep(
    config: SweepConfig, workers: int = 1, timing: bool = False
) -> list[ConnectivityRecord]:
    checkMethods(config)
    cells = sweepCells(config)
    logger.info(f"running {len(cells)} cells on {workers} worker(s)")
    results = await asyncio.gather(
        *(
            runInWorker(workers, runCell, config, angleDeg, sigma, trial, timing)
            for angleDeg, sigma, trial in cells
        )
    )
    records = [record for cellRecords in results for record in cellRecords]
    records.sort(key=lambda record: record.sortKey)
    failures = sum(record.error is not None for record in records)
    if failures:
        logger.warning(f"{failures} of {len(records)} records failed")
    return records


@dataclass(kw_only=True)
class AggregateRow:
    angleDeg: float
    sigma: float
    method: str
    meanXi: float
    stdXi: float
    meanError: float
    stdError: float
    trials: int
    failures: int = 0


def _meanStd(values: list[float]) -> tuple[float, float]:
    finite = [v for v in values if not math.isnan(v)]
    if not finite:
        return math.nan, math.nan
    return float(np.mean(finite)), float(np.std(finite))


def aggregate(records: list[ConnectivityRecord]) -> list[AggregateRow]:
    groups: dict[tuple, list[ConnectivityRecord]] = defaultdict(list)
    for record in records:
        groups[(record.angleDeg, record.sigma, record.method)].append(record)
    rows = []
    for (angleDeg, sigma, method), group in sorted(groups.items()):
        meanXi, stdXi = _meanStd([r.xi for r in group])
        meanError, stdError = _meanStd([r.clusteringError for r in group])
        rows.append(
            AggregateRow(
                angleDeg=angleDeg,
                sigma=sigma,
                method=method,
                meanXi=meanXi,
                stdXi=stdXi,
                meanError=meanError,
                stdError=stdError,
                trials=len(group),
                failures=sum(r.error is not None for r in group),
            )
        )
    return rows


def connectivityChart(rows: list[AggregateRow], sigma: float, methods: list[str]) -> str:
    series = []
    for method in methods:
        selected = [r for r in rows if r.sigma == sigma and r.method == method]
        series.append(
            Series(
                label=method,
                x=[r.angleDeg for r in selected],
                y=[r.meanXi for r in selected],
                spread=[r.stdXi for r in selected],
            )
        )
    return lineChart(
        series,
        title=f"Connectivity between the clusters, sigma = {sigma:g}",
        xLabel="angle between the clusters (degrees)",
        yLabel="connectivity",
    )


def writeSweepOutputs(
    records: list[ConnectivityRecord], config: SweepConfig, outDir: os.PathLike
) -> None:
    outDir = pathlib.Path(outDir)
    outDir.mkdir(parents=True, exist_ok=True)
    writeRecordsCSV(records, outDir / "records.csv")
    rows = aggregate(records)
    writeJSON({"records": records, "aggregate": rows}, outDir / "records.json")
    for sigma in config.noiseSigmas:
        writeSVG(
            connectivityChart(rows, sigma, config.methods),
            outDir / f"connectivity_sigma{sigma:g}.svg",
        )


def affinityCell(
    config: SweepConfig, angleDeg: float, sigma: float, trial: int
) -> dict[str, np.ndarray]:
    cloud = generateTwoClusterSphere(
        config, angleDeg, sigma, trialSeedFor(config.seed, angleDeg, sigma, trial)
    )
    context = CodingContext(cloud=cloud, config=config)
    return {
        name: buildAffinity(getMethodClass(name)().code(context)).matrix
        for name in config.methods
    }


async def averageAffinities(
    config: SweepConfig, workers: int = 1, sigma: float | None = None
) -> dict[tuple[str, float], np.ndarray]:
    """Average the affinity matrices over the trials at each of the
    configured angles, scaled so the largest entry is 1."""
    checkMethods(config)
    if sigma is None:
        sigma = config.noiseSigmas[0]
    averages = {}
    for angleDeg in config.averageAffinityAngles:
        results = await asyncio.gather(
            *(
                runInWorker(workers, affinityCell, config, angleDeg, sigma, trial)
                for trial in range(config.trials)
            )
        )
        for name in config.methods:
            mean = np.mean([result[name] for result in results], axis=0)
            largest = mean.max(initial=0.0)
            averages[(name, angleDeg)] = mean / largest if largest > 0 else mean
    return averages


def writeAverageAffinities(
    averages: dict[tuple[str, float], np.ndarray], outDir: os.PathLike
) -> None:
    outDir = pathlib.Path(outDir)
    outDir.mkdir(parents=True, exist_ok=True)
    for (name, angleDeg), matrix in sorted(averages.items()):
        writeSVG(
            heatmap(matrix, f"{name}, {angleDeg:g} degrees", cellSize=10),
            outDir / f"affinity_{name}_{angleDeg:g}.svg",
        )


defaultDeltaGrid = [round(0.05 * i, 2) for i in range(1, 20)]
minimumPrecision = 0.9

_selectorExtenders = {
    SelectorMethod.DANTZIG: selectiveDantzigExtend,
    SelectorMethod.SUBSPACE: subspaceSelectorExtend,
}


@dataclass(kw_only=True)
class CalibrationPoint:
    delta: float
    precision: float
    recall: float
    meanAdded: float


@dataclass(kw_only=True)
class CalibrationReport:
    selector: str
    delta: float
    precision: float
    recall: float
    grid: list[CalibrationPoint] = field(default_factory=list)


def calibrationCell(
    config: SweepConfig, angleDeg: float, sigma: float, smallestDelta: float
) -> dict[str, list[tuple[int, list[int], list[float]]]]:
    """Extension sequences of the pilot cell, one per point of the two
    same-subspace clusters, run down to the smallest delta of the grid.

    A larger delta only stops the same greedy sequence earlier, so one run
    serves the whole grid.
    """
    cloud = generateTwoClusterSphere(
        config, angleDeg, sigma, trialSeedFor(config.seed, angleDeg, sigma, 0)
    )
    distractorSeed = np.random.SeedSequence(
        [config.seed, round(angleDeg * 1000), round(sigma * 1e6), 0, 1]
    )
    cloud = withDistractorCluster(
        cloud, config, config.pointsPerCluster, distractorSeed
    )
    settings = SolverSettings(lam=config.lam)
    baseCoding = codePointCloud(cloud, Estimator.LASSO, settings)

    sequences: dict[str, list] = {}
    for selector, extend in _selectorExtenders.items():
        sequences[selector.value] = []
        for index in range(2 * config.pointsPerCluster):
            support = baseCoding.supportOf(index, settings.supportEps)
            if not support:
                continue
            extended = extend(cloud, index, support, smallestDelta, config.maxRounds)
            sequences[selector.value].append(
                (
                    int(cloud.labels[index]),
                    [int(cloud.labels[j]) for j in extended.added],
                    extended.scores,
                )
            )
    return sequences


def _scoreDelta(sequences, delta: float) -> CalibrationPoint:
    sameSubspace = 0
    added = 0
    reached = 0
    for label, addedLabels, scores in sequences:
        accepted = len(scores)
        for i, score in enumerate(scores):
            if not score > delta:
                accepted = i
                break
        prefix = addedLabels[:accepted]
        added += len(prefix)
        sameSubspace += sum(1 for other in prefix if other in (0, 1))
        reached += (1 - label) in prefix
    return CalibrationPoint(
        delta=delta,
        precision=sameSubspace / added if added else math.nan,
        recall=reached / len(sequences) if sequences else 0.0,
        meanAdded=added / len(sequences) if sequences else 0.0,
    )


def chooseDelta(points: list[CalibrationPoint]) -> CalibrationPoint:
    precise = [p for p in points if p.precision >= minimumPrecision]
    if precise:
        # best recall; among equals the largest delta
        return max(precise, key=lambda p: (p.recall, p.delta))
    scored = [p for p in points if not math.isnan(p.precision)]
    if not scored:
        return max(points, key=lambda p: p.delta)
    return max(scored, key=lambda p: (p.precision, p.delta))


async def calibrateDelta(
    config: SweepConfig, deltaGrid: list[float] | None = None, workers: int = 1
) -> list[CalibrationReport]:
    """Pick, per selector, the delta with the best cross-cluster recall among
    those whose added indices stay on the clusters' own subspace at least
    90% of the time. The pilot data carries a distractor cluster on a
    foreign subspace."""
    deltaGrid = sorted(deltaGrid or defaultDeltaGrid)
    if not deltaGrid or deltaGrid[0] <= 0:
        raise ConfigError("delta grid values must be positive")
    pilotCells = [(a, s) for a in config.angleGridDeg for s in config.noiseSigmas]
    results = await asyncio.gather(
        *(
            runInWorker(workers, calibrationCell, config, angleDeg, sigma, deltaGrid[0])
            for angleDeg, sigma in pilotCells
        )
    )

    reports = []
    for selector in _selectorExtenders:
        sequences = [s for result in results for s in result[selector.value]]
        points = [_scoreDelta(sequences, delta) for delta in deltaGrid]
        best = chooseDelta(points)
        logger.info(
            f"{selector.value}: delta {best.delta:g} "
            f"(precision {best.precision:.3f}, recall {best.recall:.3f})"
        )
        reports.append(
            CalibrationReport(
                selector=selector.value,
                delta=best.delta,
                precision=best.precision,
                recall=best.recall,
                grid=points,
            )
        )
    return reports
