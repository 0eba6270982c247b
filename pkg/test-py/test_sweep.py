import json
import math
from dataclasses import dataclass

import numpy as np
import pytest
from testSupport import directoryTreeToList, parseSVG

from subspacegap.core.classes import ConnectivityRecord, PointCloud, SweepConfig
from subspacegap.core.errors import ConfigError, PreconditionError
from subspacegap.experiments import registerMethod
from subspacegap.experiments.records import (
    readRecordsCSV,
    recordHeader,
    writePointCloudCSV,
    writeRecordsCSV,
)
from subspacegap.experiments.sweep import (
    CalibrationPoint,
    aggregate,
    averageAffinities,
    calibrateDelta,
    chooseDelta,
    runSweep,
    sweepCells,
    writeAverageAffinities,
    writeSweepOutputs,
)


@registerMethod("always-fails")
@dataclass(kw_only=True)
class AlwaysFailingMethod:
    def code(self, context):
        raise PreconditionError("no coding for this cloud")


async def test_runSweep(smallSweepConfig):
    records = await runSweep(smallSweepConfig)
    assert len(records) == len(sweepCells(smallSweepConfig)) * 5 == 20
    assert [r.sortKey for r in records] == sorted(r.sortKey for r in records)
    for record in records:
        assert record.error is None
        assert 0 <= record.xi <= 1
        assert 0 <= record.clusteringError <= 0.5
        assert record.wallTimeMs == 0


async def test_runSweep_deterministic(smallSweepConfig, tmp_path):
    first = await runSweep(smallSweepConfig)
    second = await runSweep(smallSweepConfig)
    writeRecordsCSV(first, tmp_path / "first.csv")
    writeRecordsCSV(second, tmp_path / "second.csv")
    firstBytes = (tmp_path / "first.csv").read_bytes()
    assert firstBytes == (tmp_path / "second.csv").read_bytes()
    assert firstBytes.splitlines()[0].decode() == ",".join(recordHeader)


async def test_runSweep_timing(smallSweepConfig):
    smallSweepConfig.methods = ["omp"]
    records = await runSweep(smallSweepConfig, timing=True)
    assert all(r.wallTimeMs > 0 for r in records)


async def test_runSweep_unknownMethod(smallSweepConfig):
    smallSweepConfig.methods = ["lasso", "spectral-magic"]
    with pytest.raises(ConfigError, match="spectral-magic"):
        await runSweep(smallSweepConfig)


async def test_runSweep_failingMethodIsRecorded(smallSweepConfig, tmp_path):
    smallSweepConfig.methods = ["lasso", "always-fails"]
    records = await runSweep(smallSweepConfig)
    failed = [r for r in records if r.method == "always-fails"]
    assert len(failed) == 4
    for record in failed:
        assert math.isnan(record.xi) and math.isnan(record.clusteringError)
        assert record.error == "PreconditionError: no coding for this cloud"
    assert all(r.error is None for r in records if r.method == "lasso")

    writeRecordsCSV(records, tmp_path / "records.csv")
    reread = readRecordsCSV(tmp_path / "records.csv")
    assert [r.method for r in reread] == [r.method for r in records]
    assert all(math.isnan(r.xi) for r in reread if r.method == "always-fails")
    rows = aggregate(records)
    assert {row.failures for row in rows if row.method == "always-fails"} == {2}
    assert all(math.isnan(row.meanXi) for row in rows if row.method == "always-fails")


async def test_writeSweepOutputs(smallSweepConfig, tmp_path):
    records = await runSweep(smallSweepConfig)
    writeSweepOutputs(records, smallSweepConfig, tmp_path / "out")
    assert directoryTreeToList(tmp_path / "out") == [
        "connectivity_sigma0.svg",
        "records.csv",
        "records.json",
    ]
    parseSVG((tmp_path / "out" / "connectivity_sigma0.svg").read_text(encoding="utf-8"))
    data = json.loads((tmp_path / "out" / "records.json").read_text(encoding="utf-8"))
    assert len(data["records"]) == 20
    assert len(data["aggregate"]) == 10
    assert {row["trials"] for row in data["aggregate"]} == {2}
    reread = readRecordsCSV(tmp_path / "out" / "records.csv")
    assert [r.xi for r in reread] == pytest.approx([r.xi for r in records], abs=1e-11)


def _record(angleDeg, trial, method, xi, error=0.0):
    return ConnectivityRecord(
        angleDeg=angleDeg, sigma=0.0, trial=trial, method=method, xi=xi, clusteringError=error
    )


def test_aggregate():
    records = [
        _record(10.0, 0, "omp", 0.2),
        _record(10.0, 1, "omp", 0.4, 0.1),
        _record(0.0, 0, "omp", 0.5),
        _record(10.0, 0, "lasso", 0.0),
    ]
    rows = aggregate(records)
    assert [(r.angleDeg, r.method) for r in rows] == [
        (0.0, "omp"),
        (10.0, "lasso"),
        (10.0, "omp"),
    ]
    row = rows[2]
    assert row.meanXi == pytest.approx(0.3)
    assert row.stdXi == pytest.approx(0.1)
    assert row.meanError == pytest.approx(0.05)
    assert row.trials == 2
    assert row.failures == 0


async def test_averageAffinities(smallSweepConfig, tmp_path):
    smallSweepConfig.methods = ["lasso", "subspace"]
    averages = await averageAffinities(smallSweepConfig)
    assert sorted(averages) == [
        ("lasso", 0.0),
        ("lasso", 60.0),
        ("subspace", 0.0),
        ("subspace", 60.0),
    ]
    for matrix in averages.values():
        assert matrix.shape == (12, 12)
        assert matrix.max() == pytest.approx(1.0)
        assert np.array_equal(matrix, matrix.T)
        assert not np.any(np.diag(matrix))

    writeAverageAffinities(averages, tmp_path)
    assert directoryTreeToList(tmp_path) == [
        "affinity_lasso_0.svg",
        "affinity_lasso_60.svg",
        "affinity_subspace_0.svg",
        "affinity_subspace_60.svg",
    ]
    parseSVG((tmp_path / "affinity_lasso_60.svg").read_text(encoding="utf-8"))


async def test_calibrateDelta(smallSweepConfig):
    grid = [0.9, 0.1, 0.5]
    reports = await calibrateDelta(smallSweepConfig, deltaGrid=grid)
    assert [r.selector for r in reports] == ["dantzig", "subspace"]
    for report in reports:
        assert report.delta in grid
        assert [p.delta for p in report.grid] == [0.1, 0.5, 0.9]
        # a larger delta stops the same extension earlier
        recalls = [p.recall for p in report.grid]
        added = [p.meanAdded for p in report.grid]
        assert recalls == sorted(recalls, reverse=True)
        assert added == sorted(added, reverse=True)
        for point in report.grid:
            assert 0 <= point.recall <= 1
            assert math.isnan(point.precision) or 0 <= point.precision <= 1


async def test_calibrateDelta_badGrid(smallSweepConfig):
    with pytest.raises(ConfigError):
        await calibrateDelta(smallSweepConfig, deltaGrid=[0.0, 0.5])


def _point(delta, precision, recall):
    return CalibrationPoint(delta=delta, precision=precision, recall=recall, meanAdded=1)


chooseDeltaTestData = [
    ([_point(0.1, 0.8, 0.9), _point(0.3, 0.95, 0.5), _point(0.5, 1.0, 0.2)], 0.3),
    ([_point(0.1, 0.95, 0.5), _point(0.3, 0.92, 0.5), _point(0.5, 1.0, 0.2)], 0.3),
    ([_point(0.1, 0.5, 0.9), _point(0.3, 0.7, 0.5), _point(0.5, 0.6, 0.2)], 0.3),
    ([_point(0.1, math.nan, 0.0), _point(0.3, math.nan, 0.0)], 0.3),
]


@pytest.mark.parametrize("points, expectedDelta", chooseDeltaTestData)
def test_chooseDelta(points, expectedDelta):
    assert chooseDelta(points).delta == expectedDelta


def test_writePointCloudCSV(tmp_path):
    cloud = PointCloud(data=np.array([[1.0, 0.0], [0.0, 0.5]]), labels=[0, 1])
    writePointCloudCSV(cloud, tmp_path / "cloud.csv")
    assert (tmp_path / "cloud.csv").read_text(encoding="utf-8").splitlines() == [
        "label,x0,x1",
        "0,1,0",
        "1,0,0.5",
    ]


async def test_runSweep_selectorsBridgeTheGap():
    config = SweepConfig(
        angleGridDeg=[10.0, 20.0, 45.0, 90.0],
        noiseSigmas=[0.0],
        trials=3,
        methods=["lasso", "dantzig", "subspace"],
    )
    records = await runSweep(config)
    rows = {(row.angleDeg, row.method): row for row in aggregate(records)}
    assert all(row.failures == 0 for row in rows.values())

    lasso = [rows[angleDeg, "lasso"] for angleDeg in config.angleGridDeg]
    pooledStd = math.sqrt(np.mean([row.stdXi**2 for row in lasso]))
    for nearer, farther in zip(lasso, lasso[1:]):
        assert farther.meanXi <= nearer.meanXi + pooledStd
    for angleDeg in [20.0, 45.0]:
        for selector in ["dantzig", "subspace"]:
            assert rows[angleDeg, selector].meanXi >= rows[angleDeg, "lasso"].meanXi
    assert rows[45.0, "dantzig"].meanXi > rows[45.0, "lasso"].meanXi
    assert rows[45.0, "subspace"].meanXi > rows[45.0, "lasso"].meanXi
