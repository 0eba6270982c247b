from __future__ import annotations

import csv
import json
import math
import os
import pathlib
from typing import Any, Iterable

from ..core.classes import ConnectivityRecord, PointCloud, unstructure

recordHeader = [
    "angle_deg",
    "sigma",
    "trial",
    "method",
    "xi",
    "clustering_error",
    "wall_time_ms",
]


def formatNumber(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return format(value, ".12g")


def writeRecordsCSV(records: Iterable[ConnectivityRecord], path: os.PathLike) -> None:
    path = pathlib.Path(path)
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(recordHeader)
        for record in records:
            writer.writerow(
                [
                    formatNumber(record.angleDeg),
                    formatNumber(record.sigma),
                    record.trial,
                    record.method,
                    formatNumber(record.xi),
                    formatNumber(record.clusteringError),
                    formatNumber(record.wallTimeMs),
                ]
            )


def readRecordsCSV(path: os.PathLike) -> list[ConnectivityRecord]:
    with open(path, encoding="utf-8", newline="") as file:
        reader = csv.DictReader(file)
        return [
            ConnectivityRecord(
                angleDeg=float(row["angle_deg"]),
                sigma=float(row["sigma"]),
                trial=int(row["trial"]),
                method=row["method"],
                xi=float(row["xi"]),
                clusteringError=float(row["clustering_error"]),
                wallTimeMs=float(row["wall_time_ms"]),
            )
            for row in reader
        ]


def serialize(data: Any) -> str:
    return json.dumps(unstructure(data), indent=0, ensure_ascii=False)


def writeJSON(data: Any, path: os.PathLike) -> None:
    pathlib.Path(path).write_text(serialize(data) + "\n", encoding="utf-8")


def writePointCloudCSV(cloud: PointCloud, path: os.PathLike) -> None:
    """One point per row: the label (empty when unknown) followed by the
    coordinates."""
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["label"] + [f"x{i}" for i in range(cloud.m)])
        for index in range(cloud.N):
            label = "" if cloud.labels is None else int(cloud.labels[index])
            writer.writerow(
                [label] + [formatNumber(float(v)) for v in cloud.column(index)]
            )


def writeSVG(svgText: str, path: os.PathLike) -> None:
    pathlib.Path(path).write_text(svgText, encoding="utf-8")
