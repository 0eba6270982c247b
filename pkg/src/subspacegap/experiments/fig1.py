from __future__ import annotations

import logging
import os
import pathlib
from dataclasses import dataclass

import numpy as np

from ..core.classes import AffinityMatrix, Estimator, SolverSettings
from ..core.graph import buildAffinity
from ..core.solvers import codePointCloud
from ..core.synth import generatePlanarArcs
from .records import writeJSON, writeSVG
from .svg import heatmap

logger = logging.getLogger(__name__)


@dataclass(kw_only=True, eq=False)
class ArcPanel:
    gapDeg: float
    affinity: AffinityMatrix

    def _blocks(self) -> tuple[np.ndarray, np.ndarray]:
        A = self.affinity.matrix
        n = A.shape[0] // 2
        cross = np.concatenate([A[:n, n:].ravel(), A[n:, :n].ravel()])
        withinMask = ~np.eye(n, dtype=bool)
        within = np.concatenate([A[:n, :n][withinMask], A[n:, n:][withinMask]])
        return cross, within

    @property
    def crossMean(self) -> float:
        return float(self._blocks()[0].mean())

    @property
    def withinMean(self) -> float:
        return float(self._blocks()[1].mean())

    @property
    def crossWithinRatio(self) -> float:
        within = self.withinMean
        return self.crossMean / within if within > 0 else float("inf")

    @property
    def crossToNonzeroWithinRatio(self) -> float:
        within = self._blocks()[1]
        within = within[within > 0]
        return self.crossMean / float(within.mean()) if within.size else float("inf")


def runFig1(
    gaps: list[float],
    lam: float = 0.01,
    outDir: os.PathLike | None = None,
    nPerSet: int = 5,
    arcSpanDeg: float = 30.0,
) -> list[ArcPanel]:
    """Code two planar arcs per gap with basis pursuit denoising and
    render |C| + |C|ᵀ, rows and columns in point order."""
    settings = SolverSettings(lam=lam)
    panels = []
    for gapDeg in gaps:
        cloud = generatePlanarArcs(nPerSet, gapDeg, arcSpanDeg)
        coefficients = codePointCloud(cloud, Estimator.BPDN, settings)
        panel = ArcPanel(
            gapDeg=gapDeg,
            affinity=buildAffinity(coefficients, blockSizes=(nPerSet, nPerSet)),
        )
        logger.info(
            f"gap {gapDeg:g}: cross/within affinity ratio {panel.crossWithinRatio:.3f}"
        )
        panels.append(panel)

    if outDir is not None and panels:
        outDir = pathlib.Path(outDir)
        outDir.mkdir(parents=True, exist_ok=True)
        for panel in panels:
            writeSVG(
                heatmap(panel.affinity.matrix, f"gap {panel.gapDeg:g} degrees"),
                outDir / f"fig1_gap{panel.gapDeg:g}.svg",
            )
        writeJSON(
            [
                {
                    "gapDeg": panel.gapDeg,
                    "crossMean": panel.crossMean,
                    "withinMean": panel.withinMean,
                    "crossWithinRatio": panel.crossWithinRatio,
                    "crossToNonzeroWithinRatio": panel.crossToNonzeroWithinRatio,
                    "affinity": panel.affinity.matrix,
                }
                for panel in panels
            ],
            outDir / "fig1.json",
        )
    return panels
