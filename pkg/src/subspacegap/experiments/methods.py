from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from ..core.classes import (
    CoefficientMatrix,
    Estimator,
    PointCloud,
    SelectorMethod,
    SolverSettings,
    SweepConfig,
)
from ..core.selective import codePointCloudSelective
from ..core.solvers import codePointCloud
from . import registerMethod

logger = logging.getLogger(__name__)


@dataclass(kw_only=True)
class CodingContext:
    """Per-cell state shared by the methods coding one point cloud."""

    cloud: PointCloud
    config: SweepConfig
    workers: int = 1
    _lassoCoding: Optional[CoefficientMatrix] = field(default=None, repr=False)

    @property
    def lassoSettings(self) -> SolverSettings:
        return SolverSettings(lam=self.config.lam)

    def lassoCoding(self) -> CoefficientMatrix:
        # the lasso coding is the base of both selectors; compute it once
        if self._lassoCoding is None:
            self._lassoCoding = codePointCloud(
                self.cloud, Estimator.LASSO, self.lassoSettings, self.workers
            )
        return self._lassoCoding


@registerMethod("lasso")
@dataclass(kw_only=True)
class LassoMethod:
    def code(self, context: CodingContext) -> CoefficientMatrix:
        return context.lassoCoding()


@registerMethod("bpdn")
@dataclass(kw_only=True)
class BasisPursuitDenoisingMethod:
    def code(self, context: CodingContext) -> CoefficientMatrix:
        settings = SolverSettings(lam=context.config.bpdnLambda)
        return codePointCloud(
            context.cloud, Estimator.BPDN, settings, context.workers
        )


@registerMethod("omp")
@dataclass(kw_only=True)
class OrthogonalMatchingPursuitMethod:
    def code(self, context: CodingContext) -> CoefficientMatrix:
        config = context.config
        maxAtoms = config.ompMaxAtoms
        if maxAtoms is None:
            maxAtoms = config.subspaceDim
        settings = SolverSettings(maxAtoms=maxAtoms, residualTol=config.ompResidualTol)
        return codePointCloud(context.cloud, Estimator.OMP, settings, context.workers)


@dataclass(kw_only=True)
class SelectorMethodBase:
    selector = SelectorMethod.DANTZIG

    def code(self, context: CodingContext) -> CoefficientMatrix:
        config = context.config
        return codePointCloudSelective(
            context.cloud,
            self.selector,
            context.lassoSettings,
            config.deltaFor(self.selector),
            config.maxRounds,
            baseCoding=context.lassoCoding(),
            workers=context.workers,
        )


@registerMethod("dantzig")
@dataclass(kw_only=True)
class SelectiveDantzigMethod(SelectorMethodBase):
    selector = SelectorMethod.DANTZIG


@registerMethod("subspace")
@dataclass(kw_only=True)
class SubspaceSelectorMethod(SelectorMethodBase):
    selector = SelectorMethod.SUBSPACE
