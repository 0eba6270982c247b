from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np

from .classes import (
    CoefficientMatrix,
    DantzigState,
    ErrorDescription,
    Estimator,
    ExtendedSupport,
    PointCloud,
    SelectorMethod,
    SolverSettings,
)
from .errors import PreconditionError, SubspaceGapError
from .linalg import fitPrincipalBasis
from .solvers import codePointCloud
from .threading import mapInThreads

logger = logging.getLogger(__name__)

# scores equal to this many decimals count as ties
scoreDecimals = 12


def dantzigScale(xstar: np.ndarray) -> float:
    """Return trace(X⋆ᵀX⋆), the squared Frobenius norm of X⋆."""
    xstar = np.asarray(xstar, dtype=float)
    if xstar.size == 0:
        raise PreconditionError("cannot scale an empty matrix")
    return float(np.sum(xstar**2))


ScoreFunction = Callable[[np.ndarray, list[int]], np.ndarray]


def _dantzigScores(data: np.ndarray, extended: list[int]) -> np.ndarray:
    xstar = data[:, extended].T
    state = DantzigState(xstar=xstar, rho=dantzigScale(xstar))
    return np.sum((state.xstar @ data) ** 2, axis=0) / state.rho


def _subspaceScores(dimension: int) -> ScoreFunction:
    def scores(data, extended):
        basis = fitPrincipalBasis(data[:, extended], dimension)
        return np.clip(np.sum((basis.basis.T @ data) ** 2, axis=0), 0.0, 1.0)

    return scores


def _extendSupport(
    cloud: PointCloud,
    yIndex: int,
    support: list[int],
    delta: float,
    maxRounds: int,
    scoreFunction: ScoreFunction,
) -> ExtendedSupport:
    support = [int(i) for i in support]
    if not support:
        raise PreconditionError(f"point {yIndex} has an empty support")
    if not delta > 0:
        raise PreconditionError(f"delta must be positive, got {delta}")
    if yIndex in support:
        raise PreconditionError(f"support of point {yIndex} contains the point")

    result = ExtendedSupport(pointIndex=yIndex, originalSupport=support, delta=delta)
    eligible = np.ones(cloud.N, dtype=bool)
    eligible[yIndex] = False
    eligible[support] = False

    while result.rounds < maxRounds and eligible.any():
        scores = np.round(scoreFunction(cloud.data, result.extended), scoreDecimals)
        scores = np.where(eligible, scores, -np.inf)
        # argmax returns the lowest index among ties
        best = int(np.argmax(scores))
        if not scores[best] > delta:
            break
        result.added.append(best)
        result.scores.append(float(scores[best]))
        result.rounds += 1
        eligible[best] = False

    return result


def selectiveDantzigExtend(
    cloud: PointCloud,
    yIndex: int,
    support: list[int],
    delta: float,
    maxRounds: int,
) -> ExtendedSupport:
    return _extendSupport(cloud, yIndex, support, delta, maxRounds, _dantzigScores)


def subspaceSelectorExtend(
    cloud: PointCloud,
    yIndex: int,
    support: list[int],
    delta: float,
    maxRounds: int,
) -> ExtendedSupport:
    dimension = min(max(len(support), 1), cloud.m)
    return _extendSupport(
        cloud, yIndex, support, delta, maxRounds, _subspaceScores(dimension)
    )


_extenders = {
    SelectorMethod.DANTZIG: selectiveDantzigExtend,
    SelectorMethod.SUBSPACE: subspaceSelectorExtend,
}


def reweightExtended(
    cloud: PointCloud, yIndex: int, extended: ExtendedSupport
) -> np.ndarray:
    indices = extended.extended
    if not indices:
        raise PreconditionError(f"extended support of point {yIndex} is empty")
    # lstsq gives the minimum-norm solution for rank-deficient columns
    coefficients, *_ = np.linalg.lstsq(
        cloud.data[:, indices], cloud.column(yIndex), rcond=None
    )
    weights = np.zeros(cloud.N)
    weights[indices] = np.abs(coefficients)
    weights[yIndex] = 0.0
    return weights


def codePointCloudSelective(
    cloud: PointCloud,
    method: SelectorMethod,
    baseSettings: SolverSettings,
    delta: float,
    maxRounds: int,
    baseCoding: CoefficientMatrix | None = None,
    workers: int = 1,
) -> CoefficientMatrix:
    """Code every point by extending its lasso support with the chosen
    selector and reweighting the extended support by least squares.

    `baseCoding` may be passed in to share one lasso coding between
    selectors.
    """
    method = SelectorMethod(method)
    if baseCoding is None:
        baseCoding = codePointCloud(cloud, Estimator.LASSO, baseSettings, workers)
    if baseCoding.N != cloud.N:
        raise PreconditionError("base coding does not match the point cloud")
    extend = _extenders[method]

    def codeOne(index):
        support = baseCoding.supportOf(index, baseSettings.supportEps)
        try:
            extended = extend(cloud, index, support, delta, maxRounds)
            return extended, reweightExtended(cloud, index, extended), None
        except (SubspaceGapError, np.linalg.LinAlgError) as e:
            return None, None, e

    results = mapInThreads(codeOne, range(cloud.N), workers)

    matrix = np.zeros((cloud.N, cloud.N))
    warnings = list(baseCoding.warnings)
    extensions = []
    for index, (extended, weights, error) in enumerate(results):
        extensions.append(extended)
        if error is not None:
            logger.warning(f"{method.value}: extending point {index} failed: {error}")
            warnings.append(
                ErrorDescription(
                    message=str(error), type=type(error).__name__, index=index
                )
            )
            continue
        matrix[:, index] = weights

    if logger.isEnabledFor(logging.DEBUG):
        added = [len(e.added) for e in extensions if e is not None]
        meanAdded = sum(added) / len(added) if added else math.nan
        logger.debug(f"{method.value}: {meanAdded:.2f} indices added per point")
    return CoefficientMatrix(matrix=matrix, warnings=warnings, extensions=extensions)
