from __future__ import annotations

import itertools
import logging
import math
from typing import Callable, Iterable

import numpy as np

from .classes import MonotonicityReport, OracleReport, SolverSettings
from .errors import PreconditionError, SubspaceGapError
from .linalg import normalizeColumns, randomOrthonormalBasis
from .solvers import (
    InfeasibleError,
    solveBasisPursuit,
    solveBasisPursuitDenoising,
    solveLasso,
)

logger = logging.getLogger(__name__)


class CombinatorialBudgetError(SubspaceGapError):
    pass


supportBudget = 10**6
feasibilityTolerance = 1e-8
conditionTolerance = 1e-10
monotonicityTolerance = 1e-7
# planar instances keep every atom within this angle of y
maxPlanarAngleDeg = 80.0
minPlanarSeparationDeg = 1.0


def countSupports(numColumns: int, maxSupport: int) -> int:
    return sum(math.comb(numColumns, k) for k in range(1, maxSupport + 1))


def exactL1(columns: np.ndarray, y: np.ndarray) -> float | None:
    """ℓ1 norm of the exact representation of y on the given columns, or
    None when the columns are (nearly) dependent or do not represent y."""
    singularValues = np.linalg.svd(columns, compute_uv=False)
    if singularValues[-1] <= conditionTolerance * singularValues[0]:
        return None
    coefficients, *_ = np.linalg.lstsq(columns, y, rcond=None)
    if np.linalg.norm(columns @ coefficients - y) > feasibilityTolerance:
        return None
    return float(np.abs(coefficients).sum())


def bruteForceMinL1(
    X: np.ndarray,
    y: np.ndarray,
    maxSupport: int,
    instance: str = "",
    budget: int = supportBudget,
) -> OracleReport:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[1]
    maxSupport = min(maxSupport, n)
    if maxSupport < 1:
        raise PreconditionError(f"maxSupport must be positive, got {maxSupport}")
    numSupports = countSupports(n, maxSupport)
    if numSupports > budget:
        raise CombinatorialBudgetError(
            f"{numSupports} supports exceed the budget of {budget}"
        )

    if not np.any(y):
        return OracleReport(instance=instance, oracleValue=0.0, oracleSupport=[])

    bestValue = math.inf
    bestSupport: list[int] = []
    checked = 0
    for size in range(1, maxSupport + 1):
        for support in itertools.combinations(range(n), size):
            checked += 1
            value = exactL1(X[:, support], y)
            if value is not None and value < bestValue:
                bestValue = value
                bestSupport = list(support)

    if not bestSupport:
        leastSquares, *_ = np.linalg.lstsq(X, y, rcond=None)
        raise InfeasibleError(
            f"no support of size <= {maxSupport} represents y",
            bestResidual=float(np.linalg.norm(X @ leastSquares - y)),
        )
    return OracleReport(
        instance=instance,
        oracleValue=bestValue,
        oracleSupport=bestSupport,
        supportsChecked=checked,
    )


def planarInstance(
    atomAnglesDeg: Iterable[float], ambientDim: int = 3, seed=None
) -> tuple[np.ndarray, np.ndarray]:
    """Unit atoms in a plane at the given angles from y, with y along the
    first axis of the plane. With a seed the plane is a random
    2-dimensional subspace of R^ambientDim, otherwise the span of the
    first two coordinate axes."""
    if ambientDim < 2:
        raise PreconditionError(f"ambient dimension must be >= 2, got {ambientDim}")
    radians = np.radians(np.asarray(list(atomAnglesDeg), dtype=float))
    planar = np.vstack([np.cos(radians), np.sin(radians)])
    if seed is None:
        plane = np.eye(ambientDim)[:, :2]
    else:
        plane = randomOrthonormalBasis(ambientDim, 2, seed).basis
    return plane @ planar, plane[:, 0].copy()


def randomSubspaceInstance(
    rng: np.random.Generator, numColumns: int, ambientDim: int, subspaceDim: int
) -> tuple[np.ndarray, np.ndarray]:
    basis = randomOrthonormalBasis(ambientDim, subspaceDim, rng).basis
    points = normalizeColumns(basis @ rng.standard_normal((subspaceDim, numColumns + 1)))
    return points.data[:, 1:], points.data[:, 0]


def randomPlanarAngles(
    rng: np.random.Generator, count: int, bothSides: bool = True
) -> list[float]:
    # rejection sampling for well separated, non-degenerate angles
    while True:
        angles = rng.uniform(-maxPlanarAngleDeg, maxPlanarAngleDeg, count)
        ordered = np.sort(np.concatenate([angles, [0.0]]))
        if np.min(np.diff(ordered)) < minPlanarSeparationDeg:
            continue
        if bothSides and not (np.any(angles > 0) and np.any(angles < 0)):
            continue
        return [float(a) for a in angles]


def propOneFamily(
    otherAnglesDeg: Iterable[float] = (-30.0, -55.0, -70.0),
    ambientDim: int = 3,
    seed=None,
) -> Callable[[float], tuple[np.ndarray, np.ndarray]]:
    """Instances where only the angle between y and atom 0 varies; all other
    atoms sit on the opposite side of y."""
    otherAnglesDeg = list(otherAnglesDeg)
    if any(a >= 0 for a in otherAnglesDeg):
        raise PreconditionError("the fixed atoms must lie on the negative side of y")

    def instance(angleDeg):
        return planarInstance([angleDeg, *otherAnglesDeg], ambientDim, seed)

    return instance


def verifyAngleMonotonicity(
    family: Callable[[float], tuple[np.ndarray, np.ndarray]],
    anglesDeg: Iterable[float],
    robustLam: float = 1e-3,
    lassoLam: float = 10.0,
    tolerance: float = monotonicityTolerance,
) -> MonotonicityReport:
    """Tabulate the exact, robust (bpdn) and lasso ℓ1 norms along an angle
    grid. Only the exact column is checked for monotonicity; a robustLam
    of 0 computes the robust column with exact basis pursuit."""
    anglesDeg = [float(a) for a in anglesDeg]
    report = MonotonicityReport(anglesDeg=anglesDeg, exact=[])
    for angleDeg in anglesDeg:
        X, y = family(angleDeg)
        report.exact.append(
            bruteForceMinL1(X, y, min(X.shape), instance=f"{angleDeg}").oracleValue
        )
        if robustLam > 0:
            robust = solveBasisPursuitDenoising(X, y, SolverSettings(lam=robustLam))
        else:
            robust = solveBasisPursuit(X, y, SolverSettings())
        report.robust.append(robust.l1Norm)
        report.lasso.append(solveLasso(X, y, SolverSettings(lam=lassoLam)).l1Norm)

    for i in range(1, len(report.exact)):
        if report.exact[i] < report.exact[i - 1] - tolerance:
            logger.warning(
                f"exact l1 decreased from {report.exact[i - 1]} to "
                f"{report.exact[i]} at {anglesDeg[i]} degrees"
            )
            report.violations.append(i)
    return report


def nearerSwapViolations(rng: np.random.Generator, count: int) -> list[str]:
    """Replace the farther atom of a two-sided planar support with a strictly
    closer atom on the same side; the exact ℓ1 must strictly decrease."""
    violations = []
    for index in range(count):
        positive, negative = rng.uniform(2 * minPlanarSeparationDeg, maxPlanarAngleDeg, 2)
        negative = -negative
        farther = positive if positive >= -negative else negative
        closer = math.copysign(
            rng.uniform(minPlanarSeparationDeg, abs(farther) - minPlanarSeparationDeg),
            farther,
        )
        kept = negative if farther == positive else positive
        X, y = planarInstance([farther, kept, closer])
        before = exactL1(X[:, [0, 1]], y)
        after = exactL1(X[:, [2, 1]], y)
        if before is None or after is None:
            continue
        if not after < before:
            violations.append(
                f"swap {index}: support ({farther:.3f}, {kept:.3f}) -> "
                f"({closer:.3f}, {kept:.3f}) changed l1 from {before} to {after}"
            )
    return violations


def nearestSupportViolations(
    rng: np.random.Generator, count: int, numAtoms: int = 7
) -> list[str]:
    """On planar instances with atoms on both sides of y, the minimal ℓ1
    support is the nearest atom on each side; checked against the oracle
    and against exact basis pursuit."""
    violations = []
    for index in range(count):
        angles = np.array(randomPlanarAngles(rng, numAtoms))
        positives = np.flatnonzero(angles > 0)
        negatives = np.flatnonzero(angles < 0)
        expected = sorted(
            [
                int(positives[np.argmin(angles[positives])]),
                int(negatives[np.argmax(angles[negatives])]),
            ]
        )
        X, y = planarInstance(angles, ambientDim=3)
        report = bruteForceMinL1(X, y, 2, instance=f"planar {index}")
        if report.oracleSupport != expected:
            violations.append(
                f"instance {index}: oracle support {report.oracleSupport} is not "
                f"the nearest atoms {expected} (angles {np.round(angles, 3).tolist()})"
            )
            continue
        solution = solveBasisPursuit(X, y, SolverSettings())
        if sorted(solution.support) != expected:
            violations.append(
                f"instance {index}: basis pursuit support {solution.support} "
                f"differs from {expected}"
            )
    return violations
