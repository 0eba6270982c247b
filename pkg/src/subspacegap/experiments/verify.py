from __future__ import annotations

import logging
import math

import numpy as np

from ..core.classes import CoefficientMatrix, PointCloud, SolverSettings, SuiteReport
from ..core.errors import SubspaceGapError, UsageError
from ..core.graph import buildAffinity, connectivityXi
from ..core.linalg import orthogonalProject, randomOrthonormalBasis
from ..core.oracle import (
    bruteForceMinL1,
    nearerSwapViolations,
    nearestSupportViolations,
    propOneFamily,
    randomSubspaceInstance,
    verifyAngleMonotonicity,
)
from ..core.solvers import codePointCloud, solveBasisPursuit
from . import getSuite, registerSuite, registeredNames

logger = logging.getLogger(__name__)


oracleTolerance = 1e-6
rotationTolerance = 1e-6


@registerSuite("oracle")
def oracleSuite(count: int | None, seed: int) -> SuiteReport:
    """Basis pursuit against exhaustive support enumeration on random
    points of a 2-dimensional subspace of R⁴."""
    count = 50 if count is None else count
    rng = np.random.default_rng(seed)
    report = SuiteReport(suite="oracle")
    largestGap = 0.0
    for index in range(count):
        X, y = randomSubspaceInstance(rng, 9, 4, 2)
        oracle = bruteForceMinL1(X, y, 2, instance=f"random {index}")
        try:
            solution = solveBasisPursuit(X, y, SolverSettings())
        except SubspaceGapError as e:
            report.violations.append(f"instance {index}: basis pursuit failed: {e}")
            continue
        oracle = oracle.withSolverValue(solution.l1Norm)
        largestGap = max(largestGap, abs(oracle.gap))
        report.checks += 1
        if oracle.gap < -oracleTolerance:
            report.violations.append(
                f"instance {index}: solver beat the oracle by {-oracle.gap:.3g}"
            )
        elif oracle.gap > oracleTolerance * max(1.0, oracle.oracleValue):
            report.violations.append(
                f"instance {index}: solver value {oracle.solverValue} exceeds "
                f"oracle value {oracle.oracleValue}"
            )
    report.notes["largestGap"] = largestGap
    return report


@registerSuite("props")
def propsSuite(count: int | None, seed: int) -> SuiteReport:
    count = 100 if count is None else count
    rng = np.random.default_rng(seed)
    report = SuiteReport(suite="props")

    monotonicity = verifyAngleMonotonicity(
        propOneFamily(), [float(a) for a in range(1, 81)]
    )
    report.checks += len(monotonicity.anglesDeg)
    report.violations.extend(
        f"exact l1 decreased at {monotonicity.anglesDeg[i]} degrees"
        for i in monotonicity.violations
    )
    report.notes["monotonicity"] = monotonicity

    for name, violations in [
        ("nearerSwap", nearerSwapViolations(rng, count)),
        ("nearestSupport", nearestSupportViolations(rng, count)),
    ]:
        report.checks += count
        report.notes[name] = len(violations)
        report.violations.extend(violations)
    return report


def _randomCoefficients(rng, n: int) -> CoefficientMatrix:
    matrix = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.3)
    np.fill_diagonal(matrix, 0.0)
    return CoefficientMatrix(matrix=matrix)


@registerSuite("invariants")
def invariantsSuite(count: int | None, seed: int) -> SuiteReport:
    count = 1000 if count is None else count
    rng = np.random.default_rng(seed)
    report = SuiteReport(suite="invariants")

    def check(condition: bool, message: str):
        report.checks += 1
        if not condition:
            report.violations.append(message)

    for index in range(count):
        n1, n2 = (int(n) for n in rng.integers(1, 6, 2))
        affinity = buildAffinity(_randomCoefficients(rng, n1 + n2))
        A = affinity.matrix
        check(
            np.array_equal(A, A.T) and not np.any(np.diag(A)) and not np.any(A < 0),
            f"affinity {index} is not a symmetric nonnegative hollow matrix",
        )
        xi = connectivityXi(affinity, n1, n2)
        check(0 <= xi <= 1, f"affinity {index}: connectivity {xi} outside [0, 1]")
        scale = float(rng.uniform(0.1, 10))
        scaled = type(affinity)(matrix=A * scale)
        check(
            math.isclose(connectivityXi(scaled, n1, n2), xi, abs_tol=1e-12),
            f"affinity {index}: connectivity changes under scaling by {scale}",
        )
        # relabel points inside each cluster, keeping the blocks in place
        permutation = np.concatenate(
            [rng.permutation(n1), n1 + rng.permutation(n2)]
        )
        permuted = type(affinity)(matrix=A[np.ix_(permutation, permutation)])
        check(
            math.isclose(connectivityXi(permuted, n1, n2), xi, abs_tol=1e-12),
            f"affinity {index}: connectivity changes under a within-block permutation",
        )

    for index in range(count):
        m = int(rng.integers(2, 8))
        d = int(rng.integers(1, m + 1))
        basis = randomOrthonormalBasis(m, d, rng)
        check(
            np.allclose(basis.basis.T @ basis.basis, np.eye(d), atol=1e-9),
            f"basis {index} is not orthonormal",
        )
        y = rng.standard_normal(m)
        projected = orthogonalProject(basis, y)
        check(
            np.linalg.norm(orthogonalProject(basis, projected) - projected) <= 1e-9,
            f"projector {index} is not idempotent",
        )
        residual = y - projected
        check(
            math.isclose(
                float(y @ y),
                float(projected @ projected + residual @ residual),
                rel_tol=1e-9,
                abs_tol=1e-12,
            ),
            f"projector {index}: squared norms of the parts do not add up",
        )

    for index in range(count):
        X, y = randomSubspaceInstance(rng, 5, 3, 2)
        cloud = PointCloud(data=np.column_stack([y, X]))
        rotation = randomOrthonormalBasis(3, 3, rng).basis
        original = codePointCloud(cloud, "bp", SolverSettings())
        rotated = codePointCloud(
            PointCloud(data=rotation @ cloud.data), "bp", SolverSettings()
        )
        check(
            np.allclose(original.matrix, rotated.matrix, atol=rotationTolerance),
            f"rotation {index} changed the basis pursuit codes",
        )
    return report


def runVerify(
    suites: list[str], count: int | None = None, seed: int = 0
) -> list[SuiteReport]:
    reports = []
    for name in suites:
        try:
            suite = getSuite(name)
        except KeyError as e:
            raise UsageError(
                f"unknown suite {name!r}, choose from {registeredNames('suite')}"
            ) from e
        report = suite(count, seed)
        logger.info(
            f"{name}: {report.checks} checks, {len(report.violations)} violation(s)"
        )
        for violation in report.violations:
            logger.error(f"{name}: {violation}")
        reports.append(report)
    return reports
