from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import linprog

from .classes import (
    CoefficientMatrix,
    ErrorDescription,
    Estimator,
    PenaltyForm,
    PointCloud,
    SolverSettings,
    SparseSolution,
    supportFromCoefficients,
)
from .errors import PreconditionError, SubspaceGapError
from .threading import mapInThreads

logger = logging.getLogger(__name__)


class InfeasibleError(SubspaceGapError):
    def __init__(self, message: str, bestResidual: float):
        super().__init__(message)
        self.bestResidual = bestResidual


rankTolerance = 1e-10
feasibilitySlack = 1e-6
balanceFactor = 10.0
balanceInterval = 10
# the penalty is only rebalanced during warm-up, within these bounds
balanceIterations = 500
minimumRho, maximumRho = 1e-4, 1e4
certificateTolerance = 1e-8


def _checkProblem(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise PreconditionError(
            f"dictionary of shape {X.shape} does not match vector of shape {y.shape}"
        )
    return X, y


def _makeSolution(
    X: np.ndarray,
    y: np.ndarray,
    coefficients: np.ndarray,
    settings: SolverSettings,
    **kwargs,
) -> SparseSolution:
    return SparseSolution(
        coefficients=coefficients,
        support=supportFromCoefficients(coefficients, settings.supportEps),
        residualNorm=float(np.linalg.norm(X @ coefficients - y)),
        **kwargs,
    )


def _zeroSolution(X, y, settings, **diagnostics) -> SparseSolution:
    return _makeSolution(
        X, y, np.zeros(X.shape[1]), settings, diagnostics=dict(diagnostics)
    )


def solveBasisPursuit(
    X: np.ndarray, y: np.ndarray, settings: SolverSettings
) -> SparseSolution:
    """Minimize ‖c‖₁ subject to Xc = y.

    Solved as a linear program on the split c = u - v, u, v ≥ 0, with the
    equality constraints restricted to an orthonormal basis of the column
    space of X, so the constraint rows are independent. Dual simplex returns
    a vertex, i.e. a solution supported on linearly independent columns.
    """
    X, y = _checkProblem(X, y)
    m, n = X.shape

    if n == 0:
        residual = float(np.linalg.norm(y))
        if residual > settings.tolPrimal:
            raise InfeasibleError(
                f"empty dictionary cannot represent y (residual {residual:.3g})",
                bestResidual=residual,
            )
        return _zeroSolution(X, y, settings)

    leastSquares, *_ = np.linalg.lstsq(X, y, rcond=None)
    bestResidual = float(np.linalg.norm(X @ leastSquares - y))
    if bestResidual > settings.tolPrimal:
        raise InfeasibleError(
            f"y is outside the span of the dictionary (residual {bestResidual:.3g})",
            bestResidual=bestResidual,
        )

    U, singularValues, _ = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(singularValues > rankTolerance * max(singularValues[0], 1.0)))
    if rank == 0:
        return _zeroSolution(X, y, settings)
    rowBasis = U[:, :rank]
    A = rowBasis.T @ X
    b = rowBasis.T @ y

    result = linprog(
        np.ones(2 * n),
        A_eq=np.hstack([A, -A]),
        b_eq=b,
        bounds=(0, None),
        method="highs-ds",
    )
    if result.status != 0 or result.x is None:
        logger.debug(f"linear program did not finish: {result.message}")
        return _makeSolution(
            X,
            y,
            leastSquares,
            settings,
            converged=False,
            diagnostics={"linprogStatus": int(result.status)},
        )
    coefficients = result.x[:n] - result.x[n:]
    return _makeSolution(
        X,
        y,
        coefficients,
        settings,
        iterations=int(getattr(result, "nit", 0)),
        diagnostics={"method": "highs-ds"},
    )


def softThreshold(v: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


def _projectOntoBall(radius: float) -> Callable[[np.ndarray, float], np.ndarray]:
    def project(v, rho):
        norm = np.linalg.norm(v)
        return v if norm <= radius else v * (radius / norm)

    return project


def _blockShrink(weight: float) -> Callable[[np.ndarray, float], np.ndarray]:
    def shrink(v, rho):
        norm = np.linalg.norm(v)
        threshold = weight / rho
        return np.zeros_like(v) if norm <= threshold else v * (1 - threshold / norm)

    return shrink


class _WoodburySolver:
    """Applies (I + XᵀX)⁻¹ through a Cholesky factor of I + XXᵀ."""

    def __init__(self, X: np.ndarray):
        self.X = X
        self.factor = cho_factor(np.eye(X.shape[0]) + X @ X.T)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return rhs - self.X.T @ cho_solve(self.factor, self.X @ rhs)


def _admm(
    X: np.ndarray,
    y: np.ndarray,
    residualProx: Callable[[np.ndarray, float], np.ndarray],
    settings: SolverSettings,
) -> tuple[np.ndarray, int, bool]:
    # min ‖a‖₁ + g(r)  s.t.  c = a,  Xc - y = r
    m, n = X.shape
    solver = _WoodburySolver(X)
    rho = 1.0
    a = np.zeros(n)
    r = -y.copy()
    u = np.zeros(n)
    v = np.zeros(m)
    absoluteTolerance = settings.tolPrimal * 1e-2

    for iteration in range(1, settings.maxIter + 1):
        c = solver.solve((a - u) + X.T @ (y + r - v))
        Xc = X @ c
        previousA, previousR = a, r
        a = softThreshold(c + u, 1 / rho)
        r = residualProx(Xc - y + v, rho)
        u = u + c - a
        v = v + Xc - y - r

        primal = math.sqrt(
            np.sum((c - a) ** 2) + np.sum((Xc - y - r) ** 2)
        )
        dual = rho * np.linalg.norm((a - previousA) + X.T @ (r - previousR))
        primalBound = math.sqrt(n + m) * absoluteTolerance + settings.tolPrimal * max(
            math.sqrt(np.sum(c**2) + np.sum(Xc**2)),
            math.sqrt(np.sum(a**2) + np.sum(r**2)),
            np.linalg.norm(y),
        )
        dualBound = math.sqrt(n) * absoluteTolerance + settings.tolDual * rho * (
            np.linalg.norm(u + X.T @ v)
        )
        if primal <= primalBound and dual <= dualBound:
            return a, iteration, True

        if iteration <= balanceIterations and iteration % balanceInterval == 0:
            if primal > balanceFactor * dual and rho < maximumRho:
                rho *= 2
                u /= 2
                v /= 2
            elif dual > balanceFactor * primal and rho > minimumRho:
                rho /= 2
                u *= 2
                v *= 2

    return a, settings.maxIter, False


def _polishOnSupport(
    X: np.ndarray, y: np.ndarray, coefficients: np.ndarray, bound: float, settings
) -> np.ndarray | None:
    # exact minimizer of ‖c‖₁ on a fixed sign pattern with ‖Xc - y‖² = bound
    support = supportFromCoefficients(coefficients, settings.supportEps)
    if not support or len(support) > X.shape[0]:
        return None
    XS = X[:, support]
    G = XS.T @ XS
    if np.linalg.cond(G) > 1 / rankTolerance:
        return None
    signs = np.sign(coefficients[support])
    leastSquares = np.linalg.solve(G, XS.T @ y)
    baseResidual = float(np.sum((XS @ leastSquares - y) ** 2))
    Ginvs = np.linalg.solve(G, signs)
    curvature = float(signs @ Ginvs)
    if bound <= baseResidual or curvature <= 0:
        return None
    t = math.sqrt((bound - baseResidual) / curvature)
    polished = leastSquares - t * Ginvs
    if np.any(np.sign(polished) != signs):
        return None
    result = np.zeros_like(coefficients)
    result[support] = polished
    return result


def _restoreFeasibility(
    X: np.ndarray, y: np.ndarray, coefficients: np.ndarray, bound: float
) -> np.ndarray:
    # move toward the least-squares point until the residual bound holds
    leastSquares, *_ = np.linalg.lstsq(X, y, rcond=None)
    if np.sum((X @ leastSquares - y) ** 2) > bound:
        return coefficients
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        blend = (1 - mid) * coefficients + mid * leastSquares
        if np.sum((X @ blend - y) ** 2) <= bound:
            hi = mid
        else:
            lo = mid
    return (1 - hi) * coefficients + hi * leastSquares


def solveBasisPursuitDenoising(
    X: np.ndarray, y: np.ndarray, settings: SolverSettings
) -> SparseSolution:
    """Minimize ‖c‖₁ subject to ‖Xc - y‖₂² ≤ λ.

    λ is the bound on the squared residual, taken literally.
    """
    X, y = _checkProblem(X, y)
    if not settings.lam > 0:
        raise PreconditionError("basis pursuit denoising needs lambda > 0")
    bound = settings.lam
    if float(y @ y) <= bound or X.shape[1] == 0:
        return _zeroSolution(X, y, settings, shortCircuit="zero is feasible")

    coefficients, iterations, converged = _admm(
        X, y, _projectOntoBall(math.sqrt(bound)), settings
    )
    diagnostics = {"residualBound": bound}
    polished = _polishOnSupport(X, y, coefficients, bound, settings)
    if polished is not None and np.abs(polished).sum() <= np.abs(
        coefficients
    ).sum() * (1 + 1e-4):
        coefficients = polished
        diagnostics["polished"] = True
    elif np.sum((X @ coefficients - y) ** 2) > bound + feasibilitySlack:
        coefficients = _restoreFeasibility(X, y, coefficients, bound)
        diagnostics["feasibilityRestored"] = True

    residualSquared = float(np.sum((X @ coefficients - y) ** 2))
    if residualSquared > bound + feasibilitySlack:
        converged = False
    return _makeSolution(
        X,
        y,
        coefficients,
        settings,
        iterations=iterations,
        converged=converged,
        diagnostics=diagnostics,
    )


def lassoObjective(
    X: np.ndarray, y: np.ndarray, coefficients: np.ndarray, lam: float, penaltyForm
) -> float:
    residual = np.linalg.norm(X @ coefficients - y)
    if penaltyForm == PenaltyForm.SQUARED:
        residual = residual**2
    return float(np.abs(coefficients).sum() + lam * residual)


def solveLasso(
    X: np.ndarray,
    y: np.ndarray,
    settings: SolverSettings,
    penaltyForm: PenaltyForm | None = None,
) -> SparseSolution:
    """Minimize ‖c‖₁ + λ‖Xc - y‖₂ (unsquared, the default) or
    ‖c‖₁ + λ‖Xc - y‖₂² (squared).

    For the squared form, optimality is certified by
    ‖Xᵀ(y - Xc)‖_∞ ≤ 1/(2λ); the excess is reported as
    `certificateViolation` in the diagnostics.
    """
    X, y = _checkProblem(X, y)
    if not settings.lam > 0:
        raise PreconditionError("the lasso needs lambda > 0")
    if penaltyForm is None:
        penaltyForm = settings.penaltyForm
    penaltyForm = PenaltyForm(penaltyForm)
    lam = settings.lam
    diagnostics = {"penaltyForm": penaltyForm.value}

    yNorm = float(np.linalg.norm(y))
    correlation = float(np.abs(X.T @ y).max(initial=0.0))
    if penaltyForm == PenaltyForm.UNSQUARED:
        zeroIsOptimal = yNorm == 0 or lam * correlation <= yNorm
    else:
        zeroIsOptimal = 2 * lam * correlation <= 1
    if zeroIsOptimal:
        diagnostics["shortCircuit"] = "zero is optimal"
        return _zeroSolution(X, y, settings, **diagnostics)

    if penaltyForm == PenaltyForm.UNSQUARED:
        coefficients, iterations, converged = _solveUnsquaredLasso(
            X, y, lam, settings, diagnostics
        )
    else:
        coefficients, iterations, converged = _fista(X, y, lam, settings)
        gradient = X.T @ (y - X @ coefficients)
        diagnostics["scaling"] = "‖Xᵀ(y - Xc)‖_∞ ≤ 1/(2λ)"
        diagnostics["certificateViolation"] = max(
            0.0, float(np.abs(gradient).max()) - 1 / (2 * lam)
        )

    diagnostics["objective"] = lassoObjective(X, y, coefficients, lam, penaltyForm)
    return _makeSolution(
        X,
        y,
        coefficients,
        settings,
        iterations=iterations,
        converged=converged,
        diagnostics=diagnostics,
    )


def _certifiedLasso(
    X: np.ndarray, y: np.ndarray, lam: float, coefficients: np.ndarray, settings
) -> np.ndarray | None:
    """Return the exact minimizer of ‖c‖₁ + λ‖Xc - y‖₂ on the sign pattern
    of `coefficients`, or None when it is not a global minimizer.

    Optimality is certified by a dual vector ν with X_Sᵀν = sign(c_S),
    ‖ν‖₂ ≤ λ and ‖Xᵀν‖_∞ ≤ 1.
    """
    support = supportFromCoefficients(coefficients, settings.supportEps)
    if not support or len(support) > X.shape[0]:
        return None
    XS = X[:, support]
    G = XS.T @ XS
    if np.linalg.cond(G) > 1 / rankTolerance:
        return None
    signs = np.sign(coefficients[support])
    leastSquares = np.linalg.solve(G, XS.T @ y)
    baseResidual = float(np.linalg.norm(XS @ leastSquares - y))
    Ginvs = np.linalg.solve(G, signs)
    curvature = float(signs @ Ginvs)
    if not lam * lam > curvature:
        return None

    if baseResidual <= settings.tolPrimal * max(1.0, float(np.linalg.norm(y))):
        polished = leastSquares
        nu = XS @ Ginvs
    else:
        # stationary point: λ(y - Xc)/‖y - Xc‖ matches the signs on S
        step = baseResidual / math.sqrt(lam * lam - curvature)
        polished = leastSquares - step * Ginvs
        residual = y - XS @ polished
        nu = lam * residual / np.linalg.norm(residual)
    if np.any(np.sign(polished) != signs):
        return None
    if float(np.abs(X.T @ nu).max()) > 1 + certificateTolerance:
        return None
    result = np.zeros(X.shape[1])
    result[support] = polished
    return result


def _solveUnsquaredLasso(
    X: np.ndarray, y: np.ndarray, lam: float, settings, diagnostics: dict
) -> tuple[np.ndarray, int, bool]:
    # an exact fit is optimal whenever its basis pursuit pattern certifies
    try:
        exactFit = solveBasisPursuit(X, y, settings)
    except InfeasibleError:
        exactFit = None
    if exactFit is not None and exactFit.converged:
        certified = _certifiedLasso(X, y, lam, exactFit.coefficients, settings)
        if certified is not None:
            diagnostics["certified"] = "basis pursuit"
            return certified, 0, True

    # with the residual scaled by λ both proximal steps have unit weight
    coefficients, iterations, converged = _admm(
        lam * X, lam * y, _blockShrink(1.0), settings
    )
    certified = _certifiedLasso(X, y, lam, coefficients, settings)
    if certified is not None:
        diagnostics["certified"] = "admm"
        return certified, iterations, True
    return coefficients, iterations, converged


def _fista(X, y, lam, settings) -> tuple[np.ndarray, int, bool]:
    # accelerated proximal gradient on f(c) = λ‖Xc - y‖², with backtracking
    n = X.shape[1]

    def f(c):
        return lam * float(np.sum((X @ c - y) ** 2))

    def gradient(c):
        return 2 * lam * (X.T @ (X @ c - y))

    lipschitz = 1.0
    c = np.zeros(n)
    z = c.copy()
    t = 1.0
    for iteration in range(1, settings.maxIter + 1):
        gz = gradient(z)
        fz = f(z)
        while True:
            candidate = softThreshold(z - gz / lipschitz, 1 / lipschitz)
            step = candidate - z
            if f(candidate) <= fz + gz @ step + lipschitz / 2 * (step @ step):
                break
            lipschitz *= 2
        nextT = (1 + math.sqrt(1 + 4 * t * t)) / 2
        z = candidate + ((t - 1) / nextT) * (candidate - c)
        # gradient mapping norm bounds the optimality violation at the candidate
        mapping = lipschitz * np.linalg.norm(step)
        c, t = candidate, nextT
        if mapping <= settings.tolDual:
            return c, iteration, True
    return c, settings.maxIter, False


def solveOMP(
    X: np.ndarray, y: np.ndarray, kMax: int, residualTol: float
) -> SparseSolution:
    X, y = _checkProblem(X, y)
    n = X.shape[1]
    if not 0 <= kMax <= n:
        raise PreconditionError(f"kMax must be in [0, {n}], got {kMax}")

    support: list[int] = []
    coefficients = np.zeros(n)
    residual = y.copy()
    while len(support) < kMax and np.linalg.norm(residual) > residualTol:
        correlation = np.abs(X.T @ residual)
        correlation[support] = -np.inf
        best = int(np.argmax(correlation))
        if correlation[best] <= rankTolerance:
            break
        support.append(best)
        refit, *_ = np.linalg.lstsq(X[:, support], y, rcond=None)
        coefficients = np.zeros(n)
        coefficients[support] = refit
        residual = y - X @ coefficients

    residualNorm = float(np.linalg.norm(residual))
    return SparseSolution(
        coefficients=coefficients,
        support=sorted(support),
        residualNorm=residualNorm,
        iterations=len(support),
        converged=residualNorm <= residualTol,
        diagnostics={"selectionOrder": list(support)},
    )


def _ompWithSettings(X, y, settings: SolverSettings) -> SparseSolution:
    kMax = settings.maxAtoms
    if kMax is None:
        kMax = min(X.shape)
    return solveOMP(X, y, min(kMax, X.shape[1]), settings.residualTol)


_estimators: dict[Estimator, Callable[..., SparseSolution]] = {
    Estimator.BP: solveBasisPursuit,
    Estimator.BPDN: solveBasisPursuitDenoising,
    Estimator.LASSO: solveLasso,
    Estimator.OMP: _ompWithSettings,
}


def solveFor(
    estimator: Estimator, X: np.ndarray, y: np.ndarray, settings: SolverSettings
) -> SparseSolution:
    return _estimators[Estimator(estimator)](X, y, settings)


def expandSolution(solution: SparseSolution, selfIndex: int) -> SparseSolution:
    """Re-index a solution against X without column `selfIndex` into
    full length, with an exact zero at `selfIndex`."""
    coefficients = np.insert(solution.coefficients, selfIndex, 0.0)
    support = [i if i < selfIndex else i + 1 for i in solution.support]
    return SparseSolution(
        coefficients=coefficients,
        support=support,
        residualNorm=solution.residualNorm,
        iterations=solution.iterations,
        converged=solution.converged,
        selfIndex=selfIndex,
        diagnostics=solution.diagnostics,
    )


def codeColumn(
    cloud: PointCloud, index: int, estimator: Estimator, settings: SolverSettings
) -> SparseSolution:
    solution = solveFor(
        estimator, cloud.withoutColumn(index), cloud.column(index), settings
    )
    return expandSolution(solution, index)


def codePointCloud(
    cloud: PointCloud,
    estimator: Estimator,
    settings: SolverSettings,
    workers: int = 1,
) -> CoefficientMatrix:
    if cloud.N < 2:
        raise PreconditionError(f"need at least 2 points, got {cloud.N}")
    estimator = Estimator(estimator)

    def codeOne(index):
        try:
            return codeColumn(cloud, index, estimator, settings), None
        except (SubspaceGapError, np.linalg.LinAlgError) as e:
            return None, e

    results = mapInThreads(codeOne, range(cloud.N), workers)

    matrix = np.zeros((cloud.N, cloud.N))
    warnings = []
    for index, (solution, error) in enumerate(results):
        if error is not None:
            logger.warning(
                f"{estimator.value}: coding point {index} failed: {error}"
            )
            warnings.append(
                ErrorDescription(
                    message=str(error), type=type(error).__name__, index=index
                )
            )
            continue
        if not solution.converged:
            logger.debug(f"{estimator.value}: point {index} did not converge")
            warnings.append(
                ErrorDescription(
                    message=f"not converged after {solution.iterations} iterations",
                    type="NotConverged",
                    index=index,
                )
            )
        matrix[:, index] = solution.coefficients
    return CoefficientMatrix(matrix=matrix, warnings=warnings)
