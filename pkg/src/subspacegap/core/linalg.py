from __future__ import annotations

import logging
import math

import numpy as np

from .classes import PointCloud, SubspaceBasis
from .errors import DegenerateInputError, PreconditionError

logger = logging.getLogger(__name__)


unitTolerance = 1e-6
rankTolerance = 1e-10


def angle(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise PreconditionError(f"shape mismatch: {x.shape} vs {y.shape}")
    for name, v in [("x", x), ("y", y)]:
        norm = np.linalg.norm(v)
        if abs(norm - 1) > unitTolerance:
            raise PreconditionError(f"{name} is not a unit vector (norm {norm})")
    return math.acos(min(1.0, max(-1.0, float(x @ y))))


def normalizeColumns(matrix: np.ndarray) -> PointCloud:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise PreconditionError(f"expected a 2-d matrix, got shape {matrix.shape}")
    norms = np.linalg.norm(matrix, axis=0)
    zeroColumns = np.flatnonzero(norms == 0)
    if len(zeroColumns):
        columnIndex = int(zeroColumns[0])
        raise DegenerateInputError(
            f"column {columnIndex} is zero and cannot be normalized",
            columnIndex=columnIndex,
        )
    return PointCloud(data=matrix / norms)


def orthogonalProject(basis: SubspaceBasis, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (basis.m,):
        raise PreconditionError(
            f"vector of shape {y.shape} does not live in R^{basis.m}"
        )
    return basis.basis @ (basis.basis.T @ y)


def fitPrincipalBasis(matrix: np.ndarray, d: int) -> SubspaceBasis:
    """Return the d-dimensional subspace capturing the most energy of the
    columns of `matrix`, i.e. its top-d left singular vectors.

    When d exceeds the numerical rank, the basis is completed with left
    singular vectors belonging to (numerically) zero singular values; this
    is noted in the diagnostics.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise PreconditionError(f"expected a 2-d matrix, got shape {matrix.shape}")
    m, K = matrix.shape
    if not 1 <= d <= m:
        raise PreconditionError(f"dimension {d} is out of range [1, {m}]")

    U, singularValues, _ = np.linalg.svd(matrix, full_matrices=True)
    diagnostics = []
    top = singularValues[0] if len(singularValues) else 0.0
    rank = int(np.sum(singularValues > rankTolerance * max(top, 1.0)))
    if d > rank:
        message = f"requested dimension {d} exceeds rank {rank}; basis padded"
        logger.debug(message)
        diagnostics.append(message)
    return SubspaceBasis(basis=U[:, :d].copy(), diagnostics=diagnostics)


def randomOrthonormalBasis(m: int, d: int, seed) -> SubspaceBasis:
    if not 1 <= d <= m:
        raise PreconditionError(f"dimension {d} is out of range [1, {m}]")
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((m, d)))
    # fix the sign ambiguity of QR so the result depends on the seed only
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1
    return SubspaceBasis(basis=Q * signs)


def capturedEnergy(basis: SubspaceBasis, matrix: np.ndarray) -> float:
    return float(np.sum((basis.basis.T @ matrix) ** 2))
