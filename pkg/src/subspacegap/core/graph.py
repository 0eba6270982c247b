from __future__ import annotations

import logging

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import KMeans
from sklearn.preprocessing import normalize

from .classes import AffinityMatrix, ClusterLabels, CoefficientMatrix, XiReading
from .errors import PreconditionError

logger = logging.getLogger(__name__)


kMeansRestarts = 20
kMeansTolerance = 1e-8


def buildAffinity(
    coefficients: CoefficientMatrix, blockSizes: tuple[int, int] | None = None
) -> AffinityMatrix:
    magnitudes = np.abs(coefficients.matrix)
    return AffinityMatrix(matrix=magnitudes + magnitudes.T, blockSizes=blockSizes)


def connectivityXi(
    affinity: AffinityMatrix,
    n1: int,
    n2: int,
    reading: XiReading = XiReading.ALL_POINTS,
) -> float:
    """Average, over points, of the fraction of a point's affinity mass
    that goes to the other cluster. The first n1 rows/columns form
    cluster 1, the remaining n2 cluster 2.

    With `XiReading.FIRST_CLUSTER` only the rows of cluster 1 are averaged.
    Rows without any mass contribute 0.
    """
    A = affinity.matrix
    N = affinity.N
    if n1 < 0 or n2 < 0 or n1 + n2 != N:
        raise PreconditionError(f"block sizes {n1} + {n2} do not add up to {N}")
    reading = XiReading(reading)

    rowMass = A.sum(axis=1)
    crossMass = np.concatenate([A[:n1, n1:].sum(axis=1), A[n1:, :n1].sum(axis=1)])
    if reading == XiReading.FIRST_CLUSTER:
        rowMass, crossMass = rowMass[:n1], crossMass[:n1]
    if not len(rowMass):
        return 0.0

    zeroRows = rowMass == 0
    if zeroRows.all():
        logger.warning("affinity matrix has no mass; connectivity defined as 0")
        return 0.0
    if zeroRows.any():
        logger.warning(
            f"{int(zeroRows.sum())} row(s) without affinity mass contribute 0: "
            f"{np.flatnonzero(zeroRows).tolist()}"
        )
    ratios = np.divide(
        crossMass, rowMass, out=np.zeros_like(rowMass), where=~zeroRows
    )
    return float(np.clip(ratios.mean(), 0.0, 1.0))


def _canonicalLabels(labels: np.ndarray) -> np.ndarray:
    # renumber clusters in order of first appearance
    mapping: dict[int, int] = {}
    for label in labels:
        mapping.setdefault(int(label), len(mapping))
    return np.array([mapping[int(label)] for label in labels], dtype=int)


def spectralEmbedding(A: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    degrees = A.sum(axis=1)
    isolated = degrees == 0
    inverseRoot = np.zeros_like(degrees)
    inverseRoot[~isolated] = 1 / np.sqrt(degrees[~isolated])
    laplacian = np.eye(len(A)) - inverseRoot[:, None] * A * inverseRoot[None, :]
    _, eigenvectors = np.linalg.eigh(laplacian)
    return normalize(eigenvectors[:, :k]), isolated


def spectralCluster(affinity: AffinityMatrix, k: int, seed: int = 0) -> ClusterLabels:
    N = affinity.N
    if not 2 <= k <= N:
        raise PreconditionError(f"cluster count {k} is out of range [2, {N}]")
    if k == N:
        return ClusterLabels(labels=np.arange(N), k=k)

    embedding, isolated = spectralEmbedding(affinity.matrix, k)
    isolatedIndices = np.flatnonzero(isolated).tolist()
    fitRows = ~isolated if (~isolated).sum() >= k else np.ones(N, dtype=bool)
    if isolatedIndices:
        logger.warning(
            f"{len(isolatedIndices)} isolated vertices assigned to the nearest centroid"
        )

    kmeans = KMeans(
        n_clusters=k, n_init=kMeansRestarts, tol=kMeansTolerance, random_state=seed
    )
    kmeans.fit(embedding[fitRows])
    labels = kmeans.predict(embedding)
    return ClusterLabels(labels=_canonicalLabels(labels), k=k, isolated=isolatedIndices)


def clusteringError(predicted, truth) -> float:
    """Smallest fraction of mislabelled points over all matchings of
    predicted clusters to true clusters."""
    predicted = np.asarray(getattr(predicted, "labels", predicted), dtype=int)
    truth = np.asarray(getattr(truth, "labels", truth), dtype=int)
    if predicted.shape != truth.shape:
        raise PreconditionError(
            f"label lengths differ: {predicted.shape} vs {truth.shape}"
        )
    if not len(truth):
        return 0.0
    predictedIds, predictedIndex = np.unique(predicted, return_inverse=True)
    truthIds, truthIndex = np.unique(truth, return_inverse=True)
    confusion = np.zeros((len(predictedIds), len(truthIds)), dtype=int)
    np.add.at(confusion, (predictedIndex, truthIndex), 1)
    rows, columns = linear_sum_assignment(-confusion)
    matched = confusion[rows, columns].sum()
    return float(1 - matched / len(truth))
