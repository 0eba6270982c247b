import math

import numpy as np
import pytest

from subspacegap.core.classes import (
    AffinityMatrix,
    ClusterLabels,
    CoefficientMatrix,
    Estimator,
    PointCloud,
    SolverSettings,
    XiReading,
)
from subspacegap.core.errors import PreconditionError
from subspacegap.core.graph import (
    buildAffinity,
    clusteringError,
    connectivityXi,
    spectralCluster,
)
from subspacegap.core.linalg import normalizeColumns, randomOrthonormalBasis
from subspacegap.core.solvers import codePointCloud

xiExample = np.array(
    [[0, 2, 1, 0], [2, 0, 0, 1], [1, 0, 0, 2], [0, 1, 2, 0]], dtype=float
)


def _coefficients(entries, n=3):
    matrix = np.zeros((n, n))
    for (i, j), value in entries.items():
        matrix[i, j] = value
    return CoefficientMatrix(matrix=matrix)


def test_buildAffinity_zero():
    assert not np.any(buildAffinity(_coefficients({})).matrix)


def test_buildAffinity_absoluteSymmetric():
    A = buildAffinity(_coefficients({(0, 1): -0.5})).matrix
    assert A[0, 1] == 0.5 and A[1, 0] == 0.5


def test_buildAffinity_sumOfMagnitudes():
    A = buildAffinity(_coefficients({(0, 1): 0.3, (1, 0): 0.4})).matrix
    assert A[0, 1] == pytest.approx(0.7)
    assert np.array_equal(A, A.T)


def test_coefficientMatrix_needsZeroDiagonal():
    with pytest.raises(PreconditionError):
        CoefficientMatrix(matrix=np.eye(2))


def test_affinityMatrix_needsSymmetry():
    with pytest.raises(PreconditionError):
        AffinityMatrix(matrix=np.array([[0.0, 1.0], [0.5, 0.0]]))


xiTestData = [
    (np.kron(np.eye(2), np.ones((2, 2))) - np.eye(4), 2, 2, 0.0),
    (np.kron(1 - np.eye(2), np.ones((2, 2))), 2, 2, 1.0),
    (xiExample, 2, 2, 1 / 3),
    (np.zeros((3, 3)), 1, 2, 0.0),
]


@pytest.mark.parametrize("matrix, n1, n2, expectedResult", xiTestData)
def test_connectivityXi(matrix, n1, n2, expectedResult):
    xi = connectivityXi(AffinityMatrix(matrix=matrix), n1, n2)
    assert xi == pytest.approx(expectedResult)


def test_connectivityXi_readings():
    # row 0: cross 1 of 3, row 1: cross 0 of 2, row 2: cross 1 of 1, row 3: empty
    matrix = np.array(
        [[0, 2, 1, 0], [2, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0]], dtype=float
    )
    affinity = AffinityMatrix(matrix=matrix)
    allPoints = connectivityXi(affinity, 2, 2, XiReading.ALL_POINTS)
    firstCluster = connectivityXi(affinity, 2, 2, "first-cluster")
    assert allPoints == pytest.approx((1 / 3 + 0 + 1 + 0) / 4)
    assert firstCluster == pytest.approx((1 / 3 + 0) / 2)


def test_connectivityXi_zeroRowsLogged(caplog):
    matrix = np.zeros((3, 3))
    matrix[0, 2] = matrix[2, 0] = 1.0
    with caplog.at_level("WARNING"):
        xi = connectivityXi(AffinityMatrix(matrix=matrix), 2, 1)
    assert xi == pytest.approx(2 / 3)
    assert "without affinity mass" in caplog.text


def test_connectivityXi_badBlocks():
    with pytest.raises(PreconditionError):
        connectivityXi(AffinityMatrix(matrix=xiExample), 1, 2)


def test_connectivityXi_invariances(rng):
    for _ in range(200):
        n1, n2 = (int(n) for n in rng.integers(1, 6, 2))
        N = n1 + n2
        C = rng.random((N, N)) * (rng.random((N, N)) < 0.5)
        np.fill_diagonal(C, 0)
        affinity = buildAffinity(CoefficientMatrix(matrix=C))
        xi = connectivityXi(affinity, n1, n2)
        assert 0 <= xi <= 1
        scaled = AffinityMatrix(matrix=affinity.matrix * rng.uniform(0.01, 100))
        assert connectivityXi(scaled, n1, n2) == pytest.approx(xi, abs=1e-12)
        order = np.concatenate(
            [rng.permutation(n1), n1 + rng.permutation(n2)]
        )
        permuted = AffinityMatrix(matrix=affinity.matrix[np.ix_(order, order)])
        assert connectivityXi(permuted, n1, n2) == pytest.approx(xi, abs=1e-12)


def _blockDiagonal(rng, sizes):
    N = sum(sizes)
    A = np.zeros((N, N))
    start = 0
    for size in sizes:
        block = rng.uniform(0.5, 1.0, (size, size))
        block = block + block.T
        np.fill_diagonal(block, 0)
        A[start : start + size, start : start + size] = block
        start += size
    return AffinityMatrix(matrix=A)


def test_spectralCluster_blocks(rng):
    affinity = _blockDiagonal(rng, [4, 6])
    labels = spectralCluster(affinity, 2, seed=0)
    truth = np.repeat([0, 1], [4, 6])
    assert labels.labels.tolist() == truth.tolist()
    assert labels.k == 2
    assert labels.isolated == []


def test_spectralCluster_scaleInvariant(rng):
    affinity = _blockDiagonal(rng, [5, 5])
    affinity.matrix[0, 7] = affinity.matrix[7, 0] = 0.1
    labels = spectralCluster(affinity, 2, seed=3)
    scaled = spectralCluster(AffinityMatrix(matrix=affinity.matrix * 7.5), 2, seed=3)
    assert clusteringError(labels, scaled) == 0


def test_spectralCluster_eachPointItsOwnCluster(rng):
    labels = spectralCluster(_blockDiagonal(rng, [2, 3]), 5)
    assert sorted(labels.labels.tolist()) == [0, 1, 2, 3, 4]


def test_spectralCluster_isolatedVertex(rng):
    affinity = _blockDiagonal(rng, [4, 4, 1])
    labels = spectralCluster(affinity, 2, seed=0)
    assert labels.isolated == [8]
    assert len(labels.labels) == 9
    assert set(labels.labels.tolist()) <= {0, 1}
    assert clusteringError(labels.labels[:8], np.repeat([0, 1], 4)) == 0


@pytest.mark.parametrize("k", [1, 11])
def test_spectralCluster_badK(rng, k):
    with pytest.raises(PreconditionError):
        spectralCluster(_blockDiagonal(rng, [5, 5]), k)


clusteringErrorTestData = [
    ([0, 0, 1, 1], [0, 0, 1, 1], 0.0),
    ([1, 1, 0, 0], [0, 0, 1, 1], 0.0),
    ([0] * 5 + [1] * 5, [0] * 4 + [1] * 6, 0.1),
    ([0, 0, 0, 0], [0, 0, 1, 1], 0.5),
]


@pytest.mark.parametrize("predicted, truth, expectedResult", clusteringErrorTestData)
def test_clusteringError(predicted, truth, expectedResult):
    predictedLabels = ClusterLabels(labels=predicted, k=2)
    assert clusteringError(predictedLabels, truth) == pytest.approx(expectedResult)


def test_clusteringError_lengthMismatch():
    with pytest.raises(PreconditionError):
        clusteringError([0, 1], [0, 1, 1])


@pytest.mark.parametrize("seed", range(10))
def test_separatedSubspacesClusterExactly(seed):
    rng = np.random.default_rng(seed)
    frame = randomOrthonormalBasis(20, 6, rng).basis
    first = frame[:, :3]
    # every principal angle between the two subspaces is 60 degrees
    second = math.cos(math.pi / 3) * first + math.sin(math.pi / 3) * frame[:, 3:]
    cosines = np.linalg.svd(first.T @ second, compute_uv=False)
    assert np.degrees(np.arccos(min(1.0, cosines.max()))) >= 60 - 1e-9
    parts = [basis @ rng.standard_normal((3, 20)) for basis in (first, second)]
    cloud = normalizeColumns(np.hstack(parts))
    cloud = PointCloud(data=cloud.data, labels=np.repeat([0, 1], 20))
    coefficients = codePointCloud(cloud, Estimator.BPDN, SolverSettings(lam=0.01))
    labels = spectralCluster(buildAffinity(coefficients), 2, seed=seed)
    assert clusteringError(labels, cloud.labels) == 0
