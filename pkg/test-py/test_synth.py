import math

import numpy as np
import pytest

from subspacegap.core.classes import SweepConfig
from subspacegap.core.errors import PreconditionError
from subspacegap.core.linalg import angle
from subspacegap.core.synth import (
    generatePlanarArcs,
    generateTwoClusterSphere,
    trialSeedFor,
    withDistractorCluster,
)


@pytest.fixture
def config():
    return SweepConfig(pointsPerCluster=20, ambientDim=20, subspaceDim=3)


def test_generateTwoClusterSphere_shape(config):
    cloud = generateTwoClusterSphere(config, 30.0, 0.0, trialSeedFor(0, 30.0, 0.0, 0))
    assert cloud.data.shape == (20, 40)
    assert cloud.labels.tolist() == [0] * 20 + [1] * 20
    assert np.linalg.norm(cloud.data, axis=0) == pytest.approx(np.ones(40))
    assert np.linalg.matrix_rank(cloud.data, tol=1e-9) == 3


def test_generateTwoClusterSphere_noiseLeavesSubspace(config):
    cloud = generateTwoClusterSphere(config, 30.0, 0.03, trialSeedFor(0, 30.0, 0.03, 0))
    assert np.linalg.norm(cloud.data, axis=0) == pytest.approx(np.ones(40))
    assert np.linalg.matrix_rank(cloud.data, tol=1e-9) > 3


def test_generateTwoClusterSphere_deterministic(config):
    first = generateTwoClusterSphere(config, 45.0, 0.02, trialSeedFor(7, 45.0, 0.02, 3))
    second = generateTwoClusterSphere(config, 45.0, 0.02, trialSeedFor(7, 45.0, 0.02, 3))
    other = generateTwoClusterSphere(config, 45.0, 0.02, trialSeedFor(7, 45.0, 0.02, 4))
    assert np.array_equal(first.data, second.data)
    assert not np.array_equal(first.data, other.data)


def test_generateTwoClusterSphere_angleKeepsSubspace(config):
    # the basis is drawn from the seed alone
    base = generateTwoClusterSphere(config, 0.0, 0.0, 11)
    again = generateTwoClusterSphere(config, 90.0, 0.0, 11)
    stacked = np.hstack([base.data, again.data])
    assert np.linalg.matrix_rank(stacked, tol=1e-9) == 3


@pytest.mark.parametrize("angleDeg", [0.0, 30.0, 90.0, 150.0])
def test_generateTwoClusterSphere_centroidSeparation(angleDeg):
    config = SweepConfig(pointsPerCluster=1000, ambientDim=20, subspaceDim=3)
    cloud = generateTwoClusterSphere(config, angleDeg, 0.0, 5)
    first = cloud.data[:, :1000].mean(axis=1)
    second = cloud.data[:, 1000:].mean(axis=1)
    measured = math.degrees(
        angle(first / np.linalg.norm(first), second / np.linalg.norm(second))
    )
    assert measured == pytest.approx(angleDeg, abs=3.0)


@pytest.mark.parametrize("angleDeg, sigma", [(-1.0, 0.0), (181.0, 0.0), (10.0, -0.1)])
def test_generateTwoClusterSphere_badInput(config, angleDeg, sigma):
    with pytest.raises(PreconditionError):
        generateTwoClusterSphere(config, angleDeg, sigma, 0)


def test_trialSeedFor():
    first = trialSeedFor(0, 10.0, 0.02, 1).generate_state(4)
    assert np.array_equal(first, trialSeedFor(0, 10.0, 0.02, 1).generate_state(4))
    for other in [(1, 10.0, 0.02, 1), (0, 15.0, 0.02, 1), (0, 10.0, 0.03, 1), (0, 10.0, 0.02, 2)]:
        assert not np.array_equal(first, trialSeedFor(*other).generate_state(4))


def test_withDistractorCluster(config):
    cloud = generateTwoClusterSphere(config, 20.0, 0.0, 3)
    extended = withDistractorCluster(cloud, config, 10, 4)
    assert extended.N == 50
    assert extended.numClusters == 3
    assert extended.clusterSizes() == [20, 20, 10]
    assert np.array_equal(extended.data[:, :40], cloud.data)
    assert np.linalg.norm(extended.data, axis=0) == pytest.approx(np.ones(50))


planarArcsTestData = [
    (3, 10.0, 30.0, [0.0, 15.0, 30.0, 40.0, 55.0, 70.0]),
    (2, 0.0, 20.0, [0.0, 20.0, 20.0, 40.0]),
    (1, 45.0, 30.0, [0.0, 75.0]),
]


@pytest.mark.parametrize("nPerSet, gapDeg, arcSpanDeg, expectedAngles", planarArcsTestData)
def test_generatePlanarArcs(nPerSet, gapDeg, arcSpanDeg, expectedAngles):
    cloud = generatePlanarArcs(nPerSet, gapDeg, arcSpanDeg)
    measured = np.degrees(np.arctan2(cloud.data[1], cloud.data[0]))
    assert measured == pytest.approx(expectedAngles, abs=1e-9)
    assert cloud.labels.tolist() == [0] * nPerSet + [1] * nPerSet


def test_generatePlanarArcs_rotationKeepsAngles():
    plain = generatePlanarArcs(5, 12.0)
    rotated = generatePlanarArcs(5, 12.0, seed=9)
    assert plain.data.T @ plain.data == pytest.approx(rotated.data.T @ rotated.data)
    assert not np.allclose(plain.data, rotated.data)


def test_generatePlanarArcs_badInput():
    with pytest.raises(PreconditionError):
        generatePlanarArcs(0, 10.0)
    with pytest.raises(PreconditionError):
        generatePlanarArcs(3, -1.0)
