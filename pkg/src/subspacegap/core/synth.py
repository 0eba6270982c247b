from __future__ import annotations

import logging
import math

import numpy as np

from .classes import PointCloud, SweepConfig
from .errors import PreconditionError
from .linalg import normalizeColumns, randomOrthonormalBasis

logger = logging.getLogger(__name__)


def trialSeedFor(seed: int, angleDeg: float, sigma: float, trial: int):
    """Seed of one sweep cell; depends on the cell's coordinates only, not
    on the order in which cells are run."""
    return np.random.SeedSequence(
        [int(seed), round(angleDeg * 1000), round(sigma * 1e6), int(trial)]
    )


def _asSeedSequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _rotationInLastPlane(dimension: int, angleRad: float) -> np.ndarray:
    # rotates e_last towards e_(last-1); every axis orthogonal to both is fixed
    rotation = np.eye(dimension)
    i, j = dimension - 2, dimension - 1
    c, s = math.cos(angleRad), math.sin(angleRad)
    rotation[i, i] = c
    rotation[i, j] = s
    rotation[j, i] = -s
    rotation[j, j] = c
    return rotation


def _sampleCloud(rng, dimension: int, count: int, spread: float) -> np.ndarray:
    mean = np.zeros(dimension)
    mean[-1] = 1.0
    cloud = mean[:, None] + spread * rng.standard_normal((dimension, count))
    return cloud / np.linalg.norm(cloud, axis=0)


def generateTwoClusterSphere(
    cfg: SweepConfig, angleDeg: float, sigma: float, trialSeed
) -> PointCloud:
    """Two Gaussian clouds on the unit sphere of a random subspace, the
    second one rotated by `angleDeg` away from the first.

    Points of cluster 0 come first, then the points of cluster 1.
    """
    if not 0 <= angleDeg <= 180:
        raise PreconditionError(f"angle must be in [0, 180], got {angleDeg}")
    if not sigma >= 0:
        raise PreconditionError(f"sigma must be nonnegative, got {sigma}")

    basisSeed, cloudSeed, noiseSeed = _asSeedSequence(trialSeed).spawn(3)
    d = cfg.subspaceDim
    n = cfg.pointsPerCluster
    basis = randomOrthonormalBasis(cfg.ambientDim, d, basisSeed)

    cloudRng = np.random.default_rng(cloudSeed)
    first = _sampleCloud(cloudRng, d, n, cfg.cloudSpread)
    second = _sampleCloud(cloudRng, d, n, cfg.cloudSpread)
    second = _rotationInLastPlane(d, math.radians(angleDeg)) @ second

    data = normalizeColumns(basis.basis @ np.hstack([first, second])).data
    if sigma > 0:
        noiseRng = np.random.default_rng(noiseSeed)
        data = normalizeColumns(
            data + sigma * noiseRng.standard_normal(data.shape)
        ).data

    return PointCloud(data=data, labels=np.repeat([0, 1], n))


def withDistractorCluster(
    cloud: PointCloud, cfg: SweepConfig, count: int, seed
) -> PointCloud:
    """Append a cluster drawn on an independent random subspace, labelled
    one past the current largest label."""
    basisSeed, cloudSeed = _asSeedSequence(seed).spawn(2)
    d = cfg.subspaceDim
    basis = randomOrthonormalBasis(cloud.m, d, basisSeed)
    points = _sampleCloud(np.random.default_rng(cloudSeed), d, count, cfg.cloudSpread)
    distractor = normalizeColumns(basis.basis @ points).data
    label = cloud.numClusters
    return PointCloud(
        data=np.hstack([cloud.data, distractor]),
        labels=np.concatenate([cloud.labels, np.full(count, label)]),
    )


def generatePlanarArcs(
    nPerSet: int, gapDeg: float, arcSpanDeg: float = 30.0, seed=None
) -> PointCloud:
    """Two sets of unit vectors in the plane, each spread evenly over an arc
    of `arcSpanDeg`, the nearest ends of the arcs `gapDeg` apart.

    Points are numbered along the arcs, set 0 first. A seed rotates the
    whole configuration by a random angle, which leaves all pairwise
    angles unchanged.
    """
    if nPerSet < 1:
        raise PreconditionError(f"need at least one point per set, got {nPerSet}")
    if not gapDeg >= 0:
        raise PreconditionError(f"gap must be nonnegative, got {gapDeg}")
    if not arcSpanDeg >= 0:
        raise PreconditionError(f"arc span must be nonnegative, got {arcSpanDeg}")

    offsets = np.linspace(0.0, arcSpanDeg, nPerSet)
    anglesDeg = np.concatenate([offsets, arcSpanDeg + gapDeg + offsets])
    if seed is not None:
        anglesDeg = anglesDeg + np.random.default_rng(seed).uniform(0, 360)
    radians = np.radians(anglesDeg)
    data = np.vstack([np.cos(radians), np.sin(radians)])
    return PointCloud(data=data, labels=np.repeat([0, 1], nPerSet))
