import numpy as np
import pytest

from subspacegap.core.classes import SweepConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def smallSweepConfig():
    return SweepConfig(
        pointsPerCluster=6,
        angleGridDeg=[0.0, 60.0],
        noiseSigmas=[0.0],
        trials=2,
        ambientDim=6,
        subspaceDim=3,
        maxRounds=5,
        methods=["lasso", "bpdn", "omp", "dantzig", "subspace"],
        averageAffinityAngles=[0.0, 60.0],
    )
