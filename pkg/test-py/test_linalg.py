import math

import numpy as np
import pytest
from testSupport import unitVector

from subspacegap.core.classes import SubspaceBasis
from subspacegap.core.errors import DegenerateInputError, PreconditionError
from subspacegap.core.linalg import (
    angle,
    capturedEnergy,
    fitPrincipalBasis,
    normalizeColumns,
    orthogonalProject,
    randomOrthonormalBasis,
)

angleTestData = [
    ([1, 0, 0], [1, 0, 0], 0.0),
    ([1, 0, 0], [0, 1, 0], math.pi / 2),
    ([1, 0], unitVector(20), math.radians(20)),
    ([1, 0], [-1, 0], math.pi),
]


@pytest.mark.parametrize("x, y, expectedResult", angleTestData)
def test_angle(x, y, expectedResult):
    assert angle(x, y) == pytest.approx(expectedResult, abs=1e-9)
    assert angle(x, y) == angle(y, x)


def test_angle_clampsRounding():
    x = np.array([1.0, 1e-9])
    x /= np.linalg.norm(x)
    assert angle(x, x) == pytest.approx(0.0, abs=1e-7)


@pytest.mark.parametrize("x, y", [([2, 0], [1, 0]), ([1, 0], [0, 0]), ([1, 0], [1, 0, 0])])
def test_angle_badInput(x, y):
    with pytest.raises(PreconditionError):
        angle(x, y)


def test_normalizeColumns():
    cloud = normalizeColumns(np.array([[3.0, 1.0], [4.0, 0.0]]))
    assert cloud.data[:, 0] == pytest.approx([0.6, 0.8])
    assert cloud.data[:, 1] == pytest.approx([1.0, 0.0], abs=1e-12)
    again = normalizeColumns(cloud.data)
    assert np.allclose(again.data, cloud.data, atol=1e-12, rtol=0)


def test_normalizeColumns_zeroColumn():
    with pytest.raises(DegenerateInputError) as excinfo:
        normalizeColumns(np.array([[1.0, 0.0, 2.0], [0.0, 0.0, 1.0]]))
    assert excinfo.value.columnIndex == 1
    assert "column 1" in str(excinfo.value)


projectTestData = [
    ([[1], [0]], [2, 3], [2, 0]),
    ([[1], [0]], [5, 0], [5, 0]),
    (np.eye(3), [1, -2, 3], [1, -2, 3]),
]


@pytest.mark.parametrize("basis, y, expectedResult", projectTestData)
def test_orthogonalProject(basis, y, expectedResult):
    result = orthogonalProject(SubspaceBasis(basis=np.array(basis, dtype=float)), y)
    assert result == pytest.approx(expectedResult, abs=1e-12)


def test_orthogonalProject_dimensionMismatch():
    with pytest.raises(PreconditionError):
        orthogonalProject(SubspaceBasis(basis=np.eye(3)[:, :2]), np.ones(4))


def test_orthogonalProject_idempotenceAndPythagoras(rng):
    for _ in range(1000):
        m = int(rng.integers(2, 7))
        d = int(rng.integers(1, m + 1))
        basis = randomOrthonormalBasis(m, d, rng)
        y = rng.standard_normal(m)
        projected = orthogonalProject(basis, y)
        assert np.linalg.norm(orthogonalProject(basis, projected) - projected) <= 1e-9
        residual = y - projected
        assert y @ y == pytest.approx(projected @ projected + residual @ residual, abs=1e-8)
        assert np.abs(basis.basis.T @ residual).max() <= 1e-9


def test_fitPrincipalBasis_rankOne():
    matrix = np.array([[1.0, -2.0, 0.5], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    basis = fitPrincipalBasis(matrix, 1)
    assert abs(basis.basis[:, 0]) == pytest.approx([1.0, 0.0, 0.0])
    assert basis.diagnostics == []


def test_fitPrincipalBasis_symmetricSpectrum():
    basis = fitPrincipalBasis(np.eye(3), 2)
    assert basis.d == 2
    assert capturedEnergy(basis, np.eye(3)) == pytest.approx(2.0)


def test_fitPrincipalBasis_energyMatchesEigenvalues(rng):
    matrix = rng.standard_normal((5, 8))
    basis = fitPrincipalBasis(matrix, 3)
    eigenvalues = np.sort(np.linalg.eigvalsh(matrix @ matrix.T))[::-1]
    assert capturedEnergy(basis, matrix) == pytest.approx(eigenvalues[:3].sum())
    assert np.allclose(basis.basis.T @ basis.basis, np.eye(3), atol=1e-9)


def test_fitPrincipalBasis_beatsRandomCompetitors(rng):
    for _ in range(5):
        m = int(rng.integers(2, 5))
        d = int(rng.integers(1, min(m, 2) + 1))
        matrix = rng.standard_normal((m, 6))
        energy = capturedEnergy(fitPrincipalBasis(matrix, d), matrix)
        for _ in range(200):
            competitor = randomOrthonormalBasis(m, d, rng)
            assert energy >= capturedEnergy(competitor, matrix) - 1e-9


def test_fitPrincipalBasis_padsBeyondRank():
    matrix = np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]])
    basis = fitPrincipalBasis(matrix, 2)
    assert basis.d == 2
    assert basis.diagnostics
    assert np.allclose(basis.basis.T @ basis.basis, np.eye(2), atol=1e-9)


@pytest.mark.parametrize("d", [0, 4])
def test_fitPrincipalBasis_badDimension(d):
    with pytest.raises(PreconditionError):
        fitPrincipalBasis(np.eye(3), d)


@pytest.mark.parametrize("m, d", [(3, 3), (20, 3), (5, 1)])
def test_randomOrthonormalBasis(m, d):
    basis = randomOrthonormalBasis(m, d, 1234)
    assert basis.basis.shape == (m, d)
    assert np.allclose(basis.basis.T @ basis.basis, np.eye(d), atol=1e-9)
    assert np.array_equal(basis.basis, randomOrthonormalBasis(m, d, 1234).basis)


def test_randomOrthonormalBasis_tooLarge():
    with pytest.raises(PreconditionError):
        randomOrthonormalBasis(3, 4, 0)
