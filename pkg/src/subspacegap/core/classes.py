from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Optional

import cattrs
import numpy as np
from cattrs.gen import make_dict_structure_fn, make_dict_unstructure_fn, override

from .errors import ConfigError, PreconditionError


class Estimator(str, Enum):
    # TODO: use StrEnum once we drop support for Python 3.10
    BP = "bp"
    BPDN = "bpdn"
    LASSO = "lasso"
    OMP = "omp"


class PenaltyForm(str, Enum):
    UNSQUARED = "unsquared"
    SQUARED = "squared"


class SelectorMethod(str, Enum):
    DANTZIG = "dantzig"
    SUBSPACE = "subspace"


class XiReading(str, Enum):
    ALL_POINTS = "all-points"
    FIRST_CLUSTER = "first-cluster"


@dataclass(kw_only=True, eq=False)
class PointCloud:
    data: np.ndarray  # m x N, columns are points
    labels: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise PreconditionError(f"expected a 2-d matrix, got shape {self.data.shape}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (self.N,):
                raise PreconditionError(
                    f"expected {self.N} labels, got shape {self.labels.shape}"
                )
            if self.N and self.labels.min() < 0:
                raise PreconditionError("labels must be nonnegative")

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def N(self) -> int:
        return self.data.shape[1]

    @property
    def numClusters(self) -> int:
        if self.labels is None or not self.N:
            return 0
        return int(self.labels.max()) + 1

    def clusterSizes(self) -> list[int]:
        if self.labels is None:
            return []
        return [int(n) for n in np.bincount(self.labels)]

    def column(self, index: int) -> np.ndarray:
        return self.data[:, index]

    def withoutColumn(self, index: int) -> np.ndarray:
        return np.delete(self.data, index, axis=1)


@dataclass(kw_only=True, eq=False)
class SubspaceBasis:
    basis: np.ndarray  # m x d, orthonormal columns
    diagnostics: list[str] = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.basis.shape[0]

    @property
    def d(self) -> int:
        return self.basis.shape[1]


@dataclass(kw_only=True)
class SolverSettings:
    # residual bound for bpdn, penalty weight for the lasso
    lam: float = 0.0
    maxIter: int = 5000
    tolPrimal: float = 1e-6
    tolDual: float = 1e-6
    # relative to max |c|
    supportEps: float = 1e-5
    penaltyForm: PenaltyForm = PenaltyForm.UNSQUARED
    # omp only; None means "as many atoms as the ambient dimension allows"
    maxAtoms: Optional[int] = None
    residualTol: float = 1e-6

    def __post_init__(self) -> None:
        if not self.lam >= 0:
            raise PreconditionError(f"lambda must be nonnegative, got {self.lam}")
        if self.maxIter <= 0:
            raise PreconditionError(f"maxIter must be positive, got {self.maxIter}")
        for name in ["tolPrimal", "tolDual", "supportEps", "residualTol"]:
            if not getattr(self, name) > 0:
                raise PreconditionError(f"{name} must be positive")
        if self.maxAtoms is not None and self.maxAtoms < 1:
            raise PreconditionError(f"maxAtoms must be positive, got {self.maxAtoms}")


@dataclass(kw_only=True, eq=False)
class SparseSolution:
    coefficients: np.ndarray
    support: list[int]
    residualNorm: float
    iterations: int = 0
    converged: bool = True
    selfIndex: Optional[int] = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def l1Norm(self) -> float:
        return float(np.abs(self.coefficients).sum())


@dataclass(kw_only=True)
class ErrorDescription:
    message: str
    type: str
    index: Optional[int] = None


@dataclass(kw_only=True)
class ExtendedSupport:
    pointIndex: int
    originalSupport: list[int]
    delta: float
    added: list[int] = field(default_factory=list)
    # score of each added index at the round it was accepted
    scores: list[float] = field(default_factory=list)
    rounds: int = 0

    @property
    def extended(self) -> list[int]:
        return list(self.originalSupport) + list(self.added)


@dataclass(kw_only=True, eq=False)
class DantzigState:
    xstar: np.ndarray  # |S^e| x m
    rho: float


@dataclass(kw_only=True, eq=False)
class CoefficientMatrix:
    matrix: np.ndarray  # column j codes point j
    warnings: list[ErrorDescription] = field(default_factory=list)
    extensions: list[Optional[ExtendedSupport]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise PreconditionError(
                f"coefficient matrix must be square, got {self.matrix.shape}"
            )
        if np.any(np.diag(self.matrix) != 0):
            raise PreconditionError("coefficient matrix must have a zero diagonal")

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    def supportOf(self, column: int, supportEps: float = 1e-5) -> list[int]:
        return supportFromCoefficients(self.matrix[:, column], supportEps)


@dataclass(kw_only=True, eq=False)
class AffinityMatrix:
    matrix: np.ndarray
    blockSizes: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=float)
        A = self.matrix
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise PreconditionError(f"affinity matrix must be square, got {A.shape}")
        if not np.array_equal(A, A.T):
            raise PreconditionError("affinity matrix must be symmetric")
        if np.any(np.diag(A) != 0):
            raise PreconditionError("affinity matrix must have a zero diagonal")
        if np.any(A < 0):
            raise PreconditionError("affinity matrix must be nonnegative")
        if self.blockSizes is not None and sum(self.blockSizes) != A.shape[0]:
            raise PreconditionError(
                f"block sizes {self.blockSizes} do not add up to {A.shape[0]}"
            )

    @property
    def N(self) -> int:
        return self.matrix.shape[0]


@dataclass(kw_only=True, eq=False)
class ClusterLabels:
    labels: np.ndarray
    k: int
    # zero-degree vertices, assigned to the nearest embedded centroid
    isolated: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=int)


@dataclass(kw_only=True)
class SweepConfig:
    pointsPerCluster: int = 20
    angleGridDeg: list[float] = field(
        default_factory=lambda: [float(a) for a in range(0, 181, 5)]
    )
    noiseSigmas: list[float] = field(default_factory=lambda: [0.0, 0.02, 0.03])
    trials: int = 10
    ambientDim: int = 20
    subspaceDim: int = 3
    lam: float = 10.0
    # squared residual bound of the bpdn method
    bpdnLambda: float = 0.01
    delta: float = 0.3
    subspaceDelta: Optional[float] = None
    seed: int = 0
    methods: list[str] = field(
        default_factory=lambda: ["lasso", "omp", "dantzig", "subspace"]
    )
    cloudSpread: float = 0.3
    maxRounds: int = 100
    ompMaxAtoms: Optional[int] = None
    ompResidualTol: float = 1e-6
    xiReading: XiReading = XiReading.ALL_POINTS
    clusterSeed: int = 0
    averageAffinityAngles: list[float] = field(
        default_factory=lambda: [0.0, 10.0, 45.0]
    )

    def __post_init__(self) -> None:
        for name in ["pointsPerCluster", "trials", "ambientDim", "maxRounds"]:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 2 <= self.subspaceDim <= self.ambientDim:
            raise ConfigError(
                f"subspaceDim must be in [2, ambientDim], got {self.subspaceDim}"
            )
        for angle in [*self.angleGridDeg, *self.averageAffinityAngles]:
            if not 0 <= angle <= 180:
                raise ConfigError(f"angles must be in [0, 180], got {angle}")
        if any(not sigma >= 0 for sigma in self.noiseSigmas):
            raise ConfigError("noise sigmas must be nonnegative")
        if not self.lam > 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")
        if not self.bpdnLambda > 0:
            raise ConfigError(f"bpdnLambda must be positive, got {self.bpdnLambda}")
        for delta in [self.delta, self.subspaceDelta]:
            if delta is not None and not delta > 0:
                raise ConfigError(f"delta must be positive, got {delta}")
        if not self.methods:
            raise ConfigError("at least one method is required")

    def deltaFor(self, selector: SelectorMethod) -> float:
        if selector == SelectorMethod.SUBSPACE and self.subspaceDelta is not None:
            return self.subspaceDelta
        return self.delta

    @property
    def numPoints(self) -> int:
        return 2 * self.pointsPerCluster


@dataclass(kw_only=True)
class ConnectivityRecord:
    angleDeg: float
    sigma: float
    trial: int
    method: str
    xi: float
    clusteringError: float
    wallTimeMs: float = 0.0
    error: Optional[str] = None

    @property
    def sortKey(self) -> tuple:
        return (self.angleDeg, self.sigma, self.trial, self.method)


@dataclass(kw_only=True)
class OracleReport:
    instance: str
    oracleValue: float
    oracleSupport: list[int]
    solverValue: Optional[float] = None
    gap: Optional[float] = None
    supportsChecked: int = 0

    def withSolverValue(self, solverValue: float) -> OracleReport:
        return OracleReport(
            instance=self.instance,
            oracleValue=self.oracleValue,
            oracleSupport=list(self.oracleSupport),
            solverValue=solverValue,
            gap=solverValue - self.oracleValue,
            supportsChecked=self.supportsChecked,
        )


@dataclass(kw_only=True)
class MonotonicityReport:
    anglesDeg: list[float]
    exact: list[float]
    robust: list[float] = field(default_factory=list)
    lasso: list[float] = field(default_factory=list)
    # grid indices i where exact[i] < exact[i - 1] beyond tolerance
    violations: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(kw_only=True)
class SuiteReport:
    suite: str
    checks: int = 0
    violations: list[str] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def supportFromCoefficients(coefficients: np.ndarray, supportEps: float) -> list[int]:
    magnitudes = np.abs(coefficients)
    largest = magnitudes.max(initial=0.0)
    if largest == 0:
        return []
    return [int(i) for i in np.flatnonzero(magnitudes > supportEps * largest)]


# cattrs hooks + structure/unstructure support


def _unstructureFloat(v):
    try:
        if v.is_integer():
            return int(v)
    except AttributeError:
        if not isinstance(v, (int, float)):
            raise TypeError(f"Expected int or float, got {type(v)}. ({v!r})")
    return v


def _structureNumber(v, tp):
    if isinstance(v, str):
        # PyYAML reads "1e-6" as a string
        return float(v)
    if isinstance(v, bool) or not isinstance(v, (float, int)):
        raise TypeError(f"Expected a number, got {v!r}")
    return float(v)


def _structureFloatList(v, tp):
    if isinstance(v, str):
        return [float(part) for part in v.split(",") if part.strip()]
    if isinstance(v, (int, float)):
        return [float(v)]
    return [_structureNumber(item, float) for item in v]


def _structureStringList(v, tp):
    if isinstance(v, str):
        return [part.strip() for part in v.split(",") if part.strip()]
    return [str(item) for item in v]


def _unstructureArray(v):
    return unstructure(v.tolist())


def _structureArray(v, tp):
    return np.asarray(v, dtype=float)


_cattrsConverter = cattrs.Converter(detailed_validation=False)

_cattrsConverter.register_unstructure_hook(float, _unstructureFloat)
_cattrsConverter.register_structure_hook(float, _structureNumber)
_cattrsConverter.register_structure_hook_func(
    lambda t: t == list[float], _structureFloatList
)
_cattrsConverter.register_structure_hook_func(
    lambda t: t == list[str], _structureStringList
)
_cattrsConverter.register_structure_hook(bool, lambda x, y: x)
_cattrsConverter.register_unstructure_hook(np.ndarray, _unstructureArray)
_cattrsConverter.register_structure_hook(np.ndarray, _structureArray)
_cattrsConverter.register_unstructure_hook(np.floating, lambda v: _unstructureFloat(float(v)))
_cattrsConverter.register_unstructure_hook(np.integer, int)

# The config file spells the penalty weight "lambda"
_renamedConfigFields = {"lam": "lambda"}

_cattrsConverter.register_structure_hook(
    SweepConfig,
    make_dict_structure_fn(
        SweepConfig,
        _cattrsConverter,
        **{k: override(rename=v) for k, v in _renamedConfigFields.items()},
    ),
)
_cattrsConverter.register_unstructure_hook(
    SweepConfig,
    make_dict_unstructure_fn(
        SweepConfig,
        _cattrsConverter,
        **{k: override(rename=v) for k, v in _renamedConfigFields.items()},
    ),
)


def registerHook(cls, omitIfDefault=True, **fieldHooks):
    fieldHooks = {
        k: cattrs.gen.override(unstruct_hook=v) for k, v in fieldHooks.items()
    }
    _hook = make_dict_unstructure_fn(
        cls,
        _cattrsConverter,
        _cattrs_omit_if_default=omitIfDefault,
        **fieldHooks,
    )
    _cattrsConverter.register_unstructure_hook(cls, _hook)


registerHook(ErrorDescription)
registerHook(ExtendedSupport, omitIfDefault=False)
registerHook(ConnectivityRecord)
registerHook(OracleReport)
registerHook(MonotonicityReport, omitIfDefault=False)
registerHook(SuiteReport, omitIfDefault=False)


def structure(obj, cls):
    return _cattrsConverter.structure(obj, cls)


def unstructure(obj):
    return _cattrsConverter.unstructure(obj)


def sweepConfigKeys() -> set[str]:
    return {_renamedConfigFields.get(f.name, f.name) for f in fields(SweepConfig)}


def structureSweepConfig(rawConfig: dict[str, Any]) -> SweepConfig:
    if not isinstance(rawConfig, dict):
        raise ConfigError(f"expected a mapping, got {type(rawConfig).__name__}")
    extraNames = set(rawConfig) - sweepConfigKeys()
    if extraNames:
        extraNamesString = ", ".join(repr(n) for n in sorted(extraNames))
        raise ConfigError(f"unknown config key(s): {extraNamesString}")
    try:
        return structure(rawConfig, SweepConfig)
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"invalid config: {e}") from e