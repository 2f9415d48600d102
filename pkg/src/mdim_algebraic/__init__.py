"""
mdim-algebraic.

Exact mean rank of endomorphisms of discrete abelian groups, and through
Pontryagin duality the mean dimension of algebraic dynamical systems.

This module provides functionality to:
- Do exact integer linear algebra (rank, Hermite and Smith forms, kernels)
- Present finitely generated abelian groups and their endomorphisms
- Compute rank sequences of trajectories and estimate their growth rate
- Compute the mean dimension of algebraic cellular automata on tori
- Check that natural extensions and towers of systems preserve it
"""

from mdim_algebraic.abelian import (
    GroupElement,
    GroupPresentation,
    PresEndomorphism,
    PresentationCarrier,
    eventual_kernel,
    reduced_injective_quotient,
    subgroup_rank,
)
from mdim_algebraic.cellular import (
    CASpec,
    LaurentMatrix,
    ShiftCarrier,
    SupportedVector,
    ca_mean_dimension,
    dualize_ca,
    evolve_configuration,
    pair,
)
from mdim_algebraic.exceptions import (
    BudgetExceededError,
    DimensionMismatchError,
    InvalidElementError,
    InvalidTowerError,
    InvariantViolationError,
    MdimError,
    NotEndomorphismError,
    RankCertificationError,
    ReportWriteError,
    SpecParseError,
)
from mdim_algebraic.linalg import IntMatrix, SmithDecomposition, hnf, kernel_basis, rank, snf
from mdim_algebraic.natext import (
    NatextReport,
    TowerReport,
    TowerSpec,
    colimit_mean_rank,
    natural_extension_check,
    system_for,
    tower_mean_rank,
)
from mdim_algebraic.report import ReportDocument, ReportFormat, ReportWriter, load_report
from mdim_algebraic.specfile import SpecParser, SystemSpecFile
from mdim_algebraic.trajectory import (
    DiscreteModule,
    MeanRankParams,
    MeanRankReport,
    RankStatus,
    TrajectoryBasis,
    mean_rank,
    mean_rank_of_set,
)

__version__ = "0.1.0"
__author__ = "Ricardo Montañana"

__all__ = [
    "BudgetExceededError",
    "CASpec",
    "DimensionMismatchError",
    "DiscreteModule",
    "GroupElement",
    "GroupPresentation",
    "IntMatrix",
    "InvalidElementError",
    "InvalidTowerError",
    "InvariantViolationError",
    "LaurentMatrix",
    "MdimError",
    "MeanRankParams",
    "MeanRankReport",
    "NatextReport",
    "NotEndomorphismError",
    "PresEndomorphism",
    "PresentationCarrier",
    "RankCertificationError",
    "RankStatus",
    "ReportDocument",
    "ReportFormat",
    "ReportWriteError",
    "ReportWriter",
    "ShiftCarrier",
    "SmithDecomposition",
    "SpecParseError",
    "SpecParser",
    "SupportedVector",
    "SystemSpecFile",
    "TowerReport",
    "TowerSpec",
    "TrajectoryBasis",
    "__author__",
    "__version__",
    "ca_mean_dimension",
    "colimit_mean_rank",
    "dualize_ca",
    "eventual_kernel",
    "evolve_configuration",
    "hnf",
    "kernel_basis",
    "load_report",
    "mean_rank",
    "mean_rank_of_set",
    "natural_extension_check",
    "pair",
    "rank",
    "reduced_injective_quotient",
    "snf",
    "subgroup_rank",
    "system_for",
    "tower_mean_rank",
]
