"""
Natural extensions and inverse limits on the dual side.

The dual of the natural extension of ``(X, φ)`` is the colimit of
``A --φ--> A --φ--> ...``: pairs ``(k, v)`` with ``(k, v) ~ (k+1, φ(v))``.
Its mean rank is computed on the reduced injective quotient (the
quotient by the eventual kernel), where the colimit embeds every level.

This module provides:
- the colimit carrier and its elements
- ``colimit_mean_rank`` and ``natural_extension_check``
- finite towers of systems with connecting maps, validated exactly, and
  their mean rank
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any

from mdim_algebraic.abelian import PresEndomorphism, PresentationCarrier
from mdim_algebraic.cellular import CASpec, ShiftCarrier, ca_mean_dimension, dualize_ca
from mdim_algebraic.exceptions import (
    DimensionMismatchError,
    InvalidElementError,
    InvalidTowerError,
)
from mdim_algebraic.linalg import IntMatrix, in_lattice, kernel_basis, rank
from mdim_algebraic.trajectory import (
    Coordinates,
    DiscreteModule,
    MeanRankParams,
    MeanRankReport,
    RankStatus,
    mean_rank,
)

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

logger = logging.getLogger(__name__)

System = CASpec | PresEndomorphism

COLIMIT_CITATION = (
    "The mean rank of a colimit of a directed system equals the supremum of the "
    "mean ranks of the levels modulo their eventual kernels."
)
INJECTIVE_CITATION = (
    "For an injective endomorphism the mean rank equals the mean rank of its colimit."
)
NATEXT_CITATION = (
    "Mean dimension is preserved by passing to the natural extension; the surjective "
    "core of φ is dual to the quotient by the eventual kernel of the dual map."
)
TOWER_CITATION = (
    "The mean dimension of an inverse limit of algebraic systems with surjective "
    "connecting maps is the supremum of the mean dimensions of the levels; "
    "reported as the supremum over the provided levels."
)


@dataclass(frozen=True)
class ColimitElement:
    """Element ``(level, payload)`` of the colimit."""

    level: int
    payload: Any


class ColimitCarrier(DiscreteModule[ColimitElement, Any]):
    """Colimit of ``base --φ--> base --φ--> ...`` truncated at ``depth`` levels.

    An element at level ``k`` is identified with its image at the top level
    ``depth`` under ``φ^(depth - k)``; coordinates and ranks are taken there.
    This is faithful when ``φ`` is injective on the base, which holds for a
    reduced injective quotient.
    """

    kind = "colimit"

    def __init__(self, base: DiscreteModule[Any, Any], phi: Any, depth: int = 2) -> None:
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.base = base
        self.phi = phi
        self.depth = depth

    def raise_to(self, element: ColimitElement, level: int) -> ColimitElement:
        """Representative of ``element`` at a higher level."""
        if level < element.level:
            raise InvalidElementError("Cannot lower a level by raising", f"{element.level} > {level}")
        payload = element.payload
        for _ in range(level - element.level):
            payload = self.base.apply(self.phi, payload)
        return ColimitElement(level, payload)

    def lift(self, element: ColimitElement) -> Any:
        return self.raise_to(element, self.depth).payload

    def canonical(self, element: ColimitElement) -> ColimitElement:
        """Descend to the smallest level with a representative."""
        current = element
        while current.level > 0:
            below = self.base.preimage(self.phi, current.payload)
            if below is None:
                break
            current = ColimitElement(current.level - 1, below)
        return current

    def apply(self, phi: Any, element: ColimitElement) -> ColimitElement:
        return ColimitElement(element.level, self.base.apply(phi, element.payload))

    def coordinates(self, element: ColimitElement) -> Coordinates:
        return self.base.coordinates(self.lift(element))

    def validate(self, element: ColimitElement) -> None:
        if not isinstance(element, ColimitElement):
            raise InvalidElementError("Expected a ColimitElement", type(element).__name__)
        if not 0 <= element.level <= self.depth:
            raise InvalidElementError("Level out of range", f"{element.level} not in 0..{self.depth}")
        self.base.validate(element.payload)

    def relation_vectors(self) -> list[Coordinates]:
        return self.base.relation_vectors()

    def generator_schedule(self, max_window: int) -> list[list[ColimitElement]]:
        return [
            [ColimitElement(level, e) for level in range(self.depth + 1) for e in generators]
            for generators in self.base.generator_schedule(max_window)
        ]

    def growth_ceiling(self, phi: Any) -> int:
        return self.base.growth_ceiling(phi)

    def certified_bounds(self, phi: Any, elements: Sequence[ColimitElement]) -> tuple[int, int]:
        return self.base.certified_bounds(phi, [self.lift(e) for e in elements])

    def same(self, a: ColimitElement, b: ColimitElement) -> bool:
        """Equality in the truncated colimit: the lifts to the top level agree."""
        return self.base.same(self.lift(a), self.lift(b))

    def __repr__(self) -> str:
        return f"ColimitCarrier(base={self.base!r}, depth={self.depth})"


def system_for(system: System) -> tuple[DiscreteModule[Any, Any], Any]:
    """The dual carrier and endomorphism of a system."""
    if isinstance(system, CASpec):
        return ShiftCarrier(system.d), dualize_ca(system)
    if isinstance(system, PresEndomorphism):
        return PresentationCarrier(system.carrier), system
    raise TypeError(f"Unsupported system type: {type(system).__name__}")


def _direct_mean_rank(system: System, params: MeanRankParams, workers: int) -> MeanRankReport:
    if isinstance(system, CASpec):
        return ca_mean_dimension(system, params, workers=workers)
    carrier, phi = system_for(system)
    return mean_rank(carrier, phi, params, workers=workers, label="mean rank")


def _reduced_mean_rank(system: System, params: MeanRankParams, workers: int) -> MeanRankReport:
    carrier, phi = system_for(system)
    reduced, phi_r, k = carrier.reduced_injective(phi)
    logger.info("eventual kernel stabilizes at exponent %d", k)
    return mean_rank(
        reduced,
        phi_r,
        params,
        workers=workers,
        label="reduced injective quotient",
        citations=(NATEXT_CITATION,),
    )


def colimit_mean_rank(
    system: System,
    params: MeanRankParams | None = None,
    *,
    workers: int = 1,
) -> MeanRankReport:
    """Mean rank of the colimit, computed on the reduced injective quotient."""
    params = params or MeanRankParams()
    carrier, phi = system_for(system)
    reduced, phi_r, k = carrier.reduced_injective(phi)
    logger.info("colimit over reduced carrier (kernel exponent %d, depth %d)", k, params.colimit_depth)
    return mean_rank(
        ColimitCarrier(reduced, phi_r, params.colimit_depth),
        phi_r,
        params,
        workers=workers,
        label="colimit mean rank",
        citations=(COLIMIT_CITATION, INJECTIVE_CITATION),
    )


_LEGS: dict[str, Callable[[System, MeanRankParams, int], MeanRankReport]] = {
    "direct": _direct_mean_rank,
    "reduced": _reduced_mean_rank,
    "colimit": lambda s, p, w: colimit_mean_rank(s, p, workers=w),
}


def _run_job(job: tuple[str, System, MeanRankParams]) -> MeanRankReport:
    name, system, params = job
    return _LEGS[name](system, params, 1)


def _run_jobs(
    jobs: list[tuple[str, System, MeanRankParams]], workers: int
) -> list[MeanRankReport]:
    """Run independent jobs, in parallel when ``workers > 1``; results keep job order."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as executor:
            return list(executor.map(_run_job, jobs))
    return [_LEGS[name](system, params, workers) for name, system, params in jobs]


@dataclass(frozen=True)
class NatextReport:
    """Three-leg comparison for the natural extension.

    Attributes:
        legs: ``(name, report)`` for the direct, reduced and colimit legs.
        verdict: ``equal``, ``unresolved`` or ``disagree``.
        kernel_exponent: Exponent at which the eventual kernel stabilizes.
    """

    legs: tuple[tuple[str, MeanRankReport], ...]
    verdict: str
    kernel_exponent: int
    citations: tuple[str, ...] = (NATEXT_CITATION,)

    def leg(self, name: str) -> MeanRankReport:
        return dict(self.legs)[name]


def natural_extension_check(
    system: System,
    params: MeanRankParams | None = None,
    *,
    workers: int = 1,
) -> NatextReport:
    """Compare the direct, reduced and colimit mean ranks of a system.

    The verdict is ``unresolved`` when any leg is bound-only; otherwise
    ``equal`` when all estimates agree exactly and ``disagree`` if not.
    """
    params = params or MeanRankParams()
    carrier, phi = system_for(system)
    _, _, k = carrier.reduced_injective(phi)
    names = ("direct", "reduced", "colimit")
    reports = _run_jobs([(name, system, params) for name in names], workers)
    legs = tuple(zip(names, reports))
    if not all(r.resolved for r in reports):
        verdict = "unresolved"
    elif len({r.estimate for r in reports}) == 1:
        verdict = "equal"
    else:
        verdict = "disagree"
        logger.error(
            "natural extension legs disagree: %s",
            ", ".join(f"{n}={r.estimate}" for n, r in legs),
        )
    logger.info("natural extension verdict: %s", verdict)
    return NatextReport(legs=legs, verdict=verdict, kernel_exponent=k)


@dataclass(frozen=True)
class TowerSpec:
    """A finite tower of systems with connecting maps.

    ``connecting[n]`` is the primal map from level n+1 to level n, a
    ``dim_n x dim_(n+1)`` integer matrix; the dual map is its transpose.

    Raises:
        DimensionMismatchError: If counts or shapes do not fit.
    """

    levels: tuple[System, ...]
    connecting: tuple[IntMatrix, ...]

    def __post_init__(self) -> None:
        if not self.levels:
            raise DimensionMismatchError("A tower needs at least one level")
        if len(self.connecting) != len(self.levels) - 1:
            raise DimensionMismatchError(
                "A tower needs one connecting map per pair of adjacent levels",
                f"{len(self.connecting)} maps for {len(self.levels)} levels",
            )
        for n, matrix in enumerate(self.connecting):
            expected = (_dimension(self.levels[n]), _dimension(self.levels[n + 1]))
            if matrix.shape != expected:
                raise DimensionMismatchError(
                    f"Connecting map {n} has the wrong shape",
                    f"{matrix.rows}x{matrix.cols}, expected {expected[0]}x{expected[1]}",
                )

    def validate(self) -> None:
        """Check commutation and surjectivity of every connecting map.

        Raises:
            InvalidTowerError: Naming the first offending connecting map.
        """
        for n, matrix in enumerate(self.connecting):
            lower, upper = self.levels[n], self.levels[n + 1]
            if isinstance(lower, CASpec) and isinstance(upper, CASpec):
                _check_ca_level(n, lower, upper, matrix)
            elif isinstance(lower, PresEndomorphism) and isinstance(upper, PresEndomorphism):
                _check_presentation_level(n, lower, upper, matrix)
            else:
                raise InvalidTowerError("Adjacent levels are of different kinds", n)


def _dimension(system: System) -> int:
    if isinstance(system, CASpec):
        return system.d
    return system.carrier.generators


def _check_ca_level(n: int, lower: CASpec, upper: CASpec, p: IntMatrix) -> None:
    q = p.transpose()
    dual_lower, dual_upper = dualize_ca(lower), dualize_ca(upper)
    for j in sorted(set(dual_lower.support()) | set(dual_upper.support())):
        if dual_upper.term(j) @ q != q @ dual_lower.term(j):
            raise InvalidTowerError(
                f"Connecting map does not commute with the dynamics at index {j}", n
            )
    if rank(q) != lower.d:
        raise InvalidTowerError("Connecting map is not surjective", n)


def _check_presentation_level(
    n: int, lower: PresEndomorphism, upper: PresEndomorphism, p: IntMatrix
) -> None:
    q = p.transpose()
    r_low, r_up = lower.carrier.relations, upper.carrier.relations
    for j in range(r_low.cols):
        if not in_lattice(r_up, q.matvec(r_low.column(j))):
            raise InvalidTowerError("Dual connecting map is not well defined on relations", n)
    for i in range(lower.carrier.generators):
        e = tuple(1 if k == i else 0 for k in range(lower.carrier.generators))
        lhs = q.matvec(lower.matrix.matvec(e))
        rhs = upper.matrix.matvec(q.matvec(e))
        if not in_lattice(r_up, tuple(a - b for a, b in zip(lhs, rhs))):
            raise InvalidTowerError(
                f"Connecting map does not commute with the dynamics on generator {i}", n
            )
    g_low = lower.carrier.generators
    kernel = kernel_basis(q.hstack(-r_up))
    for column in kernel.to_columns():
        if not in_lattice(r_low, column[:g_low]):
            raise InvalidTowerError("Connecting map is not surjective", n)


@dataclass(frozen=True)
class TowerReport:
    """Per-level mean ranks and their supremum over the provided levels."""

    levels: tuple[MeanRankReport, ...]
    supremum: Fraction | None
    status: RankStatus
    citations: tuple[str, ...] = (TOWER_CITATION,)

    @property
    def running_supremum(self) -> list[Fraction | None]:
        out: list[Fraction | None] = []
        best: Fraction | None = None
        for report in self.levels:
            if report.estimate is not None and (best is None or report.estimate > best):
                best = report.estimate
            out.append(best)
        return out


def tower_mean_rank(
    tower: TowerSpec,
    params: MeanRankParams | None = None,
    *,
    workers: int = 1,
) -> TowerReport:
    """Mean rank of every level and the supremum over the tower.

    Raises:
        InvalidTowerError: If a connecting map fails validation.
    """
    params = params or MeanRankParams()
    tower.validate()
    reports = _run_jobs([("direct", level, params) for level in tower.levels], workers)
    resolved = [r.estimate for r in reports if r.resolved and r.estimate is not None]
    supremum = max(resolved) if resolved else None
    if len(resolved) < len(reports):
        status = RankStatus.BOUND_ONLY
    elif all(r.status is RankStatus.EXACT_FORCED for r in reports):
        status = RankStatus.EXACT_FORCED
    else:
        status = RankStatus.INCREMENT_STABLE
    logger.info("tower of %d levels: supremum %s (%s)", len(reports), supremum, status.value)
    return TowerReport(levels=tuple(reports), supremum=supremum, status=status)
