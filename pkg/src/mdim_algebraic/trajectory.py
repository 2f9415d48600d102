"""
Mean-rank engine.

For an endomorphism ``phi`` of a discrete abelian group and a finite
generator set ``E``, the n-trajectory is the subgroup generated by
``E, phi(E), ..., phi^(n-1)(E)`` and ``a_n`` is its torsion-free rank.
The sequence is subadditive and its increments never increase, so
``lim a_n / n`` exists, equals ``inf a_n / n`` and equals the eventual
increment. The engine computes ``a_1..a_N`` incrementally, reports the
running infimum as a certified upper bound and derives an estimate from
certified carrier bounds, a vanishing increment or a stable run of
increments.

Carriers implement :class:`DiscreteModule`; the mean rank of a carrier is
the supremum over an exhausting schedule of generator sets.
"""

from __future__ import annotations

import logging
import time
from abc import ABC, abstractmethod
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import TYPE_CHECKING, Any, Generic, TypeVar

from mdim_algebraic.exceptions import (
    BudgetExceededError,
    InvalidElementError,
    RankCertificationError,
)
from mdim_algebraic.linalg import IntMatrix, rank

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

logger = logging.getLogger(__name__)

CoordKey = tuple[int, ...]
Coordinates = dict[CoordKey, int]

ElementT = TypeVar("ElementT")
MapT = TypeVar("MapT")


class DiscreteModule(ABC, Generic[ElementT, MapT]):
    """A discrete abelian group with coordinates and a generator schedule.

    Subclasses describe how elements are represented, how an endomorphism
    acts on them and how to enumerate an increasing sequence of finite
    generator sets exhausting the group. Ranks are computed from sparse
    integer coordinates modulo :meth:`relation_vectors`.
    """

    kind: str = "module"

    @abstractmethod
    def apply(self, phi: MapT, element: ElementT) -> ElementT:
        """Apply the endomorphism to an element."""

    @abstractmethod
    def coordinates(self, element: ElementT) -> Coordinates:
        """Sparse integer coordinates of an element; zero entries omitted."""

    @abstractmethod
    def validate(self, element: ElementT) -> None:
        """Raise InvalidElementError if the element does not belong here."""

    @abstractmethod
    def generator_schedule(self, max_window: int) -> list[list[ElementT]]:
        """Increasing generator sets E_0, E_1, ... exhausting the carrier."""

    @abstractmethod
    def growth_ceiling(self, phi: MapT) -> int:
        """An integer upper bound for the mean rank of the whole carrier."""

    def relation_vectors(self) -> list[Coordinates]:
        """Coordinates spanning the relations; empty for free carriers."""
        return []

    def certified_bounds(self, phi: MapT, elements: Sequence[ElementT]) -> tuple[int, int]:
        """Certified ``(lower, upper)`` bounds on the mean rank of a set."""
        del elements
        return 0, self.growth_ceiling(phi)

    def check_layer(
        self, phi: MapT, elements: Sequence[ElementT], step: int, layer: Sequence[ElementT]
    ) -> None:
        """Raise InvariantViolationError if ``layer = phi^step(elements)`` is impossible.

        Carriers without a structural bound on their layers accept everything.
        """
        del phi, elements, step, layer

    def rank_of_span(self, elements: Iterable[ElementT]) -> int:
        """Torsion-free rank of the subgroup generated by ``elements``."""
        store = EchelonStore()
        for relation in self.relation_vectors():
            store.insert(relation)
        baseline = store.rank
        for element in elements:
            store.insert(self.coordinates(element))
        return store.rank - baseline

    def same(self, a: ElementT, b: ElementT) -> bool:
        """Equality of two elements in the carrier."""
        return self.coordinates(a) == self.coordinates(b)

    def preimage(self, phi: MapT, element: ElementT) -> ElementT | None:
        """An element mapped onto ``element`` by ``phi``, when one is known."""
        del phi, element
        return None

    def reduced_injective(self, phi: MapT) -> tuple[DiscreteModule[Any, Any], Any, int]:
        """Quotient by the eventual kernel of ``phi``.

        Returns:
            ``(carrier, map, k)`` where ``k`` is the exponent at which the
            kernels of the powers of ``phi`` stabilize.
        """
        return self, phi, 0


class EchelonStore:
    """Sparse integer row echelon basis keyed by ordered coordinates.

    Each stored row is primitive with a positive pivot at its smallest key.
    Only the span over the rationals matters, so inserted vectors may be
    rescaled freely.
    """

    def __init__(self) -> None:
        self._rows: dict[CoordKey, Coordinates] = {}

    @property
    def rank(self) -> int:
        return len(self._rows)

    def insert(self, vector: Coordinates) -> bool:
        """Reduce ``vector`` against the basis and keep any remainder.

        Returns:
            True if the rank increased.
        """
        v = {k: a for k, a in vector.items() if a}
        while v:
            pivot = min(v)
            row = self._rows.get(pivot)
            if row is None:
                self._rows[pivot] = _primitive(v)
                return True
            a, b = v[pivot], row[pivot]
            g = gcd(a, b)
            sa, sb = b // g, a // g
            merged = {k: sa * x for k, x in v.items()}
            for k, x in row.items():
                merged[k] = merged.get(k, 0) - sb * x
            v = _primitive({k: x for k, x in merged.items() if x}) if merged else {}
        return False

    def rows(self) -> list[Coordinates]:
        """Stored rows in pivot order."""
        return [dict(self._rows[k]) for k in sorted(self._rows)]


def _primitive(vector: Coordinates) -> Coordinates:
    if not vector:
        return vector
    content = 0
    for x in vector.values():
        content = gcd(content, x)
    if vector[min(vector)] < 0:
        content = -content
    return {k: x // content for k, x in vector.items()}


def dense_rank(vectors: Sequence[Coordinates], *, verify: bool = False) -> int:
    """Rank of sparse coordinate vectors through the dense linalg path."""
    keys = sorted({k for v in vectors for k in v})
    if not keys or not vectors:
        return 0
    index = {k: j for j, k in enumerate(keys)}
    rows = [[0] * len(keys) for _ in vectors]
    for i, v in enumerate(vectors):
        for k, x in v.items():
            rows[i][index[k]] = x
    return rank(IntMatrix.from_rows(rows), verify=verify)


class TrajectoryBasis(Generic[ElementT, MapT]):
    """Incrementally maintained generating set of the n-trajectory.

    Step n inserts ``phi^(n-1)(E)`` into an echelon store seeded with the
    carrier relations and records the resulting rank ``a_n``.

    Attributes:
        carrier: The carrier.
        phi: The endomorphism.
        elements: The generator set E.
        rank_sequence: The ranks a_1, a_2, ... computed so far.
        frontier: The images ``phi^n(E)`` waiting to be inserted.
    """

    def __init__(
        self,
        carrier: DiscreteModule[ElementT, MapT],
        phi: MapT,
        elements: Sequence[ElementT],
        *,
        verify: bool = False,
    ) -> None:
        if not elements:
            raise InvalidElementError("Generator set must be nonempty")
        for element in elements:
            carrier.validate(element)
        self.carrier = carrier
        self.phi = phi
        self.verify = verify
        self.elements: list[ElementT] = list(elements)
        self.frontier: list[ElementT] = list(elements)
        self.rank_sequence: list[int] = []
        self._store = EchelonStore()
        self._relations = carrier.relation_vectors()
        for relation in self._relations:
            self._store.insert(relation)
        self._baseline = self._store.rank
        self._inserted: list[Coordinates] = []

    @property
    def rank(self) -> int:
        return self._store.rank - self._baseline

    def step(self) -> int:
        """Insert the current frontier and advance it by one application."""
        if self.verify:
            step = len(self.rank_sequence)
            self.carrier.check_layer(self.phi, self.elements, step, self.frontier)
        for element in self.frontier:
            coords = self.carrier.coordinates(element)
            self._store.insert(coords)
            if self.verify:
                self._inserted.append(coords)
        a_n = self.rank
        self.rank_sequence.append(a_n)
        if self.verify:
            self._cross_check(a_n)
        self.frontier = [self.carrier.apply(self.phi, e) for e in self.frontier]
        logger.debug("trajectory step %d: rank %d", len(self.rank_sequence), a_n)
        return a_n

    def _cross_check(self, a_n: int) -> None:
        base = dense_rank(self._relations, verify=True)
        total = dense_rank(self._relations + self._inserted, verify=True)
        if total - base != a_n:
            raise RankCertificationError(
                "Echelon store rank disagrees with exact rank",
                f"step {len(self.rank_sequence)}: store {a_n}, exact {total - base}",
            )


class RankStatus(Enum):
    """How a mean-rank estimate was obtained."""

    EXACT_FORCED = "exact-forced"
    INCREMENT_STABLE = "increment-stable"
    BOUND_ONLY = "bound-only"


@dataclass(frozen=True)
class MeanRankParams:
    """Budgets for mean-rank computations.

    Attributes:
        max_n: Number of trajectory steps per generator set.
        max_window: Largest schedule index (sets E_0..E_max_window).
        stabilization_window: Trailing increments that must agree.
        stable_schedule_steps: Consecutive schedule sets that must agree.
        colimit_depth: Top level used by colimit carriers.
        verify: Cross-check every rank against the exact path.
        max_seconds: Time budget per generator set, or None.
    """

    max_n: int = 64
    max_window: int = 8
    stabilization_window: int = 5
    stable_schedule_steps: int = 2
    colimit_depth: int = 2
    verify: bool = False
    max_seconds: float | None = None

    def __post_init__(self) -> None:
        if self.max_n < 1:
            raise ValueError("max_n must be at least 1")
        if self.max_window < 0:
            raise ValueError("max_window must be nonnegative")
        if self.stabilization_window < 1:
            raise ValueError("stabilization_window must be at least 1")
        if self.stable_schedule_steps < 1:
            raise ValueError("stable_schedule_steps must be at least 1")
        if self.colimit_depth < 0:
            raise ValueError("colimit_depth must be nonnegative")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive")

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ScheduleEntry:
    """Outcome of one generator set of a schedule."""

    index: int
    size: int
    rank_sequence: tuple[int, ...]
    upper_bound: Fraction
    estimate: Fraction | None
    status: RankStatus
    reason: str


@dataclass(frozen=True)
class MeanRankReport:
    """Result of a mean-rank computation.

    For a single generator set ``upper_bound`` is ``min a_n / n``; for a
    whole carrier it is the carrier's growth ceiling. ``estimate`` is None
    when unresolved.
    """

    label: str
    rank_sequence: tuple[int, ...]
    upper_bound: Fraction
    estimate: Fraction | None
    status: RankStatus
    ceiling: int
    reason: str
    schedule_trace: tuple[ScheduleEntry, ...] = ()
    parameters: dict[str, Any] = field(default_factory=dict)
    citations: tuple[str, ...] = ()
    budget_exhausted: bool = False

    @property
    def increments(self) -> list[int]:
        seq = self.rank_sequence
        return [b - a for a, b in zip(seq, seq[1:])]

    @property
    def resolved(self) -> bool:
        return self.estimate is not None and self.status is not RankStatus.BOUND_ONLY

    @property
    def trajectory_steps(self) -> int:
        if self.schedule_trace:
            return sum(len(e.rank_sequence) for e in self.schedule_trace)
        return len(self.rank_sequence)


def trajectory_rank_sequence(
    carrier: DiscreteModule[ElementT, MapT],
    phi: MapT,
    elements: Sequence[ElementT],
    n: int,
    *,
    verify: bool = False,
    max_seconds: float | None = None,
) -> list[int]:
    """Compute ``a_1..a_n`` for the trajectories of ``elements``.

    Args:
        carrier: The carrier.
        phi: The endomorphism.
        elements: A nonempty generator set.
        n: Number of terms.
        verify: Cross-check each rank against the exact path.
        max_seconds: Optional time budget.

    Returns:
        The rank sequence.

    Raises:
        InvalidElementError: If the set is empty or an element is invalid.
        BudgetExceededError: If the time budget runs out.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    basis = TrajectoryBasis(carrier, phi, elements, verify=verify)
    start = time.monotonic()
    for _ in range(n):
        if max_seconds is not None and time.monotonic() - start > max_seconds:
            raise BudgetExceededError(
                f"Time budget of {max_seconds}s exhausted", basis.rank_sequence
            )
        basis.step()
    return basis.rank_sequence


def _assess(
    carrier: DiscreteModule[ElementT, MapT],
    phi: MapT,
    elements: Sequence[ElementT],
    sequence: list[int],
    params: MeanRankParams,
    budget_exhausted: bool,
    label: str,
) -> MeanRankReport:
    ceiling = carrier.growth_ceiling(phi)
    if sequence:
        upper = min(Fraction(a, i + 1) for i, a in enumerate(sequence))
    else:
        upper = Fraction(ceiling)
    increments = [b - a for a, b in zip(sequence, sequence[1:])]
    k = params.stabilization_window
    estimate: Fraction | None = None
    if budget_exhausted:
        status, reason = RankStatus.BOUND_ONLY, "time budget exhausted"
    elif len(sequence) < 2:
        status, reason = RankStatus.BOUND_ONLY, "insufficient data: fewer than two terms"
    else:
        lower, certified_upper = carrier.certified_bounds(phi, elements)
        if lower == certified_upper:
            status, reason = RankStatus.EXACT_FORCED, "certified lower and upper bounds coincide"
            estimate = Fraction(lower)
        elif 0 in increments:
            status, reason = RankStatus.EXACT_FORCED, "rank sequence stopped growing"
            estimate = Fraction(0)
        elif len(increments) >= k and len(set(increments[-k:])) == 1:
            status = RankStatus.INCREMENT_STABLE
            reason = f"last {k} increments equal {increments[-1]}"
            estimate = Fraction(increments[-1])
        else:
            status, reason = RankStatus.BOUND_ONLY, "increments not stable"
    return MeanRankReport(
        label=label,
        rank_sequence=tuple(sequence),
        upper_bound=upper,
        estimate=estimate,
        status=status,
        ceiling=ceiling,
        reason=reason,
        parameters=params.as_dict(),
        budget_exhausted=budget_exhausted,
    )


def mean_rank_of_set(
    carrier: DiscreteModule[ElementT, MapT],
    phi: MapT,
    elements: Sequence[ElementT],
    params: MeanRankParams | None = None,
    *,
    label: str = "E",
) -> MeanRankReport:
    """Mean rank of a single generator set.

    Args:
        carrier: The carrier.
        phi: The endomorphism.
        elements: A nonempty generator set.
        params: Budgets; defaults apply when None.
        label: Report label.

    Returns:
        A report whose ``upper_bound`` is the running infimum of a_n / n.
    """
    params = params or MeanRankParams()
    budget_exhausted = False
    try:
        sequence = trajectory_rank_sequence(
            carrier,
            phi,
            elements,
            params.max_n,
            verify=params.verify,
            max_seconds=params.max_seconds,
        )
    except BudgetExceededError as e:
        logger.warning("Budget exhausted after %d terms", len(e.partial))
        sequence = e.partial
        budget_exhausted = True
    return _assess(carrier, phi, elements, sequence, params, budget_exhausted, label)


def _evaluate_set(job: tuple[Any, Any, Any, MeanRankParams, int]) -> MeanRankReport:
    carrier, phi, elements, params, index = job
    return mean_rank_of_set(carrier, phi, elements, params, label=f"E_{index}")


def mean_rank(
    carrier: DiscreteModule[ElementT, MapT],
    phi: MapT,
    params: MeanRankParams | None = None,
    *,
    workers: int = 1,
    label: str = "mean rank",
    citations: Sequence[str] = (),
) -> MeanRankReport:
    """Mean rank of a carrier by exhaustion over its generator schedule.

    Sets are processed in schedule order. The report keeps the running
    maximum of resolved estimates and stops once a forced estimate reaches
    the carrier ceiling or ``stable_schedule_steps`` consecutive sets agree.

    Args:
        carrier: The carrier.
        phi: The endomorphism.
        params: Budgets; defaults apply when None.
        workers: Number of processes evaluating schedule sets.
        label: Report label.
        citations: Statements the report relies on.

    Returns:
        The carrier report with one trace entry per evaluated set.
    """
    params = params or MeanRankParams()
    schedule = carrier.generator_schedule(params.max_window)
    ceiling = carrier.growth_ceiling(phi)
    logger.info("%s: %d schedule sets, ceiling %d", label, len(schedule), ceiling)

    trace: list[ScheduleEntry] = []
    best: Fraction | None = None
    best_sequence: tuple[int, ...] = ()
    previous: Fraction | None = None
    streak = 0
    outcome: tuple[RankStatus, str] | None = None
    budget_exhausted = False
    batch = max(1, workers)
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 and len(schedule) > 1 else None

    try:
        for start in range(0, len(schedule), batch):
            jobs = [
                (carrier, phi, schedule[i], params, i)
                for i in range(start, min(start + batch, len(schedule)))
            ]
            results = list(executor.map(_evaluate_set, jobs)) if executor else [_evaluate_set(j) for j in jobs]
            for (_, _, elements, _, index), report in zip(jobs, results):
                trace.append(
                    ScheduleEntry(
                        index=index,
                        size=len(elements),
                        rank_sequence=report.rank_sequence,
                        upper_bound=report.upper_bound,
                        estimate=report.estimate,
                        status=report.status,
                        reason=report.reason,
                    )
                )
                budget_exhausted = budget_exhausted or report.budget_exhausted
                logger.info(
                    "%s: E_%d (%d generators) -> %s (%s)",
                    label,
                    index,
                    len(elements),
                    report.estimate,
                    report.status.value,
                )
                if not report.resolved or report.estimate is None:
                    streak, previous = 0, None
                    continue
                if best is None or report.estimate >= best:
                    best, best_sequence = report.estimate, report.rank_sequence
                streak = streak + 1 if report.estimate == previous else 1
                previous = report.estimate
                if report.status is RankStatus.EXACT_FORCED and report.estimate == ceiling:
                    outcome = (RankStatus.EXACT_FORCED, "forced estimate reaches the carrier ceiling")
                    break
                if streak >= params.stable_schedule_steps:
                    outcome = (
                        RankStatus.INCREMENT_STABLE,
                        f"{streak} consecutive schedule sets agree",
                    )
                    break
            if outcome is not None:
                break
    finally:
        if executor is not None:
            executor.shutdown()

    estimate: Fraction | None = best
    if outcome is None:
        estimate = None
        note = f"; best resolved estimate {best}" if best is not None else ""
        outcome = (RankStatus.BOUND_ONLY, f"schedule exhausted before estimates stabilized{note}")
        if trace and not best_sequence:
            best_sequence = trace[-1].rank_sequence
    status, reason = outcome
    return MeanRankReport(
        label=label,
        rank_sequence=best_sequence,
        upper_bound=Fraction(ceiling),
        estimate=estimate,
        status=status,
        ceiling=ceiling,
        reason=reason,
        schedule_trace=tuple(trace),
        parameters=params.as_dict(),
        citations=tuple(citations),
        budget_exhausted=budget_exhausted,
    )


class ImageCarrier(DiscreteModule[ElementT, MapT]):
    """The image ``phi^k(A)`` of a carrier, generated by ``phi^k`` of its schedule.

    ``A / ker phi^k`` is isomorphic to ``phi^k(A)``, so once ``k`` is past the
    point where the kernels of the powers stabilize, this carrier realizes
    the reduced injective quotient inside the original coordinates.
    """

    kind = "image"

    def __init__(self, base: DiscreteModule[ElementT, MapT], phi: MapT, exponent: int) -> None:
        self.base = base
        self.phi = phi
        self.exponent = exponent

    def _push(self, element: ElementT) -> ElementT:
        for _ in range(self.exponent):
            element = self.base.apply(self.phi, element)
        return element

    def apply(self, phi: MapT, element: ElementT) -> ElementT:
        return self.base.apply(phi, element)

    def coordinates(self, element: ElementT) -> Coordinates:
        return self.base.coordinates(element)

    def validate(self, element: ElementT) -> None:
        self.base.validate(element)

    def relation_vectors(self) -> list[Coordinates]:
        return self.base.relation_vectors()

    def generator_schedule(self, max_window: int) -> list[list[ElementT]]:
        return [[self._push(e) for e in s] for s in self.base.generator_schedule(max_window)]

    def growth_ceiling(self, phi: MapT) -> int:
        return self.base.growth_ceiling(phi)

    def check_layer(
        self, phi: MapT, elements: Sequence[ElementT], step: int, layer: Sequence[ElementT]
    ) -> None:
        self.base.check_layer(phi, elements, step, layer)

    def same(self, a: ElementT, b: ElementT) -> bool:
        return self.base.same(a, b)

    def preimage(self, phi: MapT, element: ElementT) -> ElementT | None:
        return self.base.preimage(phi, element)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ImageCarrier)
            and self.base == other.base
            and self.phi == other.phi
            and self.exponent == other.exponent
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.exponent))

    def __repr__(self) -> str:
        return f"ImageCarrier(base={self.base!r}, exponent={self.exponent})"
