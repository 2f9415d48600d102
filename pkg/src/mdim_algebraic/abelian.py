"""
Finitely generated abelian groups.

A group is presented as ``Z^g`` modulo the column lattice of a relation
matrix. This module provides presentations, their elements and
endomorphisms, subgroup ranks, the eventual kernel of an endomorphism and
the quotient by it, and the carrier used by the mean-rank engine.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from mdim_algebraic.exceptions import (
    DimensionMismatchError,
    InvalidElementError,
    InvariantViolationError,
    NotEndomorphismError,
)
from mdim_algebraic.linalg import (
    IntMatrix,
    hnf,
    in_lattice,
    kernel_basis,
    rank,
    snf,
    solve_in_lattice,
    unimodular_inverse,
)
from mdim_algebraic.trajectory import Coordinates, DiscreteModule

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupElement:
    """A coset representative in ``Z^g``.

    Dataclass equality compares representatives; use
    :meth:`GroupPresentation.same_element` for equality in the group.
    """

    coords: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.coords)

    def _check(self, other: GroupElement) -> None:
        if len(self) != len(other):
            raise DimensionMismatchError("Elements have different lengths")

    def __add__(self, other: GroupElement) -> GroupElement:
        self._check(other)
        return GroupElement(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: GroupElement) -> GroupElement:
        self._check(other)
        return GroupElement(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> GroupElement:
        return GroupElement(tuple(-a for a in self.coords))

    def scale(self, factor: int) -> GroupElement:
        return GroupElement(tuple(factor * a for a in self.coords))


@dataclass(frozen=True)
class GroupPresentation:
    """The group ``Z^g / columnLattice(relations)``.

    Attributes:
        generators: Number of generators g.
        relations: A g x c matrix whose columns span the relation lattice.
    """

    generators: int
    relations: IntMatrix

    def __post_init__(self) -> None:
        if self.generators < 0:
            raise DimensionMismatchError("Generator count must be nonnegative")
        if self.relations.rows != self.generators:
            raise DimensionMismatchError(
                "Relation matrix must have one row per generator",
                f"{self.relations.rows} rows for {self.generators} generators",
            )

    @classmethod
    def free(cls, generators: int) -> GroupPresentation:
        """The free abelian group of the given rank."""
        return cls(generators, IntMatrix.zeros(generators, 0))

    @classmethod
    def from_relation_columns(
        cls, generators: int, columns: Sequence[Sequence[int]]
    ) -> GroupPresentation:
        """Build a presentation from a list of relation columns."""
        return cls(generators, IntMatrix.from_columns(columns, generators))

    @property
    def rank(self) -> int:
        """Torsion-free rank ``g - rank(relations)``."""
        return self.generators - rank(self.relations)

    def element(self, *coords: int) -> GroupElement:
        el = GroupElement(tuple(coords))
        self.validate(el)
        return el

    def zero(self) -> GroupElement:
        return GroupElement((0,) * self.generators)

    def basis_element(self, i: int) -> GroupElement:
        return GroupElement(tuple(1 if j == i else 0 for j in range(self.generators)))

    def validate(self, element: GroupElement) -> None:
        if len(element) != self.generators:
            raise InvalidElementError(
                "Element length does not match generator count",
                f"{len(element)} != {self.generators}",
            )

    def same_element(self, a: GroupElement, b: GroupElement) -> bool:
        """Return True when ``a - b`` lies in the relation lattice."""
        self.validate(a)
        self.validate(b)
        return in_lattice(self.relations, (a - b).coords)

    def invariants(self) -> tuple[int, tuple[int, ...]]:
        """Free rank and torsion coefficients (each > 1) from the Smith form."""
        diagonal = snf(self.relations).diagonal
        torsion = tuple(x for x in diagonal if x > 1)
        return self.generators - len(diagonal), torsion

    def canonicalize(self) -> GroupPresentation:
        """An isomorphic presentation ``Z^f + Z/d_1 + ... + Z/d_k``."""
        free_rank, torsion = self.invariants()
        g = free_rank + len(torsion)
        columns = [
            [d if i == j else 0 for i in range(g)] for j, d in enumerate(torsion)
        ]
        return GroupPresentation.from_relation_columns(g, columns)

    def is_isomorphic(self, other: GroupPresentation) -> bool:
        return self.invariants() == other.invariants()


def is_endomorphism(pres: GroupPresentation, matrix: IntMatrix) -> bool:
    """Return True when ``matrix`` maps the relation lattice into itself.

    Raises:
        DimensionMismatchError: If ``matrix`` is not g x g.
    """
    g = pres.generators
    if matrix.shape != (g, g):
        raise DimensionMismatchError(
            "Endomorphism matrix must be g x g", f"got {matrix.rows}x{matrix.cols} for g={g}"
        )
    return all(
        in_lattice(pres.relations, matrix.matvec(pres.relations.column(j)))
        for j in range(pres.relations.cols)
    )


@dataclass(frozen=True)
class PresEndomorphism:
    """An endomorphism of a presented group given by an integer matrix.

    Raises:
        DimensionMismatchError: If the matrix is not g x g.
        NotEndomorphismError: If a relation is mapped outside the lattice.
    """

    carrier: GroupPresentation
    matrix: IntMatrix

    def __post_init__(self) -> None:
        if not is_endomorphism(self.carrier, self.matrix):
            raise NotEndomorphismError(
                "Matrix does not preserve the relation lattice",
                f"{self.matrix.to_rows()} on relations {self.carrier.relations.to_columns()}",
            )

    def apply(self, element: GroupElement) -> GroupElement:
        self.carrier.validate(element)
        return GroupElement(self.matrix.matvec(element.coords))

    def power(self, exponent: int) -> PresEndomorphism:
        return PresEndomorphism(self.carrier, self.matrix.power(exponent))


def subgroup_rank(pres: GroupPresentation, elems: Sequence[GroupElement]) -> int:
    """Torsion-free rank of the subgroup generated by ``elems``.

    Computed as ``rank([E | R]) - rank(R)``.

    Raises:
        DimensionMismatchError: If an element has the wrong length.
    """
    for el in elems:
        if len(el) != pres.generators:
            raise DimensionMismatchError(
                "Element length does not match generator count",
                f"{len(el)} != {pres.generators}",
            )
    if not elems:
        return 0
    stacked = IntMatrix.from_columns([el.coords for el in elems], pres.generators)
    return rank(stacked.hstack(pres.relations)) - rank(pres.relations)


def _kernel_chain(endo: PresEndomorphism) -> tuple[IntMatrix, int]:
    """Saturated eventual kernel and the exponent where the chain stops."""
    g = endo.carrier.generators
    if g == 0:
        return IntMatrix.zeros(0, 0), 0
    # rows of c map Z^g onto the free part of the group
    c = kernel_basis(endo.carrier.relations.transpose()).transpose()
    previous = kernel_basis(c)
    power = IntMatrix.identity(g)
    for j in range(1, g + 2):
        power = power @ endo.matrix
        current = kernel_basis(c @ power)
        if current == previous:
            logger.debug("eventual kernel of rank %d reached at exponent %d", current.cols, j - 1)
            return current, j - 1
        previous = current
    raise InvariantViolationError("Kernel chain did not stabilize", f"g={g}")


def eventual_kernel(endo: PresEndomorphism) -> IntMatrix:
    """Basis (as columns) of the saturated union of ``ker(M^n)`` and the relations.

    The chain ``ker M ⊆ ker M^2 ⊆ ...`` is followed until two successive
    kernels have equal Hermite forms; it stops within g steps.
    """
    return _kernel_chain(endo)[0]


def eventual_kernel_exponent(endo: PresEndomorphism) -> int:
    """Smallest k with ``ker M^k == ker M^(k+1)`` modulo relations and torsion."""
    return _kernel_chain(endo)[1]


def quotient_projection(endo: PresEndomorphism) -> IntMatrix:
    """The surjection ``Z^g -> Z^(g-r)`` whose kernel is the eventual kernel."""
    projection, _ = _quotient_maps(endo)
    return projection


def _quotient_maps(endo: PresEndomorphism) -> tuple[IntMatrix, IntMatrix]:
    g = endo.carrier.generators
    kernel = eventual_kernel(endo)
    r = kernel.cols
    _, u = hnf(kernel)
    projection = IntMatrix.from_rows([u.row(i) for i in range(r, g)], g)
    inverse = unimodular_inverse(u)
    section = IntMatrix.from_columns([inverse.column(j) for j in range(r, g)], g)
    return projection, section


def reduced_injective_quotient(endo: PresEndomorphism) -> PresEndomorphism:
    """Quotient by the eventual kernel with the induced endomorphism.

    The eventual kernel is saturated and contains the relations, so the
    quotient is free of rank ``g - r``. The induced matrix is injective.
    """
    projection, section = _quotient_maps(endo)
    induced = projection @ endo.matrix @ section
    return PresEndomorphism(GroupPresentation.free(projection.rows), induced)


@dataclass(frozen=True)
class PresentationCarrier(DiscreteModule[GroupElement, PresEndomorphism]):
    """A finitely generated group as a carrier for the mean-rank engine.

    The schedule lists prefixes of the standard generators; the whole group
    is reached after g sets, so the ceiling is 0.
    """

    presentation: GroupPresentation
    kind = "presentation"

    def apply(self, phi: PresEndomorphism, element: GroupElement) -> GroupElement:
        return phi.apply(element)

    def coordinates(self, element: GroupElement) -> Coordinates:
        return {(i,): x for i, x in enumerate(element.coords) if x}

    def validate(self, element: GroupElement) -> None:
        if not isinstance(element, GroupElement):
            raise InvalidElementError("Expected a GroupElement", type(element).__name__)
        self.presentation.validate(element)

    def relation_vectors(self) -> list[Coordinates]:
        rel = self.presentation.relations
        return [{(i,): x for i, x in enumerate(rel.column(j)) if x} for j in range(rel.cols)]

    def generator_schedule(self, max_window: int) -> list[list[GroupElement]]:
        del max_window
        g = self.presentation.generators
        if g == 0:
            return [[self.presentation.zero()]]
        basis = [self.presentation.basis_element(i) for i in range(g)]
        return [basis[: i + 1] for i in range(g)]

    def growth_ceiling(self, phi: PresEndomorphism) -> int:
        del phi
        return 0

    def same(self, a: GroupElement, b: GroupElement) -> bool:
        return self.presentation.same_element(a, b)

    def preimage(self, phi: PresEndomorphism, element: GroupElement) -> GroupElement | None:
        g = self.presentation.generators
        solution = solve_in_lattice(phi.matrix.hstack(self.presentation.relations), element.coords)
        if solution is None:
            return None
        return GroupElement(tuple(solution[:g]))

    def reduced_injective(
        self, phi: PresEndomorphism
    ) -> tuple[PresentationCarrier, PresEndomorphism, int]:
        reduced = reduced_injective_quotient(phi)
        return PresentationCarrier(reduced.carrier), reduced, eventual_kernel_exponent(phi)
