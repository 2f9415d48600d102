"""
Algebraic cellular automata on (T^d)^Z and their duals.

An algebraic cellular automaton with support ``I`` and integer matrices
``M_j`` sends a configuration ``x`` to ``F(x)_n = sum_j M_j x_(n+j)``.
Its Pontryagin dual acts on the characters ``⊕_Z Z^d`` by the convolution
``(F̂χ)_m = sum_j M_j^T χ_(m-j)``, so the mean dimension of the automaton
is the mean rank of this Laurent-matrix convolution.

The pairing between characters and configurations is
``<χ, x> = sum_n χ_n · x_n`` in Q/Z, with rational representatives for the
torus coordinates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any

from mdim_algebraic.exceptions import (
    DimensionMismatchError,
    InvalidElementError,
    InvariantViolationError,
)
from mdim_algebraic.linalg import IntMatrix, determinant, rank
from mdim_algebraic.trajectory import (
    Coordinates,
    DiscreteModule,
    ImageCarrier,
    MeanRankParams,
    MeanRankReport,
    mean_rank,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

DUALITY_CITATION = (
    "The mean dimension of an algebraic dynamical system equals the mean rank "
    "of its Pontryagin dual endomorphism."
)
CA_CITATION = (
    "For an algebraic cellular automaton on (T^d)^Z the dual is the convolution "
    "by the transposed local-rule coefficients on the direct sum of copies of Z^d."
)

TorusConfiguration = dict[int, tuple[Fraction, ...]]


@dataclass(frozen=True)
class SupportedVector:
    """A finitely supported element of ``⊕_Z Z^d``.

    Attributes:
        d: Block size.
        entries: ``(site, vector)`` pairs sorted by site, zero vectors pruned.
    """

    d: int
    entries: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def __post_init__(self) -> None:
        for _, vec in self.entries:
            if len(vec) != self.d:
                raise DimensionMismatchError(
                    "Block length does not match d", f"{len(vec)} != {self.d}"
                )

    @classmethod
    def from_mapping(cls, d: int, blocks: Mapping[int, Sequence[int]]) -> SupportedVector:
        pruned = [(site, tuple(int(x) for x in vec)) for site, vec in sorted(blocks.items()) if any(vec)]
        return cls(d, tuple(pruned))

    @classmethod
    def zero(cls, d: int) -> SupportedVector:
        return cls(d)

    @classmethod
    def unit(cls, d: int, site: int, index: int) -> SupportedVector:
        """The standard basis vector ``e_(site, index)``."""
        if not 0 <= index < d:
            raise InvalidElementError("Block index out of range", f"{index} for d={d}")
        return cls(d, ((site, tuple(1 if i == index else 0 for i in range(d))),))

    def as_dict(self) -> dict[int, tuple[int, ...]]:
        return dict(self.entries)

    def support(self) -> list[int]:
        return [site for site, _ in self.entries]

    def is_zero(self) -> bool:
        return not self.entries

    def block(self, site: int) -> tuple[int, ...]:
        return self.as_dict().get(site, (0,) * self.d)

    def _combine(self, other: SupportedVector, sign: int) -> SupportedVector:
        if self.d != other.d:
            raise DimensionMismatchError("Block sizes differ", f"{self.d} vs {other.d}")
        blocks = {site: list(vec) for site, vec in self.entries}
        for site, vec in other.entries:
            acc = blocks.setdefault(site, [0] * self.d)
            for i, x in enumerate(vec):
                acc[i] += sign * x
        return SupportedVector.from_mapping(self.d, blocks)

    def __add__(self, other: SupportedVector) -> SupportedVector:
        return self._combine(other, 1)

    def __sub__(self, other: SupportedVector) -> SupportedVector:
        return self._combine(other, -1)

    def __neg__(self) -> SupportedVector:
        return SupportedVector(self.d, tuple((s, tuple(-x for x in v)) for s, v in self.entries))

    def shifted(self, k: int) -> SupportedVector:
        """Translate every block by ``k`` sites."""
        return SupportedVector(self.d, tuple((s + k, v) for s, v in self.entries))

    def coordinates(self) -> Coordinates:
        return {(site, i): x for site, vec in self.entries for i, x in enumerate(vec) if x}


@dataclass(frozen=True)
class LaurentMatrix:
    """A finitely supported family of d x d integer matrices indexed by Z.

    Acts on :class:`SupportedVector` by ``(φ·a)_m = sum_j N_j a_(m-j)``.

    Attributes:
        d: Block size.
        terms: ``(index, matrix)`` pairs sorted by index, zero matrices pruned.
    """

    d: int
    terms: tuple[tuple[int, IntMatrix], ...]

    def __post_init__(self) -> None:
        for index, matrix in self.terms:
            if matrix.shape != (self.d, self.d):
                raise DimensionMismatchError(
                    "Laurent coefficient must be d x d",
                    f"index {index}: {matrix.rows}x{matrix.cols} for d={self.d}",
                )

    @classmethod
    def from_mapping(cls, d: int, terms: Mapping[int, IntMatrix]) -> LaurentMatrix:
        return cls(d, tuple((j, m) for j, m in sorted(terms.items()) if not m.is_zero()))

    @property
    def lo(self) -> int:
        return self.terms[0][0] if self.terms else 0

    @property
    def hi(self) -> int:
        return self.terms[-1][0] if self.terms else 0

    @property
    def span(self) -> int:
        return self.hi - self.lo

    def support(self) -> list[int]:
        return [j for j, _ in self.terms]

    def term(self, index: int) -> IntMatrix:
        return dict(self.terms).get(index, IntMatrix.zeros(self.d, self.d))

    def apply(self, vector: SupportedVector) -> SupportedVector:
        if vector.d != self.d:
            raise DimensionMismatchError("Block sizes differ", f"{vector.d} vs {self.d}")
        blocks: dict[int, list[int]] = {}
        for site, vec in vector.entries:
            for j, matrix in self.terms:
                image = matrix.matvec(vec)
                acc = blocks.setdefault(site + j, [0] * self.d)
                for i, x in enumerate(image):
                    acc[i] += x
        return SupportedVector.from_mapping(self.d, blocks)

    def compose(self, other: LaurentMatrix) -> LaurentMatrix:
        """The convolution ``self ∘ other``."""
        if other.d != self.d:
            raise DimensionMismatchError("Block sizes differ", f"{other.d} vs {self.d}")
        out: dict[int, IntMatrix] = {}
        for i, a in self.terms:
            for j, b in other.terms:
                prod = a @ b
                out[i + j] = out[i + j] + prod if i + j in out else prod
        return LaurentMatrix.from_mapping(self.d, out)

    def power(self, exponent: int) -> LaurentMatrix:
        result = LaurentMatrix(self.d, ((0, IntMatrix.identity(self.d)),))
        for _ in range(exponent):
            result = result.compose(self)
        return result

    def evaluate(self, t: int) -> IntMatrix:
        """The integer matrix ``sum_j N_j t^(j - lo)``."""
        total = IntMatrix.zeros(self.d, self.d)
        for j, matrix in self.terms:
            total = total + matrix.scale(t ** (j - self.lo))
        return total


@dataclass(frozen=True)
class CASpec:
    """An algebraic cellular automaton on ``(T^d)^Z``.

    The local rule is ``f((x_(n+j))_(j in I)) = sum_j M_j x_(n+j)`` with
    ``coefficients[k]`` the matrix for ``support[k]``.

    Raises:
        ValueError: If the support is empty or has repeated entries.
        DimensionMismatchError: If a coefficient is not d x d.
    """

    d: int
    support: tuple[int, ...]
    coefficients: tuple[IntMatrix, ...]

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if not self.support:
            raise ValueError("support must be nonempty")
        if len(set(self.support)) != len(self.support):
            raise ValueError(f"support entries must be distinct: {list(self.support)}")
        if len(self.coefficients) != len(self.support):
            raise DimensionMismatchError(
                "One coefficient per support index is required",
                f"{len(self.coefficients)} coefficients for {len(self.support)} indices",
            )
        for j, matrix in zip(self.support, self.coefficients):
            if matrix.shape != (self.d, self.d):
                raise DimensionMismatchError(
                    "Coefficient must be d x d",
                    f"index {j}: {matrix.rows}x{matrix.cols} for d={self.d}",
                )

    @classmethod
    def from_mapping(cls, d: int, coefficients: Mapping[int, Sequence[Sequence[int]]]) -> CASpec:
        support = tuple(coefficients)
        return cls(d, support, tuple(IntMatrix.from_rows(coefficients[j], d) for j in support))

    @classmethod
    def unit(cls, d: int) -> CASpec:
        """The unit automaton ``I = {1}`` with identity coefficient (the full shift)."""
        return cls(d, (1,), (IntMatrix.identity(d),))

    def coefficient(self, index: int) -> IntMatrix:
        return dict(zip(self.support, self.coefficients)).get(index, IntMatrix.zeros(self.d, self.d))


def dualize_ca(spec: CASpec) -> LaurentMatrix:
    """Dual convolution with term ``M_j^T`` at each ``j`` in the support."""
    terms: dict[int, IntMatrix] = {j: m.transpose() for j, m in zip(spec.support, spec.coefficients)}
    return LaurentMatrix.from_mapping(spec.d, terms)


def apply_laurent(phi: LaurentMatrix, vector: SupportedVector) -> SupportedVector:
    """Apply a Laurent matrix by convolution.

    Raises:
        DimensionMismatchError: If the block sizes differ.
    """
    return phi.apply(vector)


def _reduce_mod_one(values: Iterable[Fraction]) -> tuple[Fraction, ...]:
    return tuple(v % 1 for v in values)


def evolve_configuration(spec: CASpec, config: Mapping[int, Sequence[Fraction]]) -> TorusConfiguration:
    """Apply the automaton to a finitely supported torus configuration.

    Args:
        spec: The automaton.
        config: Site to rational coordinates (read modulo 1); absent sites are 0.

    Returns:
        ``F(config)`` with zero sites pruned and coordinates in [0, 1).
    """
    out: dict[int, list[Fraction]] = {}
    for site, values in config.items():
        if len(values) != spec.d:
            raise DimensionMismatchError("Torus point has wrong length", f"site {site}")
        for j, matrix in zip(spec.support, spec.coefficients):
            acc = out.setdefault(site - j, [Fraction(0)] * spec.d)
            for i in range(spec.d):
                acc[i] += sum((matrix[i, k] * Fraction(values[k]) for k in range(spec.d)), Fraction(0))
    result: TorusConfiguration = {}
    for site in sorted(out):
        reduced = _reduce_mod_one(out[site])
        if any(reduced):
            result[site] = reduced
    return result


def pair(character: SupportedVector, config: Mapping[int, Sequence[Fraction]]) -> Fraction:
    """The pairing ``<χ, x>`` in Q/Z, returned in [0, 1)."""
    total = Fraction(0)
    for site, vec in character.entries:
        values = config.get(site)
        if values is None:
            continue
        total += sum((a * Fraction(b) for a, b in zip(vec, values)), Fraction(0))
    return total % 1


def eventual_kernel_exponent(phi: LaurentMatrix) -> int:
    """Smallest k with ``ker φ^k == ker φ^(k+1)`` on ``⊕_Z Z^d``.

    Kernels of powers are saturated submodules of a free module over the
    Laurent polynomials, so they stabilize exactly when the generic rank of
    the powers does. The generic rank of ``φ^j`` is the largest rank of the
    integer matrix ``P(t)^j`` for ``t = 0..D`` with ``P(t) = sum_j N_j t^(j-lo)``
    and ``D`` the degree bound ``d * j * span`` of its minors.
    """
    d = phi.d

    def generic_rank(j: int) -> int:
        if j == 0:
            return d
        if not phi.terms:
            return 0
        bound = d * j * phi.span
        best = 0
        for t in range(bound + 1):
            best = max(best, rank(phi.evaluate(t).power(j)))
            if best == d:
                break
        return best

    ranks = [generic_rank(0)]
    for j in range(d + 1):
        ranks.append(generic_rank(j + 1))
        if ranks[j] == ranks[j + 1]:
            logger.debug("generic ranks %s stabilize at exponent %d", ranks, j)
            return j
    return d


@dataclass(frozen=True)
class ShiftCarrier(DiscreteModule[SupportedVector, LaurentMatrix]):
    """The carrier ``⊕_Z Z^d`` with window schedule ``E_W``.

    ``E_W`` holds the standard basis vectors at sites ``-W..W``.
    """

    d: int
    kind = "shift"

    def apply(self, phi: LaurentMatrix, element: SupportedVector) -> SupportedVector:
        return phi.apply(element)

    def coordinates(self, element: SupportedVector) -> Coordinates:
        return element.coordinates()

    def validate(self, element: SupportedVector) -> None:
        if not isinstance(element, SupportedVector):
            raise InvalidElementError("Expected a SupportedVector", type(element).__name__)
        if element.d != self.d:
            raise InvalidElementError("Block size does not match carrier", f"{element.d} != {self.d}")

    def window(self, w: int) -> list[SupportedVector]:
        return [SupportedVector.unit(self.d, site, i) for site in range(-w, w + 1) for i in range(self.d)]

    def generator_schedule(self, max_window: int) -> list[list[SupportedVector]]:
        return [self.window(w) for w in range(max_window + 1)]

    def growth_ceiling(self, phi: LaurentMatrix) -> int:
        if not phi.terms:
            return 0
        return self.d * (max(0, phi.hi) - min(0, phi.lo))

    def certified_bounds(self, phi: LaurentMatrix, elements: Sequence[SupportedVector]) -> tuple[int, int]:
        """Bounds from the extreme terms.

        If the top term ``N_hi`` (hi > 0) is nonsingular and the set holds all
        unit vectors on at least ``hi`` consecutive sites, the leading blocks of
        ``φ^i(e)`` land on distinct sites and stay independent, so the mean
        rank is at least ``d * hi``. The bottom term gives the mirror bound.
        """
        ceiling = self.growth_ceiling(phi)
        if ceiling == 0:
            return 0, 0
        run = _longest_unit_run(self.d, elements)
        lower = 0
        if phi.hi > 0 and run >= phi.hi and determinant(phi.term(phi.hi)) != 0:
            lower = max(lower, self.d * phi.hi)
        if phi.lo < 0 and run >= -phi.lo and determinant(phi.term(phi.lo)) != 0:
            lower = max(lower, -self.d * phi.lo)
        return lower, ceiling

    def check_layer(
        self,
        phi: LaurentMatrix,
        elements: Sequence[SupportedVector],
        step: int,
        layer: Sequence[SupportedVector],
    ) -> None:
        first, last = layer_support_bound(phi, elements, step)
        for element in layer:
            outside = [site for site in element.support() if not first <= site <= last]
            if outside:
                raise InvariantViolationError(
                    "Trajectory layer leaves its support bound",
                    f"step {step}: sites {outside} outside [{first}, {last}]",
                )

    def reduced_injective(self, phi: LaurentMatrix) -> tuple[DiscreteModule[Any, Any], LaurentMatrix, int]:
        k = eventual_kernel_exponent(phi)
        if k == 0:
            return self, phi, 0
        return ImageCarrier(self, phi, k), phi, k


def _longest_unit_run(d: int, elements: Iterable[SupportedVector]) -> int:
    present: dict[int, set[int]] = {}
    for el in elements:
        if len(el.entries) != 1:
            continue
        site, vec = el.entries[0]
        nonzero = [i for i, x in enumerate(vec) if x]
        if len(nonzero) == 1 and abs(vec[nonzero[0]]) == 1:
            present.setdefault(site, set()).add(nonzero[0])
    full = sorted(site for site, idx in present.items() if len(idx) == d)
    best = run = 0
    for k, site in enumerate(full):
        run = run + 1 if k and site == full[k - 1] + 1 else 1
        best = max(best, run)
    return best


def layer_support_bound(
    phi: LaurentMatrix, elements: Iterable[SupportedVector], step: int
) -> tuple[int, int]:
    """Sites that can carry ``φ^step(E)``: ``support(E) + step * [lo, hi]``.

    Returns ``(0, -1)`` for an empty support.
    """
    sites = [s for el in elements for s in el.support()]
    if not sites:
        return 0, -1
    return min(sites) + step * phi.lo, max(sites) + step * phi.hi


def ca_mean_dimension(
    spec: CASpec,
    params: MeanRankParams | None = None,
    *,
    workers: int = 1,
) -> MeanRankReport:
    """Mean dimension of an algebraic cellular automaton via its dual."""
    return mean_rank(
        ShiftCarrier(spec.d),
        dualize_ca(spec),
        params,
        workers=workers,
        label="mean dimension of (X^Z, F)",
        citations=(DUALITY_CITATION, CA_CITATION),
    )
