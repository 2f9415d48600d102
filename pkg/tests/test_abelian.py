"""
Tests for finitely generated abelian groups and their endomorphisms.
"""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdim_algebraic.abelian import (
    GroupElement,
    GroupPresentation,
    PresEndomorphism,
    PresentationCarrier,
    eventual_kernel,
    eventual_kernel_exponent,
    is_endomorphism,
    quotient_projection,
    reduced_injective_quotient,
    subgroup_rank,
)
from mdim_algebraic.exceptions import (
    DimensionMismatchError,
    InvalidElementError,
    NotEndomorphismError,
)
from mdim_algebraic.linalg import IntMatrix, kernel_basis, lattice_equal, rank
from mdim_algebraic.trajectory import (
    MeanRankParams,
    RankStatus,
    mean_rank,
    trajectory_rank_sequence,
)
from tests.strategies import (
    PROPERTY_SETTINGS,
    free_endomorphisms,
    group_elements,
    presentations,
)


def endo(rows: list[list[int]], relations: list[list[int]] | None = None) -> PresEndomorphism:
    g = len(rows)
    return PresEndomorphism(
        GroupPresentation.from_relation_columns(g, relations or []), IntMatrix.from_rows(rows, g)
    )


class TestGroupElement:
    """Tests for coset representatives."""

    def test_arithmetic(self) -> None:
        """Test sums, differences and scaling."""
        a = GroupElement((1, 2))
        b = GroupElement((3, -1))
        assert (a + b).coords == (4, 1)
        assert (a - b).coords == (-2, 3)
        assert (-a).coords == (-1, -2)
        assert a.scale(3).coords == (3, 6)

    def test_length_mismatch(self) -> None:
        """Test that elements of different lengths do not add."""
        with pytest.raises(DimensionMismatchError):
            GroupElement((1,)) + GroupElement((1, 2))


class TestGroupPresentation:
    """Tests for presentations."""
    def test_free_group(self) -> None:
        """Test the free abelian group."""
        pres = GroupPresentation.free(3)
        assert pres.rank == 3
        assert pres.invariants() == (3, ())

    def test_torsion(self, torsion_group: GroupPresentation) -> None:
        """Test Z + Z/4."""
        assert torsion_group.rank == 1
        assert torsion_group.invariants() == (1, (4,))
        assert torsion_group.same_element(GroupElement((0, 4)), torsion_group.zero())
        assert not torsion_group.same_element(GroupElement((0, 2)), torsion_group.zero())

    def test_canonicalize(self) -> None:
        """Test that Z^2 / <(2, 0), (0, 3)> is Z/6."""
        pres = GroupPresentation.from_relation_columns(2, [[2, 0], [0, 3]])
        assert pres.invariants() == (0, (6,))
        canonical = pres.canonicalize()
        assert canonical.generators == 1
        assert canonical.relations.to_rows() == [[6]]
        assert pres.is_isomorphic(canonical)
        assert not pres.is_isomorphic(GroupPresentation.from_relation_columns(2, [[2, 0], [0, 2]]))

    def test_relation_rows_must_match(self) -> None:
        """Test that the relation matrix needs one row per generator."""
        with pytest.raises(DimensionMismatchError):
            GroupPresentation(2, IntMatrix.zeros(3, 0))

    def test_element_validation(self, torsion_group: GroupPresentation) -> None:
        """Test that elements of the wrong length are rejected."""
        assert torsion_group.element(1, 3).coords == (1, 3)
        with pytest.raises(InvalidElementError):
            torsion_group.element(1, 2, 3)

    @PROPERTY_SETTINGS
    @given(presentations(), st.data())
    def test_same_element_is_equivalence(
        self, pres: GroupPresentation, data: st.DataObject
    ) -> None:
        """Test that equality modulo relations is an equivalence relation."""
        g = pres.generators
        a = data.draw(group_elements(g))
        other = data.draw(group_elements(g))
        c_count = pres.relations.cols
        shifts = st.lists(st.integers(-3, 3), min_size=c_count, max_size=c_count)
        b = a + GroupElement(pres.relations.matvec(data.draw(shifts)))
        c = b + GroupElement(pres.relations.matvec(data.draw(shifts)))
        assert pres.same_element(a, a)
        assert pres.same_element(a, b) and pres.same_element(b, a)
        assert pres.same_element(b, c) and pres.same_element(a, c)
        assert pres.same_element(a, other) == pres.same_element(other, a)
        assert pres.same_element(b, other) == pres.same_element(a, other)


class TestEndomorphisms:
    """Tests for endomorphisms of presentations."""

    def test_relation_lattice_preserved(self, torsion_group: GroupPresentation) -> None:
        """Test the endomorphism check."""
        assert is_endomorphism(torsion_group, IntMatrix.from_rows([[1, 0], [0, 2]]))
        assert not is_endomorphism(torsion_group, IntMatrix.from_rows([[1, 1], [0, 1]]))

    def test_not_endomorphism(self, torsion_group: GroupPresentation) -> None:
        """Test that a matrix moving a relation out of the lattice is rejected."""
        with pytest.raises(NotEndomorphismError):
            PresEndomorphism(torsion_group, IntMatrix.from_rows([[1, 1], [0, 1]]))

    def test_wrong_shape(self, torsion_group: GroupPresentation) -> None:
        """Test that a non-square matrix is rejected."""
        with pytest.raises(DimensionMismatchError):
            PresEndomorphism(torsion_group, IntMatrix.identity(3))

    def test_apply_and_power(self, nilpotent_endo: PresEndomorphism) -> None:
        """Test application and powers."""
        assert nilpotent_endo.apply(GroupElement((0, 1))).coords == (1, 0)
        assert nilpotent_endo.power(2).matrix.is_zero()


class TestSubgroupRank:
    """Tests for torsion-free ranks of subgroups."""

    def test_torsion_elements(self, torsion_group: GroupPresentation) -> None:
        """Test that torsion elements have rank 0."""
        assert subgroup_rank(torsion_group, [GroupElement((0, 1))]) == 0
        assert subgroup_rank(torsion_group, [GroupElement((1, 0)), GroupElement((2, 1))]) == 1
        assert subgroup_rank(torsion_group, []) == 0

    def test_wrong_length(self, torsion_group: GroupPresentation) -> None:
        """Test that elements of the wrong length raise."""
        with pytest.raises(DimensionMismatchError):
            subgroup_rank(torsion_group, [GroupElement((1,))])

    @PROPERTY_SETTINGS
    @given(presentations(), st.data())
    def test_subgroup_rank_monotone(self, pres: GroupPresentation, data: st.DataObject) -> None:
        """Test that rank grows under inclusion and ignores relation shifts."""
        elems = data.draw(st.lists(group_elements(pres.generators), min_size=1, max_size=4))
        cut = data.draw(st.integers(0, len(elems)))
        full = subgroup_rank(pres, elems)
        assert subgroup_rank(pres, elems[:cut]) <= full <= pres.rank
        assert subgroup_rank(pres, elems + elems[:1]) == full
        if pres.relations.cols:
            shifted = elems[0] + GroupElement(pres.relations.column(0))
            assert subgroup_rank(pres, [*elems, shifted]) == full


class TestEventualKernel:
    """Tests for the eventual kernel and the reduced quotient."""

    def test_nilpotent(self, nilpotent_endo: PresEndomorphism) -> None:
        """Test that a nilpotent map kills everything after two steps."""
        assert eventual_kernel(nilpotent_endo).shape == (2, 2)
        assert eventual_kernel_exponent(nilpotent_endo) == 2
        reduced = reduced_injective_quotient(nilpotent_endo)
        assert reduced.carrier.generators == 0

    def test_injective(self, swap_endo: PresEndomorphism) -> None:
        """Test that an injective map has a trivial eventual kernel."""
        assert eventual_kernel(swap_endo).shape == (2, 0)
        assert eventual_kernel_exponent(swap_endo) == 0
        reduced = reduced_injective_quotient(swap_endo)
        assert reduced.carrier.generators == 2

    def test_torsion_is_absorbed(self) -> None:
        """Test that torsion lies in the eventual kernel."""
        e = endo([[1, 0], [0, 2]], [[0, 4]])
        assert eventual_kernel(e).cols == 1
        reduced = reduced_injective_quotient(e)
        assert reduced.carrier.generators == 1
        assert reduced.matrix.to_rows() == [[1]]

    def test_induced_map(self) -> None:
        """Test the induced map on Z^2 / <(1, -2)>."""
        e = endo([[2, 1], [0, 0]])
        assert eventual_kernel_exponent(e) == 1
        q = quotient_projection(e)
        assert q.shape == (1, 2)
        assert q.matvec((1, -2)) == (0,)
        reduced = reduced_injective_quotient(e)
        assert reduced.matrix.to_rows() == [[2]]

    @PROPERTY_SETTINGS
    @given(free_endomorphisms())
    def test_quotient_sequence(self, e: PresEndomorphism) -> None:
        """Test that quotient ranks equal rk(T_n + K) - rk(K) and limits agree."""
        pres = e.carrier
        g = pres.generators
        kernel = [GroupElement(tuple(c)) for c in eventual_kernel(e).to_columns()]
        base = [pres.basis_element(i) for i in range(g)]
        n = 6

        expected = []
        trajectory: list[GroupElement] = []
        frontier = list(base)
        for _ in range(n):
            trajectory.extend(frontier)
            expected.append(
                subgroup_rank(pres, trajectory + kernel) - subgroup_rank(pres, kernel)
            )
            frontier = [e.apply(x) for x in frontier]

        reduced = reduced_injective_quotient(e)
        q = quotient_projection(e)
        images = [GroupElement(q.matvec(x.coords)) for x in base]
        if reduced.carrier.generators == 0:
            assert expected == [0] * n
            return
        carrier = PresentationCarrier(reduced.carrier)
        assert trajectory_rank_sequence(carrier, reduced, images, n) == expected
        direct = trajectory_rank_sequence(PresentationCarrier(pres), e, base, n)
        assert direct[-1] - direct[-2] == expected[-1] - expected[-2] == 0

    @PROPERTY_SETTINGS
    @given(free_endomorphisms())
    def test_kernel_chain_stops_within_g(self, e: PresEndomorphism) -> None:
        """Test that ker M^k stabilizes at the reported k <= g."""
        g = e.carrier.generators
        k = eventual_kernel_exponent(e)
        assert 0 <= k <= g
        kernel = eventual_kernel(e)
        assert lattice_equal(kernel, kernel_basis(e.matrix.power(k)))
        assert lattice_equal(kernel, kernel_basis(e.matrix.power(k + 1)))
        assert lattice_equal(kernel, kernel_basis(e.matrix.power(g)))
        if k > 0:
            assert not lattice_equal(kernel, kernel_basis(e.matrix.power(k - 1)))

    @PROPERTY_SETTINGS
    @given(free_endomorphisms())
    def test_reduced_map_is_injective(self, e: PresEndomorphism) -> None:
        """Test that the induced map on the quotient has full rank."""
        reduced = reduced_injective_quotient(e)
        assert rank(reduced.matrix) == reduced.carrier.generators
        assert reduced.carrier.generators == e.carrier.generators - eventual_kernel(e).cols


class TestPresentationCarrier:
    """Tests for the presentation carrier."""

    def test_schedule(self, torsion_group: GroupPresentation) -> None:
        """Test that the schedule lists generator prefixes."""
        carrier = PresentationCarrier(torsion_group)
        schedule = carrier.generator_schedule(5)
        assert [len(s) for s in schedule] == [1, 2]
        assert carrier.growth_ceiling(None) == 0

    def test_trivial_group_schedule(self) -> None:
        """Test the schedule of the trivial group."""
        carrier = PresentationCarrier(GroupPresentation.free(0))
        assert carrier.generator_schedule(3) == [[GroupElement(())]]

    def test_relations_seed_coordinates(self, torsion_group: GroupPresentation) -> None:
        """Test that relations become coordinate vectors."""
        carrier = PresentationCarrier(torsion_group)
        assert carrier.relation_vectors() == [{(1,): 4}]
        assert carrier.coordinates(GroupElement((2, 0))) == {(0,): 2}

    def test_validate(self, torsion_group: GroupPresentation) -> None:
        """Test element validation."""
        carrier = PresentationCarrier(torsion_group)
        with pytest.raises(InvalidElementError):
            carrier.validate((1, 2))  # type: ignore[arg-type]

    def test_preimage(self, nilpotent_endo: PresEndomorphism) -> None:
        """Test preimages under a non-surjective map."""
        carrier = PresentationCarrier(nilpotent_endo.carrier)
        x = carrier.preimage(nilpotent_endo, GroupElement((1, 0)))
        assert x is not None
        assert nilpotent_endo.apply(x).coords == (1, 0)
        assert carrier.preimage(nilpotent_endo, GroupElement((0, 1))) is None

    def test_preimage_modulo_relations(self, torsion_group: GroupPresentation) -> None:
        """Test that preimages are taken modulo the relations."""
        e = PresEndomorphism(torsion_group, IntMatrix.from_rows([[1, 0], [0, 3]]))
        carrier = PresentationCarrier(torsion_group)
        x = carrier.preimage(e, GroupElement((0, 1)))
        assert x is not None
        assert carrier.same(e.apply(x), GroupElement((0, 1)))

    def test_mean_rank_is_zero(self, swap_endo: PresEndomorphism) -> None:
        """Test that finitely generated carriers have mean rank 0."""
        report = mean_rank(PresentationCarrier(swap_endo.carrier), swap_endo)
        assert report.estimate == Fraction(0)
        assert report.status is RankStatus.EXACT_FORCED
        assert len(report.schedule_trace) == 1

    def test_single_term_is_unresolved(self, nilpotent_endo: PresEndomorphism) -> None:
        """Test that one trajectory term is not enough."""
        report = mean_rank(
            PresentationCarrier(nilpotent_endo.carrier), nilpotent_endo, MeanRankParams(max_n=1)
        )
        assert report.status is RankStatus.BOUND_ONLY
        assert report.estimate is None
        assert report.upper_bound == 0
