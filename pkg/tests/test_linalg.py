"""
Tests for the exact linear algebra module.
"""

from __future__ import annotations

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from mdim_algebraic.exceptions import DimensionMismatchError, InvariantViolationError
from mdim_algebraic.linalg import (
    MODULAR_PRIMES,
    IntMatrix,
    determinant,
    hnf,
    in_lattice,
    kernel_basis,
    lattice_equal,
    rank,
    snf,
    solve_in_lattice,
    unimodular_inverse,
    xgcd,
)
from mdim_algebraic.linalg import _bareiss_rank as bareiss_rank

PROPERTY_SETTINGS = settings(max_examples=200, derandomize=True, deadline=None)


@st.composite
def int_matrices(draw: st.DrawFn, max_rows: int = 5, max_cols: int = 5, bound: int = 9) -> IntMatrix:
    rows = draw(st.integers(min_value=0, max_value=max_rows))
    cols = draw(st.integers(min_value=0, max_value=max_cols))
    entries = draw(
        st.lists(st.integers(-bound, bound), min_size=rows * cols, max_size=rows * cols)
    )
    return IntMatrix(rows, cols, tuple(entries))


@st.composite
def dependent_row_matrices(draw: st.DrawFn, max_side: int = 12, bound: int = 10) -> IntMatrix:
    """Matrices whose extra rows repeat or negate a few drawn rows."""
    cols = draw(st.integers(min_value=1, max_value=max_side))
    rows = draw(st.integers(min_value=1, max_value=max_side))
    seeds = draw(
        st.lists(
            st.lists(st.integers(-bound, bound), min_size=cols, max_size=cols),
            min_size=1,
            max_size=max(1, rows // 2),
        )
    )
    picks = draw(
        st.lists(
            st.tuples(st.integers(0, len(seeds) - 1), st.sampled_from((1, -1))),
            min_size=rows - len(seeds),
            max_size=rows - len(seeds),
        )
        if rows > len(seeds)
        else st.just([])
    )
    body = list(seeds) + [[sign * x for x in seeds[i]] for i, sign in picks]
    order = draw(st.permutations(range(len(body))))
    return IntMatrix.from_rows([body[i] for i in order], cols)


@st.composite
def square_matrices(draw: st.DrawFn, max_size: int = 4, bound: int = 9) -> IntMatrix:
    n = draw(st.integers(min_value=0, max_value=max_size))
    entries = draw(st.lists(st.integers(-bound, bound), min_size=n * n, max_size=n * n))
    return IntMatrix(n, n, tuple(entries))


def sympy_rank(matrix: IntMatrix) -> int:
    if matrix.rows == 0 or matrix.cols == 0:
        return 0
    return int(sympy.Matrix(matrix.to_rows()).rank())


class TestIntMatrix:
    """Tests for the IntMatrix type."""

    def test_from_rows(self) -> None:
        """Test construction from rows."""
        m = IntMatrix.from_rows([[1, 2, 3], [4, 5, 6]])
        assert m.shape == (2, 3)
        assert m[1, 2] == 6
        assert m.row(0) == (1, 2, 3)
        assert m.column(1) == (2, 5)

    def test_from_columns(self) -> None:
        """Test construction from columns."""
        m = IntMatrix.from_columns([[1, 4], [2, 5]])
        assert m.to_rows() == [[1, 2], [4, 5]]

    def test_empty_shapes(self) -> None:
        """Test that empty matrices keep their shape."""
        assert IntMatrix.from_rows([], 3).shape == (0, 3)
        assert IntMatrix.from_columns([], 2).shape == (2, 0)
        assert IntMatrix.zeros(2, 0).to_columns() == []

    def test_ragged_rows(self) -> None:
        """Test that ragged rows are rejected."""
        with pytest.raises(DimensionMismatchError, match="Ragged"):
            IntMatrix.from_rows([[1, 2], [3]])

    def test_entry_count(self) -> None:
        """Test that the entry count must match the shape."""
        with pytest.raises(DimensionMismatchError):
            IntMatrix(2, 2, (1, 2, 3))

    def test_index_out_of_range(self) -> None:
        """Test indexing outside the matrix."""
        with pytest.raises(IndexError):
            IntMatrix.identity(2)[2, 0]

    def test_arithmetic(self) -> None:
        """Test sums, differences, negation and scaling."""
        a = IntMatrix.from_rows([[1, 2], [3, 4]])
        b = IntMatrix.identity(2)
        assert (a + b).to_rows() == [[2, 2], [3, 5]]
        assert (a - b).to_rows() == [[0, 2], [3, 3]]
        assert (-a).to_rows() == [[-1, -2], [-3, -4]]
        assert a.scale(3) == IntMatrix.from_rows([[3, 6], [9, 12]])

    def test_shape_mismatch(self) -> None:
        """Test that mismatched shapes raise."""
        a = IntMatrix.identity(2)
        with pytest.raises(DimensionMismatchError):
            a + IntMatrix.identity(3)
        with pytest.raises(DimensionMismatchError):
            a @ IntMatrix.zeros(3, 1)
        with pytest.raises(DimensionMismatchError):
            a.matvec((1, 2, 3))

    def test_matmul_and_transpose(self) -> None:
        """Test products and transposes."""
        a = IntMatrix.from_rows([[1, 2, 0], [0, 1, 1]])
        assert (a @ a.T).to_rows() == [[5, 2], [2, 2]]
        assert a.T.shape == (3, 2)
        assert a.matvec((1, 1, 1)) == (3, 2)

    def test_power(self) -> None:
        """Test integer matrix powers."""
        m = IntMatrix.from_rows([[1, 1], [0, 1]])
        assert m.power(5).to_rows() == [[1, 5], [0, 1]]
        assert m.power(0) == IntMatrix.identity(2)
        with pytest.raises(ValueError):
            m.power(-1)
        with pytest.raises(DimensionMismatchError):
            IntMatrix.zeros(1, 2).power(2)

    def test_stacking(self) -> None:
        """Test horizontal and vertical concatenation."""
        a = IntMatrix.identity(2)
        assert a.hstack(IntMatrix.zeros(2, 1)).shape == (2, 3)
        assert a.vstack(IntMatrix.zeros(1, 2)).shape == (3, 2)
        assert a.submatrix([1], [0, 1]).to_rows() == [[0, 1]]

    def test_str(self) -> None:
        """Test the printed form."""
        assert str(IntMatrix.from_rows([[1, -2], [3, 4]])) == "[ 1 -2]\n[ 3  4]"
        assert str(IntMatrix.zeros(0, 2)) == "[] (0x2)"


class TestRank:
    """Tests for rank and determinant."""

    def test_modular_primes_are_prime(self) -> None:
        """Test that the modular path uses primes below 2**31."""
        for p in MODULAR_PRIMES:
            assert sympy.isprime(p)
            assert p < 2**31

    def test_known_ranks(self) -> None:
        """Test ranks of small matrices."""
        assert rank(IntMatrix.identity(3)) == 3
        assert rank(IntMatrix.from_rows([[1, 2], [2, 4]])) == 1
        assert rank(IntMatrix.zeros(3, 3)) == 0
        assert rank(IntMatrix.zeros(0, 4)) == 0

    def test_rank_with_large_entries(self) -> None:
        """Test a rank that depends on entries beyond word size."""
        big = 2**70 + 1
        m = IntMatrix.from_rows([[big, 1], [big * 3, 3]])
        assert rank(m) == 1
        assert rank(m, verify=True) == 1

    def test_rank_modulo_prime_divisor(self) -> None:
        """Test a determinant divisible by one of the modular primes."""
        p = MODULAR_PRIMES[0]
        m = IntMatrix.from_rows([[p, 0], [0, 1]])
        assert rank(m) == 2

    def test_determinant(self) -> None:
        """Test Bareiss determinants."""
        assert determinant(IntMatrix.from_rows([[2, 1], [1, 3]])) == 5
        assert determinant(IntMatrix.from_rows([[0, 1], [1, 0]])) == -1
        assert determinant(IntMatrix.identity(0)) == 1
        with pytest.raises(DimensionMismatchError):
            determinant(IntMatrix.zeros(2, 3))

    @PROPERTY_SETTINGS
    @given(int_matrices(max_rows=12, max_cols=12, bound=10))
    def test_modular_rank_matches_exact(self, matrix: IntMatrix) -> None:
        """Test that the modular path agrees with the fraction-free path and sympy."""
        assert rank(matrix) == bareiss_rank(matrix) == sympy_rank(matrix)

    @PROPERTY_SETTINGS
    @given(dependent_row_matrices())
    def test_rank_deficient_matches_sympy(self, matrix: IntMatrix) -> None:
        """Test rank-deficient matrices up to 12 x 12 against sympy."""
        assert rank(matrix, verify=True) == sympy_rank(matrix)

    @PROPERTY_SETTINGS
    @given(int_matrices(max_rows=4, max_cols=4))
    def test_rank_matches_sympy(self, matrix: IntMatrix) -> None:
        """Test rank against sympy."""
        assert rank(matrix, verify=True) == sympy_rank(matrix)

    @PROPERTY_SETTINGS
    @given(square_matrices())
    def test_determinant_matches_sympy(self, matrix: IntMatrix) -> None:
        """Test determinants against sympy."""
        expected = 1 if matrix.rows == 0 else int(sympy.Matrix(matrix.to_rows()).det())
        assert determinant(matrix) == expected


class TestXgcd:
    """Tests for the extended Euclidean algorithm."""

    @pytest.mark.parametrize(("a", "b"), [(12, 18), (-4, 6), (0, 5), (7, 0), (0, 0), (-3, -9)])
    def test_bezout(self, a: int, b: int) -> None:
        """Test that the coefficients satisfy Bezout's identity."""
        g, x, y = xgcd(a, b)
        assert g >= 0
        assert a * x + b * y == g
        assert g == sympy.gcd(a, b)


class TestHermite:
    """Tests for the Hermite normal form."""

    def test_known_form(self) -> None:
        """Test a small Hermite form."""
        h, u = hnf(IntMatrix.from_rows([[2, 4], [6, 8]]))
        assert h.to_rows() == [[2, 0], [0, 4]]
        assert u @ IntMatrix.from_rows([[2, 4], [6, 8]]) == h

    @PROPERTY_SETTINGS
    @given(int_matrices())
    def test_hermite_invariants(self, matrix: IntMatrix) -> None:
        """Test U @ A == H, unimodularity, positive pivots and reduced entries."""
        h, u = hnf(matrix)
        assert u @ matrix == h
        assert abs(determinant(u)) == 1
        last_pivot = -1
        for i in range(h.rows):
            row = h.row(i)
            nonzero = [j for j, a in enumerate(row) if a]
            if not nonzero:
                assert all(not any(h.row(k)) for k in range(i, h.rows))
                break
            p = nonzero[0]
            assert p > last_pivot
            assert row[p] > 0
            for k in range(i):
                assert 0 <= h[k, p] < row[p]
            last_pivot = p

    def test_unimodular_inverse(self) -> None:
        """Test inverses of unimodular matrices."""
        m = IntMatrix.from_rows([[2, 1], [1, 1]])
        assert unimodular_inverse(m) @ m == IntMatrix.identity(2)
        with pytest.raises(InvariantViolationError):
            unimodular_inverse(IntMatrix.from_rows([[2, 0], [0, 1]]))
        with pytest.raises(DimensionMismatchError):
            unimodular_inverse(IntMatrix.zeros(1, 2))


class TestSmith:
    """Tests for the Smith normal form."""

    def test_known_divisors(self) -> None:
        """Test the divisors of [[2, 4], [6, 8]]."""
        decomposition = snf(IntMatrix.from_rows([[2, 4], [6, 8]]))
        assert decomposition.diagonal == (2, 4)
        assert decomposition.d.to_rows() == [[2, 0], [0, 4]]

    def test_rectangular(self) -> None:
        """Test a rectangular matrix."""
        a = IntMatrix.from_rows([[1, 2, 3], [4, 5, 6]])
        decomposition = snf(a)
        assert decomposition.u @ a @ decomposition.v == decomposition.d
        assert decomposition.diagonal == (1, 3)

    def test_zero_matrix(self) -> None:
        """Test that the zero matrix has no divisors."""
        assert snf(IntMatrix.zeros(2, 3)).diagonal == ()

    @PROPERTY_SETTINGS
    @given(int_matrices())
    def test_round_trip(self, matrix: IntMatrix) -> None:
        """Test U @ A @ V == D with unimodular transforms and a divisor chain."""
        decomposition = snf(matrix)
        assert decomposition.u @ matrix @ decomposition.v == decomposition.d
        assert abs(determinant(decomposition.u)) == 1
        assert abs(determinant(decomposition.v)) == 1
        diagonal = decomposition.diagonal
        assert all(x > 0 for x in diagonal)
        assert all(b % a == 0 for a, b in zip(diagonal, diagonal[1:]))
        assert len(diagonal) == rank(matrix)
        for i in range(decomposition.d.rows):
            for j in range(decomposition.d.cols):
                if i != j:
                    assert decomposition.d[i, j] == 0


class TestKernelsAndLattices:
    """Tests for kernels, lattice membership and solving."""

    def test_kernel_of_rank_one(self) -> None:
        """Test the kernel of a rank-one row."""
        k = kernel_basis(IntMatrix.from_rows([[1, 2, 3]]))
        assert k.shape == (3, 2)
        assert (IntMatrix.from_rows([[1, 2, 3]]) @ k).is_zero()

    def test_kernel_of_injective(self) -> None:
        """Test the kernel of an injective matrix."""
        assert kernel_basis(IntMatrix.identity(3)).shape == (3, 0)

    @PROPERTY_SETTINGS
    @given(int_matrices())
    def test_kernel_is_saturated_basis(self, matrix: IntMatrix) -> None:
        """Test that kernel columns are annihilated and have the right count."""
        k = kernel_basis(matrix)
        assert k.cols == matrix.cols - rank(matrix)
        assert (matrix @ k).is_zero()
        if k.cols:
            assert snf(k).diagonal == (1,) * k.cols

    def test_solve(self) -> None:
        """Test solving in a column lattice."""
        a = IntMatrix.from_columns([[2, 0], [0, 3]])
        assert solve_in_lattice(a, (4, 9)) == (2, 3)
        assert solve_in_lattice(a, (1, 0)) is None
        assert in_lattice(a, (0, 3))
        assert not in_lattice(a, (0, 1))

    def test_solve_wrong_length(self) -> None:
        """Test that a target of the wrong length raises."""
        with pytest.raises(DimensionMismatchError):
            solve_in_lattice(IntMatrix.identity(2), (1, 2, 3))

    @PROPERTY_SETTINGS
    @given(int_matrices(max_rows=4, max_cols=4), st.data())
    def test_lattice_vectors_are_solvable(self, matrix: IntMatrix, data: st.DataObject) -> None:
        """Test that every integer combination of the columns is found."""
        coeffs = data.draw(
            st.lists(st.integers(-5, 5), min_size=matrix.cols, max_size=matrix.cols)
        )
        target = matrix.matvec(coeffs)
        solution = solve_in_lattice(matrix, target)
        assert solution is not None
        assert matrix.matvec(solution) == target

    def test_lattice_equal(self) -> None:
        """Test comparison of column lattices."""
        a = IntMatrix.from_columns([[1, 0], [0, 2]])
        b = IntMatrix.from_columns([[1, 2], [0, 2], [1, 0]])
        assert lattice_equal(a, b)
        assert not lattice_equal(a, IntMatrix.identity(2))
        with pytest.raises(DimensionMismatchError):
            lattice_equal(a, IntMatrix.identity(3))
