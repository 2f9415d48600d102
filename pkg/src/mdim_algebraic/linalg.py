"""
Exact integer linear algebra.

This module provides the integer matrix type used throughout the package
together with rank, Hermite and Smith normal forms, integer kernels and
lattice membership.

Rank has two paths:
- a multimodular fast path that eliminates over word-size primes with
  numpy ``int64`` arithmetic and certifies the result by a nonzero minor
- an exact fraction-free (Bareiss) path on Python integers, used as the
  fallback and as the cross-check behind ``verify=True``

Everything else works on arbitrary-precision Python integers. No floating
point is used anywhere.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from mdim_algebraic.exceptions import (
    DimensionMismatchError,
    InvariantViolationError,
    RankCertificationError,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

logger = logging.getLogger(__name__)

# Primes just below 2**31; products of two residues fit in int64.
MODULAR_PRIMES: tuple[int, ...] = (
    2147483647,
    2147483629,
    2147483587,
    2147483579,
    2147483563,
)


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix stored in row-major order.

    Empty matrices (zero rows or zero columns) are legal and have rank 0.

    Attributes:
        rows: Number of rows.
        cols: Number of columns.
        entries: The rows * cols entries in row-major order.
    """

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise DimensionMismatchError(
                "Matrix dimensions must be nonnegative", f"{self.rows}x{self.cols}"
            )
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatchError(
                "Entry count does not match shape",
                f"{len(self.entries)} entries for {self.rows}x{self.cols}",
            )

    # -- construction -------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        """Build a matrix from a list of rows.

        Args:
            rows: The rows of the matrix.
            cols: Column count; required only when ``rows`` is empty.

        Returns:
            The matrix.

        Raises:
            DimensionMismatchError: If the rows have different lengths.
        """
        width = len(rows[0]) if rows else (cols or 0)
        if cols is not None and rows and width != cols:
            raise DimensionMismatchError("Row length does not match column count")
        flat: list[int] = []
        for index, row in enumerate(rows):
            if len(row) != width:
                raise DimensionMismatchError(
                    "Ragged matrix", f"row {index} has {len(row)} entries, expected {width}"
                )
            flat.extend(int(x) for x in row)
        return cls(len(rows), width, tuple(flat))

    @classmethod
    def from_columns(
        cls, columns: Sequence[Sequence[int]], rows: int | None = None
    ) -> IntMatrix:
        """Build a matrix whose columns are the given vectors."""
        height = len(columns[0]) if columns else (rows or 0)
        if rows is not None and columns and height != rows:
            raise DimensionMismatchError("Column length does not match row count")
        return cls.from_rows(columns, height).transpose()

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        """Return the rows x cols zero matrix."""
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        """Return the n x n identity matrix."""
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def scalar(cls, n: int, value: int) -> IntMatrix:
        """Return ``value`` times the n x n identity."""
        return cls(n, n, tuple(value if i == j else 0 for i in range(n) for j in range(n)))

    # -- access -------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"index {index} out of range for {self.rows}x{self.cols}")
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        """Return row ``i`` as a tuple."""
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> tuple[int, ...]:
        """Return column ``j`` as a tuple."""
        return self.entries[j :: self.cols] if self.cols else ()

    def to_rows(self) -> list[list[int]]:
        """Return the matrix as a list of row lists."""
        return [list(self.row(i)) for i in range(self.rows)]

    def to_columns(self) -> list[list[int]]:
        """Return the matrix as a list of column lists."""
        return [list(self.column(j)) for j in range(self.cols)]

    def is_zero(self) -> bool:
        return not any(self.entries)

    def is_square(self) -> bool:
        return self.rows == self.cols

    # -- arithmetic ---------------------------------------------------

    def transpose(self) -> IntMatrix:
        """Return the transpose."""
        return IntMatrix(
            self.cols,
            self.rows,
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
        )

    @property
    def T(self) -> IntMatrix:
        return self.transpose()

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise DimensionMismatchError(
                "Cannot multiply matrices",
                f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}",
            )
        other_cols = [other.column(j) for j in range(other.cols)]
        out: list[int] = []
        for i in range(self.rows):
            r = self.row(i)
            out.extend(sum(a * b for a, b in zip(r, c)) for c in other_cols)
        return IntMatrix(self.rows, other.cols, tuple(out))

    def matvec(self, vector: Sequence[int]) -> tuple[int, ...]:
        """Return the product of this matrix with a column vector."""
        if len(vector) != self.cols:
            raise DimensionMismatchError(
                "Vector length does not match column count", f"{len(vector)} != {self.cols}"
            )
        return tuple(
            sum(a * b for a, b in zip(self.row(i), vector)) for i in range(self.rows)
        )

    def _check_same_shape(self, other: IntMatrix) -> None:
        if self.shape != other.shape:
            raise DimensionMismatchError(
                "Shapes differ", f"{self.rows}x{self.cols} vs {other.rows}x{other.cols}"
            )

    def __add__(self, other: IntMatrix) -> IntMatrix:
        self._check_same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: IntMatrix) -> IntMatrix:
        self._check_same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> IntMatrix:
        return IntMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def scale(self, factor: int) -> IntMatrix:
        """Return ``factor`` times this matrix."""
        return IntMatrix(self.rows, self.cols, tuple(factor * a for a in self.entries))

    def power(self, exponent: int) -> IntMatrix:
        """Return this square matrix raised to a nonnegative power."""
        if not self.is_square():
            raise DimensionMismatchError("Only square matrices have powers", f"{self.shape}")
        if exponent < 0:
            raise ValueError("exponent must be nonnegative")
        result = IntMatrix.identity(self.rows)
        base = self
        while exponent:
            if exponent & 1:
                result = result @ base
            base = base @ base
            exponent >>= 1
        return result

    def hstack(self, other: IntMatrix) -> IntMatrix:
        """Concatenate columns: ``[self | other]``."""
        if self.rows != other.rows:
            raise DimensionMismatchError("hstack needs equal row counts", f"{self.rows} vs {other.rows}")
        return IntMatrix.from_rows(
            [self.row(i) + other.row(i) for i in range(self.rows)], self.cols + other.cols
        )

    def vstack(self, other: IntMatrix) -> IntMatrix:
        """Concatenate rows."""
        if self.cols != other.cols:
            raise DimensionMismatchError("vstack needs equal column counts", f"{self.cols} vs {other.cols}")
        return IntMatrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def submatrix(self, row_indices: Iterable[int], col_indices: Iterable[int]) -> IntMatrix:
        """Return the submatrix on the given rows and columns, in the given order."""
        ri = list(row_indices)
        ci = list(col_indices)
        return IntMatrix(len(ri), len(ci), tuple(self.entries[i * self.cols + j] for i in ri for j in ci))

    def __str__(self) -> str:
        if self.rows == 0 or self.cols == 0:
            return f"[] ({self.rows}x{self.cols})"
        width = max(len(str(x)) for x in self.entries)
        lines = ["[" + " ".join(str(x).rjust(width) for x in self.row(i)) + "]" for i in range(self.rows)]
        return "\n".join(lines)


@dataclass(frozen=True)
class SmithDecomposition:
    """Smith normal form ``U @ A @ V == D``.

    Attributes:
        u: Unimodular row transform (rows x rows).
        d: Diagonal matrix with the shape of A.
        v: Unimodular column transform (cols x cols).
        diagonal: The nonzero invariant factors d_1 | d_2 | ... | d_k.
    """

    u: IntMatrix
    d: IntMatrix
    v: IntMatrix
    diagonal: tuple[int, ...]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended Euclidean algorithm.

    Returns:
        ``(g, x, y)`` with ``g = gcd(a, b) >= 0`` and ``x*a + y*b == g``.
    """
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        return -old_r, -old_x, -old_y
    return old_r, old_x, old_y


# -- rank -------------------------------------------------------------


def _rank_mod_p(matrix: IntMatrix, p: int) -> tuple[int, list[int], list[int]]:
    """Gaussian elimination over GF(p).

    Returns:
        The rank modulo ``p`` and the original row and column indices of
        a nonsingular pivot minor.
    """
    m = np.array([x % p for x in matrix.entries], dtype=np.int64).reshape(matrix.rows, matrix.cols)
    order = list(range(matrix.rows))
    pivot_cols: list[int] = []
    r = 0
    for c in range(matrix.cols):
        if r == matrix.rows:
            break
        nonzero = np.nonzero(m[r:, c])[0]
        if nonzero.size == 0:
            continue
        i = r + int(nonzero[0])
        if i != r:
            m[[r, i]] = m[[i, r]]
            order[r], order[i] = order[i], order[r]
        inv = pow(int(m[r, c]), -1, p)
        m[r] = (m[r] * inv) % p
        below = m[r + 1 :, c].copy()
        if below.any():
            m[r + 1 :] = (m[r + 1 :] - np.outer(below, m[r]) % p) % p
        pivot_cols.append(c)
        r += 1
    return r, order[:r], pivot_cols


def _bareiss_rank(matrix: IntMatrix) -> int:
    """Exact rank by fraction-free elimination."""
    m = matrix.to_rows()
    n_rows, n_cols = matrix.rows, matrix.cols
    r = 0
    prev = 1
    for c in range(n_cols):
        if r == n_rows:
            break
        pivot = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        prc = m[r][c]
        for i in range(r + 1, n_rows):
            mic = m[i][c]
            row_i = m[i]
            row_r = m[r]
            for j in range(c + 1, n_cols):
                row_i[j] = (prc * row_i[j] - mic * row_r[j]) // prev
            row_i[c] = 0
        prev = prc
        r += 1
    return r


def determinant(matrix: IntMatrix) -> int:
    """Exact determinant of a square matrix by Bareiss elimination.

    Raises:
        DimensionMismatchError: If the matrix is not square.
    """
    if not matrix.is_square():
        raise DimensionMismatchError("Determinant needs a square matrix", f"{matrix.shape}")
    n = matrix.rows
    if n == 0:
        return 1
    m = matrix.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank(matrix: IntMatrix, *, verify: bool = False) -> int:
    """Rank over the rationals of an integer matrix.

    The fast path computes the rank modulo several primes below 2**31.
    A candidate is accepted once two primes agree on the largest rank
    seen and the pivot minor found modulo one prime is nonsingular modulo
    another prime as well; otherwise the exact Bareiss path decides.

    Args:
        matrix: The matrix.
        verify: Also compute the exact rank and compare.

    Returns:
        The rank.

    Raises:
        RankCertificationError: If ``verify`` is set and the paths disagree.
    """
    if matrix.rows == 0 or matrix.cols == 0 or matrix.is_zero():
        result = 0
    else:
        result = _multimodular_rank(matrix)
    if verify:
        exact = _bareiss_rank(matrix)
        if exact != result:
            raise RankCertificationError(
                "Modular rank disagrees with exact rank",
                f"modular {result}, exact {exact} on {matrix.rows}x{matrix.cols}",
            )
    return result


def _multimodular_rank(matrix: IntMatrix) -> int:
    seen: dict[int, tuple[int, list[int], list[int]]] = {}
    votes: dict[int, int] = {}
    for p in MODULAR_PRIMES:
        r, prow, pcol = _rank_mod_p(matrix, p)
        votes[r] = votes.get(r, 0) + 1
        seen.setdefault(r, (p, prow, pcol))
        best = max(votes)
        if votes[best] >= 2:
            first_p, rows_idx, cols_idx = seen[best]
            other = next(q for q in MODULAR_PRIMES if q != first_p)
            minor = matrix.submatrix(rows_idx, cols_idx)
            if _rank_mod_p(minor, other)[0] == best:
                return best
    logger.debug("Modular rank not certified on %dx%d, using exact path", matrix.rows, matrix.cols)
    return _bareiss_rank(matrix)


# -- normal forms -----------------------------------------------------


def _row_combine(m: list[list[int]], r: int, i: int, x: int, y: int, s: int, t: int) -> None:
    """Replace rows (r, i) by (x*r + y*i, s*r + t*i)."""
    row_r, row_i = m[r], m[i]
    m[r] = [x * a + y * b for a, b in zip(row_r, row_i)]
    m[i] = [s * a + t * b for a, b in zip(row_r, row_i)]


def hnf(matrix: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite normal form.

    Returns:
        ``(H, U)`` with ``U`` unimodular and ``U @ matrix == H``. ``H`` is in
        row echelon form with positive pivots and every entry above a pivot
        reduced into ``[0, pivot)``; zero rows come last.
    """
    n_rows, n_cols = matrix.rows, matrix.cols
    m = matrix.to_rows()
    u = IntMatrix.identity(n_rows).to_rows()
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        for i in range(r + 1, n_rows):
            b = m[i][c]
            if b == 0:
                continue
            a = m[r][c]
            g, x, y = xgcd(a, b)
            s, t = -b // g, a // g
            _row_combine(m, r, i, x, y, s, t)
            _row_combine(u, r, i, x, y, s, t)
        pivot = m[r][c]
        if pivot == 0:
            continue
        if pivot < 0:
            m[r] = [-a for a in m[r]]
            u[r] = [-a for a in u[r]]
            pivot = -pivot
        for k in range(r):
            q = m[k][c] // pivot
            if q:
                m[k] = [a - q * b for a, b in zip(m[k], m[r])]
                u[k] = [a - q * b for a, b in zip(u[k], u[r])]
        r += 1
    return IntMatrix.from_rows(m, n_cols), IntMatrix.from_rows(u, n_rows)


def hnf_rank(h: IntMatrix) -> int:
    """Number of nonzero rows of a Hermite form."""
    return sum(1 for i in range(h.rows) if any(h.row(i)))


def snf(matrix: IntMatrix) -> SmithDecomposition:
    """Smith normal form with unimodular transforms.

    Returns:
        A decomposition with ``u @ matrix @ v == d`` and nonnegative
        invariant factors forming a divisor chain.
    """
    n_rows, n_cols = matrix.rows, matrix.cols
    d = matrix.to_rows()
    u = IntMatrix.identity(n_rows).to_rows()
    # v is kept transposed so column operations become row operations
    vt = IntMatrix.identity(n_cols).to_rows()

    def col_combine(t: int, j: int, x: int, y: int, s: int, w: int) -> None:
        for row in d:
            a, b = row[t], row[j]
            row[t], row[j] = x * a + y * b, s * a + w * b
        _row_combine(vt, t, j, x, y, s, w)

    diagonal: list[int] = []
    for t in range(min(n_rows, n_cols)):
        candidates = [(abs(d[i][j]), i, j) for i in range(t, n_rows) for j in range(t, n_cols) if d[i][j]]
        if not candidates:
            break
        _, pi, pj = min(candidates)
        d[t], d[pi] = d[pi], d[t]
        u[t], u[pi] = u[pi], u[t]
        if pj != t:
            for row in d:
                row[t], row[pj] = row[pj], row[t]
            vt[t], vt[pj] = vt[pj], vt[t]
        while True:
            for i in range(t + 1, n_rows):
                b = d[i][t]
                if b == 0:
                    continue
                a = d[t][t]
                g, x, y = xgcd(a, b)
                _row_combine(d, t, i, x, y, -b // g, a // g)
                _row_combine(u, t, i, x, y, -b // g, a // g)
            for j in range(t + 1, n_cols):
                b = d[t][j]
                if b == 0:
                    continue
                a = d[t][t]
                g, x, y = xgcd(a, b)
                col_combine(t, j, x, y, -b // g, a // g)
            if any(d[i][t] for i in range(t + 1, n_rows)):
                continue
            pivot = d[t][t]
            offender = next(
                (i for i in range(t + 1, n_rows) for j in range(t + 1, n_cols) if d[i][j] % pivot),
                None,
            )
            if offender is None:
                break
            d[t] = [a + b for a, b in zip(d[t], d[offender])]
            u[t] = [a + b for a, b in zip(u[t], u[offender])]
        if d[t][t] < 0:
            d[t] = [-a for a in d[t]]
            u[t] = [-a for a in u[t]]
        diagonal.append(d[t][t])
    return SmithDecomposition(
        u=IntMatrix.from_rows(u, n_rows),
        d=IntMatrix.from_rows(d, n_cols),
        v=IntMatrix.from_rows(vt, n_cols).transpose(),
        diagonal=tuple(diagonal),
    )


# -- kernels and lattices ---------------------------------------------


def kernel_basis(matrix: IntMatrix) -> IntMatrix:
    """Basis of the integer kernel ``{v : matrix @ v == 0}``.

    Returns:
        A ``cols x (cols - rank)`` matrix whose columns form a lattice basis
        of the kernel, in Hermite-canonical order.
    """
    h, u = hnf(matrix.transpose())
    r = hnf_rank(h)
    n = matrix.cols
    if r == n:
        return IntMatrix.zeros(n, 0)
    tail = IntMatrix.from_rows([u.row(i) for i in range(r, n)], n)
    canonical, _ = hnf(tail)
    return canonical.transpose()


def solve_in_lattice(matrix: IntMatrix, b: Sequence[int]) -> tuple[int, ...] | None:
    """Solve ``matrix @ x == b`` over the integers.

    Args:
        matrix: An m x n integer matrix.
        b: A length-m target vector.

    Returns:
        A solution ``x`` of length n, or None when ``b`` is not in the
        column lattice of ``matrix``.

    Raises:
        DimensionMismatchError: If ``len(b) != matrix.rows``.
    """
    if len(b) != matrix.rows:
        raise DimensionMismatchError(
            "Target length does not match row count", f"{len(b)} != {matrix.rows}"
        )
    h, u = hnf(matrix.transpose())
    residual = [int(x) for x in b]
    y = [0] * matrix.cols
    for k in range(hnf_rank(h)):
        row = h.row(k)
        p = next(j for j, a in enumerate(row) if a)
        q, rem = divmod(residual[p], row[p])
        if rem:
            return None
        y[k] = q
        if q:
            residual = [a - q * c for a, c in zip(residual, row)]
    if any(residual):
        return None
    x = u.transpose().matvec(y)
    if matrix.matvec(x) != tuple(int(v) for v in b):
        raise InvariantViolationError("Lattice solve produced an inconsistent solution")
    return x


def in_lattice(matrix: IntMatrix, b: Sequence[int]) -> bool:
    """Return True when ``b`` lies in the column lattice of ``matrix``."""
    return solve_in_lattice(matrix, b) is not None


def unimodular_inverse(matrix: IntMatrix) -> IntMatrix:
    """Inverse of a unimodular matrix.

    Raises:
        DimensionMismatchError: If the matrix is not square.
        InvariantViolationError: If the matrix is not unimodular.
    """
    if not matrix.is_square():
        raise DimensionMismatchError("Inverse needs a square matrix", f"{matrix.shape}")
    h, u = hnf(matrix)
    if h != IntMatrix.identity(matrix.rows):
        raise InvariantViolationError("Matrix is not unimodular")
    return u


def lattice_equal(a: IntMatrix, b: IntMatrix) -> bool:
    """Compare the column lattices of two matrices with the same row count."""
    if a.rows != b.rows:
        raise DimensionMismatchError("Lattices live in different ambient ranks")
    ha, _ = hnf(a.transpose())
    hb, _ = hnf(b.transpose())
    ra, rb = hnf_rank(ha), hnf_rank(hb)
    return ra == rb and all(ha.row(i) == hb.row(i) for i in range(ra))
