"""Dense exact matrices over a single coefficient ring.

Everything downstream (normal forms, divisor lattices, matrix equations)
manipulates these: row-major tuples of ring elements plus the ring handle.
Determinants are exact (Bareiss over the fraction field, cross-checked by
cofactor expansion on small inputs) and minor gcds are the k-th compound
invariants used throughout the divisibility theory.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, List, Optional, Sequence, Tuple

from .ring import PolyQ, QX, Ring, RingError, ZZ


class MatrixError(ValueError):
    """Shape or ring mismatch, or a contract violation on matrix input."""


class ExactMatrix:
    """Immutable row-major matrix with entries in one ring."""

    __slots__ = ("ring", "rows", "nrows", "ncols")

    def __init__(self, ring: Ring, rows: Sequence[Sequence]):
        rows = [tuple(ring.coerce(v) for v in r) for r in rows]
        if not rows:
            raise MatrixError("matrix needs at least one row")
        width = len(rows[0])
        if width == 0:
            raise MatrixError("matrix needs at least one column")
        if any(len(r) != width for r in rows):
            raise MatrixError("ragged rows")
        self.ring = ring
        self.rows: Tuple[Tuple, ...] = tuple(rows)
        self.nrows = len(rows)
        self.ncols = width

    # -- constructors ---------------------------------------------------

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "ExactMatrix":
        return cls(
            ring,
            [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)],
        )

    @classmethod
    def zero(cls, ring: Ring, nrows: int, ncols: int) -> "ExactMatrix":
        return cls(ring, [[ring.zero] * ncols for _ in range(nrows)])

    @classmethod
    def from_diagonal(cls, ring: Ring, entries: Sequence) -> "ExactMatrix":
        n = len(entries)
        return cls(
            ring,
            [
                [entries[i] if i == j else ring.zero for j in range(n)]
                for i in range(n)
            ],
        )

    @classmethod
    def from_function(
        cls, ring: Ring, nrows: int, ncols: int, fn: Callable[[int, int], object]
    ) -> "ExactMatrix":
        return cls(ring, [[fn(i, j) for j in range(ncols)] for i in range(nrows)])

    # -- basic structure --------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.ring is other.ring and self.rows == other.rows

    def __hash__(self):
        return hash((self.ring.name, self.rows))

    def __getitem__(self, key):
        i, j = key
        return self.rows[i][j]

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(v) for r in self.rows for v in r)

    def is_identity(self) -> bool:
        if not self.is_square():
            return False
        one, zero_test = self.ring.one, self.ring.is_zero
        return all(
            (self.rows[i][j] == one if i == j else zero_test(self.rows[i][j]))
            for i in range(self.nrows)
            for j in range(self.ncols)
        )

    def is_diagonal(self) -> bool:
        return all(
            self.ring.is_zero(self.rows[i][j])
            for i in range(self.nrows)
            for j in range(self.ncols)
            if i != j
        )

    def diagonal(self) -> List:
        return [self.rows[i][i] for i in range(min(self.nrows, self.ncols))]

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(
            self.ring,
            [[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
        )

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix(
            self.ring, [[self.rows[i][j] for j in col_idx] for i in row_idx]
        )

    def row(self, i: int) -> Tuple:
        return self.rows[i]

    def col(self, j: int) -> List:
        return [self.rows[i][j] for i in range(self.nrows)]

    def with_entry(self, i: int, j: int, value) -> "ExactMatrix":
        rows = [list(r) for r in self.rows]
        rows[i][j] = self.ring.coerce(value)
        return ExactMatrix(self.ring, rows)

    def map(self, fn: Callable) -> "ExactMatrix":
        return ExactMatrix(self.ring, [[fn(v) for v in r] for r in self.rows])

    # -- arithmetic --------------------------------------------------------

    def _check_same_ring(self, other: "ExactMatrix"):
        if self.ring is not other.ring:
            raise MatrixError(
                f"ring mismatch: {self.ring.name} vs {other.ring.name}"
            )

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_ring(other)
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise MatrixError("shape mismatch in addition")
        return ExactMatrix(
            self.ring,
            [
                [self.rows[i][j] + other.rows[i][j] for j in range(self.ncols)]
                for i in range(self.nrows)
            ],
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + other.scale(-1 if self.ring is ZZ else self.ring.coerce(-1))

    def __neg__(self) -> "ExactMatrix":
        return self.map(lambda v: -v)

    def scale(self, c) -> "ExactMatrix":
        c = self.ring.coerce(c)
        return self.map(lambda v: c * v)

    def __mul__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        self._check_same_ring(other)
        if self.ncols != other.nrows:
            raise MatrixError(
                f"shape mismatch in product: {self.shape()} * {other.shape()}"
            )
        zero = self.ring.zero
        out = []
        for i in range(self.nrows):
            row_i = self.rows[i]
            out_row = []
            for j in range(other.ncols):
                acc = zero
                for k in range(self.ncols):
                    a = row_i[k]
                    if not self.ring.is_zero(a):
                        acc = acc + a * other.rows[k][j]
                out_row.append(acc)
            out.append(out_row)
        return ExactMatrix(self.ring, out)

    def shape(self) -> Tuple[int, int]:
        return self.nrows, self.ncols

    # -- row/column operations (return new matrices) -----------------------

    def swap_rows(self, i: int, j: int) -> "ExactMatrix":
        rows = [list(r) for r in self.rows]
        rows[i], rows[j] = rows[j], rows[i]
        return ExactMatrix(self.ring, rows)

    def swap_cols(self, i: int, j: int) -> "ExactMatrix":
        rows = [list(r) for r in self.rows]
        for r in rows:
            r[i], r[j] = r[j], r[i]
        return ExactMatrix(self.ring, rows)

    def add_multiple_of_row(self, target: int, source: int, c) -> "ExactMatrix":
        c = self.ring.coerce(c)
        rows = [list(r) for r in self.rows]
        rows[target] = [rows[target][k] + c * rows[source][k] for k in range(self.ncols)]
        return ExactMatrix(self.ring, rows)

    def add_multiple_of_col(self, target: int, source: int, c) -> "ExactMatrix":
        c = self.ring.coerce(c)
        rows = [list(r) for r in self.rows]
        for r in rows:
            r[target] = r[target] + c * r[source]
        return ExactMatrix(self.ring, rows)

    def scale_row(self, i: int, c) -> "ExactMatrix":
        c = self.ring.coerce(c)
        rows = [list(r) for r in self.rows]
        rows[i] = [c * v for v in rows[i]]
        return ExactMatrix(self.ring, rows)

    def scale_col(self, j: int, c) -> "ExactMatrix":
        c = self.ring.coerce(c)
        rows = [list(r) for r in self.rows]
        for r in rows:
            r[j] = c * r[j]
        return ExactMatrix(self.ring, rows)

    # -- display -------------------------------------------------------------

    def __repr__(self) -> str:
        cells = [[repr(v) if self.ring is QX else str(v) for v in r] for r in self.rows]
        widths = [max(len(cells[i][j]) for i in range(self.nrows)) for j in range(self.ncols)]
        lines = [
            "[" + "  ".join(cells[i][j].rjust(widths[j]) for j in range(self.ncols)) + "]"
            for i in range(self.nrows)
        ]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# block assembly


def hstack(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    if a.nrows != b.nrows:
        raise MatrixError("hstack needs equal row counts")
    a._check_same_ring(b)
    return ExactMatrix(a.ring, [list(a.rows[i]) + list(b.rows[i]) for i in range(a.nrows)])


def vstack(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    if a.ncols != b.ncols:
        raise MatrixError("vstack needs equal column counts")
    a._check_same_ring(b)
    return ExactMatrix(a.ring, [list(r) for r in a.rows] + [list(r) for r in b.rows])


def block_diag(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    a._check_same_ring(b)
    ring = a.ring
    top = hstack(a, ExactMatrix.zero(ring, a.nrows, b.ncols))
    bot = hstack(ExactMatrix.zero(ring, b.nrows, a.ncols), b)
    return vstack(top, bot)


# ---------------------------------------------------------------------------
# determinants


def _det_cofactor(m: ExactMatrix):
    n = m.nrows
    ring = m.ring
    if n == 1:
        return m.rows[0][0]
    if n == 2:
        return m.rows[0][0] * m.rows[1][1] - m.rows[0][1] * m.rows[1][0]
    acc = ring.zero
    cols = list(range(n))
    for j in range(n):
        a = m.rows[0][j]
        if ring.is_zero(a):
            continue
        minor = m.submatrix(range(1, n), [c for c in cols if c != j])
        term = a * _det_cofactor(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _det_bareiss(m: ExactMatrix):
    """Fraction-free elimination; every division along the way is exact."""
    ring = m.ring
    n = m.nrows
    a = [list(r) for r in m.rows]
    sign = 1
    prev = ring.one
    for k in range(n - 1):
        if ring.is_zero(a[k][k]):
            pivot_row = next(
                (i for i in range(k + 1, n) if not ring.is_zero(a[i][k])), None
            )
            if pivot_row is None:
                return ring.zero
            a[k], a[pivot_row] = a[pivot_row], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = ring.exact_div(num, prev)
            a[i][k] = ring.zero
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign == 1 else -det


def det_exact(m: ExactMatrix):
    """Exact determinant; small orders cross-checked against cofactor expansion."""
    if not m.is_square():
        raise MatrixError("determinant needs a square matrix")
    det = _det_bareiss(m)
    if m.nrows <= 4:
        other = _det_cofactor(m)
        if det != other:
            raise MatrixError("determinant cross-check failed; arithmetic bug")
    return det


def is_unimodular(m: ExactMatrix) -> bool:
    return m.is_square() and m.ring.is_unit(det_exact(m))


def minor_gcd(m: ExactMatrix, k: int):
    """Canonical gcd of all k x k minors (1 for k = 0, 0 when k exceeds rank).

    Orders up to 6 enumerate all minors directly; beyond that the value is
    taken from a diagonal reduction, and whenever both routes are affordable
    they are compared.
    """
    ring = m.ring
    if k == 0:
        return ring.one
    if k > min(m.nrows, m.ncols):
        raise MatrixError(f"no {k} x {k} minors in a {m.nrows} x {m.ncols} matrix")

    def by_enumeration():
        g = ring.zero
        for rset in combinations(range(m.nrows), k):
            for cset in combinations(range(m.ncols), k):
                g = ring.gcd(g, det_exact(m.submatrix(rset, cset)))
                if ring.is_unit(g):
                    return ring.one
        return g

    def by_reduction():
        from . import normal_forms as _nf

        d = _nf.smith(m).d_matrix
        diag = d.diagonal()
        acc = ring.one
        for v in diag[:k]:
            acc = acc * v
        return ring.canonical(acc)

    small = min(m.nrows, m.ncols) <= 6
    if small:
        g = by_enumeration()
        if min(m.nrows, m.ncols) <= 4:
            other = by_reduction()
            if g != other:
                raise MatrixError("minor gcd cross-check failed; arithmetic bug")
        return g
    return by_reduction()


def inverse_unimodular(m: ExactMatrix) -> ExactMatrix:
    """Inverse of an invertible-over-the-ring matrix, computed exactly."""
    if not m.is_square():
        raise MatrixError("inverse needs a square matrix")
    ring = m.ring
    det = det_exact(m)
    if not ring.is_unit(det):
        raise MatrixError(f"matrix is not invertible over {ring.name}: det = {det!r}")
    n = m.nrows
    det_inv = ring.unit_inverse(det)
    if n == 1:
        return ExactMatrix(ring, [[det_inv]])
    cols = list(range(n))
    rows = list(range(n))
    adj = [[ring.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = m.submatrix(
                [r for r in rows if r != i], [c for c in cols if c != j]
            )
            cof = _det_bareiss(minor)
            if (i + j) % 2 == 1:
                cof = -cof
            adj[j][i] = cof * det_inv
    inv = ExactMatrix(ring, adj)
    if not (m * inv).is_identity():
        raise MatrixError("inverse verification failed; arithmetic bug")
    return inv
