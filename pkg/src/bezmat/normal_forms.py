"""Canonical shapes under invertible transformations.

This module turns matrices into their standard reduced forms: a column is
driven to (g, 0, ..., 0)^T, a full-row-rank matrix to a lower triangular
form with reduced off-diagonal residues, and any matrix to its diagonal
form with a divisibility chain.  Every routine returns the transforming
matrices as explicit witnesses and every division performed is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import List, Sequence, Tuple

from .matrix import (
    ExactMatrix,
    MatrixError,
    det_exact,
    inverse_unimodular,
)
from .ring import Ring, stable_range_coeff


# ---------------------------------------------------------------------------
# primitive-row machinery


def bezout_fold(ring: Ring, items: Sequence) -> Tuple[object, List]:
    """Canonical gcd g of items plus coefficients c with sum(c*items) == g."""
    items = [ring.coerce(v) for v in items]
    if not items:
        return ring.zero, []
    g = items[0]
    coeffs = [ring.one] + [ring.zero] * (len(items) - 1)
    canon, unit = ring.normalize_assoc(g)
    inv = ring.unit_inverse(unit)
    g = canon
    coeffs[0] = inv
    for k in range(1, len(items)):
        w = ring.gcd_ext(g, items[k])
        coeffs = [w.u * c for c in coeffs]
        coeffs[k] = w.v
        g = w.g
    return g, coeffs


def complement_to_invertible(ring: Ring, row: Sequence) -> ExactMatrix:
    """Invertible square matrix whose bottom row is the given primitive row.

    The completion is sparse: the middle rows are unit vectors with one
    extra entry in the last column, and the first row touches only the
    first and last columns.  The determinant is 1 (after an internal sign
    fix when the first entry is zero and columns must be permuted).
    """
    a = [ring.coerce(v) for v in row]
    n = len(a)
    if n == 0:
        raise MatrixError("empty row")
    if not ring.is_unit(ring.gcd_list(a)):
        raise MatrixError("row gcd must be a unit to admit an invertible completion")
    if n == 1:
        return ExactMatrix(ring, [[a[0]]])

    if ring.is_zero(a[0]):
        k = next(i for i in range(n) if not ring.is_zero(a[i]))
        swapped = list(a)
        swapped[0], swapped[k] = swapped[k], swapped[0]
        u = complement_to_invertible(ring, swapped)
        # undo the column swap; negate the top row to keep the determinant 1
        u = u.scale_row(0, ring.coerce(-1)).swap_cols(0, k)
        if not ring.is_unit(det_exact(u)):
            raise MatrixError("completion lost invertibility; arithmetic bug")
        return u

    middles = a[1 : n - 1]
    gamma, vs = bezout_fold(ring, middles)
    r = stable_range_coeff(ring, a[n - 1], gamma, a[0])
    us = [-(r * v) for v in vs]  # u_2 .. u_{n-1}
    beta = a[n - 1] - sum(
        (us[t] * middles[t] for t in range(len(middles))), ring.zero
    )
    w = ring.gcd_ext(beta, a[0])
    if w.g != ring.one:
        raise MatrixError("stable range step failed; arithmetic bug")
    u_n = w.u
    u_1 = -w.v

    rows = []
    top = [ring.zero] * n
    top[0] = u_n
    top[n - 1] = u_1
    rows.append(top)
    for i in range(1, n - 1):
        mid = [ring.zero] * n
        mid[i] = ring.one
        mid[n - 1] = us[i - 1]
        rows.append(mid)
    rows.append(a)
    u = ExactMatrix(ring, rows)
    if det_exact(u) != ring.one:
        raise MatrixError("completion determinant is not 1; arithmetic bug")
    return u


def reduce_column(column: ExactMatrix) -> Tuple[ExactMatrix, object]:
    """U with U * column == (alpha, 0, ..., 0)^T, alpha the canonical gcd."""
    if column.ncols != 1:
        raise MatrixError("reduce_column expects a single-column matrix")
    ring = column.ring
    a = [column.rows[i][0] for i in range(column.nrows)]
    n = len(a)
    if all(ring.is_zero(v) for v in a):
        return ExactMatrix.identity(ring, n), ring.zero
    alpha, coeffs = bezout_fold(ring, a)
    if n == 1:
        _, unit = ring.normalize_assoc(a[0])
        return ExactMatrix(ring, [[ring.unit_inverse(unit)]]), alpha
    # the coefficient row is primitive, so it admits an invertible completion
    v = complement_to_invertible(ring, coeffs)
    b = [sum((v.rows[i][j] * a[j] for j in range(n)), ring.zero) for i in range(n)]
    # bottom entry is alpha; everything else is a multiple of it
    rows = [[ring.zero] * n for _ in range(n)]
    rows[0][n - 1] = ring.one
    for i in range(1, n):
        rows[i][i - 1] = ring.one
        rows[i][n - 1] = -ring.exact_div(b[i - 1], alpha)
    u = ExactMatrix(ring, rows) * v
    out = u * column
    if out.rows[0][0] != alpha or any(
        not ring.is_zero(out.rows[i][0]) for i in range(1, n)
    ):
        raise MatrixError("column reduction failed; arithmetic bug")
    return u, alpha


# ---------------------------------------------------------------------------
# triangular form


@dataclass(frozen=True)
class HermiteDecomposition:
    """h == a * u with u invertible and h lower triangular reduced."""

    h: ExactMatrix
    u: ExactMatrix


def hermite(a: ExactMatrix) -> HermiteDecomposition:
    """Canonical lower triangular form of a full-row-rank matrix.

    The input must have at least as many columns as rows.  The result has
    canonical nonzero diagonal entries, zeros to the right of the diagonal,
    and each below-diagonal entry reduced to the canonical residue modulo
    the diagonal entry of its own row.  Right-multiplying the input by any
    invertible matrix leaves the form unchanged.
    """
    ring = a.ring
    n, m = a.nrows, a.ncols
    if n > m:
        raise MatrixError("triangular form needs rows <= columns")
    b = [list(r) for r in a.rows]
    u = [list(r) for r in ExactMatrix.identity(ring, m).rows]

    def col_op(i, j, p, q, r, s):
        # columns (i, j) <- (p*ci + q*cj, r*ci + s*cj)
        for rowset in (b, u):
            for row in rowset:
                ci, cj = row[i], row[j]
                row[i] = p * ci + q * cj
                row[j] = r * ci + s * cj

    for i in range(n):
        for j in range(i + 1, m):
            if ring.is_zero(b[i][j]):
                continue
            w = ring.gcd_ext(b[i][i], b[i][j])
            p = ring.exact_div(b[i][i], w.g)
            q = ring.exact_div(b[i][j], w.g)
            col_op(i, j, w.u, w.v, -q, p)
        if ring.is_zero(b[i][i]):
            raise MatrixError(f"row {i + 1} is dependent; full row rank required")
        _, unit = ring.normalize_assoc(b[i][i])
        inv = ring.unit_inverse(unit)
        if inv != ring.one:
            for rowset in (b, u):
                for row in rowset:
                    row[i] = row[i] * inv
    # reduce below-diagonal entries to canonical residues
    for i in range(1, n):
        d = b[i][i]
        for j in range(i):
            rem = ring.residue_rep(b[i][j], d)
            q = ring.exact_div(b[i][j] - rem, d)
            if ring.is_zero(q):
                continue
            for rowset in (b, u):
                for row in rowset:
                    row[j] = row[j] - q * row[i]
    h = ExactMatrix(ring, b)
    u_mat = ExactMatrix(ring, u)
    if a * u_mat != h:
        raise MatrixError("triangular reduction witness failed; arithmetic bug")
    return HermiteDecomposition(h, u_mat)


# ---------------------------------------------------------------------------
# diagonal form


class DMatrix:
    """Diagonal matrix with canonical entries forming a divisibility chain."""

    __slots__ = ("ring", "diag", "nrows", "ncols")

    def __init__(self, ring: Ring, diag: Sequence, nrows: int, ncols: int):
        diag = [ring.coerce(v) for v in diag]
        if len(diag) != min(nrows, ncols):
            raise MatrixError("diagonal length must match min(nrows, ncols)")
        for i, v in enumerate(diag):
            if ring.canonical(v) != v:
                raise MatrixError(f"diagonal entry {i + 1} is not in canonical form")
            if i + 1 < len(diag) and not ring.divides(v, diag[i + 1]):
                raise MatrixError(
                    f"diagonal entry {i + 1} does not divide entry {i + 2}"
                )
        self.ring = ring
        self.diag: Tuple = tuple(diag)
        self.nrows = nrows
        self.ncols = ncols

    @classmethod
    def from_matrix(cls, m: ExactMatrix) -> "DMatrix":
        if not m.is_diagonal():
            raise MatrixError("matrix is not diagonal")
        return cls(m.ring, m.diagonal(), m.nrows, m.ncols)

    @property
    def matrix(self) -> ExactMatrix:
        return ExactMatrix.from_function(
            self.ring,
            self.nrows,
            self.ncols,
            lambda i, j: self.diag[i] if i == j else self.ring.zero,
        )

    @property
    def rank(self) -> int:
        return sum(1 for v in self.diag if not self.ring.is_zero(v))

    def __eq__(self, other):
        if not isinstance(other, DMatrix):
            return NotImplemented
        return (
            self.ring is other.ring
            and self.diag == other.diag
            and (self.nrows, self.ncols) == (other.nrows, other.ncols)
        )

    def __repr__(self):
        return f"DMatrix({list(self.diag)!r}, {self.nrows} x {self.ncols})"


def is_canonical_d_matrix(m: ExactMatrix) -> bool:
    try:
        DMatrix.from_matrix(m)
    except MatrixError:
        return False
    return True


@dataclass(frozen=True)
class SmithDecomposition:
    """p * a * q == phi.matrix with p, q invertible and phi a DMatrix."""

    p: ExactMatrix
    q: ExactMatrix
    phi: DMatrix

    @property
    def d_matrix(self) -> ExactMatrix:
        return self.phi.matrix

    @property
    def invariant_factors(self) -> List:
        return list(self.phi.diag)


def smith(a: ExactMatrix) -> SmithDecomposition:
    """Diagonal reduction p * a * q = diag(phi_1, ..., phi_r, 0, ...).

    The pivot loop works row pair by row pair: the pivot row is folded to
    (alpha, 0, ...), each lower row is folded to at most two leading
    entries, and a stable-range coefficient turns the resulting 2 x 2
    corner into (gcd, 0; 0, *) with exactly one extra row operation.  The
    pivot ends up as the gcd of the whole remaining block, which makes the
    divisibility chain automatic.  Already-canonical diagonal inputs are
    returned untouched with identity transforms.
    """
    ring = a.ring
    n, m = a.nrows, a.ncols
    if is_canonical_d_matrix(a):
        return SmithDecomposition(
            ExactMatrix.identity(ring, n),
            ExactMatrix.identity(ring, m),
            DMatrix.from_matrix(a),
        )

    b = [list(r) for r in a.rows]
    p = [list(r) for r in ExactMatrix.identity(ring, n).rows]
    q = [list(r) for r in ExactMatrix.identity(ring, m).rows]

    def row_op(i, j, w, x, y, z):
        # rows (i, j) <- (w*ri + x*rj, y*ri + z*rj)
        for mat in (b, p):
            ri, rj = mat[i], mat[j]
            mat[i] = [w * ri[t] + x * rj[t] for t in range(len(ri))]
            mat[j] = [y * ri[t] + z * rj[t] for t in range(len(ri))]

    def col_op(i, j, w, x, y, z):
        # columns (i, j) <- (w*ci + x*cj, y*ci + z*cj)
        for mat in (b, q):
            for row in mat:
                ci, cj = row[i], row[j]
                row[i] = w * ci + x * cj
                row[j] = y * ci + z * cj

    def fold_row_right(i, start):
        # make row i zero beyond column start using column operations
        for j in range(start + 1, m):
            if ring.is_zero(b[i][j]):
                continue
            w = ring.gcd_ext(b[i][start], b[i][j])
            pp = ring.exact_div(b[i][start], w.g)
            qq = ring.exact_div(b[i][j], w.g)
            col_op(start, j, w.u, w.v, -qq, pp)

    rank_bound = min(n, m)
    k = 0
    while k < rank_bound:
        if all(ring.is_zero(b[i][j]) for i in range(k, n) for j in range(k, m)):
            break
        if all(ring.is_zero(b[k][j]) for j in range(k, m)):
            i = next(
                i
                for i in range(k + 1, n)
                if any(not ring.is_zero(b[i][j]) for j in range(k, m))
            )
            b[k], b[i] = b[i], b[k]
            p[k], p[i] = p[i], p[k]
        fold_row_right(k, k)
        for j in range(k + 1, n):
            if all(ring.is_zero(b[j][t]) for t in range(k, m)):
                continue
            if k + 1 < m:
                fold_row_right(j, k + 1)
            alpha = b[k][k]
            b21 = b[j][k]
            b22 = b[j][k + 1] if k + 1 < m else ring.zero
            if ring.is_zero(b22):
                if ring.is_zero(b21):
                    continue
                w = ring.gcd_ext(alpha, b21)
                row_op(
                    k,
                    j,
                    w.u,
                    w.v,
                    -ring.exact_div(b21, w.g),
                    ring.exact_div(alpha, w.g),
                )
                continue
            delta = ring.gcd_list([b21, alpha, b22])
            r = stable_range_coeff(
                ring,
                ring.exact_div(b21, delta),
                ring.exact_div(alpha, delta),
                ring.exact_div(b22, delta),
            )
            if not ring.is_zero(r):
                row_op(j, k, ring.one, r, ring.zero, ring.one)
            b21p = b[j][k]
            w = ring.gcd_ext(b21p, b22)
            beta = w.g
            col_op(
                k,
                k + 1,
                w.u,
                w.v,
                -ring.exact_div(b22, beta),
                ring.exact_div(b21p, beta),
            )
            row_op(
                k,
                j,
                ring.zero,
                ring.one,
                -ring.one,
                ring.exact_div(alpha * w.u, beta),
            )
        # later column work re-pollutes the pivot column; each entry there
        # is a combination of block entries, all divisible by the pivot
        pivot = b[k][k]
        for i in range(k + 1, n):
            if not ring.is_zero(b[i][k]):
                c = ring.exact_div(b[i][k], pivot)
                row_op(i, k, ring.one, -c, ring.zero, ring.one)
        k += 1

    diag = []
    for i in range(rank_bound):
        v = b[i][i]
        canon, unit = ring.normalize_assoc(v)
        if unit != ring.one:
            inv = ring.unit_inverse(unit)
            for mat in (b, p):
                mat[i] = [inv * t for t in mat[i]]
        diag.append(canon)

    p_mat = ExactMatrix(ring, p)
    q_mat = ExactMatrix(ring, q)
    phi = DMatrix(ring, diag, n, m)
    if p_mat * a * q_mat != phi.matrix:
        raise MatrixError("diagonal reduction witness failed; arithmetic bug")
    return SmithDecomposition(p_mat, q_mat, phi)


def invariant_factors_oracle(a: ExactMatrix) -> List:
    """Diagonal entries recovered from gcds of all k x k subdeterminants.

    Independent of the reduction loop: enumerates minors directly, so it is
    only usable for small matrices, and serves as a cross-check oracle.
    """
    ring = a.ring
    size = min(a.nrows, a.ncols)
    if size > 7:
        raise MatrixError("oracle limited to order 7; use the reduction instead")
    deltas = [ring.one]
    for k in range(1, size + 1):
        g = ring.zero
        for rset in combinations(range(a.nrows), k):
            for cset in combinations(range(a.ncols), k):
                g = ring.gcd(g, det_exact(a.submatrix(rset, cset)))
        deltas.append(g)
        if ring.is_zero(g):
            break
    out = []
    for k in range(1, size + 1):
        if k < len(deltas) and not ring.is_zero(deltas[k]):
            out.append(ring.canonical(ring.exact_div(deltas[k], deltas[k - 1])))
        else:
            out.append(ring.zero)
    return out


# ---------------------------------------------------------------------------
# gcd-extracting row


def gcd_row(a: ExactMatrix) -> List:
    """Row u = (1, u_2, ..., u_n) such that the entries of u*a have the same
    gcd as the entries of a.  Needs rank >= 2; single-row inputs are trivial.
    """
    ring = a.ring
    n = a.nrows
    if n == 1 or a.is_zero():
        return [ring.one] + [ring.zero] * (n - 1)
    s = smith(a)
    k = s.phi.rank
    if k < 2:
        raise MatrixError("a single-invariant-factor matrix admits no such row")
    perm = list(range(n))
    perm[0], perm[k - 1] = perm[k - 1], perm[0]
    u_perm = ExactMatrix.from_function(
        ring, n, n, lambda i, j: ring.one if perm[i] == j else ring.zero
    )
    p1 = u_perm * s.p
    det = det_exact(p1)
    det_inv = ring.unit_inverse(det)
    # fix the determinant to exactly 1 by a unit row scale
    p1 = p1.scale_row(0, det_inv)
    p1_inv = inverse_unimodular(p1)

    # signed first-row cofactors of the inverse: their pairing with the
    # first row is the determinant, which is 1
    others = list(range(1, n))
    cofactors = []
    for j in range(n):
        cols = [c for c in range(n) if c != j]
        minor = det_exact(p1_inv.submatrix(others, cols)) if n > 1 else ring.one
        cofactors.append(minor if j % 2 == 0 else -minor)

    from .ring import bezout_row as _bezout_row

    phi_k = s.phi.diag[k - 1]
    sol = _bezout_row(ring, cofactors, coprime_prefix_index=k, coprime_to=phi_k)
    u = [
        sum((sol[t] * p1.rows[t][j] for t in range(n)), ring.zero) for j in range(n)
    ]
    if u[0] != ring.one:
        raise MatrixError("leading coefficient is not 1; arithmetic bug")
    target = ring.gcd_list([v for row in a.rows for v in row])
    got = ring.gcd_list(
        [
            sum((u[t] * a.rows[t][j] for t in range(n)), ring.zero)
            for j in range(a.ncols)
        ]
    )
    if got != target:
        raise MatrixError("gcd row postcondition failed; arithmetic bug")
    return u


# ---------------------------------------------------------------------------
# prescribed minors


def matrix_with_prescribed_minors(ring: Ring, values: Sequence) -> ExactMatrix:
    """(n-1) x n matrix whose maximal minors are the given n elements.

    Ordering convention: deleting column j (1-based) leaves the minor equal
    to values[n - j] (0-based indexing into values), i.e. the minors read
    values[n-1], ..., values[0] as the deleted column moves left to right.
    """
    a = [ring.coerce(v) for v in values]
    n = len(a)
    if n < 2:
        raise MatrixError("need at least two prescribed minors")
    if n == 2:
        return ExactMatrix(ring, [a])
    prefix, a_n = a[:-1], a[-1]
    delta = ring.gcd_list(prefix)
    if ring.is_zero(delta):
        rows = [[ring.zero] * n for _ in range(n - 1)]
        for i in range(n - 2):
            rows[i][i + 1] = ring.one
        rows[n - 2][n - 1] = a_n
        return ExactMatrix(ring, rows)
    s = matrix_with_prescribed_minors(
        ring, [ring.exact_div(v, delta) for v in prefix]
    )
    # complete s upward to determinant 1: pair a coefficient row against the
    # signed maximal minors of s
    reduced_rev = [ring.exact_div(prefix[n - 2 - j], delta) for j in range(n - 1)]
    g, coeffs = bezout_fold(ring, reduced_rev)
    if not ring.is_unit(g):
        raise MatrixError("reduced minors are not coprime; arithmetic bug")
    v_row = [coeffs[j] if j % 2 == 0 else -coeffs[j] for j in range(n - 1)]
    top = [delta] + [vj * a_n for vj in v_row]
    rows = [top] + [[ring.zero] + list(s.rows[i]) for i in range(n - 2)]
    out = ExactMatrix(ring, rows)
    for j in range(n):
        cols = [c for c in range(n) if c != j]
        got = det_exact(out.submatrix(range(n - 1), cols))
        if got != a[n - 1 - j]:
            raise MatrixError("prescribed minor mismatch; arithmetic bug")
    return out
