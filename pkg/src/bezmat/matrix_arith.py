"""Matrix gcd/lcm arithmetic, linear solving and associate tests.

All operations work over a commutative Bezout domain of stable range 1.5
(integers or rationals[x] here) and return transforming matrices as
witnesses, so every result can be checked by exact multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .divisibility import factor_gl
from .matrix import (
    ExactMatrix,
    MatrixError,
    block_diag,
    det_exact,
    hstack,
    inverse_unimodular,
    is_unimodular,
)
from .normal_forms import DMatrix, SmithDecomposition, reduce_column, smith
from .ring import Ring, bezout_row


def _require_pair(a: ExactMatrix, b: ExactMatrix) -> Tuple[Ring, int]:
    if a.ring is not b.ring:
        raise MatrixError("operands live over different rings")
    if not a.is_square() or not b.is_square() or a.nrows != b.nrows:
        raise MatrixError("operands must be square of equal size")
    return a.ring, a.nrows


def _pair_echelon(a: ExactMatrix, b: ExactMatrix) -> Tuple[ExactMatrix, ExactMatrix]:
    """Unimodular w with (a | b) * w = (d | 0), d a lower staircase.

    Column-folds each row left to right; after row i every column past
    the current pivot is zero in rows <= i, so the right half empties
    after at most n pivots.
    """
    ring, n = _require_pair(a, b)
    m = 2 * n
    work = [list(ra) + list(rb) for ra, rb in zip(a.rows, b.rows)]
    u = [
        [ring.one if i == j else ring.zero for j in range(m)]
        for i in range(m)
    ]

    def col_op(i, j, p, q, r, s):
        for rows in (work, u):
            for row in rows:
                ci, cj = row[i], row[j]
                row[i] = p * ci + q * cj
                row[j] = r * ci + s * cj

    pivot = 0
    for i in range(n):
        for j in range(pivot + 1, m):
            if ring.is_zero(work[i][j]):
                continue
            w = ring.gcd_ext(work[i][pivot], work[i][j])
            p = ring.exact_div(work[i][pivot], w.g)
            q = ring.exact_div(work[i][j], w.g)
            col_op(pivot, j, w.u, w.v, -q, p)
        if not ring.is_zero(work[i][pivot]):
            pivot += 1
            if pivot == m:
                break
    for i in range(n):
        for j in range(n, m):
            if not ring.is_zero(work[i][j]):
                raise MatrixError("staircase did not empty the right half; bug")
    d = ExactMatrix(ring, [row[:n] for row in work])
    return d, ExactMatrix(ring, u)


def _left_coprime(a: ExactMatrix, b: ExactMatrix) -> bool:
    d, _ = _pair_echelon(a, b)
    return is_unimodular(d)


@dataclass(frozen=True)
class GcdWitness:
    """d with a == d * a1, b == d * b1 and (a | b) * u = (d | 0)."""

    d: ExactMatrix
    u: ExactMatrix
    a1: ExactMatrix
    b1: ExactMatrix


def left_gcd(a: ExactMatrix, b: ExactMatrix) -> GcdWitness:
    """Greatest common left divisor with left-coprime quotients."""
    ring, n = _require_pair(a, b)
    d, u = _pair_echelon(a, b)
    u_inv = inverse_unimodular(u)
    a1 = u_inv.submatrix(range(n), range(n))
    b1 = u_inv.submatrix(range(n), range(n, 2 * n))
    if ring.is_zero(det_exact(d)):
        a1, b1 = _coprime_quotients(d, a1, b1)
    if a != d * a1 or b != d * b1:
        raise MatrixError("gcd quotients failed to multiply back; bug")
    return GcdWitness(d=d, u=u, a1=a1, b1=b1)


def _coprime_quotients(
    d: ExactMatrix, a1: ExactMatrix, b1: ExactMatrix
) -> Tuple[ExactMatrix, ExactMatrix]:
    """Rebuild quotients of a singular gcd so they become left coprime.

    Only the top rank rows of the quotients are pinned by d; the free
    bottom rows are replaced by completions of the compressed row spaces,
    which removes any common left factor.
    """
    ring = d.ring
    n = d.nrows
    dec = smith(d)
    r = dec.phi.rank
    if r == n:
        return a1, b1
    eye = ExactMatrix.identity(ring, n)
    if r == 0:
        return eye, eye
    q_inv = inverse_unimodular(dec.q)
    abar = (q_inv * a1).submatrix(range(r), range(n))
    bbar = (q_inv * b1).submatrix(range(r), range(n))

    def completed(rows_r: ExactMatrix) -> ExactMatrix:
        dec_r = smith(rows_r)
        comp = inverse_unimodular(dec_r.q).submatrix(range(r, n), range(n))
        return ExactMatrix(
            ring, [list(rows_r.row(i)) for i in range(r)] + [list(comp.row(i)) for i in range(n - r)]
        )

    a_new = dec.q * completed(abar)
    b_new = dec.q * completed(bbar)
    if not _left_coprime(a_new, b_new):
        raise MatrixError("rebuilt quotients are not left coprime; bug")
    return a_new, b_new


def right_gcd(a: ExactMatrix, b: ExactMatrix) -> GcdWitness:
    """Greatest common right divisor: a == a1 * d, b == b1 * d."""
    w = left_gcd(a.transpose(), b.transpose())
    return GcdWitness(
        d=w.d.transpose(),
        u=w.u.transpose(),
        a1=w.a1.transpose(),
        b1=w.b1.transpose(),
    )


class RightAnnihilator:
    """Solutions X of d * X = 0, parametrized by the free bottom block."""

    def __init__(self, u: ExactMatrix, rank: int):
        self.u = u
        self.rank = rank
        self.ring = u.ring
        self.n = u.nrows
        self._u_inv = inverse_unimodular(u)

    @property
    def is_trivial(self) -> bool:
        return self.rank == self.n

    def member(self, t: ExactMatrix) -> ExactMatrix:
        if self.is_trivial:
            raise MatrixError("the annihilator is trivial; only zero belongs")
        if t.nrows != self.n - self.rank:
            raise MatrixError("free block must have one row per zero factor")
        rows = [[self.ring.zero] * t.ncols for _ in range(self.rank)]
        rows += [list(t.row(i)) for i in range(t.nrows)]
        return self.u * ExactMatrix(self.ring, rows)

    def contains(self, x: ExactMatrix) -> bool:
        if x.nrows != self.n:
            return False
        y = self._u_inv * x
        return all(
            self.ring.is_zero(y[i, j])
            for i in range(self.rank)
            for j in range(x.ncols)
        )


def right_annihilator(d: ExactMatrix) -> RightAnnihilator:
    dec = smith(d)
    return RightAnnihilator(u=dec.q, rank=dec.phi.rank)


@dataclass(frozen=True)
class GcdLcmPair:
    """Gcd d and lcm m read off one transform: (a | b) * w = (d | 0), m = b * w[n:, n:]."""

    d: ExactMatrix
    m: ExactMatrix
    w: ExactMatrix


def gcd_lcm_pair(a: ExactMatrix, b: ExactMatrix) -> GcdLcmPair:
    """Left gcd and right lcm produced by one unimodular column transform."""
    ring, n = _require_pair(a, b)
    eye = ExactMatrix.identity(ring, 2 * n)
    if b.is_zero():
        return GcdLcmPair(d=a, m=ExactMatrix.zero(ring, n, n), w=eye)
    if a.is_zero():
        swap = ExactMatrix.from_function(
            ring,
            2 * n,
            2 * n,
            lambda i, j: ring.one if abs(i - j) == n else ring.zero,
        )
        return GcdLcmPair(d=b, m=ExactMatrix.zero(ring, n, n), w=swap)
    d, w = _pair_echelon(a, b)
    if ring.is_zero(det_exact(d)):
        w = _lcm_aligned_transform(a, b)
        if not is_unimodular(w):
            raise MatrixError("aligned transform is not invertible; bug")
        prod = hstack(a, b) * w
        d = prod.submatrix(range(n), range(n))
        for i in range(n):
            for j in range(n, 2 * n):
                if not ring.is_zero(prod[i, j]):
                    raise MatrixError("aligned transform kept the right half; bug")
    m_blk = w.submatrix(range(n), range(n, 2 * n))
    n_blk = w.submatrix(range(n, 2 * n), range(n, 2 * n))
    if not (a * m_blk + b * n_blk).is_zero():
        raise MatrixError("multiple blocks do not cancel; bug")
    return GcdLcmPair(d=d, m=b * n_blk, w=w)


def _lcm_aligned_transform(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    """Transform for singular pairs whose kernel columns absorb the annihilator.

    The pair is compressed to a nonsingular corner of size rank(b) plus
    the part of a sticking out of b's column space; the staircase of that
    corner is then embedded back, padded by identities on the dead
    directions.
    """
    ring = a.ring
    n = a.nrows
    sb = smith(b)
    k = sb.phi.rank
    if k in (0, n):
        raise MatrixError("aligned transform expects a singular nonzero b")
    b11 = list(sb.phi.diag[:k])
    pba = sb.p * a
    sa = smith(pba)
    r = sa.phi.rank
    if r == 0:
        raise MatrixError("aligned transform expects a nonzero a")
    c = (pba * sa.q).submatrix(range(n), range(r))
    a_top = c.submatrix(range(k), range(r))
    a_bot = c.submatrix(range(k, n), range(r))
    s_bot = smith(a_bot)
    t = s_bot.phi.rank
    a_bot_rows = (s_bot.p * a_bot).submatrix(range(t), range(r)) if t else None
    kt = k + t
    if r > kt:
        raise MatrixError("corner rank exceeded its bound; bug")

    def ap_entry(i, j):
        if j >= r:
            return ring.zero
        if i < k:
            return a_top[i, j]
        return a_bot_rows[i - k, j]

    ap = ExactMatrix.from_function(ring, kt, kt, ap_entry)
    bp = ExactMatrix.from_function(
        ring,
        kt,
        kt,
        lambda i, j: b11[i] if i == j and i < k else ring.zero,
    )
    dp, wp = _pair_echelon(ap, bp)
    if ring.is_zero(det_exact(dp)):
        raise MatrixError("compressed pair stayed singular; bug")
    z = n - kt

    def big_entry(i, j):
        # groups: [0, kt) [kt, n) [n, n+kt) [n+kt, 2n)
        if i < kt:
            if j < kt:
                return wp[i, j]
            if n <= j < n + kt:
                return wp[i, kt + (j - n)]
            return ring.zero
        if i < n:
            return ring.one if i == j else ring.zero
        if i < n + kt:
            if j < kt:
                return wp[kt + (i - n), j]
            if n <= j < n + kt:
                return wp[kt + (i - n), kt + (j - n)]
            return ring.zero
        return ring.one if i == j else ring.zero

    big = ExactMatrix.from_function(ring, 2 * n, 2 * n, big_entry)
    return block_diag(sa.q, sb.q) * big


@dataclass(frozen=True)
class Unsolvable:
    """First 1-based position where the invariant factors disagree."""

    index: int
    coeff_factor: object
    augmented_factor: object


class SolutionLattice:
    """All X with coeff * X = rhs, as u * [[s_top], [T]] * q^-1 over free T."""

    def __init__(
        self,
        coeff: ExactMatrix,
        rhs: ExactMatrix,
        u: ExactMatrix,
        q: ExactMatrix,
        s_rows: List[List],
        rank: int,
    ):
        self.coeff = coeff
        self.rhs = rhs
        self.u = u
        self.q = q
        self.rank = rank
        self.ring = coeff.ring
        self.n = coeff.ncols
        self.m = rhs.ncols
        self.free_rows = self.n - rank
        self._u_inv = inverse_unimodular(u)
        self._q_inv = inverse_unimodular(q)
        self._s_rows = [list(r) for r in s_rows]
        self.s_top = ExactMatrix(self.ring, self._s_rows) if rank else None
        zero_free = [[self.ring.zero] * self.m for _ in range(self.free_rows)]
        self.lcm_solution = self._assemble(zero_free)
        aligned = [[self.ring.zero] * self.m for _ in range(self.free_rows)]
        for i in range(self.free_rows):
            j = self.m - self.free_rows + i
            if j >= 0:
                aligned[i][j] = self.ring.one
        self.gcd_solution = self._assemble(aligned)
        self.particular = self.lcm_solution

    def _assemble(self, t_rows: List[List]) -> ExactMatrix:
        rows = [list(r) for r in self._s_rows] + [list(r) for r in t_rows]
        return self.u * ExactMatrix(self.ring, rows) * self._q_inv

    def member(self, t: Optional[ExactMatrix] = None) -> ExactMatrix:
        if t is None:
            return self.particular
        if t.nrows != self.free_rows or t.ncols != self.m:
            raise MatrixError("free block must be (n - rank) x rhs-width")
        return self._assemble([list(t.row(i)) for i in range(t.nrows)])

    def is_member(self, x: ExactMatrix) -> bool:
        if x.nrows != self.n or x.ncols != self.m:
            return False
        y = self._u_inv * x * self.q
        return all(
            y[i, j] == self._s_rows[i][j]
            for i in range(self.rank)
            for j in range(self.m)
        )

    def decompose(self, x: ExactMatrix) -> Optional[ExactMatrix]:
        """Free block T with member(T) == x, or None for non-members."""
        if not self.is_member(x):
            return None
        if self.free_rows == 0:
            return None
        y = self._u_inv * x * self.q
        return y.submatrix(range(self.rank, self.n), range(self.m))

    def projector(self) -> ExactMatrix:
        """Idempotent collapsing every member onto the zero-block one."""
        ring = self.ring
        core = ExactMatrix.from_function(
            ring,
            self.n,
            self.n,
            lambda i, j: ring.one if i == j and i < self.rank else ring.zero,
        )
        return self.u * core * self._u_inv


def _row_aligned_transform(coeff: ExactMatrix, phi: Sequence) -> Optional[ExactMatrix]:
    """Invertible v with coeff == v * diag(phi), if the columns align.

    Exists when column j of coeff is divisible by phi[j], the columns past
    the rank vanish, and the quotient columns form a primitive block.  In
    that case the lattice below can keep the right transform of the
    coefficient equal to the identity.
    """
    ring = coeff.ring
    n = coeff.nrows
    t = sum(1 for v in phi if not ring.is_zero(v))
    for j in range(t, n):
        if any(not ring.is_zero(v) for v in coeff.col(j)):
            return None
    if t == 0:
        return ExactMatrix.identity(ring, n)
    quot_cols = []
    for j in range(t):
        col = coeff.col(j)
        if any(not ring.divides(phi[j], v) for v in col):
            return None
        quot_cols.append([ring.exact_div(v, phi[j]) for v in col])
    w0 = ExactMatrix.from_function(ring, n, t, lambda i, j: quot_cols[j][i])
    dec = smith(w0)
    if dec.invariant_factors != [ring.one] * t:
        return None
    p_inv = inverse_unimodular(dec.p)
    q_inv = inverse_unimodular(dec.q)
    if t == n:
        v = p_inv * q_inv
    else:
        v = p_inv * block_diag(q_inv, ExactMatrix.identity(ring, n - t))
    full = ExactMatrix.from_function(
        ring, n, n, lambda i, j: phi[i] if i == j else ring.zero
    )
    if coeff != v * full:
        return None
    return v


def solve_linear(
    coeff: ExactMatrix, rhs: ExactMatrix
) -> Union[SolutionLattice, Unsolvable]:
    """Solve coeff * X = rhs; coeff square, rhs of matching height."""
    if coeff.ring is not rhs.ring:
        raise MatrixError("operands live over different rings")
    if not coeff.is_square() or rhs.nrows != coeff.nrows:
        raise MatrixError("coefficient must be square and match the right side")
    ring = coeff.ring
    n = coeff.nrows
    dec_c = smith(coeff)
    phi = dec_c.invariant_factors
    t = dec_c.phi.rank
    aug = smith(hstack(coeff, rhs)).invariant_factors
    for i in range(n):
        if phi[i] != aug[i]:
            return Unsolvable(index=i + 1, coeff_factor=phi[i], augmented_factor=aug[i])

    dec_r = smith(rhs)
    v = _row_aligned_transform(coeff, phi)
    if v is not None:
        p_c = inverse_unimodular(v)
        q_c = ExactMatrix.identity(ring, n)
    else:
        p_c = dec_c.p
        q_c = dec_c.q
    l = p_c * inverse_unimodular(dec_r.p)
    le = l * dec_r.d_matrix
    s_rows = []
    for i in range(t):
        row = []
        for j in range(rhs.ncols):
            if not ring.divides(phi[i], le[i, j]):
                raise MatrixError("solvable system with non-dividing rows; bug")
            row.append(ring.exact_div(le[i, j], phi[i]))
        s_rows.append(row)
    for i in range(t, n):
        if any(not ring.is_zero(le[i, j]) for j in range(rhs.ncols)):
            raise MatrixError("solvable system with nonzero dead rows; bug")
    lat = SolutionLattice(coeff=coeff, rhs=rhs, u=q_c, q=dec_r.q, s_rows=s_rows, rank=t)
    for x in (lat.gcd_solution, lat.lcm_solution):
        if coeff * x != rhs:
            raise MatrixError("lattice member fails the equation; bug")
    return lat


def gcd_smith_2x2(a: ExactMatrix, b: ExactMatrix) -> DMatrix:
    """Invariant factors of the left gcd of a 2x2 pair, without computing it.

    Reads them off the invariant factors of both operands and one entry of
    the transition between their left transforms.
    """
    ring, n = _require_pair(a, b)
    if n != 2:
        raise MatrixError("this shortcut is for 2x2 matrices")
    da = smith(a)
    db = smith(b)
    e1, e2 = da.invariant_factors
    f1, f2 = db.invariant_factors
    s = db.p * inverse_unimodular(da.p)
    nu1 = ring.gcd(e1, f1)
    nu2 = ring.gcd(ring.gcd(e2, f2), s[1, 0] * ring.lcm(e1, f1))
    return DMatrix(ring, [nu1, nu2], 2, 2)


def _split_transition(
    s: ExactMatrix, a, b
) -> Tuple[ExactMatrix, ExactMatrix]:
    """Write the 2x2 invertible s as l_a * l_b with a | (l_a)21, b | (l_b)21.

    Requires gcd(a, b) to divide s21.  Zero moduli degenerate to one-sided
    splits.
    """
    ring = s.ring
    eye = ExactMatrix.identity(ring, 2)
    a = ring.coerce(a)
    b = ring.coerce(b)
    s21 = s[1, 0]
    if ring.is_zero(a) and ring.is_zero(b):
        if not ring.is_zero(s21):
            raise MatrixError("split needs s21 = 0 when both moduli vanish")
        return s, eye
    if ring.is_zero(a):
        if not ring.divides(b, s21):
            raise MatrixError("modulus does not divide the corner entry")
        return eye, s
    if ring.is_zero(b):
        if not ring.divides(a, s21):
            raise MatrixError("modulus does not divide the corner entry")
        return s, eye
    if not ring.divides(ring.gcd(a, b), s21):
        raise MatrixError("gcd of the moduli must divide the corner entry")
    s22 = s[1, 1]
    coeffs = bezout_row(ring, [s21, s22], coprime_prefix_index=2, coprime_to=b)
    k12, k22 = coeffs
    w2 = ring.gcd_ext(k22, b * k12)
    if w2.g != ring.one:
        raise MatrixError("corner coefficients are not coprime; bug")
    k1 = ExactMatrix(ring, [[w2.u, k12], [-(b * w2.v), k22]])
    g1 = s * k1
    h1 = ExactMatrix(ring, [[ring.one, -g1[0, 1]], [ring.zero, ring.one]])
    t1 = h1 * g1
    q11 = t1[0, 0]
    if not ring.is_unit(q11):
        raise MatrixError("pivot did not become a unit; bug")
    h3 = ExactMatrix(ring, [[ring.unit_inverse(q11), ring.zero], [ring.zero, ring.one]]) * h1
    w3 = ring.gcd_ext(a, b)
    g21 = ring.exact_div(t1[1, 0], w3.g)
    h4 = ExactMatrix(ring, [[ring.one, ring.zero], [a * w3.u * g21, ring.one]])
    k2 = ExactMatrix(ring, [[ring.one, ring.zero], [b * w3.v * g21, ring.one]])
    l_a = inverse_unimodular(h3) * h4
    l_b = k2 * inverse_unimodular(k1)
    if l_a * l_b != s:
        raise MatrixError("split does not multiply back; bug")
    if not ring.divides(a, l_a[1, 0]) or not ring.divides(b, l_b[1, 0]):
        raise MatrixError("split factors violate their patterns; bug")
    return l_a, l_b


def _scaled_division_ok(ring: Ring, dens: Sequence, l: ExactMatrix, nums: Sequence) -> bool:
    """dens[i] | l[i, j] * nums[j] entrywise, zero denominators forcing zeros."""
    for i in range(l.nrows):
        for j in range(l.ncols):
            v = l[i, j] * nums[j]
            if ring.is_zero(dens[i]):
                if not ring.is_zero(v):
                    return False
            elif not ring.divides(dens[i], v):
                return False
    return True


@dataclass(frozen=True)
class StructuredGcd:
    """Gcd d = (l_a * p_a)^-1 * diag(phi) = (l_b * p_b)^-1 * diag(phi)."""

    d: ExactMatrix
    phi: DMatrix
    l_a: ExactMatrix
    l_b: ExactMatrix
    s: ExactMatrix
    p_a: ExactMatrix
    p_b: ExactMatrix


@dataclass(frozen=True)
class StructuredLcm:
    """Lcm m = p_a^-1 * l_a * diag(omega) = p_b^-1 * l_b * diag(omega).

    The witnesses obey s * l_a = l_b, and eps[i] | l_a[i, j] * omega[j]
    (same for the other operand), which proves the divisibility claims
    by exact entrywise division.
    """

    m: ExactMatrix
    omega: DMatrix
    l_a: ExactMatrix
    l_b: ExactMatrix
    s: ExactMatrix
    p_a: ExactMatrix
    p_b: ExactMatrix


def _last_column_shape(factors: Sequence, ring: Ring) -> bool:
    """diag(1, ..., 1, x) with x nonzero."""
    return all(v == ring.one for v in factors[:-1]) and not ring.is_zero(factors[-1])


def structured_gcd(a: ExactMatrix, b: ExactMatrix) -> StructuredGcd:
    """Left gcd computed from invariant factors plus the transition matrix.

    For 2x2 pairs this covers every case; for larger sizes both operands
    must be nonsingular and b equivalent to diag(1, ..., 1, x).
    """
    ring, n = _require_pair(a, b)
    da = smith(a)
    db = smith(b)
    s = db.p * inverse_unimodular(da.p)
    eps = da.invariant_factors
    dlt = db.invariant_factors
    eye = ExactMatrix.identity(ring, n)
    if a.is_zero() and b.is_zero():
        phi_list, l_a, l_b = [ring.zero] * n, s, eye
    elif a.is_zero():
        phi_list, l_a, l_b = dlt, s, eye
    elif b.is_zero():
        phi_list, l_a, l_b = eps, eye, inverse_unimodular(s)
    elif n == 2:
        e1, e2 = eps
        f1, f2 = dlt
        s21 = s[1, 0]
        phi1 = ring.gcd(e1, f1)
        phi2 = ring.gcd(ring.gcd(e2, f2), s21 * ring.lcm(e1, f1))
        phi_list = [phi1, phi2]
        if ring.is_zero(e2) and ring.is_zero(f2) and ring.is_zero(s21):
            l_a, l_b = s, eye
        else:
            a_g = ring.exact_div(phi2, ring.gcd(phi2, f1))
            b_g = ring.exact_div(phi2, ring.gcd(phi2, e1))
            m_fac, n_fac = _split_transition(s, a_g, b_g)
            l_a, l_b = n_fac, inverse_unimodular(m_fac)
    else:
        if ring.is_zero(eps[-1]) or not _last_column_shape(dlt, ring):
            raise MatrixError(
                "beyond 2x2 this form needs nonsingular operands with "
                "b equivalent to diag(1, ..., 1, x)"
            )
        terms = [ring.gcd(eps[-1], dlt[-1])]
        terms += [eps[j] * s[n - 1, j] for j in range(n - 1)]
        phi_list = [ring.one] * (n - 1) + [ring.gcd_list(terms)]
        l_a, l_b = s, eye
    phi = DMatrix(ring, phi_list, n, n)
    d = inverse_unimodular(l_a * da.p) * phi.matrix
    if d != inverse_unimodular(l_b * db.p) * phi.matrix:
        raise MatrixError("the two gcd expressions disagree; bug")
    if not _scaled_division_ok(ring, phi_list, l_a, eps):
        raise MatrixError("gcd does not divide the first operand; bug")
    if not _scaled_division_ok(ring, phi_list, l_b, dlt):
        raise MatrixError("gcd does not divide the second operand; bug")
    return StructuredGcd(d=d, phi=phi, l_a=l_a, l_b=l_b, s=s, p_a=da.p, p_b=db.p)


def structured_lcm(a: ExactMatrix, b: ExactMatrix) -> StructuredLcm:
    """Right lcm computed from invariant factors plus the transition matrix.

    For 2x2 pairs this covers every case; for larger sizes both operands
    must be nonsingular and equivalent to diag(1, ..., 1, x).
    """
    ring, n = _require_pair(a, b)
    da = smith(a)
    db = smith(b)
    s = db.p * inverse_unimodular(da.p)
    eps = da.invariant_factors
    dlt = db.invariant_factors
    eye = ExactMatrix.identity(ring, n)
    omega_list: Optional[List] = None
    if a.is_zero() or b.is_zero():
        omega_list, l_a, l_b = [ring.zero] * n, eye, s
    elif n == 2:
        e1, e2 = eps
        f1, f2 = dlt
        s21 = s[1, 0]
        if ring.is_zero(e2) and ring.is_zero(f2) and ring.is_zero(s21):
            omega_list, l_a, l_b = [ring.lcm(e1, f1), ring.zero], eye, s
        else:
            z = ring.gcd(e2, f2)
            tt = ring.lcm(e1, f1)
            denom = ring.gcd(z, s21 * tt)
            om1 = ring.exact_div(tt * z, denom)
            om2 = ring.lcm(e2, f2)
            if ring.is_zero(om1) and ring.is_zero(om2):
                omega_list, l_a, l_b = [ring.zero, ring.zero], eye, s
            else:
                a_l = ring.exact_div(f2, ring.gcd(f2, om1))
                b_l = ring.exact_div(e2, ring.gcd(e2, om1))
                k_fac, t_fac = _split_transition(s, a_l, b_l)
                omega_list = [om1, om2]
                l_a = inverse_unimodular(t_fac)
                l_b = k_fac
    else:
        if not _last_column_shape(eps, ring) or not _last_column_shape(dlt, ring):
            raise MatrixError(
                "beyond 2x2 this form needs nonsingular operands "
                "equivalent to diag(1, ..., 1, x)"
            )
        omega_list, l_a, l_b = _lcm_last_column(ring, n, s, eps, dlt, da, db)
    omega = DMatrix(ring, omega_list, n, n)
    m = inverse_unimodular(da.p) * l_a * omega.matrix
    if m != inverse_unimodular(db.p) * l_b * omega.matrix:
        raise MatrixError("the two lcm expressions disagree; bug")
    if s * l_a != l_b:
        raise MatrixError("witnesses break the transition relation; bug")
    if not _scaled_division_ok(ring, eps, l_a, omega_list):
        raise MatrixError("first operand does not divide the lcm; bug")
    if not _scaled_division_ok(ring, dlt, l_b, omega_list):
        raise MatrixError("second operand does not divide the lcm; bug")
    return StructuredLcm(m=m, omega=omega, l_a=l_a, l_b=l_b, s=s, p_a=da.p, p_b=db.p)


def _lcm_last_column(
    ring: Ring,
    n: int,
    s: ExactMatrix,
    eps: Sequence,
    dlt: Sequence,
    da: SmithDecomposition,
    db: SmithDecomposition,
):
    """Lcm witnesses for nonsingular operands shaped diag(1, ..., 1, x)."""
    e = eps[-1]
    f = dlt[-1]
    g = ring.gcd(e, f)
    prefix = [s[n - 1, j] for j in range(n - 1)]
    om1 = ring.exact_div(g, ring.gcd_list([g] + prefix))
    om_last = ring.lcm(e, f)
    omega_list = [ring.one] * (n - 2) + [om1, om_last]
    a_l = ring.exact_div(e, ring.gcd(e, om1))
    b_l = ring.exact_div(f, ring.gcd(f, om1))
    alpha = ring.gcd(a_l, b_l)
    h_f, v_f, u_f = factor_gl(s, DMatrix(ring, dlt, n, n))
    v11 = v_f.submatrix(range(n - 1), range(n - 1))
    one = ExactMatrix.identity(ring, 1)
    h2 = block_diag(inverse_unimodular(v11), one)
    htilde = h2 * inverse_unimodular(h_f)
    t_mat = inverse_unimodular(u_f)
    c_mat = htilde * s * t_mat
    for i in range(n - 1):
        for j in range(n):
            expected = ring.one if i == j else ring.zero
            if c_mat[i, j] != expected:
                raise MatrixError("transition did not flatten; bug")
    if c_mat[n - 1, n - 1] != ring.one:
        raise MatrixError("transition corner is not 1; bug")
    c_row = [c_mat[n - 1, j] for j in range(n - 1)]
    gamma = ring.gcd_list(c_row)
    eye = ExactMatrix.identity(ring, n)
    if ring.is_zero(gamma):
        lap = lbp = eye
    else:
        if not ring.divides(alpha, gamma):
            raise MatrixError("corner gcd escaped its modulus; bug")
        beta = ring.exact_div(gamma, alpha)
        red, got = reduce_column(ExactMatrix(ring, [[v] for v in c_row]))
        if got != gamma:
            raise MatrixError("column fold disagrees with the gcd; bug")
        rev = ExactMatrix.from_function(
            ring,
            n - 1,
            n - 1,
            lambda i, j: ring.one if i + j == n - 2 else ring.zero,
        )
        u_row = red.transpose() * rev
        w3 = ring.gcd_ext(a_l, b_l)

        def bordered(corner_entry):
            rows = [list(u_row.row(i)) + [ring.zero] for i in range(n - 1)]
            last = [ring.zero] * (n - 1) + [ring.one]
            last[n - 2] = corner_entry
            rows.append(last)
            return ExactMatrix(ring, rows)

        lap = bordered(-(a_l * w3.u * beta))
        lbp = bordered(b_l * w3.v * beta)
        if c_mat * lap != lbp:
            raise MatrixError("bordered factors break the transition; bug")
    l_a = t_mat * lap
    l_b = inverse_unimodular(htilde) * lbp
    if s * l_a != l_b:
        raise MatrixError("lcm witnesses break the transition; bug")
    return omega_list, l_a, l_b


def unimodular_quotient(base: ExactMatrix, target: ExactMatrix) -> Optional[ExactMatrix]:
    """Unimodular x with base * x == target, or None if none exists."""
    if base.shape() != target.shape() or not base.is_square():
        raise MatrixError("associate test needs equal square shapes")
    lat = solve_linear(base, target)
    if isinstance(lat, Unsolvable):
        return None
    ring = base.ring
    n = base.nrows
    if lat.rank == n:
        x = lat.particular
        return x if is_unimodular(x) else None
    if lat.rank == 0:
        return ExactMatrix.identity(ring, n) if target.is_zero() else None
    dec = smith(lat.s_top)
    if dec.invariant_factors != [ring.one] * lat.rank:
        return None
    comp = inverse_unimodular(dec.q).submatrix(range(lat.rank, n), range(n))
    x = lat.member(comp)
    if not is_unimodular(x):
        raise MatrixError("primitive completion is not invertible; bug")
    return x


def is_right_associate(a: ExactMatrix, b: ExactMatrix) -> bool:
    """b == a * u for some unimodular u."""
    return unimodular_quotient(a, b) is not None


def is_left_associate(a: ExactMatrix, b: ExactMatrix) -> bool:
    """b == u * a for some unimodular u."""
    return unimodular_quotient(a.transpose(), b.transpose()) is not None
