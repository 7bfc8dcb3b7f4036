"""Zelisko groups, generating sets and the divisor structure of matrices.

The central object is the group of invertible matrices H with
H * Phi = Phi * K for an invertible K, where Phi is a d-matrix.  These
groups control which matrices share a set of left transforming matrices
and hence the whole left-divisibility theory.  This module provides the
membership tests with witnesses (for the group itself and for the larger
set of transforms between two chains), the left-divisibility test with
quotient, the constructive factorization of an arbitrary invertible
matrix through such a group, and the enumeration of the left divisors of
a matrix with prescribed invariant factors, one per right-associate
class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .factor import factor_element, multiplicities
from .matrix import (
    ExactMatrix,
    MatrixError,
    block_diag,
    det_exact,
    inverse_unimodular,
    is_unimodular,
)
from .normal_forms import DMatrix, bezout_fold, complement_to_invertible, smith
from .ring import PolyQ, Ring, stable_range_coeff


def _chain_of(phi, ring: Optional[Ring] = None) -> Tuple[Ring, List]:
    """Validated divisibility chain out of a DMatrix / diagonal / sequence."""
    if isinstance(phi, DMatrix):
        return phi.ring, list(phi.diag)
    if isinstance(phi, ExactMatrix):
        dm = DMatrix.from_matrix(phi)
        return dm.ring, list(dm.diag)
    if ring is None:
        raise MatrixError("a plain sequence of diagonal entries needs a ring")
    dm = DMatrix(ring, [ring.coerce(v) for v in phi], len(phi), len(phi))
    return ring, list(dm.diag)


def zelisko_member(h: ExactMatrix, phi) -> Tuple[bool, Optional[ExactMatrix]]:
    """Does h satisfy h*diag(phi) = diag(phi)*K for an invertible K?

    Returns (True, K) or (False, None).  The test is by entry patterns:
    h must be invertible, the block of rows past the rank of phi must
    vanish on the first rank columns, and each subdiagonal entry h[i, j]
    inside the nonzero block must be divisible by phi_i / phi_j.
    """
    ring, chain = _chain_of(phi, h.ring)
    n = h.nrows
    if not h.is_square() or len(chain) != n:
        raise MatrixError("membership test needs a square matrix matching the chain")
    t = sum(1 for v in chain if not ring.is_zero(v))
    if not is_unimodular(h):
        return False, None
    for i in range(t, n):
        for j in range(t):
            if not ring.is_zero(h[i, j]):
                return False, None
    for i in range(t):
        for j in range(i):
            ratio = ring.exact_div(chain[i], chain[j])
            if not ring.divides(ratio, h[i, j]):
                return False, None

    def witness(i: int, j: int):
        if i < t and j < t:
            return ring.exact_div(h[i, j] * chain[j], chain[i])
        if i >= t and j >= t:
            return ring.one if i == j else ring.zero
        return ring.zero

    k = ExactMatrix.from_function(ring, n, n, witness)
    phi_m = ExactMatrix.from_diagonal(ring, chain)
    if h * phi_m != phi_m * k:
        raise MatrixError("membership witness failed; arithmetic bug")
    return True, k


def _pattern_completion(ring: Ring, chain: Sequence, row: Sequence) -> ExactMatrix:
    """Invertible matrix with the given bottom row, inside the chain's group.

    row must be primitive and weighted: row[j] divisible by
    chain[-1]/chain[j].  The completion keeps zeros below the diagonal in
    all other rows, except possibly in the first column where entries
    stay divisible by the required ratios.
    """
    w = [ring.coerce(v) for v in row]
    n = len(w)
    if n == 1:
        if not ring.is_unit(w[0]):
            raise MatrixError("a 1x1 completion needs a unit entry")
        return ExactMatrix(ring, [[w[0]]])
    if not ring.is_zero(w[0]):
        return complement_to_invertible(ring, w)
    j = next(i for i in range(1, n) if not ring.is_zero(w[i]))
    ratio = ring.exact_div(chain[j], chain[0])
    # at most one scale can cancel the leading entry, so two tries suffice
    shift = ratio
    if ring.is_zero(w[0] + shift * w[j]):
        shift = ratio * ring.coerce(2)
    if ring.is_zero(w[0] + shift * w[j]):
        raise MatrixError("could not move a nonzero into the leading slot")
    bumped = list(w)
    bumped[0] = w[0] + shift * w[j]
    filled = complement_to_invertible(ring, bumped)
    # undo the bump: column 0 <- column 0 - shift * column j
    out = filled.add_multiple_of_col(0, j, -shift)
    if list(out.row(n - 1)) != w:
        raise MatrixError("completion lost its bottom row; arithmetic bug")
    return out


def _clear_last_column(a: ExactMatrix, chain: Sequence) -> Tuple[ExactMatrix, ExactMatrix]:
    """Group member h with (h*a) having last column (0, ..., 0, 1)^T.

    Requires the weighted gcd of a's last column to be a unit, where the
    j-th weight is chain[-1]/chain[j].
    """
    ring = a.ring
    n = a.nrows
    weights = [ring.exact_div(chain[-1], chain[j]) for j in range(n)]
    col = a.col(n - 1)
    g, vs = bezout_fold(ring, [weights[j] * col[j] for j in range(n - 1)] + [col[n - 1]])
    if g != ring.one:
        raise MatrixError("weighted gcd of the last column is not a unit")
    row = [weights[j] * vs[j] for j in range(n - 1)] + [vs[n - 1]]
    h1 = _pattern_completion(ring, chain, row)
    t1 = h1 * a
    if t1[n - 1, n - 1] != ring.one:
        raise MatrixError("pivot normalization failed; arithmetic bug")
    h2 = ExactMatrix.from_function(
        ring,
        n,
        n,
        lambda i, j: (
            ring.one
            if i == j
            else (-t1[i, n - 1] if j == n - 1 and i < n - 1 else ring.zero)
        ),
    )
    return h2 * h1, h2 * t1


@dataclass(frozen=True)
class ReductionObstruction:
    """First index i at which the coprimality criterion fails (1-based)."""

    index: int


def _is_lower_unitriangular(m: ExactMatrix) -> bool:
    ring = m.ring
    for i in range(m.nrows):
        if m[i, i] != ring.one:
            return False
        for j in range(i + 1, m.ncols):
            if not ring.is_zero(m[i, j]):
                return False
    return True


def _is_upper_unitriangular(m: ExactMatrix) -> bool:
    return _is_lower_unitriangular(m.transpose())


def reduce_lower_unitriangular(s: ExactMatrix, phi):
    """Group member h with h*s lower unitriangular, or the obstruction.

    s must be invertible and the chain nonsingular.  The transformation
    exists exactly when each ratio chain[i]/chain[i-1] is coprime to the
    determinant of the corresponding lower-right corner of s; on failure
    the 1-based index of the first bad corner is reported.
    """
    ring, chain = _chain_of(phi, s.ring)
    n = s.nrows
    if not s.is_square() or len(chain) != n:
        raise MatrixError("reduction needs a square matrix matching the chain")
    if any(ring.is_zero(v) for v in chain):
        raise MatrixError("reduction is defined for nonsingular chains only")
    if not is_unimodular(s):
        raise MatrixError("reduction applies to invertible matrices only")
    for i in range(1, n):
        ratio = ring.exact_div(chain[i], chain[i - 1])
        corner = s.submatrix(range(i, n), range(i, n))
        if not ring.coprime(ratio, det_exact(corner)):
            return ReductionObstruction(index=i)
    if _is_lower_unitriangular(s):
        return ExactMatrix.identity(ring, n)
    h = _reduce_lu(s, chain)
    out = h * s
    if not _is_lower_unitriangular(out):
        raise MatrixError("reduction did not reach unitriangular shape; bug")
    ok, _ = zelisko_member(h, DMatrix(ring, chain, n, n))
    if not ok:
        raise MatrixError("reduction left the group; bug")
    return h


def _reduce_lu(s: ExactMatrix, chain: Sequence) -> ExactMatrix:
    ring = s.ring
    n = s.nrows
    if n == 1:
        _, unit = ring.normalize_assoc(s[0, 0])
        if s[0, 0] != unit:
            raise MatrixError("corner entry is not a unit; criterion violated")
        return ExactMatrix(ring, [[ring.unit_inverse(unit)]])
    h_step, t = _clear_last_column(s, chain)
    inner = t.submatrix(range(n - 1), range(n - 1))
    k = _reduce_lu(inner, chain[: n - 1])
    return block_diag(k, ExactMatrix.identity(ring, 1)) * h_step


def factor_gl(a: ExactMatrix, phi) -> Tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    """Split an invertible a as h * v * u.

    h lies in the group of the nonsingular chain phi, v is lower
    unitriangular and u is upper unitriangular.  The factors are verified
    before returning.
    """
    ring, chain = _chain_of(phi, a.ring)
    n = a.nrows
    if not a.is_square() or len(chain) != n:
        raise MatrixError("factorization needs a square matrix matching the chain")
    if any(ring.is_zero(v) for v in chain):
        raise MatrixError("factorization is defined for nonsingular chains only")
    if not is_unimodular(a):
        raise MatrixError("factorization applies to invertible matrices only")
    h, v, u = _factor_gl(a, chain)
    if h * v * u != a:
        raise MatrixError("factors do not multiply back; bug")
    ok, _ = zelisko_member(h, DMatrix(ring, chain, n, n))
    if not ok or not _is_lower_unitriangular(v) or not _is_upper_unitriangular(u):
        raise MatrixError("factor shapes violated; bug")
    return h, v, u


def _factor_gl(a: ExactMatrix, chain: Sequence):
    ring = a.ring
    n = a.nrows
    eye = ExactMatrix.identity(ring, n)
    if n == 1:
        return a, eye, eye
    if _is_lower_unitriangular(a):
        return eye, a, eye
    if _is_upper_unitriangular(a):
        return eye, eye, a
    dm = DMatrix(ring, chain, n, n)
    ok, _ = zelisko_member(a, dm)
    if ok:
        return a, eye, eye

    # arrange a unit-compatible corner: add a right multiple of the other
    # columns to the last one so its bottom entry becomes coprime to the
    # widest ratio of the chain
    psi = ring.exact_div(chain[-1], chain[0])
    last_row = list(a.row(n - 1))
    g, coeffs = bezout_fold(ring, last_row[: n - 1])
    if ring.is_zero(g):
        shifts = [ring.zero] * (n - 1)
    else:
        r = stable_range_coeff(ring, last_row[n - 1], g, psi)
        shifts = [r * c for c in coeffs]
    u_last = ExactMatrix.from_function(
        ring,
        n,
        n,
        lambda i, j: (
            ring.one
            if i == j
            else (shifts[i] if j == n - 1 and i < n - 1 else ring.zero)
        ),
    )
    a1 = a * u_last
    h_step, t = _clear_last_column(a1, chain)
    inner = t.submatrix(range(n - 1), range(n - 1))
    bottom = [t[n - 1, j] for j in range(n - 1)]
    h3, v3, u3 = _factor_gl(inner, chain[: n - 1])
    one = ExactMatrix.identity(ring, 1)
    h = inverse_unimodular(h_step) * block_diag(h3, one)
    u3_inv = inverse_unimodular(u3)
    tail = ExactMatrix(ring, [bottom]) * u3_inv
    v_rows = [list(v3.row(i)) + [ring.zero] for i in range(n - 1)]
    v_rows.append(list(tail.row(0)) + [ring.one])
    v = ExactMatrix(ring, v_rows)
    u_last_inv = ExactMatrix.from_function(
        ring,
        n,
        n,
        lambda i, j: (
            ring.one
            if i == j
            else (-shifts[i] if j == n - 1 and i < n - 1 else ring.zero)
        ),
    )
    u = block_diag(u3, one) * u_last_inv
    return h, v, u


# ---------------------------------------------------------------------------
# generating sets: the invertible transforms between two chains


def _as_dmatrix(obj, ring: Optional[Ring] = None) -> DMatrix:
    if isinstance(obj, DMatrix):
        return obj
    if isinstance(obj, ExactMatrix):
        return DMatrix.from_matrix(obj)
    if ring is None:
        raise MatrixError("a plain sequence of diagonal entries needs a ring")
    return DMatrix(ring, [ring.coerce(v) for v in obj], len(obj), len(obj))


def _chain_divides(ring: Ring, lower: Sequence, upper: Sequence) -> bool:
    return all(ring.divides(p, v) for p, v in zip(lower, upper))


@dataclass(frozen=True)
class GenSetPattern:
    """Entry constraints shared by every invertible l with l*E = Phi*S.

    Rows past the rank of phi vanish on the first rank-of-e columns, and
    inside the nonzero block every entry strictly below the diagonal in
    those columns carries the factor phi_i / (phi_i, eps_j).  The factors
    grow down and to the left: the factor at (i, j) divides the factor at
    (i + p, j - q).
    """

    e: DMatrix
    phi: DMatrix
    factors: Dict[Tuple[int, int], object]

    @property
    def size(self) -> int:
        return self.phi.nrows

    @property
    def zero_block(self) -> Tuple[int, int]:
        return self.size - self.phi.rank, self.e.rank

    def matches(self, l: ExactMatrix) -> bool:
        """Entry test only; invertibility is the caller's business."""
        ring = self.phi.ring
        n = self.size
        if l.ring is not ring or l.shape() != (n, n):
            raise MatrixError("matrix does not fit the pattern size")
        rows, cols = self.zero_block
        for i in range(n - rows, n):
            for j in range(cols):
                if not ring.is_zero(l[i, j]):
                    return False
        for (i, j), f in self.factors.items():
            if not ring.divides(f, l[i, j]):
                return False
        return True


def gen_set_pattern(e, phi, ring: Optional[Ring] = None) -> GenSetPattern:
    """Pattern of the set {invertible l : l * E = Phi * S}.

    Raises when the chain of phi does not divide the chain of e, since
    the set is empty exactly then.
    """
    e_dm = _as_dmatrix(e, ring)
    phi_dm = _as_dmatrix(phi, e_dm.ring)
    r = e_dm.ring
    n = e_dm.nrows
    if (e_dm.ncols, phi_dm.nrows, phi_dm.ncols) != (n, n, n):
        raise MatrixError("the two chains must be square and equally sized")
    if not _chain_divides(r, phi_dm.diag, e_dm.diag):
        raise MatrixError("no invertible transform exists: chains do not divide")
    k, t = e_dm.rank, phi_dm.rank
    factors: Dict[Tuple[int, int], object] = {}
    for i in range(t):
        for j in range(min(i, k)):
            g = r.gcd(phi_dm.diag[i], e_dm.diag[j])
            factors[(i, j)] = r.exact_div(phi_dm.diag[i], g)
    return GenSetPattern(e_dm, phi_dm, factors)


def gen_set_member(l: ExactMatrix, e, phi) -> Tuple[bool, Optional[ExactMatrix]]:
    """Does l satisfy l * diag(e) = diag(phi) * S for some square S?

    Returns (True, S) or (False, None); always false when the chain of
    phi does not divide the chain of e, because then no invertible
    transform exists at all.  The witness comes from entrywise division,
    S[i, j] = l[i, j] * eps_j / phi_i on the nonzero rows of phi.
    """
    ring = l.ring
    e_dm = _as_dmatrix(e, ring)
    phi_dm = _as_dmatrix(phi, ring)
    n = l.nrows
    if not l.is_square():
        raise MatrixError("membership test needs a square matrix")
    for dm in (e_dm, phi_dm):
        if (dm.nrows, dm.ncols) != (n, n):
            raise MatrixError("chain sizes must match the matrix")
    if not _chain_divides(ring, phi_dm.diag, e_dm.diag):
        return False, None
    pattern = gen_set_pattern(e_dm, phi_dm)
    if not pattern.matches(l) or not is_unimodular(l):
        return False, None
    t = phi_dm.rank

    def entry(i: int, j: int):
        if i >= t:
            return ring.zero
        return ring.exact_div(l[i, j] * e_dm.diag[j], phi_dm.diag[i])

    s = ExactMatrix.from_function(ring, n, n, entry)
    if l * e_dm.matrix != phi_dm.matrix * s:
        raise MatrixError("membership witness fails; bug")
    return True, s


def divides_left(b: ExactMatrix, a: ExactMatrix) -> Tuple[bool, Optional[ExactMatrix]]:
    """Is a = b * c for some square c over the same ring?

    Route one is the transforming-matrix criterion: Smith both sides and
    test p_b * p_a^-1 against the generating-set pattern of the two
    invariant-factor chains.  Route two feeds b * X = a to the linear
    solver.  The verdicts must agree; the quotient is assembled from the
    membership witness as q_b * S * q_a^-1.
    """
    from .matrix_arith import Unsolvable, solve_linear  # circular at module level

    if not a.is_square() or not b.is_square() or a.shape() != b.shape():
        raise MatrixError("left divisibility needs equal square shapes")
    da = smith(a)
    db = smith(b)
    l = db.p * inverse_unimodular(da.p)
    ok, s = gen_set_member(l, da.phi, db.phi)
    solver_says = not isinstance(solve_linear(b, a), Unsolvable)
    if ok != solver_says:
        raise MatrixError("divisibility routes disagree; bug")
    if not ok:
        return False, None
    c = db.q * s * inverse_unimodular(da.q)
    if b * c != a:
        raise MatrixError("quotient fails to reproduce the dividend; bug")
    return True, c


@dataclass(frozen=True)
class GenSetClassification:
    """How the set of admissible transforms sits among the known groups."""

    equals_zelisko: bool
    equals_full_gl: bool
    is_group: bool
    delta: Optional[DMatrix]


def classify_gen_set(e, phi, ring: Optional[Ring] = None) -> GenSetClassification:
    """Flags for the set L = {invertible l : l * diag(e) = diag(phi) * S}.

    equals_zelisko tests L against the group of phi by invariant-factor
    conditions, case split on the two ranks.  equals_full_gl is the
    single divisibility phi_n | eps_1.  is_group asks whether L is the
    group of SOME d-matrix; the candidate accumulates the consecutive
    subdiagonal factors, diag(1, f21, f21*f32, ...), and the decision is
    whether the corner factor f(n, 1) equals the full product - exactly
    the condition for L to be closed under products.
    """
    e_dm = _as_dmatrix(e, ring)
    phi_dm = _as_dmatrix(phi, e_dm.ring)
    gen_set_pattern(e_dm, phi_dm)  # validates sizes and chain divisibility
    r = e_dm.ring
    n = e_dm.nrows
    eps, chain = e_dm.diag, phi_dm.diag
    k, t = e_dm.rank, phi_dm.rank

    def f(i: int, j: int):
        return r.exact_div(chain[i], r.gcd(chain[i], eps[j]))

    equals_full_gl = r.divides(chain[n - 1], eps[0])

    if t == n:
        if k == n:
            equals_zelisko = all(
                r.gcd(chain[n - 1], eps[j]) == chain[j] for j in range(n - 1)
            )
        else:
            equals_zelisko = all(chain[i] == chain[k] for i in range(k, n)) and all(
                r.gcd(chain[n - 1], eps[j]) == chain[j] for j in range(k)
            )
    else:
        equals_zelisko = k == t and all(
            r.gcd(chain[k - 1], eps[j]) == chain[j] for j in range(k - 1)
        )

    is_group = False
    delta: Optional[DMatrix] = None
    if n == 1:
        is_group, delta = True, DMatrix(r, [r.one], 1, 1)
    elif n == 2:
        # order two always yields a group: the group of diag(1, f21) when
        # phi is nonsingular, upper triangular units otherwise
        is_group = True
        if t == 2:
            delta = DMatrix(r, [r.one, f(1, 0)], 2, 2)
        elif k == 0:
            delta = DMatrix(r, [r.one, r.one], 2, 2)
        else:
            delta = DMatrix(r, [r.one, r.zero], 2, 2)
    elif k == 0:
        # zero e puts no constraint at all: L is the full linear group
        is_group, delta = True, DMatrix(r, [r.one] * n, n, n)
    else:
        m = n if t == n else k
        ok = t == n or k == t
        if ok and m >= 2:
            prod = r.one
            for i in range(1, m):
                prod = prod * f(i, i - 1)
            ok = f(m - 1, 0) == prod
        if ok:
            running = r.one
            diag = [r.one]
            for i in range(1, m):
                running = running * f(i, i - 1)
                diag.append(running)
            diag.extend([r.zero] * (n - m))
            is_group, delta = True, DMatrix(r, diag, n, n)
    return GenSetClassification(equals_zelisko, equals_full_gl, is_group, delta)


# ---------------------------------------------------------------------------
# divisor enumeration


@dataclass(frozen=True)
class KazimirskiiElement:
    """One residue-normalized lower unitriangular transform."""

    matrix: ExactMatrix
    residues: Dict[Tuple[int, int], object]


def kazimirskii_moduli(e, phi, ring: Optional[Ring] = None) -> Dict[Tuple[int, int], object]:
    """Residue modulus (phi_i, eps_j) / phi_j for each slot i > j.

    Both chains must be square nonsingular with the phi chain dividing
    the e chain entrywise.
    """
    e_dm = _as_dmatrix(e, ring)
    phi_dm = _as_dmatrix(phi, e_dm.ring)
    gen_set_pattern(e_dm, phi_dm)  # validates sizes and chain divisibility
    if e_dm.rank != e_dm.nrows or phi_dm.rank != phi_dm.nrows:
        raise MatrixError("residue moduli need nonsingular chains")
    r = e_dm.ring
    out: Dict[Tuple[int, int], object] = {}
    for i in range(1, e_dm.nrows):
        for j in range(i):
            g = r.gcd(phi_dm.diag[i], e_dm.diag[j])
            out[(i, j)] = r.exact_div(g, phi_dm.diag[j])
    return out


def _residue_pool(ring: Ring, modulus, grid) -> Callable[[], Iterator]:
    """Callable producing a fresh iterator over K(modulus) representatives."""
    if ring.is_unit(modulus):
        return lambda: iter((ring.zero,))
    if ring.name == "Z":
        return lambda: iter(range(modulus))
    if ring.name == "Qx":
        if grid is None:
            raise MatrixError(
                f"residue set modulo {ring.to_text(modulus)} is infinite; "
                "supply a coefficient grid"
            )
        coeffs = sorted({Fraction(c) for c in grid})
        deg = modulus.degree
        return lambda: (
            PolyQ(tup) for tup in itertools.product(coeffs, repeat=deg)
        )
    raise MatrixError(f"no residue enumeration for ring {ring.name!r}")


def _lazy_product(pools: Sequence[Callable[[], Iterator]]) -> Iterator[Tuple]:
    if not pools:
        yield ()
        return
    for value in pools[0]():
        for rest in _lazy_product(pools[1:]):
            yield (value,) + rest


def kazimirskii_set(e, phi, grid=None, ring: Optional[Ring] = None) -> Iterator[KazimirskiiElement]:
    """Lazily enumerate the residue-normalized transforms between two chains.

    The entry at slot (i, j) below the diagonal is f_ij * k_ij, where
    f_ij = phi_i / (phi_i, eps_j) and k_ij runs over canonical residues
    modulo (phi_i, eps_j) / phi_j.  Over the integers those residues are
    0..m-1 and the stream needs no help.  Over the polynomials a modulus
    of positive degree has infinitely many residues, so a finite
    coefficient grid must be supplied; the candidates are then all
    polynomials of smaller degree with coefficients drawn from the grid.
    """
    e_dm = _as_dmatrix(e, ring)
    phi_dm = _as_dmatrix(phi, e_dm.ring)
    r = e_dm.ring
    n = e_dm.nrows
    moduli = kazimirskii_moduli(e_dm, phi_dm)
    pattern = gen_set_pattern(e_dm, phi_dm)
    slots = sorted(moduli)
    pools = [_residue_pool(r, moduli[slot], grid) for slot in slots]

    def build(choice: Tuple) -> KazimirskiiElement:
        rows = [[r.one if i == j else r.zero for j in range(n)] for i in range(n)]
        residues: Dict[Tuple[int, int], object] = {}
        for (i, j), value in zip(slots, choice):
            residues[(i, j)] = value
            rows[i][j] = pattern.factors[(i, j)] * value
        return KazimirskiiElement(ExactMatrix(r, rows), residues)

    return (build(choice) for choice in _lazy_product(pools))


@dataclass
class DivisorEnumeration:
    """Stream of left divisors with fixed invariant factors, plus a verdict.

    complete is the divisor-overlap test: wherever the chain strictly
    grows, every irreducible factor of phi_i / phi_{i-1} must occur there
    with strictly larger multiplicity than in eps_{i-1} / phi_{i-1}.
    failures lists the offending 1-based (chain index, factor position)
    pairs.  Even when incomplete the stream is sound - every member
    left-divides the input and distinct members are never right
    associates - it just misses some divisor classes.
    """

    complete: bool
    failures: Tuple[Tuple[int, int], ...]
    matrices: Iterator[ExactMatrix]

    def __iter__(self) -> Iterator[ExactMatrix]:
        return self.matrices


def enumerate_divisors(a: ExactMatrix, phi, grid=None) -> DivisorEnumeration:
    """Left divisors of a with invariant factors phi, one per right-associate class.

    a must be square nonsingular.  Divisors are assembled as
    (V * P)^-1 * diag(phi) over the residue-normalized transforms V,
    where P is a left Smith transform of a.
    """
    ring = a.ring
    if not a.is_square():
        raise MatrixError("divisor enumeration needs a square matrix")
    n = a.nrows
    dec = smith(a)
    e_dm = dec.phi
    if e_dm.rank != n:
        raise MatrixError("divisor enumeration needs a nonsingular matrix")
    phi_dm = _as_dmatrix(phi, ring)
    if (phi_dm.nrows, phi_dm.ncols) != (n, n):
        raise MatrixError("chain size must match the matrix")
    if not _chain_divides(ring, phi_dm.diag, e_dm.diag):
        raise MatrixError("no such divisors: the chain does not divide the invariant factors")

    failures: List[Tuple[int, int]] = []
    for i in range(1, n):
        if phi_dm.diag[i] == phi_dm.diag[i - 1]:
            continue
        ratio = ring.exact_div(phi_dm.diag[i], phi_dm.diag[i - 1])
        base = multiplicities(ring, ring.exact_div(e_dm.diag[i - 1], phi_dm.diag[i - 1]))
        for pos, (g, high) in enumerate(factor_element(ring, ratio)):
            if high <= base.get(g, 0):
                failures.append((i + 1, pos + 1))

    members = kazimirskii_set(e_dm, phi_dm, grid=grid)
    p_a = dec.p
    target = phi_dm.matrix

    def stream() -> Iterator[ExactMatrix]:
        for v in members:
            yield inverse_unimodular(v.matrix * p_a) * target

    return DivisorEnumeration(not failures, tuple(failures), stream())
