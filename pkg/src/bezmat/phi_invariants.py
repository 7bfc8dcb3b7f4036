"""Column rods, transform skeletons, and orbit normal forms over a chain.

Everything here is relative to a fixed nonsingular divisibility chain
phi_1 | ... | phi_n and the group of invertible matrices H with
H * diag(phi) = diag(phi) * K, K invertible.  Weighting by the diagonal
matrices Phi_i = diag(phi_i/phi_1, ..., phi_i/phi_{i-1}, 1, ..., 1)
attaches two computable orbit invariants:

* the rod of a primitive column a: entry i is the canonical gcd of
  Phi_i * a;
* the skeleton of an invertible P: row i is the canonical diagonal of a
  left triangular form of Phi_i * P.

Both stay fixed under left multiplication by group members, and both
control normal shapes.  rod_canonical_column compresses a column so
that the surviving entries are exactly the rod values outside
predictable zero runs.  skeleton_canonical_form classifies a
nonsingular matrix through the skeleton of its left Smith transform:
column permutations of the unitriangular skeleton lead to a unique
transform with units on the permuted diagonal and reduced residues
below; chains of the shape diag(1, ..., 1, phi) get a normal form
assembled from the residue data of a single row; anything else is
reported as-is with the skeleton attached.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .divisibility import (
    ReductionObstruction,
    _chain_of,
    _pattern_completion,
    reduce_lower_unitriangular,
    zelisko_member,
)
from .factor import factor_element
from .matrix import ExactMatrix, MatrixError, inverse_unimodular, is_unimodular
from .normal_forms import DMatrix, bezout_fold, hermite, smith
from .ring import Ring, bezout_row, stable_range_coeff


def _weights(ring: Ring, chain: Sequence, i: int) -> List:
    """Diagonal of Phi_{i+1}: chain ratios left of slot i, ones after."""
    head = [ring.exact_div(chain[i], chain[j]) for j in range(i)]
    return head + [ring.one] * (len(chain) - i)


def _column_input(a, phi, ring: Optional[Ring]) -> Tuple[Ring, List, List]:
    if isinstance(a, ExactMatrix):
        if a.ncols != 1:
            raise MatrixError("expected a single-column matrix")
        ring, chain = _chain_of(phi, a.ring)
        col = list(a.col(0))
    else:
        ring, chain = _chain_of(phi, ring)
        col = [ring.coerce(v) for v in a]
    if len(col) != len(chain):
        raise MatrixError("column length must match the chain")
    if any(ring.is_zero(v) for v in chain):
        raise MatrixError("the chain must be nonsingular")
    if not ring.is_unit(ring.gcd_list(col)):
        raise MatrixError("the column must be primitive")
    return ring, chain, col


@dataclass(frozen=True)
class PhiRod:
    """Canonical gcds delta_i of the weighted columns Phi_i * a.

    delta_1 = 1, consecutive entries divide each other, and each step
    delta_i / delta_{i-1} divides the chain step phi_i / phi_{i-1}.
    """

    ring: Ring
    entries: Tuple

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)


def _rod_entries(ring: Ring, chain: Sequence, col: Sequence) -> List:
    out = []
    for i in range(len(col)):
        weighted = [w * v for w, v in zip(_weights(ring, chain, i), col)]
        out.append(ring.gcd_list(weighted))
    return out


def phi_rod(a, phi, ring: Optional[Ring] = None) -> PhiRod:
    """Rod of a primitive column over a nonsingular chain.

    a may be a one-column ExactMatrix or a plain sequence.  The result
    is constant on the orbit of a under the group of the chain.
    """
    ring, chain, col = _column_input(a, phi, ring)
    return PhiRod(ring, tuple(_rod_entries(ring, chain, col)))


def _validated_rod(ring: Ring, chain: Sequence, rod) -> List:
    deltas = list(rod.entries) if isinstance(rod, PhiRod) else [ring.coerce(v) for v in rod]
    if len(deltas) != len(chain):
        raise MatrixError("rod length must match the chain")
    if deltas[0] != ring.one:
        raise MatrixError("a rod starts at 1")
    for i in range(1, len(deltas)):
        if not ring.divides(deltas[i - 1], deltas[i]):
            raise MatrixError("rod entries must form a divisibility chain")
        step = ring.exact_div(deltas[i], deltas[i - 1])
        if not ring.divides(step, ring.exact_div(chain[i], chain[i - 1])):
            raise MatrixError("rod steps must divide the chain steps")
    return deltas


def _zero_runs(ring: Ring, chain: Sequence, deltas: Sequence) -> Tuple[Tuple[int, int], ...]:
    n = len(chain)

    def chain_step(s: int):
        return ring.exact_div(chain[s - 1], chain[s - 2])

    def rod_step(s: int):
        return ring.exact_div(deltas[s - 1], deltas[s - 2])

    def excess(s: int):
        return ring.exact_div(chain_step(s), rod_step(s))

    runs: List[Tuple[int, int]] = []
    q = n + 1
    while q - 1 >= 2 and ring.is_assoc(rod_step(q - 1), chain_step(q - 1)):
        q -= 1
    if q <= n:
        runs.append((n, q))
    start = q - 2
    while start >= 2:
        t = None
        for s in range(start, 1, -1):
            if ring.coprime(excess(s), ring.exact_div(deltas[s], deltas[s - 1])):
                t = s
                break
        if t is None:
            break
        low = t
        while low - 1 >= 2 and ring.coprime(excess(low - 1), ring.exact_div(deltas[t], deltas[low - 2])):
            low -= 1
        runs.append((t, low))
        start = low - 2
    return tuple(runs)


def rod_zero_runs(rod, phi, ring: Optional[Ring] = None) -> Tuple[Tuple[int, int], ...]:
    """Index runs (top, bottom), 1-based, that the canonical column zeroes.

    The first run hugs the bottom of the column while the rod step
    matches the chain step exactly.  Later runs are found by scanning
    downward, starting two slots above the previous run, for a position
    t whose excess (phi_t/phi_{t-1}) / (delta_t/delta_{t-1}) is coprime
    to delta_{t+1}/delta_t, then extending the run downward while the
    excess at each slot stays coprime to delta_{t+1}/delta_r.
    """
    if ring is None and isinstance(rod, PhiRod):
        ring = rod.ring
    ring, chain = _chain_of(phi, ring)
    if any(ring.is_zero(v) for v in chain):
        raise MatrixError("the chain must be nonsingular")
    deltas = _validated_rod(ring, chain, rod)
    return _zero_runs(ring, chain, deltas)


@dataclass
class RodReduction:
    """Group member h and the normal shape h * a of a primitive column.

    Below the top, the shape is an orbit invariant: position i holds
    either 0 (inside a zero run) or the rod value delta_i.  The leading
    entry is a free parameter of the shape, pinned only up to the
    coprimality postcondition, so two orbit members may reduce to
    shapes differing there.
    """

    h: ExactMatrix
    column: Tuple
    rod: PhiRod


def rod_canonical_column(a, phi, ring: Optional[Ring] = None) -> RodReduction:
    """Push a primitive column into its rod-patterned normal shape.

    The transform h lies in the group of the chain.  In h * a, position
    i holds the rod value delta_i except along the zero runs of
    rod_zero_runs, which are zeroed out; the leading entry is coprime to
    delta_n and becomes 1 when the bottom run spans the whole tail.
    """
    ring, chain, col = _column_input(a, phi, ring)
    n = len(col)
    rod = PhiRod(ring, tuple(_rod_entries(ring, chain, col)))
    if n == 1:
        _, unit = ring.normalize_assoc(col[0])
        h = ExactMatrix(ring, [[ring.unit_inverse(unit)]])
        return RodReduction(h=h, column=(ring.one,), rod=rod)

    dm = DMatrix(ring, chain, n, n)
    c = ExactMatrix(ring, [[v] for v in col])
    h = ExactMatrix.identity(ring, n)

    def apply(op: ExactMatrix) -> None:
        nonlocal c, h
        c = op * c
        h = op * h

    # pivot each position down to its rod value, bottom slot first
    for m in range(n, 1, -1):
        delta = rod.entries[m - 1]
        weights = [ring.exact_div(chain[m - 1], chain[j]) for j in range(m - 1)]
        elems = [weights[j] * c[j, 0] for j in range(m - 1)]
        elems += [c[j, 0] for j in range(m - 1, n)]
        u = bezout_row(
            ring,
            [ring.exact_div(e, delta) for e in elems],
            coprime_prefix_index=m,
            coprime_to=ring.exact_div(chain[m - 1], chain[0]),
        )
        block_row = [weights[j] * u[j] for j in range(m - 1)] + [u[m - 1]]
        comp = _pattern_completion(ring, chain[:m], block_row)
        rows = []
        for i in range(n):
            if i < m:
                tail = [u[j] if i == m - 1 else ring.zero for j in range(m, n)]
                rows.append([comp[i, j] for j in range(m)] + tail)
            else:
                rows.append([ring.one if i == j else ring.zero for j in range(n)])
        apply(ExactMatrix(ring, rows))
        if c[m - 1, 0] != delta:
            raise MatrixError("pivot missed its rod value; bug")

    # make the leading entry coprime to the last rod value
    if not ring.coprime(c[0, 0], rod.entries[n - 1]):
        r = stable_range_coeff(ring, c[0, 0], rod.entries[1], rod.entries[n - 1])
        apply(ExactMatrix.identity(ring, n).with_entry(0, 1, r))

    runs = _zero_runs(ring, chain, list(rod.entries))
    for top, bottom in runs:
        if top == n:
            sweep_from = max(bottom, 3)
            if sweep_from <= n:
                rows = [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]
                for i in range(sweep_from, n + 1):
                    rows[i - 1][i - 2] = -ring.exact_div(chain[i - 1], chain[i - 2])
                apply(ExactMatrix(ring, rows))
            if bottom == 2:
                ratio = ring.exact_div(chain[1], chain[0])
                w = ring.gcd_ext(c[0, 0], ratio)
                if w.g != ring.one:
                    raise MatrixError("leading entry shares a factor with the first step; bug")
                rows = [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]
                rows[0][0], rows[0][1] = w.u, w.v
                rows[1][0], rows[1][1] = -ratio, c[0, 0]
                apply(ExactMatrix(ring, rows))
        else:
            anchor = rod.entries[top]  # delta_{top+1}, the reference below the run
            for r in range(top, max(bottom, 3) - 1, -1):
                step = ring.exact_div(chain[r - 1], chain[r - 2])
                excess = ring.exact_div(step, ring.exact_div(rod.entries[r - 1], rod.entries[r - 2]))
                w = ring.gcd_ext(excess, ring.exact_div(anchor, rod.entries[r - 1]))
                if w.g != ring.one:
                    raise MatrixError("zero run lost its coprimality; bug")
                rows = [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]
                rows[r - 1][r - 2] = step * w.u
                rows[r - 1][r - 1] = -ring.one
                rows[r - 1][top] = w.v
                apply(ExactMatrix(ring, rows))
            if bottom == 2:
                step = ring.exact_div(chain[1], chain[0])
                excess = ring.exact_div(step, ring.exact_div(rod.entries[1], rod.entries[0]))
                w = ring.gcd_ext(c[0, 0] * excess, ring.exact_div(anchor, rod.entries[1]))
                if w.g != ring.one:
                    raise MatrixError("zero run lost its coprimality; bug")
                rows = [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]
                rows[1][0] = step * w.u
                rows[1][1] = -ring.one
                rows[1][top] = w.v
                apply(ExactMatrix(ring, rows))

    column = tuple(c[i, 0] for i in range(n))
    zeroed = set()
    for top, bottom in runs:
        zeroed.update(range(bottom, top + 1))
    for i in range(2, n + 1):
        expected = ring.zero if i in zeroed else rod.entries[i - 1]
        if column[i - 1] != expected:
            raise MatrixError("canonical column pattern violated; bug")
    if len(zeroed) == n - 1:
        if column[0] != ring.one:
            raise MatrixError("fully zeroed column must lead with 1; bug")
    elif not ring.coprime(column[0], rod.entries[n - 1]):
        raise MatrixError("leading entry not coprime to the last rod value; bug")
    if h * ExactMatrix(ring, [[v] for v in col]) != c:
        raise MatrixError("transform does not reproduce the column; bug")
    ok, _ = zelisko_member(h, dm)
    if not ok:
        raise MatrixError("reduction left the group; bug")
    return RodReduction(h=h, column=column, rod=rod)


@dataclass(frozen=True)
class PhiSkeleton:
    """Canonical triangular diagonals of the weighted transforms Phi_i * P."""

    ring: Ring
    entries: Tuple[Tuple, ...]

    @property
    def nrows(self) -> int:
        return len(self.entries)

    def row(self, i: int) -> Tuple:
        return self.entries[i]

    def matrix(self) -> ExactMatrix:
        return ExactMatrix(self.ring, [list(r) for r in self.entries])


def phi_skeleton(p: ExactMatrix, phi, ring: Optional[Ring] = None) -> PhiSkeleton:
    """Skeleton of an invertible matrix over a nonsingular chain.

    Row i is the canonical diagonal of the lower triangular form that
    row operations give Phi_i * p, read top-left to bottom-right.  The
    first row is all ones, and the whole table is unchanged when p is
    multiplied on the left by a member of the group of the chain.
    """
    ring, chain = _chain_of(phi, p.ring if ring is None else ring)
    n = len(chain)
    if not p.is_square() or p.nrows != n:
        raise MatrixError("skeleton needs a square matrix matching the chain")
    if any(ring.is_zero(v) for v in chain):
        raise MatrixError("the chain must be nonsingular")
    if not is_unimodular(p):
        raise MatrixError("skeleton is defined for invertible matrices")
    rev = tuple(range(n - 1, -1, -1))
    rows = []
    for i in range(n):
        weighted = ExactMatrix.from_diagonal(ring, _weights(ring, chain, i)) * p
        # row-op lower form of M has the same diagonal as the column-op
        # lower form of M transposed and flipped about both antidiagonals
        flipped = weighted.transpose().submatrix(rev, rev)
        diag = hermite(flipped).h.diagonal()
        rows.append(tuple(reversed(diag)))
    if any(v != ring.one for v in rows[0]):
        raise MatrixError("first skeleton row must be all ones; bug")
    return PhiSkeleton(ring, tuple(rows))


def _power(ring: Ring, base, exponent: int):
    out = ring.one
    for _ in range(exponent):
        out = out * base
    return out


@dataclass(frozen=True)
class SkeletonConditionReport:
    """Divisibility facts holding in every genuine skeleton table.

    steps_defined: each entry is divisible by the one above it.
    subset_products: the step products over any n-1 columns of row i
        are divisible by (phi_i/phi_{i-1})^(i-2).
    full_product: the step product over all columns of row i is an
        associate of (phi_i/phi_{i-1})^(i-1).
    step_divides_chain: every step divides its chain step.
    adjacent_tail_link: gcd of the previous chain step with the reduced
        tail product of row i divides the tail product of row i-1.
        This one rests on a looser reading than the rest and is meant to
        be reported, not enforced.
    row_product: the product of row i is an associate of the product of
        the weights phi_i/phi_k, k < i.
    unit_first_row: the first row is all ones.
    """

    steps_defined: bool
    subset_products: bool
    full_product: bool
    step_divides_chain: bool
    adjacent_tail_link: bool
    row_product: bool
    unit_first_row: bool

    def strict(self) -> bool:
        return (
            self.steps_defined
            and self.subset_products
            and self.full_product
            and self.step_divides_chain
            and self.row_product
            and self.unit_first_row
        )


def _skeleton_rows(skeleton, ring: Optional[Ring]) -> Tuple[Ring, List[List]]:
    if isinstance(skeleton, PhiSkeleton):
        return skeleton.ring, [list(r) for r in skeleton.entries]
    if isinstance(skeleton, ExactMatrix):
        return skeleton.ring, [list(skeleton.row(i)) for i in range(skeleton.nrows)]
    if ring is None:
        raise MatrixError("plain skeleton rows need a ring")
    return ring, [[ring.coerce(v) for v in row] for row in skeleton]


def skeleton_chain_conditions(skeleton, phi, ring: Optional[Ring] = None) -> SkeletonConditionReport:
    ring, rows = _skeleton_rows(skeleton, ring)
    _, chain = _chain_of(phi, ring)
    n = len(chain)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise MatrixError("skeleton shape must match the chain")

    unit_first = all(ring.is_unit(v) for v in rows[0])

    steps_defined = True
    steps: List[List] = []
    for i in range(1, n):
        row = []
        for j in range(n):
            if not ring.divides(rows[i - 1][j], rows[i][j]):
                steps_defined = False
                break
            row.append(ring.exact_div(rows[i][j], rows[i - 1][j]))
        if not steps_defined:
            break
        steps.append(row)

    subset_products = full_product = step_divides = tail_link = row_product = steps_defined
    if steps_defined:
        for i in range(1, n):
            ratio = ring.exact_div(chain[i], chain[i - 1])
            row = steps[i - 1]
            if any(not ring.divides(v, ratio) for v in row):
                step_divides = False
            power = _power(ring, ratio, i - 1)
            if i >= 2:
                lower = _power(ring, ratio, i - 2)
                for subset in itertools.combinations(range(n), n - 1):
                    prod = ring.one
                    for j in subset:
                        prod = prod * row[j]
                    if not ring.divides(lower, prod):
                        subset_products = False
                        break
            prod = ring.one
            for v in row:
                prod = prod * v
            if not ring.is_assoc(prod, power):
                full_product = False
        for i in range(n):
            prod = ring.one
            for v in rows[i]:
                prod = prod * v
            want = ring.one
            for k in range(i):
                want = want * ring.exact_div(chain[i], chain[k])
            if not ring.is_assoc(prod, want):
                row_product = False
        for i in range(2, n):
            prev_step = ring.exact_div(chain[i - 1], chain[i - 2])
            ratio = ring.exact_div(chain[i], chain[i - 1])
            tail = ring.one
            for j in range(i - 1, n):
                tail = tail * rows[i][j]
            reduced = ring.exact_div(tail, ring.gcd(tail, ratio))
            prev_tail = ring.one
            for j in range(i - 1, n):
                prev_tail = prev_tail * rows[i - 1][j]
            if not ring.divides(ring.gcd(prev_step, reduced), prev_tail):
                tail_link = False

    return SkeletonConditionReport(
        steps_defined=steps_defined,
        subset_products=subset_products,
        full_product=full_product,
        step_divides_chain=step_divides,
        adjacent_tail_link=tail_link,
        row_product=row_product,
        unit_first_row=unit_first,
    )


def unitriangular_skeleton(phi, ring: Optional[Ring] = None) -> ExactMatrix:
    """Shared skeleton of the invertible lower unitriangular matrices."""
    ring, chain = _chain_of(phi, ring)
    if any(ring.is_zero(v) for v in chain):
        raise MatrixError("the chain must be nonsingular")
    n = len(chain)
    return ExactMatrix.from_function(
        ring,
        n,
        n,
        lambda i, j: ring.exact_div(chain[i], chain[j]) if j < i else ring.one,
    )


def permutation_matrix(ring: Ring, tau: Sequence[int]) -> ExactMatrix:
    """Matrix with a one at (k, tau(k)) for each k."""
    n = len(tau)
    if sorted(tau) != list(range(n)):
        raise MatrixError("not a permutation")
    return ExactMatrix.from_function(
        ring, n, n, lambda i, j: ring.one if j == tau[i] else ring.zero
    )


def _permuted_base_rows(base: ExactMatrix, tau: Sequence[int]) -> Tuple[Tuple, ...]:
    n = base.nrows
    rows = []
    for i in range(n):
        row = [None] * n
        for k in range(n):
            row[tau[k]] = base[i, k]
        rows.append(tuple(row))
    return tuple(rows)


def _standard_tau(base: ExactMatrix, skel_rows: Sequence[Sequence]) -> Optional[Tuple[int, ...]]:
    """Permutation tau with skeleton = base columns rearranged, if any.

    Matching columns form equality classes, so assigning each base
    column the smallest unused equal skeleton column is exhaustive and
    yields the lexicographically smallest witness.
    """
    n = base.nrows
    base_cols = [tuple(base[i, k] for i in range(n)) for k in range(n)]
    skel_cols = [tuple(skel_rows[i][c] for i in range(n)) for c in range(n)]
    used = [False] * n
    tau: List[int] = []
    for k in range(n):
        pick = None
        for c in range(n):
            if not used[c] and skel_cols[c] == base_cols[k]:
                pick = c
                break
        if pick is None:
            return None
        used[pick] = True
        tau.append(pick)
    return tuple(tau)


@dataclass(frozen=True)
class StandardFamily:
    """Parametric family of canonical transforms sharing one skeleton.

    Members carry a one at (k, tau(k)) for every k; below row r's one,
    each slot (i, tau(r)) with r < i, tau(r) < tau(i) and nonunit
    modulus phi_i/phi_r holds a free canonical residue; all other
    entries vanish.
    """

    ring: Ring
    phi: Tuple
    tau: Tuple[int, ...]
    slots: Tuple[Tuple[Tuple[int, int], object], ...]

    def moduli(self) -> Dict[Tuple[int, int], object]:
        return dict(self.slots)

    def member(self, values: Optional[Mapping] = None) -> ExactMatrix:
        ring = self.ring
        n = len(self.tau)
        moduli = self.moduli()
        values = dict(values or {})
        for key in values:
            if key not in moduli:
                raise MatrixError(f"no residue slot at {key}")
        rows = [[ring.zero] * n for _ in range(n)]
        for k in range(n):
            rows[k][self.tau[k]] = ring.one
        for (i, j), modulus in moduli.items():
            v = ring.coerce(values.get((i, j), ring.zero))
            if ring.residue_rep(v, modulus) != v:
                raise MatrixError(f"value at {(i, j)} is not a canonical residue")
            rows[i][j] = v
        return ExactMatrix(ring, rows)

    def member_count(self) -> Optional[int]:
        if self.ring.name != "Z":
            return None
        count = 1
        for _, modulus in self.slots:
            count *= int(modulus)
        return count

    def members(self) -> Iterator[ExactMatrix]:
        if self.ring.name != "Z":
            raise MatrixError("residue slots are finite only over Z; use member()")
        keys = [key for key, _ in self.slots]
        ranges = [range(int(modulus)) for _, modulus in self.slots]
        for choice in itertools.product(*ranges):
            yield self.member(dict(zip(keys, choice)))


def _family(ring: Ring, chain: Sequence, tau: Sequence[int]) -> StandardFamily:
    slots = []
    for i in range(len(chain)):
        for r in range(i):
            if tau[r] < tau[i]:
                modulus = ring.exact_div(chain[i], chain[r])
                if not ring.is_unit(modulus):
                    slots.append(((i, tau[r]), modulus))
    return StandardFamily(ring, tuple(chain), tuple(tau), tuple(slots))


def standard_transform_families(phi, ring: Optional[Ring] = None) -> List[StandardFamily]:
    """All canonical-transform families of a chain, one per skeleton.

    Walks the permutations in lexicographic order and keeps the first
    witness of each distinct permuted skeleton, so ties from repeated
    chain values resolve to the smallest permutation.
    """
    ring, chain = _chain_of(phi, ring)
    if any(ring.is_zero(v) for v in chain):
        raise MatrixError("the chain must be nonsingular")
    n = len(chain)
    if n > 6:
        raise MatrixError("family enumeration is capped at 6 rows")
    base = unitriangular_skeleton(DMatrix(ring, chain, n, n))
    seen = set()
    out = []
    for tau in itertools.permutations(range(n)):
        key = _permuted_base_rows(base, tau)
        if key in seen:
            continue
        seen.add(key)
        out.append(_family(ring, chain, tau))
    return out


@dataclass
class SkeletonClassification:
    """Outcome of classifying a nonsingular matrix by its skeleton.

    kind is "standard", "disappear" or "non-standard".  For the first
    two, transform is the canonical coset representative T = h * p,
    h lies in the group of the chain, and representative = T^{-1} *
    diag(phi) is the canonical right-associate of the input.
    """

    kind: str
    skeleton: PhiSkeleton
    phi: DMatrix
    p: ExactMatrix
    tau: Optional[Tuple[int, ...]]
    transform: Optional[ExactMatrix]
    h: Optional[ExactMatrix]
    representative: Optional[ExactMatrix]


def _standard_normal_form(ring: Ring, chain: Sequence, p: ExactMatrix, tau: Sequence[int]):
    n = p.nrows
    dm = DMatrix(ring, chain, n, n)
    h1 = reduce_lower_unitriangular(p * permutation_matrix(ring, tau).transpose(), dm)
    if isinstance(h1, ReductionObstruction):
        raise MatrixError("standard skeleton failed its reduction; bug")
    work = h1 * p
    h = h1
    inv = [0] * n
    for k in range(n):
        inv[tau[k]] = k
    # row r is final once i passes it, and subtracting row r only
    # touches columns whose one sits at row r or above, so sweeping r
    # downward never disturbs a finished column
    for i in range(1, n):
        for r in range(i - 1, -1, -1):
            val = work[i, tau[r]]
            ratio = ring.exact_div(chain[i], chain[r])
            if tau[r] > tau[i]:
                coeff = val
            else:
                coeff = val - ring.residue_rep(val, ratio)
            if ring.is_zero(coeff):
                continue
            if not ring.divides(ratio, coeff):
                raise MatrixError("illegal clearing coefficient; bug")
            work = work.add_multiple_of_row(i, r, -coeff)
            h = h.add_multiple_of_row(i, r, -coeff)
    for i in range(n):
        for j in range(n):
            val = work[i, j]
            if j == tau[i]:
                ok = val == ring.one
            else:
                r = inv[j]
                if r > i or tau[r] > tau[i]:
                    ok = ring.is_zero(val)
                else:
                    ok = val == ring.residue_rep(val, ring.exact_div(chain[i], chain[r]))
            if not ok:
                raise MatrixError("normal shape violated; bug")
    okflag, _ = zelisko_member(h, dm)
    if not okflag or h * p != work:
        raise MatrixError("normal form transform left the group; bug")
    return work, h


def _is_disappear_chain(ring: Ring, chain: Sequence) -> bool:
    return all(ring.is_unit(v) for v in chain[:-1]) and not ring.is_unit(chain[-1])


def _inverse_mod(ring: Ring, a, modulus):
    w = ring.gcd_ext(a, modulus)
    if w.g != ring.one:
        raise MatrixError("element is not invertible modulo the modulus; bug")
    return ring.residue_rep(w.u, modulus)


def _crt_pair(ring: Ring, a, m, b, n):
    """Solve e = a (mod m), e = b (mod n); returns (e, lcm(m, n))."""
    w = ring.gcd_ext(m, n)
    diff = b - a
    if not ring.divides(w.g, diff):
        raise MatrixError("incompatible congruences; bug")
    combined = ring.lcm(m, n)
    e = a + m * (w.u * ring.exact_div(diff, w.g))
    return ring.residue_rep(e, combined), combined


def coprime_class_rep(ring: Ring, value, modulus, coprime_to):
    """Deterministic member of value's class mod modulus coprime to a target.

    Over Z this is the least nonnegative such member; over the
    polynomials the canonical residue is shifted by a stable-range
    multiple of the modulus.  A representative exists exactly when
    (value, modulus) is coprime to the target.
    """
    value = ring.coerce(value)
    modulus = ring.canonical(ring.coerce(modulus))
    coprime_to = ring.coerce(coprime_to)
    base = ring.residue_rep(value, modulus)
    if ring.coprime(base, coprime_to):
        return base
    if not ring.coprime(ring.gcd(value, modulus), coprime_to):
        raise MatrixError("no member of the class is coprime to the target")
    if ring.name == "Z":
        cap = abs(int(ring.canonical(coprime_to))) + 1
        for j in range(1, cap + 1):
            cand = base + j * modulus
            if ring.coprime(cand, coprime_to):
                return cand
        raise MatrixError("coprime representative scan exhausted; bug")
    r = stable_range_coeff(ring, base, modulus, coprime_to)
    return base + modulus * r


def _row_completion(ring: Ring, row: Sequence) -> ExactMatrix:
    """Invertible matrix with the given primitive bottom row.

    The completion keeps an identity block under the middle columns and
    spends its freedom in the first and last columns, so its shape is
    the one the disappear normal form expects.
    """
    k = len(row)
    if not ring.is_unit(ring.gcd_list(list(row))):
        raise MatrixError("completion needs a primitive row")
    if k == 1:
        if row[0] != ring.one:
            raise MatrixError("a singleton completion must be the unit row; bug")
        return ExactMatrix(ring, [[ring.one]])
    a1 = row[0]
    mids = list(row[1 : k - 1])
    target = row[k - 1]
    if mids:
        g, coeffs = bezout_fold(ring, mids)
    else:
        g, coeffs = ring.zero, []
    if ring.is_zero(g):
        w = a1
        f_mid = [ring.zero] * len(mids)
    else:
        r = stable_range_coeff(ring, a1, g, target)
        w = a1 + r * g
        f_mid = [-(r * e) for e in coeffs]
    wit = ring.gcd_ext(target, w)
    if wit.g != ring.one:
        raise MatrixError("completion corner is not coprime; bug")
    rows = [[ring.zero] * k for _ in range(k)]
    rows[0][0] = wit.u
    rows[0][k - 1] = -wit.v
    for j0 in range(1, k - 1):
        rows[j0][0] = f_mid[k - j0 - 2]
        rows[j0][k - j0 - 1] = ring.one
    rows[k - 1] = [ring.coerce(v) for v in row]
    out = ExactMatrix(ring, rows)
    if not is_unimodular(out):
        raise MatrixError("completion is not invertible; bug")
    return out


def _disappear_normal_form(ring: Ring, chain: Sequence, p: ExactMatrix):
    n = p.nrows
    phi = chain[-1]
    last = list(p.row(n - 1))
    mu = [ring.gcd(v, phi) for v in last]
    k_idx = None
    for i in range(n - 1, -1, -1):
        if not ring.is_assoc(mu[i], phi):
            k_idx = i
            break
    if k_idx is None:
        raise MatrixError("last transform row is not primitive; bug")

    # normalize the hidden unit: the group can only rescale the last row
    # by a single residue e, pinned progressively from the right so that
    # slot k holds exactly mu_k and each slot to its left holds the
    # canonical representative of its residue class
    entries: List = [None] * (k_idx + 1)
    entries[k_idx] = mu[k_idx]
    vk = ring.exact_div(last[k_idx], mu[k_idx])
    mod_k = ring.exact_div(phi, mu[k_idx])
    e, m = _inverse_mod(ring, vk, mod_k), mod_k
    g = mu[k_idx]
    for i in range(k_idx - 1, -1, -1):
        if ring.is_assoc(mu[i], phi):
            entries[i] = ring.zero
        else:
            v = ring.exact_div(last[i], mu[i])
            target = ring.exact_div(phi, mu[i])
            m_i = ring.exact_div(phi, ring.lcm(mu[i], g))
            s = coprime_class_rep(ring, e * v, m_i, target)
            entries[i] = mu[i] * s
            e2 = ring.residue_rep(_inverse_mod(ring, v, target) * s, target)
            e, m = _crt_pair(ring, e, m, e2, target)
        g = ring.gcd(g, mu[i])

    block = _row_completion(ring, entries)
    k = k_idx + 1

    def entry(i: int, j: int):
        if i < n - k:
            return ring.one if j == n - 1 - i else ring.zero
        if j < k:
            return block[i - (n - k), j]
        return ring.zero

    t = ExactMatrix.from_function(ring, n, n, entry)
    h = t * inverse_unimodular(p)
    ok, _ = zelisko_member(h, DMatrix(ring, chain, n, n))
    if not ok:
        raise MatrixError("disappear normal form left the group; bug")
    return t, h


def skeleton_canonical_form(b: ExactMatrix) -> SkeletonClassification:
    """Classify a nonsingular matrix by the skeleton of its left transform.

    A standard skeleton (a column permutation of the unitriangular one)
    yields the unique transform with ones on the permuted diagonal and
    reduced residues below; for a chain of the shape diag(1, ..., 1,
    phi) any remaining orbit gets the antidiagonal normal form built
    from its last-row residue data; everything else is reported
    non-standard.  Matrices are right associates exactly when they share
    kind and representative.
    """
    ring = b.ring
    if not b.is_square():
        raise MatrixError("skeleton classification needs a square matrix")
    dec = smith(b)
    if dec.phi.rank != b.nrows:
        raise MatrixError("skeleton classification needs a nonsingular matrix")
    chain = list(dec.phi.diag)
    p = dec.p
    skel = phi_skeleton(p, dec.phi)
    base = unitriangular_skeleton(dec.phi)
    tau = _standard_tau(base, skel.entries)
    if tau is not None:
        t, h = _standard_normal_form(ring, chain, p, tau)
        rep = inverse_unimodular(t) * dec.phi.matrix
        return SkeletonClassification("standard", skel, dec.phi, p, tau, t, h, rep)
    if _is_disappear_chain(ring, chain):
        t, h = _disappear_normal_form(ring, chain, p)
        rep = inverse_unimodular(t) * dec.phi.matrix
        return SkeletonClassification("disappear", skel, dec.phi, p, None, t, h, rep)
    return SkeletonClassification("non-standard", skel, dec.phi, p, None, None, None, None)


def divisors_up_to_assoc(ring: Ring, a) -> List:
    """Canonical divisors of a nonzero element, one per associate class.

    Sorted ascending over Z and by degree then text over the
    polynomials; 1 and the canonical form of the element both appear.
    """
    a = ring.coerce(a)
    if ring.is_zero(a):
        raise MatrixError("divisor enumeration needs a nonzero element")
    divs = [ring.one]
    for prime, exp in factor_element(ring, a):
        grown = []
        for d in divs:
            cur = d
            grown.append(cur)
            for _ in range(exp):
                cur = cur * prime
                grown.append(cur)
        divs = grown
    if ring.name == "Z":
        divs.sort()
    else:
        divs.sort(key=lambda d: (d.degree, ring.to_text(d)))
    return divs


@dataclass(frozen=True)
class ResidueSets:
    """Residue strata of K(phi) relative to a fixed divisor gamma.

    divisors: canonical divisors of phi except phi itself.
    stratum[mu]: residues a in K(phi) with (a, phi) = mu.
    stratum_reduced[mu]: the same divided through by mu.
    class_reps[mu]: least members of stratum_reduced[mu], one per class
        modulo phi/lcm(mu, gamma), each coprime to phi/mu.
    pool: 0 together with mu * class_reps[mu] over all mu.
    pool_coprime: members of pool coprime to gamma.
    """

    ring: Ring
    phi: object
    gamma: object
    divisors: Tuple
    stratum: Dict
    stratum_reduced: Dict
    class_reps: Dict
    pool: Tuple
    pool_coprime: Tuple


def residue_sets(ring: Ring, phi, gamma) -> ResidueSets:
    """Enumerate the residue strata of phi relative to gamma over Z."""
    phi = ring.canonical(ring.coerce(phi))
    gamma = ring.canonical(ring.coerce(gamma))
    if ring.is_zero(phi) or ring.is_unit(phi):
        raise MatrixError("residue strata need a nonzero nonunit element")
    if not ring.divides(gamma, phi) or ring.is_assoc(gamma, phi):
        raise MatrixError("gamma must be a proper divisor of phi")
    if ring.name != "Z":
        raise MatrixError(
            "residue strata are finite only over Z; polynomial classes "
            "have infinitely many representatives"
        )
    divisors = tuple(d for d in divisors_up_to_assoc(ring, phi) if d != phi)
    stratum: Dict = {}
    stratum_reduced: Dict = {}
    class_reps: Dict = {}
    for mu in divisors:
        members = tuple(a for a in range(phi) if ring.gcd(a, phi) == mu)
        reduced = tuple(ring.exact_div(a, mu) for a in members)
        stratum[mu] = members
        stratum_reduced[mu] = reduced
        modulus = ring.exact_div(phi, ring.lcm(mu, gamma))
        reps = {}
        for v in reduced:
            key = ring.residue_rep(v, modulus)
            if key not in reps:
                reps[key] = coprime_class_rep(ring, v, modulus, ring.exact_div(phi, mu))
        class_reps[mu] = tuple(sorted(reps.values()))
    pool = {ring.zero}
    for mu in divisors:
        pool.update(mu * s for s in class_reps[mu])
    pool = tuple(sorted(pool))
    pool_coprime = tuple(a for a in pool if ring.coprime(a, gamma))
    return ResidueSets(
        ring=ring,
        phi=phi,
        gamma=gamma,
        divisors=divisors,
        stratum=stratum,
        stratum_reduced=stratum_reduced,
        class_reps=class_reps,
        pool=pool,
        pool_coprime=pool_coprime,
    )
