"""Membership, reduction and factorization for the groups attached to a
divisibility chain, and the divisor machinery built on them."""

import itertools
from fractions import Fraction

import pytest
import sympy

from bezmat.divisibility import (
    ReductionObstruction,
    classify_gen_set,
    divides_left,
    enumerate_divisors,
    factor_gl,
    gen_set_member,
    gen_set_pattern,
    kazimirskii_moduli,
    kazimirskii_set,
    reduce_lower_unitriangular,
    zelisko_member,
)
from bezmat.matrix import (
    ExactMatrix,
    MatrixError,
    det_exact,
    inverse_unimodular,
    is_unimodular,
)
from bezmat.matrix_arith import Unsolvable, is_right_associate, left_gcd, solve_linear
from bezmat.normal_forms import DMatrix, smith
from bezmat.ring import PolyQ, QX, ZZ
from conftest import random_elem, random_matrix, random_unimodular


def _random_chain(ring, rng, n):
    """Nonsingular canonical divisibility chain of length n."""
    while True:
        head = ring.canonical(random_elem(ring, rng, small=True))
        if not ring.is_zero(head):
            break
    chain = [head]
    for _ in range(n - 1):
        while True:
            f = ring.canonical(random_elem(ring, rng, small=True))
            if not ring.is_zero(f):
                break
        chain.append(ring.canonical(chain[-1] * f))
    return DMatrix(ring, chain, n, n)


def _random_member(ring, rng, phi):
    """Product of elementary matrices that stay inside the group."""
    chain = list(phi.diag)
    n = len(chain)
    m = ExactMatrix.identity(ring, n)
    for _ in range(2 * n + 2):
        kind = rng.randint(0, 2)
        i = rng.randint(0, n - 1)
        j = rng.randint(0, n - 1)
        if kind == 0 and i != j:
            lo, hi = min(i, j), max(i, j)
            c = random_elem(ring, rng, small=True)
            step = ExactMatrix.identity(ring, n).add_multiple_of_col(hi, lo, c)
        elif kind == 1 and i != j:
            lo, hi = min(i, j), max(i, j)
            ratio = ring.exact_div(chain[hi], chain[lo])
            c = random_elem(ring, rng, small=True)
            step = ExactMatrix.identity(ring, n).add_multiple_of_col(lo, hi, c * ratio)
        else:
            u = ring.one if ring is ZZ else ring.coerce(rng.randint(1, 3))
            if ring is ZZ and rng.random() < 0.5:
                u = -u
            step = ExactMatrix.identity(ring, n).scale_row(i, u)
        m = m * step
    ok, _ = zelisko_member(m, phi)
    assert ok, "elementary generators left the group"
    return m


def _strict_upper(ring, rng, n):
    rows = [
        [
            ring.one
            if i == j
            else (random_elem(ring, rng, small=True) if j > i else ring.zero)
            for j in range(n)
        ]
        for i in range(n)
    ]
    return ExactMatrix(ring, rows)


def _is_lower_unitriangular(m):
    ring = m.ring
    for i in range(m.nrows):
        if m[i, i] != ring.one:
            return False
        for j in range(i + 1, m.ncols):
            if not ring.is_zero(m[i, j]):
                return False
    return True


class TestMembership:
    def test_identity_has_identity_witness(self, ring, rng):
        phi = _random_chain(ring, rng, 3)
        ok, k = zelisko_member(ExactMatrix.identity(ring, 3), phi)
        assert ok
        assert k == ExactMatrix.identity(ring, 3)

    def test_upper_unitriangular_always_member(self, ring, rng):
        for _ in range(8):
            n = rng.randint(2, 4)
            phi = _random_chain(ring, rng, n)
            ok, k = zelisko_member(_strict_upper(ring, rng, n), phi)
            assert ok
            assert is_unimodular(k)

    def test_swap_rejected_by_strict_chain(self, ring):
        if ring is ZZ:
            phi = DMatrix(ZZ, [1, 6], 2, 2)
        else:
            phi = DMatrix(QX, [PolyQ([1]), PolyQ([0, 1])], 2, 2)
        swap = ExactMatrix(ring, [[ring.zero, ring.one], [ring.one, ring.zero]])
        ok, k = zelisko_member(swap, phi)
        assert not ok
        assert k is None

    def test_witness_conjugates_the_chain(self, ring, rng):
        for _ in range(8):
            n = rng.randint(2, 4)
            phi = _random_chain(ring, rng, n)
            m = _random_member(ring, rng, phi)
            ok, k = zelisko_member(m, phi)
            assert ok
            assert m * phi.matrix == phi.matrix * k
            assert is_unimodular(k)

    def test_group_closure(self, ring, rng):
        phi = _random_chain(ring, rng, 3)
        m1 = _random_member(ring, rng, phi)
        m2 = _random_member(ring, rng, phi)
        assert zelisko_member(m1 * m2, phi)[0]
        assert zelisko_member(inverse_unimodular(m1), phi)[0]

    def test_singular_chain_blocks(self, ring):
        two = ZZ.coerce(2) if ring is ZZ else PolyQ([0, 1])
        phi = DMatrix(ring, [ring.one, two, ring.zero], 3, 3)
        eye = ExactMatrix.identity(ring, 3)
        below = eye.add_multiple_of_col(0, 2, ring.one)  # entry at (2, 0)
        ok, _ = zelisko_member(below, phi)
        assert not ok
        above = eye.add_multiple_of_col(2, 0, ring.one)  # entry at (0, 2)
        ok, k = zelisko_member(above, phi)
        assert ok
        assert above * phi.matrix == phi.matrix * k

    def test_non_invertible_rejected(self, ring):
        two = ZZ.coerce(2) if ring is ZZ else PolyQ([0, 1])
        phi = DMatrix(ring, [ring.one, ring.one], 2, 2)
        ok, k = zelisko_member(ExactMatrix.from_diagonal(ring, [two, two]), phi)
        assert not ok
        assert k is None


class TestReduction:
    def test_lower_unitriangular_needs_nothing(self, ring, rng):
        phi = _random_chain(ring, rng, 3)
        s = ExactMatrix.identity(ring, 3).add_multiple_of_col(0, 2, ring.one)
        h = reduce_lower_unitriangular(s, phi)
        assert h == ExactMatrix.identity(ring, 3)

    def test_two_by_two_obstruction(self, ring):
        if ring is ZZ:
            phi = DMatrix(ZZ, [1, 2], 2, 2)
            s = ExactMatrix(ZZ, [[1, 1], [1, 2]])
        else:
            x = PolyQ([0, 1])
            phi = DMatrix(QX, [PolyQ([1]), x], 2, 2)
            s = ExactMatrix(QX, [[PolyQ([1]), PolyQ([1])], [x - PolyQ([1]), x]])
        res = reduce_lower_unitriangular(s, phi)
        assert isinstance(res, ReductionObstruction)
        assert res.index == 1

    def test_constructed_reducible_instances(self, ring, rng):
        for _ in range(8):
            n = rng.randint(2, 4)
            phi = _random_chain(ring, rng, n)
            h0 = _random_member(ring, rng, phi)
            lower = _strict_upper(ring, rng, n).transpose()
            s = inverse_unimodular(h0) * lower
            h = reduce_lower_unitriangular(s, phi)
            assert not isinstance(h, ReductionObstruction)
            assert _is_lower_unitriangular(h * s)
            assert zelisko_member(h, phi)[0]

    def test_result_matches_criterion_oracle(self, ring, rng):
        for _ in range(10):
            n = rng.randint(2, 3)
            phi = _random_chain(ring, rng, n)
            s = random_unimodular(ring, rng, n)
            res = reduce_lower_unitriangular(s, phi)
            chain = list(phi.diag)
            bad = None
            for i in range(1, n):
                ratio = ring.exact_div(chain[i], chain[i - 1])
                corner = s.submatrix(range(i, n), range(i, n))
                if not ring.is_unit(ring.gcd(ratio, det_exact(corner))):
                    bad = i
                    break
            if bad is None:
                assert not isinstance(res, ReductionObstruction)
                assert _is_lower_unitriangular(res * s)
            else:
                assert isinstance(res, ReductionObstruction)
                assert res.index == bad

    def test_rejects_singular_chain(self, ring):
        phi = DMatrix(ring, [ring.one, ring.zero], 2, 2)
        with pytest.raises(MatrixError):
            reduce_lower_unitriangular(ExactMatrix.identity(ring, 2), phi)


class TestFactorization:
    def test_member_factors_trivially(self, ring, rng):
        phi = _random_chain(ring, rng, 3)
        m = _random_member(ring, rng, phi)
        if _is_lower_unitriangular(m) or _is_lower_unitriangular(m.transpose()):
            return
        h, v, u = factor_gl(m, phi)
        eye = ExactMatrix.identity(ring, 3)
        assert (h, v, u) == (m, eye, eye)

    def test_triangular_factors_trivially(self, ring, rng):
        phi = _random_chain(ring, rng, 3)
        upper = _strict_upper(ring, rng, 3)
        lower = upper.transpose()
        eye = ExactMatrix.identity(ring, 3)
        if lower != eye:
            assert factor_gl(lower, phi) == (eye, lower, eye)
        if upper != eye and not zelisko_member(upper, phi)[0]:
            pytest.fail("upper unitriangular matrices always belong")
        assert factor_gl(upper, phi)[2] in (upper, eye)

    def test_random_reassembly(self, ring, rng):
        for _ in range(10):
            n = rng.randint(1, 4)
            phi = _random_chain(ring, rng, n)
            a = random_unimodular(ring, rng, n)
            h, v, u = factor_gl(a, phi)
            assert h * v * u == a
            assert zelisko_member(h, phi)[0]
            assert _is_lower_unitriangular(v)
            assert _is_lower_unitriangular(u.transpose())

    def test_rejects_singular_chain(self, ring):
        phi = DMatrix(ring, [ring.one, ring.zero], 2, 2)
        with pytest.raises(MatrixError):
            factor_gl(ExactMatrix.identity(ring, 2), phi)

    def test_rejects_non_invertible(self, ring):
        two = ZZ.coerce(2) if ring is ZZ else PolyQ([0, 1])
        phi = DMatrix(ring, [ring.one, ring.one], 2, 2)
        with pytest.raises(MatrixError):
            factor_gl(ExactMatrix.from_diagonal(ring, [two, two]), phi)


# ---------------------------------------------------------------------------
# transforms between two chains

def _chain_values(ring, rng, n, zero_tail):
    vals, running = [], ring.one
    for i in range(n):
        if i >= n - zero_tail:
            vals.append(ring.zero)
            continue
        while True:
            f = ring.canonical(random_elem(ring, rng, small=True))
            if not ring.is_zero(f):
                break
        running = ring.canonical(running * f)
        vals.append(running)
    return vals


def _chain_pair(ring, rng, n, phi_zeros=0, extra_zeros=0):
    """Chains (e, phi) with phi dividing e entrywise, zero tails as asked."""
    phi = _chain_values(ring, rng, n, phi_zeros)
    d = _chain_values(ring, rng, n, phi_zeros + extra_zeros)
    e = [ring.canonical(p * q) for p, q in zip(phi, d)]
    return DMatrix(ring, e, n, n), DMatrix(ring, phi, n, n)


def _random_gen_member(ring, rng, e, phi):
    """Member built straight from the entry pattern, then blurred on the right."""
    n = e.nrows
    k, t = e.rank, phi.rank
    pat = gen_set_pattern(e, phi)
    rows = [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]
    for i in range(1, n):
        for j in range(i):
            if j < k and i >= t:
                continue
            c = random_elem(ring, rng, small=True)
            f = pat.factors.get((i, j), ring.one)
            rows[i][j] = f * c
    return ExactMatrix(ring, rows) * _strict_upper(ring, rng, n)


def _zelisko_subset_oracle(ring, e_dm, phi_dm):
    """Slot-by-slot test that every admissible transform lies in the group of phi.

    The containment the other way round always holds, so this decides
    equality.  Per lower slot the transform set is either forced zero,
    all multiples of the least factor, or everything; the group of phi
    likewise.  Equality fails exactly when some slot's least admissible
    value escapes the group constraint.
    """
    n = phi_dm.nrows
    k, t = e_dm.rank, phi_dm.rank
    eps, chain = e_dm.diag, phi_dm.diag
    for i in range(1, n):
        for j in range(i):
            if i >= t and j < k:
                continue
            if i < t and j < k:
                least = ring.exact_div(chain[i], ring.gcd(chain[i], eps[j]))
            else:
                least = ring.one
            if i >= t:
                allowed = None if j < t else ring.one
            else:
                allowed = ring.exact_div(chain[i], ring.gcd(chain[i], chain[j]))
            if allowed is None or not ring.divides(allowed, least):
                return False
    return True


SEVEN_E = [1, 2, 6, 0, 0, 0, 0]
SEVEN_PHI = [1, 1, 2, 4, 12, 0, 0]
SEVEN_L = [
    [0, 0, 1, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 0],
    [2, 1, 0, 0, 0, 0, 0],
    [4, 2, 2, 0, 0, 0, 1],
    [12, 6, 2, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 1, 0, 0, 0],
]


class TestGenSetPattern:
    def test_seven_chain_factors(self):
        pat = gen_set_pattern(SEVEN_E, SEVEN_PHI, ring=ZZ)
        assert pat.zero_block == (2, 3)
        assert pat.factors == {
            (1, 0): 1,
            (2, 0): 2,
            (2, 1): 1,
            (3, 0): 4,
            (3, 1): 2,
            (3, 2): 2,
            (4, 0): 12,
            (4, 1): 6,
            (4, 2): 2,
        }

    def test_factors_grow_down_and_left(self, ring, rng):
        for _ in range(12):
            n = rng.randint(2, 4)
            e, phi = _chain_pair(ring, rng, n)
            pat = gen_set_pattern(e, phi)
            for (i, j), f in pat.factors.items():
                for (p, q), g in pat.factors.items():
                    if p >= i and q <= j:
                        assert ring.divides(f, g)

    def test_incompatible_chains_raise(self, ring):
        two = 2 if ring is ZZ else PolyQ([0, 1])
        three = 3 if ring is ZZ else PolyQ([1, 1])
        with pytest.raises(MatrixError):
            gen_set_pattern([two], [three], ring=ring)


class TestGenSetMembership:
    def test_seven_chain_witness(self):
        l = ExactMatrix(ZZ, SEVEN_L)
        ok, s = gen_set_member(l, SEVEN_E, SEVEN_PHI)
        assert ok
        assert [[s[i, j] for j in range(3)] for i in range(5)] == [
            [0, 0, 6],
            [1, 0, 0],
            [1, 1, 0],
            [1, 1, 3],
            [1, 1, 1],
        ]
        assert all(s[i, j] == 0 for i in range(5, 7) for j in range(7))
        e = ExactMatrix.from_diagonal(ZZ, SEVEN_E)
        phi = ExactMatrix.from_diagonal(ZZ, SEVEN_PHI)
        assert l * e == phi * s

    def test_product_can_escape(self):
        l = ExactMatrix(ZZ, [[1, 0, 0], [1, 1, 0], [3, 1, 1]])
        e, phi = [2, 6, 12], [1, 2, 6]
        assert gen_set_member(l, e, phi)[0]
        ok, s = gen_set_member(l * l, e, phi)
        assert not ok and s is None

    def test_constructed_members_accepted(self, ring, rng):
        for _ in range(12):
            n = rng.randint(1, 4)
            pz = rng.randint(0, n) if rng.random() < 0.5 else 0
            ez = rng.randint(0, n - pz) if rng.random() < 0.5 else 0
            e, phi = _chain_pair(ring, rng, n, pz, ez)
            m = _random_gen_member(ring, rng, e, phi)
            ok, s = gen_set_member(m, e, phi)
            assert ok
            assert m * e.matrix == phi.matrix * s

    def test_group_of_phi_always_contained(self, ring, rng):
        for _ in range(8):
            n = rng.randint(2, 4)
            e, phi = _chain_pair(ring, rng, n)
            h = _random_member(ring, rng, phi)
            assert gen_set_member(h, e, phi)[0]

    def test_non_invertible_rejected(self, ring):
        two = ZZ.coerce(2) if ring is ZZ else PolyQ([0, 1])
        m = ExactMatrix.from_diagonal(ring, [two, two])
        ok, s = gen_set_member(m, [ring.one, ring.one], [ring.one, ring.one])
        assert not ok and s is None

    def test_incompatible_chains_refused(self, ring):
        two = ZZ.coerce(2) if ring is ZZ else PolyQ([0, 1])
        eye = ExactMatrix.identity(ring, 2)
        ok, s = gen_set_member(eye, [ring.one, ring.one], [ring.one, two])
        assert not ok and s is None


class TestDividesLeft:
    def test_constructed_products(self, ring, rng):
        for _ in range(15):
            n = rng.randint(1, 3)
            b = random_matrix(ring, rng, n, n)
            c = random_matrix(ring, rng, n, n)
            a = b * c
            ok, q = divides_left(b, a)
            assert ok
            assert b * q == a

    def test_gcd_divides_both(self):
        a = ExactMatrix(ZZ, [[1, 0], [0, 6]])
        b = ExactMatrix(ZZ, [[1, 0], [1, 8]])
        g = left_gcd(a, b).d
        for m in (a, b):
            ok, q = divides_left(g, m)
            assert ok
            assert g * q == m

    def test_determinant_obstruction(self):
        b = ExactMatrix.from_diagonal(ZZ, [2, 8])
        a = ExactMatrix.from_diagonal(ZZ, [2, 4])
        assert divides_left(b, a) == (False, None)

    def test_agrees_with_solver(self, ring, rng):
        for _ in range(15):
            n = rng.randint(1, 3)
            b = random_matrix(ring, rng, n, n)
            a = random_matrix(ring, rng, n, n)
            ok, q = divides_left(b, a)
            assert ok == (not isinstance(solve_linear(b, a), Unsolvable))
            if ok:
                assert b * q == a

    def test_shape_mismatch(self, ring):
        with pytest.raises(MatrixError):
            divides_left(
                ExactMatrix.identity(ring, 2), ExactMatrix.identity(ring, 3)
            )
        with pytest.raises(MatrixError):
            divides_left(
                ExactMatrix.zero(ring, 2, 3), ExactMatrix.zero(ring, 2, 3)
            )


class TestClassifyGenSet:
    def test_strictly_growing_chains_never_group(self):
        cls = classify_gen_set([2, 6, 12], [1, 2, 6], ring=ZZ)
        assert not cls.is_group
        assert cls.delta is None
        assert not cls.equals_zelisko
        assert not cls.equals_full_gl

    def test_full_group_without_zelisko(self, ring):
        a = 2 if ring is ZZ else PolyQ([0, 1])
        cls = classify_gen_set([a, a * a * a], [ring.one, a], ring=ring)
        assert cls.equals_full_gl
        assert not cls.equals_zelisko
        assert cls.is_group
        assert cls.delta.diag == (ring.one, ring.one)

    def test_equal_chains_recover_the_group(self, ring, rng):
        for _ in range(8):
            n = rng.randint(1, 4)
            phi = _chain_pair(ring, rng, n)[1]
            cls = classify_gen_set(phi, phi)
            assert cls.equals_zelisko
            assert cls.is_group

    def test_zelisko_flag_matches_slot_oracle(self, ring, rng):
        for _ in range(25):
            n = rng.randint(1, 4)
            pz = rng.randint(0, n) if rng.random() < 0.5 else 0
            ez = rng.randint(0, n - pz) if rng.random() < 0.5 else 0
            e, phi = _chain_pair(ring, rng, n, pz, ez)
            cls = classify_gen_set(e, phi)
            assert cls.equals_zelisko == _zelisko_subset_oracle(ring, e, phi)

    def test_full_gl_flag_matches_swap_membership(self, ring, rng):
        for _ in range(25):
            n = rng.randint(1, 4)
            pz = rng.randint(0, n) if rng.random() < 0.5 else 0
            ez = rng.randint(0, n - pz) if rng.random() < 0.5 else 0
            e, phi = _chain_pair(ring, rng, n, pz, ez)
            cls = classify_gen_set(e, phi)
            w = ExactMatrix.identity(ring, n).swap_rows(0, n - 1)
            assert cls.equals_full_gl == gen_set_member(w, e, phi)[0]

    def test_group_verdict_backed_by_delta(self, ring, rng):
        seen = 0
        for _ in range(25):
            n = rng.randint(2, 4)
            pz = rng.randint(0, n) if rng.random() < 0.5 else 0
            ez = rng.randint(0, n - pz) if rng.random() < 0.5 else 0
            e, phi = _chain_pair(ring, rng, n, pz, ez)
            cls = classify_gen_set(e, phi)
            if not cls.is_group:
                assert cls.delta is None
                continue
            seen += 1
            m1 = _random_gen_member(ring, rng, e, phi)
            m2 = _random_gen_member(ring, rng, e, phi)
            # closed under product and inverse, and inside the delta group
            assert gen_set_member(m1 * m2, e, phi)[0]
            assert gen_set_member(inverse_unimodular(m1), e, phi)[0]
            assert zelisko_member(m1, cls.delta)[0]
            assert zelisko_member(m1 * m2, cls.delta)[0]
        assert seen > 0

    def test_delta_generators_belong(self, ring, rng):
        for _ in range(15):
            n = rng.randint(2, 4)
            pz = rng.randint(0, n) if rng.random() < 0.5 else 0
            ez = rng.randint(0, n - pz) if rng.random() < 0.5 else 0
            e, phi = _chain_pair(ring, rng, n, pz, ez)
            cls = classify_gen_set(e, phi)
            if not cls.is_group:
                continue
            d = cls.delta
            r_d = d.rank
            for i in range(n):
                for j in range(n):
                    if i == j or (i > j and i >= r_d and j < r_d):
                        continue
                    if i > j and i < r_d:
                        val = ring.exact_div(d.diag[i], ring.gcd(d.diag[i], d.diag[j]))
                    else:
                        val = ring.one
                    gen = ExactMatrix.identity(ring, n).add_multiple_of_col(j, i, val)
                    assert gen_set_member(gen, e, phi)[0]

    def test_zero_base_chain_gives_full_group(self, ring, rng):
        e = DMatrix(ring, [ring.zero] * 3, 3, 3)
        phi = _chain_pair(ring, rng, 3)[1]
        cls = classify_gen_set(e, phi)
        assert cls.is_group
        assert cls.delta.diag == (ring.one,) * 3
        u = random_unimodular(ring, rng, 3)
        assert gen_set_member(u, e, phi)[0]

    def test_single_slot(self, ring):
        two = 2 if ring is ZZ else PolyQ([0, 1])
        cls = classify_gen_set([two], [ring.one], ring=ring)
        assert cls.is_group and cls.equals_zelisko and cls.equals_full_gl
        assert cls.delta.diag == (ring.one,)


class TestKazimirskiiSet:
    E4 = [1, 2, 120, 7200]
    PHI4 = [1, 1, 8, 144]

    def test_worked_moduli(self):
        assert kazimirskii_moduli(self.E4, self.PHI4, ring=ZZ) == {
            (1, 0): 1,
            (2, 0): 1,
            (2, 1): 2,
            (3, 0): 1,
            (3, 1): 2,
            (3, 2): 3,
        }

    def test_worked_enumeration(self):
        els = list(kazimirskii_set(self.E4, self.PHI4, ring=ZZ))
        assert len(els) == 12
        mats = [v.matrix for v in els]
        assert len({tuple(tuple(r) for r in m.rows) for m in mats}) == 12
        for v in els:
            assert _is_lower_unitriangular(v.matrix)
            assert gen_set_member(v.matrix, self.E4, self.PHI4)[0]
            assert set(v.residues) == {(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)}

    def test_pairwise_left_inequivalent(self):
        phi = DMatrix(ZZ, self.PHI4, 4, 4)
        mats = [v.matrix for v in kazimirskii_set(self.E4, self.PHI4, ring=ZZ)]
        for a, b in itertools.combinations(mats, 2):
            assert not zelisko_member(b * inverse_unimodular(a), phi)[0]

    def test_equal_chains_collapse_to_identity(self, ring, rng):
        for _ in range(6):
            n = rng.randint(1, 3)
            phi = _chain_pair(ring, rng, n)[1]
            els = list(kazimirskii_set(phi, phi))
            assert len(els) == 1
            assert els[0].matrix == ExactMatrix.identity(ring, n)

    def test_cardinality_is_moduli_product(self, rng):
        for _ in range(10):
            n = rng.randint(2, 3)
            e, phi = _chain_pair(ZZ, rng, n)
            moduli = kazimirskii_moduli(e, phi)
            expect = 1
            for m in moduli.values():
                expect *= m
            if expect > 64:
                continue
            els = list(kazimirskii_set(e, phi))
            assert len(els) == expect

    def test_polynomial_needs_grid(self):
        x = PolyQ([0, 1])
        with pytest.raises(MatrixError):
            kazimirskii_set([x, x ** 3], [QX.one, x * x], ring=QX)

    def test_polynomial_grid_enumeration(self):
        x = PolyQ([0, 1])
        els = list(
            kazimirskii_set([x, x ** 3], [QX.one, x * x], grid=[0, 1], ring=QX)
        )
        assert {v.matrix[1, 0] for v in els} == {QX.zero, x}

    def test_rejects_singular(self, ring):
        with pytest.raises(MatrixError):
            kazimirskii_moduli([ring.one, ring.zero], [ring.one, ring.zero], ring=ring)


class TestEnumerateDivisors:
    A4 = ExactMatrix.from_diagonal(ZZ, [1, 2, 120, 7200])

    def test_worked_example_is_complete(self):
        enum = enumerate_divisors(self.A4, [1, 1, 8, 144])
        assert enum.complete
        assert enum.failures == ()
        divs = list(enum)
        assert len(divs) == 12
        for d in divs:
            ok, q = divides_left(d, self.A4)
            assert ok and d * q == self.A4
            assert list(smith(d).phi.diag) == [1, 1, 8, 144]
        for a, b in itertools.combinations(divs, 2):
            assert not is_right_associate(a, b)

    def test_worked_example_incomplete_pair(self):
        enum = enumerate_divisors(self.A4, [1, 1, 8, 48])
        assert not enum.complete
        assert enum.failures == ((4, 2),)
        # the stream stays sound even though some classes are missing
        for d in itertools.islice(enum, 6):
            assert divides_left(d, self.A4)[0]
            assert list(smith(d).phi.diag) == [1, 1, 8, 48]

    def test_own_chain_recovers_the_matrix(self, ring, rng):
        for _ in range(6):
            n = rng.randint(1, 3)
            e = _chain_pair(ring, rng, n)[0]
            u = random_unimodular(ring, rng, n)
            v = random_unimodular(ring, rng, n)
            a = u * e.matrix * v
            enum = enumerate_divisors(a, e.diag)
            divs = list(enum)
            assert enum.complete
            assert len(divs) == 1
            assert is_right_associate(divs[0], a)

    def test_unit_chain_yields_unimodular_divisor(self):
        enum = enumerate_divisors(self.A4, [1, 1, 1, 1])
        divs = list(enum)
        assert len(divs) == 1
        assert is_unimodular(divs[0])

    def test_random_integer_streams(self, rng):
        for _ in range(8):
            n = rng.randint(2, 3)
            core = _chain_pair(ZZ, rng, n)[0]
            a = random_unimodular(ZZ, rng, n) * core.matrix * random_unimodular(ZZ, rng, n)
            eps = list(smith(a).phi.diag)
            prev, chain = 1, []
            for v in eps:
                choices = [d for d in sympy.divisors(int(v)) if d % prev == 0]
                prev = int(rng.choice(choices))
                chain.append(prev)
            divs = list(itertools.islice(enumerate_divisors(a, chain), 10))
            assert divs
            for d in divs:
                ok, q = divides_left(d, a)
                assert ok and d * q == a
                assert list(smith(d).phi.diag) == chain
            for u, w in itertools.combinations(divs, 2):
                assert not is_right_associate(u, w)

    def test_polynomial_grid_stream(self):
        x = PolyQ([0, 1])
        a = ExactMatrix.from_diagonal(QX, [x, x ** 3])
        enum = enumerate_divisors(a, [QX.one, x * x], grid=[0, 1, Fraction(1, 2)])
        divs = list(enum)
        assert enum.complete
        assert len(divs) == 3
        for d in divs:
            assert divides_left(d, a)[0]
            assert list(smith(d).phi.diag) == [QX.one, x * x]
        for u, w in itertools.combinations(divs, 2):
            assert not is_right_associate(u, w)

    def test_streams_lazily_over_huge_pools(self):
        a = ExactMatrix.from_diagonal(ZZ, [2 ** 30, 2 ** 30])
        enum = enumerate_divisors(a, [1, 2 ** 30])
        first = list(itertools.islice(enum, 3))
        assert len(first) == 3
        for d in first:
            assert divides_left(d, a)[0]

    def test_rejects_singular(self):
        with pytest.raises(MatrixError):
            enumerate_divisors(ExactMatrix.from_diagonal(ZZ, [1, 0]), [1, 1])

    def test_rejects_non_dividing_chain(self):
        with pytest.raises(MatrixError):
            enumerate_divisors(ExactMatrix.from_diagonal(ZZ, [2, 4]), [1, 3])
