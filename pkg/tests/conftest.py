import random
from fractions import Fraction

import pytest

from bezmat.matrix import ExactMatrix, det_exact, inverse_unimodular
from bezmat.ring import PolyQ, QX, ZZ


@pytest.fixture
def rng():
    return random.Random(20240817)


def random_int(rng, bound=30):
    return rng.randint(-bound, bound)


def random_poly(rng, max_deg=3, bound=4):
    deg = rng.randint(0, max_deg)
    coeffs = [Fraction(rng.randint(-bound, bound)) for _ in range(deg + 1)]
    if all(c == 0 for c in coeffs):
        coeffs[-1] = Fraction(1)
    return PolyQ(coeffs)


def random_elem(ring, rng, small=False):
    if ring is ZZ:
        return random_int(rng, 12 if small else 30)
    return random_poly(rng, 2 if small else 3)


def random_nonzero(ring, rng, small=False):
    while True:
        v = random_elem(ring, rng, small)
        if not ring.is_zero(v):
            return v


def random_matrix(ring, rng, nrows, ncols, small=True):
    return ExactMatrix(
        ring,
        [[random_elem(ring, rng, small) for _ in range(ncols)] for _ in range(nrows)],
    )


def random_unimodular(ring, rng, n, steps=None):
    """Product of random elementary row operations applied to the identity."""
    m = ExactMatrix.identity(ring, n)
    if steps is None:
        steps = 2 * n + 2
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            continue
        c = random_elem(ring, rng, small=True)
        if rng.random() < 0.5:
            m = m.add_multiple_of_row(i, j, c)
        else:
            m = m.add_multiple_of_col(i, j, c)
        if rng.random() < 0.2:
            m = m.swap_rows(i, j)
    if ring is ZZ and rng.random() < 0.3:
        m = m.scale_row(rng.randrange(n), -1)
    assert ring.is_unit(det_exact(m))
    return m


BOTH_RINGS = [ZZ, QX]


@pytest.fixture(params=BOTH_RINGS, ids=lambda r: r.name)
def ring(request):
    return request.param


def unimodular_pair(ring, rng, n):
    u = random_unimodular(ring, rng, n)
    return u, inverse_unimodular(u)
