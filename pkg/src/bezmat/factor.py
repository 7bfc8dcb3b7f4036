"""Irreducible factorizations for the supported coefficient domains.

sympy does the heavy lifting: ``factorint`` for integers, ``factor_list``
over QQ for polynomials.  Inputs are canonicalized first, so the unit part
never shows up; factor lists come back deterministically ordered with the
smallest prime / lowest-degree factor first.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

import sympy

from .ring import PolyQ, Ring, RingError

_X = sympy.Symbol("x")


def _poly_to_sympy(p: PolyQ) -> sympy.Poly:
    coeffs = [sympy.Rational(c.numerator, c.denominator) for c in reversed(p.coeffs)]
    return sympy.Poly(coeffs, _X, domain="QQ")


def _poly_from_sympy(p: sympy.Poly) -> PolyQ:
    return PolyQ([Fraction(int(c.p), int(c.q)) for c in reversed(p.all_coeffs())])


def factor_element(ring: Ring, a) -> List[Tuple[object, int]]:
    """(irreducible, exponent) pairs for the canonical associate of a.

    Units factor into the empty list; zero is rejected.  Factors are
    canonical (positive primes, monic polynomials) and the product of the
    powers reproduces the canonical input exactly.
    """
    a = ring.coerce(a)
    if ring.is_zero(a):
        raise RingError("zero has no irreducible factorization")
    a = ring.canonical(a)
    if ring.is_unit(a):
        return []
    if ring.name == "Z":
        pairs: List[Tuple[object, int]] = [
            (int(p), int(e)) for p, e in sorted(sympy.factorint(a).items())
        ]
    elif ring.name == "Qx":
        _, raw = _poly_to_sympy(a).factor_list()
        # sympy hands back primitive factors; rescale each to monic
        pairs = [(ring.canonical(_poly_from_sympy(f)), int(e)) for f, e in raw]
        pairs.sort(key=lambda fe: (fe[0].degree, fe[0].coeffs))
    else:
        raise RingError(f"no factorization routine for ring {ring.name!r}")
    check = ring.one
    for g, e in pairs:
        if ring.canonical(g) != g:
            raise RingError("factor came back non-canonical; bug")
        check = check * g ** e
    if check != a:
        raise RingError("factorization failed to reproduce the input; bug")
    return pairs


def multiplicities(ring: Ring, a) -> Dict:
    """Factorization of a as an {irreducible: exponent} mapping."""
    return dict(factor_element(ring, a))


def is_irreducible(ring: Ring, a) -> bool:
    a = ring.coerce(a)
    if ring.is_zero(a) or ring.is_unit(a):
        return False
    pairs = factor_element(ring, a)
    return len(pairs) == 1 and pairs[0][1] == 1
