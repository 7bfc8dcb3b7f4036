"""Exact arithmetic in the two effective coefficient domains.

Two rings are supported: the rational integers and the univariate
polynomials over Q.  Both are Bezout domains in which gcd computations,
canonical associates and residue representatives are effective, and both
have the stable-range property that drives every matrix reduction in this
package: for (a, b, c) = 1 with c != 0 there is r with (a + b*r, c) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple


class RingError(ValueError):
    """Raised when an operation's arithmetic precondition fails."""


# ---------------------------------------------------------------------------
# univariate polynomials over Q


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot coerce {value!r} to a rational number")


class PolyQ:
    """Dense univariate polynomial over Q, coefficients stored ascending."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence = ()):  # trailing zeros stripped
        cs = [_as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: Tuple[Fraction, ...] = tuple(cs)

    # -- constructors -------------------------------------------------

    @classmethod
    def const(cls, c) -> "PolyQ":
        return cls([_as_fraction(c)])

    @classmethod
    def x_power(cls, k: int, c=1) -> "PolyQ":
        return cls([0] * k + [c])

    # -- structure ----------------------------------------------------

    @property
    def degree(self) -> int:
        # degree of the zero polynomial is -1 by convention here
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_const(self) -> bool:
        return len(self.coeffs) <= 1

    def leading(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def constant_value(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        if not self.is_const():
            raise RingError(f"{self} is not a constant")
        return self.coeffs[0]

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __hash__(self):
        return hash(self.coeffs)

    def __eq__(self, other) -> bool:
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    # -- arithmetic ---------------------------------------------------

    def __neg__(self) -> "PolyQ":
        return PolyQ([-c for c in self.coeffs])

    def __add__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return PolyQ(out)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return PolyQ()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return PolyQ(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "PolyQ":
        if k < 0:
            raise RingError("negative polynomial power")
        out = PolyQ([1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __divmod__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dn, dd = len(rem) - 1, other.degree
        lead = other.coeffs[-1]
        if dn < dd:
            return PolyQ(), PolyQ(rem)
        quot = [Fraction(0)] * (dn - dd + 1)
        for k in range(dn - dd, -1, -1):
            c = rem[k + dd] / lead
            quot[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return PolyQ(quot), PolyQ(rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    # -- calculus / evaluation -----------------------------------------

    def eval(self, point) -> Fraction:
        point = _as_fraction(point)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * point + c
        return acc

    def derivative(self) -> "PolyQ":
        return PolyQ([i * c for i, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "PolyQ":
        if self.is_zero():
            return self
        lead = self.coeffs[-1]
        return PolyQ([c / lead for c in self.coeffs])

    def shift(self, k: int) -> "PolyQ":
        """Multiply by x^k."""
        if self.is_zero():
            return self
        return PolyQ([Fraction(0)] * k + list(self.coeffs))

    # -- text ----------------------------------------------------------

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                term = str(c)
            else:
                xs = "x" if i == 1 else f"x^{i}"
                if c == 1:
                    term = xs
                elif c == -1:
                    term = f"-{xs}"
                else:
                    term = f"{c}*{xs}"
            parts.append(term)
        text = parts[0]
        for term in parts[1:]:
            text += f" - {term[1:]}" if term.startswith("-") else f" + {term}"
        return text


def _coerce_poly(value) -> Optional[PolyQ]:
    if isinstance(value, PolyQ):
        return value
    if isinstance(value, (int, Fraction)):
        return PolyQ([value])
    return None


X = PolyQ([0, 1])


# ---------------------------------------------------------------------------
# ring descriptors


@dataclass(frozen=True)
class BezoutWitness:
    """g = a*u + b*v with g the canonical-form gcd of a and b."""

    g: object
    u: object
    v: object


class Ring:
    """Operations shared by the supported Bezout domains.

    Elements are plain Python values (int for Z, PolyQ for Q[x]); the ring
    object carries the canonical-form and gcd conventions.
    """

    name: str = "?"

    # subclasses: zero/one, coerce, is_zero, is_unit, normalize_assoc,
    # divmod_elems, residue_rep, sample text conversions

    def coerce(self, value):
        raise NotImplementedError

    def is_zero(self, a) -> bool:
        raise NotImplementedError

    def is_unit(self, a) -> bool:
        raise NotImplementedError

    def normalize_assoc(self, a):
        """Return (canonical, unit) with canonical * unit == a."""
        raise NotImplementedError

    def canonical(self, a):
        return self.normalize_assoc(a)[0]

    def divmod_elems(self, a, b):
        raise NotImplementedError

    def residue_rep(self, a, m):
        """Canonical representative of a modulo m; a itself when m == 0."""
        if self.is_zero(m):
            return a
        return self.divmod_elems(a, m)[1]

    def exact_div(self, a, b):
        q, r = self.divmod_elems(a, b)
        if not self.is_zero(r):
            raise RingError(f"{b!r} does not divide {a!r} in {self.name}")
        return q

    def divides(self, a, b) -> bool:
        """True when a | b (everything divides zero, zero only zero)."""
        if self.is_zero(a):
            return self.is_zero(b)
        return self.is_zero(self.divmod_elems(b, a)[1])

    def is_assoc(self, a, b) -> bool:
        return self.canonical(a) == self.canonical(b)

    # -- gcd machinery --------------------------------------------------

    def gcd_ext(self, a, b) -> BezoutWitness:
        """Extended Euclid; the witness gcd is canonical and gcd(0,0) = 0."""
        a = self.coerce(a)
        b = self.coerce(b)
        r0, r1 = a, b
        u0, v0 = self.one, self.zero
        u1, v1 = self.zero, self.one
        while not self.is_zero(r1):
            q, r = self.divmod_elems(r0, r1)
            r0, r1 = r1, r
            u0, u1 = u1, u0 - q * u1
            v0, v1 = v1, v0 - q * v1
        if self.is_zero(r0):
            return BezoutWitness(self.zero, self.zero, self.zero)
        g, unit = self.normalize_assoc(r0)
        inv = self.unit_inverse(unit)
        return BezoutWitness(g, u0 * inv, v0 * inv)

    def unit_inverse(self, unit):
        raise NotImplementedError

    def gcd(self, a, b):
        return self.gcd_ext(a, b).g

    def gcd_list(self, items):
        g = self.zero
        for a in items:
            g = self.gcd(g, a)
            if self.is_unit(g):
                return self.one
        return g

    def lcm(self, a, b):
        if self.is_zero(a) or self.is_zero(b):
            return self.zero
        g = self.gcd(a, b)
        return self.canonical(self.exact_div(a * b, g))

    def lcm_list(self, items):
        out = self.one
        for a in items:
            out = self.lcm(out, a)
            if self.is_zero(out):
                return out
        return out

    def coprime(self, a, b) -> bool:
        return self.is_unit(self.gcd(a, b))

    # -- text encoding ---------------------------------------------------

    def to_text(self, a) -> str:
        raise NotImplementedError

    def from_text(self, text: str):
        raise NotImplementedError


class IntegerRing(Ring):
    name = "Z"
    zero = 0
    one = 1

    def coerce(self, value):
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"not an integer: {value!r}")
        return value

    def is_zero(self, a) -> bool:
        return a == 0

    def is_unit(self, a) -> bool:
        return a in (1, -1)

    def normalize_assoc(self, a):
        if a < 0:
            return -a, -1
        return a, 1

    def unit_inverse(self, unit):
        return unit  # 1 and -1 are self-inverse

    def divmod_elems(self, a, b):
        # least nonnegative remainder, matching the residue system
        q, r = divmod(a, b)
        if r < 0:  # only when b < 0 in Python semantics
            r -= b
            q += 1
        return q, r

    def to_text(self, a) -> str:
        return str(a)

    def from_text(self, text: str) -> int:
        text = text.strip()
        if "/" in text:
            raise RingError(f"not an integer literal: {text!r}")
        return int(text)


class RationalPolyRing(Ring):
    name = "Qx"
    zero = PolyQ()
    one = PolyQ([1])

    def coerce(self, value):
        p = _coerce_poly(value)
        if p is None:
            raise TypeError(f"not a Q[x] element: {value!r}")
        return p

    def is_zero(self, a) -> bool:
        return a.is_zero()

    def is_unit(self, a) -> bool:
        return a.is_const() and not a.is_zero()

    def normalize_assoc(self, a):
        if a.is_zero():
            return a, self.one
        lead = a.leading()
        return a.monic(), PolyQ([lead])

    def unit_inverse(self, unit):
        return PolyQ([1 / unit.constant_value()])

    def divmod_elems(self, a, b):
        return divmod(a, b)

    def to_text(self, a) -> str:
        import json

        return json.dumps([str(c) for c in a.coeffs])

    def from_text(self, text: str) -> PolyQ:
        import json

        data = json.loads(text)
        if not isinstance(data, list):
            raise RingError(f"polynomial literal must be a JSON array: {text!r}")
        return PolyQ([Fraction(str(c)) for c in data])


class RationalField(Ring):
    """Q itself; used for constant matrices (Jordan forms, root values)."""

    name = "Q"
    zero = Fraction(0)
    one = Fraction(1)

    def coerce(self, value):
        return _as_fraction(value)

    def is_zero(self, a) -> bool:
        return a == 0

    def is_unit(self, a) -> bool:
        return a != 0

    def normalize_assoc(self, a):
        if a == 0:
            return Fraction(0), Fraction(1)
        return Fraction(1), a

    def unit_inverse(self, unit):
        return 1 / unit

    def divmod_elems(self, a, b):
        return a / b, Fraction(0)

    def to_text(self, a) -> str:
        return str(a)

    def from_text(self, text: str) -> Fraction:
        return Fraction(text.strip())


ZZ = IntegerRing()
QX = RationalPolyRing()
QQ = RationalField()

_RINGS = {"Z": ZZ, "Qx": QX, "Q": QQ}


def ring_by_name(name: str) -> Ring:
    try:
        return _RINGS[name]
    except KeyError:
        raise RingError(f"unknown ring {name!r}; expected one of {sorted(_RINGS)}")


# ---------------------------------------------------------------------------
# spec-level operations


def gcd_ext(ring: Ring, a, b) -> BezoutWitness:
    return ring.gcd_ext(a, b)


def normalize_assoc(ring: Ring, a):
    return ring.normalize_assoc(ring.coerce(a))


def residue_rep(ring: Ring, a, m):
    return ring.residue_rep(ring.coerce(a), ring.coerce(m))


def adequate_split(ring: Ring, a, b) -> Tuple[object, object]:
    """Split a = c*d with (c, b) = 1 and every nonunit divisor of d sharing
    a nonunit factor with b.

    Iterated gcd extraction: peel gcd(c, b) into d until the cofactor is
    coprime to b.  Every factor moved into d divides a power of b, which is
    exactly the saturation condition.
    """
    a = ring.coerce(a)
    b = ring.coerce(b)
    if ring.is_zero(a):
        raise RingError("adequate_split requires a != 0")
    c, d = a, ring.one
    while True:
        g = ring.gcd(c, b)
        if ring.is_unit(g):
            break
        c = ring.exact_div(c, g)
        d = d * g
    c_canon, unit = ring.normalize_assoc(c)
    # fold the stray unit into d so that c*d == a exactly
    return c_canon, d * unit


def stable_range_coeff(ring: Ring, a, b, c):
    """r such that (a + b*r, c) = 1, given (a, b, c) = 1 and c != 0.

    Small candidates are scanned first (so integer results match a smallest-r
    oracle and Q[x] results are low-degree constants); the coprime part of
    adequate_split(c, a) is a constructive fallback that always works.
    """
    a = ring.coerce(a)
    b = ring.coerce(b)
    c = ring.coerce(c)
    if ring.is_zero(c):
        raise RingError("stable_range_coeff requires c != 0")
    if not ring.is_unit(ring.gcd_list([a, b, c])):
        raise RingError("stable_range_coeff requires (a, b, c) = 1")

    def ok(r) -> bool:
        return ring.coprime(a + b * r, c)

    if ring is ZZ:
        bound = min(abs(c), 4096)
        candidates = (r for r in range(bound + 1))
    else:
        # each irreducible factor of c rules out at most one constant
        degree = c.degree if isinstance(c, PolyQ) else 0
        candidates = (ring.coerce(k) for k in range(degree + 2))
    for r in candidates:
        if ok(r):
            return r
    r, _sat = adequate_split(ring, c, a)
    if ok(r):
        return r
    raise RingError("stable range construction failed; inputs violate the contract")


def bezout_row(
    ring: Ring,
    row: Sequence,
    coprime_prefix_index: Optional[int] = None,
    coprime_to=None,
):
    """Coefficients u with sum(u_k * a_k) = 1 for a row with unit gcd.

    Optional constraints, both attached to the same index i:
      * (u_1, ..., u_i) = 1  (coprime_prefix_index = i, 2 <= i <= n),
      * (u_i, psi) = 1       (coprime_to = psi, psi != 0).
    When only coprime_to is given, i defaults to n.
    """
    from . import matrix as _matrix  # deferred: matrix layer builds on this module
    from . import normal_forms as _nf

    a = [ring.coerce(v) for v in row]
    n = len(a)
    if n < 2:
        raise RingError("bezout_row needs at least two entries")
    if not ring.is_unit(ring.gcd_list(a)):
        raise RingError("bezout_row requires the row gcd to be a unit")

    psi = None if coprime_to is None else ring.coerce(coprime_to)
    if psi is not None and ring.is_zero(psi):
        raise RingError("coprime_to constraint must be nonzero")
    i = coprime_prefix_index
    if i is None and psi is not None:
        i = n
    if i is not None and not 2 <= i <= n:
        raise RingError(f"prefix index {i} out of range 2..{n}")
    if psi is None:
        psi = ring.one

    col = _matrix.ExactMatrix(ring, [[v] for v in a])
    u0, alpha = _nf.reduce_column(col)
    # u0 * a = e_1 since the gcd is a unit
    coeffs = list(u0.rows[0])
    if i is None:
        return coeffs

    # align the reduction so column i of the completion inverse is
    # (b_1i, gamma, 0, ..., 0)^T
    sub = [u0.rows[r][i - 1] for r in range(1, n)]
    if any(not ring.is_zero(v) for v in sub):
        d, _g = _nf.reduce_column(_matrix.ExactMatrix(ring, [[v] for v in sub]))
        u = _matrix.block_diag(_matrix.ExactMatrix.identity(ring, 1), d) * u0
    else:
        u = u0
    b1i = u.rows[0][i - 1]
    gamma = u.rows[1][i - 1] if n >= 2 else ring.zero

    def combine(*terms):
        # terms: (scalar, row index of u); returns the combined coefficient row
        out = [ring.zero] * n
        for scal, ridx in terms:
            for k in range(n):
                out[k] = out[k] + scal * u.rows[ridx][k]
        return out

    if ring.is_zero(gamma):
        if not ring.is_unit(b1i):
            raise RingError("completion lost invertibility; internal error")
        return combine((ring.one, 0))

    t_j = None
    for t in range(i, n):  # rows i+1..n, 0-based t
        for j in range(i - 1):  # columns 1..i-1
            if not ring.is_zero(u.rows[t][j]):
                t_j = (t, j)
                break
        if t_j:
            break

    if t_j is None:
        r = stable_range_coeff(ring, b1i, gamma, psi)
        return combine((ring.one, 0), (r, 1))

    t, j = t_j
    btj = u.rows[t][j]
    if ring.is_unit(gamma):
        # degenerate shortcut: drive the pivot entry to 1 directly
        ell = ring.exact_div(ring.one - b1i, gamma)
    else:
        ell = stable_range_coeff(ring, b1i, gamma, psi * btj)
    d1i = b1i + gamma * ell
    d1j = u.rows[0][j] + ell * u.rows[1][j]
    m = stable_range_coeff(ring, d1j, btj, d1i)
    return combine((ring.one, 0), (ell, 1), (m, t))
