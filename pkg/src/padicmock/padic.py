"""Exact p-adic scalars with explicit precision tracking.

A scalar is either an (in)exact zero or a triple (v, u, A): the value
u * p^v is known modulo p^A, with p not dividing u and v < A.  All
arithmetic propagates absolute precision pessimistically, so every digit
a scalar claims to know is certified.  Mixing primes is a programming
error and raises immediately.
"""

from __future__ import annotations

import math
from fractions import Fraction


class PrimeMismatchError(TypeError):
    """Two scalars from different p-adic contexts met in one operation."""


class PrecisionExhaustedError(ArithmeticError):
    """A result is indistinguishable from zero at the available precision."""


class ReconstructionFailure(ValueError):
    """No small rational matches the residue; caller must raise precision."""


_INF = math.inf


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of exact zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class PadicScalar:
    """An element of Q_p known modulo p^A.

    ``u == 0`` encodes a zero: exact when ``A`` is infinite, otherwise the
    statement "this value is O(p^A)".  Instances are immutable.
    """

    __slots__ = ("p", "v", "u", "A")

    def __init__(self, p, v, u, A):
        self.p = p
        self.v = v
        self.u = u
        self.A = A

    # -- constructors ------------------------------------------------------

    @staticmethod
    def exact_zero(p: int) -> "PadicScalar":
        return PadicScalar(p, _INF, 0, _INF)

    @staticmethod
    def inexact_zero(p: int, A: int) -> "PadicScalar":
        return PadicScalar(p, A, 0, A)

    @staticmethod
    def from_integer(m: int, p: int, A: int) -> "PadicScalar":
        """Reduce an exactly known integer mod p^A (high valuation clamps, never raises)."""
        if m == 0:
            return PadicScalar.exact_zero(p)
        return _make(m, 0, p, A)

    @staticmethod
    def from_rational(x, p: int, A: int) -> "PadicScalar":
        """Reduce an exactly known rational mod p^A; denominator must be prime to p
        after cancelling p-powers."""
        x = Fraction(x)
        if x == 0:
            return PadicScalar.exact_zero(p)
        num, den = x.numerator, x.denominator
        shift = _vp(num, p) - _vp(den, p)
        num //= p ** max(_vp(num, p), 0)
        den //= p ** max(_vp(den, p), 0)
        if shift >= A:
            return PadicScalar.inexact_zero(p, A)
        M = A - shift
        u = num * pow(den, -1, p ** M) % p ** M
        if u == 0:
            return PadicScalar.inexact_zero(p, A)
        return PadicScalar(p, shift, u, A)

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        """True when every known digit is zero (exact or not)."""
        return self.u == 0

    @property
    def is_exact_zero(self) -> bool:
        return self.u == 0 and self.A == _INF

    def valuation(self) -> int:
        """v_p of the value; raises if only a zero residue is known."""
        if self.u == 0:
            if self.A == _INF:
                return _INF
            raise PrecisionExhaustedError(
                "valuation undefined: value is O(p^%s) but may be nonzero" % self.A
            )
        return self.v

    def valuation_floor(self):
        """Certified lower bound for v_p, defined for every scalar."""
        return self.A if self.u == 0 else self.v

    @property
    def rel_prec(self):
        return self.A - self.v if self.u else 0

    def is_unit(self) -> bool:
        return self.u != 0 and self.v == 0

    def reduce_precision(self, A: int) -> "PadicScalar":
        if A >= self.A:
            return self
        if self.u == 0 or self.v >= A:
            return PadicScalar.inexact_zero(self.p, A)
        return PadicScalar(self.p, self.v, self.u % self.p ** (A - self.v), A)

    def lift(self) -> Fraction:
        """The canonical representative u * p^v as an exact rational."""
        if self.u == 0:
            return Fraction(0)
        if self.v >= 0:
            return Fraction(self.u * self.p ** self.v)
        return Fraction(self.u, self.p ** (-self.v))

    # -- arithmetic --------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, PadicScalar):
            raise TypeError("expected PadicScalar, got %r" % type(other).__name__)
        if other.p != self.p:
            raise PrimeMismatchError(
                "mixed primes %d and %d" % (self.p, other.p)
            )

    def __add__(self, other):
        self._check(other)
        A = min(self.A, other.A)
        if self.u == 0 and other.u == 0:
            return PadicScalar(self.p, A, 0, A)
        base = min(v for v in (self.v, other.v, A) if v != _INF)
        m = 0
        for t in (self, other):
            if t.u:
                m += t.u * self.p ** (t.v - base)
        return _make(m, base, self.p, A)

    def __neg__(self):
        if self.u == 0:
            return self
        return PadicScalar(self.p, self.v, self.p ** (self.A - self.v) - self.u, self.A)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        p = self.p
        if self.is_exact_zero or other.is_exact_zero:
            return PadicScalar.exact_zero(p)
        if self.u == 0 or other.u == 0:
            # O(p^a) * (u p^v + O(p^A)) = O(p^(a+v)); both zero: O(p^(a+b))
            return PadicScalar.inexact_zero(p, self.valuation_floor() + other.valuation_floor())
        v = self.v + other.v
        M = min(self.rel_prec, other.rel_prec)
        u = self.u * other.u % p ** M
        return PadicScalar(p, v, u, v + M)

    def invert(self) -> "PadicScalar":
        if self.is_exact_zero:
            raise ZeroDivisionError("inverse of exact zero")
        if self.u == 0:
            raise PrecisionExhaustedError("inverse of a value known only as O(p^%s)" % self.A)
        M = self.rel_prec
        return PadicScalar(self.p, -self.v, pow(self.u, -1, self.p ** M), -self.v + M)

    def __truediv__(self, other):
        self._check(other)
        return self * other.invert()

    def int_mul(self, n: int) -> "PadicScalar":
        """Multiply by an exactly known integer (full precision on that side)."""
        if n == 0:
            return PadicScalar.exact_zero(self.p)
        if self.u == 0:
            return PadicScalar.inexact_zero(self.p, self.valuation_floor() + _vp(n, self.p))
        return _make(self.u * n, self.v, self.p, self.A + _vp(n, self.p))

    def int_div(self, n: int) -> "PadicScalar":
        """Divide by an exactly known nonzero integer.

        Relative precision is preserved; the absolute precision drops by
        v_p(n), which is where antiderivatives lose digits at p-divisible
        indices.
        """
        if n == 0:
            raise ZeroDivisionError("int_div by zero")
        w = _vp(n, self.p)
        if self.u == 0:
            if self.A == _INF:
                return self
            return PadicScalar.inexact_zero(self.p, self.A - w)
        M = self.rel_prec
        unit = n // self.p ** w
        u = self.u * pow(unit % self.p ** M, -1, self.p ** M) % self.p ** M
        return PadicScalar(self.p, self.v - w, u, self.A - w)

    def congruent(self, other) -> bool:
        """Equality modulo p^min(A, A'), the only comparison that is defined."""
        return (self - other).u == 0

    # -- presentation ------------------------------------------------------

    def __repr__(self):
        if self.u == 0:
            if self.A == _INF:
                return "0"
            return "0 (mod %d^%d)" % (self.p, self.A)
        return "%d * %d^%d (mod %d^%s)" % (self.u, self.p, self.v, self.p, self.A)

    def as_triple(self):
        """(u, v, A) with decimal strings, the JSON wire form."""
        return {
            "u": str(self.u),
            "v": "inf" if self.v == _INF else str(self.v),
            "A": "inf" if self.A == _INF else str(self.A),
        }

    def __eq__(self, other):
        return (
            isinstance(other, PadicScalar)
            and (self.p, self.v, self.u, self.A) == (other.p, other.v, other.u, other.A)
        )

    def __hash__(self):
        return hash((self.p, self.v, self.u, self.A))


def _make(m: int, scale: int, p: int, A) -> PadicScalar:
    """Canonical scalar for m * p^scale at absolute precision A, clamping an
    unresolvable residue to the inexact zero O(p^A).

    m == 0 yields the inexact zero: arithmetic routes through here, and a
    cancellation of residues never certifies an exact zero.
    """
    if m == 0:
        return PadicScalar.exact_zero(p) if A == _INF else PadicScalar.inexact_zero(p, A)
    v = _vp(m, p) + scale
    if v >= A:
        return PadicScalar.inexact_zero(p, A)
    u = (m // p ** (v - scale)) % p ** (A - v)
    if u == 0:
        return PadicScalar.inexact_zero(p, A)
    return PadicScalar(p, v, u, A)


def normalize(m: int, scale: int, p: int, A: int) -> PadicScalar:
    """Canonical-form scalar for m * p^scale mod p^A.

    Unlike the clamping constructors, a nonzero m that reduces to zero is an
    error: at this precision the value cannot be told apart from 0.
    """
    if m == 0:
        return PadicScalar.exact_zero(p)
    if _vp(m, p) + scale >= A:
        raise PrecisionExhaustedError(
            "m*p^%d is 0 mod p^%d but m != 0: precision exhausted" % (scale, A)
        )
    return _make(m, scale, p, A)


def kronecker_symbol(D: int, n: int):
    """Kronecker symbol (D/n) for positive n.

    p is inert in the quadratic order of discriminant D iff the value at p
    is -1.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    result = 1
    if n % 2 == 0:
        if D % 2 == 0:
            return 0
        two = 1 if D % 8 in (1, 7) else -1
        while n % 2 == 0:
            n //= 2
            result *= two
    # Jacobi symbol on the odd part
    a = D % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def rational_reconstruct(x: PadicScalar) -> Fraction:
    """Smallest rational a/b congruent to x mod p^A, with |a|, |b| bounded by
    sqrt(p^M / 2) where M is the relative precision.

    Raises ReconstructionFailure when no such rational exists, which for a
    generic residue is the overwhelmingly likely outcome.
    """
    if x.u == 0:
        return Fraction(0)
    M = x.rel_prec
    if M < 2:
        raise PrecisionExhaustedError("need relative precision >= 2 to reconstruct")
    p, modulus = x.p, x.p ** M
    bound = math.isqrt(modulus // 2)
    r0, r1 = modulus, x.u % modulus
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if r1 == 0 or abs(t1) > bound or math.gcd(t1, p) != 1 or math.gcd(r1, abs(t1)) != 1:
        raise ReconstructionFailure(
            "no rational with numerator and denominator below %d at this precision" % bound
        )
    return Fraction(r1, t1) * Fraction(p) ** x.v
