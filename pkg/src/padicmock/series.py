"""Truncated Laurent series over exact rationals or p-adic scalars.

One engine, two coefficient rings.  Exact-rational mode is the in-repo
oracle: small truncations, Fraction coefficients, no precision questions.
p-adic mode carries a PadicScalar per coefficient, so precision is tracked
per index rather than per series (antiderivatives only lose digits at
p-divisible exponents).

Truncation bookkeeping is pessimistic: a series knows its coefficients for
all exponents strictly below ``trunc``, and every operation shrinks that
window to what its inputs justify.  Multiplication runs through the exact
packed convolution of ``_convolve``, so the fast path is bit-identical to
schoolbook evaluation.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ._convolve import conv_int
from .padic import PadicScalar, _make, kronecker_symbol

RATIONAL = "rational"
PADIC = "padic"

_EXACT_INT_PREC = 10 ** 6  # stand-in absolute precision for exactly known integers


class RingMismatchError(TypeError):
    """Operands live over different coefficient rings or primes."""


class TruncationError(IndexError):
    """A coefficient beyond the justified truncation was requested."""


def _lcm(a, b):
    return a // math.gcd(a, b) * b


class LaurentSeries:
    __slots__ = ("ring", "p", "ord", "coeffs", "trunc")

    def __init__(self, ring, coeffs, ord=0, trunc=None, p=None):
        if ring not in (RATIONAL, PADIC):
            raise ValueError("unknown ring %r" % ring)
        if ring == PADIC and not p:
            raise ValueError("p-adic series needs a prime")
        self.ring = ring
        self.p = p if ring == PADIC else None
        self.ord = ord
        self.coeffs = list(coeffs)
        self.trunc = ord + len(self.coeffs) if trunc is None else trunc
        if self.trunc - ord != len(self.coeffs):
            raise ValueError("coefficient window does not match trunc")

    # -- constructors --------------------------------------------------

    @classmethod
    def rational(cls, coeffs, ord=0, trunc=None):
        return cls(RATIONAL, [Fraction(c) for c in coeffs], ord, trunc)

    @classmethod
    def padic(cls, p, coeffs, ord=0, trunc=None):
        return cls(PADIC, coeffs, ord, trunc, p=p)

    @classmethod
    def from_residues(cls, p, residues, prec, ord=0, shift=0, trunc=None):
        """Series whose coefficient at slot i is residues[i] * p^-shift, known
        mod p^(prec - shift); ``prec`` may be a per-coefficient list."""
        out = []
        for i, r in enumerate(residues):
            a = prec[i] if isinstance(prec, (list, tuple)) else prec
            out.append(PadicScalar.from_rational(Fraction(r, p ** shift), p, a - shift))
        return cls(PADIC, out, ord, trunc, p=p)

    @classmethod
    def zero(cls, ring, trunc, p=None):
        zc = Fraction(0) if ring == RATIONAL else PadicScalar.exact_zero(p)
        return cls(ring, [zc] * max(trunc, 0), 0, None, p)._with_trunc(trunc)

    def _with_trunc(self, trunc):
        if trunc <= self.ord:
            return LaurentSeries(self.ring, [], trunc, trunc, self.p)
        if trunc < self.trunc:
            return LaurentSeries(self.ring, self.coeffs[: trunc - self.ord],
                                 self.ord, trunc, self.p)
        return LaurentSeries(self.ring,
                             self.coeffs + [self._zero_coeff()] * (trunc - self.trunc),
                             self.ord, trunc, self.p)

    def _zero_coeff(self):
        return Fraction(0) if self.ring == RATIONAL else PadicScalar.exact_zero(self.p)

    # -- access ----------------------------------------------------------

    def coeff(self, n):
        """Coefficient of q^n; exponents below ord are exactly zero."""
        if n >= self.trunc:
            raise TruncationError("coefficient %d beyond truncation %d" % (n, self.trunc))
        if n < self.ord:
            return self._zero_coeff()
        return self.coeffs[n - self.ord]

    def window(self, start, stop):
        return [self.coeff(n) for n in range(start, min(stop, self.trunc))]

    def support_ord(self):
        """Least exponent whose coefficient is not exactly zero."""
        for i, c in enumerate(self.coeffs):
            if not _is_exact_zero(c):
                return self.ord + i
        return self.trunc

    def strip(self):
        """Drop exactly-zero leading coefficients, raising ord."""
        s = self.support_ord()
        if s == self.ord:
            return self
        return LaurentSeries(self.ring, self.coeffs[s - self.ord :], s, self.trunc, self.p)

    def truncate(self, T):
        if T >= self.trunc:
            return self
        return self._with_trunc(T)

    def is_padic(self):
        return self.ring == PADIC

    def _compat(self, other):
        if self.ring != other.ring or self.p != other.p:
            raise RingMismatchError(
                "ring mismatch: %s/%s vs %s/%s" % (self.ring, self.p, other.ring, other.p)
            )

    # -- linear structure --------------------------------------------------

    def __add__(self, other):
        self._compat(other)
        ord_ = min(self.ord, other.ord)
        trunc = min(self.trunc, other.trunc)
        out = [self.coeff(n) + other.coeff(n) for n in range(ord_, trunc)]
        return LaurentSeries(self.ring, out, ord_, trunc, self.p)

    def __neg__(self):
        return LaurentSeries(self.ring, [-c for c in self.coeffs], self.ord, self.trunc, self.p)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        """Multiply by a scalar of the coefficient ring (ints allowed in both)."""
        if self.ring == RATIONAL:
            c = Fraction(c)
            return LaurentSeries(RATIONAL, [a * c for a in self.coeffs], self.ord, self.trunc)
        if isinstance(c, int):
            return LaurentSeries(PADIC, [a.int_mul(c) for a in self.coeffs],
                                 self.ord, self.trunc, self.p)
        return LaurentSeries(PADIC, [a * c for a in self.coeffs], self.ord, self.trunc, self.p)

    def shift(self, k):
        """Multiply by q^k."""
        return LaurentSeries(self.ring, self.coeffs, self.ord + k, self.trunc + k, self.p)

    # -- multiplication ------------------------------------------------------

    def __mul__(self, other):
        self._compat(other)
        trunc = min(self.trunc + other.ord, other.trunc + self.ord)
        ord_ = self.ord + other.ord
        length = trunc - ord_
        if length <= 0 or not self.coeffs or not other.coeffs:
            return LaurentSeries.zero(self.ring, max(trunc, 0), self.p)._with_trunc(trunc)
        if self.ring == RATIONAL:
            vals = _mul_rational(self.coeffs, other.coeffs, length)
        else:
            vals = _mul_padic(self.p, self.coeffs, other.coeffs, length)
        vals += [self._zero_coeff()] * (length - len(vals))
        return LaurentSeries(self.ring, vals[:length], ord_, trunc, self.p)

    # -- certification helpers -------------------------------------------

    def min_valuation_floor(self):
        """(floor, exponent) minimizing the certified lower bound on v_p."""
        if self.ring != PADIC:
            raise RingMismatchError("valuation floor is a p-adic notion")
        best, arg = math.inf, None
        for n in range(self.ord, self.trunc):
            f = self.coeff(n).valuation_floor()
            if f < best:
                best, arg = f, n
        return best, arg

    def congruent(self, other):
        """Termwise agreement over the joint window at joint precision."""
        self._compat(other)
        lo = min(self.ord, other.ord)
        hi = min(self.trunc, other.trunc)
        for n in range(lo, hi):
            a, b = self.coeff(n), other.coeff(n)
            if self.ring == RATIONAL:
                if a != b:
                    return False
            elif not a.congruent(b):
                return False
        return True

    def __repr__(self):
        ringtag = self.ring if self.ring == RATIONAL else "padic p=%d" % self.p
        head = ", ".join(
            "q^%d: %s" % (n, self.coeff(n))
            for n in range(self.ord, min(self.ord + 4, self.trunc))
        )
        return "<LaurentSeries %s ord=%d trunc=%d | %s ...>" % (
            ringtag, self.ord, self.trunc, head)


def _is_exact_zero(c):
    if isinstance(c, Fraction):
        return c == 0
    return c.is_exact_zero


def _exact_int(c, p):
    return PadicScalar.from_integer(c, p, _EXACT_INT_PREC)


# -- ring-specific convolution kernels --------------------------------------


def _mul_rational(a, b, limit):
    da = 1
    for c in a:
        da = _lcm(da, c.denominator)
    db = 1
    for c in b:
        db = _lcm(db, c.denominator)
    if max(da.bit_length(), db.bit_length()) < 6000:
        ia = [int(c * da) for c in a]
        ib = [int(c * db) for c in b]
        return [Fraction(c, da * db) for c in conv_int(ia, ib, limit)]
    # fallback when clearing denominators would blow up sizes
    out = [Fraction(0)] * min(limit, len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j in range(min(len(b), len(out) - i)):
            if b[j]:
                out[i + j] += ai * b[j]
    return out


def _mul_padic(p, a, b, limit):
    # exact convolution of canonical representatives, then per-coefficient
    # pessimistic precision: A(c_n) = min over i+j=n of (A_i + v_j, A_j + v_i)
    base_a = min(0, min((c.v for c in a if c.u), default=0))
    base_b = min(0, min((c.v for c in b if c.u), default=0))
    ia = [c.u * p ** (c.v - base_a) if c.u else 0 for c in a]
    ib = [c.u * p ** (c.v - base_b) if c.u else 0 for c in b]
    vals = conv_int(ia, ib, limit)
    n_out = len(vals)

    fa = [c.valuation_floor() for c in a]
    fb = [c.valuation_floor() for c in b]
    Aa = [c.A for c in a]
    Ab = [c.A for c in b]
    base = base_a + base_b
    uniform = (
        len(set(Aa)) == 1 and len(set(Ab)) == 1
        and min(fa) >= 0 and min(fb) >= 0
    )
    if uniform:
        prec = min(Aa[0], Ab[0])
        return [_make(vals[n], base, p, prec) for n in range(n_out)]
    out = []
    for n in range(n_out):
        prec = math.inf
        for i in range(max(0, n - len(b) + 1), min(n + 1, len(a))):
            t = min(Aa[i] + fb[n - i], Ab[n - i] + fa[i])
            if t < prec:
                prec = t
        out.append(_make(vals[n], base, p, prec))
    return out


# -- inversion, composition, reversion ---------------------------------------


def inv(A: LaurentSeries) -> LaurentSeries:
    """Multiplicative inverse; the leading coefficient must be invertible."""
    A = A.strip()
    if A.trunc <= A.ord:
        raise ZeroDivisionError("inverse of an empty window")
    lead = A.coeff(A.ord)
    if _is_exact_zero(lead) or (A.ring == PADIC and lead.is_zero):
        raise ZeroDivisionError("leading coefficient not invertible")
    L = A.trunc - A.ord
    unit = A.shift(-A.ord)
    linv = Fraction(1) / lead if A.ring == RATIONAL else lead.invert()
    X = LaurentSeries(A.ring, [linv], 0, 1, A.p)
    known = 1
    while known < L:
        known = min(2 * known, L)
        Xk = X._with_trunc(known)
        prod = (unit.truncate(known) * Xk).truncate(known)
        two = LaurentSeries(A.ring,
                            [Fraction(2) if A.ring == RATIONAL else _exact_int(2, A.p)],
                            0, 1, A.p)._with_trunc(known)
        X = (Xk * (two - prod)).truncate(known)
    return X._with_trunc(L).shift(-A.ord)


def compose(A: LaurentSeries, B: LaurentSeries) -> LaurentSeries:
    """A(B(q)); needs ord(B) >= 1.  Laurent A (finite principal part) is
    composed by running the principal part through inv(B)."""
    A._compat(B)
    B = B.strip()
    ob = B.ord
    if ob < 1:
        raise ValueError("compose needs ord(B) >= 1")
    trunc = min(ob * A.trunc, B.trunc + min(A.ord - 1, 0) * ob)
    result = LaurentSeries.zero(A.ring, trunc, A.p)
    if A.ord < 0:
        Binv = inv(B)
        power = Binv
        for k in range(1, -A.ord + 1):
            c = A.coeff(-k)
            if not _is_exact_zero(c):
                result = result + power.scale(c).truncate(trunc)
            if k < -A.ord:
                power = (power * Binv).truncate(trunc)
    regular = [A.coeff(n) for n in range(max(A.ord, 0), A.trunc)]
    result = result + _compose_regular(regular, max(A.ord, 0), B, trunc)
    return result.truncate(trunc)


def _compose_regular(coeffs, offset, B, trunc):
    """sum_i coeffs[i] B^(offset+i) to O(q^trunc), baby-step giant-step."""
    ring, p = B.ring, B.p
    while coeffs and _is_exact_zero(coeffs[-1]):
        coeffs = coeffs[:-1]
    if not coeffs:
        return LaurentSeries.zero(ring, trunc, p)
    n_terms = len(coeffs)
    r = max(1, math.isqrt(n_terms) + 1)
    one = (LaurentSeries.rational([1], 0) if ring == RATIONAL
           else LaurentSeries.padic(p, [_exact_int(1, p)], 0))._with_trunc(trunc)
    baby = [one]
    for i in range(1, r + 1):
        baby.append((baby[-1] * B).truncate(trunc))
    giant = baby[r]
    result = LaurentSeries.zero(ring, trunc, p)
    n_blocks = (n_terms + r - 1) // r
    for blk in range(n_blocks - 1, -1, -1):
        block = LaurentSeries.zero(ring, trunc, p)
        for i in range(r):
            idx = blk * r + i
            if idx < n_terms and not _is_exact_zero(coeffs[idx]):
                block = block + baby[i].scale(coeffs[idx])
        result = (result * giant).truncate(trunc) + block
    k = 0
    while k < offset:
        step = min(offset - k, r)
        result = (result * baby[step]).truncate(trunc)
        k += step
    return result


def reverse(A: LaurentSeries) -> LaurentSeries:
    """Compositional inverse of A = q + O(q^2) (Newton iteration)."""
    A = A.strip()
    if A.support_ord() != 1:
        raise ValueError("reverse needs ord(A) = 1")
    lead = A.coeff(1)
    if (A.ring == RATIONAL and lead != 1) or (
        A.ring == PADIC and not (lead.u == 1 and lead.v == 0)
    ):
        raise ValueError("reverse needs leading coefficient 1")
    T = A.trunc
    R = LaurentSeries(A.ring, [lead], 1, 2, A.p)
    known = 2
    Aprime = derive_var(A)
    while known < T:
        known = min(2 * known, T)
        Rk = R._with_trunc(known)
        ident = LaurentSeries(A.ring, [lead], 1, 2, A.p)._with_trunc(known)
        err = (compose(A.truncate(known), Rk) - ident).truncate(known).strip()
        if err.support_ord() >= err.trunc:
            R = Rk
            continue
        # err = O(q^m) with m >= known/2, so the quotient below is still
        # justified out to q^known even though the denominator window is shorter
        corr = err * inv(compose(Aprime.truncate(known), Rk))
        R = Rk - corr.truncate(known)
        if R.trunc < known:
            raise AssertionError("reversion lost truncation window")
    return R._with_trunc(T).strip()


def derive_var(A: LaurentSeries) -> LaurentSeries:
    """Ordinary derivative d/dq (exponents shift down by one)."""
    return derive_D(A).shift(-1)


# -- the q-series operator dictionary ---------------------------------------


def derive_D(A: LaurentSeries) -> LaurentSeries:
    """The homogeneity operator q d/dq: a(n) -> n a(n)."""
    out = []
    for n in range(A.ord, A.trunc):
        c = A.coeff(n)
        out.append(c * Fraction(n) if A.ring == RATIONAL else c.int_mul(n))
    return LaurentSeries(A.ring, out, A.ord, A.trunc, A.p)


def antiderive_D(A: LaurentSeries) -> LaurentSeries:
    """Inverse of derive_D away from the constant: a(n) -> a(n)/n.

    The constant term of a primitive is not recoverable, so a nonzero
    constant term is an error.  In p-adic mode coefficient n loses v_p(n)
    digits of absolute precision, recorded on that coefficient only.
    """
    if A.ord <= 0 < A.trunc:
        c0 = A.coeff(0)
        if not (c0 == 0 if A.ring == RATIONAL else c0.is_zero):
            raise ValueError("antiderive_D: nonzero constant term")
    out = []
    for n in range(A.ord, A.trunc):
        if n == 0:
            out.append(A._zero_coeff())
            continue
        c = A.coeff(n)
        out.append(c / Fraction(n) if A.ring == RATIONAL else c.int_div(n))
    return LaurentSeries(A.ring, out, A.ord, A.trunc, A.p)


def op_Up(A: LaurentSeries, p: int) -> LaurentSeries:
    """U_p: a(n) -> a(pn)."""
    ord_ = -((-A.ord) // p)
    trunc = -((-A.trunc) // p)
    out = []
    for n in range(ord_, trunc):
        out.append(A.coeff(p * n) if p * n < A.trunc else A._zero_coeff())
    return LaurentSeries(A.ring, out, ord_, trunc, A.p)


def op_Vp(A: LaurentSeries, p: int) -> LaurentSeries:
    """V_p: a(n) -> a(n/p), i.e. substitute q -> q^p."""
    ord_, trunc = A.ord * p, A.trunc * p - (p - 1)
    out = []
    for n in range(ord_, trunc):
        out.append(A.coeff(n // p) if n % p == 0 else A._zero_coeff())
    return LaurentSeries(A.ring, out, ord_, trunc, A.p)


def op_Tkp(A: LaurentSeries, k: int, p: int) -> LaurentSeries:
    """T_{k,p} = U_p + p^(k-1) V_p on q-expansions."""
    return op_Up(A, p) + op_Vp(A, p).scale(p ** (k - 1))


def twist(A: LaurentSeries, D: int) -> LaurentSeries:
    """Coefficientwise twist a(n) -> chi_D(n) a(n) by the quadratic character."""
    out = []
    for n in range(A.ord, A.trunc):
        if n == 0:
            chi = 0
        elif n > 0:
            chi = kronecker_symbol(D, n)
        else:
            chi = kronecker_symbol(D, -n) * (-1 if D < 0 else 1)
        c = A.coeff(n)
        out.append(c * chi if A.ring == RATIONAL else c.int_mul(chi))
    return LaurentSeries(A.ring, out, A.ord, A.trunc, A.p)


# -- series files -------------------------------------------------------------


def write_series(A: LaurentSeries, fh) -> None:
    fh.write("# ring=%s p=%d ord=%d trunc=%d\n"
             % (A.ring, A.p or 0, A.ord, A.trunc))
    for n in range(A.ord, A.trunc):
        c = A.coeff(n)
        if A.ring == RATIONAL:
            fh.write("%d\t%d/%d\n" % (n, c.numerator, c.denominator))
        else:
            atxt = "inf" if c.A == math.inf else "%d" % c.A
            v = 0 if c.u == 0 else c.v
            fh.write("%d\t%d*%d^%d%%%d^%s\n" % (n, c.u, A.p, v, A.p, atxt))


def read_series(fh) -> LaurentSeries:
    header = fh.readline().strip()
    if not header.startswith("# "):
        raise ValueError("missing series header")
    fields = dict(tok.split("=", 1) for tok in header[2:].split())
    ring = fields["ring"]
    p = int(fields["p"]) or None
    ord_, trunc = int(fields["ord"]), int(fields["trunc"])
    coeffs = {}
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        ntxt, val = line.split("\t")
        n = int(ntxt)
        if ring == RATIONAL:
            num, den = val.split("/")
            coeffs[n] = Fraction(int(num), int(den))
        else:
            mant, modpart = val.split("%")
            utxt, ppow = mant.split("*")
            u = int(utxt)
            v = int(ppow.split("^")[1])
            atxt = modpart.split("^")[1]
            if u == 0:
                coeffs[n] = (PadicScalar.exact_zero(p) if atxt == "inf"
                             else PadicScalar.inexact_zero(p, int(atxt)))
            else:
                coeffs[n] = PadicScalar(p, v, u, int(atxt))
    zero = Fraction(0) if ring == RATIONAL else PadicScalar.exact_zero(p)
    out = [coeffs.get(n, zero) for n in range(ord_, trunc)]
    return LaurentSeries(ring, out, ord_, trunc, p)
