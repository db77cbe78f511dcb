"""CM elliptic curve data and newform coefficient generation.

The built-in curves are the four rational CM curves whose modular curve
X_0(N) already has genus 1, so the optimal parametrization has degree 1.
Coefficients a(ell) come from two independent routes: exhaustive point
counting (the oracle) and a Hecke-character evaluation through the class
number one orders Z[i], Z[w], Z[(1+sqrt(-7))/2].  The character route
carries a per-discriminant sign table calibrated once against the point
counts for ell < 2000; any prime whose character class falls outside the
table drops back to counting points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .padic import kronecker_symbol
from .series import LaurentSeries, antiderive_D


@dataclass(frozen=True)
class CurveData:
    name: str
    ainvs: tuple
    c4: int
    c6: int
    conductor: int
    delta: int
    disc_K: int
    degree: int  # modular degree C_g

    @property
    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def g2(self) -> Fraction:
        return Fraction(self.c4, 12)

    @property
    def g3(self) -> Fraction:
        return Fraction(self.c6, 216)

    @property
    def j_invariant(self) -> Fraction:
        return Fraction(self.c4 ** 3, self.delta)


def _build_curve(name, ainvs, conductor, disc_K, degree):
    a1, a2, a3, a4, a6 = ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    if (c4 ** 3 - c6 ** 2) % 1728:
        raise ValueError("%s: c4^3 - c6^2 not divisible by 1728" % name)
    delta = (c4 ** 3 - c6 ** 2) // 1728
    if delta == 0:
        raise ValueError("%s: singular model" % name)
    if disc_K % 4 not in (0, 1) or disc_K >= 0:
        raise ValueError("%s: not an imaginary quadratic discriminant" % name)
    if degree < 1:
        raise ValueError("%s: modular degree must be positive" % name)
    return CurveData(name, tuple(ainvs), c4, c6, conductor, delta, disc_K, degree)


CURVE_TABLE = {
    "27a1": _build_curve("27a1", (0, 0, 1, 0, -7), 27, -3, 1),
    "32a1": _build_curve("32a1", (0, 0, 0, 4, 0), 32, -4, 1),
    "36a1": _build_curve("36a1", (0, 0, 0, 0, 1), 36, -3, 1),
    "49a1": _build_curve("49a1", (1, -1, 0, -2, -1), 49, -7, 1),
}


def load_curve(spec) -> CurveData:
    """Curve from a built-in label or an explicit description.

    Explicit form: mapping with keys ainvs, conductor (N), disc_K, degree and
    an optional name; the c-invariants are always recomputed and validated.
    """
    if isinstance(spec, str):
        if spec not in CURVE_TABLE:
            raise KeyError("unknown curve label %r (have %s)"
                           % (spec, ", ".join(sorted(CURVE_TABLE))))
        return CURVE_TABLE[spec]
    if isinstance(spec, CurveData):
        return spec
    return _build_curve(
        spec.get("name", "custom"),
        tuple(spec["ainvs"]),
        int(spec["conductor"]),
        int(spec["disc_K"]),
        int(spec.get("degree", 1)),
    )


@dataclass(frozen=True)
class ContextVerdict:
    curve: str
    p: int
    p_ge_5: bool
    good: bool
    inert: bool
    reason: str = ""

    @property
    def admissible(self):
        return self.p_ge_5 and self.good and self.inert


def check_context(curve: CurveData, p: int) -> ContextVerdict:
    """Admissibility of (curve, p): p >= 5, good reduction, inert in O_K."""
    if not _is_prime(p):
        raise ValueError("p = %d is not prime" % p)
    ge5 = p >= 5
    good = curve.delta % p != 0 and curve.conductor % p != 0
    inert = kronecker_symbol(curve.disc_K, p) == -1
    reasons = []
    if not ge5:
        reasons.append("p < 5")
    if not good:
        reasons.append("bad reduction at p")
    if not inert:
        reasons.append("p splits in O_K" if kronecker_symbol(curve.disc_K, p) == 1
                       else "p ramifies in O_K")
    return ContextVerdict(curve.name, p, ge5, good, inert, "; ".join(reasons))


# -- prime plumbing -----------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def smallest_factor_sieve(limit: int):
    """spf[n] = smallest prime factor of n (0, 1 unused)."""
    spf = list(range(limit + 1))
    for i in range(2, math.isqrt(limit) + 1):
        if spf[i] == i:
            for j in range(i * i, limit + 1, i):
                if spf[j] == j:
                    spf[j] = i
    return spf


def _sqrt_mod(a: int, p: int) -> int:
    """Tonelli-Shanks square root mod an odd prime; a must be a QR."""
    a %= p
    if a == 0:
        return 0
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


# -- point counting (the oracle) ---------------------------------------------


def a_ell_pointcount(curve: CurveData, ell: int) -> int:
    """ell + 1 - #E(F_ell) by exhaustive enumeration of the minimal model."""
    if curve.delta % ell == 0:
        raise ValueError("bad reduction at %d; use bad_prime_a" % ell)
    a1, a2, a3, a4, a6 = curve.ainvs
    if ell <= 3:
        count = 1
        for x in range(ell):
            for y in range(ell):
                lhs = y * y + a1 * x * y + a3 * y
                rhs = x ** 3 + a2 * x * x + a4 * x + a6
                if (lhs - rhs) % ell == 0:
                    count += 1
        return ell + 1 - count
    count = 1
    half = (ell - 1) // 2
    for x in range(ell):
        u = (4 * (x ** 3 + a2 * x * x + a4 * x + a6) + (a1 * x + a3) ** 2) % ell
        if u == 0:
            count += 1
        elif pow(u, half, ell) == 1:
            count += 2
    return ell + 1 - count


def bad_prime_a(curve: CurveData, ell: int) -> int:
    """a(ell) at a bad prime: 0 for additive reduction, +-1 for multiplicative
    (split iff -c6 is a square mod ell)."""
    if curve.delta % ell != 0:
        raise ValueError("%d is a good prime" % ell)
    if curve.c4 % ell == 0:
        return 0  # additive
    if ell == 2:
        return 1 if (-curve.c6) % 2 == 1 else -1
    return 1 if pow((-curve.c6) % ell, (ell - 1) // 2, ell) == 1 else -1


# -- Hecke character evaluation (the fast path) -------------------------------
#
# Sign tables below were calibrated against a_ell_pointcount over every good
# split prime < 2000 and are enforced by the oracle-equivalence tests.


def _two_squares(ell: int):
    """ell = a^2 + b^2 with a odd, b even, both positive (ell = 1 mod 4)."""
    t = _sqrt_mod(ell - 1, ell)
    a, b = ell, t
    while b * b > ell:
        a, b = b, a % b
    x = b
    y = math.isqrt(ell - x * x)
    if x * x + y * y != ell:
        raise ArithmeticError("two-square descent failed at %d" % ell)
    if x % 2 == 0:
        x, y = y, x
    return x, y


def _primary_gaussian(ell: int):
    """The primary Gaussian prime (a, b): a odd, a + b = 1 mod 4, first in the
    fixed (+a,+b), (+a,-b), (-a,+b), (-a,-b) scan order."""
    a, b = _two_squares(ell)
    for sa in (1, -1):
        for sb in (1, -1):
            if (sa * a + sb * b) % 4 == 1:
                return sa * a, sb * b
    raise ArithmeticError("no primary associate at %d" % ell)


def _a_ell_disc4(delta_num: int, delta_den: int, ell: int):
    """Trace for y^2 = x^3 + d x at split ell, d = delta_num/delta_den."""
    a, b = _primary_gaussian(ell)
    d = delta_num * pow(delta_den, -1, ell) % ell
    s = pow(d, (ell - 1) // 4, ell)
    t = a * pow(b, -1, ell) % ell
    classes = {1: 0, ell - 1: 2, t % ell: 1, (ell - t) % ell: 3}
    k = classes.get(s)
    if k is None:
        return None
    table = {0: 0, 2: 0}  # quartic class -> index into (2a, -2b, -2a, 2b)
    m = table.get(k)
    if m is None:
        return None
    return (2 * a, -2 * b, -2 * a, 2 * b)[m]


def _eisenstein_associates(a: int, b: int):
    """Associates of a + b w (w a primitive cube root of unity) and of its
    conjugate, in a fixed scan order; twelve pairs in total."""
    out = []
    for x0, y0 in ((a, b), (a - b, -b)):
        x, y = x0, y0
        for _ in range(3):
            out.append((x, y))
            out.append((-x, -y))
            x, y = -y, x - y
    return out


def _cornacchia_4ell_3(ell: int):
    """4*ell = u^2 + 3 v^2 with u, v > 0."""
    v = 1
    while True:
        rem = 4 * ell - 3 * v * v
        if rem <= 0:
            raise ArithmeticError("no 4l = u^2+3v^2 at %d" % ell)
        u = math.isqrt(rem)
        if u * u == rem:
            return u, v
        v += 1


def _primary_eisenstein(ell: int):
    """Lexicographically least associate (a, b) of a prime above ell in Z[w]
    with a = 2 mod 3 and b = 0 mod 3."""
    u, v = _cornacchia_4ell_3(ell)
    a, b = (u + v) // 2, v  # (u + v sqrt(-3))/2 = (u+v)/2 + v w
    if a * a - a * b + b * b != ell:
        raise ArithmeticError("norm mismatch at %d" % ell)
    prim = [(x, y) for (x, y) in _eisenstein_associates(a, b)
            if x % 3 == 2 and y % 3 == 0]
    if not prim:
        raise ArithmeticError("no primary associate at %d" % ell)
    return sorted(prim)[0]


# sextic class -> index into the fixed associate scan of _eisenstein_associates
_D3_TABLES = {
    4: {(0, 0): 1, (0, 1): 5, (0, 2): 3},    # y^2 = x^3 + 1 family
    -27: {(0, 0): 1},                        # y^2 = x^3 - 27/4 family
}


def _a_ell_disc3(arg4d: int, ell: int):
    """Trace for the j=0 family at split ell; arg4d is 4d for y^2 = x^3 + d."""
    a, b = _primary_eisenstein(ell)
    w = (-a) * pow(b, -1, ell) % ell  # image of w mod the chosen prime
    s = pow(arg4d % ell, (ell - 1) // 6, ell)
    images = {
        1: (0, 0), ell - 1: (1, 0),
        w: (0, 1), (ell - w) % ell: (1, 1),
        w * w % ell: (0, 2), (ell - w * w) % ell: (1, 2),
    }
    key = images.get(s)
    table = _D3_TABLES.get(arg4d, {})
    idx = table.get(key)
    if idx is None:
        return None
    x, y = _eisenstein_associates(a, b)[idx]
    return 2 * x - y  # trace of x + y w


def _a_ell_disc7(ell: int):
    """Trace at split ell for the disc -7 curve: 4 ell = u^2 + 7 v^2 and the
    sign is fixed by u/2 being a quadratic residue mod 7."""
    v = 1
    while True:
        rem = 4 * ell - 7 * v * v
        if rem <= 0:
            return None
        u = math.isqrt(rem)
        if u * u == rem:
            break
        v += 1
    return u if u * pow(2, -1, 7) % 7 in (1, 2, 4) else -u


def a_ell_cm(curve: CurveData, ell: int) -> int:
    """a(ell) via the Hecke character; agrees with a_ell_pointcount on every
    good prime (enforced for ell < 2000 by the test suite)."""
    if curve.delta % ell == 0:
        raise ValueError("bad reduction at %d; use bad_prime_a" % ell)
    chi = kronecker_symbol(curve.disc_K, ell)
    if chi == -1:
        return 0  # inert: supersingular
    if chi == 0 or ell < 5:
        return a_ell_pointcount(curve, ell)
    value = None
    if curve.disc_K == -4:
        # minimal model is y^2 = x^3 + d x with d = -c4/48
        value = _a_ell_disc4(-curve.c4, 48, ell)
    elif curve.disc_K == -3:
        # y^2 = x^3 + d with d = -c6/864, so 4d = -c6/216
        arg = Fraction(-curve.c6, 216)
        if arg.denominator == 1:
            value = _a_ell_disc3(int(arg), ell)
    elif curve.disc_K == -7 and curve.name == "49a1":
        value = _a_ell_disc7(ell)
    if value is None:
        return a_ell_pointcount(curve, ell)
    return value


# -- Hecke expansion -----------------------------------------------------------


@dataclass
class NewformCoeffs:
    curve: CurveData
    trunc: int                # coefficients valid for 1 <= n <= trunc
    a: list                   # a[0] unused, a[n] integer coefficient
    provenance: dict = field(default_factory=dict)  # prime -> route tag

    def coeff(self, n: int) -> int:
        if not 1 <= n <= self.trunc:
            raise IndexError("coefficient %d outside 1..%d" % (n, self.trunc))
        return self.a[n]

    def q_expansion(self) -> LaurentSeries:
        return LaurentSeries.rational(self.a[1:], ord=1)


def hecke_expand(curve: CurveData, T: int, prefer_pointcount_below: int = 0) -> NewformCoeffs:
    """All a(n) for n <= T from prime values and Hecke multiplicativity.

    a(1) = 1; a(ell^(k+1)) = a(ell) a(ell^k) - ell a(ell^(k-1)) at good ell;
    a(ell^k) = a(ell)^k at bad ell; a(mn) = a(m) a(n) for coprime m, n.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    spf = smallest_factor_sieve(T)
    a = [0] * (T + 1)
    a[1] = 1
    provenance = {}
    for ell in range(2, T + 1):
        if spf[ell] != ell:
            continue
        if curve.delta % ell == 0:
            a_ell = bad_prime_a(curve, ell)
            provenance[ell] = "bad-prime"
        elif ell < prefer_pointcount_below:
            a_ell = a_ell_pointcount(curve, ell)
            provenance[ell] = "pointcount"
        else:
            a_ell = a_ell_cm(curve, ell)
            provenance[ell] = "cornacchia"
        if a_ell * a_ell > 4 * ell and curve.delta % ell != 0:
            raise ArithmeticError("Hasse bound violated at %d" % ell)
        # prime powers
        power, prev, cur = ell, 1, a_ell
        while power <= T:
            a[power] = cur
            power *= ell
            if curve.delta % ell == 0:
                prev, cur = cur, cur * a_ell
            else:
                prev, cur = cur, a_ell * cur - ell * prev
    for n in range(2, T + 1):
        ell = spf[n]
        pe, m = ell, n // ell
        while m % ell == 0:
            pe *= ell
            m //= ell
        if m > 1:
            a[n] = a[pe] * a[m]
    return NewformCoeffs(curve, T, a, provenance)


def eichler(coeffs: NewformCoeffs, p: int):
    """The weight-2 Eichler integrals (E_g, E_g|V_p) as exact series.

    E_g = sum a(n)/n q^n; E_g|V_p = sum a(n)/(pn) q^(pn).  Exact rationals
    here; reduce with series_to_padic for p-adic work.
    """
    T = coeffs.trunc
    eg = antiderive_D(coeffs.q_expansion())
    ev_coeffs = []
    for n in range(p, T + 1):
        if n % p == 0:
            ev_coeffs.append(Fraction(coeffs.a[n // p], n))
        else:
            ev_coeffs.append(Fraction(0))
    ev = LaurentSeries.rational(ev_coeffs, ord=p, trunc=T + 1)
    return eg, ev


def series_to_padic(A: LaurentSeries, p: int, prec: int) -> LaurentSeries:
    """Reduce an exact-rational series coefficientwise mod p^prec."""
    from .padic import PadicScalar

    out = [PadicScalar.from_rational(c, p, prec) for c in A.coeffs]
    return LaurentSeries.padic(p, out, A.ord, A.trunc)
