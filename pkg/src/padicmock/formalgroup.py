"""Formal group of the curve, Honda-type checks, and the crystalline side.

Everything here happens on the halved short model y^2 = x^3 + A4 x + A6
(A4 = -c4/48, A6 = -c6/864, units at p >= 5) with parameter t = -x/y,
which is the same parameter as -2x/y on the quarter-period model.  The
standard w = -1/y expansion satisfies w = t^3 + A4 t w^2 + A6 w^3 and is
solved by Newton iteration; everything downstream (x(t), the invariant
differential, the logarithm) is division-free except for the single 1/n of
the antiderivative, so the t-side carries full working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .cmforms import CurveData, check_context, eichler, hecke_expand, series_to_padic
from .padic import PadicScalar, PrecisionExhaustedError
from .series import (
    PADIC,
    RATIONAL,
    LaurentSeries,
    antiderive_D,
    compose,
    derive_var,
    inv,
    reverse,
)
from .weierstrass import _x_integers, y_series_of_q


@dataclass
class FormalGroupData:
    curve: CurveData
    p: int
    digits: int          # working absolute precision on the t-side
    T_t: int
    w: LaurentSeries     # w(t) = -1/y
    x: LaurentSeries     # x(t) = t / w
    lam_prime: LaurentSeries  # invariant differential coefficients (integral)
    lam: LaurentSeries   # formal logarithm, lam'(0) = 1

    def log_coeff_times_n(self, n: int) -> PadicScalar:
        """n * [t^n] lam, i.e. the integral numerator b_n."""
        return self.lam.coeff(n).int_mul(n)


def _halved_model(curve: CurveData, ring, p=None, prec=None):
    if ring == RATIONAL:
        return Fraction(-curve.c4, 48), Fraction(-curve.c6, 864)
    a4 = PadicScalar.from_rational(Fraction(-curve.c4, 48), p, prec)
    a6 = PadicScalar.from_rational(Fraction(-curve.c6, 864), p, prec)
    return a4, a6


def _w_series(a4, a6, ring, p, T_t):
    """Solve w = t^3 + a4 t w^2 + a6 w^3 by Newton doubling."""
    if ring == RATIONAL:
        one = Fraction(1)
        mk = lambda c, o: LaurentSeries.rational([c], o)
    else:
        one = PadicScalar.from_integer(1, p, 10 ** 6)
        mk = lambda c, o: LaurentSeries.padic(p, [c], o)
    t3 = mk(one, 3)
    w = t3._with_trunc(4)
    known = 4
    while known < T_t:
        known = min(2 * known, T_t)
        wk = w._with_trunc(known)
        w2 = (wk * wk).truncate(known)
        w3 = (w2 * wk).truncate(known)
        f = wk - t3._with_trunc(known) - w2.shift(1).scale(a4).truncate(known) \
            - w3.scale(a6).truncate(known)
        f = f.strip()
        if f.support_ord() >= f.trunc:
            w = wk
            continue
        fprime = mk(one, 0)._with_trunc(known) \
            - wk.shift(1).scale(a4).scale(2).truncate(known) \
            - w2.scale(a6).scale(3).truncate(known)
        w = (wk - f * inv(fprime)).truncate(known)
    return w._with_trunc(T_t)


def build_formal_group(curve: CurveData, p: int, T_t: int, digits: int = 14,
                       ring=PADIC) -> FormalGroupData:
    """Formal group data to t-precision T_t.

    In p-adic mode every series is exactly reduced mod p^digits; the only
    precision loss is v_p(n) on the n-th logarithm coefficient.  Integrality
    of the invariant differential and the supersingular valuation pattern
    v(b_p) >= 1, v(b_p^2) = 1 are asserted.
    """
    if ring == PADIC:
        verdict = check_context(curve, p)
        if not verdict.admissible:
            raise ValueError("inadmissible context: %s" % verdict.reason)
    prec = digits
    a4, a6 = _halved_model(curve, ring, p, prec)
    w = _w_series(a4, a6, ring, p if ring == PADIC else None, T_t + 3)
    x = (LaurentSeries.rational([1], 1) if ring == RATIONAL
         else LaurentSeries.padic(p, [PadicScalar.from_integer(1, p, prec)], 1))
    x = (x._with_trunc(2) * inv(w)).truncate(T_t)          # x = t / w, ord -2
    xprime = derive_var(x)
    half = Fraction(-1, 2) if ring == RATIONAL else \
        PadicScalar.from_rational(Fraction(-1, 2), p, prec)
    lam_prime = (xprime * w).truncate(T_t - 1).scale(half)  # x' / (2y) = -x' w / 2
    lead = lam_prime.coeff(0)
    if ring == RATIONAL:
        assert lead == 1, "normalization lam'(0) = 1 failed"
    else:
        assert lead.congruent(PadicScalar.from_integer(1, p, prec))
    lam = antiderive_D(lam_prime.shift(1)).truncate(T_t)
    fg = FormalGroupData(curve, p if ring == PADIC else 0,
                         digits if ring == PADIC else 0, T_t, w, x, lam_prime, lam)
    if ring == PADIC:
        _check_integrality(fg)
    return fg


def _check_integrality(fg: FormalGroupData):
    floor, arg = fg.lam_prime.min_valuation_floor()
    if floor < 0:
        raise ArithmeticError("invariant differential not integral at t^%d" % arg)
    p = fg.p
    if fg.T_t > p:
        bp = fg.log_coeff_times_n(p)
        if bp.valuation_floor() < 1:
            raise ArithmeticError("v(b_p) < 1: reduction is not supersingular")
    if fg.T_t > p * p:
        bp2 = fg.log_coeff_times_n(p * p)
        if bp2.valuation() != 1:
            raise ArithmeticError("v(b_{p^2}) != 1: height-2 pattern broken")


def formal_exp(fg: FormalGroupData) -> LaurentSeries:
    """Compositional inverse of the logarithm (exact mode or small windows)."""
    return reverse(fg.lam)


# -- Honda type ---------------------------------------------------------------


def honda_defect(A: LaurentSeries, p: int, T: int):
    """min_n v_p of the coefficients of (phi^2 + p) A up to the truncation,
    phi acting by substituting the p-th power of the variable.

    Returns (defect, residual series).  A must be q + O(q^2)-normalized.
    Certified >= 1 means Honda type X^2 + p.
    """
    T = min(T, A.trunc)
    out = []
    exact = A.ring == RATIONAL
    for n in range(1, T):
        if n % (p * p) == 0:
            c = A.coeff(n // (p * p))
        else:
            c = Fraction(0) if exact else PadicScalar.exact_zero(A.p)
        pa = A.coeff(n) * Fraction(p) if exact else A.coeff(n).int_mul(p)
        out.append(c + pa)
    res = LaurentSeries(A.ring, out, 1, T, A.p)
    best = math.inf
    for n in range(1, T):
        c = res.coeff(n)
        if exact:
            if c != 0:
                v = _vp_fraction(c, p)
                best = min(best, v)
        else:
            best = min(best, c.valuation_floor())
    return best, res


def _vp_fraction(x: Fraction, p: int) -> int:
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


# -- the formal group law from the Eichler integral ---------------------------


def group_law_from_log(eg: LaurentSeries, d: int, p: int):
    """F(X, Y) = exp(E(X) + E(Y)) to total degree d, with the p-integrality
    verdict on every coefficient (exact-rational computation)."""
    expg = reverse(eg.truncate(d + 1))

    def bivar_zero():
        return [[Fraction(0)] * (d + 1) for _ in range(d + 1)]

    def bivar_mul(A, B):
        out = bivar_zero()
        for i in range(d + 1):
            for j in range(d + 1 - i):
                if not A[i][j]:
                    continue
                for k in range(d + 1 - i - j):
                    for l in range(d + 1 - i - j - k):
                        if B[k][l]:
                            out[i + k][j + l] += A[i][j] * B[k][l]
        return out

    S = bivar_zero()
    for n in range(1, d + 1):
        S[n][0] += eg.coeff(n)
        S[0][n] += eg.coeff(n)
    # Horner in S
    F = bivar_zero()
    for n in range(d, 0, -1):
        F = bivar_mul(F, S)
        c = expg.coeff(n)
        F[0][0] += c
    F = bivar_mul(F, S)
    integral = all(
        F[i][j].denominator % p != 0
        for i in range(d + 1) for j in range(d + 1 - i)
    )
    return F, integral


# -- the isomorphism f and the crystalline decomposition -----------------------


@dataclass
class IsoCertificate:
    T: int
    integral: bool
    worst_valuation: int
    log_matches_eichler: bool
    leading_is_q: bool


def iso_f_exact(curve: CurveData, T: int) -> LaurentSeries:
    """f(q) = -2 x(q) / y(q), the t-coordinate pullback, as an exact series.

    This is exp of the curve's formal group evaluated on the Eichler
    integral: applying the formal logarithm gives back E_g, which iso_f
    certifies p-adically.
    """
    xs, _ = _x_integers(curve, T + 4)
    b2 = curve.b_invariants[0]
    vals = [Fraction(c) for c in xs]
    vals[2] += Fraction(b2, 12)
    xp = LaurentSeries.rational(vals, ord=-2, trunc=T + 2)
    y = y_series_of_q(curve, T + 4)
    return (xp.scale(-2) * inv(y)).truncate(T + 1)


def iso_f(curve: CurveData, p: int, T: int, digits: int = 14):
    """The isomorphism series with its integrality certificate.

    Checks: f = q + O(q^2); every coefficient is p-integral; lam(f) = E_g
    to the truncation at working precision.
    """
    verdict = check_context(curve, p)
    if not verdict.admissible:
        raise ValueError("inadmissible context: %s" % verdict.reason)
    f = iso_f_exact(curve, T)
    worst = 0
    for n in range(1, f.trunc):
        c = f.coeff(n)
        if c != 0:
            worst = min(worst, _vp_fraction(c, p))
    leading = f.coeff(1) == 1 and f.support_ord() == 1
    fg = build_formal_group(curve, p, T + 2, digits)
    f_pad = series_to_padic(f.truncate(T + 1), p, digits)
    lam_f = compose_scaled(fg.lam.truncate(T + 1), f_pad, p, digits)
    coeffs = hecke_expand(curve, T + 8)
    eg, _ = eichler(coeffs, p)
    eg_pad = series_to_padic(eg.truncate(T + 1), p, digits)
    matches = lam_f.congruent(eg_pad)
    cert = IsoCertificate(T, worst >= 0, worst, matches, leading)
    return f, cert


def _log_floor(T, p):
    k = 0
    while p ** (k + 1) <= T:
        k += 1
    return k


def compose_scaled(lam: LaurentSeries, u: LaurentSeries, p: int, digits: int):
    """lam(u) for a logarithm-like outer series with denominators at most
    p^floor(log_p T): pre-scale to integral coefficients and level their
    precisions, so every multiplication stays on the uniform fast path,
    then unscale."""
    shift = _log_floor(lam.trunc, p)
    scaled = lam.scale(p ** shift)
    out = []
    for c in scaled.coeffs:
        if c.valuation_floor() < 0:
            raise PrecisionExhaustedError("scaling did not clear denominators")
        out.append(c.reduce_precision(digits))
    scaled = LaurentSeries.padic(p, out, scaled.ord, scaled.trunc)
    out = compose(scaled, u)
    unscale = PadicScalar.from_rational(Fraction(1, p ** shift), p, digits + shift)
    return out.scale(unscale)


@dataclass
class CrisDecomposition:
    A1: PadicScalar
    A2: PadicScalar
    pair_estimates: list       # per-pair (k, A1, A2)
    residual_min_floor: int
    uncertified: int           # exponents whose residual precision hit zero


def eta0_primitive_t(fg: FormalGroupData) -> LaurentSeries:
    """Primitive of the second-kind part: F(t) with F' = x lam' - t^-2 and
    F(0) = 0; the double pole cancels identically."""
    dF = (fg.x * fg.lam_prime).truncate(fg.T_t - 1)
    lead = dF.coeff(-2)
    one = (Fraction(1) if fg.w.ring == RATIONAL
           else PadicScalar.from_integer(1, fg.p, fg.digits))
    if fg.w.ring == RATIONAL:
        assert lead == 1, "double pole fails to cancel"
        minus = LaurentSeries.rational([-1], -2)
    else:
        assert lead.congruent(one)
        minus = LaurentSeries.padic(fg.p, [PadicScalar.from_integer(-1, fg.p, fg.digits)], -2)
    dF = dF + minus._with_trunc(dF.trunc)
    res = dF.coeff(-1)
    if fg.w.ring == RATIONAL:
        assert res == 0, "residue obstruction: eta_0 is not second kind"
    else:
        assert res.is_zero
    # integrate dF/dt: coefficient at t^e contributes t^(e+1)/(e+1); the
    # constant of integration is zero and the t^-1 slot only carries the
    # to-precision-cancelled double pole
    out = []
    for target in range(-1, dF.trunc + 1):
        if target == 0:
            out.append(Fraction(0) if fg.w.ring == RATIONAL
                       else PadicScalar.exact_zero(fg.p))
            continue
        e = target - 1
        c = dF.coeff(e) if e < dF.trunc else None
        if c is None:
            break
        out.append(c / Fraction(target) if fg.w.ring == RATIONAL else c.int_div(target))
    F = LaurentSeries(fg.w.ring, out, -1, len(out) - 1, fg.p if fg.w.ring == PADIC else None)
    return F


def lam_vp_primitive(fg: FormalGroupData) -> LaurentSeries:
    """lam(t^p)/p, the primitive of the Frobenius-divided basis differential."""
    p = fg.p if fg.w.ring == PADIC else None
    src = fg.lam
    out = []
    P = fg.p
    for n in range(1, fg.T_t):
        if n % P == 0 and n // P < src.trunc:
            c = src.coeff(n // P)
            out.append(c / Fraction(P) if fg.w.ring == RATIONAL else c.int_div(P))
        else:
            out.append(Fraction(0) if fg.w.ring == RATIONAL else PadicScalar.exact_zero(p))
    return LaurentSeries(fg.w.ring, out, 1, fg.T_t, p)


def cris_decompose_t(F_prim: LaurentSeries, fg: FormalGroupData, K: int) -> CrisDecomposition:
    """Coordinates (A1, A2) of the second-kind primitive against the basis
    primitives lam(t) and lam(t^p)/p, solved from 2x2 systems at the
    exponent pairs (p^(2k+1), p^(2k+2)) for k = 0..K.

    Row i reads F = A1 lam + A2 lam(t^p)/p + O(1) at t^(p^i); the unknown
    integral tail limits pair k to p^(k+1) digits, which is what the
    estimate claims.
    """
    p = fg.p
    lam, lamvp = fg.lam, lam_vp_primitive(fg)
    estimates = []
    for k in range(K + 1):
        i1, i2 = p ** (2 * k + 1), p ** (2 * k + 2)
        if i2 >= min(F_prim.trunc, fg.T_t):
            break
        m11, m12 = lam.coeff(i1), lamvp.coeff(i1)
        m21, m22 = lam.coeff(i2), lamvp.coeff(i2)
        r1, r2 = F_prim.coeff(i1), F_prim.coeff(i2)
        det = m11 * m22 - m12 * m21
        A1 = (r1 * m22 - r2 * m12) / det
        A2 = (m11 * r2 - m21 * r1) / det
        claim = k + 1
        estimates.append((k, A1.reduce_precision(claim), A2.reduce_precision(claim)))
    if not estimates:
        raise PrecisionExhaustedError("no exponent pair inside the window")
    for (_, a1a, a2a), (_, a1b, a2b) in zip(estimates, estimates[1:]):
        if not (a1a.congruent(a1b) and a2a.congruent(a2b)):
            raise ArithmeticError("pair estimates fail to stabilize")
    _, A1, A2 = estimates[-1]
    residual = F_prim - lam.truncate(F_prim.trunc).scale(A1) \
        - lamvp.truncate(F_prim.trunc).scale(A2)
    worst, uncert = 0, 0
    for n in range(residual.ord, min(residual.trunc, fg.T_t)):
        c = residual.coeff(n)
        if c.A <= 0:
            uncert += 1
            continue
        worst = min(worst, c.valuation_floor())
    if worst < 0:
        raise ArithmeticError("crystalline residual is not integral (floor %d)" % worst)
    return CrisDecomposition(A1, A2, estimates, worst, uncert)


def compute_e(curve: CurveData, p: int, T: int, digits: int = 16):
    """The Frobenius scaling constant e with its certificate.

    Decomposes lam(f(q)^p)/p against the Eichler basis; the E_g coordinate
    must vanish to available precision and e must be a unit.
    """
    from .decomp import shadow_decompose

    xs, coeffs = _x_integers(curve, T + 4)
    b2 = curve.b_invariants[0]
    vals = [Fraction(c) for c in xs]
    vals[2] += Fraction(b2, 12)
    xp = series_to_padic(LaurentSeries.rational(vals, ord=-2, trunc=T + 2), p, digits)
    y = series_to_padic(y_series_of_q(curve, T + 4).truncate(T), p, digits)
    f = (xp.scale(-2) * inv(y)).truncate(T + 1)
    u = _pow_series(f, p)
    T_lam = T // p + 2
    fg = build_formal_group(curve, p, T_lam, digits)
    lam_fp = compose_scaled(fg.lam, u.truncate(T + 1), p, digits)
    H = lam_fp.scale(PadicScalar.from_rational(Fraction(1, p), p, digits))
    dec = shadow_decompose(H.truncate(T + 1), curve, p)
    if not dec.lam.is_zero:
        raise ArithmeticError("E_g coordinate of the Frobenius primitive is nonzero")
    e = dec.mu
    if e.valuation() != 0:
        raise ArithmeticError("e is not a p-adic unit")
    return e, dec


def _pow_series(f: LaurentSeries, n: int) -> LaurentSeries:
    out = None
    base = f
    while n:
        if n & 1:
            out = base if out is None else (out * base)
        n >>= 1
        if n:
            base = (base * base)
    return out
