"""The p-adic extraction engine.

All decompositions rest on the inert diagonal structure: E_g has coefficient
(-1)^k p^-k at q^(p^2k) and zero at odd p-power exponents, while E_g|V_p has
(-1)^k p^-(k+1) at q^(p^(2k+1)) and zero at even ones.  So for a series H
with H = lam E_g + mu E_g|V_p + (p-integral), reading H at p-power exponents
isolates lam and mu one digit at a time, and the unknown integral tail is
exactly what limits the precision of each estimate.

sqrt(-p) is never materialized: the u/v limit pairs live in Q_p + Q_p sqrt(-p)
as explicit (even, odd) component pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cmforms import (
    CurveData,
    check_context,
    eichler,
    hecke_expand,
    series_to_padic,
)
from .padic import (
    PadicScalar,
    PrecisionExhaustedError,
    ReconstructionFailure,
    rational_reconstruct,
)
from .series import PADIC, RATIONAL, LaurentSeries
from .weierstrass import periods_agm, zeta_series_of_q


def _coeff_scalar(H: LaurentSeries, n: int, p: int, digits: int) -> PadicScalar:
    if n >= H.trunc:
        raise PrecisionExhaustedError("need coefficient q^%d beyond truncation %d"
                                      % (n, H.trunc))
    c = H.coeff(n)
    if H.ring == RATIONAL:
        return PadicScalar.from_rational(c, p, digits)
    return c


@dataclass
class ShadowDecomposition:
    source: str
    p: int
    lam: PadicScalar
    mu: PadicScalar
    lam_estimates: list
    mu_estimates: list
    residual_min_floor: int | None = None
    residual_argmin: int | None = None
    residual_uncertified: int = 0

    @property
    def residual_integral(self):
        return self.residual_min_floor is not None and self.residual_min_floor >= 0


def shadow_decompose(H: LaurentSeries, curve: CurveData, p: int,
                     K=None, digits: int = 16, check_residual: bool = True,
                     source: str = "H") -> ShadowDecomposition:
    """Unique (lam, mu) with H - lam E_g - mu E_g|V_p p-integral.

    Estimate at step k: lam from  h(p^2k) (-1)^k p^k   (k >= 1, worth k digits),
    mu from h(p^(2k+1)) (-1)^k p^(k+1)  (k >= 0, worth k+1 digits).  Successive
    estimates must agree at the claimed precision; the final value carries
    min(native precision, digit claim).
    """
    T = H.trunc
    K_lam = 0
    while p ** (2 * (K_lam + 1)) < T and (K is None or K_lam < K):
        K_lam += 1
    K_mu = -1
    while p ** (2 * (K_mu + 1) + 1) < T and (K is None or K_mu < K):
        K_mu += 1
    if K_mu < 0:
        raise PrecisionExhaustedError("truncation %d cannot see q^%d" % (T, p))

    lam_estimates = []
    for k in range(1, K_lam + 1):
        h = _coeff_scalar(H, p ** (2 * k), p, digits)
        est = h.int_mul((-1) ** k * p ** k)
        lam_estimates.append((k, est.reduce_precision(k)))
    mu_estimates = []
    for k in range(0, K_mu + 1):
        h = _coeff_scalar(H, p ** (2 * k + 1), p, digits)
        est = h.int_mul((-1) ** k * p ** (k + 1))
        mu_estimates.append((k, est.reduce_precision(k + 1)))

    for (_, a), (_, b) in zip(mu_estimates, mu_estimates[1:]):
        if not a.congruent(b):
            raise ArithmeticError("mu estimates do not stabilize: %s vs %s" % (a, b))
    for (_, a), (_, b) in zip(lam_estimates, lam_estimates[1:]):
        if not a.congruent(b):
            raise ArithmeticError("lam estimates do not stabilize: %s vs %s" % (a, b))

    mu = mu_estimates[-1][1]
    lam = (lam_estimates[-1][1] if lam_estimates
           else PadicScalar.inexact_zero(p, 0))
    dec = ShadowDecomposition(source, p, lam, mu, lam_estimates, mu_estimates)
    if check_residual:
        _residual_certificate(dec, H, curve, p, digits)
    return dec


def _residual_certificate(dec, H, curve, p, digits):
    T = H.trunc
    coeffs = hecke_expand(curve, T + 8)
    eg, ev = eichler(coeffs, p)
    worst, argmin, uncert = math.inf, None, 0
    for n in range(H.ord, T):
        h = _coeff_scalar(H, n, p, digits)
        r = h
        if 1 <= n < eg.trunc:
            r = r - dec.lam * PadicScalar.from_rational(eg.coeff(n), p, digits)
        if ev.ord <= n < ev.trunc:
            r = r - dec.mu * PadicScalar.from_rational(ev.coeff(n), p, digits)
        if r.A <= 0:
            uncert += 1
            continue
        f = r.valuation_floor()
        if f < worst:
            worst, argmin = f, n
    dec.residual_min_floor = None if worst == math.inf else int(worst)
    dec.residual_argmin = argmin
    dec.residual_uncertified = uncert
    if dec.residual_min_floor is not None and dec.residual_min_floor < 0:
        raise ArithmeticError(
            "residual not integral: floor %d at q^%d" % (worst, argmin))


def alpha_limit_sequence(H: LaurentSeries, p: int, K=None, digits: int = 16):
    """The limit sequence s_m = p^(2m+1) h(p^(2m+1)) / (-p)^m.

    Termwise identical to the mu estimates of shadow_decompose; successive
    terms must agree mod p^(m+1)."""
    T = H.trunc
    out = []
    m = 0
    while p ** (2 * m + 1) < T and (K is None or m <= K):
        h = _coeff_scalar(H, p ** (2 * m + 1), p, digits)
        s = h.int_mul(p ** (2 * m + 1)).int_mul((-1) ** m).int_div(p ** m)
        out.append(s)
        m += 1
    for m, (a, b) in enumerate(zip(out, out[1:])):
        if not a.reduce_precision(m + 1).congruent(b):
            raise ArithmeticError("limit sequence fails to stabilize at m=%d" % m)
    return out


def even_limit_check(H: LaurentSeries, p: int, K=None, digits: int = 16):
    """Valuations v_p(p^2m h(p^2m)) - m for m = 1..; for decomposable H this
    diverges iff the E_g coordinate vanishes (E_g itself sits at constant 0)."""
    T = H.trunc
    out = []
    m = 1
    while p ** (2 * m) < T and (K is None or m <= K):
        h = _coeff_scalar(H, p ** (2 * m), p, digits)
        scaled = h.int_mul(p ** (2 * m))
        out.append((m, scaled.valuation_floor() - m))
        m += 1
    return out


# -- u/v limits over Q_p(sqrt(-p)) ---------------------------------------------


@dataclass
class UVReport:
    u: tuple  # (even part, sqrt(-p) part), PadicScalars
    v: tuple
    lam: PadicScalar
    mu: PadicScalar
    v_equals_minus_u: bool


def uv_limits(H: LaurentSeries, curve: CurveData, p: int, L=None,
              digits: int = 16) -> UVReport:
    """First-coefficient limits of the two beta-twisted U_p iterations.

    With beta = sqrt(-p) and h the coefficients of H, the even-index terms
      a_2m = (-p)^m (h(p^2m) - beta^-1 h(p^2m-1)),
      b_2m = (-p)^m (h(p^2m) + beta^-1 h(p^2m-1))
    converge to u and v; lam = (u+v)/2 and mu = beta (u-v)/2 recover the
    shadow decomposition coordinates."""
    T = H.trunc
    M = 1
    while p ** (2 * (M + 1)) < T and (L is None or M < L):
        M += 1
    if p ** (2 * M) >= T:
        raise PrecisionExhaustedError("window too small for the uv limits")
    a_terms, b_terms = [], []
    for m in range(1, M + 1):
        h_even = _coeff_scalar(H, p ** (2 * m), p, digits)
        h_odd = _coeff_scalar(H, p ** (2 * m - 1), p, digits)
        sign = (-1) ** m
        even_part = h_even.int_mul(sign * p ** m)
        odd_part = h_odd.int_mul(sign * p ** m).int_div(p)
        # beta^-1 = -beta/p, so -beta^-1 h = + (h/p) beta
        a_terms.append((even_part.reduce_precision(m), odd_part.reduce_precision(m)))
        b_terms.append((even_part.reduce_precision(m), (-odd_part).reduce_precision(m)))
    for (ae, ao), (be, bo) in zip(a_terms, a_terms[1:]):
        if not (ae.congruent(be) and ao.congruent(bo)):
            raise ArithmeticError("u terms fail to stabilize")
    u = a_terms[-1]
    v = b_terms[-1]
    two_inv = PadicScalar.from_rational(Fraction(1, 2), p, digits)
    lam = (u[0] + v[0]) * two_inv
    # beta (u - v)/2: (c + d beta) beta = -p d + c beta; u - v = (0, 2 u_odd)
    mu = -(u[1] - v[1]).int_mul(p) * two_inv
    v_eq = (v[0] + u[0]).is_zero and (v[1] - u[1]).is_zero
    return UVReport(u, v, lam, mu, v_eq)


# -- the Eisenstein number, p-adically ------------------------------------------


def s_number_padic(curve: CurveData, p: int, K: int = 2, digits: int = 16,
                   numeric_tol: float = 1e-8):
    """Rational reconstruction of the E_g coordinate of Z, cross-checked
    against the archimedean Eisenstein number within numeric_tol."""
    T = p ** (2 * K) + 1
    Z = zeta_series_of_q(curve, p, T)
    dec = shadow_decompose(Z, curve, p, digits=digits, check_residual=False,
                           source="zeta(E_g)")
    S = rational_reconstruct(dec.lam)
    lat = periods_agm(curve)
    if abs(complex(S) - lat.S_numeric) > numeric_tol:
        raise ArithmeticError(
            "p-adic S=%s disagrees with archimedean %s" % (S, lat.S_numeric))
    return S


def _snap_rational(x: complex, tol=1e-9, max_den=10 ** 4):
    if abs(x.imag) > tol:
        return None
    cand = Fraction(x.real).limit_denominator(max_den)
    if abs(float(cand) - x.real) > tol * max(1.0, abs(x.real)):
        return None
    return cand


# -- the end-to-end pipeline -----------------------------------------------------


@dataclass
class PipelineReport:
    curve: str
    p: int
    K: int
    T: int
    alpha: PadicScalar
    cg_alpha_valuation: int
    lam: PadicScalar
    S_rational: Fraction | None
    method_a_mu: PadicScalar
    method_b_value: PadicScalar
    agree_mod: int
    e_value: PadicScalar
    A1: PadicScalar
    A2: PadicScalar
    certificates: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.certificates.values())


def alpha_g_pipeline(curve: CurveData, p: int, K: int = 1,
                     digits: int = None) -> PipelineReport:
    """Compute alpha_g two ways and certify the structural claims.

    Method A: mu of the shadow decomposition of Z = zeta(L, E_g(q)).
    Method B: -e A2 from the crystalline decomposition in the t-coordinate.
    Certified: residual integrality, Honda types, isomorphism integrality,
    v_p(A2) = v_p(e) = 0, A/B agreement, v_p(C_g alpha) = 0, lam = S with the
    archimedean cross-check, u/v structure on the completed series.
    """
    from .formalgroup import (
        build_formal_group,
        compute_e,
        cris_decompose_t,
        eta0_primitive_t,
        group_law_from_log,
        honda_defect,
        iso_f,
    )

    verdict = check_context(curve, p)
    if not verdict.admissible:
        raise ValueError("inadmissible context: %s" % verdict.reason)
    if K < 1:
        raise ValueError("depth K must be >= 1")
    if digits is None:
        digits = max(14, 2 * K + 10)
    T = p ** (2 * K + 1) + 1
    certificates = {}

    # ---- method A: the q-side shadow decomposition of Z
    Z = zeta_series_of_q(curve, p, T)
    dec = shadow_decompose(Z, curve, p, digits=digits, source="zeta(E_g)")
    mu, lam = dec.mu, dec.lam
    certificates["residual_integral"] = dec.residual_integral
    alpha = mu.int_div(curve.degree)
    certificates["cg_alpha_unit"] = mu.valuation() == 0

    # ---- archimedean cross-check of lam = S
    lat = periods_agm(curve)
    S_snap = _snap_rational(lat.S_numeric)
    S_rational = None
    if lam.rel_prec >= 2:
        try:
            cand = rational_reconstruct(lam)
        except ReconstructionFailure:
            cand = None
        if cand is not None and abs(complex(cand) - lat.S_numeric) < 1e-8:
            S_rational = cand
    if S_rational is None and S_snap is not None and lam.congruent(
            PadicScalar.from_rational(S_snap, p, digits)):
        S_rational = S_snap
    certificates["S_matches_numeric"] = S_rational is not None

    # ---- u/v structure on the completed (mock) series
    N_plus = Z if S_rational in (0, None) else (
        Z - series_to_padic_free_eg(curve, p, T).scale(Fraction(S_rational)))
    uv = uv_limits(N_plus, curve, p, digits=digits)
    certificates["uv_v_equals_minus_u"] = uv.v_equals_minus_u
    certificates["uv_lambda_zero"] = uv.lam.is_zero
    certificates["uv_mu_matches"] = uv.mu.congruent(mu)

    # ---- the even-index vanishing data on Z: with a vanishing E_g coordinate
    # the coefficients of Z at even p-power exponents are themselves integral
    even = even_limit_check(Z, p, digits=digits)
    if S_rational == 0:
        certificates["even_coefficients_integral"] = all(v >= m for m, v in even)
    else:
        certificates["even_coefficients_integral"] = all(v >= 0 for m, v in even)

    # ---- limit sequence cross-check (identical to the mu estimates)
    seq = alpha_limit_sequence(Z, p, digits=digits)
    certificates["limit_sequence_matches"] = all(
        s.congruent(est) for s, (_, est) in zip(seq, dec.mu_estimates))

    # ---- Honda types
    coeffs = hecke_expand(curve, min(5000, T) + 8)
    eg, _ = eichler(coeffs, p)
    defect_eg, res_eg = honda_defect(eg, p, min(5000, T))
    T_t = p ** (2 * K + 2) + 1
    fg = build_formal_group(curve, p, T_t, digits)
    defect_log, _ = honda_defect(fg.lam.truncate(min(2000, T_t)), p, min(2000, T_t))
    certificates["honda_eg"] = defect_eg >= 1
    certificates["honda_log"] = defect_log >= 1

    # ---- isomorphism integrality and the group law
    T_iso = min(2000, T - 1)
    f, iso_cert = iso_f(curve, p, T_iso, digits)
    certificates["f_integral"] = iso_cert.integral and iso_cert.leading_is_q
    certificates["f_log_identity"] = iso_cert.log_matches_eichler
    _, law_integral = group_law_from_log(eg.truncate(14), 12, p)
    certificates["group_law_integral"] = law_integral

    # ---- method B: crystalline decomposition
    F_prim = eta0_primitive_t(fg)
    cris = cris_decompose_t(F_prim, fg, K)
    A1, A2 = cris.A1, cris.A2
    certificates["A2_unit"] = A2.valuation() == 0
    certificates["cris_residual_integral"] = cris.residual_min_floor >= 0
    e_val, e_dec = compute_e(curve, p, T - 1, digits)
    certificates["e_unit"] = e_val.valuation() == 0
    method_b = -(e_val * A2)
    agree = mu.congruent(method_b)
    joint = int(min(mu.A, method_b.A))
    certificates["methods_agree"] = agree and joint >= 2
    certificates["A1_matches_lambda"] = (-A1).congruent(lam)

    return PipelineReport(
        curve=curve.name, p=p, K=K, T=T,
        alpha=alpha, cg_alpha_valuation=int(mu.valuation()),
        lam=lam, S_rational=S_rational,
        method_a_mu=mu, method_b_value=method_b, agree_mod=joint,
        e_value=e_val, A1=A1, A2=A2, certificates=certificates,
    )


def series_to_padic_free_eg(curve: CurveData, p: int, T: int) -> LaurentSeries:
    """E_g as an exact rational series out to the window of Z."""
    coeffs = hecke_expand(curve, T + 8)
    eg, _ = eichler(coeffs, p)
    return eg.truncate(T)
