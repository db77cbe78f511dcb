import io
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padicmock._convolve import conv_int, _schoolbook
from padicmock.padic import PadicScalar
from padicmock.series import (
    PADIC,
    RATIONAL,
    LaurentSeries,
    RingMismatchError,
    antiderive_D,
    compose,
    derive_D,
    inv,
    op_Tkp,
    op_Up,
    op_Vp,
    read_series,
    reverse,
    twist,
    write_series,
)

P = 7


def rat(coeffs, ord=0, trunc=None):
    return LaurentSeries.rational(coeffs, ord, trunc)


def pad(residues, ord=0, prec=10, shift=0):
    return LaurentSeries.from_residues(P, residues, prec, ord=ord, shift=shift)


class TestConvolve:
    @given(st.lists(st.integers(min_value=-10 ** 12, max_value=10 ** 12), min_size=1, max_size=80),
           st.lists(st.integers(min_value=-10 ** 12, max_value=10 ** 12), min_size=1, max_size=80))
    @settings(max_examples=120)
    def test_matches_schoolbook(self, a, b):
        assert conv_int(a, b) == _schoolbook(a, b, len(a) + len(b) - 1)

    def test_limit(self):
        a = list(range(1, 40))
        b = list(range(-19, 20))
        assert conv_int(a, b, limit=7) == _schoolbook(a, b, len(a) + len(b) - 1)[:7]

    def test_forces_packed_path(self):
        # above the schoolbook cutoff on both sides
        a = [(-3) ** i % 10 ** 6 - 500000 for i in range(64)]
        b = [(5 ** i + i) % 10 ** 6 - 123456 for i in range(64)]
        assert conv_int(a, b) == _schoolbook(a, b, 127)


class TestMul:
    def test_laurent_times_poly(self):
        A = rat([1, 1], ord=-1)  # q^-1 + 1
        B = rat([1, -1], ord=1)  # q - q^2
        C = A * B
        assert [C.coeff(n) for n in range(0, 2)] == [1, 0]
        assert C.trunc == 2

    def test_unit_inverse_roundtrip(self):
        A = rat([3, 1, 4, 1, 5, 9, 2, 6], ord=0)
        prod = A * inv(A)
        assert prod.coeff(0) == 1
        assert all(prod.coeff(n) == 0 for n in range(1, prod.trunc))

    def test_g_squared_coefficient(self):
        # 32a1 point-count coefficients a(1)=1, a(2)=a(3)=a(4)=0, a(5)=-2
        g = rat([1, 0, 0, 0, -2, 0], ord=1)
        q6 = (g * g).coeff(6)
        assert q6 == 2 * 1 * (-2)
        assert q6 == -4

    def test_padic_uniform_matches_rational(self):
        coeffs = [3, -1, 4, -1, 5, -9]
        A = rat(coeffs, ord=0)
        B = rat(coeffs[::-1], ord=2)
        Ap = pad(coeffs)
        Bp = pad(coeffs[::-1], ord=2)
        prod_exact = A * B
        prod_padic = Ap * Bp
        for n in range(prod_padic.ord, prod_padic.trunc):
            want = PadicScalar.from_rational(prod_exact.coeff(n), P, prod_padic.coeff(n).A)
            assert prod_padic.coeff(n).congruent(want)

    def test_ring_mismatch(self):
        with pytest.raises(RingMismatchError):
            rat([1]) * pad([1])

    def test_trunc_rule(self):
        A = rat([1, 2, 3], ord=-1)  # trunc 2
        B = rat([4, 5], ord=1)      # trunc 3
        assert (A * B).trunc == min(A.trunc + B.ord, B.trunc + A.ord)


class TestComposeReverse:
    def test_reverse_catalan_signs(self):
        A = rat([1, 1], ord=1)._with_trunc(8)  # q + q^2
        R = reverse(A)
        # Lagrange inversion oracle: catalan numbers with alternating signs
        catalan = [1, 1, 2, 5, 14, 42, 132]
        for n in range(1, 8):
            assert R.coeff(n) == (-1) ** (n + 1) * catalan[n - 1]

    def test_compose_reverse_is_identity(self):
        rng = random.Random(7)
        A = rat([1] + [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(10)],
                ord=1)
        R = reverse(A)
        C = compose(A, R)
        assert C.coeff(1) == 1
        assert all(C.coeff(n) == 0 for n in range(2, C.trunc))

    def test_compose_laurent_principal_part(self):
        # 1/z composed with E-like series begins at q^-1
        zinv = rat([1], ord=-1)._with_trunc(3)
        E = rat([1, Fraction(1, 2), Fraction(1, 3)], ord=1)
        C = compose(zinv, E)
        assert C.ord == -1
        assert C.coeff(-1) == 1

    def test_compose_associative(self):
        A = rat([2, 1, -1, 3], ord=0)
        B = rat([1, 4, -2, 1], ord=1)
        C = rat([1, -1, 1, -1], ord=1)
        left = compose(compose(A, B), C)
        right = compose(A, compose(B, C))
        assert left.congruent(right)


class TestOperators:
    def test_derive_antiderive_roundtrip(self):
        A = rat([5, -3, 7, 2], ord=1)
        assert antiderive_D(derive_D(A)).congruent(A)

    def test_antiderive_rejects_constant(self):
        with pytest.raises(ValueError):
            antiderive_D(rat([1, 1], ord=0))

    def test_up_vp_composition(self):
        A = rat([3, 1, 4, 1, 5, 9, 2, 6, 5, 3], ord=1)
        assert op_Up(op_Vp(A, P), P).congruent(A)

    def test_vp_monomial(self):
        A = rat([1], ord=1)._with_trunc(3)
        V = op_Vp(A, 7)
        assert V.coeff(7) == 1
        assert V.support_ord() == 7

    def test_vp_up_keeps_divisible_exponents(self):
        A = rat(list(range(1, 15)), ord=1)
        W = op_Vp(op_Up(A, 3), 3)
        for n in range(W.ord, W.trunc):
            assert W.coeff(n) == (A.coeff(n) if n % 3 == 0 and n < A.trunc else 0)

    def test_twist_small(self):
        A = rat([1, 1, 1], ord=1)
        T = twist(A, -4)
        assert [T.coeff(n) for n in (1, 2, 3)] == [1, 0, -1]

    def test_twist_twice_kills_chi_zero(self):
        A = rat(list(range(1, 13)), ord=1)
        TT = twist(twist(A, -3), -3)
        for n in range(1, 13):
            expect = 0 if n % 3 == 0 else A.coeff(n)
            assert TT.coeff(n) == expect

    def test_tkp_on_generic_series(self):
        A = rat([1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14], ord=1)
        T = op_Tkp(A, 2, 7)
        # window shrinks to ceil(trunc/7) from the U_p side
        assert T.trunc == 3
        assert T.coeff(1) == A.coeff(7) + 7 * 0
        assert T.coeff(2) == A.coeff(14) + 7 * 0

    def test_padic_antiderive_loses_at_p_divisible_indices(self):
        A = pad([1] * 14, ord=1, prec=10)
        B = antiderive_D(A)
        assert B.coeff(3).A == 10
        assert B.coeff(7).A == 9
        assert B.coeff(7).v == -1


class TestSeriesFile:
    def test_rational_roundtrip(self):
        A = rat([Fraction(1, 3), 2, Fraction(-7, 5)], ord=-1)
        buf = io.StringIO()
        write_series(A, buf)
        buf.seek(0)
        B = read_series(buf)
        assert B.ring == RATIONAL and B.ord == A.ord and B.trunc == A.trunc
        assert B.congruent(A)

    def test_padic_roundtrip(self):
        A = LaurentSeries.padic(P, [
            PadicScalar.from_rational(Fraction(3, 7), P, 5),
            PadicScalar.exact_zero(P),
            PadicScalar.inexact_zero(P, 4),
            PadicScalar.from_integer(98, P, 6),
        ], ord=0)
        buf = io.StringIO()
        write_series(A, buf)
        buf.seek(0)
        B = read_series(buf)
        assert B.ring == PADIC and B.p == P
        for n in range(A.ord, A.trunc):
            a, b = A.coeff(n), B.coeff(n)
            assert (a.u, a.A == b.A or (a.A, b.A)) and a.congruent(b)
            assert a.valuation_floor() == b.valuation_floor()


@st.composite
def small_rational_series(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    ord_ = draw(st.integers(min_value=-2, max_value=2))
    coeffs = [Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 4)))
              for _ in range(n)]
    return rat(coeffs, ord=ord_)


class TestAlgebraLaws:
    @given(small_rational_series(), small_rational_series())
    @settings(max_examples=120)
    def test_mul_commutative(self, A, B):
        assert (A * B).congruent(B * A)

    @given(small_rational_series(), small_rational_series(), small_rational_series())
    @settings(max_examples=120)
    def test_mul_associative_to_joint_window(self, A, B, C):
        assert ((A * B) * C).congruent(A * (B * C))

    @given(small_rational_series())
    @settings(max_examples=80)
    def test_up_vp_identity(self, A):
        if A.ord < 0:
            A = A.shift(-A.ord)
        assert op_Up(op_Vp(A, 5), 5).congruent(A)
