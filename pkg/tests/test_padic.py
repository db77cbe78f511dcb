import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padicmock.padic import (
    PadicScalar,
    PrecisionExhaustedError,
    PrimeMismatchError,
    ReconstructionFailure,
    kronecker_symbol,
    normalize,
    rational_reconstruct,
)

P = 7


def scal(m, scale=0, A=12, p=P):
    return PadicScalar.from_rational(Fraction(m) * Fraction(p) ** scale, p, A)


class TestNormalize:
    def test_shift_out_unit(self):
        x = normalize(14, 0, 7, 5)
        assert (x.v, x.u, x.A) == (1, 2, 5)

    def test_exact_zero(self):
        x = normalize(0, 0, 7, 5)
        assert x.is_exact_zero

    def test_negative_scale(self):
        x = normalize(49, -2, 7, 3)
        assert (x.v, x.u, x.A) == (0, 1, 3)

    def test_unresolvable_raises(self):
        with pytest.raises(PrecisionExhaustedError):
            normalize(7 ** 5, 0, 7, 4)


class TestArithmetic:
    def test_add_precision_is_min(self):
        x = PadicScalar.from_integer(3, P, 10)
        y = PadicScalar.from_integer(4, P, 6)
        assert (x + y).A == 6
        assert (x + y).lift() == 7 * 1  # v=1 unit 1

    def test_mul_valuations_add(self):
        x = scal(14)  # v=1
        y = scal(Fraction(3, 7))  # v=-1
        assert (x * y).valuation() == 0
        assert (x * y).lift() == 6

    def test_cancellation_leaves_inexact_zero(self):
        x = PadicScalar.from_integer(5, P, 8)
        z = x - PadicScalar.from_integer(5, P, 8)
        assert z.is_zero and not z.is_exact_zero and z.A == 8
        with pytest.raises(PrecisionExhaustedError):
            z.valuation()

    def test_inexact_zero_poisons_division(self):
        z = PadicScalar.inexact_zero(P, 4)
        with pytest.raises(PrecisionExhaustedError):
            scal(1) / z

    def test_divide_by_exact_zero(self):
        with pytest.raises(ZeroDivisionError):
            scal(1) / PadicScalar.exact_zero(P)

    def test_division_lowers_absolute_precision(self):
        x = PadicScalar.from_integer(3, P, 10)
        y = PadicScalar.from_integer(49, P, 10)  # v = 2
        q = x / y
        assert q.v == -2 and q.A == 10 - 2 * 2

    def test_prime_mismatch_is_hard_fault(self):
        with pytest.raises(PrimeMismatchError):
            scal(1) + scal(1, p=11)

    def test_congruent_only_to_joint_precision(self):
        x = PadicScalar.from_integer(3, P, 4)
        y = PadicScalar.from_integer(3 + 7 ** 5, P, 9)
        assert x.congruent(y)
        z = PadicScalar.from_integer(3 + 7 ** 3, P, 9)
        assert not x.congruent(z)
        assert x.congruent(z.reduce_precision(3))

    def test_repr_textual_form(self):
        assert repr(normalize(14, 0, 7, 5)) == "2 * 7^1 (mod 7^5)"


@st.composite
def scalars(draw, p=P):
    m = draw(st.integers(min_value=-(7 ** 9), max_value=7 ** 9))
    scale = draw(st.integers(min_value=-3, max_value=3))
    A = draw(st.integers(min_value=2, max_value=14))
    return PadicScalar.from_rational(Fraction(m) * Fraction(p) ** scale, p, A)


class TestRingLaws:
    @given(scalars(), scalars(), scalars())
    @settings(max_examples=200)
    def test_distributive_to_tracked_precision(self, x, y, z):
        left = (x + y) * z
        right = x * z + y * z
        assert left.congruent(right)

    @given(scalars(), scalars())
    @settings(max_examples=200)
    def test_mul_commutes(self, x, y):
        assert (x * y).congruent(y * x)

    @given(scalars(), scalars())
    @settings(max_examples=200)
    def test_valuation_additive_when_known(self, x, y):
        if x.is_zero or y.is_zero:
            return
        assert (x * y).valuation_floor() == x.valuation() + y.valuation()


class TestKronecker:
    def test_spec_values(self):
        assert kronecker_symbol(-4, 7) == -1
        assert kronecker_symbol(-4, 2) == 0
        assert kronecker_symbol(-4, 5) == 1

    def test_euler_criterion_on_odd_primes(self):
        for D in (-3, -4, -7, -8, -11, 5, 13):
            for ell in (3, 5, 7, 11, 13, 17, 19, 23, 29):
                if D % ell == 0:
                    assert kronecker_symbol(D, ell) == 0
                    continue
                euler = pow(D % ell, (ell - 1) // 2, ell)
                expected = 1 if euler == 1 else -1
                assert kronecker_symbol(D, ell) == expected, (D, ell)

    @given(st.integers(min_value=-400, max_value=400),
           st.integers(min_value=1, max_value=200),
           st.integers(min_value=1, max_value=200))
    @settings(max_examples=150)
    def test_multiplicative_in_n(self, D, m, n):
        if D % 4 not in (0, 1):
            return
        assert kronecker_symbol(D, m * n) == kronecker_symbol(D, m) * kronecker_symbol(D, n)


class TestRationalReconstruct:
    def test_exact_zero(self):
        assert rational_reconstruct(PadicScalar.exact_zero(P)) == 0

    def test_inverse_of_three(self):
        residue = pow(3, -1, 7 ** 6)
        x = PadicScalar.from_integer(residue, 7, 6)
        assert rational_reconstruct(x) == Fraction(1, 3)

    def test_generic_residue_fails(self):
        # Residue checked by brute force to admit no representative a/b with
        # |a|, |b| <= isqrt(7^3 / 2) mod 7^3.
        residue = 15
        m, bound = 7 ** 3, math.isqrt(7 ** 3 // 2)
        assert not any(
            (a - b * residue) % m == 0 and math.gcd(abs(a), b) == 1
            for a in range(-bound, bound + 1) if a != 0
            for b in range(1, bound + 1) if b % 7 != 0
        )
        with pytest.raises(ReconstructionFailure):
            rational_reconstruct(PadicScalar.from_integer(residue, 7, 3))

    @given(st.integers(min_value=-9, max_value=9),
           st.integers(min_value=1, max_value=9),
           st.integers(min_value=-2, max_value=2))
    @settings(max_examples=200)
    def test_left_inverse_of_embedding(self, num, den, scale):
        if num == 0 or den % P == 0:
            return
        x = Fraction(num, den) * Fraction(P) ** scale
        embedded = PadicScalar.from_rational(x, P, 8 + scale)
        assert rational_reconstruct(embedded) == x
