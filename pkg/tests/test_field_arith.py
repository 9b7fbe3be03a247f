"""Tests for Z_F arithmetic, Shintani reduction, factorization and residue symbols"""

import random
from decimal import Decimal
from fractions import Fraction

import pytest

from errors import EvenPrime, UnsupportedField
from field_arith import (
    QuadraticField, divmod_euclid, embed, embed_interval, factor, field, gcd, in_shintani_cone, is_square_mod4,
    is_totally_negative, is_totally_positive, normalize_generator, normalize_prime, prime_elements_above,
    primes_up_to, quadratic_character, residue_image, shintani_reduce, sign_of_surd,
)


class TestQuadraticField:
    """Field constants for d = 5"""

    def test_w_relation(self, F):
        w = F.w
        assert w * w == F(1, 1)

    def test_units(self, F):
        assert F.fundamental_unit == F(0, 1)
        assert F.eps == F(2, -1)
        assert F.gamma == 3
        assert F.eps.norm() == 1

    def test_eps_embedding_order(self, F):
        v1, v2 = embed(F.eps)
        assert v1 < 1 < v2
        assert abs(float(v1) - 0.3819660112501051) < 1e-12
        assert abs(float(v2) - 2.618033988749895) < 1e-12

    def test_embedding_enclosures_are_exact(self, F):
        for x in (F.eps, F(-2, 5), F(3, -1), F(10 ** 9, -(10 ** 9) + 7)):
            p, q = x.doubled()
            for (lo, hi), sign in zip(embed_interval(x, 96), (1, -1)):
                assert lo <= hi
                assert hi - lo < Decimal(10) ** -25 * (abs(q) + 1)
                for bound, side in ((Fraction(lo), 1), (Fraction(hi), -1)):
                    n, m = bound.numerator, bound.denominator
                    # side * (v - bound) >= 0 with v = (p + sign*q*sqrt d)/2
                    assert side * sign_of_surd(p * m - 2 * n, sign * q * m, F.d) >= 0

    def test_embedding_precision_floor(self, F):
        with pytest.raises(ValueError, match="32 bits"):
            embed_interval(F.w, 16)

    def test_other_fields(self):
        F2, F13 = QuadraticField(2), QuadraticField(13)
        assert F2.w_convention == "sqrt(d)"
        assert F13.w_convention == "(1+sqrt(d))/2"
        assert F2.fundamental_unit == F2(1, 1)
        assert F13.fundamental_unit == F13(1, 1)
        assert F2.disc == 8

    def test_unsupported_field(self):
        with pytest.raises(UnsupportedField, match="not supported"):
            QuadraticField(3)

    def test_field_is_shared(self):
        assert field(5) is field(5)

    def test_sqrt2_field(self):
        F2 = field(2)
        assert F2.w * F2.w == F2(2)
        assert F2.fundamental_unit.norm() == -1
        assert F2.eps.norm() == 1


class TestFieldElement:
    """Element arithmetic and serialization"""

    def test_norm_and_trace(self, F):
        x = F(2, 1)
        assert x.norm() == 5
        assert x.trace() == 5
        assert F(-2, 5).norm() == -31

    def test_parse_and_str(self, F):
        for text in ("-2+5*w", "3", "4-1*w", "7*w", "0"):
            assert str(F.parse(text)) == str(F.parse(str(F.parse(text))))
        assert F.parse("-2+5*w") == F(-2, 5)
        assert F.parse("4-1*w") == F(4, -1)
        assert str(F(-2, 5)) == "-2+5*w"

    def test_parse_rejects_garbage(self, F):
        with pytest.raises(ValueError, match="Malformed"):
            F.parse("2+w+")

    def test_unit_inverse(self, F):
        assert F.eps * F.eps.unit_inverse() == F.one
        with pytest.raises(ZeroDivisionError):
            F(2).unit_inverse()

    def test_exact_div(self, F):
        assert F(-2, 5).exact_div(F(3, 1)) is None
        assert (F(3, 1) * F(4, -1)).exact_div(F(3, 1)) == F(4, -1)

    def test_signs(self, F):
        assert is_totally_positive(F(2, 1))
        assert not is_totally_positive(F.w)
        assert is_totally_negative(F(-3))
        assert F(-2, 5).signs() == (1, -1)


class TestShintani:
    """Cone membership and reduction by powers of eps"""

    def test_reduce_w_plus_2(self, F):
        rep, k = shintani_reduce(F(2, 1))
        assert rep == F(3, -1)
        assert k == 1
        assert in_shintani_cone(rep)

    def test_reduce_records_exponent(self, F):
        x = F(3, -1)
        rep, k = shintani_reduce(F.eps.conj() ** 2 * x)
        assert rep == x
        assert k == 2

    def test_unit_class_of_three(self, F):
        assert shintani_reduce(F(3, 3))[0] == F(3)
        assert shintani_reduce(F(6, -3))[0] == F(3)
        assert shintani_reduce(F(3, 4))[0] == F(3, -1)

    def test_rejects_non_positive(self, F):
        with pytest.raises(ValueError, match="not totally positive"):
            shintani_reduce(F.w)

    def test_reduce_is_idempotent(self, F):
        rng = random.Random(7)
        for _ in range(200):
            x = F(rng.randint(1, 60), rng.randint(-20, 20))
            if not is_totally_positive(x):
                continue
            rep, _ = shintani_reduce(x)
            assert in_shintani_cone(rep)
            assert rep.norm() == x.norm()
            assert shintani_reduce(rep) == (rep, 0)


class TestEuclid:
    """Euclidean division, gcd and generator normalization"""

    def test_divmod(self, F):
        rng = random.Random(1)
        for _ in range(300):
            x = F(rng.randint(-500, 500), rng.randint(-500, 500))
            y = F(rng.randint(-50, 50), rng.randint(-50, 50))
            if not y:
                continue
            q, r = divmod_euclid(x, y)
            assert q * y + r == x
            assert abs(r.norm()) < abs(y.norm())

    def test_gcd_of_associates(self, F):
        g = gcd(F(31), F(-2, 5))
        assert abs(g.norm()) == 31

    def test_normalize_generator(self, F):
        assert normalize_generator(F(-1)) == F.one
        assert normalize_generator(F.w) == F.one
        g = normalize_generator(F(-2, 3))
        assert is_totally_positive(g)
        assert g.norm() == 11


class TestPrimes:
    """Prime elements and factorization"""

    def test_decomposition_types(self, F):
        assert [q.norm for q in prime_elements_above(F, 2)] == [4]
        assert [q.norm for q in prime_elements_above(F, 3)] == [9]
        assert [q.norm for q in prime_elements_above(F, 5)] == [5]
        assert [q.norm for q in prime_elements_above(F, 11)] == [11, 11]

    def test_primes_up_to(self, F):
        assert [q.norm for q in primes_up_to(F, 30)] == [4, 5, 9, 11, 11, 19, 19, 29, 29]

    def test_normalize_prime(self, F):
        q = normalize_prime(F, F(-2, 3))
        assert q.pi == F(3, 1)
        assert q.norm == 11
        with pytest.raises(ValueError, match="prime ideal"):
            normalize_prime(F, F(6))

    def test_factor_roundtrip(self, F):
        for x in (F(31), F(-2, 5) * F(-2, 5) * F(3), F(12, 7), F(-120, 44)):
            unit, factors = factor(x)
            product = unit
            for q, e in factors:
                product = product * q.pi ** e
            assert product == x
            assert unit.is_unit()

    def test_factor_zero(self, F):
        with pytest.raises(ValueError):
            factor(F.zero)


class TestResidueSymbol:
    """(D | q) by Euler's criterion"""

    def test_image_mod_level_prime(self, F):
        q = normalize_prime(F, F(-2, 5))
        assert residue_image(F.w, q) == (19, 0)

    def test_known_values(self, F):
        q = normalize_prime(F, F(-2, 5))
        assert quadratic_character(F(-3), q) == 1
        assert quadratic_character(F(-4), q) == -1
        assert quadratic_character(F(-2, -1), q) == 1
        assert quadratic_character(F(-31), q) == 0

    def test_inert_prime(self, F):
        q = prime_elements_above(F, 3)[0]
        assert quadratic_character(F(2), q) == 1
        assert quadratic_character(F.w, q) in (1, -1)

    def test_multiplicative(self, F):
        rng = random.Random(3)
        for q in primes_up_to(F, 60):
            if q.p == 2:
                continue
            for _ in range(20):
                x = F(rng.randint(-40, 40), rng.randint(-40, 40))
                y = F(rng.randint(-40, 40), rng.randint(-40, 40))
                if not x or not y:
                    continue
                assert quadratic_character(x * y, q) == quadratic_character(x, q) * quadratic_character(y, q)

    def test_even_prime(self, F):
        with pytest.raises(EvenPrime):
            quadratic_character(F(-3), prime_elements_above(F, 2)[0])


class TestSquaresMod4:
    def test_squares(self, F):
        assert F.squares_mod4 == frozenset({(0, 0), (1, 0), (1, 1), (2, 3)})
        assert is_square_mod4(F(-3))
        assert is_square_mod4(F(-4))
        assert not is_square_mod4(F(-1))
