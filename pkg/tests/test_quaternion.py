"""Tests for quaternion arithmetic, orders, left orders and unit groups"""

import random
from itertools import permutations, product

import pytest

from errors import IntegralityError
from lattice_reduction import is_positive_definite
from lattice_theta import trace_form
from quaternion import (
    QuaternionAlgebra, QuatOrder, left_order, reduced_discriminant_norm, right_ideal, ternary_lattice,
    unit_group_order,
)


@pytest.fixture(scope="module")
def algebra(F):
    return QuaternionAlgebra(F, F(-1), F(-1))


@pytest.fixture(scope="module")
def base_order(pkg):
    return pkg.orders[0]


def _random_element(algebra, rng, den=1):
    F = algebra.F
    coords = [F(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(4)]
    return algebra.element(*coords, den=den)


def _is_even(perm):
    inversions = sum(1 for a in range(4) for b in range(a + 1, 4) if perm[a] > perm[b])
    return inversions % 2 == 0


def _icosians(algebra):
    F = algebra.F
    out = []
    for idx in range(4):
        for s in (1, -1):
            coords = [0] * 4
            coords[idx] = s
            out.append(algebra.element(*coords))
    for signs in product((1, -1), repeat=4):
        out.append(algebra.element(*signs, den=2))
    values = [F(0), F(1), F(1, -1), F(0, 1)]
    for perm in permutations(range(4)):
        if not _is_even(perm):
            continue
        for signs in product((1, -1), repeat=3):
            coords = [F.zero] * 4
            coords[perm[0]] = values[0]
            for k in range(1, 4):
                coords[perm[k]] = values[k] * signs[k - 1]
            out.append(algebra.element(*coords, den=2))
    return out


class TestQuatElement:
    """Arithmetic in (-1, -1 | F)"""

    def test_units_multiply(self, algebra):
        i, j, k = algebra.element(0, 1), algebra.element(0, 0, 1), algebra.element(0, 0, 0, 1)
        assert i * i == -algebra.one
        assert i * j == k
        assert j * i == -k

    def test_rejects_indefinite(self, F):
        with pytest.raises(ValueError, match="totally definite"):
            QuaternionAlgebra(F, F(1), F(-1))

    def test_lowest_terms(self, algebra, F):
        q = algebra.element(2, 4, 0, 2, den=2)
        assert q == algebra.element(1, 2, 0, 1)

    def test_nrd_multiplicative(self, algebra):
        rng = random.Random(11)
        for _ in range(1000):
            p, q = _random_element(algebra, rng), _random_element(algebra, rng)
            assert (p * q).nrd() == p.nrd() * q.nrd()

    def test_conj_gives_norm(self, algebra):
        rng = random.Random(5)
        for _ in range(100):
            q = _random_element(algebra, rng)
            product_ = q * q.conj()
            assert product_.is_scalar()
            assert product_.t == q.nrd()

    def test_disc_form_ignores_scalars(self, algebra, F):
        rng = random.Random(2)
        for _ in range(100):
            q = _random_element(algebra, rng)
            t = algebra.element(F(rng.randint(-9, 9), rng.randint(-9, 9)))
            assert (q + t).disc_form() == q.disc_form()
            assert q.disc_form() == q.nrd() * 4 - q.trd() * q.trd()

    def test_non_integral_norm(self, algebra):
        with pytest.raises(IntegralityError, match="reduced norm"):
            algebra.element(0, 1, den=2).nrd()


class TestOrders:
    """Order axioms, discriminants and unit groups"""

    def test_base_order(self, base_order):
        assert base_order.is_order()
        assert reduced_discriminant_norm(base_order) == 31
        assert unit_group_order(base_order) == 5

    def test_second_class(self, pkg):
        order = pkg.orders[1]
        assert order.is_order()
        assert reduced_discriminant_norm(order) == 31
        assert unit_group_order(order) == 3

    def test_lipschitz_order(self, algebra):
        gens = [algebra.element(0, 1), algebra.element(0, 0, 1), algebra.element(0, 0, 0, 1)]
        order = QuatOrder.from_generators(algebra, gens, "lipschitz")
        assert order.is_order()
        assert unit_group_order(order) == 4
        assert reduced_discriminant_norm(order) == 16

    def test_icosian_order(self, algebra):
        order = QuatOrder.from_generators(algebra, _icosians(algebra), "icosians")
        assert order.is_order()
        assert reduced_discriminant_norm(order) == 1
        assert unit_group_order(order) == 60

    def test_scaled_basis_not_order(self, algebra):
        basis = (algebra.one, algebra.element(0, 1, den=2), algebra.element(0, 0, 1), algebra.element(0, 0, 0, 1))
        assert QuatOrder(algebra, basis, "bad").problems()

    def test_ternary_lattice(self, base_order):
        L = ternary_lattice(base_order)
        assert L.rank == 3
        assert is_positive_definite(trace_form(L))


class TestLeftOrders:
    """Left orders of right ideals"""

    def test_trivial_ideal(self, algebra, base_order):
        assert left_order(algebra, right_ideal(base_order, [algebra.one])) == base_order

    def test_right_multiplication_invariant(self, algebra, pkg, base_order):
        ideal = right_ideal(base_order, [
            algebra.element(algebra.F(3, 1)),
            algebra.element(algebra.F(11, 1), algebra.F(70, 1), 1, den=2),
        ])
        alpha = algebra.element(1, 1, 1)
        moved = [beta * alpha for beta in ideal]
        assert left_order(algebra, moved) == left_order(algebra, ideal)
        assert left_order(algebra, ideal) == pkg.orders[1]

    def test_left_multiplication_conjugates(self, algebra, pkg):
        ideal = right_ideal(pkg.orders[0], [algebra.element(algebra.F(3, 1))])
        alpha = algebra.element(1, 1)
        moved = [alpha * beta for beta in ideal]
        expected = left_order(algebra, ideal).conjugate(alpha)
        assert left_order(algebra, moved) == expected
        assert unit_group_order(expected) == 5
        assert reduced_discriminant_norm(expected) == 31
