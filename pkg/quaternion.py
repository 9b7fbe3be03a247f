"""
Quaternion Orders
Totally definite quaternion algebras over F, orders given by Z_F-bases, left orders of
right ideals, the discriminant-form ternary lattice and unit group orders
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt, lcm
from typing import List, Sequence, Tuple, Union

from errors import BasisError, IntegralityError, NotASquare, NotFullRank, UnsupportedUnitStructure
from field_arith import FieldElement, QuadraticField, is_totally_negative
from lattice_reduction import inverse, lattice_basis, zf_echelon
from lattice_theta import ZFLattice, enumerate_short_vectors, zf_determinant
from logger import logger

Scalar = Union[int, FieldElement]


@dataclass(frozen=True)
class QuaternionAlgebra:
    """B = (a, b | F) with i^2 = a, j^2 = b, k = ij"""

    F: QuadraticField
    a: FieldElement
    b: FieldElement

    def __post_init__(self):
        if not (is_totally_negative(self.a) and is_totally_negative(self.b)):
            raise ValueError(f"({self.a}, {self.b}) is not totally definite")

    def element(self, t: Scalar, x: Scalar = 0, y: Scalar = 0, z: Scalar = 0, den: int = 1) -> QuatElement:
        coords = [c if isinstance(c, FieldElement) else self.F(c) for c in (t, x, y, z)]
        return QuatElement(self, *coords, den=den)

    def parse(self, coords: Sequence[str], den: int = 1) -> QuatElement:
        """Element from four "a+b*w" strings and a common denominator"""
        if len(coords) != 4:
            raise ValueError(f"a quaternion needs 4 coordinates, got {len(coords)}")
        return self.element(*(self.F.parse(c) for c in coords), den=den)

    @property
    def one(self) -> QuatElement:
        return self.element(1)

    def basis_elements(self) -> List[QuatElement]:
        """Q-basis 1, w, i, wi, j, wj, k, wk (the order of z_vector coordinates)"""
        out = []
        for c in range(4):
            for s in (self.F.one, self.F.w):
                coords = [self.F.zero] * 4
                coords[c] = s
                out.append(QuatElement(self, *coords))
        return out

    def __repr__(self) -> str:
        return f"QuaternionAlgebra(({self.a}, {self.b}) over Q(sqrt {self.F.d}))"


@dataclass(frozen=True)
class QuatElement:
    """(t + x i + y j + z k) / den with t, x, y, z in Z_F; stored in lowest terms"""

    algebra: QuaternionAlgebra
    t: FieldElement
    x: FieldElement
    y: FieldElement
    z: FieldElement
    den: int = 1

    def __post_init__(self):
        if self.den == 0:
            raise ZeroDivisionError("quaternion with zero denominator")
        g = self.den
        for c in self.coords:
            g = gcd(g, c.a, c.b)
        sign = -1 if self.den < 0 else 1
        if g != 1 or sign < 0:
            k = g * sign
            F = self.algebra.F
            for name in ('t', 'x', 'y', 'z'):
                c = getattr(self, name)
                object.__setattr__(self, name, F(c.a // k, c.b // k))
            object.__setattr__(self, 'den', self.den // k)

    @property
    def coords(self) -> Tuple[FieldElement, FieldElement, FieldElement, FieldElement]:
        return (self.t, self.x, self.y, self.z)

    def _aligned(self, other: QuatElement) -> Tuple[List[FieldElement], List[FieldElement], int]:
        den = lcm(self.den, other.den)
        u, v = den // self.den, den // other.den
        return [c * u for c in self.coords], [c * v for c in other.coords], den

    def __add__(self, other: QuatElement) -> QuatElement:
        p, q, den = self._aligned(other)
        return QuatElement(self.algebra, *(s + o for s, o in zip(p, q)), den=den)

    def __sub__(self, other: QuatElement) -> QuatElement:
        return self + (-other)

    def __neg__(self) -> QuatElement:
        return QuatElement(self.algebra, *(-c for c in self.coords), den=self.den)

    def scale(self, s: Scalar) -> QuatElement:
        return QuatElement(self.algebra, *(c * s for c in self.coords), den=self.den)

    def __truediv__(self, n: int) -> QuatElement:
        return QuatElement(self.algebra, *self.coords, den=self.den * n)

    def __mul__(self, other):
        if not isinstance(other, QuatElement):
            return self.scale(other)
        a, b = self.algebra.a, self.algebra.b
        x0, x1, x2, x3 = self.coords
        y0, y1, y2, y3 = other.coords
        z0 = x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3
        z1 = x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2
        z2 = x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1
        z3 = x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1
        return QuatElement(self.algebra, z0, z1, z2, z3, den=self.den * other.den)

    def __rmul__(self, other):
        return self.scale(other)

    def conj(self) -> QuatElement:
        return QuatElement(self.algebra, self.t, -self.x, -self.y, -self.z, den=self.den)

    def _exact(self, value: FieldElement, den: int, what: str) -> FieldElement:
        q = value.exact_div(self.algebra.F(den))
        if q is None:
            raise IntegralityError(f"{what} of {self} is not in Z_F")
        return q

    def nrd(self) -> FieldElement:
        a, b = self.algebra.a, self.algebra.b
        t, x, y, z = self.coords
        value = t * t - a * x * x - b * y * y + a * b * z * z
        return self._exact(value, self.den * self.den, "reduced norm")

    def trd(self) -> FieldElement:
        return self._exact(self.t * 2, self.den, "reduced trace")

    def disc_form(self) -> FieldElement:
        """Delta(q) = 4 nrd(q) - trd(q)^2"""
        a, b = self.algebra.a, self.algebra.b
        _, x, y, z = self.coords
        value = (-a * x * x - b * y * y + a * b * z * z) * 4
        return self._exact(value, self.den * self.den, "discriminant form")

    def is_scalar(self) -> bool:
        return not (self.x or self.y or self.z)

    def z_vector(self) -> List[Fraction]:
        """Rational coordinates on the Q-basis 1, w, i, wi, j, wj, k, wk"""
        return [Fraction(v, self.den) for c in self.coords for v in (c.a, c.b)]

    @classmethod
    def from_z_vector(cls, algebra: QuaternionAlgebra, v: Sequence[Fraction]) -> QuatElement:
        den = 1
        for x in v:
            den = lcm(den, Fraction(x).denominator)
        ints = [int(Fraction(x) * den) for x in v]
        F = algebra.F
        return cls(algebra, *(F(ints[2 * c], ints[2 * c + 1]) for c in range(4)), den=den)

    def __str__(self) -> str:
        body = f"{self.t} + ({self.x})i + ({self.y})j + ({self.z})k"
        return body if self.den == 1 else f"({body})/{self.den}"


def z_basis(elements: Sequence[QuatElement]) -> List[List[Fraction]]:
    """HNF Z-basis of the Z_F-module generated by elements"""
    vectors = []
    for e in elements:
        vectors.append(e.z_vector())
        vectors.append(e.scale(e.algebra.F.w).z_vector())
    return lattice_basis(vectors)


def zf_basis_with_one(algebra: QuaternionAlgebra, elements: Sequence[QuatElement]) -> List[QuatElement]:
    """
    Z_F-basis [1, e1, e2, e3] of the Z_F-module generated by elements

    Raises:
        BasisError: 1 cannot be completed to a basis (the module meets F in more than Z_F)
    """
    F = algebra.F
    den = 1
    for e in elements:
        den = lcm(den, e.den)
    rows = [[c * (den // e.den) for c in reversed(e.coords)] for e in elements]
    echelon = zf_echelon(rows)
    if len(echelon) != 4:
        raise BasisError(f"module has Z_F-rank {len(echelon)}, expected 4")
    last = echelon[3]
    if any(last[:3]):
        raise BasisError("echelon form did not isolate the scalar line")
    unit = last[3].exact_div(F(den))
    if unit is None or not unit.is_unit():
        raise BasisError(f"scalar part of the module is ({last[3]})/{den}, not Z_F")
    rest = [QuatElement(algebra, *reversed(row), den=den) for row in echelon[:3]]
    return [algebra.one] + rest


@dataclass(frozen=True, eq=False)
class QuatOrder:
    """Z_F-order with basis e_1..e_4; equality is equality of Z-modules"""

    algebra: QuaternionAlgebra
    basis: Tuple[QuatElement, ...]
    label: str = ""

    def __post_init__(self):
        if len(self.basis) != 4:
            raise ValueError(f"order {self.label!r} needs 4 basis elements, got {len(self.basis)}")

    @classmethod
    def from_generators(cls, algebra: QuaternionAlgebra, generators: Sequence[QuatElement], label: str = "") -> QuatOrder:
        return cls(algebra, tuple(zf_basis_with_one(algebra, list(generators) + [algebra.one])), label)

    @property
    def F(self) -> QuadraticField:
        return self.algebra.F

    @cached_property
    def z_matrix(self) -> List[List[Fraction]]:
        rows = z_basis(self.basis)
        if len(rows) != 8:
            raise NotFullRank(f"order {self.label!r} spans a Z-module of rank {len(rows)}")
        return rows

    @cached_property
    def _z_inverse(self) -> List[List[Fraction]]:
        return inverse(self.z_matrix)

    def contains(self, q: QuatElement) -> bool:
        v = q.z_vector()
        inv = self._z_inverse
        return all(
            sum((v[k] * inv[k][c] for k in range(8)), Fraction(0)).denominator == 1
            for c in range(8)
        )

    def problems(self) -> List[str]:
        """Failed order axioms; empty for a valid order"""
        found = []
        if not self.contains(self.algebra.one):
            found.append("does not contain 1")
        for i, e in enumerate(self.basis):
            try:
                e.nrd()
                e.trd()
            except IntegralityError as exc:
                found.append(f"basis element {i}: {exc}")
        for i, e in enumerate(self.basis):
            for j, f in enumerate(self.basis):
                if not self.contains(e * f):
                    found.append(f"product e{i}*e{j} leaves the module")
        return found

    def is_order(self) -> bool:
        return not self.problems()

    def conjugate(self, alpha: QuatElement) -> QuatOrder:
        """alpha O alpha^-1 for alpha with rational integer reduced norm"""
        n = alpha.nrd()
        if not n.is_rational():
            raise ValueError(f"nrd({alpha}) = {n} is not a rational integer")
        image = [(alpha * e * alpha.conj()) / n.a for e in self.basis]
        return QuatOrder.from_generators(self.algebra, image, f"{self.label}^alpha")

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuatOrder):
            return NotImplemented
        return self.algebra == other.algebra and self.z_matrix == other.z_matrix

    def __hash__(self) -> int:
        return hash(tuple(map(tuple, self.z_matrix)))

    def __repr__(self) -> str:
        return f"QuatOrder({self.label!r})"


def right_ideal(order: QuatOrder, generators: Sequence[QuatElement]) -> List[QuatElement]:
    """Z-basis of the right ideal sum g*O"""
    products = [g * e for g in generators for e in order.basis]
    return [QuatElement.from_z_vector(order.algebra, v) for v in z_basis(products)]


def left_order(algebra: QuaternionAlgebra, ideal: Sequence[QuatElement], label: str = "") -> QuatOrder:
    """
    Left order {x : x I in I} of a full-rank lattice I

    The condition x*beta_j in I for every Z-basis vector beta_j of I is linear in the
    coordinates of x; its solution set is the dual of the lattice spanned by the
    columns of the stacked matrices R_j M^-1.
    """
    M = z_basis(ideal)
    if len(M) != 8:
        raise NotFullRank(f"ideal spans a Z-module of rank {len(M)}, expected 8")
    M_inv = inverse(M)
    betas = [QuatElement.from_z_vector(algebra, row) for row in M]
    units = algebra.basis_elements()

    columns = []
    for beta in betas:
        R = [(e * beta).z_vector() for e in units]
        A = [[sum((R[r][k] * M_inv[k][c] for k in range(8)), Fraction(0)) for c in range(8)] for r in range(8)]
        columns.extend([[A[r][c] for r in range(8)] for c in range(8)])

    H = lattice_basis(columns)
    if len(H) != 8:
        raise NotFullRank("left-order system does not have full rank")
    dual = inverse([[H[c][r] for c in range(8)] for r in range(8)])
    elements = [QuatElement.from_z_vector(algebra, row) for row in dual]
    order = QuatOrder(algebra, tuple(zf_basis_with_one(algebra, elements)), label)
    logger.debug(f"left order {label!r}: basis {[str(e) for e in order.basis]}")
    return order


def ternary_lattice(order: QuatOrder) -> ZFLattice:
    """O/Z_F with the discriminant form Delta on the non-scalar echelon basis"""
    basis = zf_basis_with_one(order.algebra, order.basis)[1:]
    F = order.F
    delta = [e.disc_form() for e in basis]
    gram2 = [[F.zero] * 3 for _ in range(3)]
    for i in range(3):
        gram2[i][i] = delta[i] * 2
        for j in range(i + 1, 3):
            value = (basis[i] + basis[j]).disc_form() - delta[i] - delta[j]
            gram2[i][j] = gram2[j][i] = value
    return ZFLattice(F, tuple(tuple(row) for row in gram2), f"{order.label}/Z_F")


def norm_lattice(order: QuatOrder) -> ZFLattice:
    """O with the reduced norm; 2B(x, y) = trd(x conj(y))"""
    F = order.F
    gram2 = tuple(
        tuple((e * f.conj()).trd() for f in order.basis)
        for e in order.basis
    )
    return ZFLattice(F, gram2, f"{order.label}:nrd")


def unit_group_order(order: QuatOrder) -> int:
    """
    #(O^x / Z_F^x)

    Every totally positive unit of Z_F is a square, so the quotient is O^1/{+-1};
    the elements of reduced norm 1 are the vectors of trace 2 in the norm lattice.
    """
    F = order.F
    if F.fundamental_unit.norm() != -1:
        raise UnsupportedUnitStructure(f"Q(sqrt {F.d}) has totally positive non-square units")
    count = sum(1 for _, value in enumerate_short_vectors(norm_lattice(order), 2) if value == F.one)
    logger.debug(f"unit group of {order.label!r}: {count}")
    return count


def reduced_discriminant_norm(order: QuatOrder) -> int:
    """N(discrd O) from |N(det trd(e_i conj e_j))| = N(discrd O)^2"""
    F = order.F
    matrix = [[(e * f.conj()).trd() for f in order.basis] for e in order.basis]
    det = zf_determinant(matrix, F.one)
    n = abs(det.norm())
    root = isqrt(n)
    if root * root != n:
        raise NotASquare(f"|N(disc)| = {n} for order {order.label!r} is not a square")
    return root
