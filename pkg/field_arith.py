"""
Real Quadratic Field Arithmetic
Exact arithmetic in the ring of integers Z_F of F = Q(sqrt d), narrow class number 1
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from functools import cached_property, lru_cache
from math import isqrt
from typing import List, Optional, Tuple, Union

from sympy import factorint, primerange
from sympy.ntheory import sqrt_mod

from config import Config
from errors import UnsupportedField, FactorTooLarge, EvenPrime
from logger import logger

# Norm-Euclidean fields whose fundamental unit has norm -1
SUPPORTED_D = (2, 5, 13, 17, 29, 37, 41)

COORD_LIMIT = 2 ** 127

_ELEMENT_RE = re.compile(
    r'^(?:(?P<a>[+-]?\d+)(?:(?P<sign>[+-])(?P<b>\d+)\*w)?|(?P<b_only>[+-]?\d+)\*w)$'
)


def _sign(n: int) -> int:
    return (n > 0) - (n < 0)


def sign_of_surd(p: int, q: int, d: int) -> int:
    """Exact sign of p + q*sqrt(d)"""
    sp, sq = _sign(p), _sign(q)
    if sq == 0:
        return sp
    if sp == 0 or sp == sq:
        return sq
    lhs, rhs = p * p, d * q * q
    if lhs > rhs:
        return sp
    if lhs < rhs:
        return sq
    return 0


@dataclass(frozen=True)
class QuadraticField:
    """Real quadratic field Q(sqrt d) with w = (1+sqrt d)/2 if d = 1 mod 4, else w = sqrt d"""

    d: int

    def __post_init__(self):
        if self.d not in SUPPORTED_D:
            raise UnsupportedField(
                f"d={self.d} is not supported; choose one of {', '.join(map(str, SUPPORTED_D))}"
            )

    # w^2 = tw*w + nw
    @property
    def tw(self) -> int:
        return 1 if self.d % 4 == 1 else 0

    @property
    def nw(self) -> int:
        return (self.d - 1) // 4 if self.d % 4 == 1 else self.d

    @property
    def disc(self) -> int:
        """Field discriminant d_F"""
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def w_convention(self) -> str:
        return "(1+sqrt(d))/2" if self.d % 4 == 1 else "sqrt(d)"

    def __call__(self, a: int, b: int = 0) -> FieldElement:
        return FieldElement(int(a), int(b), self)

    @property
    def zero(self) -> FieldElement:
        return self(0, 0)

    @property
    def one(self) -> FieldElement:
        return self(1, 0)

    @property
    def w(self) -> FieldElement:
        return self(0, 1)

    def parse(self, text: str) -> FieldElement:
        """Parse the "a+b*w" serialization"""
        match = _ELEMENT_RE.match(text.replace(" ", ""))
        if not match:
            raise ValueError(f"Malformed field element: {text!r}")
        if match.group('b_only') is not None:
            return self(0, int(match.group('b_only')))
        a = int(match.group('a'))
        if match.group('b') is None:
            return self(a, 0)
        b = int(match.group('b'))
        return self(a, b if match.group('sign') == '+' else -b)

    @cached_property
    def fundamental_unit(self) -> FieldElement:
        """Smallest unit eta with v1(eta) > 1"""
        b = 1
        while True:
            for target in (-1, 1):
                disc = self.tw * self.tw * b * b + 4 * (self.nw * b * b + target)
                if disc < 0:
                    continue
                root = isqrt(disc)
                if root * root == disc and (root - self.tw * b) % 2 == 0:
                    eta = self((root - self.tw * b) // 2, b)
                    if eta.norm() != -1:
                        raise UnsupportedField(f"Q(sqrt {self.d}) has a fundamental unit of norm +1")
                    return eta
            b += 1

    @cached_property
    def eps(self) -> FieldElement:
        """Generator of the totally positive units with v2(eps) > v1(eps)"""
        return (self.fundamental_unit ** 2).conj()

    @property
    def gamma(self) -> int:
        """Shintani trace constant Tr(eps)"""
        return self.eps.trace()

    @cached_property
    def squares_mod4(self) -> frozenset:
        """Coordinates mod 4 of all squares in Z_F/4Z_F"""
        return frozenset(
            ((a * a + b * b * self.nw) % 4, (2 * a * b + b * b * self.tw) % 4)
            for a in range(4) for b in range(4)
        )

    def __repr__(self) -> str:
        return f"QuadraticField({self.d})"


@dataclass(frozen=True)
class FieldElement:
    """Element a + b*w of Z_F"""

    a: int
    b: int
    F: QuadraticField

    def __post_init__(self):
        if abs(self.a) >= COORD_LIMIT or abs(self.b) >= COORD_LIMIT:
            raise OverflowError(f"coordinates of {self} exceed the 128-bit range")

    def _coerce(self, other: Union[int, FieldElement]) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.F.d != self.F.d:
                raise ValueError(f"mixing elements of Q(sqrt {self.F.d}) and Q(sqrt {other.F.d})")
            return other
        if isinstance(other, int):
            return FieldElement(other, 0, self.F)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.a + other.a, self.b + other.b, self.F)

    __radd__ = __add__

    def __neg__(self) -> FieldElement:
        return FieldElement(-self.a, -self.b, self.F)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.a - other.a, self.b - other.b, self.F)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, c, e = self.a, self.b, other.a, other.b
        be = b * e
        return FieldElement(a * c + be * self.F.nw, a * e + b * c + be * self.F.tw, self.F)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> FieldElement:
        if n < 0:
            return self.unit_inverse() ** -n
        result, base = self.F.one, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __bool__(self) -> bool:
        return bool(self.a or self.b)

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        return f"{self.a}{'+' if self.b > 0 else '-'}{abs(self.b)}*w"

    def __repr__(self) -> str:
        return f"FieldElement({self})"

    @property
    def key(self) -> Tuple[int, int]:
        return (self.a, self.b)

    def conj(self) -> FieldElement:
        return FieldElement(self.a + self.b * self.F.tw, -self.b, self.F)

    def trace(self) -> int:
        return 2 * self.a + self.b * self.F.tw

    def norm(self) -> int:
        a, b = self.a, self.b
        return a * a + a * b * self.F.tw - self.F.nw * b * b

    def doubled(self) -> Tuple[int, int]:
        """(P, Q) with 2x = P + Q*sqrt(d)"""
        if self.F.tw:
            return 2 * self.a + self.b, self.b
        return 2 * self.a, 2 * self.b

    def signs(self) -> Tuple[int, int]:
        """Exact signs of (v1(x), v2(x))"""
        p, q = self.doubled()
        return sign_of_surd(p, q, self.F.d), sign_of_surd(p, -q, self.F.d)

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    def unit_inverse(self) -> FieldElement:
        n = self.norm()
        if n not in (1, -1):
            raise ZeroDivisionError(f"{self} is not a unit")
        return self.conj() * n

    def exact_div(self, other: FieldElement) -> Optional[FieldElement]:
        """self/other if it lies in Z_F, else None"""
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Z_F")
        q = self * other.conj()
        if q.a % n or q.b % n:
            return None
        return FieldElement(q.a // n, q.b // n, self.F)

    def divides(self, other: FieldElement) -> bool:
        return other.exact_div(self) is not None

    def is_rational(self) -> bool:
        return self.b == 0


def embed_interval(x: FieldElement, precision: int = 64) -> Tuple[Tuple[Decimal, Decimal], Tuple[Decimal, Decimal]]:
    """
    Certified enclosures ((lo1, hi1), (lo2, hi2)) of the real embeddings, v1(w) > v2(w)

    sqrt(d) is bracketed by integer square roots and every bound is rounded outward,
    so lo <= v <= hi holds exactly.

    Args:
        x: Field element
        precision: Working precision in bits (at least 32)
    """
    if precision < 32:
        raise ValueError("precision must be at least 32 bits")
    digits = precision * 30103 // 100000 + 2
    scale = 10 ** digits
    r = isqrt(x.F.d * scale * scale)
    root_lo, root_hi = Fraction(r, scale), Fraction(r + 1, scale)
    p, q = x.doubled()

    def outward(lo: Fraction, hi: Fraction) -> Tuple[Decimal, Decimal]:
        with localcontext() as ctx:
            ctx.prec = digits + len(str(abs(p) + abs(q))) + 2
            ctx.rounding = ROUND_FLOOR
            down = Decimal(lo.numerator) / Decimal(lo.denominator)
            ctx.rounding = ROUND_CEILING
            up = Decimal(hi.numerator) / Decimal(hi.denominator)
        return down, up

    places = []
    for sign in (1, -1):
        a, b = (p + sign * q * root_lo) / 2, (p + sign * q * root_hi) / 2
        places.append(outward(min(a, b), max(a, b)))
    return places[0], places[1]


def embed(x: FieldElement, precision: int = 64) -> Tuple[Decimal, Decimal]:
    """
    Real embeddings (v1(x), v2(x)) with v1(w) > v2(w)

    Midpoints of embed_interval; each lies within its certified enclosure.

    Args:
        x: Field element
        precision: Working precision in bits (at least 32)
    """
    (lo1, hi1), (lo2, hi2) = embed_interval(x, precision)
    with localcontext() as ctx:
        ctx.prec = precision * 30103 // 100000 + 10
        return (lo1 + hi1) / 2, (lo2 + hi2) / 2


def is_totally_positive(x: FieldElement) -> bool:
    s1, s2 = x.signs()
    return s1 > 0 and s2 > 0


def is_totally_negative(x: FieldElement) -> bool:
    return is_totally_positive(-x)


def in_shintani_cone(x: FieldElement) -> bool:
    """1 <= v2(x)/v1(x) < v2(eps)/v1(eps) for totally positive x"""
    return x.b <= 0 and (x * x.F.eps.conj()).b > 0


def shintani_reduce(x: FieldElement) -> Tuple[FieldElement, int]:
    """
    Move a totally positive element into the Shintani cone

    Returns:
        (rep, k) with rep = eps^k * x in the half-open cone
    """
    if not is_totally_positive(x):
        raise ValueError(f"{x} is not totally positive")
    eps = x.F.eps
    eps_bar = eps.conj()
    k = 0
    while True:
        if x.b > 0:
            x, k = x * eps, k + 1
        elif (x * eps_bar).b <= 0:
            x, k = x * eps_bar, k - 1
        else:
            return x, k


def divmod_euclid(x: FieldElement, y: FieldElement) -> Tuple[FieldElement, FieldElement]:
    """Euclidean division x = q*y + r with |N(r)| < |N(y)|"""
    n = y.norm()
    if n == 0:
        raise ZeroDivisionError("Euclidean division by zero")
    num = x * y.conj()
    qa, qb = round(Fraction(num.a, n)), round(Fraction(num.b, n))
    best = None
    for da in (0, -1, 1):
        for db in (0, -1, 1):
            q = FieldElement(qa + da, qb + db, x.F)
            r = x - q * y
            size = abs(r.norm())
            if best is None or size < best[0]:
                best = (size, q, r)
    if best[0] >= abs(n):
        raise ArithmeticError(f"no Euclidean step for {x} / {y} in Q(sqrt {x.F.d})")
    return best[1], best[2]


def gcd(x: FieldElement, y: FieldElement) -> FieldElement:
    while y:
        x, y = y, divmod_euclid(x, y)[1]
    return x


def _trace_key(x: FieldElement) -> Tuple[int, int, int]:
    return (x.trace(), x.a, x.b)


def normalize_generator(x: FieldElement) -> FieldElement:
    """Totally positive associate of x with minimal (trace, a, b)"""
    if not x:
        raise ValueError("zero has no normalized generator")
    s1, s2 = x.signs()
    if s1 != s2:
        x = x * x.F.fundamental_unit
    if x.signs()[0] < 0:
        x = -x
    best = x
    for step in (x.F.eps, x.F.eps.conj()):
        y = best * step
        while _trace_key(y) < _trace_key(best):
            best, y = y, y * step
    return best


@dataclass(frozen=True)
class PrimeElement:
    """Totally positive generator of a prime ideal of Z_F"""

    pi: FieldElement
    p: int
    residue_degree: int

    @property
    def norm(self) -> int:
        return self.p ** self.residue_degree

    def __str__(self) -> str:
        return str(self.pi)


def _roots_of_w_mod(F: QuadraticField, p: int) -> List[int]:
    if p == 2:
        return [r for r in (0, 1) if (r * r - F.tw * r - F.nw) % 2 == 0]
    disc = (F.tw * F.tw + 4 * F.nw) % p
    half = pow(2, -1, p)
    if disc == 0:
        return [F.tw * half % p]
    if pow(disc, (p - 1) // 2, p) != 1:
        return []
    s = sqrt_mod(disc, p)
    return sorted({(F.tw + s) * half % p, (F.tw - s) * half % p})


@lru_cache(maxsize=4096)
def prime_elements_above(F: QuadraticField, p: int) -> Tuple[PrimeElement, ...]:
    """Normalized prime elements over the rational prime p"""
    roots = _roots_of_w_mod(F, p)
    if not roots:
        return (PrimeElement(F(p), p, 2),)
    primes = []
    for r in roots:
        g = gcd(F(p), F(-r, 1))
        if abs(g.norm()) != p:
            raise ArithmeticError(f"gcd({p}, w-{r}) has norm {g.norm()}")
        primes.append(PrimeElement(normalize_generator(g), p, 1))
    return tuple(sorted(primes, key=lambda q: q.pi.key))


def primes_up_to(F: QuadraticField, bound: int) -> List[PrimeElement]:
    """All prime elements of norm <= bound, sorted by (norm, a, b)"""
    primes = [
        q for p in primerange(2, bound + 1)
        for q in prime_elements_above(F, p) if q.norm <= bound
    ]
    return sorted(primes, key=lambda q: (q.norm, q.pi.a, q.pi.b))


def normalize_prime(F: QuadraticField, x: FieldElement) -> PrimeElement:
    """PrimeElement generating the same ideal as the prime element x"""
    n = abs(x.norm())
    factors = factorint(n)
    if len(factors) != 1:
        raise ValueError(f"{x} does not generate a prime ideal")
    (p, _exponent), = factors.items()
    for q in prime_elements_above(F, p):
        if q.norm == n and q.pi.divides(x) and x.divides(q.pi):
            return q
    raise ValueError(f"{x} does not generate a prime ideal")


def factor(x: FieldElement) -> Tuple[FieldElement, List[Tuple[PrimeElement, int]]]:
    """
    Factor a nonzero element into prime elements

    Returns:
        (unit, [(prime, exponent), ...]) with x = unit * prod(prime.pi ** exponent)
    """
    n = abs(x.norm())
    if n == 0:
        raise ValueError("cannot factor zero")
    if n > Config.FACTOR_LIMIT:
        raise FactorTooLarge(f"|N({x})| = {n} exceeds {Config.FACTOR_LIMIT}")

    rest = x
    factors = []
    for p in sorted(factorint(n)):
        for prime in prime_elements_above(x.F, p):
            e = 0
            while (q := rest.exact_div(prime.pi)) is not None:
                rest, e = q, e + 1
            if e:
                factors.append((prime, e))
    if not rest.is_unit():
        raise ArithmeticError(f"factorization of {x} left a non-unit cofactor {rest}")
    return rest, factors


def residue_image(x: FieldElement, q: PrimeElement) -> Tuple[int, int]:
    """Image of x in Z_F/(q) as (c0, c1) meaning c0 + c1*w; c1 = 0 for degree-1 primes"""
    p = q.p
    if q.residue_degree == 2:
        return x.a % p, x.b % p
    pi = q.pi
    r = -pi.a * pow(pi.b, -1, p) % p
    return (x.a + x.b * r) % p, 0


def _power_in_residue_field(base: Tuple[int, int], n: int, F: QuadraticField, p: int) -> Tuple[int, int]:
    def mul(u, v):
        be = u[1] * v[1]
        return ((u[0] * v[0] + be * F.nw) % p, (u[0] * v[1] + u[1] * v[0] + be * F.tw) % p)

    result = (1, 0)
    while n:
        if n & 1:
            result = mul(result, base)
        base = mul(base, base)
        n >>= 1
    return result


def quadratic_character(D: FieldElement, q: PrimeElement) -> int:
    """Residue symbol (D | q) for an odd prime q, decided by Euler's criterion"""
    if q.p == 2:
        raise EvenPrime(f"residue symbol is not defined by Euler's criterion at {q}")
    if q.pi.divides(D):
        return 0
    p = q.p
    image = residue_image(D, q)
    if q.residue_degree == 1:
        value = pow(image[0], (p - 1) // 2, p)
    else:
        c0, c1 = _power_in_residue_field(image, (p * p - 1) // 2, D.F, p)
        if c1:
            raise ArithmeticError(f"Euler criterion left the prime field for {D} mod {q}")
        value = c0
    if value == 1:
        return 1
    if value == p - 1:
        return -1
    raise ArithmeticError(f"Euler criterion gave {value} for {D} mod {q}")


def is_square_mod4(x: FieldElement) -> bool:
    return (x.a % 4, x.b % 4) in x.F.squares_mod4


@lru_cache(maxsize=None)
def field(d: int) -> QuadraticField:
    """Shared field instance for d"""
    F = QuadraticField(d)
    logger.debug(f"Q(sqrt {d}): eta={F.fundamental_unit}, eps={F.eps}, gamma={F.gamma}")
    return F


