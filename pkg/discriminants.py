"""
Fundamental Discriminants
Enumeration of totally negative fundamental discriminants by norm, as Shintani representatives,
with fundamentality and permittedness tests
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product
from math import isqrt
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence, Tuple

from errors import EvenPrime
from field_arith import (
    FieldElement, QuadraticField, factor, field, gcd, is_square_mod4, is_totally_positive,
    quadratic_character,
)
from logger import logger

if TYPE_CHECKING:
    from waldspurger import NewformPackage


@dataclass(frozen=True)
class DiscriminantRecord:
    """Totally negative fundamental D with -D in the Shintani cone"""

    D: FieldElement
    abs_norm: int
    trace_abs: int
    is_rational: bool
    permitted: bool = False

    @classmethod
    def from_positive(cls, m: FieldElement) -> DiscriminantRecord:
        return cls(-m, m.norm(), m.trace(), m.b == 0)

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return (self.abs_norm, self.D.a, self.D.b)

    def as_row(self) -> dict:
        return {
            'a': self.D.a,
            'b': self.D.b,
            'abs_norm': self.abs_norm,
            'trace_abs': self.trace_abs,
            'is_rational': self.is_rational,
            'permitted': self.permitted,
        }


def trace_bound(F: QuadraticField, X: int) -> int:
    """ceil(gamma_F * sqrt(X)), the largest trace of a cone element of norm <= X"""
    g2x = F.gamma * F.gamma * X
    root = isqrt(g2x)
    return root if root * root == g2x else root + 1


def is_fundamental(D: FieldElement) -> bool:
    """
    Fundamental discriminant test

    D must be a square mod 4, its odd part squarefree, every even prime exponent at most 3,
    and D/f^2 a non-square mod 4 for each non-unit product f of even primes with f^2 | D.
    """
    if not D:
        raise ValueError("zero is not a discriminant")
    if not is_square_mod4(D):
        return False

    _, factors = factor(D)
    even = []
    for prime, e in factors:
        if prime.p == 2:
            if e > 3:
                return False
            even.append((prime.pi, e // 2))
        elif e > 1:
            return False

    for exponents in product(*(range(k + 1) for _, k in even)):
        if not any(exponents):
            continue
        f = D.F.one
        for (pi, _), k in zip(even, exponents):
            f = f * pi ** k
        quotient = D.exact_div(f * f)
        if quotient is not None and is_square_mod4(quotient):
            return False
    return True


def _cone_a_range(F: QuadraticField, b: int, T: int) -> Tuple[int, int]:
    """a-range of a + b*w with b <= 0, (x * conj(eps)).b > 0 and trace <= T"""
    eps_bar = F.eps.conj()
    p, q = eps_bar.a, eps_bar.b
    # q > 0 because v2(eps) > v1(eps)
    lower = -b * (p + q * F.tw)
    a_min = lower // q + 1
    a_max = (T - F.tw * b) // 2
    return a_min, a_max


def _scan_rows(d: int, X: int, T: int, b_values: Sequence[int]) -> List[Tuple[int, int]]:
    """Fundamental -m for cone elements m = a + b*w with the given b values"""
    F = field(d)
    found = []
    for b in b_values:
        a_min, a_max = _cone_a_range(F, b, T)
        for a in range(a_min, a_max + 1):
            m = F(a, b)
            n = m.norm()
            if n <= 0 or n > X or not is_totally_positive(m):
                continue
            D = -m
            if is_square_mod4(D) and is_fundamental(D):
                found.append((a, b))
    return found


def _b_values(F: QuadraticField, T: int) -> List[int]:
    # |b| * sqrt(d) <= v2 - v1 < Tr
    limit = isqrt(T * T // F.d) + 2
    rows = []
    for k in range(limit + 1):
        lo, hi = _cone_a_range(F, -k, T)
        if lo <= hi:
            rows.append(-k)
    return rows


def enumerate_discriminants(F: QuadraticField, X: int, workers: int = 1) -> List[DiscriminantRecord]:
    """
    One record per unit-square class of totally negative fundamental D with |N(D)| <= X

    Args:
        F: Field
        X: Norm bound
        workers: Process count; rows of the cone are split round-robin

    Returns:
        Records sorted by (abs_norm, a, b)
    """
    if X < 1:
        raise ValueError("norm bound must be at least 1")
    T = trace_bound(F, X)
    rows = _b_values(F, T)

    if workers <= 1 or len(rows) < 2:
        pairs = _scan_rows(F.d, X, T, rows)
    else:
        parts = [rows[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_scan_rows, F.d, X, T, part) for part in parts if part]
            pairs = [pair for future in futures for pair in future.result()]

    records = sorted((DiscriminantRecord.from_positive(F(a, b)) for a, b in pairs), key=lambda r: r.sort_key)
    logger.info(f"Q(sqrt {F.d}), X={X}: {len(records)} fundamental discriminants (trace bound {T})")
    return records


def enumerate_rational_discriminants(F: QuadraticField, X: int) -> List[DiscriminantRecord]:
    """Rational members of the enumeration: D = -n with n^2 <= X, fundamental over Z_F"""
    if X < 1:
        raise ValueError("norm bound must be at least 1")
    records = [
        DiscriminantRecord.from_positive(F(n))
        for n in range(1, isqrt(X) + 1)
        if is_square_mod4(F(-n)) and is_fundamental(F(-n))
    ]
    logger.info(f"Q(sqrt {F.d}), X={X}: {len(records)} rational fundamental discriminants")
    return sorted(records, key=lambda r: r.sort_key)


def is_permitted(D: FieldElement, form: NewformPackage) -> bool:
    """D coprime to the level with chi_D(q) equal to the Atkin-Lehner sign at every q | N"""
    if form.level_gen.norm() % 2 == 0:
        raise EvenPrime(f"level {form.level_gen} is even")
    if not gcd(D, form.level_gen).is_unit():
        return False
    return all(quadratic_character(D, q) == sign for q, sign in form.al_signs.items())


def mark_permitted(records: Iterable[DiscriminantRecord], form: NewformPackage) -> List[DiscriminantRecord]:
    return [replace(r, permitted=is_permitted(r.D, form)) for r in records]


def permitted_only(records: Iterable[DiscriminantRecord], form: Optional[NewformPackage] = None) -> List[DiscriminantRecord]:
    if form is not None:
        records = mark_permitted(records, form)
    return [r for r in records if r.permitted]


def rational_slice(records: Iterable[DiscriminantRecord]) -> List[DiscriminantRecord]:
    """Records whose unit-square class contains a rational integer (|N(D)| = D^2)"""
    return [r for r in records if r.is_rational]


def count_up_to(records: Sequence[DiscriminantRecord], X: int) -> int:
    return sum(1 for r in records if r.abs_norm <= X)

