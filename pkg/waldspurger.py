"""
Waldspurger Coefficients
Assembly of the half-integral weight theta combination g of a newform package, twist tables
over permitted discriminants, central-value ratios and structural package verification
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import isqrt
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from errors import DivisionByZero, IrrationalRatio, TwistvalsError
from discriminants import DiscriminantRecord, enumerate_discriminants, mark_permitted, trace_bound
from field_arith import FieldElement, PrimeElement, QuadraticField, factor, quadratic_character
from lattice_reduction import is_positive_definite
from lattice_theta import (
    SphericalPolynomial, ThetaEnumerator, ThetaSeries, ZFLattice, assemble_series, run_chunks,
    theta_series, trace_form,
)
from logger import logger
from quaternion import QuatOrder, reduced_discriminant_norm, unit_group_order

ChunkCallback = Callable[[int, int, dict], None]


@dataclass
class NewformPackage:
    """Input data of one Hilbert newform: level, signs, Hecke data and the Brandt-side lattices"""

    F: QuadraticField
    level_gen: FieldElement
    weight: int
    al_signs: Dict[PrimeElement, int]
    hecke: Dict[PrimeElement, int]
    lattices: List[ZFLattice]
    polys: List[SphericalPolynomial]
    gamma_orders: List[int]
    label: str
    orders: List[QuatOrder] = dc_field(default_factory=list)
    status: str = "complete"
    curve: str = ""

    @property
    def H(self) -> int:
        return len(self.lattices)

    @property
    def level_norm(self) -> int:
        return abs(self.level_gen.norm())

    @property
    def root_number_level(self) -> int:
        """w_N, the product of the Atkin-Lehner signs"""
        sign = 1
        for value in self.al_signs.values():
            sign *= value
        return sign

    @property
    def root_number(self) -> int:
        """w_f = (-1)^n w_N with n = [F:Q] = 2"""
        return self.root_number_level

    def hecke_rows(self) -> List[Tuple[PrimeElement, int]]:
        return sorted(self.hecke.items(), key=lambda kv: (kv[0].norm, kv[0].pi.a, kv[0].pi.b))

    def __post_init__(self):
        if not (len(self.lattices) == len(self.polys) == len(self.gamma_orders)):
            raise ValueError(
                f"package {self.label}: {len(self.lattices)} lattices, {len(self.polys)} polynomials, "
                f"{len(self.gamma_orders)} unit orders"
            )


@dataclass(frozen=True)
class TwistRecord:
    """Coefficient of g at a permitted discriminant"""

    D: FieldElement
    abs_norm: int
    trace_abs: int
    is_rational: bool
    c: Fraction
    vanishes: bool
    normalized: float
    chi: Mapping[PrimeElement, int] = dc_field(default_factory=dict, compare=False, hash=False)

    def as_row(self) -> dict:
        return {
            'a': self.D.a,
            'b': self.D.b,
            'abs_norm': self.abs_norm,
            'c_num': self.c.numerator,
            'c_den': self.c.denominator,
            'vanishes': self.vanishes,
            'normalized': self.normalized,
        }


def build_g(
    pkg: NewformPackage,
    T: int,
    workers: int = 1,
    done: Optional[Mapping[Tuple[int, int], dict]] = None,
    on_chunk: Optional[ChunkCallback] = None,
) -> ThetaSeries:
    """
    g = sum_i (1/#Gamma_i) Theta(Lambda_i, P_i), each theta counting +-pairs once

    Args:
        pkg: Newform package
        T: Trace bound
        workers: Process count for the enumeration
        done: Partial chunk results keyed by (lattice index, chunk index), skipped here
        on_chunk: Called with (lattice index, chunk index, partial) for every computed chunk

    Returns:
        Exact series with rational coefficients
    """
    if T < 1:
        raise ValueError("trace bound must be at least 1")
    done = done or {}
    g = ThetaSeries(pkg.F, T, {}, count_pairs=True)

    for i, (L, P, gamma) in enumerate(zip(pkg.lattices, pkg.polys, pkg.gamma_orders)):
        if P.total_degree % 2:
            series = theta_series(L, P, T, workers, count_pairs=True)
        else:
            enumerator = ThetaEnumerator(L, T)
            chunks = enumerator.chunks()
            todo = [j for j in range(len(chunks)) if (i, j) not in done]

            def record(index: int, result: dict, lattice: int = i, todo: List[int] = todo):
                if on_chunk:
                    on_chunk(lattice, todo[index], result)

            fresh = run_chunks(enumerator, [chunks[j] for j in todo], workers, P, record)
            by_index = dict(zip(todo, fresh))
            partials = [done[(i, j)] if (i, j) in done else by_index[j] for j in range(len(chunks))]
            series = assemble_series(L, P, T, partials, count_pairs=True)
        g.add_scaled(series, Fraction(1, gamma))
        logger.info(f"{pkg.label}: lattice {i + 1}/{pkg.H} done, {series.nonzero_count()} coefficients")

    non_integral = sum(1 for v in g.coeffs.values() if v.denominator != 1)
    if non_integral:
        logger.warning(f"{pkg.label}: {non_integral} coefficients of g are not integers")
    return g


def character_values(D: FieldElement, pkg: NewformPackage) -> Dict[PrimeElement, int]:
    """chi_D(q) for the odd Hecke primes of the package not dividing the level"""
    values = {}
    for q, _ in pkg.hecke_rows():
        if q.p == 2 or q.pi.divides(pkg.level_gen):
            continue
        values[q] = quadratic_character(D, q)
    return values


def twist_record(record: DiscriminantRecord, g: ThetaSeries, pkg: NewformPackage) -> TwistRecord:
    c = g.coefficient(-record.D)
    return TwistRecord(
        D=record.D,
        abs_norm=record.abs_norm,
        trace_abs=record.trace_abs,
        is_rational=record.is_rational,
        c=c,
        vanishes=(c == 0),
        normalized=float(c) / record.abs_norm ** ((pkg.weight - 1) / 4),
        chi=character_values(record.D, pkg),
    )


def twist_table(
    pkg: NewformPackage,
    X: int,
    workers: int = 1,
    records: Optional[Sequence[DiscriminantRecord]] = None,
    g: Optional[ThetaSeries] = None,
) -> List[TwistRecord]:
    """
    One TwistRecord per permitted D with |N(D)| <= X

    The coefficient is read at the Shintani representative -D; g is built to the trace
    bound ceil(gamma_F sqrt X) unless a large enough series is supplied.
    """
    T = trace_bound(pkg.F, X)
    if records is None:
        records = enumerate_discriminants(pkg.F, X, workers)
    permitted = [r for r in mark_permitted(records, pkg) if r.permitted and r.abs_norm <= X]
    if not permitted:
        return []
    if g is None or g.bound < T:
        g = build_g(pkg, T, workers)
    table = [twist_record(r, g, pkg) for r in permitted]
    logger.info(f"{pkg.label}, X={X}: {len(table)} permitted, {sum(r.vanishes for r in table)} vanishing")
    return table


def _exact_sqrt(q: Fraction) -> Optional[Fraction]:
    n, d = isqrt(q.numerator), isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def central_value_ratio(r1: TwistRecord, r2: TwistRecord, k: int) -> Fraction:
    """
    L(f, 1/2, chi_D1) / L(f, 1/2, chi_D2) proxy (c1/c2)^2 (|N(D2)|/|N(D1)|)^((k-1)/2)

    Raises:
        DivisionByZero: c2 = 0
        IrrationalRatio: the norm factor is not rational
    """
    if r2.c == 0:
        raise DivisionByZero(f"coefficient at {r2.D} vanishes")
    if r1.c == 0:
        return Fraction(0)
    norms = Fraction(r2.abs_norm, r1.abs_norm) ** (k - 1)
    root = _exact_sqrt(norms)
    if root is None:
        raise IrrationalRatio(f"(|N({r2.D})|/|N({r1.D})|)^{k - 1} is not a rational square")
    return (r1.c / r2.c) ** 2 * root


def central_value_ratio_float(r1: TwistRecord, r2: TwistRecord, k: int) -> float:
    if r2.c == 0:
        raise DivisionByZero(f"coefficient at {r2.D} vanishes")
    return float((r1.c / r2.c) ** 2) * (r2.abs_norm / r1.abs_norm) ** ((k - 1) / 2)


def rational_verification_ratios(
    records: Sequence[TwistRecord],
    base: TwistRecord,
    k: int = 2,
) -> List[Tuple[TwistRecord, Fraction, bool]]:
    """
    (D/D0) * L(D)/L(D0) proxies over the rational records

    Returns:
        (record, value, value is the square of a rational) per rational record
    """
    if not base.is_rational:
        raise ValueError(f"base discriminant {base.D} is not rational")
    rows = []
    for r in records:
        if not r.is_rational:
            continue
        value = Fraction(r.D.a, base.D.a) * central_value_ratio(r, base, k)
        rows.append((r, value, _exact_sqrt(value) is not None))
    return rows


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    """Outcome of the structural checks on a package"""

    label: str
    checks: List[CheckResult] = dc_field(default_factory=list)
    discriminant_norms: List[int] = dc_field(default_factory=list)
    unit_orders: List[int] = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(CheckResult(name, passed, detail))

    def as_dict(self) -> dict:
        return {
            'label': self.label,
            'passed': self.passed,
            'discriminant_norms': self.discriminant_norms,
            'unit_orders': self.unit_orders,
            'checks': [{'name': c.name, 'passed': c.passed, 'detail': c.detail} for c in self.checks],
        }


def verify_package(pkg: NewformPackage) -> VerificationReport:
    """Run every structural check; failures are collected, never raised"""
    report = VerificationReport(pkg.label)

    def check(name: str, fn: Callable[[], Tuple[bool, str]]) -> None:
        try:
            passed, detail = fn()
        except (TwistvalsError, ArithmeticError, ValueError) as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        report.add(name, passed, detail)

    if pkg.status != "complete":
        report.add("package complete", False, f"status is {pkg.status!r}")

    def level_odd_squarefree():
        if pkg.level_norm % 2 == 0:
            return False, f"level {pkg.level_gen} is even"
        _, factors = factor(pkg.level_gen)
        if any(e > 1 for _, e in factors):
            return False, f"level {pkg.level_gen} is not squarefree"
        return True, f"N(level) = {pkg.level_norm}"

    def al_primes():
        _, factors = factor(pkg.level_gen)
        expected = {q.pi.key for q, _ in factors}
        given = {q.pi.key for q in pkg.al_signs}
        if expected != given:
            return False, f"Atkin-Lehner signs given at {sorted(given)}, level primes {sorted(expected)}"
        if any(v not in (1, -1) for v in pkg.al_signs.values()):
            return False, "Atkin-Lehner signs must be +-1"
        return True, ""

    def parity():
        n = 2
        ok = (n * pkg.weight) // 2 % 2 == n % 2 and pkg.weight % 2 == 0
        return ok, f"parallel weight {pkg.weight}"

    def root_number():
        return pkg.root_number == 1, f"w_f = {pkg.root_number}"

    def lattices_definite():
        bad = [L.label for L in pkg.lattices if not is_positive_definite(trace_form(L))]
        return not bad, f"not positive definite: {bad}" if bad else f"{pkg.H} lattices"

    check("level odd and squarefree", level_odd_squarefree)
    check("Atkin-Lehner signs", al_primes)
    check("parity condition", parity)
    check("root number +1", root_number)
    check("lattices positive definite", lattices_definite)

    for i, order in enumerate(pkg.orders):
        def order_axioms(order=order):
            problems = order.problems()
            return not problems, "; ".join(problems)

        def disc_norm(order=order):
            value = reduced_discriminant_norm(order)
            report.discriminant_norms.append(value)
            return value == pkg.level_norm, f"N(discrd) = {value}"

        def unit_order(order=order, i=i):
            value = unit_group_order(order)
            report.unit_orders.append(value)
            expected = pkg.gamma_orders[i] if i < len(pkg.gamma_orders) else None
            return value == expected, f"#Gamma_{i + 1} = {value}, package says {expected}"

        check(f"order {i + 1} axioms", order_axioms)
        check(f"order {i + 1} discriminant", disc_norm)
        check(f"order {i + 1} unit group", unit_order)

    level = "passed" if report.passed else f"{len(report.failures)} failures"
    logger.info(f"verify {pkg.label}: {level}")
    return report
