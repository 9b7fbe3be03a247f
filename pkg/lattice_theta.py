"""
Lattice Theta Series
Theta expansions of totally positive definite Z_F-lattices by Fincke-Pohst enumeration
on the rational trace form, with a brute-force oracle for testing
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from math import ceil, floor, isqrt, sqrt, prod
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from config import Config
from errors import BoxTooLarge, IntegralityError, IrrationalCoefficient
from field_arith import FieldElement, QuadraticField, is_totally_positive
from lattice_reduction import cholesky_coefficients, inverse, lll_gram, transform_gram
from logger import logger

Key = Tuple[int, int]
Chunk = Tuple[int, int]

# Outward rounding applied to every floating-point enumeration bound
_SLACK = 1e-7
_FLUSH_SIZE = 1 << 20


def zf_determinant(M: Sequence[Sequence[FieldElement]], one: FieldElement) -> FieldElement:
    """Determinant over Z_F by cofactor expansion along the first row"""
    n = len(M)
    if n == 0:
        return one
    if n == 1:
        return M[0][0]
    total = one - one
    for j in range(n):
        if not M[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * zf_determinant(minor, one)
        total = total + term if j % 2 == 0 else total - term
    return total


@dataclass(frozen=True)
class ZFLattice:
    """
    Free Z_F-lattice with quadratic form Q(x) = B(x, x)

    gram2 holds the doubled bilinear form 2B, so every entry lies in Z_F.
    """

    F: QuadraticField
    gram2: Tuple[Tuple[FieldElement, ...], ...]
    label: str = ""

    def __post_init__(self):
        r = self.rank
        for i in range(r):
            if len(self.gram2[i]) != r:
                raise ValueError(f"lattice {self.label!r}: Gram matrix is not square")
            for j in range(r):
                if self.gram2[i][j] != self.gram2[j][i]:
                    raise ValueError(f"lattice {self.label!r}: Gram matrix is not symmetric")

        one = self.F.one
        for i in range(r):
            for j in range(i, r):
                coords = [one if k in (i, j) else self.F.zero for k in range(r)]
                if i == j:
                    coords[i] = one
                value2 = self.doubled_value(coords)
                if value2.a % 2 or value2.b % 2:
                    raise IntegralityError(f"lattice {self.label!r}: Q is not Z_F-valued on e{i}+e{j}")

        for k in range(1, r + 1):
            minor = zf_determinant([list(row[:k]) for row in self.gram2[:k]], one)
            if not is_totally_positive(minor):
                raise ValueError(f"lattice {self.label!r}: Q is not totally positive definite (minor {k})")

    @classmethod
    def from_gram(cls, F: QuadraticField, gram: Sequence[Sequence[Tuple[Fraction, Fraction]]], label: str = "") -> ZFLattice:
        """Build from B given as pairs (a, b) meaning a + b*w, entries in (1/2)Z_F"""
        gram2 = []
        for row in gram:
            out = []
            for a, b in row:
                a2, b2 = Fraction(a) * 2, Fraction(b) * 2
                if a2.denominator != 1 or b2.denominator != 1:
                    raise IntegralityError(f"Gram entry {a}+{b}*w is not in (1/2)Z_F")
                out.append(F(int(a2), int(b2)))
            gram2.append(tuple(out))
        return cls(F, tuple(gram2), label)

    @property
    def rank(self) -> int:
        return len(self.gram2)

    def doubled_value(self, coords: Sequence[FieldElement]) -> FieldElement:
        total = self.F.zero
        for i, xi in enumerate(coords):
            for j, xj in enumerate(coords):
                if xi and xj:
                    total = total + self.gram2[i][j] * xi * xj
        return total

    def value(self, coords: Sequence[FieldElement]) -> FieldElement:
        """Q(x) for x = sum coords[j] e_j"""
        v2 = self.doubled_value(coords)
        return self.F(v2.a // 2, v2.b // 2)

    def coords_from_z(self, y: Sequence[int]) -> List[FieldElement]:
        """Z_F-coordinates of the vector with Z-coordinates y on the basis {e_j, w e_j}"""
        return [self.F(int(y[2 * j]), int(y[2 * j + 1])) for j in range(self.rank)]

    @cached_property
    def z_forms(self) -> Tuple[List[List[int]], List[List[int]]]:
        """Integer matrices (MA, MB) with 2Q(x) = y^T MA y + (y^T MB y) w"""
        n = 2 * self.rank
        powers = [self.F.one, self.F.w]
        MA = [[0] * n for _ in range(n)]
        MB = [[0] * n for _ in range(n)]
        for j in range(self.rank):
            for s in range(2):
                for k in range(self.rank):
                    for t in range(2):
                        entry = self.gram2[j][k] * powers[s] * powers[t]
                        MA[2 * j + s][2 * k + t] = entry.a
                        MB[2 * j + s][2 * k + t] = entry.b
        return MA, MB


def trace_form(L: ZFLattice) -> List[List[int]]:
    """Z-Gram of Tr(2B) on the basis {e_j, w e_j}; y^T G y = 2 Tr Q(x)"""
    MA, MB = L.z_forms
    n = len(MA)
    return [[2 * MA[i][j] + L.F.tw * MB[i][j] for j in range(n)] for i in range(n)]


class SphericalPolynomial:
    """Product over the real places of harmonic polynomials in the lattice coordinates"""

    def __init__(self, rank: int, factors: Sequence, places: int = 2):
        self.rank = rank
        self.symbols = sympy.symbols(f"x0:{rank}") if rank else ()
        if len(factors) != places:
            raise ValueError(f"expected {places} factors, got {len(factors)}")
        self.polys = tuple(
            sympy.Poly(sympy.sympify(f, locals={str(s): s for s in self.symbols}), *self.symbols, domain='QQ')
            for f in factors
        )
        for i, poly in enumerate(self.polys):
            if not poly.is_homogeneous and not poly.is_zero:
                raise ValueError(f"factor {i} is not homogeneous")
        if self.total_degree % 2:
            logger.warning(f"spherical polynomial has odd total degree {self.total_degree}; its theta series vanishes")

    @classmethod
    def constant(cls, rank: int, value, places: int = 2) -> SphericalPolynomial:
        return cls(rank, [str(Fraction(value))] + ["1"] * (places - 1), places)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(max(p.total_degree(), 0) for p in self.polys)

    @property
    def total_degree(self) -> int:
        return sum(self.degrees)

    def is_constant(self) -> bool:
        return self.total_degree == 0

    def constant_value(self) -> Fraction:
        value = Fraction(1)
        for poly in self.polys:
            c = poly.as_expr()
            value *= Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1]))
        return value

    def is_harmonic(self) -> bool:
        for poly in self.polys:
            laplacian = sum((poly.diff(s).diff(s) for s in self.symbols), sympy.Poly(0, *self.symbols, domain='QQ'))
            if not laplacian.is_zero:
                return False
        return True

    @cached_property
    def _terms(self) -> Tuple[Tuple[Tuple[Tuple[int, ...], Fraction], ...], ...]:
        return tuple(
            tuple((monom, Fraction(int(c.p), int(c.q))) for monom, c in poly.terms())
            for poly in self.polys
        )

    def evaluate(self, coords: Sequence[FieldElement]) -> Tuple[Fraction, Fraction]:
        """
        P(x) for x = sum coords[j] e_j, exactly in Q(sqrt d)

        Returns:
            (r, s) with P(x) = r + s*sqrt(d)
        """
        d = coords[0].F.d if coords else 0
        places = []
        for sign in (1, -1):
            values = []
            for c in coords:
                p, q = c.doubled()
                values.append((Fraction(p, 2), Fraction(sign * q, 2)))
            places.append(values)

        result = (Fraction(1), Fraction(0))
        for i, terms in enumerate(self._terms):
            values = places[i % 2]
            total = (Fraction(0), Fraction(0))
            for monom, coeff in terms:
                term = (coeff, Fraction(0))
                for (vr, vs), e in zip(values, monom):
                    for _ in range(e):
                        term = (term[0] * vr + d * term[1] * vs, term[0] * vs + term[1] * vr)
                total = (total[0] + term[0], total[1] + term[1])
            result = (result[0] * total[0] + d * result[1] * total[1], result[0] * total[1] + result[1] * total[0])
        return result

    def __repr__(self) -> str:
        return f"SphericalPolynomial({', '.join(str(p.as_expr()) for p in self.polys)})"


@dataclass
class ThetaSeries:
    """Coefficients c_nu keyed by (a, b) of nu = a + b*w with Tr nu <= bound"""

    F: QuadraticField
    bound: int
    coeffs: Dict[Key, Fraction] = dc_field(default_factory=dict)
    count_pairs: bool = False

    def coefficient(self, nu: FieldElement) -> Fraction:
        if nu.trace() > self.bound:
            raise ValueError(f"Tr({nu}) = {nu.trace()} exceeds the series bound {self.bound}")
        return self.coeffs.get(nu.key, Fraction(0))

    def __getitem__(self, nu: FieldElement) -> Fraction:
        return self.coefficient(nu)

    def add_scaled(self, other: ThetaSeries, scale: Fraction) -> None:
        if other.bound < self.bound:
            raise ValueError("cannot combine a series with a smaller bound")
        for key, value in other.coeffs.items():
            if self.F(*key).trace() <= self.bound:
                total = self.coeffs.get(key, Fraction(0)) + scale * value
                if total:
                    self.coeffs[key] = total
                else:
                    self.coeffs.pop(key, None)

    def sorted_items(self) -> List[Tuple[FieldElement, Fraction]]:
        items = [(self.F(*key), value) for key, value in self.coeffs.items() if value]
        return sorted(items, key=lambda kv: (kv[0].trace(), kv[0].a, kv[0].b))

    def nonzero_count(self) -> int:
        return sum(1 for v in self.coeffs.values() if v)

    def truncate(self, bound: int) -> ThetaSeries:
        kept = {k: v for k, v in self.coeffs.items() if self.F(*k).trace() <= bound}
        return ThetaSeries(self.F, bound, kept, self.count_pairs)


class ThetaEnumerator:
    """
    Fincke-Pohst enumeration of one of each +-pair with 0 < Tr Q(x) <= T

    The Z-Gram is LLL-reduced first; enumeration runs in the reduced basis with
    floating-point bounds rounded outward and every candidate re-checked exactly.
    """

    def __init__(self, lattice: ZFLattice, T: int):
        if T < 0:
            raise ValueError("trace bound must be nonnegative")
        self.lattice = lattice
        self.T = T
        self.C = 2 * T

        gram = trace_form(lattice)
        self.gram, self.basis = lll_gram(gram)
        MA, MB = lattice.z_forms
        self.MA = transform_gram(MA, self.basis)
        self.MB = transform_gram(MB, self.basis)
        q = cholesky_coefficients(self.gram)
        self.n = len(self.gram)
        self.qdiag = [float(q[i][i]) for i in range(self.n)]
        self.qoff = [[float(q[i][j]) for j in range(self.n)] for i in range(self.n)]

    def outer_range(self) -> Chunk:
        top = self.n - 1
        return 0, floor(sqrt(self.C / self.qdiag[top]) + _SLACK)

    def chunks(self, count: Optional[int] = None) -> List[Chunk]:
        """Deterministic partition of the outermost coordinate range"""
        count = count or Config.THETA_CHUNKS
        lo, hi = self.outer_range()
        size = hi - lo + 1
        count = max(1, min(count, size))
        edges = [lo + (size * i) // count for i in range(count + 1)]
        return [(edges[i], edges[i + 1] - 1) for i in range(count) if edges[i + 1] > edges[i]]

    def _level_bounds(self, level: int, y: List[int], budget: float) -> Tuple[int, int, float]:
        center = -sum(self.qoff[level][j] * y[j] for j in range(level + 1, self.n))
        radius = sqrt(max(budget, 0.0) / self.qdiag[level]) * (1 + _SLACK) + _SLACK
        return ceil(center - radius), floor(center + radius), center

    def batches(self, chunk: Optional[Chunk] = None) -> Iterator[Tuple[List[int], np.ndarray]]:
        """
        Yield (y, y0) where y holds coordinates 1..n-1 of the reduced basis and
        y0 is an array of admissible first coordinates (exactly checked)
        """
        n = self.n
        lo_top, hi_top = chunk if chunk is not None else self.outer_range()
        y = [0] * n
        G = self.gram

        def leaf(zero_above: bool, budget: float):
            lo, hi, _ = self._level_bounds(0, y, budget)
            if zero_above:
                lo = max(lo, 1)
            if hi < lo:
                return None
            y0 = np.arange(lo, hi + 1, dtype=np.int64)
            lin = sum(G[0][j] * y[j] for j in range(1, n))
            rest = sum(G[i][j] * y[i] * y[j] for i in range(1, n) for j in range(1, n))
            values = G[0][0] * y0 * y0 + 2 * lin * y0 + rest
            y0 = y0[(values <= self.C) & (values > 0)]
            return y0 if y0.size else None

        def walk(level: int, budget: float, zero_above: bool):
            if level == 0:
                y0 = leaf(zero_above, budget)
                if y0 is not None:
                    yield list(y), y0
                return
            lo, hi, center = self._level_bounds(level, y, budget)
            if zero_above:
                lo = max(lo, 0)
            if level == n - 1:
                lo, hi = max(lo, lo_top), min(hi, hi_top)
            for v in range(lo, hi + 1):
                t = v - center
                remaining = budget - self.qdiag[level] * t * t
                if remaining < -_SLACK * (1 + self.C):
                    continue
                y[level] = v
                yield from walk(level - 1, remaining, zero_above and v == 0)
            y[level] = 0

        if n == 1:
            # Rank-1 Z-lattices do not occur for Z_F-lattices; kept for completeness
            y0 = leaf(True, float(self.C))
            if y0 is not None and lo_top <= 0:
                yield list(y), y0
            return
        yield from walk(n - 1, float(self.C), True)

    def _quadratic_parts(self, M: List[List[int]], y: List[int], y0: np.ndarray) -> np.ndarray:
        n = self.n
        lin = sum(M[0][j] * y[j] for j in range(1, n))
        rest = sum(M[i][j] * y[i] * y[j] for i in range(1, n) for j in range(1, n))
        return M[0][0] * y0 * y0 + 2 * lin * y0 + rest

    def values(self, y: List[int], y0: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(a, b) arrays with Q(x) = a + b*w"""
        a2 = self._quadratic_parts(self.MA, y, y0)
        b2 = self._quadratic_parts(self.MB, y, y0)
        return a2 // 2, b2 // 2

    def original_coords(self, y: List[int], y0: int) -> Tuple[int, ...]:
        full = [int(y0)] + list(y[1:])
        return tuple(
            sum(full[i] * self.basis[i][c] for i in range(self.n))
            for c in range(self.n)
        )

    def count_chunk(self, chunk: Optional[Chunk] = None) -> Dict[Key, int]:
        """Number of yielded vectors per value Q(x), for one chunk"""
        counts: Dict[Key, int] = {}
        pending_a: List[np.ndarray] = []
        pending_b: List[np.ndarray] = []
        pending = 0

        def flush():
            nonlocal pending
            if not pending_a:
                return
            pairs = np.stack([np.concatenate(pending_a), np.concatenate(pending_b)], axis=1)
            keys, multiplicity = np.unique(pairs, axis=0, return_counts=True)
            for (a, b), m in zip(keys.tolist(), multiplicity.tolist()):
                counts[(a, b)] = counts.get((a, b), 0) + m
            pending_a.clear()
            pending_b.clear()
            pending = 0

        for y, y0 in self.batches(chunk):
            a, b = self.values(y, y0)
            pending_a.append(a)
            pending_b.append(b)
            pending += a.size
            if pending >= _FLUSH_SIZE:
                flush()
        flush()
        return counts

    def weighted_chunk(self, poly: SphericalPolynomial, chunk: Optional[Chunk] = None) -> Dict[Key, Tuple[Fraction, Fraction]]:
        """Sum of P(x) over yielded vectors per value Q(x), as r + s*sqrt(d)"""
        sums: Dict[Key, Tuple[Fraction, Fraction]] = {}
        for y, y0 in self.batches(chunk):
            a, b = self.values(y, y0)
            for v, ka, kb in zip(y0.tolist(), a.tolist(), b.tolist()):
                coords = self.lattice.coords_from_z(self.original_coords(y, v))
                r, s = poly.evaluate(coords)
                old = sums.get((ka, kb), (Fraction(0), Fraction(0)))
                sums[(ka, kb)] = (old[0] + r, old[1] + s)
        return sums

    def vectors(self) -> Iterator[Tuple[Tuple[int, ...], FieldElement]]:
        for y, y0 in self.batches():
            a, b = self.values(y, y0)
            for v, ka, kb in zip(y0.tolist(), a.tolist(), b.tolist()):
                yield self.original_coords(y, v), self.lattice.F(ka, kb)


def enumerate_short_vectors(L: ZFLattice, T: int, include_zero: bool = False) -> Iterator[Tuple[Tuple[int, ...], FieldElement]]:
    """
    One vector of each +-pair with 0 < Tr Q(x) <= T

    Yields:
        (Z-coordinates on {e_j, w e_j}, Q(x))
    """
    if include_zero:
        yield tuple([0] * (2 * L.rank)), L.F.zero
    if T <= 0:
        return
    yield from ThetaEnumerator(L, T).vectors()


def _count_task(enumerator: ThetaEnumerator, chunk: Chunk) -> Dict[Key, int]:
    return enumerator.count_chunk(chunk)


def _weighted_task(enumerator: ThetaEnumerator, poly: SphericalPolynomial, chunk: Chunk):
    return enumerator.weighted_chunk(poly, chunk)


def run_chunks(
    enumerator: ThetaEnumerator,
    chunks: Sequence[Chunk],
    workers: int = 1,
    poly: Optional[SphericalPolynomial] = None,
    on_result: Optional[Callable[[int, dict], None]] = None,
) -> List[dict]:
    """Run chunks (in a process pool when workers > 1) and return results in chunk order"""
    if poly is None or poly.is_constant():
        task, extra = _count_task, ()
    else:
        task, extra = _weighted_task, (poly,)

    results: List[dict] = [None] * len(chunks)
    if workers <= 1 or len(chunks) <= 1:
        for index, chunk in enumerate(chunks):
            results[index] = task(enumerator, *extra, chunk)
            if on_result:
                on_result(index, results[index])
        return results

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task, enumerator, *extra, chunk) for chunk in chunks]
        for index, future in enumerate(futures):
            results[index] = future.result()
            if on_result:
                on_result(index, results[index])
    return results


def assemble_series(
    L: ZFLattice,
    P: SphericalPolynomial,
    T: int,
    partials: Sequence[dict],
    count_pairs: bool = False,
) -> ThetaSeries:
    """Merge per-chunk partial sums into a theta series (exact addition)"""
    series = ThetaSeries(L.F, T, {}, count_pairs)
    fold = 1 if count_pairs else 2

    if P.is_constant():
        scale = P.constant_value()
        totals: Dict[Key, int] = {}
        for part in partials:
            for key, count in part.items():
                totals[key] = totals.get(key, 0) + count
        for key, count in totals.items():
            series.coeffs[key] = scale * fold * count
        if scale:
            series.coeffs[(0, 0)] = scale
    else:
        totals_w: Dict[Key, Tuple[Fraction, Fraction]] = {}
        for part in partials:
            for key, (r, s) in part.items():
                old = totals_w.get(key, (Fraction(0), Fraction(0)))
                totals_w[key] = (old[0] + r, old[1] + s)
        for key, (r, s) in sorted(totals_w.items()):
            if s:
                raise IrrationalCoefficient(
                    f"lattice {L.label!r}: coefficient at {L.F(*key)} has sqrt({L.F.d}) part {fold * s}"
                )
            if r:
                series.coeffs[key] = fold * r

    return series


def theta_series(
    L: ZFLattice,
    P: SphericalPolynomial,
    T: int,
    workers: int = 1,
    count_pairs: bool = False,
) -> ThetaSeries:
    """
    Theta series sum_x P(x) q^{Tr(Q(x) z)} truncated at Tr Q(x) <= T

    Args:
        L: Lattice
        P: Spherical polynomial (even total degree)
        T: Trace bound
        workers: Process count for the enumeration
        count_pairs: Count each +-pair (and x = 0) once instead of summing over all x

    Returns:
        ThetaSeries with exact coefficients
    """
    if P.total_degree % 2:
        logger.warning(f"lattice {L.label!r}: odd total degree, returning the zero series")
        return ThetaSeries(L.F, T, {}, count_pairs)
    if T <= 0:
        return assemble_series(L, P, T, [], count_pairs)

    enumerator = ThetaEnumerator(L, T)
    chunks = enumerator.chunks()
    partials = run_chunks(enumerator, chunks, workers, P)
    series = assemble_series(L, P, T, partials, count_pairs)
    logger.debug(f"theta series of {L.label!r} to T={T}: {series.nonzero_count()} nonzero coefficients")
    return series


def naive_theta(L: ZFLattice, P: SphericalPolynomial, T: int, count_pairs: bool = False) -> ThetaSeries:
    """
    Brute-force theta series over the box |y_i| <= sqrt(2T (G^-1)_ii) of the trace form
    in the lattice's own Z-basis; test oracle for theta_series, so no basis reduction
    """
    if P.total_degree % 2:
        return ThetaSeries(L.F, T, {}, count_pairs)
    if T <= 0:
        return assemble_series(L, P, T, [], count_pairs)

    gram = trace_form(L)
    MA, MB = L.z_forms
    n = len(gram)
    C = 2 * T
    inv = inverse(gram)
    bounds = [isqrt(int(C * inv[i][i])) for i in range(n)]
    box = prod(2 * b + 1 for b in bounds)
    if box > Config.NAIVE_BOX_LIMIT:
        raise BoxTooLarge(f"box of {box} points exceeds {Config.NAIVE_BOX_LIMIT}")
    logger.debug(f"naive theta of {L.label!r} to T={T}: box bounds {bounds}, {box} points")

    G, A, B = np.array(gram, dtype=np.int64), np.array(MA, dtype=np.int64), np.array(MB, dtype=np.int64)
    ranges = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    inner = min(n, 3)
    tail = np.stack([g.ravel() for g in np.meshgrid(*ranges[n - inner:], indexing='ij')], axis=1)

    full: Dict[Key, Tuple[Fraction, Fraction]] = {}
    for prefix in itertools.product(*(r.tolist() for r in ranges[:n - inner])):
        Y = np.concatenate([np.tile(np.array(prefix, dtype=np.int64), (tail.shape[0], 1)), tail], axis=1)
        values = np.einsum('ij,jk,ik->i', Y, G, Y)
        mask = (values <= C) & (values > 0)
        if not mask.any():
            continue
        Y = Y[mask]
        a = np.einsum('ij,jk,ik->i', Y, A, Y) // 2
        b = np.einsum('ij,jk,ik->i', Y, B, Y) // 2
        for row, ka, kb in zip(Y.tolist(), a.tolist(), b.tolist()):
            if P.is_constant():
                weight = (Fraction(1), Fraction(0))
            else:
                weight = P.evaluate(L.coords_from_z(tuple(row)))
            old = full.get((ka, kb), (Fraction(0), Fraction(0)))
            full[(ka, kb)] = (old[0] + weight[0], old[1] + weight[1])

    # Every nonzero vector was visited together with its negative
    if P.is_constant():
        halves = [{key: int(r) // 2 for key, (r, _) in full.items()}]
    else:
        halves = [{key: (r / 2, s / 2) for key, (r, s) in full.items()}]
    return assemble_series(L, P, T, halves, count_pairs)
