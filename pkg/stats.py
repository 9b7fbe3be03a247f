"""
Twist Statistics
Vanishing counts, congruence ratios against random-matrix predictions, coefficient histograms
and log-power fits of the vanishing counts
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import log, sqrt
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from discriminants import DiscriminantRecord
from errors import EmptyDenominator
from field_arith import PrimeElement, quadratic_character
from logger import logger
from waldspurger import NewformPackage, TwistRecord

DEFAULT_EXPONENTS = (11 / 8, 41 / 24, 25 / 12)


@dataclass
class CountSeries:
    """Counts at each X of the grid; *_Z columns are the rational slice"""

    grid: List[int]
    counts_all: List[int] = dc_field(default_factory=list)
    counts_permitted: List[int] = dc_field(default_factory=list)
    vanish_ZF: List[int] = dc_field(default_factory=list)
    counts_Z: List[int] = dc_field(default_factory=list)
    vanish_Z: List[int] = dc_field(default_factory=list)

    def rows(self) -> List[dict]:
        return [
            {
                'X': X,
                'n_all': self.counts_all[i],
                'n_permitted': self.counts_permitted[i],
                'n_vanish': self.vanish_ZF[i],
                'n_rational': self.counts_Z[i],
                'n_vanish_rational': self.vanish_Z[i],
            }
            for i, X in enumerate(self.grid)
        ]


@dataclass
class FitResult:
    exponent: float
    constant: float
    residual: float
    x_power: float
    degenerate: bool = False


@dataclass
class CongruenceRatio:
    q: PrimeElement
    a_q: int
    num: int
    den: int
    ratio: float
    prediction: float

    def as_row(self) -> dict:
        return {
            'Nq': self.q.norm,
            'q': str(self.q),
            'a_q': self.a_q,
            'num': self.num,
            'den': self.den,
            'ratio': self.ratio,
            'prediction': self.prediction,
        }


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    max_abs: float

    def rows(self) -> List[dict]:
        return [
            {'bin_lo': float(self.edges[i]), 'bin_hi': float(self.edges[i + 1]), 'count': int(self.counts[i])}
            for i in range(len(self.counts))
        ]


@dataclass
class SliceStats:
    vanishing: int
    total: int
    plus: int = 0
    minus: int = 0


def vanishing_counts(
    records: Sequence[TwistRecord],
    grid: Sequence[int],
    discriminants: Optional[Sequence[DiscriminantRecord]] = None,
) -> CountSeries:
    """
    Exact counts at every X of the grid

    Args:
        records: Twist records of the permitted discriminants
        grid: Increasing norm bounds
        discriminants: All fundamental discriminants, for the counts_all column
    """
    grid = sorted(int(X) for X in grid)
    norms = np.array([r.abs_norm for r in records], dtype=np.int64)
    vanish = np.array([r.vanishes for r in records], dtype=bool)
    rational = np.array([r.is_rational for r in records], dtype=bool)
    all_norms = np.array([d.abs_norm for d in discriminants], dtype=np.int64) if discriminants is not None else norms

    series = CountSeries(grid)
    for X in grid:
        inside = norms <= X
        series.counts_all.append(int(np.count_nonzero(all_norms <= X)))
        series.counts_permitted.append(int(np.count_nonzero(inside)))
        series.vanish_ZF.append(int(np.count_nonzero(inside & vanish)))
        series.counts_Z.append(int(np.count_nonzero(inside & rational)))
        series.vanish_Z.append(int(np.count_nonzero(inside & rational & vanish)))
    return series


def ratio_prediction(norm_q: int, a_q: int) -> float:
    """sqrt((Nq + 1 - a_q) / (Nq + 1 + a_q))"""
    return sqrt((norm_q + 1 - a_q) / (norm_q + 1 + a_q))


def _chi(record: TwistRecord, q: PrimeElement) -> int:
    value = record.chi.get(q) if record.chi else None
    return quadratic_character(record.D, q) if value is None else value


def congruence_ratio(records: Iterable[TwistRecord], q: PrimeElement, a_q: int, X: Optional[int] = None) -> CongruenceRatio:
    """
    #{vanishing, chi_D(q) = +1} / #{vanishing, chi_D(q) = -1}

    Raises:
        EmptyDenominator: no vanishing record has chi_D(q) = -1
    """
    num = den = 0
    for r in records:
        if not r.vanishes or (X is not None and r.abs_norm > X):
            continue
        value = _chi(r, q)
        if value == 1:
            num += 1
        elif value == -1:
            den += 1
    if den == 0:
        raise EmptyDenominator(f"no vanishing twists with chi_D({q}) = -1")
    return CongruenceRatio(q, a_q, num, den, num / den, ratio_prediction(q.norm, a_q))


def congruence_table(records: Sequence[TwistRecord], pkg: NewformPackage, X: Optional[int] = None) -> List[CongruenceRatio]:
    """One row per odd Hecke prime of the package not dividing the level; split primes give two rows"""
    rows = []
    for q, a_q in pkg.hecke_rows():
        if q.p == 2 or q.pi.divides(pkg.level_gen):
            continue
        try:
            rows.append(congruence_ratio(records, q, a_q, X))
        except EmptyDenominator as e:
            logger.warning(str(e))
    return rows


def normalized_histogram(records: Sequence[TwistRecord], bins: int) -> Histogram:
    """Histogram of the signed values c/|N(D)|^((k-1)/4), uniform bins over [min, max]"""
    if bins < 1:
        raise ValueError("bins must be at least 1")
    values = np.array([r.normalized for r in records], dtype=float)
    if values.size == 0:
        return Histogram(np.array([], dtype=float), np.array([], dtype=np.int64), 0.0)
    counts, edges = np.histogram(values, bins=bins, range=(values.min(), values.max()))
    max_abs = float(np.abs(values).max())
    logger.info(f"normalized coefficients: {values.size} values, max |c|/N^((k-1)/4) = {max_abs:.6g}")
    return Histogram(edges, counts, max_abs)


def conjectured_power(k: int, rational: bool = False) -> float:
    """X-exponent of the vanishing count: 1-(k-1)/4, or (1-n(k-1)/4)/2 on the rational slice"""
    if rational:
        return (1 - 2 * (k - 1) / 4) / 2
    return 1 - (k - 1) / 4


def logpower_fit(
    series: CountSeries | Tuple[Sequence[int], Sequence[int]],
    k: int,
    rational: bool = False,
) -> FitResult:
    """
    Least-squares fit of log N = log C + p log X + e log log X with p fixed

    Args:
        series: CountSeries (vanish_ZF or vanish_Z column) or (grid, counts)
        k: Parallel weight
        rational: Fit the rational slice with its own X-exponent
    """
    if isinstance(series, CountSeries):
        grid, counts = series.grid, (series.vanish_Z if rational else series.vanish_ZF)
    else:
        grid, counts = series
    points = [(float(X), float(n)) for X, n in zip(grid, counts) if n > 0 and X > 1]
    if len(points) < 3:
        raise ValueError("log-power fit needs at least 3 grid points with nonzero counts")

    p = conjectured_power(k, rational)
    xs = np.array([x for x, _ in points])
    ns = np.array([n for _, n in points])
    y = np.log(ns) - p * np.log(xs)
    A = np.column_stack([np.ones_like(xs), np.log(np.log(xs))])
    (log_c, e), residuals, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(residuals[0]) if residuals.size else float(np.sum((A @ np.array([log_c, e]) - y) ** 2))
    degenerate = rank < 2 or len(set(counts)) == 1
    if degenerate:
        logger.warning("log-power fit is degenerate (constant counts or rank-deficient design)")
    return FitResult(float(e), float(np.exp(log_c)), residual, p, degenerate)


def normalized_count_series(
    series: CountSeries,
    k: int,
    exponents: Sequence[float] = DEFAULT_EXPONENTS,
    rational: bool = False,
) -> Dict[float, List[Tuple[int, float]]]:
    """(X, N(X) / (X^p (log X)^e)) for each trial exponent e"""
    p = conjectured_power(k, rational)
    counts = series.vanish_Z if rational else series.vanish_ZF
    return {
        e: [(X, n / (X ** p * log(X) ** e)) for X, n in zip(series.grid, counts) if X > 1]
        for e in exponents
    }


def slice_stats(records: Iterable[TwistRecord], T1: int, T2: int, q: Optional[PrimeElement] = None) -> SliceStats:
    """
    Counts over the trace window T1 <= Tr(-D) < T2

    With q given, the vanishing records are also split by chi_D(q) = +1 / -1.
    """
    if T2 < T1:
        raise ValueError(f"empty trace window [{T1}, {T2})")
    stats = SliceStats(0, 0)
    for r in records:
        if not (T1 <= r.trace_abs < T2):
            continue
        stats.total += 1
        if r.vanishes:
            stats.vanishing += 1
            if q is not None:
                value = _chi(r, q)
                stats.plus += value == 1
                stats.minus += value == -1
    return stats
