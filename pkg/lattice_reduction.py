"""
Exact Lattice Linear Algebra
Hermite normal forms over Z and Z_F, Gram-matrix LLL and rational Cholesky decomposition
"""

from fractions import Fraction
from math import lcm
from typing import List, Optional, Sequence, Tuple

import sympy
from fpylll import GSO, LLL, IntegerMatrix
from sympy.matrices.normalforms import hermite_normal_form

from config import Config
from field_arith import FieldElement, divmod_euclid
from logger import logger

IntMatrix = List[List[int]]
RatMatrix = List[List[Fraction]]


def hnf_rows(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """
    Row Hermite normal form of an integer matrix

    Pivots are positive, each row starts further right than the one above it,
    and entries above a pivot lie in [0, pivot).

    Args:
        rows: Generators of a Z-lattice, one per row

    Returns:
        Nonzero rows of the HNF (a Z-basis of the row lattice)
    """
    A = [[int(x) for x in row] for row in rows if any(row)]
    if not A:
        return []
    # sympy works on columns with pivots at the bottom; reversing coordinates
    # turns that into the row form with leading pivots
    H = hermite_normal_form(sympy.Matrix([row[::-1] for row in A]).T)
    return [[int(H[i, j]) for i in range(H.rows - 1, -1, -1)] for j in range(H.cols - 1, -1, -1)]


def lattice_basis(vectors: Sequence[Sequence[Fraction]]) -> RatMatrix:
    """Z-basis (HNF rows) of the lattice spanned by rational vectors"""
    denom = 1
    for v in vectors:
        for x in v:
            denom = lcm(denom, Fraction(x).denominator)
    scaled = [[int(Fraction(x) * denom) for x in v] for v in vectors]
    return [[Fraction(x, denom) for x in row] for row in hnf_rows(scaled)]


def _to_sympy(M: Sequence[Sequence[Fraction]]) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(Fraction(x).numerator, Fraction(x).denominator) for x in row] for row in M])


def _from_sympy(M: sympy.Matrix) -> RatMatrix:
    return [[Fraction(int(M[i, j].p), int(M[i, j].q)) for j in range(M.cols)] for i in range(M.rows)]


def inverse(M: Sequence[Sequence[Fraction]]) -> RatMatrix:
    """Exact inverse of a square rational matrix"""
    return _from_sympy(_to_sympy(M).inv())


def determinant(M: Sequence[Sequence[Fraction]]) -> Fraction:
    value = _to_sympy(M).det()
    return Fraction(int(value.p), int(value.q))


def zf_echelon(rows: Sequence[Sequence[FieldElement]]) -> List[List[FieldElement]]:
    """
    Echelon basis of a Z_F-module by Euclidean row operations

    Columns are processed left to right; each pivot is the only nonzero entry of its
    column among the rows below it.
    """
    A = [list(row) for row in rows if any(bool(x) for x in row)]
    if not A:
        return []
    ncols = len(A[0])
    pivot = 0

    for col in range(ncols):
        if pivot == len(A):
            break
        while True:
            nonzero = [i for i in range(pivot, len(A)) if A[i][col]]
            if not nonzero:
                break
            best = min(nonzero, key=lambda i: abs(A[i][col].norm()))
            A[pivot], A[best] = A[best], A[pivot]
            lead = A[pivot][col]
            clean = True
            for i in range(pivot + 1, len(A)):
                if A[i][col]:
                    q, _ = divmod_euclid(A[i][col], lead)
                    A[i] = [x - q * y for x, y in zip(A[i], A[pivot])]
                    if A[i][col]:
                        clean = False
            if clean:
                break
        if any(A[i][col] for i in range(pivot, len(A))):
            pivot += 1

    return A[:pivot]


def lll_gram(gram: Sequence[Sequence[int]], delta: Optional[Fraction] = None) -> Tuple[IntMatrix, IntMatrix]:
    """
    LLL reduction of a positive definite integer Gram matrix

    Args:
        gram: Symmetric positive definite integer matrix
        delta: Lovasz constant, defaults to Config.LLL_DELTA

    Returns:
        (reduced Gram, basis) where basis[i] holds the coordinates of the i-th
        reduced vector in the input basis
    """
    delta = Fraction(Config.LLL_DELTA) if delta is None else Fraction(delta)
    n = len(gram)
    G = [[int(x) for x in row] for row in gram]
    if n < 2:
        return G, [[1]] if n else []

    A = IntegerMatrix.from_matrix(G)
    U = IntegerMatrix.identity(n)
    M = GSO.Mat(A, U=U, gram=True)
    M.update_gso()
    LLL.Reduction(M, delta=float(delta))()

    B = [[int(U[i, j]) for j in range(n)] for i in range(n)]
    # fpylll reduces in floating point; the Gram is rebuilt from the transform
    reduced = transform_gram(G, B)
    logger.debug(f"LLL on rank {n} Gram: diagonal {[reduced[i][i] for i in range(n)]}")
    return reduced, B


def cholesky_coefficients(gram: Sequence[Sequence[int]]) -> RatMatrix:
    """
    Quadratic-form decomposition Q(y) = sum_i q_ii (y_i + sum_{j>i} q_ij y_j)^2

    Returns:
        Upper-triangular matrix q with q[i][i] > 0 for a positive definite input
    """
    n = len(gram)
    q = [[Fraction(gram[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        if q[i][i] <= 0:
            raise ValueError("Gram matrix is not positive definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    for i in range(n):
        for j in range(i):
            q[i][j] = Fraction(0)
    return q


def is_positive_definite(gram: Sequence[Sequence[int]]) -> bool:
    try:
        cholesky_coefficients(gram)
    except ValueError:
        return False
    return True


def transform_gram(M: Sequence[Sequence[int]], basis: Sequence[Sequence[int]]) -> IntMatrix:
    """basis * M * basis^T for integer matrices"""
    n = len(basis)
    MB = [[sum(M[a][c] * basis[j][c] for c in range(len(M))) for j in range(n)] for a in range(len(M))]
    return [[sum(basis[i][a] * MB[a][j] for a in range(len(M))) for j in range(n)] for i in range(n)]
