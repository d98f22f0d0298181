"""Exact rational matrices.

Matrices are numpy object arrays of :class:`fractions.Fraction`; numpy's
object matmul keeps them exact. Rank, null spaces and solves go through
sympy's ``DomainMatrix`` over ``QQ`` (gmpy-backed).
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def frac(x) -> Fraction:
    """Coerce ints, Fractions, "p/q" strings and gmpy/sympy rationals."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return Fraction(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fmt(x: Fraction) -> str:
    x = frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def qmatrix(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = frac(v)
    return out


def qvector(v) -> np.ndarray:
    return qmatrix(list(v)).reshape(-1)


def qeye(n: int) -> np.ndarray:
    out = qzeros((n, n))
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def qzeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def is_zero(m: np.ndarray) -> bool:
    return all(v == 0 for v in np.asarray(m, dtype=object).flat)


def is_exact(m: np.ndarray) -> bool:
    return all(isinstance(v, Fraction) for v in np.asarray(m, dtype=object).flat)


def to_float(m) -> np.ndarray:
    return np.array(np.asarray(m, dtype=object).tolist(), dtype=float)


def block_diag(*blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = qzeros((n, n))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def _dm(m: np.ndarray) -> DomainMatrix:
    rows = [[QQ(int(v.numerator), int(v.denominator)) for v in row] for row in np.atleast_2d(m)]
    return DomainMatrix(rows, (len(rows), len(rows[0]) if rows else 0), QQ)


def _from_dm(d: DomainMatrix) -> np.ndarray:
    rows = d.to_list()
    if not rows:
        return qzeros(d.shape)
    return qmatrix([[frac(v) for v in row] for row in rows])


def rank(m: np.ndarray) -> int:
    m = np.atleast_2d(m)
    if m.size == 0:
        return 0
    return _dm(m).rank()


def nullspace(m: np.ndarray) -> np.ndarray:
    """Columns spanning ``{x : m @ x = 0}``; shape (ncols, k)."""
    m = np.atleast_2d(m)
    ncols = m.shape[1]
    if m.shape[0] == 0:
        return qeye(ncols)
    ns = _dm(m).nullspace()
    if ns.shape[0] == 0:
        return qzeros((ncols, 0))
    return _from_dm(ns).T


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact solve of a nonsingular square system; ``b`` may be a matrix."""
    vec = np.ndim(b) == 1
    bb = np.asarray(b, dtype=object).reshape(len(b), -1)
    x = _from_dm(_dm(a).lu_solve(_dm(bb)))
    return x.reshape(-1) if vec else x


def inverse(a: np.ndarray) -> np.ndarray:
    return _from_dm(_dm(a).inv())


def det(a: np.ndarray) -> Fraction:
    return frac(_dm(a).det())


def projector(basis: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the column span of ``basis``."""
    gram = basis.T @ basis
    return basis @ inverse(gram) @ basis.T
