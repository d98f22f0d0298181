"""Endomorphism spaces of two-step nilpotent metric Lie algebras.

A space is a Euclidean X-space ``v = R^n`` together with ``l`` linearly
independent skew-symmetric generators ``J_1..J_l``. The generators are
declared orthonormal, which fixes the inner product of the Z-space; the
bracket is ``<[X, Y], Z_a> = <J_a X, Y>``.

Structural checks run in exact rational arithmetic. Spectra (unit
rescaling in the irrational case, Ricci eigenvalues) are double precision.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .errors import (
    DegenerateA,
    DependentGenerators,
    DimensionMismatch,
    NotAnticommutator,
    NotImaginary,
    NotPerpendicular,
    NotSkew,
    NotSymmetric,
)

FLOAT_TOL = 1e-10


# --------------------------------------------------------------------------
# quaternions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    w: Fraction = Fraction(0)
    x: Fraction = Fraction(0)
    y: Fraction = Fraction(0)
    z: Fraction = Fraction(0)

    def __post_init__(self):
        for name in "wxyz":
            object.__setattr__(self, name, exact.frac(getattr(self, name)))

    @classmethod
    def parse(cls, comps) -> "Quaternion":
        """From ``[w, x, y, z]`` or one of the names ``1, i, j, k, -i, ...``."""
        if isinstance(comps, Quaternion):
            return comps
        if isinstance(comps, str):
            sign = -1 if comps.startswith("-") else 1
            name = comps.lstrip("+-")
            unit = {"1": (1, 0, 0, 0), "i": (0, 1, 0, 0), "j": (0, 0, 1, 0), "k": (0, 0, 0, 1)}
            if name in unit:
                return cls(*(sign * c for c in unit[name]))
            if name in ("0", ""):
                return cls()
            raise ValueError(f"unknown quaternion literal {comps!r}")
        if isinstance(comps, (int, Fraction)):
            return cls(comps)
        w, x, y, z = comps
        return cls(w, x, y, z)

    def components(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.w, self.x, self.y, self.z)

    def __add__(self, o: "Quaternion") -> "Quaternion":
        return Quaternion(*(a + b for a, b in zip(self.components(), o.components())))

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, o: "Quaternion") -> "Quaternion":
        return self + (-o)

    def __mul__(self, o):
        if not isinstance(o, Quaternion):
            c = exact.frac(o)
            return Quaternion(*(c * a for a in self.components()))
        a1, b1, c1, d1 = self.components()
        a2, b2, c2, d2 = o.components()
        return Quaternion(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def __rmul__(self, c):
        # only real scalars reach here, and those commute
        return self * c

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def is_zero(self) -> bool:
        return not any(self.components())

    def is_imaginary(self) -> bool:
        return self.w == 0

    def imag_dot(self, o: "Quaternion") -> Fraction:
        return self.x * o.x + self.y * o.y + self.z * o.z

    def left_matrix(self) -> np.ndarray:
        """Real 4x4 matrix of ``v -> q v`` in the basis (1, i, j, k)."""
        basis = [Quaternion.parse(s) for s in ("1", "i", "j", "k")]
        return exact.qmatrix([list((self * e).components()) for e in basis]).T

    def right_matrix(self) -> np.ndarray:
        """Real 4x4 matrix of ``v -> v q``."""
        basis = [Quaternion.parse(s) for s in ("1", "i", "j", "k")]
        return exact.qmatrix([list((e * self).components()) for e in basis]).T


# --------------------------------------------------------------------------
# endomorphism spaces
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EndoSpace:
    """Validated endomorphism space; construct through :func:`make_endo_space`."""

    n: int
    generators: tuple
    anticommutator_index: int | None = None
    provenance: str = ""

    def __post_init__(self):
        gens = tuple(np.asarray(g, dtype=object) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise DimensionMismatch("an endomorphism space needs at least one generator")
        for idx, g in enumerate(gens):
            if g.shape != (self.n, self.n):
                raise DimensionMismatch(f"generator {idx} has shape {g.shape}, expected {(self.n, self.n)}")
            if not exact.is_zero(g + g.T):
                raise NotSkew(f"generator {idx} is not skew-symmetric")
        flat = np.array([g.reshape(-1) for g in gens], dtype=object)
        if exact.is_exact(flat):
            r = exact.rank(flat)
        else:
            r = np.linalg.matrix_rank(exact.to_float(flat), tol=FLOAT_TOL)
        if r < len(gens):
            raise DependentGenerators(f"generators span a space of dimension {r} < {len(gens)}")
        ai = self.anticommutator_index
        if ai is not None:
            if not 0 <= ai < len(gens):
                raise DimensionMismatch(f"anticommutator_index {ai} out of range")
            a = gens[ai]
            for beta, b in enumerate(gens):
                if beta != ai and not _vanishes(a @ b + b @ a):
                    raise NotAnticommutator(
                        f"generator {ai} is flagged as anticommutator but fails against generator {beta}")

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.generators)

    @property
    def is_exact(self) -> bool:
        return all(exact.is_exact(g) for g in self.generators)

    @property
    def A(self) -> np.ndarray | None:
        if self.anticommutator_index is None:
            return None
        return self.generators[self.anticommutator_index]

    def float_generators(self) -> np.ndarray:
        return np.array([exact.to_float(g) for g in self.generators])

    def with_generators(self, gens, anticommutator_index="keep", provenance=None) -> "EndoSpace":
        ai = self.anticommutator_index if anticommutator_index == "keep" else anticommutator_index
        return EndoSpace(self.n, tuple(gens), ai, self.provenance if provenance is None else provenance)

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "l": self.l,
            "generators": [[[_entry_str(v) for v in row] for row in g] for g in self.generators],
            "anticommutator_index": self.anticommutator_index,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "EndoSpace":
        space = make_endo_space(d["n"], d["generators"], d.get("anticommutator_index"),
                                d.get("provenance", ""))
        if "l" in d and d["l"] != space.l:
            raise DimensionMismatch(f"declared l={d['l']} but {space.l} generators given")
        return space

    @classmethod
    def from_json(cls, text: str) -> "EndoSpace":
        return cls.from_dict(json.loads(text))


def _entry_str(v) -> str:
    return exact.fmt(v) if isinstance(v, Fraction) else repr(float(v))


def _vanishes(m) -> bool:
    if exact.is_exact(m):
        return exact.is_zero(m)
    return bool(np.max(np.abs(exact.to_float(m))) <= FLOAT_TOL)


def _as_matrix(g) -> np.ndarray:
    arr = np.asarray(g, dtype=object)
    try:
        return exact.qmatrix(arr)
    except TypeError:
        return arr


def make_endo_space(n: int, generators: Sequence, anticommutator_index: int | None = None,
                    provenance: str = "") -> EndoSpace:
    """Validate ``generators`` (n x n, exact rational entries) into an :class:`EndoSpace`.

    Raises NotSkew, DependentGenerators or DimensionMismatch.
    """
    gens = tuple(_as_matrix(g) for g in generators)
    return EndoSpace(int(n), gens, anticommutator_index, provenance)


def _z_vector(space: EndoSpace, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=object).reshape(-1)
    if Z.shape[0] != space.l:
        raise DimensionMismatch(f"Z has length {Z.shape[0]}, expected l={space.l}")
    try:
        return exact.qvector(Z)
    except TypeError:
        return Z


def j_of(space: EndoSpace, Z) -> np.ndarray:
    """``J_Z = sum_a z_a J_a``."""
    Z = _z_vector(space, Z)
    out = exact.qzeros((space.n, space.n))
    for z, g in zip(Z, space.generators):
        if z != 0:
            out = out + g * z
    return out


@dataclass
class HTypeReport:
    ok: bool
    failing_pairs: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def check_htype(space: EndoSpace) -> HTypeReport:
    """Check ``J_a J_b + J_b J_a = -2 delta_ab id`` for every generator pair."""
    eye = exact.qeye(space.n)
    failing = []
    g = space.generators
    for a in range(space.l):
        for b in range(a, space.l):
            target = eye * (-2) if a == b else exact.qzeros((space.n, space.n))
            if not _vanishes(g[a] @ g[b] + g[b] @ g[a] - target):
                failing.append((a, b))
    return HTypeReport(not failing, failing)


def z_complement(space: EndoSpace, coords) -> np.ndarray:
    """Columns spanning the orthogonal complement of ``coords`` in the Z-space."""
    c = _z_vector(space, coords)
    return exact.nullspace(c.reshape(1, -1))


def is_anticommutator(space: EndoSpace, A_coords) -> bool:
    a = j_of(space, A_coords)
    if _singular(a):
        raise DegenerateA("A is singular")
    comp = z_complement(space, A_coords)
    for col in comp.T:
        b = j_of(space, col)
        if not _vanishes(a @ b + b @ a):
            return False
    return True


def _singular(a) -> bool:
    if exact.is_exact(a):
        return exact.det(a) == 0
    return abs(np.linalg.det(exact.to_float(a))) <= FLOAT_TOL


def unit_rescale(A) -> tuple[np.ndarray, np.ndarray]:
    """Split a non-degenerate skew ``A`` as ``A = S A0`` with ``S = sqrt(-A^2)``.

    Exact when every eigenvalue of ``-A^2`` is the square of a rational;
    otherwise returns float arrays from the eigen-decomposition.
    """
    A = _as_matrix(A)
    if _singular(A):
        raise DegenerateA("cannot rescale a singular endomorphism")
    if exact.is_exact(A):
        res = _unit_rescale_exact(A)
        if res is not None:
            return res
    af = exact.to_float(A)
    m = -af @ af
    m = (m + m.T) / 2
    w, v = np.linalg.eigh(m)
    s = (v * np.sqrt(w)) @ v.T
    s_inv = (v / np.sqrt(w)) @ v.T
    return s, s_inv @ af


def _unit_rescale_exact(A: np.ndarray):
    n = A.shape[0]
    m = -(A @ A)
    w = np.linalg.eigvalsh(exact.to_float(m))
    cands = sorted({Fraction(float(x)).limit_denominator(10**6) for x in np.round(w, 9)})
    eye = exact.qeye(n)
    prod = eye
    for lam in cands:
        prod = prod @ (m - eye * lam)
    if not exact.is_zero(prod):
        return None
    roots = []
    for lam in cands:
        r = _rational_sqrt(lam)
        if r is None:
            return None
        roots.append(r)
    s = exact.qzeros((n, n))
    s_inv = exact.qzeros((n, n))
    for i, lam in enumerate(cands):
        p = eye
        for j, mu in enumerate(cands):
            if j != i:
                p = p @ (m - eye * mu) * (1 / (lam - mu))
        s = s + p * roots[i]
        s_inv = s_inv + p * (1 / roots[i])
    return s, s_inv @ A


def _rational_sqrt(x: Fraction) -> Fraction | None:
    from math import isqrt

    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = isqrt(p), isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


# --------------------------------------------------------------------------
# quaternionic ESW_A construction and products
# --------------------------------------------------------------------------

def _quat_matrix(rows) -> list[list[Quaternion]]:
    return [[Quaternion.parse(e) for e in row] for row in rows]


def quaternion_matrix_rep(mat, side: str = "left") -> np.ndarray:
    """Real ``4k x 4k`` matrix of a ``k x k`` quaternion matrix acting on ``H^k``."""
    mat = _quat_matrix(mat)
    k = len(mat)
    out = exact.qzeros((4 * k, 4 * k))
    for r in range(k):
        if len(mat[r]) != k:
            raise DimensionMismatch("quaternion matrix must be square")
        for c in range(k):
            q = mat[r][c]
            block = q.left_matrix() if side == "left" else q.right_matrix()
            out[4 * r:4 * r + 4, 4 * c:4 * c + 4] = block
    return out


def build_quaternionic_eswa(k: int, a, sym_mats: Sequence, side: str = "left") -> EndoSpace:
    """ESW_A on ``H^k = R^{4k}``: ``diag(a,...,a)`` plus symmetric matrices of
    imaginary quaternions perpendicular to ``a``. The diagonal generator comes
    first and is flagged as the anticommutator.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    a = Quaternion.parse(a)
    if not a.is_imaginary() or a.is_zero():
        raise NotImaginary(f"a = {a} must be a nonzero imaginary quaternion")
    mats = [_quat_matrix(m) for m in sym_mats]
    for idx, m in enumerate(mats):
        if len(m) != k or any(len(row) != k for row in m):
            raise DimensionMismatch(f"sym_mats[{idx}] is not {k}x{k}")
        for r in range(k):
            for c in range(k):
                e = m[r][c]
                if not e.is_imaginary():
                    raise NotImaginary(f"sym_mats[{idx}][{r}][{c}] = {e} has a real part")
                if e.imag_dot(a) != 0:
                    raise NotPerpendicular(f"sym_mats[{idx}][{r}][{c}] = {e} is not perpendicular to a")
                if m[c][r] != e:
                    raise NotSymmetric(f"sym_mats[{idx}] is not symmetric at ({r}, {c})")
    diag = [[a if r == c else Quaternion() for c in range(k)] for r in range(k)]
    gens = [quaternion_matrix_rep(diag, side)] + [quaternion_matrix_rep(m, side) for m in mats]
    return make_endo_space(4 * k, gens, anticommutator_index=0,
                           provenance=f"quaternionic ESW_A k={k} a={list(map(str, a.components()))} side={side}")


def product_space(spaces: Sequence[EndoSpace], merge_z: bool = False) -> EndoSpace:
    """Cartesian product: block-diagonal X-action.

    By default the Z-spaces concatenate (``l = sum l_i``) and no anticommutator
    is flagged. With ``merge_z`` all factors must share ``l`` and generator
    ``a`` acts as ``J^(1)_a + ... + J^(m)_a``; the anticommutator flag survives
    when every factor flags the same index.
    """
    spaces = list(spaces)
    if not spaces:
        raise ValueError("product of no spaces")
    if len(spaces) == 1:
        return spaces[0]
    n = sum(s.n for s in spaces)
    if merge_z:
        ls = {s.l for s in spaces}
        if len(ls) != 1:
            raise DimensionMismatch("merge_z requires equal Z-dimensions")
        l = ls.pop()  # noqa: E741
        gens = [exact.block_diag(*(s.generators[a] for s in spaces)) for a in range(l)]
        flags = {s.anticommutator_index for s in spaces}
        ai = flags.pop() if len(flags) == 1 else None
    else:
        gens = []
        for i, s in enumerate(spaces):
            for g in s.generators:
                blocks = [g if j == i else exact.qzeros((t.n, t.n)) for j, t in enumerate(spaces)]
                gens.append(exact.block_diag(*blocks))
        ai = None
    return make_endo_space(n, gens, ai, provenance="product(" + ", ".join(s.provenance for s in spaces) + ")")


def quaternionic_heisenberg(k: int) -> EndoSpace:
    """Quaternionic Heisenberg algebra on ``H^k``: left multiplication by i, j, k
    on every factor (the ``H^(k,0)`` space)."""
    h1 = build_quaternionic_eswa(1, "i", [[["j"]], [["k"]]])
    return product_space([h1] * k, merge_z=True) if k > 1 else h1


def heisenberg_ab(a: int, b: int) -> EndoSpace:
    """``H^(a,b)``: every generator acts with reversed sign on the last ``b`` factors."""
    h1 = quaternionic_heisenberg(1)
    neg = h1.with_generators([-g for g in h1.generators])
    space = product_space([h1] * a + [neg] * b, merge_z=True) if a + b > 1 else (h1 if a else neg)
    return space.with_generators(space.generators, provenance=f"H^({a},{b})")


# --------------------------------------------------------------------------
# Lie structure and curvature
# --------------------------------------------------------------------------

def lie_bracket(space: EndoSpace, X1, X2) -> np.ndarray:
    """Z-component of ``[X1, X2]``: ``(<J_a X1, X2>)_a``."""
    X1 = np.asarray(X1, dtype=object).reshape(-1)
    X2 = np.asarray(X2, dtype=object).reshape(-1)
    if X1.shape[0] != space.n or X2.shape[0] != space.n:
        raise DimensionMismatch(f"vectors must have length n={space.n}")
    return np.array([(g @ X1) @ X2 for g in space.generators], dtype=object)


def structure_constants(space: EndoSpace) -> np.ndarray:
    """``c[a, b, c] = <[e_a, e_b], e_c>`` in the orthonormal frame (X-basis, then Z-basis)."""
    n, l = space.n, space.l
    N = n + l
    c = np.zeros((N, N, N))
    gf = space.float_generators()
    # <J_al e_a, e_b> = (J_al)[b, a]
    c[:n, :n, n:] = np.transpose(gf, (2, 1, 0))
    return c


@dataclass
class RicciReport:
    eigenvalues: list
    multiplicities: list

    @property
    def flat(self) -> np.ndarray:
        return np.repeat(np.array(self.eigenvalues), self.multiplicities)


def ricci_tensor(space: EndoSpace) -> np.ndarray:
    """Ricci form of the left-invariant metric, brute force from the Koszul formula.

    ``Ric(Y, Z) = sum_i <R(E_i, Y) Z, E_i>`` with
    ``R(U, V) = [nabla_U, nabla_V] - nabla_[U,V]``.
    """
    c = structure_constants(space)
    # gamma[a, b, d] = <nabla_{e_a} e_b, e_d>
    gamma = 0.5 * (c - np.transpose(c, (2, 0, 1)) + np.transpose(c, (1, 2, 0)))
    # nabla_a nabla_b e_c = sum_d gamma[b,c,d] nabla_a e_d
    nn = np.einsum("bcd,ade->abce", gamma, gamma)
    brk = np.einsum("abf,fce->abce", c, gamma)
    R = nn - np.transpose(nn, (1, 0, 2, 3)) - brk  # R[a,b,c,e] = <R(e_a,e_b)e_c, e_e>
    return np.einsum("abca->bc", R)


def ricci_spectrum(space: EndoSpace, tol: float = 1e-9) -> RicciReport:
    ric = ricci_tensor(space)
    w = np.sort(np.linalg.eigvalsh((ric + ric.T) / 2))
    vals, mults = [], []
    for x in w:
        if vals and abs(x - vals[-1]) <= tol * max(1.0, abs(x)):
            mults[-1] += 1
        else:
            vals.append(float(x))
            mults.append(1)
    return RicciReport(vals, mults)
