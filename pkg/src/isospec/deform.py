"""Invariant splittings, sigma-deformations and the reduction identities.

A sigma-deformation with respect to ``v = v(a) + v(b)`` keeps ``J_Z`` on
``v(a)`` and reverses its sign on ``v(b)``; the partial version does this
only for ``Z`` in a subspace ``s`` of the Z-space.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from . import exact
from .endo_core import (
    FLOAT_TOL,
    EndoSpace,
    _vanishes,
    is_anticommutator,
    j_of,
    unit_rescale,
    z_complement,
)
from .errors import (
    DegenerateA,
    DimensionMismatch,
    NotAnticommutator,
    NotAnticommutatorWithComplement,
    NotConjugate,
    NotInvariant,
    NotUnitRescalable,
)


# --------------------------------------------------------------------------
# invariant decomposition
# --------------------------------------------------------------------------

def _coordinate_components(space: EndoSpace) -> list[list[int]]:
    parent = list(range(space.n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for g in space.generators:
        for (i, j), v in np.ndenumerate(g):
            if v != 0:
                parent[find(i)] = find(j)
    comps: dict[int, list[int]] = {}
    for i in range(space.n):
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values())


def _restricted(space: EndoSpace, basis: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    gram = basis.T @ basis
    ginv = exact.inverse(gram)
    return gram, [ginv @ basis.T @ g @ basis for g in space.generators]


def _symmetric_commutant(gram: np.ndarray, jb: list[np.ndarray]) -> list[np.ndarray]:
    """Basis of ``{T : T J = J T for all J, G T = T^t G}`` in block coordinates."""
    d = gram.shape[0]
    rows = []

    def unit(i, j):
        e = exact.qzeros((d, d))
        e[i, j] = Fraction(1)
        return e

    units = [unit(i, j) for i in range(d) for j in range(d)]
    conds = []
    for j in jb:
        conds.append([(u @ j - j @ u).reshape(-1) for u in units])
    conds.append([(gram @ u - u.T @ gram).reshape(-1) for u in units])
    for block in conds:
        cols = np.array(block, dtype=object).T  # (d*d equations, d*d unknowns)
        rows.extend(list(cols))
    ns = exact.nullspace(np.array(rows, dtype=object))
    return [ns[:, k].reshape(d, d) for k in range(ns.shape[1])]


def _is_scalar(t: np.ndarray) -> bool:
    d = t.shape[0]
    return exact.is_zero(t - exact.qeye(d) * t[0, 0])


def _exact_split(t: np.ndarray) -> list[np.ndarray] | None:
    """Kernels of the rational irreducible factors of the characteristic polynomial."""
    d = t.shape[0]
    x = sympy.Symbol("x")
    mat = sympy.Matrix(d, d, lambda i, j: sympy.Rational(t[i, j].numerator, t[i, j].denominator))
    factors = sympy.factor_list(mat.charpoly(x).as_expr(), x)[1]
    if len(factors) < 2:
        return None
    kernels = []
    for f, _mult in factors:
        coeffs = sympy.Poly(f, x).all_coeffs()
        acc = exact.qzeros((d, d))
        for c in coeffs:
            acc = acc @ t + exact.qeye(d) * exact.frac(sympy.Rational(c))
        kernels.append(exact.nullspace(acc))
    return kernels


def _refine(space: EndoSpace, basis: np.ndarray) -> list[np.ndarray]:
    gram, jb = _restricted(space, basis)
    comm = [t for t in _symmetric_commutant(gram, jb) if not _is_scalar(t)]
    if not comm:
        return [basis]
    for t in comm:
        kernels = _exact_split(t)
        if kernels:
            out = []
            for k in kernels:
                out.extend(_refine(space, basis @ k))
            return out
    return _float_split(space, basis, comm[0])


def _float_split(space, basis, t) -> list[np.ndarray]:
    bf = exact.to_float(basis)
    q, _ = np.linalg.qr(bf)
    # T is self-adjoint for the Gram inner product; move it to the orthonormal frame.
    tf = exact.to_float(t)
    r = np.linalg.lstsq(q, bf, rcond=None)[0]
    sym = r @ tf @ np.linalg.inv(r)
    sym = (sym + sym.T) / 2
    w, v = np.linalg.eigh(sym)
    blocks = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or abs(w[i] - w[start]) > 1e-8 * max(1.0, abs(w[start])):
            blocks.append((q @ v[:, start:i]).astype(object))
            start = i
    warnings.warn("invariant decomposition fell back to floating point", RuntimeWarning)
    return blocks


def _block_key(p: np.ndarray):
    pf = exact.to_float(p)
    diag = np.diag(pf)
    first = int(np.argmax(np.abs(diag) > 1e-12))
    return (first, tuple(np.round(-np.abs(pf).reshape(-1), 12)))


def invariant_decomposition(space: EndoSpace) -> list[np.ndarray]:
    """Minimal common invariant subspaces as orthogonal projectors.

    Coordinate supports are split first; each piece is then split by the
    eigenspaces of symmetric elements of its commutant until only scalars
    remain. Exact whenever those eigenvalues are rational.
    """
    blocks = []
    for comp in _coordinate_components(space):
        basis = exact.qzeros((space.n, len(comp)))
        for c, i in enumerate(comp):
            basis[i, c] = Fraction(1)
        blocks.extend(_refine(space, basis))
    projectors = []
    for b in blocks:
        if exact.is_exact(b):
            projectors.append(exact.projector(b))
        else:
            bf = exact.to_float(b)
            projectors.append((bf @ bf.T).astype(object))
    return sorted(projectors, key=_block_key)


def block_dim(p: np.ndarray) -> int:
    return int(round(float(sum(exact.to_float(p).diagonal()))))


def check_nondegenerating(space: EndoSpace) -> bool:
    return all(block_dim(p) > 2 for p in invariant_decomposition(space))


# --------------------------------------------------------------------------
# splittings
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Splitting:
    """Invariant orthogonal blocks of ``v``, each tagged ``'a'`` or ``'b'``."""

    projectors: tuple
    assignment: tuple

    def __post_init__(self):
        object.__setattr__(self, "projectors", tuple(np.asarray(p, dtype=object) for p in self.projectors))
        object.__setattr__(self, "assignment", tuple(self.assignment))
        if len(self.projectors) != len(self.assignment):
            raise DimensionMismatch("one tag per block required")
        if any(t not in ("a", "b") for t in self.assignment):
            raise ValueError("tags must be 'a' or 'b'")

    @classmethod
    def from_space(cls, space: EndoSpace, assignment) -> "Splitting":
        blocks = invariant_decomposition(space)
        if len(assignment) != len(blocks):
            raise DimensionMismatch(f"space has {len(blocks)} invariant blocks, got {len(assignment)} tags")
        return cls(tuple(blocks), tuple(assignment))

    @classmethod
    def coordinate(cls, index_sets, n: int, assignment) -> "Splitting":
        projs = []
        for idx in index_sets:
            p = exact.qzeros((n, n))
            for i in idx:
                p[i, i] = Fraction(1)
            projs.append(p)
        return cls(tuple(projs), tuple(assignment))

    @property
    def n(self) -> int:
        return self.projectors[0].shape[0]

    def part(self, tag: str) -> np.ndarray:
        out = exact.qzeros((self.n, self.n))
        for p, t in zip(self.projectors, self.assignment):
            if t == tag:
                out = out + p
        return out

    def sigma(self) -> np.ndarray:
        return self.part("a") - self.part("b")

    def validate(self, space: EndoSpace) -> None:
        n = space.n
        if self.n != n:
            raise DimensionMismatch("splitting and space disagree on n")
        total = exact.qzeros((n, n))
        for i, p in enumerate(self.projectors):
            if not _vanishes(p @ p - p) or not _vanishes(p - p.T):
                raise NotInvariant(f"block {i} is not an orthogonal projector")
            for g in space.generators:
                if not _vanishes(p @ g - g @ p):
                    raise NotInvariant(f"block {i} is not invariant under every generator")
            for j in range(i):
                if not _vanishes(p @ self.projectors[j]):
                    raise NotInvariant(f"blocks {j} and {i} are not orthogonal")
            total = total + p
        if not _vanishes(total - exact.qeye(n)):
            raise NotInvariant("blocks do not exhaust the X-space")


@dataclass(frozen=True, eq=False)
class DeformSpec:
    splitting: Splitting
    s_subspace: np.ndarray | None = None  # l x r, columns span s

    def to_dict(self) -> dict:
        s = None
        if self.s_subspace is not None:
            s = [[exact.fmt(v) for v in col] for col in np.asarray(self.s_subspace).T]
        return {"assignment": list(self.splitting.assignment), "s_subspace": s}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict, space: EndoSpace) -> "DeformSpec":
        if d.get("blocks"):
            split = Splitting.coordinate(d["blocks"], space.n, d["assignment"])
        else:
            split = Splitting.from_space(space, d["assignment"])
        s = d.get("s_subspace")
        s_mat = exact.qmatrix(s).T if s else None
        return cls(split, s_mat)


def _s_matrix(space: EndoSpace, s) -> np.ndarray:
    s = np.asarray(s, dtype=object)
    if s.ndim == 1:
        s = s.reshape(-1, 1)
    if s.shape[0] != space.l:
        raise DimensionMismatch(f"s_subspace columns must have length l={space.l}")
    return exact.qmatrix(s)


# --------------------------------------------------------------------------
# deformations
# --------------------------------------------------------------------------

def sigma_deform(space: EndoSpace, spec: DeformSpec) -> EndoSpace:
    """Reverse the sign of ``J_Z`` on ``v(b)`` (for ``Z`` in ``s`` when ``s`` is set)."""
    split = spec.splitting
    split.validate(space)
    small = [i for i, p in enumerate(split.projectors) if block_dim(p) <= 2]
    if small:
        warnings.warn(f"blocks {small} have dimension <= 2; the non-degenerating assumption fails",
                      RuntimeWarning, stacklevel=2)
    sigma = split.sigma()
    l = space.l  # noqa: E741
    if spec.s_subspace is None:
        proj_s = exact.qeye(l)
    else:
        s = _s_matrix(space, spec.s_subspace)
        for k in range(s.shape[1]):
            if not is_anticommutator(space, s[:, k]):
                raise NotAnticommutator(f"s direction {k} is not an anticommutator")
        proj_s = exact.projector(s)
    new = []
    for alpha in range(l):
        e = exact.qzeros(l)
        e[alpha] = Fraction(1)
        zs = proj_s @ e
        new.append(j_of(space, zs) @ sigma + j_of(space, e - zs))
    return space.with_generators(new, provenance=f"sigma-deform({space.provenance})")


@dataclass
class ReductionReport:
    r: int
    parity: str
    identities: dict = field(default_factory=dict)
    conclusion: str = ""

    @property
    def ok(self) -> bool:
        return all(self.identities.values())

    def to_dict(self) -> dict:
        return {"r": self.r, "parity": self.parity, "identities": self.identities,
                "conclusion": self.conclusion, "ok": self.ok}


def _matches(x, y) -> bool:
    if exact.is_exact(x) and exact.is_exact(y):
        return exact.is_zero(x - y)
    return bool(np.max(np.abs(exact.to_float(x) - exact.to_float(y))) <= FLOAT_TOL)


def verify_reduction(space: EndoSpace, spec: DeformSpec) -> ReductionReport:
    """Check the conjugation identities relating partial and full deformations.

    ``s`` must be spanned by orthonormal anticommutator directions
    ``A_1..A_r``. With ``A0(b) = A_10(b) ... A_r0(b)`` (identity on ``v(a)``)
    the odd case checks ``A0(b)^-1 J_Z A0(b) = J_Z^(a,b)`` on ``s``-perp and
    that ``J_Ai^(a,b)`` is fixed; the even case checks that ``J_Z`` is fixed on
    ``s``-perp and ``J_Ai^(a,b)`` is carried to ``J_Ai``.
    """
    if spec.s_subspace is None:
        raise ValueError("verify_reduction needs an s_subspace")
    s = _s_matrix(space, spec.s_subspace)
    if not exact.is_zero(s.T @ s - exact.qeye(s.shape[1])):
        raise ValueError("s_subspace columns must be orthonormal")
    r = s.shape[1]
    for k in range(r):
        if not is_anticommutator(space, s[:, k]):
            raise NotAnticommutator(f"s direction {k} is not an anticommutator")
    split = spec.splitting
    split.validate(space)
    pa, pb = split.part("a"), split.part("b")
    full = sigma_deform(space, DeformSpec(split, None))
    a0b = exact.qeye(space.n)
    for k in range(r):
        try:
            _, a_unit = unit_rescale(j_of(space, s[:, k]))
        except DegenerateA as exc:
            raise NotUnitRescalable(str(exc)) from exc
        a0b = a0b @ (pa + a_unit @ pb)
    a0b_inv = a0b.T  # product of orthogonal maps

    def conj(m):
        return a0b_inv @ m @ a0b

    ids: dict[str, bool] = {}
    comp = exact.nullspace(s.T)
    odd = r % 2 == 1
    for k in range(comp.shape[1]):
        z = comp[:, k]
        lhs = conj(j_of(space, z))
        target = j_of(full, z) if odd else j_of(space, z)
        ids[f"perp[{k}]"] = _matches(lhs, target)
    for k in range(r):
        lhs = conj(j_of(full, s[:, k]))
        target = j_of(full, s[:, k]) if odd else j_of(space, s[:, k])
        ids[f"A[{k}]"] = _matches(lhs, target)
    if odd:
        conclusion = "the sigma-deformation is isometric to the partial sigma_s-deformation"
    else:
        conclusion = "the sigma_s-deformation is isometric to the original space"
    return ReductionReport(r, "odd" if odd else "even", ids, conclusion)


def replace_anticommutator(space: EndoSpace, A_new) -> EndoSpace:
    """Swap the designated anticommutator for a conjugate one, keeping its complement."""
    ai = space.anticommutator_index
    if ai is None:
        raise ValueError("space has no designated anticommutator")
    a_new = np.asarray(A_new, dtype=object)
    try:
        a_new = exact.qmatrix(a_new)
    except TypeError:
        pass
    if a_new.shape != (space.n, space.n) or not _vanishes(a_new + a_new.T):
        raise NotConjugate("replacement must be a skew n x n matrix")
    ev_old = np.sort_complex(np.linalg.eigvals(exact.to_float(space.A)))
    ev_new = np.sort_complex(np.linalg.eigvals(exact.to_float(a_new)))
    if np.max(np.abs(np.sort(ev_old.imag) - np.sort(ev_new.imag))) > FLOAT_TOL:
        raise NotConjugate("replacement has a different eigenvalue multiset")
    for beta, b in enumerate(space.generators):
        if beta != ai and not _vanishes(a_new @ b + b @ a_new):
            raise NotAnticommutatorWithComplement(f"replacement fails to anticommute with generator {beta}")
    gens = list(space.generators)
    gens[ai] = a_new
    return space.with_generators(gens, provenance=f"replace-A({space.provenance})")


def sigma_a_partner(space: EndoSpace, assignment, splitting: Splitting | None = None) -> EndoSpace:
    """The sigma_A-deformation of ``space``: only the anticommutator flips on ``v(b)``."""
    if space.anticommutator_index is None:
        raise ValueError("space has no designated anticommutator")
    split = splitting or Splitting.from_space(space, assignment)
    e = exact.qzeros(space.l)
    e[space.anticommutator_index] = Fraction(1)
    return sigma_deform(space, DeformSpec(split, e.reshape(-1, 1)))


def is_sigma_a_equivalent(src: EndoSpace, dst: EndoSpace) -> bool:
    """Same ``n``, same complement of the anticommutator, conjugate anticommutators."""
    if src.n != dst.n or src.l != dst.l or src.anticommutator_index != dst.anticommutator_index:
        return False
    ai = src.anticommutator_index
    if ai is None:
        return False
    for beta in range(src.l):
        if beta != ai and not _matches(src.generators[beta], dst.generators[beta]):
            return False
    ev1 = np.sort(np.linalg.eigvals(exact.to_float(src.A)).imag)
    ev2 = np.sort(np.linalg.eigvals(exact.to_float(dst.A)).imag)
    return bool(np.max(np.abs(ev1 - ev2)) <= FLOAT_TOL)


__all__ = [
    "Splitting", "DeformSpec", "ReductionReport", "invariant_decomposition", "check_nondegenerating",
    "sigma_deform", "verify_reduction", "replace_anticommutator", "sigma_a_partner",
    "is_sigma_a_equivalent", "z_complement", "block_dim",
]
