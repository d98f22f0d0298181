"""Galerkin spectra of the left-invariant Laplacian on ball x torus and ball x box.

The X-basis is ``rho_j(|X|^2) h(X)`` with ``h`` running over an orthonormal
basis of spherical harmonics of degree ``q <= r_max`` and ``rho_j`` built from
Jacobi polynomials in ``u = 2|X|^2/R^2 - 1``; Dirichlet data multiply by
``R^2 - |X|^2``. Angular integrals are exact (computed once, then converted to
floats); radial integrals use Gauss-Jacobi quadrature.

With the frame ``X_i = d_i + 1/2 sum_a <J_a X, e_i> d_a`` the quadratic form of
a torus mode ``W`` is

    B_W[f, g] = int grad f . grad g* + |W|^2 f g* - i (D_W f) g* + 1/4 |J_W X|^2 f g*.

When every ``<J_a X, J_b X>`` is a multiple of ``|X|^2`` the form splits over
angular degree and over eigenvalues of ``-i D_W`` on each harmonic space, which
leaves small radial problems.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np
from scipy import linalg
from scipy.special import eval_jacobi, roots_jacobi, roots_legendre

from . import exact
from ._version import __version__
from .endo_core import EndoSpace
from .errors import NotPositiveDefinite, NotSymmetric, TruncationMismatch, TruncationTooSmall
from .polyharmonic import (
    CPoly,
    fischer_decompose,
    harmonic_basis,
    harmonic_coords,
    harmonic_seed_exponents,
    linear_field_derivative,
    monomials,
)

CLUSTER_RTOL = 1e-7
HERMITIAN_RTOL = 1e-12
RESIDUAL_RTOL = 1e-9


# --------------------------------------------------------------------------
# configuration types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """``kind`` is ``ball_torus`` (Z modulo a rectangular lattice) or ``ball_box``."""

    kind: str
    R: float = 1.0
    lengths: tuple = ()

    def __post_init__(self):
        if self.kind not in ("ball_torus", "ball_box"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.R > 0 or any(not L > 0 for L in self.lengths):
            raise ValueError("radius and lengths must be positive")
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "lengths", tuple(float(L) for L in self.lengths))

    @classmethod
    def torus(cls, l: int, R: float = 1.0, length: float = 2 * math.pi) -> "Domain":  # noqa: E741
        return cls("ball_torus", R, (length,) * l)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "R": self.R, "lengths": list(self.lengths)}

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        return cls(d["kind"], float(exact.frac(d.get("R", 1))),
                   tuple(_length(L) for L in d["lengths"]))


def _length(L) -> float:
    if isinstance(L, str) and L.strip().lower() in ("2pi", "2*pi", "tau"):
        return 2 * math.pi
    return float(exact.frac(L))


@dataclass(frozen=True)
class Truncation:
    r_max: int
    n_radial: int
    W_max: float = 0.0
    z_modes: int = 2

    def __post_init__(self):
        if self.r_max < 0 or self.n_radial < 1 or self.W_max < 0 or self.z_modes < 1:
            raise TruncationTooSmall("truncation parameters must give a nonempty basis")

    def to_dict(self) -> dict:
        return {"r_max": self.r_max, "n_radial": self.n_radial, "W_max": float(self.W_max),
                "z_modes": self.z_modes}

    @classmethod
    def from_dict(cls, d: dict) -> "Truncation":
        return cls(int(d["r_max"]), int(d["n_radial"]), float(exact.frac(d.get("W_max", 0))),
                   int(d.get("z_modes", 2)))


def torus_modes(domain: Domain, W_max: float) -> list[tuple]:
    """Dual-lattice vectors ``2 pi k / L`` with ``|W| <= W_max``, ordered by ``|W|`` then lexicographically."""
    ranges = [range(-int(W_max * L / (2 * math.pi)) - 1, int(W_max * L / (2 * math.pi)) + 2)
              for L in domain.lengths]
    out = []
    for k in product(*ranges):
        W = tuple(2 * math.pi * ki / L for ki, L in zip(k, domain.lengths))
        if sum(w * w for w in W) <= W_max * W_max * (1 + 1e-12):
            out.append(W)
    return sorted(out, key=lambda W: (round(sum(w * w for w in W), 9), W))


# --------------------------------------------------------------------------
# linear algebra
# --------------------------------------------------------------------------

def _asymmetry(m: np.ndarray) -> float:
    scale = max(np.abs(m).max(), 1e-300)
    return float(np.abs(m - m.conj().T).max() / scale)


def herm_gen_eig(stiffness, mass, return_vectors: bool = False):
    """Eigenvalues of ``B v = lam M v`` for Hermitian ``B`` and positive-definite ``M``, ascending."""
    b = np.asarray(stiffness)
    m = np.asarray(mass)
    try:
        low = linalg.cholesky(m, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite("mass matrix is not positive definite") from exc
    c = linalg.solve_triangular(low, b, lower=True)
    c = linalg.solve_triangular(low, c.conj().T, lower=True).conj().T
    c = (c + c.conj().T) / 2
    w, y = linalg.eigh(c)
    v = linalg.solve_triangular(low.conj().T, y, lower=False)
    bnorm = max(np.linalg.norm(b, 2), 1e-300)
    res = np.linalg.norm(b @ v - (m @ v) * w, axis=0) / np.linalg.norm(v, axis=0)
    if res.size and res.max() > RESIDUAL_RTOL * bnorm:
        raise NotPositiveDefinite(f"pencil residual {res.max():.3e} exceeds tolerance; mass is ill-conditioned")
    return (w, v) if return_vectors else w


def cluster(values, rtol: float = CLUSTER_RTOL) -> list[tuple[float, int]]:
    """Group sorted values whose gaps are within ``rtol`` (relative to ``max(|x|, 1)``)."""
    out: list[list] = []
    for x in values:
        if out and abs(x - out[-1][0]) <= rtol * max(abs(x), abs(out[-1][0]), 1.0):
            out[-1][1] += 1
        else:
            out.append([float(x), 1])
    return [(v, k) for v, k in out]


# --------------------------------------------------------------------------
# angular data (exact, converted once)
# --------------------------------------------------------------------------

def _fischer_weight(e: tuple) -> int:
    w = 1
    for k in e:
        w *= math.factorial(k)
    return w


@lru_cache(maxsize=None)
def _orthonormal_frame(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """``(G, T)``: sphere Gram matrix of the seed basis of ``H^(q)`` and ``T`` with ``T^t G T = I``.

    For harmonic polynomials the sphere average of ``h h'`` equals the Fischer
    pairing divided by ``n (n + 2) ... (n + 2q - 2)``.
    """
    basis = harmonic_basis(n, q)
    mons = list(monomials(n, q))
    index = {e: i for i, e in enumerate(mons)}
    coef = np.zeros((len(basis), len(mons)))
    for i, b in enumerate(basis):
        for e, v in b.terms.items():
            coef[i, index[e]] = float(v.x)
    weights = np.array([_fischer_weight(e) for e in mons], dtype=float)
    denom = 1.0
    for k in range(q):
        denom *= n + 2 * k
    gram = (coef * weights) @ coef.T / denom
    low = linalg.cholesky(gram, lower=True)
    t = linalg.solve_triangular(low, np.eye(len(basis)), lower=True).T
    return gram, t


def _coords_float(h: CPoly, q: int) -> np.ndarray:
    return np.array([float(c.x) + 1j * float(c.y) for c in harmonic_coords(h, q)])


def _quadratic_form_matrix(ja: np.ndarray, jb: np.ndarray) -> np.ndarray:
    """Symmetric matrix of ``X -> <J_a X, J_b X>``."""
    m = ja.T @ jb
    return (m + m.T) / 2


def _quadratic_poly(sym: np.ndarray) -> CPoly:
    n = sym.shape[0]
    out = CPoly(n)
    for i in range(n):
        for k in range(n):
            if sym[i, k] != 0:
                e = [0] * n
                e[i] += 1
                e[k] += 1
                out = out + CPoly.monomial(e, sym[i, k])
    return out


class AngularData:
    """Matrices on orthonormal harmonic bases of degree ``<= r_max`` for one space.

    ``deriv[a][q]`` is ``<D_a e_i, e_j>`` (real antisymmetric). If every quadratic
    form ``<J_a X, J_b X>`` equals ``c_ab |X|^2``, ``radial_coeffs`` holds ``c``;
    otherwise ``quad[(a, b)][(q, q')]`` holds ``<<J_a X, J_b X> e_i, e'_j>``.
    """

    def __init__(self, space: EndoSpace, r_max: int):
        self.space = space
        self.n = space.n
        self.l = space.l
        self.r_max = r_max
        self.degrees = list(range(r_max + 1))
        self.dims = {q: len(harmonic_seed_exponents(self.n, q)) for q in self.degrees}
        gens = [g if space.is_exact else np.asarray(g, dtype=float) for g in space.generators]
        self.deriv = [{q: self._derivative(g, q) for q in self.degrees} for g in gens]
        self.radial_coeffs = self._radial_coeffs(gens)
        self.quad = None if self.radial_coeffs is not None else self._quad(gens)

    def _derivative(self, g, q: int) -> np.ndarray:
        gram, t = _orthonormal_frame(self.n, q)
        if q == 0:
            return np.zeros((1, 1))
        cols = np.array([_coords_float(linear_field_derivative(g, b), q).real
                         for b in harmonic_basis(self.n, q)]).T
        return t.T @ (cols.T @ gram) @ t

    def _radial_coeffs(self, gens) -> np.ndarray | None:
        c = np.zeros((self.l, self.l))
        for a in range(self.l):
            for b in range(self.l):
                sym = _quadratic_form_matrix(gens[a], gens[b])
                diag = sym[0, 0]
                off = sym - diag * (exact.qeye(self.n) if self.space.is_exact else np.eye(self.n))
                if self.space.is_exact:
                    if not exact.is_zero(off):
                        return None
                elif np.abs(np.asarray(off, dtype=float)).max() > 1e-12:
                    return None
                c[a, b] = float(diag)
        return c

    def _quad(self, gens) -> dict:
        out = {}
        for a in range(self.l):
            for b in range(a, self.l):
                poly = _quadratic_poly(_quadratic_form_matrix(gens[a], gens[b]))
                blocks = {}
                for q in self.degrees:
                    _, tq = _orthonormal_frame(self.n, q)
                    cols = {q2: np.zeros((self.dims[q2], self.dims[q]))
                            for q2 in (q - 2, q, q + 2) if 0 <= q2 <= self.r_max}
                    for i, h in enumerate(harmonic_basis(self.n, q)):
                        for j, comp in fischer_decompose(poly * h).items():
                            q2 = q + 2 - 2 * j
                            if q2 in cols:
                                cols[q2][:, i] = _coords_float(comp, q2).real
                    for q2, cmat in cols.items():
                        gram2, t2 = _orthonormal_frame(self.n, q2)
                        # <Q e_i, e'_j> over the seed bases, then orthonormalized
                        blocks[(q, q2)] = tq.T @ (cmat.T @ gram2) @ t2
                out[(a, b)] = out[(b, a)] = {k: v for k, v in blocks.items()}
        return out

    @property
    def is_radial(self) -> bool:
        return self.radial_coeffs is not None

    def deriv_w(self, W, q: int) -> np.ndarray:
        return sum(w * self.deriv[a][q] for a, w in enumerate(W) if w)

    def quad_w(self, W, q: int, q2: int) -> np.ndarray:
        if self.is_radial:
            if q != q2:
                return np.zeros((self.dims[q], self.dims[q2]))
            return float(np.asarray(W) @ self.radial_coeffs @ np.asarray(W)) * np.eye(self.dims[q])
        out = np.zeros((self.dims[q], self.dims[q2]))
        for a, wa in enumerate(W):
            for b, wb in enumerate(W):
                if wa and wb:
                    blk = self.quad[(a, b)].get((q, q2))
                    if blk is not None:
                        out = out + wa * wb * blk
        return out

    def quad_ab(self, a: int, b: int, q: int, q2: int) -> np.ndarray:
        if self.is_radial:
            if q != q2:
                return np.zeros((self.dims[q], self.dims[q2]))
            return self.radial_coeffs[a, b] * np.eye(self.dims[q])
        blk = self.quad[(a, b)].get((q, q2))
        return np.zeros((self.dims[q], self.dims[q2])) if blk is None else blk


# --------------------------------------------------------------------------
# radial data
# --------------------------------------------------------------------------

class RadialData:
    """Orthonormal radial functions per angular degree and their integrals.

    All integrals are ``int_0^R (...) t^{n-1} dt`` up to one common constant.
    """

    def __init__(self, n: int, R: float, n_radial: int, r_max: int, bc: str):
        if bc not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown boundary condition {bc!r}")
        self.n, self.R, self.N, self.bc = n, R, n_radial, bc
        beta0 = n / 2 - 1
        u, w = roots_jacobi(n_radial + r_max + 8, 0.0, beta0)
        self.s = R * R * (1 + u) / 2
        self.w = w
        self.u = u
        self.vals, self.dvals = {}, {}
        self.mass, self.stiff = {}, {}
        for q in range(r_max + 1):
            rho, drho = self._raw(q)
            m = (rho * self.s ** q * w) @ rho.T
            low = linalg.cholesky(m, lower=True)
            t = linalg.solve_triangular(low, np.eye(n_radial), lower=True)
            rho, drho = t @ rho, t @ drho
            self.vals[q], self.dvals[q] = rho, drho
            self.mass[q] = (rho * self.s ** q * w) @ rho.T
            self.stiff[q] = self._stiffness(q, rho, drho)

    def _raw(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        dirichlet = self.bc == "dirichlet"
        a, b = (2.0 if dirichlet else 0.0), q + self.n / 2 - 1
        u = self.u
        du_ds = 2 / (self.R * self.R)
        rho, drho = [], []
        for j in range(self.N):
            p = eval_jacobi(j, a, b, u)
            dp = 0.5 * (j + a + b + 1) * eval_jacobi(j - 1, a + 1, b + 1, u) if j else np.zeros_like(u)
            if dirichlet:
                rho.append((1 - u) * p)
                drho.append(((1 - u) * dp - p) * du_ds)
            else:
                rho.append(p)
                drho.append(dp * du_ds)
        return np.array(rho), np.array(drho)

    def _stiffness(self, q: int, rho, drho) -> np.ndarray:
        s, w, n = self.s, self.w, self.n
        k = 4 * (drho * s ** (q + 1) * w) @ drho.T
        if q:
            k += q * (2 * q + n - 2) * (rho * s ** (q - 1) * w) @ rho.T
            cross = 2 * q * (rho * s ** q * w) @ drho.T
            k += cross + cross.T
        return (k + k.T) / 2

    def moment(self, q: int, q2: int, extra: float = 1.0) -> np.ndarray:
        """``int rho^q_i rho^q2_j t^{q+q2+2 extra}``."""
        return (self.vals[q] * self.s ** ((q + q2) / 2 + extra) * self.w) @ self.vals[q2].T


# --------------------------------------------------------------------------
# assembly
# --------------------------------------------------------------------------

@dataclass
class GalerkinBlock:
    W: tuple
    degrees: list
    n_radial: int
    stiffness: np.ndarray
    mass: np.ndarray
    labels: list = field(default_factory=list)

    def __post_init__(self):
        if self.stiffness.shape[0] == 0:
            raise TruncationTooSmall("empty Galerkin basis")
        for name, m in (("stiffness", self.stiffness), ("mass", self.mass)):
            if _asymmetry(m) > HERMITIAN_RTOL:
                raise NotSymmetric(f"{name} matrix is not Hermitian")

    def eigenvalues(self) -> np.ndarray:
        return herm_gen_eig(self.stiffness, self.mass)


def _x_operators(ang: AngularData, rad: RadialData):
    """Full X-space matrices ``K``, ``M``, ``D_a``, ``Q_ab`` over index ``(q, angular, radial)``."""
    qs = ang.degrees
    sizes = [ang.dims[q] * rad.N for q in qs]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offs[-1])
    K = np.zeros((total, total))
    M = np.zeros((total, total))
    D = [np.zeros((total, total)) for _ in range(ang.l)]
    Q = {}
    for i, q in enumerate(qs):
        sl = slice(offs[i], offs[i + 1])
        eye = np.eye(ang.dims[q])
        K[sl, sl] = np.kron(eye, rad.stiff[q])
        M[sl, sl] = np.kron(eye, rad.mass[q])
        for a in range(ang.l):
            D[a][sl, sl] = np.kron(ang.deriv[a][q], rad.mass[q])
    for a in range(ang.l):
        for b in range(a, ang.l):
            m = np.zeros((total, total))
            for i, q in enumerate(qs):
                for j, q2 in enumerate(qs):
                    if abs(q - q2) > 2:
                        continue
                    blk = ang.quad_ab(a, b, q, q2)
                    if np.any(blk):
                        m[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] = np.kron(blk, rad.moment(q, q2))
            Q[(a, b)] = Q[(b, a)] = m
    labels = [(q, k, j) for q in qs for k in range(ang.dims[q]) for j in range(rad.N)]
    return K, M, D, Q, labels


def _torus_matrix(K, M, D, Q, W) -> np.ndarray:
    B = K + sum(w * w for w in W) * M + 0j
    for a, w in enumerate(W):
        if w:
            B = B - 1j * w * D[a]
    for a, wa in enumerate(W):
        for b, wb in enumerate(W):
            if wa and wb:
                B = B + 0.25 * wa * wb * Q[(a, b)]
    return (B + B.conj().T) / 2


def _box_factors(L: float, K: int, bc: str):
    """1D matrices ``G[k,k'] = int psi_k psi'_k'`` and ``S[k,k'] = int psi'_k psi'_k'``."""
    z, w = roots_legendre(max(64, 8 * K))
    z = L * (z + 1) / 2
    w = w * L / 2
    ks = range(1, K + 1) if bc == "dirichlet" else range(K)
    psi, dpsi = [], []
    for k in ks:
        a = math.pi * k / L
        if bc == "dirichlet":
            psi.append(math.sqrt(2 / L) * np.sin(a * z))
            dpsi.append(math.sqrt(2 / L) * a * np.cos(a * z))
        else:
            c = math.sqrt((1 if k == 0 else 2) / L)
            psi.append(c * np.cos(a * z))
            dpsi.append(-c * a * np.sin(a * z))
    psi, dpsi = np.array(psi), np.array(dpsi)
    return (psi * w) @ dpsi.T, (dpsi * w) @ dpsi.T, list(ks)


def _kron_slots(mats: list[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out


def assemble(space: EndoSpace, domain: Domain, W, trunc: Truncation, bc: str = "dirichlet") -> GalerkinBlock:
    """Stiffness and mass over all angular degrees ``<= r_max`` jointly.

    For ``ball_torus`` this is the block of mode ``W``; for ``ball_box`` the Z
    factor is expanded in sine (Dirichlet) or cosine (Neumann) modes, ``z_modes``
    per direction, and ``W`` is ignored.
    """
    ang = AngularData(space, trunc.r_max)
    rad = RadialData(space.n, domain.R, trunc.n_radial, trunc.r_max, bc)
    K, M, D, Q, labels = _x_operators(ang, rad)
    if domain.kind == "ball_torus":
        W = tuple(float(w) for w in W)
        return GalerkinBlock(W, ang.degrees, rad.N, _torus_matrix(K, M, D, Q, W), M + 0j, labels)
    if len(domain.lengths) != space.l:
        raise ValueError("box needs one length per Z direction")
    factors = [_box_factors(L, trunc.z_modes, bc) for L in domain.lengths]
    eyes = [np.eye(len(f[2])) for f in factors]

    def slot(repl: dict) -> np.ndarray:
        return _kron_slots([repl.get(a, eyes[a]) for a in range(space.l)])

    ez = slot({})
    B = np.kron(K, ez) + np.kron(M, sum(slot({a: factors[a][1]}) for a in range(space.l)))
    for a in range(space.l):
        B = B + np.kron(D[a], slot({a: factors[a][0]}))
    for a in range(space.l):
        for b in range(space.l):
            zab = slot({a: factors[a][1]}) if a == b else slot({a: factors[a][0].T, b: factors[b][0]})
            B = B + 0.25 * np.kron(Q[(a, b)], zab)
    B = (B + B.T) / 2
    zlabels = list(product(*[f[2] for f in factors]))
    return GalerkinBlock(None, ang.degrees, rad.N, B + 0j, np.kron(M, ez) + 0j,
                         [(x, z) for x in labels for z in zlabels])


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------

@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    sources: list
    bc: str
    domain: dict
    trunc: dict
    space: str
    blocks: list = field(default_factory=list)
    version: str = __version__

    def __post_init__(self):
        order = np.argsort(self.eigenvalues, kind="stable")
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)[order]
        self.sources = [self.sources[i] for i in order]

    @property
    def multiplicities(self) -> list[tuple[float, int]]:
        return cluster(self.eigenvalues)

    def multiplicity_per_index(self) -> list[int]:
        out = []
        for _, k in self.multiplicities:
            out.extend([k] * k)
        return out

    def metadata(self) -> dict:
        return {"bc": self.bc, "domain": self.domain, "trunc": self.trunc}

    def to_dict(self) -> dict:
        return {
            "version": self.version, "space": self.space, **self.metadata(),
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "multiplicities": [{"value": v, "multiplicity": k} for v, k in self.multiplicities],
            "sources": [{"W": list(W) if W is not None else None, "degree": d} for W, d in self.sources],
            "blocks": self.blocks,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumReport":
        sources = [(None if e["W"] is None else tuple(e["W"]), e["degree"]) for e in d["sources"]]
        return cls(np.array(d["eigenvalues"], dtype=float), sources, d["bc"], d["domain"], d["trunc"],
                   d.get("space", ""), d.get("blocks", []), d.get("version", __version__))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["index", "eigenvalue", "multiplicity", "W", "degree"])
        for i, (lam, k, (W, d)) in enumerate(zip(self.eigenvalues, self.multiplicity_per_index(), self.sources)):
            wstr = "" if W is None else " ".join(repr(float(w)) for w in W)
            wr.writerow([i, repr(float(lam)), k, wstr, "" if d is None else d])
        return buf.getvalue()


def _threads(threads: int | None) -> int:
    if threads:
        return max(1, int(threads))
    env = os.environ.get("ISOSPEC_THREADS")
    return max(1, int(env)) if env else 1


def _decoupled_mode(ang: AngularData, rad: RadialData, W) -> tuple[list, list, list]:
    eigs, srcs, blocks = [], [], []
    w2 = sum(w * w for w in W)
    for q in ang.degrees:
        h = -1j * ang.deriv_w(W, q) if any(W) else np.zeros((ang.dims[q], ang.dims[q]))
        qw = float(ang.quad_w(W, q, q)[0, 0]) if ang.dims[q] else 0.0
        mus = cluster(linalg.eigvalsh((h + h.conj().T) / 2), rtol=1e-9)
        for mu, mult in mus:
            b = rad.stiff[q] + (w2 + mu) * rad.mass[q] + 0.25 * qw * rad.moment(q, q)
            lam = herm_gen_eig((b + b.T) / 2, rad.mass[q])
            eigs.extend(np.repeat(lam, mult))
            srcs.extend([(tuple(W), q)] * (len(lam) * mult))
            blocks.append({"W": list(W), "degree": q, "mu": mu, "multiplicity": mult, "size": rad.N})
    return eigs, srcs, blocks


def spectrum(space: EndoSpace, domain: Domain, bc: str, trunc: Truncation, threads: int | None = None,
             decouple: bool = True) -> SpectrumReport:
    """All Galerkin eigenvalues for angular degree ``<= r_max`` and, on the torus, ``|W| <= W_max``."""
    meta = dict(bc=bc, domain=domain.to_dict(), trunc=trunc.to_dict(), space=space.provenance or "")
    rad = RadialData(space.n, domain.R, trunc.n_radial, trunc.r_max, bc)
    if domain.kind == "ball_box":
        blk = assemble(space, domain, None, trunc, bc)
        lam = blk.eigenvalues()
        return SpectrumReport(lam, [(None, None)] * len(lam), **meta,
                              blocks=[{"W": None, "degree": None, "size": len(lam)}])
    if len(domain.lengths) != space.l:
        raise ValueError("torus needs one length per Z direction")
    ang = AngularData(space, trunc.r_max)
    modes = torus_modes(domain, trunc.W_max)
    if decouple and ang.is_radial:
        work = lambda W: _decoupled_mode(ang, rad, W)  # noqa: E731
    else:
        K, M, D, Q, _ = _x_operators(ang, rad)

        def work(W):
            lam = herm_gen_eig(_torus_matrix(K, M, D, Q, W), M)
            return list(lam), [(tuple(W), None)] * len(lam), [{"W": list(W), "degree": None, "size": len(lam)}]

    with ThreadPoolExecutor(max_workers=_threads(threads)) as pool:
        results = list(pool.map(work, modes))
    eigs, srcs, blocks = [], [], []
    for e, s, b in results:
        eigs.extend(e)
        srcs.extend(s)
        blocks.extend(b)
    return SpectrumReport(np.array(eigs), srcs, **meta, blocks=blocks)


@dataclass
class ComparisonReport:
    count: int
    tol: float
    max_rel_diff: float
    first_mismatch: int | None
    diffs: list

    @property
    def ok(self) -> bool:
        return self.first_mismatch is None

    def to_dict(self) -> dict:
        return {"count": self.count, "tol": self.tol, "max_rel_diff": self.max_rel_diff,
                "first_mismatch": self.first_mismatch, "ok": self.ok, "diffs": self.diffs}


def compare_spectra(r1: SpectrumReport, r2: SpectrumReport, count: int, tol: float) -> ComparisonReport:
    """Relative differences ``|a - b| / max(|a|, |b|, 1)`` of the first ``count`` eigenvalues."""
    if r1.metadata() != r2.metadata():
        raise TruncationMismatch("spectra were computed with different truncation, domain or boundary data")
    if count > min(len(r1.eigenvalues), len(r2.eigenvalues)):
        raise TruncationMismatch(f"only {min(len(r1.eigenvalues), len(r2.eigenvalues))} eigenvalues available")
    a, b = r1.eigenvalues[:count], r2.eigenvalues[:count]
    diffs = np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1.0)
    bad = np.nonzero(diffs > tol)[0]
    return ComparisonReport(count, tol, float(diffs.max()) if count else 0.0,
                            int(bad[0]) if bad.size else None, [float(d) for d in diffs])
