"""Exact complex polynomials on the X-space and spherical-harmonic machinery.

Coefficients are Gaussian rationals (sympy ``QQ_I``). A polynomial is a
sparse map from exponent tuples to coefficients.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import QQ, QQ_I

from . import exact
from .errors import NotHomogeneous, NotUnit, ZeroProjection

ZERO = QQ_I(0, 0)
ONE = QQ_I(1, 0)
I_UNIT = QQ_I(0, 1)


def cq(x):
    """Coerce to a Gaussian rational."""
    if isinstance(x, type(ZERO)):
        return x
    if isinstance(x, tuple):
        re, im = x
        re, im = exact.frac(re), exact.frac(im)
        return QQ_I(QQ(re.numerator, re.denominator), QQ(im.numerator, im.denominator))
    if isinstance(x, complex):
        return cq((Fraction(x.real), Fraction(x.imag)))
    f = exact.frac(x)
    return QQ_I(QQ(f.numerator, f.denominator), QQ(0))


def re_im(c) -> tuple[Fraction, Fraction]:
    return exact.frac(c.x), exact.frac(c.y)


def conj(c):
    return QQ_I(c.x, -c.y)


class CPoly:
    """Polynomial in ``x_1..x_n`` with exact complex rational coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict | None = None):
        self.n = n
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    # -- constructors ----------------------------------------------------
    @classmethod
    def const(cls, n: int, c) -> "CPoly":
        return cls(n, {(0,) * n: cq(c)})

    @classmethod
    def var(cls, n: int, i: int) -> "CPoly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): ONE})

    @classmethod
    def monomial(cls, exps, c=1) -> "CPoly":
        exps = tuple(int(e) for e in exps)
        return cls(len(exps), {exps: cq(c)})

    @classmethod
    def linear(cls, coeffs) -> "CPoly":
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = cq(c)
        return cls(n, terms)

    @classmethod
    def norm2(cls, n: int) -> "CPoly":
        return _norm2(n)

    # -- arithmetic ------------------------------------------------------
    def copy(self) -> "CPoly":
        return CPoly(self.n, dict(self.terms))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, CPoly):
            other = CPoly.const(self.n, other)
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other) -> "CPoly":
        if not isinstance(other, CPoly):
            other = CPoly.const(self.n, other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, ZERO) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return CPoly(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> "CPoly":
        return CPoly(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "CPoly":
        if not isinstance(other, CPoly):
            other = CPoly.const(self.n, other)
        return self + (-other)

    def __rsub__(self, other) -> "CPoly":
        return (-self) + other

    def scale(self, c) -> "CPoly":
        c = cq(c)
        if not c:
            return CPoly(self.n)
        return CPoly(self.n, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other) -> "CPoly":
        if not isinstance(other, CPoly):
            return self.scale(other)
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                s = out.get(k, ZERO) + v1 * v2
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return CPoly(self.n, out)

    def __rmul__(self, other) -> "CPoly":
        return self.scale(other)

    def __pow__(self, p: int) -> "CPoly":
        out = CPoly.const(self.n, 1)
        base = self
        while p:
            if p & 1:
                out = out * base
            p >>= 1
            if p:
                base = base * base
        return out

    def conjugate(self) -> "CPoly":
        return CPoly(self.n, {k: conj(v) for k, v in self.terms.items()})

    # -- structure -------------------------------------------------------
    def degrees(self) -> set[int]:
        return {sum(k) for k in self.terms}

    def degree(self) -> int:
        return max(self.degrees(), default=-1)

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def homogeneous_parts(self) -> dict[int, "CPoly"]:
        parts: dict[int, dict] = {}
        for k, v in self.terms.items():
            parts.setdefault(sum(k), {})[k] = v
        return {d: CPoly(self.n, t) for d, t in sorted(parts.items())}

    def coeff(self, exps) -> object:
        return self.terms.get(tuple(exps), ZERO)

    def diff(self, i: int) -> "CPoly":
        out = {}
        for k, v in self.terms.items():
            e = k[i]
            if e:
                kk = k[:i] + (e - 1,) + k[i + 1:]
                out[kk] = v * e
        return CPoly(self.n, out)

    def evaluate(self, point):
        pt = [cq(p) for p in point]
        total = ZERO
        for k, v in self.terms.items():
            t = v
            for p, e in zip(pt, k):
                if e:
                    t = t * p ** e
            total += t
        return total

    def substitute_linear(self, m: np.ndarray) -> "CPoly":
        """``X -> P(M X)`` for an exact real matrix ``M``."""
        rows = [CPoly.linear([m[i, j] for j in range(self.n)]) for i in range(self.n)]
        powers: dict[tuple[int, int], CPoly] = {}

        def pw(i, e):
            key = (i, e)
            if key not in powers:
                powers[key] = rows[i] ** e
            return powers[key]

        out = CPoly(self.n)
        for k, v in self.terms.items():
            t = CPoly.const(self.n, v)
            for i, e in enumerate(k):
                if e:
                    t = t * pw(i, e)
            out = out + t
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, v in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(k) if e)
            parts.append(f"({v})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    # -- serialization ---------------------------------------------------
    def to_list(self) -> list[dict]:
        out = []
        for k, v in sorted(self.terms.items()):
            re, im = re_im(v)
            out.append({"exponents": list(k), "re": exact.fmt(re), "im": exact.fmt(im)})
        return out

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "terms": self.to_list()})

    @classmethod
    def from_list(cls, n: int, items) -> "CPoly":
        p = CPoly(n)
        for it in items:
            p = p + CPoly.monomial(it["exponents"], (it.get("re", "0"), it.get("im", "0")))
        return p

    @classmethod
    def from_json(cls, text: str) -> "CPoly":
        d = json.loads(text)
        return cls.from_list(d["n"], d["terms"])


@lru_cache(maxsize=None)
def _norm2_cached(n: int) -> CPoly:
    terms = {}
    for i in range(n):
        e = [0] * n
        e[i] = 2
        terms[tuple(e)] = ONE
    return CPoly(n, terms)


def _norm2(n: int) -> CPoly:
    return _norm2_cached(n).copy()


def norm2_power(n: int, s: int) -> CPoly:
    return _norm2_cached(n) ** s


def times_norm2(p: CPoly) -> CPoly:
    """``|X|^2 P``."""
    out: dict = {}
    for k, v in p.terms.items():
        for i in range(p.n):
            kk = k[:i] + (k[i] + 2,) + k[i + 1:]
            s = out.get(kk, ZERO) + v
            if s:
                out[kk] = s
            else:
                out.pop(kk, None)
    return CPoly(p.n, out)


def laplacian_x(p: CPoly) -> CPoly:
    """Euclidean Laplacian ``sum_i d^2 P / dx_i^2``."""
    out: dict = {}
    for k, v in p.terms.items():
        for i, e in enumerate(k):
            if e >= 2:
                kk = k[:i] + (e - 2,) + k[i + 1:]
                s = out.get(kk, ZERO) + v * (e * (e - 1))
                if s:
                    out[kk] = s
                else:
                    out.pop(kk, None)
    return CPoly(p.n, out)


def linear_field_derivative(m: np.ndarray, p: CPoly) -> CPoly:
    """Derivative of ``P`` along the linear vector field ``X -> M X``."""
    n = p.n
    nz = [(i, j, cq(m[i, j])) for i in range(n) for j in range(n) if m[i, j] != 0]
    out: dict = {}
    for k, v in p.terms.items():
        for i, j, mij in nz:
            e = k[i]
            if not e:
                continue
            kk = list(k)
            kk[i] -= 1
            kk[j] += 1
            kk = tuple(kk)
            s = out.get(kk, ZERO) + v * mij * e
            if s:
                out[kk] = s
            else:
                out.pop(kk, None)
    return CPoly(n, out)


def dir_derivative(space, alpha, p: CPoly) -> CPoly:
    """``D_alpha P = <grad P, J_alpha X>``; ``alpha`` is a generator index or a Z-vector."""
    from .endo_core import j_of

    if isinstance(alpha, (int, np.integer)):
        m = space.generators[int(alpha)]
    else:
        m = j_of(space, alpha)
    return linear_field_derivative(m, p)


# --------------------------------------------------------------------------
# Theta calculus
# --------------------------------------------------------------------------

def _check_unit(a0: np.ndarray) -> None:
    n = a0.shape[0]
    if not exact.is_zero(a0 @ a0 + exact.qeye(n)):
        raise NotUnit("A0 must satisfy A0^2 = -id exactly")


def theta(a0, q) -> CPoly:
    """``Theta_Q(X) = <Q + i A0 Q, X>``."""
    a0 = exact.qmatrix(a0)
    _check_unit(a0)
    q = exact.qvector(q)
    aq = a0 @ q
    return CPoly.linear([cq((q[k], aq[k])) for k in range(len(q))])


def theta_bar(a0, q) -> CPoly:
    return theta(a0, q).conjugate()


# --------------------------------------------------------------------------
# harmonic projection
# --------------------------------------------------------------------------

def _require_homogeneous(p: CPoly) -> int:
    degs = p.degrees()
    if len(degs) > 1:
        raise NotHomogeneous(f"polynomial has degrees {sorted(degs)}")
    return degs.pop() if degs else 0


def _s_lines(p: CPoly, r: int) -> list[CPoly]:
    """Lines ``R_0 = P, R_1, ...`` with ``sum |X|^{2s} R_s`` harmonic.

    Applying the Laplacian line by line gives
    ``Delta R_s + 2 (s+1) (n + 2r - 4 - 2s) R_{s+1} = 0``.
    """
    n = p.n
    lines = [p]
    s = 0
    cur = p
    while True:
        lap = laplacian_x(cur)
        if lap.is_zero():
            break
        denom = 2 * (s + 1) * (n + 2 * r - 4 - 2 * s)
        cur = lap.scale(Fraction(-1, denom))
        lines.append(cur)
        s += 1
    return lines


def _horner(lines: list[CPoly]) -> CPoly:
    acc = lines[-1]
    for line in reversed(lines[:-1]):
        acc = line + times_norm2(acc)
    return acc


def harmonic_project(p: CPoly) -> CPoly:
    """Harmonic component of a homogeneous ``P`` in ``P = H + |X|^2 P'``."""
    r = _require_homogeneous(p)
    if p.is_zero():
        return p
    return _horner(_s_lines(p, r))


def fischer_split(p: CPoly) -> tuple[CPoly, CPoly]:
    """``(H, Q)`` with ``P = H + |X|^2 Q`` and ``H`` harmonic (``P`` homogeneous)."""
    r = _require_homogeneous(p)
    if p.is_zero():
        return p, p
    lines = _s_lines(p, r)
    h = _horner(lines)
    if len(lines) == 1:
        return h, CPoly(p.n)
    return h, -_horner(lines[1:])


def fischer_decompose(p: CPoly) -> dict[int, CPoly]:
    """Homogeneous ``P`` of degree d as ``sum_j |X|^{2j} H_{d-2j}``; returns ``{j: H}``."""
    out = {}
    j = 0
    cur = p
    _require_homogeneous(p)
    while not cur.is_zero():
        h, cur = fischer_split(cur)
        if not h.is_zero():
            out[j] = h
        j += 1
    return out


@dataclass
class GradedHarmonic:
    """Finite sum of harmonic homogeneous components, keyed by degree."""

    n: int
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        self.components = {int(r): h for r, h in sorted(self.components.items()) if not h.is_zero()}

    def items(self):
        return sorted(self.components.items())

    def to_poly(self) -> CPoly:
        """Sum of the components (equal to the expanded function on the unit sphere)."""
        out = CPoly(self.n)
        for _, h in self.items():
            out = out + h
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedHarmonic) and self.n == other.n and self.components == other.components

    def to_list(self) -> list:
        return [{"degree": r, "poly": h.to_list()} for r, h in self.items()]


def spherical_expand(p: CPoly) -> GradedHarmonic:
    """Harmonic components ``h_q`` with ``P|_S = sum_q h_q|_S``."""
    comps: dict[int, CPoly] = {}
    for d, part in p.homogeneous_parts().items():
        for j, h in fischer_decompose(part).items():
            q = d - 2 * j
            comps[q] = comps[q] + h if q in comps else h
    return GradedHarmonic(p.n, comps)


@dataclass
class SphereLaplacian:
    radial_part: CPoly  # |X|^2 Delta_X P
    eigen_part: CPoly   # -r (r + n - 2) P

    @property
    def total(self) -> CPoly:
        return self.radial_part + self.eigen_part


def sphere_laplacian(p: CPoly) -> SphereLaplacian:
    """Degree-preserving representative of the spherical Laplacian of ``P|_S``."""
    r = _require_homogeneous(p)
    return SphereLaplacian(times_norm2(laplacian_x(p)), p.scale(-r * (r + p.n - 2)))


def theta_product_coefficients(n: int, p: int, r: int, q_norm2=1) -> list[Fraction]:
    """Coefficients ``A_s`` of the harmonic projection of ``Theta_Q^p Theta_bar_Q^{r-p}``.

    ``h(Theta^p Theta_bar^{r-p}) = sum_s A_s |X|^{2s} Theta^{p-s} Theta_bar^{r-p-s}`` with
    ``2|Q|^2 (p-s)(r-p-s) A_s + (s+1)(n + 2r - 4 - 2s) A_{s+1} = 0``.
    """
    q_norm2 = exact.frac(q_norm2)
    coeffs = [Fraction(1)]
    for s in range(min(p, r - p)):
        nxt = -2 * q_norm2 * (p - s) * (r - p - s) * coeffs[-1] / ((s + 1) * (n + 2 * r - 4 - 2 * s))
        coeffs.append(nxt)
    return coeffs


def harmonic_theta_product(a0, q, p: int, r: int) -> CPoly:
    """Fast path for single-``Q`` products via :func:`theta_product_coefficients`."""
    a0 = exact.qmatrix(a0)
    q = exact.qvector(q)
    th, thb = theta(a0, q), theta_bar(a0, q)
    n = a0.shape[0]
    out = CPoly(n)
    for s, a in enumerate(theta_product_coefficients(n, p, r, q @ q)):
        out = out + (norm2_power(n, s) * th ** (p - s) * thb ** (r - p - s)).scale(a)
    return out


def radial_kernel(q: int, q_unit, a0=None) -> CPoly:
    """Degree-``q`` zonal harmonic about ``Q_u``, normalized to 1 at ``X = Q_u``."""
    qu = exact.qvector(q_unit)
    if qu @ qu != 1:
        raise ValueError("Q_u must be a unit vector")
    h = harmonic_project(CPoly.linear([cq(c) for c in qu]) ** q)
    val = h.evaluate(qu)
    if not val:
        raise ZeroProjection(f"degree-{q} projection vanishes at Q_u")
    return h.scale(ONE / val)


# --------------------------------------------------------------------------
# sphere integrals
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _sphere_moment(exps: tuple) -> Fraction:
    if any(e % 2 for e in exps):
        return Fraction(0)
    n = len(exps)
    num = 1
    for e in exps:
        for k in range(e - 1, 0, -2):
            num *= k
    den = 1
    total = sum(exps)
    for k in range(0, total, 2):
        den *= n + k
    return Fraction(num, den)


def sphere_moment(exponents) -> Fraction:
    """Average of ``prod x_i^{e_i}`` over the unit sphere ``S^{n-1}``."""
    return _sphere_moment(tuple(int(e) for e in exponents))


def sphere_average(p: CPoly):
    total = ZERO
    for k, v in p.terms.items():
        m = _sphere_moment(k)
        if m:
            total += v * cq(m)
    return total


def sphere_inner(p: CPoly, q: CPoly):
    """``<P, Q>`` = average of ``P * conj(Q)`` over the unit sphere."""
    return sphere_average(p * q.conjugate())


# --------------------------------------------------------------------------
# bases of H^(r)
# --------------------------------------------------------------------------

def monomials(n: int, r: int):
    """Exponent tuples of total degree ``r`` (lexicographically descending)."""
    for c in itertools.combinations_with_replacement(range(n), r):
        e = [0] * n
        for i in c:
            e[i] += 1
        yield tuple(e)


@lru_cache(maxsize=None)
def harmonic_seed_exponents(n: int, r: int) -> tuple:
    """Exponents with ``x_1``-degree at most 1; they index a basis of ``H^(r)``."""
    return tuple(sorted(e for e in monomials(n, r) if e[0] <= 1))


def _extend_harmonic(seed: CPoly) -> CPoly:
    """Unique harmonic polynomial agreeing with ``seed`` on ``x_1``-degree <= 1."""
    n = seed.n
    by_k: dict[int, CPoly] = {0: CPoly(n), 1: CPoly(n)}
    for k, v in seed.terms.items():
        by_k[k[0]] = by_k[k[0]] + CPoly(n, {(0,) + k[1:]: v})
    out = seed
    k = 0
    cur = {0: by_k[0], 1: by_k[1]}
    while True:
        progressed = False
        for parity in (0, 1):
            f = cur[parity]
            if f.is_zero():
                continue
            kk = k + parity
            # Delta(x1^kk f) + Delta(x1^{kk+2} g) = 0 on the x1^kk line
            lap_rest = laplacian_x(f)  # f has no x1
            g = lap_rest.scale(Fraction(-1, (kk + 2) * (kk + 1)))
            cur[parity] = g
            if not g.is_zero():
                progressed = True
                shift = CPoly(n, {(kk + 2,) + (0,) * (n - 1): ONE})
                out = out + shift * g
        if not progressed:
            return out
        k += 2


@lru_cache(maxsize=None)
def harmonic_basis(n: int, r: int) -> tuple:
    """Basis of ``H^(r)`` whose ``x_1``-degree <= 1 part is a single seed monomial."""
    return tuple(_extend_harmonic(CPoly.monomial(e)) for e in harmonic_seed_exponents(n, r))


def harmonic_dim(n: int, r: int) -> int:
    return len(harmonic_seed_exponents(n, r))


def harmonic_coords(h: CPoly, r: int) -> list:
    """Coordinates of a harmonic ``h`` in :func:`harmonic_basis`."""
    return [h.coeff(e) for e in harmonic_seed_exponents(h.n, r)]


def from_harmonic_coords(n: int, r: int, coords) -> CPoly:
    out = CPoly(n)
    for c, b in zip(coords, harmonic_basis(n, r)):
        if c:
            out = out + b.scale(c)
    return out


def operator_matrix(op, n: int, r: int) -> list[list]:
    """Matrix (list of rows, QQ_I entries) of a linear map ``H^(r) -> H^(r)``."""
    cols = [harmonic_coords(op(b), r) for b in harmonic_basis(n, r)]
    return [list(row) for row in zip(*cols)]
