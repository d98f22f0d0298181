"""The substitution map kappa*, the induced map kappa on separable functions,
and exact checks of the Laplacian and boundary identities.

Functions on the group are modelled as ``exp(i <W, Z>) |X|^{2m} h(X)`` with
``h`` harmonic; with ``d/dz_a -> i W_a`` the Laplacian acts on the X-part as

    Delta_X - |W|^2 + i D_W - (1/4) |J_W X|^2,

where ``D_W`` differentiates along ``X -> J_W X``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .deform import is_sigma_a_equivalent
from .endo_core import EndoSpace, j_of, unit_rescale
from .errors import SingularSubstitution
from .polyharmonic import (
    I_UNIT,
    CPoly,
    GradedHarmonic,
    cq,
    fischer_decompose,
    harmonic_basis,
    harmonic_coords,
    harmonic_project,
    laplacian_x,
    linear_field_derivative,
)


# --------------------------------------------------------------------------
# separable functions
# --------------------------------------------------------------------------

@dataclass
class SeparableFunction:
    """``exp(i<W,Z>) |X|^{2m} sum_r h_r(X)``."""

    W: tuple
    m: int
    angular: GradedHarmonic

    def __post_init__(self):
        self.W = tuple(exact.frac(w) for w in self.W)

    def to_sum(self) -> "SeparableSum":
        return SeparableSum(self.W, {(self.m, r): h for r, h in self.angular.items()})


@dataclass
class SeparableSum:
    """``exp(i<W,Z>) sum_{(m, r)} |X|^{2m} h_{m,r}(X)``; the keys make the form unique."""

    W: tuple
    parts: dict = field(default_factory=dict)

    def __post_init__(self):
        self.W = tuple(exact.frac(w) for w in self.W)
        self.parts = {k: v for k, v in sorted(self.parts.items()) if not v.is_zero()}

    def add(self, key, poly: CPoly) -> None:
        cur = self.parts.get(key)
        new = poly if cur is None else cur + poly
        if new.is_zero():
            self.parts.pop(key, None)
        else:
            self.parts[key] = new

    def __sub__(self, other: "SeparableSum") -> "SeparableSum":
        out = SeparableSum(self.W, dict(self.parts))
        for k, v in other.parts.items():
            out.add(k, -v)
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, SeparableSum) and self.W == other.W and self.parts == other.parts

    def is_zero(self) -> bool:
        return not self.parts

    def to_poly(self, n: int) -> CPoly:
        from .polyharmonic import norm2_power

        out = CPoly(n)
        for (m, _), h in self.parts.items():
            out = out + norm2_power(n, m) * h
        return out

    def to_dict(self) -> dict:
        return {"W": [exact.fmt(w) for w in self.W],
                "parts": [{"m": m, "degree": r, "poly": h.to_list()} for (m, r), h in self.parts.items()]}


# --------------------------------------------------------------------------
# the Laplacian on separable functions
# --------------------------------------------------------------------------

def _jw(space: EndoSpace, W) -> np.ndarray:
    return j_of(space, [exact.frac(w) for w in W])


def quadratic_term(space: EndoSpace, W) -> CPoly:
    """``sum_{a,b} W_a W_b <J_a X, J_b X> = |J_W X|^2``."""
    jw = _jw(space, W)
    g = jw.T @ jw
    n = space.n
    terms = {}
    for i in range(n):
        for j in range(n):
            if g[i, j] != 0:
                e = [0] * n
                e[i] += 1
                e[j] += 1
                e = tuple(e)
                terms[e] = terms.get(e, cq(0)) + cq(g[i, j])
    return CPoly(n, terms)


class LaplacianAction:
    """``Delta`` of ``space`` on the Fourier mode ``W``; caches ``J_W`` and ``|J_W X|^2``."""

    def __init__(self, space: EndoSpace, W):
        self.space = space
        self.n = space.n
        self.W = tuple(exact.frac(w) for w in W)
        self.jw = _jw(space, self.W)
        self.w2 = sum(w * w for w in self.W)
        self.quad = quadratic_term(space, self.W)

    def on_harmonic(self, h: CPoly, r: int) -> dict:
        """Image of ``|X|^0 h`` split as ``{(j, q): H}`` excluding the ``Delta_X`` term."""
        out: dict = {}
        d = linear_field_derivative(self.jw, h).scale(I_UNIT) - h.scale(self.w2)
        if not d.is_zero():
            out[(0, r)] = d
        if not self.quad.is_zero():
            for j, hq in fischer_decompose((self.quad * h).scale(Fraction(-1, 4))).items():
                key = (j, r + 2 - 2 * j)
                out[key] = out[key] + hq if key in out else hq
        return out

    def apply(self, F: SeparableFunction | SeparableSum) -> SeparableSum:
        src = F.to_sum() if isinstance(F, SeparableFunction) else F
        out = SeparableSum(self.W)
        for (m, r), h in src.parts.items():
            self._apply_part(out, m, r, h, self.on_harmonic(h, r))
        return out

    def _apply_part(self, out: SeparableSum, m: int, r: int, h: CPoly, partial: dict) -> None:
        if m > 0:
            out.add((m - 1, r), h.scale(2 * m * (2 * m + self.n - 2 + 2 * r)))
        for (j, q), hq in partial.items():
            out.add((m + j, q), hq)


def full_laplacian(space: EndoSpace, F: SeparableFunction) -> SeparableSum:
    """Left-invariant Laplacian of ``F``, regrouped into separable components."""
    return LaplacianAction(space, F.W).apply(F)


# --------------------------------------------------------------------------
# kappa* and kappa
# --------------------------------------------------------------------------

def _unit(space: EndoSpace) -> np.ndarray:
    if space.anticommutator_index is None:
        raise ValueError("space has no designated anticommutator")
    _, a0 = unit_rescale(space.A)
    if not exact.is_exact(a0):
        raise SingularSubstitution("kappa* needs an exactly rescalable anticommutator")
    return a0


def adapted_half_basis(a0: np.ndarray, a1: np.ndarray) -> list[int]:
    """Standard basis indices ``E_k`` with ``{E_k, A0 E_k}`` and ``{E_k, A1 E_k}`` both bases."""
    n = a0.shape[0]
    chosen: list[int] = []
    for j in range(n):
        if len(chosen) * 2 == n:
            break
        trial = chosen + [j]
        ok = True
        for a in (a0, a1):
            cols = [exact.qeye(n)[:, k] for k in trial] + [a[:, k] for k in trial]
            if exact.rank(np.array(cols, dtype=object)) != 2 * len(trial):
                ok = False
                break
        if ok:
            chosen = trial
    if len(chosen) * 2 != n:
        raise SingularSubstitution("no common complex basis for the two anticommutators")
    return chosen


class Kappa:
    """``kappa*`` sends ``Theta_{E_k} -> Theta'_{E_k}``, ``Theta_bar_{E_k} -> Theta_bar'_{E_k}``
    on a half basis adapted to both anticommutators; ``kappa`` re-projects each
    harmonic component and keeps ``W`` and the radial power.
    """

    def __init__(self, src: EndoSpace, dst: EndoSpace):
        if src.n != dst.n:
            raise SingularSubstitution("spaces act on different X-spaces")
        self.src, self.dst = src, dst
        a0, a1 = _unit(src), _unit(dst)
        idx = adapted_half_basis(a0, a1)
        eye = exact.qeye(src.n)
        e = eye[:, idx]
        b = np.concatenate([e, a0 @ e], axis=1)
        b1 = np.concatenate([e, a1 @ e], axis=1)
        if exact.det(b1) == 0:
            raise SingularSubstitution("target forms are dependent")
        # coordinates y = B^t X; kappa* replaces them by B1^t X
        self.matrix = exact.inverse(b.T) @ b1.T
        self.half_basis = idx

    def star(self, p: CPoly) -> CPoly:
        return p.substitute_linear(self.matrix)

    def harmonic(self, h: CPoly) -> CPoly:
        img = self.star(h)
        if laplacian_x(img).is_zero():
            return img
        return harmonic_project(img)

    def apply_sum(self, F: SeparableSum) -> SeparableSum:
        return SeparableSum(F.W, {k: self.harmonic(h) for k, h in F.parts.items()})

    def __call__(self, F: SeparableFunction) -> SeparableFunction:
        comps = {r: self.harmonic(h) for r, h in F.angular.items()}
        return SeparableFunction(F.W, F.m, GradedHarmonic(F.angular.n, comps))

    def matrix_on(self, r: int) -> np.ndarray:
        """Exact rational matrix of ``kappa`` on ``H^(r)`` (real because ``kappa*`` is)."""
        cols = []
        for b in harmonic_basis(self.src.n, r):
            coords = harmonic_coords(self.harmonic(b), r)
            cols.append([exact.frac(c.x) for c in coords])
            if any(c.y for c in coords):
                raise AssertionError("kappa produced a non-real image of a real polynomial")
        return exact.qmatrix(cols).T


def kappa_star(src: EndoSpace, dst: EndoSpace, P: CPoly) -> CPoly:
    return Kappa(src, dst).star(P)


def kappa(src: EndoSpace, dst: EndoSpace, F: SeparableFunction) -> SeparableFunction:
    return Kappa(src, dst)(F)


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------

@dataclass
class IntertwineReport:
    max_degree: int
    max_m: int
    W_set: list
    precondition_ok: bool = True
    identities: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    checked: int = 0
    first_witness: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.precondition_ok and all(self.identities.values())

    def to_dict(self) -> dict:
        return {
            "max_degree": self.max_degree, "max_m": self.max_m,
            "W_set": [[exact.fmt(w) for w in W] for W in self.W_set],
            "precondition_ok": self.precondition_ok, "identities": self.identities,
            "failures": self.failures, "checked": self.checked,
            "first_witness": self.first_witness, "notes": self.notes, "ok": self.ok,
        }


def _w_label(W) -> str:
    return "W=(" + ",".join(exact.fmt(w) for w in W) + ")"


def verify_intertwine(src: EndoSpace, dst: EndoSpace, max_degree: int, W_set, max_m: int = 2,
                      stop_at_first: bool = False) -> IntertwineReport:
    """Check ``kappa(Delta F) = Delta'(kappa F)`` exactly for every basis function
    ``|X|^{2m} h`` (``h`` in the harmonic basis of degree ``<= max_degree``,
    ``m <= max_m``) and every ``W`` in ``W_set``.
    """
    W_set = [tuple(exact.frac(w) for w in W) for W in W_set]
    report = IntertwineReport(max_degree, max_m, W_set)
    if src is not dst and not is_sigma_a_equivalent(src, dst):
        report.precondition_ok = False
        report.notes.append("src and dst are not sigma_A-equivalent (complement or A-spectrum differ)")
        return report
    kap = Kappa(src, dst)
    n = src.n
    for W in W_set:
        lap, lap1 = LaplacianAction(src, W), LaplacianAction(dst, W)
        label = _w_label(W)
        bad = 0
        for r in range(max_degree + 1):
            for h in harmonic_basis(n, r):
                kh = kap.harmonic(h)
                lhs_partial = {k: kap.harmonic(v) for k, v in lap.on_harmonic(h, r).items()}
                rhs_partial = lap1.on_harmonic(kh, r)
                for m in range(max_m + 1):
                    lhs = SeparableSum(W)
                    lap._apply_part(lhs, m, r, kh, lhs_partial)
                    rhs = SeparableSum(W)
                    lap1._apply_part(rhs, m, r, kh, rhs_partial)
                    report.checked += 1
                    if lhs != rhs:
                        bad += 1
                        if report.first_witness is None:
                            report.first_witness = {
                                "W": [exact.fmt(w) for w in W], "m": m, "degree": r,
                                "basis_poly": h.to_list(), "residual": (lhs - rhs).to_dict(),
                            }
                if stop_at_first and bad:
                    break
            if stop_at_first and bad:
                break
        report.identities[label] = bad == 0
        if bad:
            report.failures[label] = bad
    return report


def _check_j_split(space: EndoSpace, c: int, d: int) -> tuple[CPoly, CPoly, CPoly]:
    n = space.n
    _, a0 = unit_rescale(space.A)
    jc, jd = space.generators[c], space.generators[d]

    def form(vec_re, vec_im):
        return CPoly.linear([cq((vec_re[k], vec_im[k])) for k in range(n)])

    j1, j2 = CPoly(n), CPoly(n)
    for i in range(n):
        qc, qd = jc[:, i], jd[:, i]
        fc, fd = form(qc, a0 @ qc), form(qd, a0 @ qd)
        fcb, fdb = fc.conjugate(), fd.conjugate()
        j1 = j1 + fc * fdb + fcb * fd
        j2 = j2 + fc * fd + fcb * fdb
    j1, j2 = j1.scale(Fraction(1, 4)), j2.scale(Fraction(1, 4))
    gram = jc.T @ jd
    direct = CPoly(n)
    for i in range(n):
        for k in range(n):
            if gram[i, k] != 0:
                e = [0] * n
                e[i] += 1
                e[k] += 1
                direct = direct + CPoly.monomial(e, gram[i, k])
    return j1, j2, direct


@dataclass
class J2Report:
    c: int
    d: int
    j2_vanishes: bool
    j1_equals_jcd: bool

    @property
    def ok(self) -> bool:
        return self.j2_vanishes and self.j1_equals_jcd

    def __bool__(self) -> bool:
        return self.ok


def check_j2_vanishes(space: EndoSpace, c: int, d: int) -> J2Report:
    """Split ``<J_c X, J_d X>`` into ``J1 + J2`` via ``Q_ei = J_e E_i + i A0 J_e E_i`` and
    test that ``J2`` vanishes identically."""
    ai = space.anticommutator_index
    if ai is None:
        raise ValueError("space has no designated anticommutator")
    if ai in (c, d):
        raise ValueError("c and d must be directions orthogonal to A")
    j1, j2, direct = _check_j_split(space, c, d)
    return J2Report(c, d, j2.is_zero(), j1 == direct)


@dataclass
class BoundaryReport:
    domain_kind: str
    max_degree: int
    dirichlet: bool
    radial: bool
    directional: dict = field(default_factory=dict)

    @property
    def neumann(self) -> bool:
        return self.radial and all(self.directional.values())

    @property
    def ok(self) -> bool:
        return self.dirichlet and self.neumann

    def to_dict(self) -> dict:
        return {"domain_kind": self.domain_kind, "max_degree": self.max_degree,
                "dirichlet": self.dirichlet, "radial": self.radial,
                "directional": self.directional, "neumann": self.neumann, "ok": self.ok}


def check_boundary_preservation(src: EndoSpace, dst: EndoSpace, domain_kind: str = "ball_torus",
                                max_degree: int = 4) -> BoundaryReport:
    """``kappa`` fixes ``phi(|X|, Z)`` (Dirichlet data); it must also commute with the
    radial derivative and intertwine every ``D_alpha`` (Neumann data)."""
    kap = Kappa(src, dst)
    n = src.n
    one = CPoly.const(n, 1)
    dirichlet = kap.harmonic(one) == one
    radial = all(kap.harmonic(h).degrees() <= {r}
                 for r in range(max_degree + 1) for h in harmonic_basis(n, r))
    directional = {}
    for alpha in range(src.l):
        ja, ja1 = src.generators[alpha], dst.generators[alpha]
        ok = True
        for r in range(1, max_degree + 1):
            for h in harmonic_basis(n, r):
                if kap.harmonic(linear_field_derivative(ja, h)) != linear_field_derivative(ja1, kap.harmonic(h)):
                    ok = False
                    break
            if not ok:
                break
        directional[f"D[{alpha}]"] = ok
    return BoundaryReport(domain_kind, max_degree, dirichlet, radial, directional)
