"""Acceptance criteria, one or more tests per criterion.

Each test carries ``@pytest.mark.criterion(n)``; a PASS/FAIL line per criterion
is printed in the terminal summary.
"""
import itertools
import random
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import jn_zeros

from isospec import exact
from isospec.deform import DeformSpec, Splitting, verify_reduction
from isospec.endo_core import (
    build_quaternionic_eswa,
    check_htype,
    heisenberg_ab,
    is_anticommutator,
    product_space,
    quaternionic_heisenberg,
    ricci_spectrum,
)
from isospec.errors import DependentGenerators
from isospec.intertwine import check_j2_vanishes, verify_intertwine
from isospec.polyharmonic import (
    CPoly,
    cq,
    dir_derivative,
    harmonic_project,
    harmonic_theta_product,
    laplacian_x,
    monomials,
    sphere_laplacian,
    theta,
    theta_bar,
)
from isospec.spectral_lab import Domain, Truncation, compare_spectra, spectrum

from conftest import L_I, ricci_closed_form
from oracles import gram_projection_oracle, koszul_ricci

SEED = 20240611
A8 = exact.block_diag(L_I, L_I)


# ---------------------------------------------------------------- 1

@pytest.mark.criterion(1)
@pytest.mark.parametrize("k", [1, 2])
def test_criterion_1_htype(k):
    t0 = time.perf_counter()
    rep = check_htype(quaternionic_heisenberg(k))
    assert rep.ok and not rep.failing_pairs
    assert time.perf_counter() - t0 < 1.0


# ---------------------------------------------------------------- 2

def _random_imaginary_perp(rng, a):
    """Random nonzero rational imaginary quaternion perpendicular to ``a``."""
    while True:
        v = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(3)]
        dot = sum(x * y for x, y in zip(v, a))
        aa = sum(x * x for x in a)
        w = [x - dot / aa * y for x, y in zip(v, a)]
        if any(w):
            return ["0"] + [str(x) for x in w]


@pytest.mark.criterion(2)
@pytest.mark.parametrize("k", [1, 2])
def test_criterion_2_anticommutator_construction(k):
    rng = random.Random(SEED + k)
    built = 0
    while built < 6:
        a = [Fraction(rng.randint(-3, 3)) for _ in range(3)]
        if not any(a):
            a[0] = Fraction(1)
        mats = []
        for _ in range(rng.randint(1, 2 if k == 1 else 3)):
            m = [[None] * k for _ in range(k)]
            for r in range(k):
                for c in range(r, k):
                    m[r][c] = m[c][r] = _random_imaginary_perp(rng, a) if rng.random() < 0.8 else "0"
            mats.append(m)
        try:
            space = build_quaternionic_eswa(k, ["0"] + [str(x) for x in a], mats)
        except DependentGenerators:
            continue  # redraw: the random matrices were linearly dependent
        assert is_anticommutator(space, [1] + [0] * (space.l - 1))
        built += 1


# ---------------------------------------------------------------- 3

@pytest.mark.criterion(3)
def test_criterion_3_reduction_odd():
    t0 = time.perf_counter()
    space = heisenberg_ab(1, 1)
    rep = verify_reduction(space, DeformSpec(Splitting.from_space(space, "ab"), exact.qmatrix([[1, 0, 0]]).T))
    assert rep.r == 1 and rep.parity == "odd"
    assert rep.identities == {"perp[0]": True, "perp[1]": True, "A[0]": True}
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.criterion(3)
def test_criterion_3_reduction_even():
    t0 = time.perf_counter()
    h1 = quaternionic_heisenberg(1)
    space = product_space([h1, h1], merge_z=True)
    s = exact.qmatrix([[1, 0, 0], [0, 1, 0]]).T
    rep = verify_reduction(space, DeformSpec(Splitting.from_space(space, "ab"), s))
    assert rep.r == 2 and rep.parity == "even"
    assert rep.identities == {"perp[0]": True, "A[0]": True, "A[1]": True}
    assert time.perf_counter() - t0 < 5.0


# ---------------------------------------------------------------- 4

def _random_homogeneous(rng, n, degree):
    mons = list(monomials(n, degree))
    picks = rng.sample(mons, min(len(mons), rng.randint(1, 6)))
    return CPoly(n, {e: cq((Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
                             Fraction(rng.randint(-5, 5), rng.randint(1, 4)))) for e in picks})


@pytest.mark.criterion(4)
def test_criterion_4_projection_vs_gram_oracle():
    rng = random.Random(SEED)
    for i in range(50):
        n = (4, 8)[i % 2]
        degree = rng.randint(0, 4)
        p = _random_homogeneous(rng, n, degree)
        h = harmonic_project(p)
        assert h == gram_projection_oracle(p, degree)
        assert laplacian_x(h).is_zero()


@pytest.mark.criterion(4)
@pytest.mark.parametrize("n", [4, 8])
def test_criterion_4_recursion_vs_general_solver(n):
    a0 = L_I if n == 4 else A8
    q = [1, 2, 0, 1] + ([0, 1, 1, 0] if n == 8 else [])
    for r in range(7):
        for p in range(r + 1):
            fast = harmonic_theta_product(a0, q, p, r)
            assert fast == harmonic_project(theta(a0, q) ** p * theta_bar(a0, q) ** (r - p))
            assert laplacian_x(fast).is_zero()


# ---------------------------------------------------------------- 5

@pytest.mark.criterion(5)
@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_criterion_5_sphere_laplacian_commutes_with_da(r):
    # column by column: the two matrices agree on every monomial of degree r
    space = quaternionic_heisenberg(2)
    for e in monomials(8, r):
        p = CPoly.monomial(e)
        da_p = dir_derivative(space, 0, p)
        assert sphere_laplacian(da_p).total == dir_derivative(space, 0, sphere_laplacian(p).total)


@pytest.mark.criterion(5)
@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_criterion_5_da_eigenvalues(r):
    space = quaternionic_heisenberg(2)
    half = [[1 if i == k else 0 for i in range(8)] for k in (0, 2, 4, 6)]
    for p in range(r + 1):
        for hol in itertools.combinations_with_replacement(range(4), p):
            for anti in itertools.combinations_with_replacement(range(4), r - p):
                prod = CPoly.const(8, 1)
                for i in hol:
                    prod = prod * theta(A8, half[i])
                for i in anti:
                    prod = prod * theta_bar(A8, half[i])
                h = harmonic_project(prod)
                assert not h.is_zero()
                assert dir_derivative(space, 0, h) == h.scale(cq((0, 2 * p - r)))


# ---------------------------------------------------------------- 6

INTERTWINE_W = [(0, 0, 0), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1), (1, 1, 0)]


@pytest.mark.criterion(6)
@pytest.mark.slow
def test_criterion_6_intertwining(h11_sigma_a, h20):
    t0 = time.perf_counter()
    rep = verify_intertwine(h11_sigma_a, h20, max_degree=4, W_set=INTERTWINE_W, max_m=2)
    elapsed = time.perf_counter() - t0
    assert rep.precondition_ok
    assert elapsed < 600
    failing = [k for k, ok in rep.identities.items() if not ok]
    assert rep.ok, f"nonzero residuals for {failing}; first witness {rep.first_witness}"


# ---------------------------------------------------------------- 7

@pytest.mark.criterion(7)
@pytest.mark.parametrize("fixture", ["h11", "h11_sigma_a", "non_htype_eswa"])
def test_criterion_7_j2_vanishing(fixture, request):
    space = request.getfixturevalue(fixture)
    others = [a for a in range(space.l) if a != space.anticommutator_index]
    for c, d in itertools.product(others, repeat=2):
        rep = check_j2_vanishes(space, c, d)
        assert rep.j2_vanishes and rep.j1_equals_jcd, (c, d)


# ---------------------------------------------------------------- 8

@pytest.mark.criterion(8)
def test_criterion_8_bessel_oracle(h20):
    R = 1.0
    rep = spectrum(h20, Domain.torus(3, R), "dirichlet", Truncation(r_max=0, n_radial=20, W_max=0.0))
    oracle = (jn_zeros(3, 1)[0] / R) ** 2
    assert abs(rep.eigenvalues[0] - oracle) / oracle < 1e-6


# ---------------------------------------------------------------- 9

PAIR_TRUNC = Truncation(r_max=4, n_radial=12, W_max=2.0)


@pytest.fixture(scope="module")
def pair_spectra(h20, h11, scaled_a_control):
    dom = Domain.torus(3, 1.0)
    t0 = time.perf_counter()
    out = {bc: {name: spectrum(space, dom, bc, PAIR_TRUNC)
                for name, space in (("h20", h20), ("h11", h11), ("control", scaled_a_control))}
           for bc in ("dirichlet", "neumann")}
    out["elapsed"] = time.perf_counter() - t0
    return out


@pytest.mark.criterion(9)
@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_criterion_9_pair_isospectral(pair_spectra, bc):
    cmp = compare_spectra(pair_spectra[bc]["h11"], pair_spectra[bc]["h20"], 15, 1e-8)
    assert cmp.ok, f"first mismatch {cmp.first_mismatch}, max relative difference {cmp.max_rel_diff}"
    assert pair_spectra["elapsed"] < 900


@pytest.mark.criterion(9)
@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_criterion_9_negative_control(pair_spectra, bc):
    cmp = compare_spectra(pair_spectra[bc]["h20"], pair_spectra[bc]["control"], 15, 1e-8)
    assert max(cmp.diffs) > 1e-3 and not cmp.ok


# ---------------------------------------------------------------- 10

@pytest.mark.criterion(10)
@pytest.mark.parametrize("fixture", ["h11", "h20"])
def test_criterion_10_ricci_oracle(fixture, request):
    space = request.getfixturevalue(fixture)
    got = ricci_spectrum(space).flat
    assert np.allclose(got, koszul_ricci(space), rtol=0, atol=1e-10)
    assert np.allclose(got, ricci_closed_form(space), rtol=0, atol=1e-10)
