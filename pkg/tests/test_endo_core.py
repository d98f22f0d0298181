import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isospec import exact
from isospec.endo_core import (
    EndoSpace,
    Quaternion,
    build_quaternionic_eswa,
    check_htype,
    is_anticommutator,
    j_of,
    lie_bracket,
    make_endo_space,
    product_space,
    quaternion_matrix_rep,
    quaternionic_heisenberg,
    ricci_spectrum,
    unit_rescale,
)
from isospec.errors import (
    DegenerateA,
    DependentGenerators,
    DimensionMismatch,
    NotAnticommutator,
    NotImaginary,
    NotPerpendicular,
    NotSkew,
    NotSymmetric,
)

from conftest import L_I, L_J, L_K, ROT, cayley, conjugate_space, ricci_closed_form

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def test_quaternion_table():
    i, j, k = Quaternion.parse("i"), Quaternion.parse("j"), Quaternion.parse("k")
    minus_one = Quaternion.parse([-1, 0, 0, 0])
    assert i * i == j * j == k * k == minus_one
    assert i * j == k and j * k == i and k * i == j
    assert j * i == -k


def test_left_matrices_match_table():
    for name, expected in (("i", L_I), ("j", L_J), ("k", L_K)):
        assert (Quaternion.parse(name).left_matrix() == expected).all()


@given(st.lists(rationals, min_size=4, max_size=4), st.lists(rationals, min_size=4, max_size=4))
def test_left_representation_is_multiplicative(p, q):
    p, q = Quaternion.parse(p), Quaternion.parse(q)
    assert ((p * q).left_matrix() == p.left_matrix() @ q.left_matrix()).all()
    assert ((p * q).right_matrix() == q.right_matrix() @ p.right_matrix()).all()


def test_make_endo_space_rotation():
    space = make_endo_space(2, [ROT])
    assert space.l == 1 and space.n == 2


def test_make_endo_space_rejects_symmetric():
    with pytest.raises(NotSkew, match="generator 0"):
        make_endo_space(2, [[[0, 1], [1, 0]]])


def test_make_endo_space_rejects_dependent():
    with pytest.raises(DependentGenerators):
        make_endo_space(4, [L_I, L_J, L_I + L_J])


def test_make_endo_space_wrong_shape():
    with pytest.raises(DimensionMismatch):
        make_endo_space(3, [ROT])


def test_flagged_anticommutator_is_validated():
    with pytest.raises(NotAnticommutator):
        make_endo_space(4, [L_I, L_I + L_J], anticommutator_index=0)


def test_quaternion_space_l3(h1):
    assert h1.l == 3 and h1.n == 4
    for g, expected in zip(h1.generators, (L_I, L_J, L_K)):
        assert (g == expected).all()


def test_j_of_examples(h1):
    assert exact.is_zero(j_of(h1, [0, 0, 0]))
    assert (j_of(h1, [1, 0, 0]) == L_I).all()
    assert (j_of(h1, [1, 1, 0]) == L_I + L_J).all()
    # columns: e1 -> e2, e2 -> -e1, e3 -> e4, e4 -> -e3
    assert list(L_I[:, 0]) == [0, 1, 0, 0] and list(L_I[:, 2]) == [0, 0, 0, 1]


def test_j_of_wrong_length(h1):
    with pytest.raises(DimensionMismatch):
        j_of(h1, [1, 0])


@given(st.lists(rationals, min_size=3, max_size=3), st.lists(rationals, min_size=3, max_size=3), rationals)
def test_j_of_linear_and_skew(z1, z2, t):
    space = quaternionic_heisenberg(1)
    a, b = j_of(space, z1), j_of(space, z2)
    combo = j_of(space, [x + t * y for x, y in zip(z1, z2)])
    assert (combo == a + t * b).all()
    assert exact.is_zero(a + a.T)


def test_htype_examples(h1, h20):
    assert check_htype(h1) and check_htype(h20)
    assert check_htype(make_endo_space(4, [L_I]))
    rep = check_htype(make_endo_space(4, [L_I, L_J + L_K]))
    assert not rep and (1, 1) in [tuple(p) for p in rep.failing_pairs]


def test_is_anticommutator_examples(h1):
    assert is_anticommutator(h1, [1, 0, 0])
    # L_i + L_j against its complement span{L_i - L_j, L_k}: (L_i + L_j) L_k + L_k (L_i + L_j) = 0,
    # (L_i + L_j)(L_i - L_j) + (L_i - L_j)(L_i + L_j) = 2 L_i^2 - 2 L_j^2 = 0
    assert is_anticommutator(h1, [1, 1, 0])
    assert is_anticommutator(make_endo_space(4, [L_I + 2 * L_J]), [1])


def test_is_anticommutator_negative():
    space = make_endo_space(8, [exact.block_diag(L_I, L_I), exact.block_diag(L_J, L_I)])
    assert not is_anticommutator(space, [1, 0])


def test_is_anticommutator_degenerate():
    space = make_endo_space(4, [exact.block_diag(ROT, exact.qzeros((2, 2))), L_J])
    with pytest.raises(DegenerateA):
        is_anticommutator(space, [1, 0])


@pytest.mark.parametrize(
    "A, S_diag, A0",
    [
        (2 * L_I, [2] * 4, L_I),
        (L_I, [1] * 4, L_I),
        (exact.block_diag(2 * L_I, 3 * L_I), [2] * 4 + [3] * 4, exact.block_diag(L_I, L_I)),
    ],
)
def test_unit_rescale_examples(A, S_diag, A0):
    S, unit = unit_rescale(A)
    assert (S == exact.qmatrix(np.diag(S_diag))).all()
    assert (unit == A0).all()


@given(st.fractions(min_value=Fraction(1, 5), max_value=5, max_denominator=6),
       st.fractions(min_value=Fraction(1, 5), max_value=5, max_denominator=6))
def test_unit_rescale_exact_properties(s1, s2):
    O = cayley(exact.qmatrix([[0, 1, 0, 2], [-1, 0, 1, 0], [0, -1, 0, 3], [-2, 0, -3, 0]]))
    A = O @ exact.block_diag(s1 * ROT, s2 * ROT) @ O.T
    S, A0 = unit_rescale(A)
    assert exact.is_exact(A0)
    assert (A0 @ A0 == -exact.qeye(4)).all()
    assert (S @ A0 == A).all() and (A0 @ S == A).all()
    assert (S == S.T).all()


def test_unit_rescale_float_path():
    A = exact.block_diag(ROT, 2 * ROT) * 1.0
    A = np.array(A, dtype=float) * np.sqrt(2)
    S, A0 = unit_rescale(A)
    assert np.allclose(A0 @ A0, -np.eye(4), atol=1e-12)
    assert np.allclose(S @ A0, A, atol=1e-12) and np.allclose(A0 @ S, A, atol=1e-12)


def test_unit_rescale_degenerate():
    with pytest.raises(DegenerateA):
        unit_rescale(exact.block_diag(ROT, exact.qzeros((2, 2))))


def test_quaternionic_k1():
    space = build_quaternionic_eswa(1, "i", [[["j"]], [["k"]]])
    assert space.anticommutator_index == 0 and space.l == 3
    assert is_anticommutator(space, [1, 0, 0])


def test_quaternionic_parallel_entry():
    with pytest.raises(NotPerpendicular):
        build_quaternionic_eswa(1, "i", [[["i"]]])


def test_quaternionic_real_entry():
    with pytest.raises(NotImaginary):
        build_quaternionic_eswa(1, "i", [[[[1, 0, 1, 0]]]])


def test_quaternionic_asymmetric():
    with pytest.raises(NotSymmetric):
        build_quaternionic_eswa(2, "i", [[["0", "j"], ["0", "0"]]])


def test_quaternionic_k2_offdiagonal():
    space = build_quaternionic_eswa(2, "i", [[["0", "j"], ["j", "0"]]])
    assert (space.n, space.l) == (8, 2)
    A, B = space.generators
    assert exact.is_zero(A @ B + B @ A)


def imaginary_perp_i():
    return st.tuples(rationals, rationals).map(lambda t: Quaternion(0, 0, t[0], t[1]))


@st.composite
def sym_quaternion_matrices(draw, k):
    m = [[None] * k for _ in range(k)]
    for r in range(k):
        for c in range(r, k):
            m[r][c] = m[c][r] = draw(imaginary_perp_i())
    return m


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("side", ["left", "right"])
@given(data=st.data())
def test_quaternionic_builder_always_anticommutator(k, side, data):
    mats = data.draw(st.lists(sym_quaternion_matrices(k), min_size=1, max_size=2))
    try:
        space = build_quaternionic_eswa(k, "i", mats, side=side)
    except DependentGenerators:
        return
    e = [1] + [0] * (space.l - 1)
    assert is_anticommutator(space, e)


def test_right_representation_differs():
    left = build_quaternionic_eswa(1, "i", [[["j"]]], side="left")
    right = build_quaternionic_eswa(1, "i", [[["j"]]], side="right")
    assert not (left.generators[0] == right.generators[0]).all()
    assert is_anticommutator(right, [1, 0])


def test_quaternion_matrix_rep_block():
    rep = quaternion_matrix_rep([["i", "0"], ["0", "j"]])
    assert (rep == exact.block_diag(L_I, L_J)).all()


def test_product_single_is_identity(h1):
    assert product_space([h1]) is h1


def test_product_merged_keeps_anticommutator(h1):
    space = product_space([h1, h1], merge_z=True)
    assert space.anticommutator_index == 0
    assert is_anticommutator(space, [1, 0, 0])
    assert check_htype(space)


def test_product_concatenated(h1):
    space = product_space([h1, make_endo_space(2, [ROT])])
    assert (space.n, space.l) == (6, 4)
    assert space.anticommutator_index is None
    assert not check_htype(space)


def test_product_merged_mixed_norms_not_htype(non_htype_eswa):
    assert not check_htype(non_htype_eswa)
    assert is_anticommutator(non_htype_eswa, [1, 0, 0])


def test_lie_bracket_example(h1):
    assert list(lie_bracket(h1, [1, 0, 0, 0], [0, 1, 0, 0])) == [1, 0, 0]


@given(st.lists(rationals, min_size=4, max_size=4), st.lists(rationals, min_size=4, max_size=4), rationals)
def test_lie_bracket_antisymmetric_bilinear(x, y, t):
    space = quaternionic_heisenberg(1)
    assert not any(lie_bracket(space, x, x))
    assert list(lie_bracket(space, x, y)) == [-v for v in lie_bracket(space, y, x)]
    assert list(lie_bracket(space, [t * v for v in x], y)) == [t * v for v in lie_bracket(space, x, y)]


def test_ricci_examples(h1):
    rep = ricci_spectrum(h1)
    assert rep.eigenvalues == pytest.approx([-1.5, 1.0]) and rep.multiplicities == [4, 3]
    rot = ricci_spectrum(make_endo_space(2, [ROT]))
    assert rot.eigenvalues == pytest.approx([-0.5, 0.5]) and rot.multiplicities == [2, 1]
    assert len(rep.flat) == h1.n + h1.l


@pytest.mark.parametrize("t", [2, Fraction(1, 3)])
def test_ricci_scales_quadratically(h1, t):
    scaled = h1.with_generators([t * g for g in h1.generators])
    assert np.allclose(ricci_spectrum(scaled).flat, float(t) ** 2 * np.array(ricci_spectrum(h1).flat))


def test_ricci_matches_closed_form(h1, h20, h11, non_htype_eswa):
    for space in (h1, h20, h11, non_htype_eswa, make_endo_space(2, [ROT])):
        assert np.allclose(ricci_spectrum(space).flat, ricci_closed_form(space), atol=1e-10)


@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_ricci_invariant_under_isometry(entries):
    space = quaternionic_heisenberg(1)
    k = exact.qzeros((4, 4))
    idx = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    for (i, j), v in zip(idx, entries):
        k[i, j], k[j, i] = Fraction(v), Fraction(-v)
    O = cayley(k)
    assert np.allclose(ricci_spectrum(conjugate_space(space, O)).flat, ricci_spectrum(space).flat, atol=1e-10)


def test_serialization_roundtrip(h20):
    text = h20.to_json()
    doc = json.loads(text)
    assert doc["n"] == 8 and doc["l"] == 3 and doc["anticommutator_index"] == 0
    assert all(isinstance(v, str) for row in doc["generators"][0] for v in row)
    back = EndoSpace.from_json(text)
    assert all((a == b).all() for a, b in zip(back.generators, h20.generators))


def test_serialization_rational_strings():
    space = make_endo_space(2, [[["0", "-3/2"], ["3/2", "0"]]])
    back = EndoSpace.from_dict(space.to_dict())
    assert back.generators[0][1, 0] == Fraction(3, 2)
