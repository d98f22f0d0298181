from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings

from isospec import exact
from isospec.deform import sigma_a_partner
from isospec.endo_core import (
    build_quaternionic_eswa,
    heisenberg_ab,
    make_endo_space,
    product_space,
    quaternionic_heisenberg,
)

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


# left multiplication by i, j, k on H = R^4 with basis (1, i, j, k)
L_I = exact.qmatrix([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
L_J = exact.qmatrix([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]])
L_K = exact.qmatrix([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]])
ROT = exact.qmatrix([[0, -1], [1, 0]])


def cayley(skew: np.ndarray) -> np.ndarray:
    """Exact rational orthogonal matrix ``(I - K)(I + K)^{-1}``."""
    n = skew.shape[0]
    return (exact.qeye(n) - skew) @ exact.inverse(exact.qeye(n) + skew)


def conjugate_space(space, O):
    return space.with_generators([O @ g @ O.T for g in space.generators], provenance="conjugated")


def ricci_closed_form(space) -> np.ndarray:
    """Ricci operator of a two-step metric nilpotent algebra with orthonormal Z-basis:
    ``(1/2) sum J_a^2`` on v and ``(1/4) tr(J_a^t J_b)`` on z."""
    gens = [exact.to_float(g) for g in space.generators]
    n, l = space.n, space.l  # noqa: E741
    ric = np.zeros((n + l, n + l))
    ric[:n, :n] = 0.5 * sum(g @ g for g in gens)
    for a in range(l):
        for b in range(l):
            ric[n + a, n + b] = 0.25 * np.trace(gens[a].T @ gens[b])
    return np.sort(np.linalg.eigvalsh(ric))


@pytest.fixture(scope="session")
def h1():
    return quaternionic_heisenberg(1)


@pytest.fixture(scope="session")
def h20():
    return quaternionic_heisenberg(2)


@pytest.fixture(scope="session")
def h11():
    return heisenberg_ab(1, 1)


@pytest.fixture(scope="session")
def h11_sigma_a(h20):
    """H^(1,1) in the form sharing A's complement with H^(2,0)."""
    return sigma_a_partner(h20, "ab")


@pytest.fixture(scope="session")
def non_htype_eswa():
    """Merged product of two different k=1 ESW_A's; ``<J_b X, J_c X>`` is not radial."""
    f1 = build_quaternionic_eswa(1, "i", [[["j"]], [["k"]]])
    f2 = build_quaternionic_eswa(1, "i", [[[[0, 0, 1, 1]]], [[[0, 0, 1, -1]]]])
    return product_space([f1, f2], merge_z=True)


@pytest.fixture(scope="session")
def scaled_a_control(h20):
    """Anticommutator ``(3/2) A`` with the complement of H^(2,0): not conjugate to A."""
    gens = list(h20.generators)
    gens[0] = gens[0] * Fraction(3, 2)
    return make_endo_space(8, gens, anticommutator_index=0, provenance="scaled-A control")


# ---------------------------------------------------------------- acceptance summary

ACCEPTANCE: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    num = marker.args[0]
    ACCEPTANCE.setdefault(num, []).append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(ACCEPTANCE):
        results = ACCEPTANCE[num]
        ok = all(passed for _, passed in results)
        failed = [name for name, passed in results if not passed]
        tail = f"  (failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}{tail}")
