import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cstar_sip import algebra as alg
from cstar_sip import faults
from cstar_sip import module_sip as ms
from cstar_sip.algebra import Functions
from cstar_sip.errors import StructuralError
from cstar_sip.harness import acceptance_constructions
from cstar_sip.sip_classical import Hilbert, LpGiles

H1, H2, L23 = Hilbert(1), Hilbert(2), LpGiles(2, 3)
CONSTRUCTIONS = acceptance_constructions()


def test_csip_examples():
    b = ms.Bundle((H2, H2))
    f = ms.module_element(b, [[1, 0], [0, 1]])
    g = ms.module_element(b, [[0, 1], [0, 2]])
    assert np.allclose(alg.coords(ms.csip(b, f, g)), [0, 2])
    b1 = ms.Bundle((L23,))
    val = ms.csip(b1, ms.module_element(b1, [[1, 1]]), ms.module_element(b1, [[1, 0]]))
    assert np.allclose(alg.coords(val), [2 ** (-1 / 3)])


def test_action_norm_and_rho_examples():
    b = ms.Bundle((H2, H2))
    f = ms.module_element(b, [[1, 0], [0, 1]])
    fa = ms.module_action(b, f, alg.element(Functions(2), [2, 0]))
    assert np.allclose(fa.coords(), [2, 0, 0, 0])
    b11 = ms.Bundle((H1, H1))
    f = ms.module_element(b11, [[3], [4]])
    assert ms.triple_norm(b11, f) == pytest.approx(4)
    assert np.allclose(alg.coords(ms.rho(b11, f)), [3, 4])
    m2 = ms.MatrixSelf(2)
    assert ms.triple_norm(m2, ms.module_element(m2, np.eye(2))) == pytest.approx(1)
    assert ms.triple_norm(m2, ms.zero_element(m2)) == 0
    assert np.allclose(alg.coords(ms.rho(m2, ms.module_element(m2, np.diag([2, 0])))), [2, 0, 0, 0])


def test_hermitian_defect_examples():
    b1 = ms.Bundle((L23,))
    x, y = ms.module_element(b1, [[1, 1]]), ms.module_element(b1, [[1, 0]])
    assert ms.hermitian_defect(b1, x, y) == pytest.approx(1 - 2 ** (-1 / 3))
    assert ms.hermitian_defect(b1, x, y) == pytest.approx(0.2063, abs=1e-4)
    rng = np.random.default_rng(0)
    for desc in (ms.Bundle((H2, H2)), ms.MatrixSelf(3)):
        x, y = ms.random_module_element(desc, rng), ms.random_module_element(desc, rng)
        assert ms.hermitian_defect(desc, x, y) < 1e-12


def test_cubic_identity_example():
    b = ms.Bundle((H1,))
    f = ms.module_element(b, [[2]])
    ff = ms.module_action(b, f, ms.csip(b, f, f))
    assert ms.triple_norm(b, ff) == pytest.approx(8)


def test_fullness_examples():
    b = ms.Bundle((H2, H2))
    assert ms.fullness_check(b, 4, 0)
    rng = np.random.default_rng(1)
    z = rng.standard_normal((6, 4)) + 0j
    z[:, 2:] = 0  # sections vanishing at the second point
    assert not ms.fullness_of(b, ms.from_coords(b, z))
    one = ms.module_element(b, [[1, 0], [0, 2]])
    assert not ms.fullness_of(b, one)


def test_descriptor_mismatch():
    b, m = ms.Bundle((H2,)), ms.MatrixSelf(2)
    with pytest.raises(StructuralError):
        ms.csip(b, ms.module_element(b, [[1, 0]]), ms.module_element(m, np.eye(2)))
    with pytest.raises(StructuralError):
        ms.Transported(m, ms.PermuteOmega((1, 0)))


@pytest.mark.parametrize("desc", CONSTRUCTIONS, ids=lambda d: d.label())
def test_suites_pass(desc):
    for verify in (ms.verify_axioms, ms.verify_norm_properties, ms.verify_finsler):
        rep = verify(desc, 300, 7)
        assert rep.passed, rep.failing()
    rep = ms.verify_transport(desc, 300, 7)
    assert rep.passed and (rep.skipped == (not isinstance(desc, ms.Transported)))
    assert ms.fullness_check(desc, 64, 3)


def test_finsler_skips_operator_triangle_on_noncommutative():
    rep = ms.verify_finsler(ms.MatrixSelf(2), 50, 0)
    assert rep.find("operator_triangle").skipped
    rep = ms.verify_finsler(ms.Bundle((L23, L23)), 50, 0)
    assert not rep.find("operator_triangle").skipped


@pytest.mark.parametrize("desc", CONSTRUCTIONS, ids=lambda d: d.label())
def test_element_json_round_trip(desc):
    x = ms.random_module_element(desc, np.random.default_rng(5))
    back = ms.element_from_json(ms.element_to_json(x))
    assert back.descriptor == desc
    assert np.array_equal(back.coords(), x.coords())


def test_sign_flip_trips_positivity():
    rep = ms.verify_axioms(faults.SignFlipped(ms.Bundle((H2, H2))), 50, 0)
    assert not rep.passed and "positivity" in rep.failing()
    assert rep.find("positivity").witness is not None


def test_broken_action_trips_module_action():
    rep = ms.verify_axioms(faults.BrokenAction(ms.MatrixSelf(2)), 50, 0)
    assert "module_action_right" in rep.failing()


def test_scaled_iso_trips_only_transport():
    desc = ms.Transported(ms.Bundle((L23, L23)), faults.ScaledIso(ms.PermuteOmega((1, 0))))
    assert ms.verify_axioms(desc, 100, 0).passed
    failing = ms.verify_transport(desc, 100, 0).failing()
    assert "norm_preserved" in failing and "iso_isometric" in failing


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(CONSTRUCTIONS), st.integers(0, 2 ** 32 - 1), st.floats(1e-3, 1e3))
def test_module_properties(desc, seed, scale):
    rng = np.random.default_rng(seed)
    x = ms.random_module_element(desc, rng) * scale
    y = ms.random_module_element(desc, rng)
    a = alg.random_element(desc.algebra, rng)
    xy, yx = ms.csip(desc, x, y), ms.csip(desc, y, x)
    nx, ny = ms.triple_norm(desc, x), ms.triple_norm(desc, y)
    # operator Cauchy-Schwarz: |[y, x]|^2 <= ||[y, y]|| [x, x]
    lhs = alg.star(yx) * yx
    rhs = alg.scalar_mul(ny ** 2, ms.csip(desc, x, x))
    assert alg.order_margin(lhs, rhs) >= -1e-9
    assert alg.cstar_norm(xy) <= nx * ny * (1 + 1e-9)
    # right action and adjoint action
    left = ms.csip(desc, ms.module_action(desc, x, a), y)
    assert alg.distance(left, alg.star(a) * xy) <= 1e-9 * (1 + alg.cstar_norm(a) * nx * ny)
    right = ms.csip(desc, x, ms.module_action(desc, y, a))
    assert alg.distance(right, xy * a) <= 1e-9 * (1 + alg.cstar_norm(a) * nx * ny)
    # triangle inequality and Finsler identity
    assert ms.triple_norm(desc, x + y) <= (nx + ny) * (1 + 1e-12)
    rxa = ms.rho(desc, ms.module_action(desc, x, a))
    target = alg.star(a) * ms.csip(desc, x, x) * a
    assert alg.distance(rxa * rxa, target) <= 1e-9 * (1 + alg.cstar_norm(target))
