import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cstar_sip import algebra as alg
from cstar_sip import faults
from cstar_sip import module_sip as ms
from cstar_sip import operators as ops
from cstar_sip.errors import DomainError, StructuralError
from cstar_sip.harness import acceptance_constructions
from cstar_sip.sip_classical import Hilbert, LpGiles

H1, H2, L23 = Hilbert(1), Hilbert(2), LpGiles(2, 3)
B_HH = ms.Bundle((H2, H2))


def test_apply_examples():
    rng = np.random.default_rng(0)
    x = ms.random_module_element(B_HH, rng)
    ident = ops.Fibered(B_HH, (np.eye(2), np.eye(2)))
    assert np.array_equal(ops.apply(ident, x).coords(), x.coords())
    m = ms.MatrixSelf(2)
    zero = ops.apply(ops.LeftMult(np.zeros((2, 2))), ms.random_module_element(m, rng))
    assert np.all(zero.coords() == 0)
    y = ms.random_module_element(B_HH, rng)
    val = ops.apply(ops.DualFunctional(y), x)
    assert alg.distance(val, ms.csip(B_HH, y, x)) == 0
    with pytest.raises(StructuralError):
        ops.apply(ident, ms.random_module_element(m, rng))
    with pytest.raises(StructuralError):
        ops.Fibered(B_HH, (np.eye(2),))


def test_zero_operator_norm():
    T = ops.Fibered(B_HH, (np.zeros((2, 2)), np.zeros((2, 2))))
    rep = ops.op_norm(T, 50, 0)
    assert rep.op_norm_lb == 0 and rep.op_norm_exact == 0


def test_a_linearity():
    rng = np.random.default_rng(1)
    for desc in acceptance_constructions():
        assert ops.check_A_linear(ops.random_operator(desc, rng), 200, 0).passed
        assert ops.check_A_linear(ops.random_dual(desc, rng), 200, 0).passed
    mix = faults.mixing_operator(B_HH, rng)
    rep = ops.check_A_linear(mix, 200, 0)
    assert not rep.passed and rep.witness is not None


def test_dual_functional_bounds():
    rng = np.random.default_rng(2)
    for desc in (ms.Bundle((L23, L23)), ms.MatrixSelf(3)):
        y = ms.random_module_element(desc, rng)
        T = ops.DualFunctional(y)
        ny = ms.triple_norm(desc, y)
        rep = ops.min_K(T, 300, 0)
        assert rep.op_norm_exact == pytest.approx(ny)
        assert abs(rep.op_norm_lb - ny) <= 1e-3 * ny
        # witness x = y attains K = ||y||^2
        assert rep.k_min_est == pytest.approx(ny ** 2, rel=1e-9)
        assert rep.validation.passed


def test_fibered_hilbert_k_is_max_singular_value():
    rng = np.random.default_rng(3)
    T = ops.random_operator(B_HH, rng)
    expected = max(np.linalg.norm(b, 2) for b in T.blocks)
    rep = ops.min_K(T, 500, 1)
    assert rep.op_norm_exact == pytest.approx(expected, rel=1e-14)
    assert abs(rep.k_min_est - expected ** 2) <= 1e-6 * (1 + expected ** 2)
    assert rep.validation.passed


def test_lp_fibered_reports_bracket():
    rng = np.random.default_rng(4)
    T = ops.random_operator(ms.Bundle((L23, L23)), rng)
    rep = ops.min_K(T, 300, 0)
    assert rep.op_norm_exact is None and rep.k_min_exact is None
    assert rep.op_norm_lb <= np.sqrt(rep.k_min_est) * (1 + 1e-9)
    assert rep.notes


def test_regularized_normalize():
    b = ms.Bundle((H1,))
    xn = ops.regularized_normalize(b, ms.module_element(b, [[3]]), 1)
    assert xn.coords()[0] == pytest.approx(3 / np.sqrt(10))
    assert ms.triple_norm(b, xn) == pytest.approx(0.9487, abs=1e-4)
    zero = ops.regularized_normalize(b, ms.zero_element(b), 5)
    assert np.all(zero.coords() == 0)
    x = ms.random_module_element(ms.MatrixSelf(3), np.random.default_rng(0)) * 4
    norms = [ms.triple_norm(x.descriptor, ops.regularized_normalize(x.descriptor, x, n)) for n in (1, 10, 100, 1000)]
    assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:])) and norms[-1] <= 1 + 1e-9
    assert norms[-1] > 0.99
    with pytest.raises(DomainError):
        ops.regularized_normalize(b, xn, 0)


def test_boundedness_and_johnson():
    rng = np.random.default_rng(5)
    for desc in (B_HH, ms.Bundle((L23, H2)), ms.MatrixSelf(2)):
        for T in (ops.random_operator(desc, rng), ops.random_dual(desc, rng)):
            assert ops.thm44_check(T, 200, 0).passed
            cod = desc.algebra if isinstance(T, ops.DualFunctional) else T.codomain
            assert ops.johnson_property_check(desc, cod, T, None, 200, 0).passed
    mix = faults.mixing_operator(B_HH, rng)
    rep = ops.johnson_property_check(B_HH, B_HH, mix, None, 200, 0)
    assert not rep.passed and rep.witness is not None


@pytest.mark.parametrize("desc", acceptance_constructions()[:6], ids=lambda d: d.label())
def test_operator_json_round_trip(desc):
    rng = np.random.default_rng(6)
    for T in (ops.random_operator(desc, rng), ops.random_dual(desc, rng), faults.mixing_operator(desc, rng)):
        back = ops.operator_from_json(T.to_json())
        x = ms.random_module_element(desc, rng)
        a, b = ops.apply(T, x), ops.apply(back, x)
        ca = alg.coords(a) if isinstance(a, alg.AlgebraElement) else a.coords()
        cb = alg.coords(b) if isinstance(b, alg.AlgebraElement) else b.coords()
        assert np.array_equal(ca, cb)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(acceptance_constructions()), st.integers(0, 2 ** 32 - 1))
def test_norm_bound_on_samples(desc, seed):
    rng = np.random.default_rng(seed)
    T = ops.random_operator(desc, rng)
    bound = T.exact_norm()
    x = ms.random_module_element(desc, rng, 16)
    tx = ops.apply(T, x)
    lhs = np.sqrt(alg.positive_norm(tx.descriptor.csip(tx.payload, tx.payload)))
    rhs = ms._norm_payload(desc, x.payload)
    if bound is not None:
        assert np.all(lhs <= bound * rhs * (1 + 1e-9))
        K = bound ** 2
        assert np.all(alg.order_margin(tx.descriptor.csip(tx.payload, tx.payload),
                                       alg.scalar_mul(K, desc.csip(x.payload, x.payload))) >= -1e-9)
