import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from cstar_sip import algebra as alg
from cstar_sip import module_sip as ms
from cstar_sip import orthogonality as orth
from cstar_sip.errors import DomainError, PreconditionError
from cstar_sip.harness import acceptance_constructions
from cstar_sip.sip_classical import Hilbert, LpGiles

H1, H2, L23 = Hilbert(1), Hilbert(2), LpGiles(2, 3)
B_L = ms.Bundle((L23,))
B_H = ms.Bundle((H2,))


def el(desc, payload):
    return ms.module_element(desc, payload)


def test_bj_examples():
    r = orth.bj_minimize(B_H, el(B_H, [[1, 0]]), el(B_H, [[0, 1]]))
    assert abs(r.alpha_star) < 1e-6 and r.min_norm == pytest.approx(1) and r.is_orthogonal
    r = orth.bj_minimize(B_L, el(B_L, [[1, 1]]), el(B_L, [[1, 0]]))
    assert r.alpha_star == pytest.approx(-1, abs=1e-4)
    assert r.min_norm == pytest.approx(1, abs=1e-9)
    assert r.base_norm == pytest.approx(2 ** (1 / 3)) and not r.is_orthogonal
    r = orth.bj_minimize(B_L, ms.zero_element(B_L), el(B_L, [[1, 2]]))
    assert r.is_orthogonal and r.min_norm == 0


def test_bj_rejects_nonfinite():
    bad = ms.ModuleElement(B_L, (np.array([np.nan, 1.0 + 0j]),))
    with pytest.raises(DomainError):
        orth.bj_minimize(B_L, bad, el(B_L, [[1, 0]]))


def test_zero_pairing_implies_orthogonal():
    x, y = el(B_L, [[1, 1]]), el(B_L, [[1, -1]])
    assert alg.cstar_norm(ms.csip(B_L, x, y)) < 1e-15
    assert orth.thm31_check(B_L, x, y)
    # oracle: ||x + a y||_3 >= 2^(1/3) for all complex a
    assert orth.bj_minimize(B_L, x, y).min_norm == pytest.approx(2 ** (1 / 3), abs=1e-9)
    b2 = ms.Bundle((H2, H2))
    assert orth.thm31_check(b2, el(b2, [[1, 0], [0, 1]]), el(b2, [[0, 1], [1, 0]]))
    assert orth.thm31_check(B_L, ms.zero_element(B_L), y)
    with pytest.raises(PreconditionError):
        orth.thm31_check(B_L, x, el(B_L, [[1, 0]]))


def test_complement_examples():
    y = orth.sip_orthogonal_complement_sample(B_H, el(B_H, [[1, 0]]), 0)
    assert abs(y.coords()[0]) < 1e-14 and abs(y.coords()[1]) > 0
    y = orth.sip_orthogonal_complement_sample(B_L, el(B_L, [[1, 1]]), 0)
    c = y.coords()
    assert abs(c[0] + c[1]) < 1e-12 and abs(c[0]) > 0
    with pytest.raises(DomainError):
        orth.sip_orthogonal_complement_sample(B_L, ms.zero_element(B_L), 0)


def test_continuity_examples():
    b = ms.Bundle((H2, H2))
    rng = np.random.default_rng(2)
    x, y = ms.random_module_element(b, rng), ms.random_module_element(b, rng)
    prof = orth.continuity_profile(b, x, y)
    # bilinear: delta(t) = t ||Re[y, y]||
    ny2 = alg.cstar_norm(ms.csip(b, y, y))
    assert np.allclose(prof, np.array(orth.CONTINUITY_GRID) * ny2, rtol=1e-9)
    assert orth.continuity_check(b, x, y)
    assert not orth.continuity_check(b, x, y, t_grid=[1e3])
    assert orth.continuity_check(B_L, el(B_L, [[1, 1]]), el(B_L, [[1, -1]]))


def test_self_adjoint_criterion_examples():
    b = ms.Bundle((H1,))
    assert orth.thm34_hypothesis(b, el(b, [[2]]), ms.zero_element(b), 0.5)
    b2 = ms.Bundle((H1, H1))
    assert not orth.thm34_hypothesis(b2, el(b2, [[1], [2]]), ms.zero_element(b2), 0.5)
    rep = orth.thm34_check(b2, el(b2, [[1], [2]]), el(b2, [[1], [0]]))
    assert rep.passed and rep.vacuous == 1
    rep = orth.thm34_check(b2, ms.zero_element(b2), el(b2, [[1], [1]]))
    assert rep.passed and rep.vacuous == 0
    m2 = ms.MatrixSelf(2)
    with pytest.raises(PreconditionError):
        orth.thm34_hypothesis(m2, el(m2, np.eye(2)), el(m2, [[0, 1], [0, 0]]), 0.1)


def test_witness_searches():
    b = ms.Bundle((L23, L23))
    conv = orth.find_converse_witness(b, 1000, 42)
    assert conv.passed and orth.reverify_converse(conv.witness)
    defect = orth.find_defect_witness(b, 1000, 42)
    assert defect.passed and orth.reverify_defect(defect.witness)
    hilbert = orth.find_converse_witness(ms.Bundle((H2, H2)), 1000, 42)
    assert hilbert.skipped and "no counterexample expected" in hilbert.note
    tiny = orth.find_converse_witness(b, 1, 0)
    assert "search budget 1 trials" in tiny.note


def _oracle_min(desc, x, y):
    """Nelder-Mead over complex alpha from several starts; independent of the solver."""
    def f(v):
        return ms.triple_norm(desc, x + y * complex(v[0], v[1]))

    best = f([0, 0])
    for start in ([0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]):
        res = minimize(f, start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        best = min(best, res.fun)
    return best


@pytest.mark.parametrize("desc", [ms.Bundle((L23, L23)), ms.Bundle((LpGiles(3, 1.5),) * 2), ms.MatrixSelf(2),
                                  ms.DirectSumModule((ms.Bundle((H2,)), ms.MatrixSelf(2)))],
                         ids=lambda d: d.label())
def test_bj_matches_oracle(desc):
    rng = np.random.default_rng(11)
    for _ in range(8):
        x, y = ms.random_module_element(desc, rng), ms.random_module_element(desc, rng)
        got = orth.bj_minimize(desc, x, y).min_norm
        assert got <= _oracle_min(desc, x, y) + 1e-8
        assert got >= 0


@pytest.mark.parametrize("desc", acceptance_constructions(), ids=lambda d: d.label())
def test_orthogonality_suites(desc):
    assert orth.verify_thm31(desc, 200, 5).passed
    assert orth.verify_continuity(desc, 200, 5).passed
    assert orth.verify_thm34(desc, 200, 5).passed


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([ms.Bundle((L23, L23)), ms.MatrixSelf(2)]), st.integers(0, 2 ** 32 - 1),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_orthogonality_scale_invariant(desc, seed, lam):
    rng = np.random.default_rng(seed)
    x = ms.random_module_element(desc, rng)
    y = orth.sip_orthogonal_complement_sample(desc, x, seed) if seed % 2 else ms.random_module_element(desc, rng)
    r1 = orth.bj_minimize(desc, x, y)
    r2 = orth.bj_minimize(desc, x, y * lam)
    assert r1.min_norm == pytest.approx(r2.min_norm, abs=1e-8 * (1 + r1.base_norm))
    assert r1.min_norm <= r1.base_norm + 1e-12
