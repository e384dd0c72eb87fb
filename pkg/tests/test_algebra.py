import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cstar_sip import algebra as alg
from cstar_sip.algebra import DirectSum, Functions, Matrices
from cstar_sip.errors import DomainError, StructuralError

F1, F2 = Functions(1), Functions(2)
M1, M2, M3 = Matrices(1), Matrices(2), Matrices(3)


def el(desc, data):
    return alg.element(desc, data)


def close(a, b, tol=1e-12):
    return np.allclose(alg.coords(a), alg.coords(b), atol=tol, rtol=0)


# -- worked examples ----------------------------------------------------------

def test_add_examples():
    assert close(el(F2, [1, 2]) + el(F2, [3, -2]), el(F2, [4, 0]))
    assert close(el(M1, [[5]]) + el(M1, [[0]]), el(M1, [[5]]))
    ds = DirectSum((F1, M1))
    assert close(el(ds, [[1], [[2]]]) + el(ds, [[1], [[-2]]]), el(ds, [[2], [[0]]]))


def test_add_descriptor_mismatch():
    with pytest.raises(StructuralError):
        el(F2, [1, 2]) + el(M1, [[1]])


def test_star_and_mul_examples():
    assert close(alg.star(el(F2, [1j, 1])), el(F2, [-1j, 1]))
    assert close(alg.star(el(M2, [[0, 1], [0, 0]])), el(M2, [[0, 0], [1, 0]]))
    assert close(el(F2, [2, 3]) * el(F2, [1, 0]), el(F2, [2, 0]))


def test_cstar_norm_examples():
    assert alg.cstar_norm(el(F2, [3j, -4])) == pytest.approx(4)
    assert alg.cstar_norm(el(M2, [[3, 0], [0, -4]])) == pytest.approx(4)
    assert alg.cstar_norm(el(DirectSum((F1, F1)), [[2], [5]])) == pytest.approx(5)


def test_re_and_self_adjoint():
    assert close(alg.re(el(F2, [1 + 2j, 3])), el(F2, [1, 3]))
    assert close(alg.re(el(M2, [[0, 2], [0, 0]])), el(M2, [[0, 1], [1, 0]]))
    assert not alg.is_self_adjoint(el(F1, [1j]))


def test_positivity_and_order():
    assert alg.is_positive(el(F2, [1, 2]))
    assert not alg.is_positive(el(F2, [1, -0.5]))
    assert alg.is_positive(el(M2, [[2, 1], [1, 2]]))
    assert alg.leq(el(F2, [1, 1]), el(F2, [2, 1]))
    assert not alg.leq(el(M2, np.diag([1, 3])), el(M2, np.diag([2, 2])))


def test_sqrt_examples():
    assert close(alg.sqrt_positive(el(F2, [4, 9])), el(F2, [2, 3]))
    assert close(alg.sqrt_positive(alg.identity(M2)), alg.identity(M2))
    s3 = np.sqrt(3)
    expected = 0.5 * np.array([[1 + s3, s3 - 1], [s3 - 1, 1 + s3]])
    assert close(alg.sqrt_positive(el(M2, [[2, 1], [1, 2]])), el(M2, expected))
    with pytest.raises(DomainError):
        alg.sqrt_positive(el(F2, [1, -1]))


def test_regularized_inv_sqrt_examples():
    assert close(alg.regularized_inv_sqrt(el(F1, [3]), 1), el(F1, [0.5]))
    assert close(alg.regularized_inv_sqrt(el(F2, [0, 0]), 4), el(F2, [0.5, 0.5]))
    assert close(alg.regularized_inv_sqrt(el(M2, np.diag([3, 8])), 1), el(M2, np.diag([0.5, 1 / 3])))
    with pytest.raises(DomainError):
        alg.regularized_inv_sqrt(el(F1, [3]), 0)


def test_cube_norm_identity_examples():
    assert alg.cube_norm_identity_check(el(F2, [1, -2]))
    assert alg.cube_norm_identity_check(el(M2, [[0, 1], [1, 0]]))
    rng = np.random.default_rng(3)
    z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    h = z + z.conj().T
    assert alg.cube_norm_identity_check(el(M3, h))
    # eigenvalue oracle
    lam = np.linalg.eigvalsh(h)
    assert alg.cstar_norm(el(M3, h @ h @ h)) == pytest.approx(np.max(np.abs(lam)) ** 3)
    with pytest.raises(DomainError):
        alg.cube_norm_identity_check(el(M2, [[0, 1], [0, 0]]))


def test_extreme_eigs_closed_forms():
    rng = np.random.default_rng(0)
    for n in (2, 3):
        z = rng.standard_normal((500, n, n)) + 1j * rng.standard_normal((500, n, n))
        h = z + np.swapaxes(z, -1, -2).conj()
        lo, hi = alg._extreme_eigs(h)
        ref = np.linalg.eigvalsh(h)
        assert np.max(np.abs(lo - ref[:, 0])) < 1e-12
        assert np.max(np.abs(hi - ref[:, -1])) < 1e-12


def test_json_round_trip():
    ds = DirectSum((F2, M2))
    a = el(ds, [[1 + 1j, 2], [[1, 2j], [3, 4]]])
    b = alg.element_from_json(alg.element_to_json(a))
    assert b.descriptor == ds and close(a, b, 0)


# -- properties -------------------------------------------------------------------

DESCS = [F2, M2, M3, DirectSum((Functions(3), Matrices(2)))]


@st.composite
def elements(draw, count=1):
    desc = draw(st.sampled_from(DESCS))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    scale = draw(st.floats(1e-3, 1e3))
    return [alg.scalar_mul(scale, alg.random_element(desc, rng)) for _ in range(count)]


@settings(max_examples=60, deadline=None)
@given(elements(2))
def test_cstar_identity_and_submultiplicativity(pair):
    a, b = pair
    na = alg.cstar_norm(a)
    assert alg.cstar_norm(alg.star(a) * a) == pytest.approx(na ** 2, rel=1e-10)
    assert alg.cstar_norm(a * b) <= na * alg.cstar_norm(b) * (1 + 1e-12)
    assert close(alg.star(alg.star(a)), a, 0)


@settings(max_examples=60, deadline=None)
@given(elements(1))
def test_sqrt_of_positive_squares_back(one):
    (a,) = one
    p = alg.star(a) * a
    assert alg.is_positive(p)
    r = alg.sqrt_positive(p)
    assert alg.is_positive(r)
    assert alg.distance(r * r, p) <= 1e-9 * (1 + alg.cstar_norm(p))


@settings(max_examples=60, deadline=None)
@given(elements(2))
def test_order_is_compatible_with_sums(pair):
    a, b = pair
    p, q = alg.star(a) * a, alg.star(b) * b
    assert alg.leq(p, p + q)
    assert alg.leq(p, p)
