import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cstar_sip.errors import DomainError, StructuralError
from cstar_sip.sip_classical import Hilbert, LpGiles, sip, sip_continuity_probe, sip_norm, vector


def giles_oracle(p, x, y):
    """Independent evaluation: sum conj(x_i) |x_i|^(p-2) y_i / ||x||_p^(p-2)."""
    x, y = np.asarray(x, complex), np.asarray(y, complex)
    nx = np.sum(np.abs(x) ** p) ** (1 / p)
    if nx == 0:
        return 0j
    w = np.where(x != 0, np.abs(x) ** (p - 2), 0.0)
    return complex(np.sum(np.conj(x) * w * y) / nx ** (p - 2))


def test_examples():
    h2, l3 = Hilbert(2), LpGiles(2, 3)
    assert sip(h2, [1, 0], [0, 1]) == 0
    assert sip(l3, [1, 1], [1, 1]) == pytest.approx(2 ** (2 / 3))
    assert sip(l3, [1, 1], [1, 0]) == pytest.approx(2 ** (-1 / 3))
    assert sip(l3, [1, 1], [1, 0]) == pytest.approx(0.79370, abs=1e-5)
    assert sip_norm(h2, [3, 4]) == pytest.approx(5)
    assert sip_norm(l3, [1, 1]) == pytest.approx(2 ** (1 / 3))
    assert sip_norm(l3, [0, 0]) == 0


def test_space_mismatch():
    with pytest.raises(StructuralError):
        sip(Hilbert(2), vector(LpGiles(2, 3), [1, 0]), [1, 0])


def test_continuity_probe():
    # Re[x + t y, y] = 1 + t for x = y = (1)
    assert sip_continuity_probe(Hilbert(1), [1], [1], [0.1, 0.01]) == pytest.approx([1.1, 1.01])
    grid = [10.0 ** -k for k in range(1, 7)]
    vals = sip_continuity_probe(LpGiles(2, 3), [1, 1], [1, -1], grid)
    assert abs(vals[-1]) < 1e-5 and abs(vals[-1]) < abs(vals[0])
    oracle = [giles_oracle(3, np.array([1, 1]) + t * np.array([1, -1]), [1, -1]).real for t in grid]
    assert vals == pytest.approx(oracle, abs=1e-14)
    assert sip_continuity_probe(LpGiles(2, 3), [1, 1], [0, 0], grid) == [0.0] * 6
    with pytest.raises(DomainError):
        sip_continuity_probe(Hilbert(1), [1], [1], [])


vecs = st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                min_size=3, max_size=3)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1.5, 2.0, 3.0, 4.5]), vecs, vecs, st.complex_numbers(max_magnitude=10))
def test_giles_axioms(p, x, y, lam):
    space = LpGiles(3, p)
    assert sip(space, x, y) == pytest.approx(giles_oracle(p, x, y), rel=1e-9, abs=1e-9)
    nx, ny = sip_norm(space, x), sip_norm(space, y)
    assert abs(sip(space, x, y)) <= nx * ny * (1 + 1e-9) + 1e-12
    # linear in the second argument
    z = np.asarray(y) * lam
    assert sip(space, x, z) == pytest.approx(lam * sip(space, x, y), rel=1e-9, abs=1e-9)
    assert nx == pytest.approx(np.sum(np.abs(x) ** p) ** (1 / p), rel=1e-12, abs=1e-300)
