import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmslab import rmatrix as rm

nonzero = st.floats(0.2, 3.0) | st.floats(-3.0, -0.2)


@given(nonzero, nonzero, st.floats(-1, 1), st.sampled_from([2, 3]))
def test_qybe_holds_for_yang(u, v, hbar, N):
    if abs(u + v) < 1e-3:
        return
    assert rm.qybe_residual(rm.yang_r(N), u, v, hbar) < 1e-10


def test_r_at_zero_hbar_is_identity():
    assert np.allclose(rm.yang_r(2)(0.7, 0.0), np.eye(4))


def test_flip_is_involution():
    P = rm.flip(3)
    assert np.allclose(P @ P, np.eye(9))


def test_unitarity_scalar_closed_form():
    f, rest = rm.unitarity_scalar(rm.yang_r(2), 0.5, 0.3)
    assert f == pytest.approx(1 - 0.3 ** 2 / 0.5 ** 2)
    assert rest < 1e-14


def test_extraction_recovers_declared_r_and_s():
    fam = rm.yang_r(2)
    r, s = rm.semiclassical_extract(fam, 1.3)
    assert np.max(np.abs(r - fam.r(1.3))) < 1e-9
    assert np.max(np.abs(s)) < 1e-9


@pytest.mark.parametrize("N", [2, 3])
def test_suite_passes(N):
    reports = rm.suite(N)
    assert all(r.passed for r in reports), [r.identity for r in reports if not r.passed]


def test_negative_control_fails(rng):
    bad = rm.perturbed(rm.yang_r(2), 1e-3, rng)
    assert not rm.qybe_grid(bad).passed


def test_pole():
    with pytest.raises(ZeroDivisionError):
        rm.yang_r(2)(0, 0.1)
