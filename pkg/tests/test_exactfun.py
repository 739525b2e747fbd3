from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cmslab.exactfun import GaussianRational, PoleError, RationalFunction, VariableSet

VS = VariableSet.cms(2)
z1, z2, p1, p2, hbar, lam = VS.gens()

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)
gauss = st.builds(GaussianRational, small, small)


@given(gauss, gauss, gauss)
def test_gaussian_field_laws(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if not b.is_zero():
        assert (a / b) * b == a


def test_gaussian_basics():
    i = GaussianRational(0, 1)
    assert i * i == GaussianRational(-1)
    assert (GaussianRational(3, 4)).norm2() == 25
    assert complex(GaussianRational(Fraction(1, 2), -1)) == 0.5 - 1j
    with pytest.raises(ZeroDivisionError):
        GaussianRational(1) / GaussianRational(0)


def test_canonical_form_is_unique():
    a = (z1 * z1 - z2 * z2) / (z1 - z2)
    assert a == z1 + z2
    assert a.to_text() == (z1 + z2).to_text()
    assert hash(a) == hash(z1 + z2)


def test_laurent_and_complex_coefficients():
    i = GaussianRational(0, 1)
    f = z1 ** -2 * i + p1
    assert f * z1 ** 2 == i + p1 * z1 ** 2
    assert f.conjugate() == -i * z1 ** -2 + p1
    assert not f.is_real()


def test_derivatives():
    f = z1 / (z1 - z2)
    assert f.derive("z1") == -z2 / (z1 - z2) ** 2
    # Euler derivative z d/dz
    assert (z1 ** 3).derive("z1", euler=True) == 3 * z1 ** 3


@given(small, small)
def test_evaluate_matches_float(a, b):
    f = (p1 * z1 + hbar) / (z1 - z2)
    pt = {"z1": GaussianRational(a, 1), "z2": GaussianRational(b, -1), "p1": 2, "hbar": Fraction(1, 3)}
    exact = f.evaluate(pt)
    approx = f.evaluate(pt, mode="float")
    assert abs(complex(exact) - approx) < 1e-12


def test_pole_raises():
    f = 1 / (z1 - z2)
    with pytest.raises(PoleError):
        f.evaluate({"z1": 1, "z2": 1})


def test_permute_swaps_variables():
    f = z1 / (z1 - z2)
    assert f.permute({"z1": "z2", "z2": "z1"}) == z2 / (z2 - z1)


def test_mismatched_variable_sets():
    other = VariableSet(["x", "y"]).gen("x")
    with pytest.raises((ValueError, TypeError)):
        z1 + other


def test_unknown_variable():
    with pytest.raises(KeyError):
        RationalFunction.variable(VS, "w")
