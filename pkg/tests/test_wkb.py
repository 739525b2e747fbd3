import numpy as np
import pytest

from cmslab import classical as cl
from cmslab import wkb


def test_maslov_conventions():
    assert wkb.maslov_phase(1) == pytest.approx(-1j)
    assert wkb.maslov_phase(1, wkb.MASLOV_QUARTER) == pytest.approx(np.exp(0.25j * np.pi))
    with pytest.raises(ValueError):
        wkb.maslov_phase(1, "other")


def test_reference_solver_matches_exact_free_motion():
    prob = wkb.free_problem(spin=False)
    q, psi = wkb.reference_solve(prob, 512, 0.1, 1.0)
    exact = wkb.free_gaussian(q, 1.0, 0.1, 1.0, np.pi, 0.5)
    assert wkb.l2_relative(psi[:, 0], exact) < 1e-8


def test_free_branch_action_and_jacobian():
    prob = wkb.free_problem()
    [b] = wkb.shoot(prob, 3.0, 1.0)
    # p = a = 1, q0 = q - t, S = f(q0) + t / 2
    assert b.p == pytest.approx(1.0)
    assert b.q0 == pytest.approx(2.0)
    assert b.S == pytest.approx(2.5, abs=1e-10)
    assert b.J == pytest.approx(1.0, abs=1e-10)
    assert b.mu == 0
    assert wkb.hj_action(prob, b) == pytest.approx(b.S, abs=1e-9)


def test_focusing_creates_three_branches():
    prob = wkb.focusing_problem()
    branches = wkb.shoot(prob, 0.1, 1.5)
    assert len(branches) == 3
    assert sorted(b.mu for b in branches) == [0, 0, 1]


def test_caustic_branch_refuses_amplitude():
    b = wkb.WKBBranch(0, 0.0, 0.0, 0.0, 0.0, 0.0, 1, None, True)
    with pytest.raises(wkb.CausticError):
        wkb.amplitude_and_maslov(b)


@pytest.mark.parametrize("make", [wkb.free_problem, wkb.cosine_problem])
def test_hamilton_jacobi_residual(make):
    assert wkb.hj_residual(make(), np.linspace(2.0, 4.0, 6), 1.0) < 1e-5


def test_error_roughly_halves_with_hbar():
    st = wkb.convergence_study(wkb.free_problem(), 1.0, hbars=(0.1, 0.05), M=512)
    assert st["orders"][0] > 0.8


def test_multitime_action_is_path_independent(rng):
    x0 = cl.PhasePoint.random(3, rng, min_gap=0.6)
    r = wkb.path_independence(x0, [0.3, 0.2], step=2e-3)
    assert r.passed, r.metrics


def test_lagrangian_sheet(rng):
    x0 = cl.PhasePoint.random(3, rng, min_gap=0.6)
    assert wkb.lagrangian_check(x0, 2, 3, t=0.5) < 1e-10
    assert wkb.multitime_residual(x0, [0.2, 0.1], step=2e-3) < 1e-6
