import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmslab import classical as cl
from cmslab.exactfun import unit_gaussian, GaussianRational


def test_two_body_energy_closed_form():
    x = cl.PhasePoint([0.3, -0.7], [0.2, 2.1])
    r = x.q[0] - x.q[1]
    expected = 0.5 * (0.3 ** 2 + 0.7 ** 2) + 1 / (4 * np.sin(r / 2) ** 2)
    assert cl.hamiltonian(2, x) == pytest.approx(expected, rel=1e-13)


def test_first_hamiltonian_is_momentum():
    x = cl.PhasePoint([1.0, 2.0, -0.5], [0.1, 1.5, 4.0])
    assert cl.hamiltonian(1, x) == pytest.approx(2.5)


@given(st.integers(0, 10_000), st.sampled_from([2, 3, 4]))
def test_gradient_matches_finite_differences(seed, k):
    x = cl.PhasePoint.random(3, np.random.default_rng(seed))
    dp, dq = cl.angle_gradient(k, x)
    h = 1e-6
    for i in range(3):
        e = np.eye(3)[i] * h
        fp = (cl.hamiltonian(k, cl.PhasePoint(x.p + e, x.q)) - cl.hamiltonian(k, cl.PhasePoint(x.p - e, x.q))) / (2 * h)
        fq = (cl.hamiltonian(k, cl.PhasePoint(x.p, x.q + e)) - cl.hamiltonian(k, cl.PhasePoint(x.p, x.q - e))) / (2 * h)
        assert abs(fp - dp[i]) < 1e-6 * max(1, abs(fp))
        assert abs(fq - dq[i]) < 1e-6 * max(1, abs(fq))


@given(st.integers(0, 10_000))
def test_hamiltonians_poisson_commute(seed):
    x = cl.PhasePoint.random(4, np.random.default_rng(seed))
    for k in (2, 3, 4):
        for l in range(k + 1, 5):
            pb = cl.poisson_bracket(cl.grad_hamiltonian(k, x), cl.grad_hamiltonian(l, x))
            assert abs(pb) < 1e-9


def test_flow_conserves_all_hamiltonians(rng):
    x = cl.PhasePoint.random(3, rng)
    tr = cl.flow(x, [(2, 2.0), ({2: 1.0, 3: 0.5}, 1.0)], step=1e-3, ham_orders=(1, 2, 3))
    assert np.max(tr.drift()) < 1e-8
    assert cl.isospectral_drift(tr) < 1e-8


def test_flows_commute(rng):
    x = cl.PhasePoint.random(3, rng)
    a = cl.flow(x, [(2, 0.5), (3, 0.4)], step=1e-3).final
    b = cl.flow(x, [(3, 0.4), (2, 0.5)], step=1e-3).final
    assert a.distance(b) < 1e-8


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_freezing_point(n):
    assert all(r.passed for r in cl.verify_fixed_point(n))
    assert cl.stationarity(n, t_end=2.0) < 1e-10


def test_newton_identities_exact():
    z = [unit_gaussian(1, 2), unit_gaussian(3, -1), unit_gaussian(-2, 5)]
    p = [GaussianRational(1), GaussianRational(-2), GaussianRational(1, 0)]
    out = cl.newton_identities(p, z)
    assert all(r.is_zero() for r in out["residuals"])


def test_collision_is_guarded():
    with pytest.raises(cl.CollisionError):
        cl.lax_matrix([0, 0], [1.0, 1.0 + 1e-12])


def test_trajectory_csv_header(rng):
    tr = cl.flow(cl.PhasePoint.random(2, rng), [(2, 0.01)], step=1e-3, ham_orders=(2,))
    head = tr.to_csv().splitlines()[0]
    assert head == "t,p_1,p_2,q_1,q_2,H_2"
    assert len(tr.to_csv().splitlines()) == len(tr.times) + 1


def test_bad_step():
    with pytest.raises(ValueError):
        cl.flow(cl.freezing_point(3), [(2, 1.0)], step=0)
