import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from cmslab import classical as cl
from cmslab import hybrid as hy
from cmslab.spinspace import SpinVector, is_hermitian


@given(st.integers(0, 5000), st.sampled_from([2, 3]))
def test_explicit_and_algebra_sources_agree(seed, k):
    x = cl.PhasePoint.random(3, np.random.default_rng(seed))
    a = hy.quantum_hamiltonian(k, x, 2, source="explicit").dense()
    b = hy.quantum_hamiltonian(k, x, 2, source="algebra").dense()
    assert np.max(np.abs(a - b)) < 1e-12


@pytest.mark.parametrize("k", [2, 3, 4])
def test_first_order_hamiltonians_hermitian(rng, k):
    x = cl.PhasePoint.random(3, rng)
    assert is_hermitian(hy.quantum_hamiltonian(k, x, 2), tol=1e-12)


def test_two_site_exchange_term():
    # H1_2 = -W_12 P_12 with W = z1 z2 / (z1 - z2)^2 = -1 / (4 sin^2(r / 2))
    x = cl.PhasePoint([0.0, 0.0], [0.0, 1.0])
    m = hy.quantum_hamiltonian(2, x, 2).dense()
    P = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(m, P / (4 * np.sin(0.5) ** 2))


@pytest.mark.parametrize("n,N", [(3, 2), (4, 2), (3, 3)])
def test_haldane_shastry_operators(n, N):
    assert all(r.passed for r in hy.haldane_shastry_report(n, N))


def test_stationary_transport_is_matrix_exponential(rng):
    x = cl.freezing_point(3)
    psi = SpinVector.random(3, 2, rng)
    tr = cl.flow(x, [(2, 1.5)], step=1e-2, ham_orders=(2,))
    out = hy.transport(tr, psi)
    M = hy.haldane_shastry(2, 3, 2).dense()
    assert np.linalg.norm(out.psi.amplitudes - expm(-1.5j * M) @ psi.amplitudes) < 1e-8


def test_transport_preserves_norm(rng):
    tr = cl.flow(cl.PhasePoint.random(3, rng), [({2: 1.0, 3: 1.0}, 1.0)], step=1e-3, ham_orders=(2,))
    state = hy.transport(tr, SpinVector.random(3, 2, rng))
    assert state.norm_drift() < 1e-9
    assert state.to_csv().startswith("t,re_0")


def test_gauge_phase_sign(rng):
    tr = cl.flow(cl.PhasePoint.random(3, rng), [(2, 1.0)], step=1e-3, ham_orders=(2,))
    psi = SpinVector.random(3, 2, rng)
    shift = lambda x: np.cos(x.q[0])
    assert hy.gauge_shift_check(tr, psi, shift).passed
    assert not hy.gauge_shift_check(tr, psi, shift, phase_sign=+1).passed


def test_duality(rng):
    x = cl.PhasePoint.random(3, rng)
    tr = cl.flow(x, [(3, 0.5)], step=1e-2, ham_orders=(2,))
    rho = hy.HybridDensity.random(3, 2, x, rng)
    A = rng.normal(size=(8, 8))
    s = lambda y: hy.SpinOperator(3, 2, matrix=(A + A.T) * np.cos(y.q[1]))
    assert hy.duality_gap(rho, s, tr, 2) < 1e-12


def test_density_validation():
    with pytest.raises(ValueError):
        hy.HybridDensity(np.array([[1, 1], [0, 1]]), cl.freezing_point(1))


def test_two_body_monodromy():
    orbit = hy.two_body_orbit()
    assert orbit.point(0).distance(orbit.final) < 1e-8
    m = hy.monodromy(orbit, 2)
    assert hy.unitarity_defect(m) < 1e-10


def test_open_orbit_has_no_monodromy(rng):
    tr = cl.flow(cl.PhasePoint.random(2, rng), [(2, 0.3)], step=1e-2, ham_orders=(2,))
    with pytest.raises(hy.OrbitNotClosedError):
        hy.monodromy(tr, 2)


def test_zero_curvature_exact():
    assert hy.zero_curvature_exact(2, 3, 3).passed


def test_zero_curvature_residual_shrinks_with_step(rng):
    x = cl.PhasePoint.random(3, rng, min_gap=0.6)
    coarse = hy.zero_curvature_residual(x, 2, 3, 2, 1e-2)
    fine = hy.zero_curvature_residual(x, 2, 3, 2, 1e-3)
    assert fine < coarse / 20 or fine < 1e-8


def test_order_of_flows(rng):
    x = cl.PhasePoint.random(3, rng, min_gap=0.6)
    psi = SpinVector.random(3, 2, rng)
    assert hy.order_of_flows(x, psi, 2, 3, 0.3, 0.2) < 1e-6


def test_unknown_source():
    with pytest.raises(ValueError):
        hy.quantum_hamiltonian(2, cl.freezing_point(3), 2, source="guess")
    with pytest.raises(ValueError):
        hy.quantum_hamiltonian(4, cl.freezing_point(3), 2, source="explicit")
