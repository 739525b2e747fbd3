"""Hybrid quantum-classical evolution for the spin CMS system.

The classical point ``x = (p, q)`` follows the CMS flows while the spin state
is transported by the first-order (in hbar) parts ``H1_k`` of the quantum
Hamiltonians:

    d Psi / d t_k = -i H1_k(x(t)) Psi.

``U_x(t)`` denotes the solution of ``dU/dt = i U H1(x(t))``, ``U(0) = 1``,
so that ``Psi(t) = U^{-1} Psi(0)``, observables evolve as
``s_x(t) = U s_{x(t)} U^{-1}`` and the monodromy of a closed orbit is
``U_x(T)``.
"""
from __future__ import annotations

import io
import csv
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Callable, Mapping, Sequence

import numpy as np

from . import classical as cl
from .classical import PhasePoint, Trajectory
from .exactfun import GaussianRational
from .reports import Report
from .spinspace import (Perm, SpinOperator, SpinVector, compose, cyclic_shift, inverse,
                        transposition)

HERMITIAN_TOL = 1e-12
NORM_FAIL = 1e-6


class NotHermitianError(ArithmeticError):
    pass


class OrbitNotClosedError(ValueError):
    pass


# first-order Hamiltonians ----------------------------------------------------------

def _explicit_terms(k: int, x: PhasePoint) -> dict[Perm, complex]:
    n = x.n
    z, p = x.z, x.p
    W = cl.pair_weights(z)
    terms: dict[Perm, complex] = {}
    if k == 1:
        return terms
    for i in range(n):
        for j in range(i + 1, n):
            w = transposition(i + 1, j + 1, n)
            if k == 2:
                terms[w] = -W[i, j]
            else:
                terms[w] = -W[i, j] * (p[i] + p[j])
    if k == 3:
        for i, j, l in permutations(range(n), 3):
            c = z[i] * z[j] * z[l] / ((z[i] - z[j]) * (z[j] - z[l]) * (z[l] - z[i]))
            w = compose(transposition(j + 1, l + 1, n), transposition(i + 1, j + 1, n))
            terms[w] = terms.get(w, 0) - c / 3
    return terms


@lru_cache(maxsize=None)
def _compiled_table(k: int, n: int):
    from . import heckerep as hr

    if k in (2, 3):
        table = hr.displayed_h1_table(k, n)
    else:
        table = hr.semiclassical_split(hr.symmetric_hamiltonian(k, n, hr.QUANTUM)).weyl_h1()
    names = [f"p{i}" for i in range(1, n + 1)] + [f"z{i}" for i in range(1, n + 1)]
    return {w: f.compile(names) for w, f in table.items()}


def _table_terms(k: int, x: PhasePoint) -> dict[Perm, complex]:
    if k == 1:
        return {}
    args = [*x.p, *x.z]
    return {w: complex(f(*args)) for w, f in _compiled_table(k, x.n).items()}


def check_hermitian_terms(terms: Mapping[Perm, complex], tol: float = HERMITIAN_TOL) -> float:
    """Largest ``|c_{w^-1} - conj(c_w)|`` over a permutation expansion."""
    worst = 0.0
    for w, c in terms.items():
        c_inv = terms.get(inverse(w), 0.0)
        worst = max(worst, abs(c_inv - np.conj(c)))
    return worst


def quantum_hamiltonian(k: int, x: PhasePoint, N: int, source: str = "auto",
                        check: bool = True) -> SpinOperator:
    """First-order spin Hamiltonian ``H1_k`` at ``x`` as a lazy permutation expansion.

    ``source="explicit"`` uses closed formulas (k <= 3), ``"algebra"`` the
    normal-ordered Dunkl construction (k <= 4); ``"auto"`` prefers the former.
    """
    cl._guard(x.z)
    if k < 1:
        raise ValueError("k must be >= 1")
    if source == "auto":
        source = "explicit" if k <= 3 else "algebra"
    if source == "explicit":
        if k > 3:
            raise ValueError("explicit formulas exist for k <= 3")
        terms = _explicit_terms(k, x)
    elif source == "algebra":
        terms = _table_terms(k, x)
    else:
        raise ValueError(f"unknown source {source!r}")
    if check:
        scale = max([1.0] + [abs(c) for c in terms.values()])
        err = check_hermitian_terms(terms)
        if err > HERMITIAN_TOL * scale:
            raise NotHermitianError(f"H1_{k} fails Hermiticity by {err:.3e}")
    return SpinOperator(x.n, N, terms=terms)


def weighted_hamiltonian(weights: Mapping[int, float], x: PhasePoint, N: int) -> SpinOperator:
    out = SpinOperator.zero(x.n, N)
    for k, w in weights.items():
        if w:
            out = out + quantum_hamiltonian(k, x, N) * w
    return out


# transport -------------------------------------------------------------------------

def _hermite(x0: PhasePoint, x1: PhasePoint, f0, f1, h: float, s: float) -> PhasePoint:
    """Cubic Hermite interpolation of the orbit at fraction ``s`` of a step."""
    h00 = 2 * s ** 3 - 3 * s ** 2 + 1
    h10 = s ** 3 - 2 * s ** 2 + s
    h01 = -2 * s ** 3 + 3 * s ** 2
    h11 = s ** 3 - s ** 2
    y0, y1 = x0.as_vector(), x1.as_vector()
    y = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
    n = x0.n
    return PhasePoint(y[:n], y[n:])


def _field(weights, x):
    pd, qd = cl.vector_field(weights, x)
    return np.concatenate([pd, qd])


def propagate(traj: Trajectory, N: int, Y0: np.ndarray, sign: int = -1,
              extra: Callable[[PhasePoint], float] | None = None,
              record: bool = False):
    """RK4 for ``dY/dt = sign * i (H1(x(t)) + extra(x(t))) Y`` along a precomputed orbit.

    ``Y0`` is a state vector or a matrix (propagated column-wise).  Orbit
    values at the Runge-Kutta midpoints come from cubic Hermite interpolation
    using the classical vector field.
    """
    Y = np.array(Y0, dtype=complex)
    history = [Y.copy()] if record else None
    weights_seq = traj.step_weights
    if len(weights_seq) != len(traj.times) - 1:
        raise ValueError("trajectory carries no per-step flow data")
    for i, weights in enumerate(weights_seq):
        h = traj.times[i + 1] - traj.times[i]
        xa, xb = traj.point(i), traj.point(i + 1)
        fa, fb = _field(weights, xa), _field(weights, xb)
        xm = _hermite(xa, xb, fa, fb, h, 0.5)

        def gen(x):
            m = weighted_hamiltonian(weights, x, N).dense() if weights else np.zeros((N ** x.n,) * 2)
            if extra is not None:
                m = m + extra(x) * np.eye(m.shape[0])
            return sign * 1j * m

        Ga, Gm, Gb = gen(xa), gen(xm), gen(xb)
        k1 = Ga @ Y
        k2 = Gm @ (Y + 0.5 * h * k1)
        k3 = Gm @ (Y + 0.5 * h * k2)
        k4 = Gb @ (Y + h * k3)
        Y = Y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if record:
            history.append(Y.copy())
    return (Y, history) if record else Y


@dataclass
class TransportState:
    psi: SpinVector
    times: np.ndarray
    trajectory: Trajectory
    history: list = field(default_factory=list)
    evolution: np.ndarray | None = None

    def norm_drift(self) -> float:
        n0 = np.linalg.norm(self.history[0])
        return float(max(abs(np.linalg.norm(h) - n0) for h in self.history))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        dim = self.psi.amplitudes.size
        w.writerow(["t"] + [f"re_{i}" for i in range(dim)] + [f"im_{i}" for i in range(dim)]
                   + ["norm", "fidelity"])
        v0 = self.history[0]
        for t, v in zip(self.times, self.history):
            w.writerow([f"{t:.12e}"] + [f"{a:.12e}" for a in (*v.real, *v.imag)]
                       + [f"{np.linalg.norm(v):.12e}", f"{abs(np.vdot(v0, v)):.12e}"])
        return buf.getvalue()


def transport(traj: Trajectory, psi0: SpinVector) -> TransportState:
    """Spin state carried along ``traj``: ``dPsi/dt_k = -i H1_k(x(t)) Psi`` per segment."""
    N = psi0.N
    Y, hist = propagate(traj, N, psi0.amplitudes, sign=-1, record=True)
    state = TransportState(SpinVector(psi0.n, N, Y), traj.times, traj, hist)
    drift = state.norm_drift()
    if drift > NORM_FAIL:
        raise ArithmeticError(f"transport norm drift {drift:.3e} exceeds {NORM_FAIL}")
    return state


def evolution_operator(traj: Trajectory, N: int) -> np.ndarray:
    """``U_x(t)`` at the end of ``traj`` (solution of ``dU/dt = i U H1``)."""
    dim = N ** traj.p.shape[1]
    V = propagate(traj, N, np.eye(dim, dtype=complex), sign=-1)
    # V solves dV/dt = -i H1 V, so U = V^{-1} = V^dagger
    return V.conj().T


def monodromy(traj: Trajectory, N: int, closure_tol: float = 1e-8) -> SpinOperator:
    gap = traj.point(0).distance(traj.final)
    if gap > closure_tol:
        raise OrbitNotClosedError(f"orbit does not close: |x(T) - x(0)| = {gap:.3e}")
    return SpinOperator(traj.p.shape[1], N, matrix=evolution_operator(traj, N))


def unitarity_defect(m: SpinOperator) -> float:
    a = m.dense()
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))


# observables and states -------------------------------------------------------------

def heisenberg_evolve(s: Callable[[PhasePoint], SpinOperator], traj: Trajectory, N: int) -> SpinOperator:
    """``s_x(t) = U_x(t) s_{x(t)} U_x(t)^{-1}`` at the base point of ``traj``."""
    U = evolution_operator(traj, N)
    st = s(traj.final).dense()
    return SpinOperator(traj.p.shape[1], N, matrix=U @ st @ U.conj().T)


@dataclass(frozen=True)
class HybridDensity:
    rho: np.ndarray
    x: PhasePoint
    weight: float = 1.0

    def __post_init__(self):
        r = np.asarray(self.rho, dtype=complex)
        if np.max(np.abs(r - r.conj().T), initial=0.0) > 1e-10:
            raise ValueError("density matrix must be Hermitian")
        if np.min(np.linalg.eigvalsh(r)) < -1e-9:
            raise ValueError("density matrix must be positive semidefinite")
        object.__setattr__(self, "rho", r)

    @classmethod
    def pure(cls, v: SpinVector, x: PhasePoint) -> "HybridDensity":
        a = v.amplitudes
        return cls(np.outer(a, a.conj()), x)

    @classmethod
    def random(cls, n: int, N: int, x: PhasePoint, rng: np.random.Generator, rank: int = 2):
        dim = N ** n
        A = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
        r = A @ A.conj().T
        return cls(r / np.trace(r).real, x)

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)


def density_evolve(rho0: HybridDensity, traj: Trajectory, N: int) -> HybridDensity:
    """State carried from ``x(0)`` to ``x(t)``: ``rho(t) = U^{-1} rho0 U``.

    Equivalently the density found at ``x`` after time ``t`` is the one that
    sat at ``x(-t)``, conjugated by the evolution along the orbit.
    """
    U = evolution_operator(traj, N)
    r = U.conj().T @ rho0.rho @ U
    out = HybridDensity(0.5 * (r + r.conj().T), traj.final, rho0.weight)
    return out


def expectation_value(rho: HybridDensity | np.ndarray, s: SpinOperator | np.ndarray) -> complex:
    r = rho.rho if isinstance(rho, HybridDensity) else np.asarray(rho)
    m = s.dense() if isinstance(s, SpinOperator) else np.asarray(s)
    return complex(np.trace(r @ m))


def duality_gap(rho0: HybridDensity, s: Callable[[PhasePoint], SpinOperator], traj: Trajectory, N: int) -> float:
    """``|E_rho(s(t)) - E_{rho(t)}(s)|``."""
    lhs = expectation_value(rho0, heisenberg_evolve(s, traj, N))
    rhs = expectation_value(density_evolve(rho0, traj, N), s(traj.final))
    return abs(lhs - rhs)


# gauge invariance ---------------------------------------------------------------------

def gauge_shift_check(traj: Trajectory, psi0: SpinVector, shift: Callable[[PhasePoint], float],
                      phase_sign: int = -1, tol: float = 1e-8) -> Report:
    """Adding a scalar ``shift(x)`` to ``H1`` multiplies the transported state by ``exp(phase_sign i theta)``.

    ``theta(t) = int_0^t shift(x(tau)) dtau`` is computed by an independent
    composite Simpson quadrature on the orbit nodes (Hermite midpoints).
    With ``dv/dt = -i H1 v`` the consistent phase has ``phase_sign = -1``.
    """
    N = psi0.N
    v = propagate(traj, N, psi0.amplitudes, sign=-1)
    w = propagate(traj, N, psi0.amplitudes, sign=-1, extra=shift)
    theta = 0.0
    for i, weights in enumerate(traj.step_weights):
        h = traj.times[i + 1] - traj.times[i]
        xa, xb = traj.point(i), traj.point(i + 1)
        xm = _hermite(xa, xb, _field(weights, xa), _field(weights, xb), h, 0.5)
        theta += h / 6 * (shift(xa) + 4 * shift(xm) + shift(xb))
    err = float(np.linalg.norm(w - np.exp(phase_sign * 1j * theta) * v))
    return Report("gauge shift H1 -> H1 + z multiplies the state by a phase",
                  "hybrid gauge invariance", {"phase_sign": phase_sign, "t": float(traj.times[-1])},
                  passed=err <= tol, metrics={"error": err, "theta": float(theta)})


# compatibility ---------------------------------------------------------------------------

def _step(weights, x, h):
    return cl.rk4_step(weights, x, h)


def _flow_derivative(k: int, l: int, x: PhasePoint, N: int, h: float, substeps: int = 2) -> np.ndarray:
    """Centered difference of ``H1_l`` along the ``t_k`` flow."""
    xp, xm = x, x
    for _ in range(substeps):
        xp = _step({k: 1.0}, xp, h / substeps)
        xm = _step({k: 1.0}, xm, -h / substeps)
    return (quantum_hamiltonian(l, xp, N).dense() - quantum_hamiltonian(l, xm, N).dense()) / (2 * h)


def zero_curvature_residual(x0: PhasePoint, k: int, l: int, N: int, step: float = 1e-3) -> float:
    """Frobenius norm of ``d_k H1_l - d_l H1_k + i [H1_k, H1_l]`` at ``x0``."""
    if k == l:
        raise ValueError("need k != l")
    Hk = quantum_hamiltonian(k, x0, N).dense() if k > 1 else 0
    Hl = quantum_hamiltonian(l, x0, N).dense() if l > 1 else 0
    dkl = _flow_derivative(k, l, x0, N, step) if l > 1 else 0
    dlk = _flow_derivative(l, k, x0, N, step) if k > 1 else 0
    comm = Hk @ Hl - Hl @ Hk if (k > 1 and l > 1) else 0
    R = dkl - dlk + 1j * comm
    return float(np.linalg.norm(R))


def zero_curvature_study(x0: PhasePoint, k: int, l: int, N: int,
                         steps: Sequence[float] | None = None) -> dict:
    """Residual under repeated step halving; truncation error falls by 4 per halving
    until it reaches the plateau set by the true residual and round-off."""
    if steps is None:
        steps = [1e-2 / 2 ** i for i in range(14)]
    res = [zero_curvature_residual(x0, k, l, N, h) for h in steps]
    ratios = [a / b if b > 0 else float("inf") for a, b in zip(res, res[1:])]
    return {"steps": list(steps), "residuals": res, "ratios": ratios, "plateau": min(res)}


def zero_curvature_exact(k: int, l: int, n: int) -> Report:
    """Symbolic zero curvature: ``{H_k, H1_l} - {H_l, H1_k} + i [H1_k, H1_l] = 0`` in the group algebra.

    Here ``{H, F}`` is the derivative of ``F`` along the flow of ``H``, i.e.
    ``sum_j (dH/dp_j dF/dq_j - dF/dp_j dH/dq_j)`` with ``d/dq_j = i z_j d/dz_j``.
    """
    from . import heckerep as hr

    def table(m):
        if m == 1:
            return {}
        if m in (2, 3):
            return hr.displayed_h1_table(m, n)
        return hr.semiclassical_split(hr.symmetric_hamiltonian(m, n, hr.QUANTUM)).weyl_h1()

    Tk, Tl = table(k), table(l)
    Hk, Hl = hr.power_trace(n, k), hr.power_trace(n, l)
    I = GaussianRational(0, 1)

    def along(H, F):
        out = F * 0
        for j in range(1, n + 1):
            dq_F = F.derive(f"z{j}", euler=True) * I
            dq_H = H.derive(f"z{j}", euler=True) * I
            out = out + H.derive(f"p{j}") * dq_F - F.derive(f"p{j}") * dq_H
        return out

    acc: dict[Perm, object] = {}

    def add(w, f):
        acc[w] = acc[w] + f if w in acc else f

    for w, f in Tl.items():
        add(w, along(Hk, f))
    for w, f in Tk.items():
        add(w, -along(Hl, f))
    for u, f in Tk.items():
        for v, g in Tl.items():
            add(compose(u, v), f * g * I)
            add(compose(v, u), -(g * f) * I)
    bad = {w: f for w, f in acc.items() if not f.is_zero()}
    wit = None
    if bad:
        w = sorted(bad)[0]
        wit = {"word": list(w), "coefficient": bad[w].to_text()}
    return Report("d_k H1_l - d_l H1_k + i[H1_k, H1_l] = 0 (exact)",
                  "zero curvature of the hybrid CMS flows", {"k": k, "l": l, "n": n},
                  passed=not bad, witness=wit)


def order_of_flows(x0: PhasePoint, psi0: SpinVector, k: int, l: int, tk: float, tl: float,
                   step: float = 1e-3) -> float:
    """Distance between (t_k then t_l) and (t_l then t_k) transports of ``(x0, psi0)``."""
    a = cl.flow(x0, [(k, tk), (l, tl)], step=step, ham_orders=(2,))
    b = cl.flow(x0, [(l, tl), (k, tk)], step=step, ham_orders=(2,))
    va = transport(a, psi0).psi.amplitudes
    vb = transport(b, psi0).psi.amplitudes
    return float(max(np.linalg.norm(va - vb), a.final.distance(b.final)))


# Haldane-Shastry ----------------------------------------------------------------------------

def haldane_shastry(k: int, n: int, N: int) -> SpinOperator:
    """``M_k = H1_k`` at the freezing point."""
    return quantum_hamiltonian(k, cl.freezing_point(n), N)


def haldane_shastry_sin2(n: int, N: int) -> SpinOperator:
    """``(1/8) sum_{i != j} P_ij / sin^2(pi (i - j) / n)``."""
    terms = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            terms[transposition(i, j, n)] = 2 * (1 / 8) / np.sin(np.pi * (i - j) / n) ** 2
    return SpinOperator(n, N, terms=terms)


def haldane_shastry_report(n: int, N: int, orders: Sequence[int] = (2, 3)) -> list[Report]:
    anchor = "Haldane-Shastry operators at the freezing point"
    ops = {k: haldane_shastry(k, n, N).dense() for k in orders}
    out = []
    for a in orders:
        for b in orders:
            if a < b:
                c = float(np.linalg.norm(ops[a] @ ops[b] - ops[b] @ ops[a]))
                out.append(Report(f"[M_{a}, M_{b}] = 0", anchor, {"n": n, "N": N},
                                  passed=c <= 1e-11, metrics={"frobenius": c}))
    if 2 in ops:
        d = float(np.max(np.abs(ops[2] - haldane_shastry_sin2(n, N).dense())))
        out.append(Report("M_2 equals the 1/sin^2 pair coupling", anchor, {"n": n, "N": N},
                          passed=d <= 1e-12, metrics={"max_abs": d}))
        C = cyclic_shift(n, N).dense()
        s = float(np.max(np.abs(C @ ops[2] @ C.conj().T - ops[2])))
        out.append(Report("C M_2 C^-1 = M_2", anchor, {"n": n, "N": N},
                          passed=s <= 1e-12, metrics={"max_abs": s}))
    return out


# periodic orbit -----------------------------------------------------------------------------

def two_body_orbit(energy: float = 2.0, q_center: float = 0.3, samples: int = 2000) -> Trajectory:
    """Closed relative orbit of two particles with total momentum zero.

    With ``p = (a, -a)`` and ``r = q_1 - q_2`` the reduced energy is
    ``E = a^2 + 1/(4 sin^2(r/2))`` and the relative coordinate oscillates with
    period ``2 pi / sqrt(E)``.  The orbit starts at the potential minimum
    ``r = pi`` with ``a > 0``.
    """
    V = 0.25
    if energy <= V:
        raise ValueError("energy must exceed the potential minimum 1/4")
    a = np.sqrt(energy - V)
    x0 = PhasePoint([a, -a], [q_center + np.pi / 2, q_center - np.pi / 2])
    T = 2 * np.pi / np.sqrt(energy)
    return cl.flow(x0, [(2, T)], step=T / samples, ham_orders=(2,))
