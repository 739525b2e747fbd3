"""Semiclassical (WKB) asymptotics for matrix Schroedinger equations in one dimension.

The quantum Hamiltonian is ``H0(p, q) + hbar H1(p, q)`` with a scalar symbol
``H0 = sum_k A_k(q) p^k`` and a Hermitian matrix symbol ``H1 = B(q) + p C``.
Starting from ``psi(0, q) = exp(i f(q) / hbar) phi(q)`` the asymptotic
solution is a sum over classical branches

    psi(q, t) ~ sum_a D_a exp(i S_a / hbar + i maslov_phase(mu_a)) Psi_a,

with ``D_a = |dq0/dq|^{1/2}``, the Hamilton-Jacobi action ``S_a``, the Morse
index ``mu_a`` (sign changes of the Jacobi field) and the spin vector
``Psi_a`` transported by ``dPsi/dt = -i H1 Psi`` along the trajectory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from . import classical as cl
from .reports import Report

TWO_PI = 2 * np.pi
CAUSTIC_TOL = 1e-6

MASLOV_STANDARD = "standard"  # exp(-i pi mu / 2)
MASLOV_QUARTER = "quarter"    # exp(+i pi mu / 4)


class CausticError(ArithmeticError):
    pass


def maslov_phase(mu, convention: str = MASLOV_STANDARD):
    mu = np.asarray(mu)
    if convention == MASLOV_STANDARD:
        return np.exp(-0.5j * np.pi * mu)
    if convention == MASLOV_QUARTER:
        return np.exp(0.25j * np.pi * mu)
    raise ValueError(f"unknown Maslov convention {convention!r}")


def _zero(q):
    return np.zeros_like(np.asarray(q, dtype=float))


@dataclass
class WKBProblem:
    """Symbol data and initial condition.

    ``A``, ``dA``, ``d2A`` are the coefficient functions of ``H0`` in powers of
    ``p`` and their first two ``q``-derivatives.  ``B`` maps an array of
    ``q`` to an array of ``N x N`` Hermitian matrices; ``C`` is a constant
    Hermitian matrix.
    """

    A: Sequence[Callable]
    dA: Sequence[Callable]
    d2A: Sequence[Callable]
    f: Callable
    df: Callable
    d2f: Callable
    phi: Callable
    N: int = 1
    B: Callable | None = None
    C: np.ndarray | None = None

    @classmethod
    def standard(cls, V, dV, d2V, f, df, d2f, phi, N=1, B=None, C=None) -> "WKBProblem":
        """``H0 = p^2/2 + V(q)``."""
        half = lambda q: 0.5 * np.ones_like(np.asarray(q, dtype=float))
        return cls([V, _zero, half], [dV, _zero, _zero], [d2V, _zero, _zero],
                   f, df, d2f, phi, N, B, C)

    @property
    def is_standard(self) -> bool:
        if len(self.A) != 3:
            return False
        qs = np.linspace(0, TWO_PI, 7)
        return bool(np.allclose(self.A[2](qs), 0.5) and np.allclose(self.A[1](qs), 0.0))

    # symbol and derivatives -----------------------------------------------------
    def h0(self, p, q):
        return sum(a(q) * p ** k for k, a in enumerate(self.A))

    def derivatives(self, p, q):
        """``(H, H_p, H_q, H_pp, H_pq, H_qq)`` at arrays ``p, q``."""
        H = Hp = Hq = Hpp = Hpq = Hqq = 0.0
        for k, (a, da, d2a) in enumerate(zip(self.A, self.dA, self.d2A)):
            ak, dak, d2ak = a(q), da(q), d2a(q)
            pk = p ** k
            H = H + ak * pk
            Hq = Hq + dak * pk
            Hqq = Hqq + d2ak * pk
            if k >= 1:
                pk1 = p ** (k - 1)
                Hp = Hp + k * ak * pk1
                Hpq = Hpq + k * dak * pk1
            if k >= 2:
                Hpp = Hpp + k * (k - 1) * ak * p ** (k - 2)
        z = np.zeros_like(np.asarray(p, dtype=float))
        return tuple(np.asarray(v, dtype=float) + z for v in (H, Hp, Hq, Hpp, Hpq, Hqq))

    def h1(self, p, q) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape + (self.N, self.N), dtype=complex)
        if self.B is not None:
            out = out + self.B(q)
        if self.C is not None:
            out = out + p[..., None, None] * np.asarray(self.C)
        return out

    @property
    def has_spin_coupling(self) -> bool:
        return self.B is not None or self.C is not None


def _expm_hermitian_apply(H: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i t H) v`` for stacks of Hermitian matrices."""
    w, U = np.linalg.eigh(H)
    coeff = np.einsum("...ji,...j->...i", U.conj(), v)
    return np.einsum("...ij,...j->...i", U, np.exp(-1j * t * w) * coeff)


@dataclass
class RayBundle:
    """Vectorised end-of-flow data for a set of launch points ``q0``."""

    q0: np.ndarray
    q: np.ndarray
    p: np.ndarray
    J: np.ndarray        # dq(t)/dq0
    dp: np.ndarray       # dp(t)/dq0
    S: np.ndarray
    mu: np.ndarray
    psi: np.ndarray | None = None
    path: dict | None = None


def integrate_rays(problem: WKBProblem, q0, t: float, nsteps: int = 400,
                   transport: bool = False, record: bool = False) -> RayBundle:
    """RK4 for trajectories, Jacobi fields, action and (optionally) spin transport."""
    q0 = np.asarray(q0, dtype=float)
    q = q0.copy()
    p = np.asarray(problem.df(q0), dtype=float) + 0 * q0
    dq = np.ones_like(q0)
    dp = np.asarray(problem.d2f(q0), dtype=float) + 0 * q0
    S = np.asarray(problem.f(q0), dtype=float) + 0 * q0
    mu = np.zeros(q0.shape, dtype=int)
    psi = None
    if transport:
        psi = np.asarray(problem.phi(q0), dtype=complex).reshape(q0.shape + (problem.N,))
    if t == 0 or nsteps == 0:
        return RayBundle(q0, q, p, dq, dp, S, mu, psi)
    h = t / nsteps

    def rhs(y):
        q, p, dq, dp, S = y
        H, Hp, Hq, Hpp, Hpq, Hqq = problem.derivatives(p, q)
        return np.array([Hp, -Hq, Hpq * dq + Hpp * dp, -Hqq * dq - Hpq * dp, p * Hp - H])

    y = np.array([q, p, dq, dp, S])
    path = {"t": [0.0], "q": [q.copy()], "p": [p.copy()], "J": [dq.copy()]} if record else None
    for _ in range(nsteps):
        k1 = rhs(y)
        y2 = y + 0.5 * h * k1
        k2 = rhs(y2)
        y3 = y + 0.5 * h * k2
        k3 = rhs(y3)
        y4 = y + h * k3
        k4 = rhs(y4)
        if transport and problem.has_spin_coupling:
            # RK4 for the spin vector on the same stages
            def G(yy, v):
                return -1j * np.einsum("...ij,...j->...i", problem.h1(yy[1], yy[0]), v)
            a1 = G(y, psi)
            a2 = G(y2, psi + 0.5 * h * a1)
            a3 = G(y3, psi + 0.5 * h * a2)
            a4 = G(y4, psi + h * a3)
            psi = psi + (h / 6) * (a1 + 2 * a2 + 2 * a3 + a4)
        ynew = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        mu += (np.sign(ynew[2]) * np.sign(y[2]) < 0).astype(int)
        y = ynew
        if record:
            path["t"].append(path["t"][-1] + h)
            path["q"].append(y[0].copy())
            path["p"].append(y[1].copy())
            path["J"].append(y[2].copy())
    if record:
        path = {k: np.array(v) for k, v in path.items()}
    q, p, dq, dp, S = y
    return RayBundle(q0, q, p, dq, dp, S, mu, psi, path)


@dataclass
class WKBBranch:
    alpha: int
    target: float
    q0: float
    p: float
    S: float
    J: float
    mu: int
    psi: np.ndarray | None
    caustic: bool
    trajectory: dict | None = None

    @property
    def D(self) -> float:
        return abs(self.J) ** -0.5


@dataclass
class BranchField:
    """All branches for a grid of targets (flattened; ``target_index`` maps back)."""

    targets: np.ndarray
    target_index: np.ndarray
    bundle: RayBundle
    caustic: np.ndarray

    @property
    def count(self) -> np.ndarray:
        return np.bincount(self.target_index, minlength=self.targets.size)


def _seed_roots(problem: WKBProblem, targets: np.ndarray, t: float, scan: int, nsteps: int):
    grid = np.linspace(0.0, TWO_PI, scan, endpoint=False)
    rays = integrate_rays(problem, grid, t, nsteps)
    g = np.append(rays.q, rays.q[0] + TWO_PI)
    x = np.append(grid, TWO_PI)
    seeds_t, seeds_q0, shifts = [], [], []
    lo, hi = g.min(), g.max()
    for ti, q in enumerate(targets):
        for m in range(int(math.floor((lo - q) / TWO_PI)) - 1, int(math.ceil((hi - q) / TWO_PI)) + 2):
            r = g - q - TWO_PI * m
            s = np.sign(r)
            idx = np.nonzero(s[:-1] * s[1:] <= 0)[0]
            for i in idx:
                if r[i] == r[i + 1]:
                    continue
                if i > 0 and r[i] == 0:
                    continue  # counted with the previous interval
                frac = r[i] / (r[i] - r[i + 1])
                seeds_t.append(ti)
                seeds_q0.append(x[i] + frac * (x[i + 1] - x[i]))
                shifts.append(q + TWO_PI * m)
    return np.array(seeds_t, dtype=int), np.array(seeds_q0), np.array(shifts)


def shoot_grid(problem: WKBProblem, targets, t: float, nsteps: int = 400, scan: int = 2048,
               newton: int = 12, transport: bool = True) -> BranchField:
    """Find every launch point ``q0`` reaching each target at time ``t``.

    A dense periodic scan of the endpoint map brackets the roots; Newton's
    method with the Jacobi field refines them.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    if t == 0:
        rays = integrate_rays(problem, targets, 0.0, 0, transport=transport)
        return BranchField(targets, np.arange(targets.size), rays, np.zeros(targets.size, bool))
    ti, q0, goal = _seed_roots(problem, targets, t, scan, nsteps)
    for _ in range(newton):
        rays = integrate_rays(problem, q0, t, nsteps)
        res = rays.q - goal
        step = res / np.where(np.abs(rays.J) > 1e-300, rays.J, 1e-300)
        step = np.clip(step, -0.5 * TWO_PI / scan * 4, 0.5 * TWO_PI / scan * 4)
        q0 = q0 - step
        if np.max(np.abs(res), initial=0.0) < 1e-13:
            break
    # distinct roots only (a root can be bracketed twice at grid points)
    key = np.round(np.mod(q0, TWO_PI), 9)
    _, keep = np.unique(np.stack([ti, key]), axis=1, return_index=True)
    keep = np.sort(keep)
    ti, q0, goal = ti[keep], q0[keep], goal[keep]
    rays = integrate_rays(problem, q0, t, nsteps, transport=transport)
    # express the landing point on the target's own lift
    caustic = np.abs(rays.J) < CAUSTIC_TOL
    return BranchField(targets, ti, rays, caustic)


def shoot(problem: WKBProblem, q: float, t: float, nsteps: int = 400, scan: int = 2048,
          record: bool = True) -> list[WKBBranch]:
    fld = shoot_grid(problem, [q], t, nsteps, scan)
    b = fld.bundle
    out = []
    for a in range(b.q0.size):
        traj = None
        if record and t > 0:
            traj = integrate_rays(problem, b.q0[a:a + 1], t, nsteps, record=True).path
        out.append(WKBBranch(a, q, float(b.q0[a]), float(b.p[a]), float(b.S[a]), float(b.J[a]),
                             int(b.mu[a]), None if b.psi is None else b.psi[a], bool(fld.caustic[a]),
                             traj))
    return out


def hj_action(problem: WKBProblem, branch: WKBBranch) -> float:
    """``S = f(q0) + int (p dq/dt - H0) dt`` by Simpson quadrature on the stored orbit."""
    tr = branch.trajectory
    if tr is None:
        return float(problem.f(np.array([branch.q0]))[0])
    p, q = tr["p"][:, 0], tr["q"][:, 0]
    H, Hp, *_ = problem.derivatives(p, q)
    integrand = p * Hp - H
    return float(problem.f(np.array([branch.q0]))[0] + simpson(integrand, x=tr["t"]))


def amplitude_and_maslov(branch: WKBBranch) -> tuple[float, int]:
    if branch.caustic:
        raise CausticError(f"Jacobi field vanishes at q = {branch.target}")
    return branch.D, branch.mu


def transport_vector(problem: WKBProblem, q0: float, t: float, nsteps: int = 400) -> np.ndarray:
    rays = integrate_rays(problem, np.array([q0]), t, nsteps, transport=True)
    return rays.psi[0]


@dataclass
class Assembled:
    q: np.ndarray
    psi: np.ndarray       # shape (M, N)
    mask: np.ndarray      # True where the asymptotic is valid (no caustic branch)
    branches: BranchField


def assemble(problem: WKBProblem, qgrid, t: float, hbar: float, nsteps: int = 400,
             scan: int = 2048, maslov: str = MASLOV_STANDARD,
             field_: BranchField | None = None) -> Assembled:
    qgrid = np.asarray(qgrid, dtype=float)
    fld = field_ or shoot_grid(problem, qgrid, t, nsteps, scan)
    b = fld.bundle
    M = qgrid.size
    psi = np.zeros((M, problem.N), dtype=complex)
    ok = ~fld.caustic
    D = np.where(ok, np.abs(b.J) ** -0.5, 0.0)
    # S/hbar can be large: reduce the phase modulo 2 pi before exponentiating
    phase = np.exp(1j * np.mod(b.S / hbar, TWO_PI)) * maslov_phase(b.mu, maslov)
    contrib = (D * phase)[:, None] * b.psi
    np.add.at(psi, fld.target_index, contrib)
    mask = np.ones(M, dtype=bool)
    mask[fld.target_index[fld.caustic]] = False
    return Assembled(qgrid, psi, mask, fld)


def away_from_caustics(fld: BranchField, margin: float = 0.0, jtol: float = CAUSTIC_TOL) -> np.ndarray:
    """Targets whose branches all have ``|J| > jtol`` and that lie at least
    ``margin`` (periodic distance) from every change in the branch count."""
    q = fld.targets
    ok = np.ones(q.size, dtype=bool)
    small = np.abs(fld.bundle.J) <= jtol
    ok[fld.target_index[small]] = False
    if margin > 0 and q.size > 1:
        cnt = fld.count
        jumps = np.nonzero(cnt != np.roll(cnt, -1))[0]
        for i in jumps:
            edge = 0.5 * (q[i] + q[(i + 1) % q.size] + (TWO_PI if i == q.size - 1 else 0.0))
            d = np.abs(np.angle(np.exp(1j * (q - edge))))
            ok &= d >= margin
    return ok


def hj_residual(problem: WKBProblem, qgrid, t: float, dt: float = 1e-4, dq: float = 1e-4,
                nsteps: int = 400) -> float:
    """``max |dS/dt + H0(dS/dq, q)|`` over single-branch targets, by central differences."""
    qgrid = np.asarray(qgrid, dtype=float)

    def S_at(qs, tt):
        fld = shoot_grid(problem, qs, tt, nsteps, transport=False)
        if np.any(fld.count != 1):
            raise CausticError("multi-branch region: residual defined branch by branch")
        order = np.argsort(fld.target_index)
        return fld.bundle.S[order]

    St = (S_at(qgrid, t + dt) - S_at(qgrid, t - dt)) / (2 * dt)
    Sq = (S_at(qgrid + dq, t) - S_at(qgrid - dq, t)) / (2 * dq)
    return float(np.max(np.abs(St + problem.h0(Sq, qgrid))))


# reference solver --------------------------------------------------------------------

def reference_solve(problem: WKBProblem, M: int, hbar: float, t: float,
                    dt: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Strang split-step Fourier solution of ``i hbar psi_t = H psi`` on ``[0, 2 pi)``.

    ``H = p^2/2 + V(q) + hbar (B(q) + p C)`` with ``p = -i hbar d/dq``.
    Returns ``(q, psi)`` with ``psi`` of shape ``(M, N)``.
    """
    if not problem.is_standard:
        raise ValueError("reference solver handles H0 = p^2/2 + V(q) only")
    q = np.linspace(0.0, TWO_PI, M, endpoint=False)
    N = problem.N
    psi = (np.exp(1j * np.mod(problem.f(q) / hbar, TWO_PI))[:, None]
           * np.asarray(problem.phi(q), dtype=complex).reshape(M, N))
    if t == 0:
        return q, psi
    if dt is None:
        dt = min(1e-3, hbar / 40)
    nsteps = max(1, int(math.ceil(t / dt)))
    dt = t / nsteps
    k = np.fft.fftfreq(M, d=TWO_PI / M) * TWO_PI
    V = problem.A[0](q) + 0 * q
    B = problem.B(q) if problem.B is not None else np.zeros((M, N, N), dtype=complex)
    wB, UB = np.linalg.eigh(B)
    # exp(-i dt/2 (V/hbar + B)) per grid point
    half_pot = np.einsum("mij,mj,mkj->mik", UB, np.exp(-0.5j * dt * (V[:, None] / hbar + wB)), UB.conj())
    C = np.zeros((N, N), dtype=complex) if problem.C is None else np.asarray(problem.C, dtype=complex)
    wC, UC = np.linalg.eigh(C)
    # exp(-i dt hbar (k^2/2 + k C)) per Fourier mode
    kin = np.einsum("ij,mj,kj->mik", UC, np.exp(-1j * dt * hbar * (0.5 * k[:, None] ** 2 + k[:, None] * wC)),
                    UC.conj())
    n0 = np.linalg.norm(psi)
    for _ in range(nsteps):
        psi = np.einsum("mij,mj->mi", half_pot, psi)
        ph = np.fft.fft(psi, axis=0)
        ph = np.einsum("mij,mj->mi", kin, ph)
        psi = np.fft.ifft(ph, axis=0)
        psi = np.einsum("mij,mj->mi", half_pot, psi)
    drift = abs(np.linalg.norm(psi) - n0) / n0
    if drift > 1e-10:
        raise ArithmeticError(f"reference solver norm drift {drift:.3e}")
    return q, psi


def free_gaussian(q, t: float, hbar: float, a: float, center: float, sigma: float,
                  images: int = 3) -> np.ndarray:
    """Exact free evolution of ``exp(i a q / hbar) exp(-(q - center)^2 / (2 sigma^2))`` (periodised)."""
    q = np.asarray(q, dtype=float)
    s2 = sigma ** 2 + 1j * hbar * t
    out = np.zeros(q.shape, dtype=complex)
    for m in range(-images, images + 1):
        x = q + TWO_PI * m
        out += (np.exp(1j * (a * x - 0.5 * a * a * t) / hbar) * np.sqrt(sigma ** 2 / s2)
                * np.exp(-((x - center - a * t) ** 2) / (2 * s2)))
    return out


def l2_relative(a: np.ndarray, b: np.ndarray, weight: np.ndarray | None = None) -> float:
    a = np.asarray(a).reshape(len(a), -1)
    b = np.asarray(b).reshape(len(b), -1)
    w = np.ones(len(a)) if weight is None else weight.astype(float)
    num = np.sqrt(np.sum(w[:, None] * np.abs(a - b) ** 2))
    den = np.sqrt(np.sum(w[:, None] * np.abs(b) ** 2))
    return float(num / den)


def convergence_study(problem: WKBProblem, t: float, hbars: Sequence[float] = (0.2, 0.1, 0.05, 0.025),
                      M: int = 1024, nsteps: int = 400, maslov: str = MASLOV_STANDARD,
                      margin: float = 0.0) -> dict:
    """Relative L2 error of the assembled asymptotic against the reference solution,
    measured on targets at least ``margin`` away from caustics."""
    q = np.linspace(0.0, TWO_PI, M, endpoint=False)
    fld = shoot_grid(problem, q, t, nsteps)
    mask = away_from_caustics(fld, margin)
    errors = []
    for hb in hbars:
        sem = assemble(problem, q, t, hb, nsteps, maslov=maslov, field_=fld)
        _, ref = reference_solve(problem, M, hb, t)
        errors.append(l2_relative(sem.psi, ref, mask & sem.mask))
    orders = [math.log(e0 / e1) / math.log(h0 / h1)
              for e0, e1, h0, h1 in zip(errors, errors[1:], hbars, hbars[1:])]
    fit = float(np.polyfit(np.log(hbars), np.log(errors), 1)[0])
    return {"hbar": list(hbars), "L2_error": errors, "orders": orders, "order": fit,
            "caustic_points": int(np.sum(fld.caustic))}


# standard test problems ---------------------------------------------------------------

def _gauss(center, sigma, spinor):
    spinor = np.asarray(spinor, dtype=complex)
    spinor = spinor / np.linalg.norm(spinor)

    def phi(q):
        d = np.angle(np.exp(1j * (np.asarray(q, dtype=float) - center)))  # periodic distance
        env = np.exp(-d ** 2 / (2 * sigma ** 2))
        return env[..., None] * spinor
    return phi


def free_problem(a: float = 1.0, center: float = np.pi, sigma: float = 0.5,
                 spin: bool = True) -> WKBProblem:
    """Free streaming of a Gaussian with linear phase ``f = a q``."""
    f = lambda q: a * np.asarray(q, dtype=float)
    df = lambda q: a + 0 * np.asarray(q, dtype=float)
    d2f = lambda q: 0 * np.asarray(q, dtype=float)
    if not spin:
        return WKBProblem.standard(_zero, _zero, _zero, f, df, d2f, _gauss(center, sigma, [1.0]))
    B = lambda q: np.stack([np.stack([0.4 * np.cos(q), 0.3 + 0 * q], -1),
                            np.stack([0.3 + 0 * q, -0.4 * np.cos(q)], -1)], -2).astype(complex)
    C = np.array([[0.2, 0.1j], [-0.1j, -0.2]])
    return WKBProblem.standard(_zero, _zero, _zero, f, df, d2f, _gauss(center, sigma, [1.0, 0.5j]),
                               N=2, B=B, C=C)


def cosine_problem(a: float = 2.0, center: float = np.pi, sigma: float = 0.5) -> WKBProblem:
    """``V = cos q`` with matrix ``H1``; ``f = a q`` keeps every ray above the barrier."""
    V = lambda q: np.cos(q)
    dV = lambda q: -np.sin(q)
    d2V = lambda q: -np.cos(q)
    f = lambda q: a * np.asarray(q, dtype=float)
    df = lambda q: a + 0 * np.asarray(q, dtype=float)
    d2f = lambda q: 0 * np.asarray(q, dtype=float)
    B = lambda q: np.stack([np.stack([0.5 * np.sin(q), 0.2 + 0.1j + 0 * q], -1),
                            np.stack([0.2 - 0.1j + 0 * q, -0.3 + 0 * q], -1)], -2).astype(complex)
    C = np.array([[0.1, 0.05], [0.05, -0.1]], dtype=complex)
    return WKBProblem.standard(V, dV, d2V, f, df, d2f, _gauss(center, sigma, [1.0, 1.0j]),
                               N=2, B=B, C=C)


def focusing_problem(eps: float = 1.0, center: float = 0.0, sigma: float = 0.7) -> WKBProblem:
    """Free motion with phase ``f = eps cos q``: rays launched near ``q = 0`` focus and fold."""
    f = lambda q: eps * np.cos(q)
    df = lambda q: -eps * np.sin(q)
    d2f = lambda q: -eps * np.cos(q)
    return WKBProblem.standard(_zero, _zero, _zero, f, df, d2f, _gauss(center, sigma, [1.0]))


# multi-time actions --------------------------------------------------------------------

def _leg(x0: cl.PhasePoint, weights: dict, step: float):
    """Flow of ``sum_k w_k H_k`` for unit time; returns the orbit and its action increment."""
    tr = cl.flow(x0, [(weights, 1.0)], step=step, ham_orders=(2,))
    integrand = []
    for i in range(len(tr.times)):
        x = tr.point(i)
        _, qdot = cl.vector_field(weights, x)
        H = sum(w * cl.hamiltonian(k, x) for k, w in weights.items())
        integrand.append(float(np.dot(x.p, qdot)) - H)
    return tr, float(simpson(np.array(integrand), x=tr.times))


def multitime_action(x0: cl.PhasePoint, path: Sequence[Sequence[float]], orders: Sequence[int] = (2, 3),
                     step: float = 1e-3) -> tuple[float, cl.PhasePoint]:
    """``int_gamma (sum p dq - sum_k H_k dt_k)`` along a piecewise-linear path in time space.

    ``path`` lists the displacement vectors of the legs (components for
    ``orders``).  Each leg follows the flow of ``sum_k dt_k H_k`` for unit
    parameter time.
    """
    S = 0.0
    x = x0
    for disp in path:
        weights = {k: float(d) for k, d in zip(orders, disp) if d != 0}
        if not weights:
            continue
        tr, dS = _leg(x, weights, step)
        S += dS
        x = tr.final
    return S, x


def path_independence(x0: cl.PhasePoint, T: Sequence[float], orders: Sequence[int] = (2, 3),
                      step: float = 1e-3) -> Report:
    """L-shaped versus diagonal path from 0 to ``T`` in the ``(t_k, t_l)`` plane."""
    legs = [[T[0], 0.0], [0.0, T[1]]]
    S_L, xL = multitime_action(x0, legs, orders, step)
    S_D, xD = multitime_action(x0, [list(T)], orders, step)
    gap = abs(S_L - S_D)
    return Report("multi-time action independent of the path", "multi-time Hamilton-Jacobi action",
                  {"n": x0.n, "T": list(T), "orders": list(orders), "step": step},
                  passed=gap <= 1e-6 and xL.distance(xD) <= 1e-6,
                  metrics={"action_gap": gap, "endpoint_gap": xL.distance(xD), "S": S_L})


def lagrangian_check(x0: cl.PhasePoint, k: int, l: int, t: float = 1.0, step: float = 1e-2) -> float:
    """``max |omega(X_k, X_l)|`` along the ``t_k`` orbit of ``x0``."""
    tr = cl.flow(x0, [(k, t)], step=step, ham_orders=(2,))
    worst = 0.0
    for i in range(len(tr.times)):
        x = tr.point(i)
        pk, qk = cl.vector_field({k: 1.0}, x)
        pl, ql = cl.vector_field({l: 1.0}, x)
        worst = max(worst, abs(float(np.dot(pk, ql) - np.dot(qk, pl))))
    return worst


def multitime_residual(x0: cl.PhasePoint, T: Sequence[float], orders: Sequence[int] = (2, 3),
                       step: float = 1e-3, h: float = 1e-4) -> float:
    """Check that the sheet ``x(t_k, t_l)`` solves both Hamilton equations at ``T``."""
    def at(a, b):
        return cl.flow(x0, [({orders[0]: a, orders[1]: b}, 1.0)], step=step, ham_orders=(2,)).final

    x = at(*T)
    worst = 0.0
    for j, k in enumerate(orders):
        dT = [0.0, 0.0]
        dT[j] = h
        xp = at(T[0] + dT[0], T[1] + dT[1])
        xm = at(T[0] - dT[0], T[1] - dT[1])
        dx = (xp.as_vector() - xm.as_vector()) / (2 * h)
        pd, qd = cl.vector_field({k: 1.0}, x)
        worst = max(worst, float(np.max(np.abs(dx - np.concatenate([pd, qd])))))
    return worst


class OneDimSystem:
    """1D WKB Hamiltonian seen as a single-time multi-time system (for the degenerate check)."""

    def __init__(self, problem: WKBProblem):
        self.problem = problem

    def action(self, q0: float, t: float, nsteps: int = 400) -> float:
        rays = integrate_rays(self.problem, np.array([q0]), t, nsteps, record=True)
        path = rays.path
        p, q = path["p"][:, 0], path["q"][:, 0]
        H, Hp, *_ = self.problem.derivatives(p, q)
        return float(self.problem.f(np.array([q0]))[0] + simpson(p * Hp - H, x=path["t"]))
