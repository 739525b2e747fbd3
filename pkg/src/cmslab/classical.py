"""Classical trigonometric Calogero-Moser-Sutherland system.

Phase space points are stored in real form ``(p, q)`` with ``z = exp(i q)``.
Gradients are reported in the components ``(dH/dp_i, z_i dH/dz_i)``; the
angle derivative is ``dH/dq_i = i z_i dH/dz_i``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .exactfun import GaussianRational
from .reports import Report

COLLISION_TOL = 1e-8
HALVING_TOL = 1e-3
IMAG_TOL = 1e-12


class CollisionError(ArithmeticError):
    """Two particles (nearly) coincide."""

    def __init__(self, msg, trajectory=None):
        super().__init__(msg)
        self.trajectory = trajectory


class StepUnderflowError(ArithmeticError):
    pass


class NonRealValueError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PhasePoint:
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(-1)
        q = np.asarray(self.q, dtype=float).reshape(-1)
        if p.shape != q.shape:
            raise ValueError("p and q must have the same length")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_z(cls, p, z) -> "PhasePoint":
        z = np.asarray(z, dtype=complex)
        if np.max(np.abs(np.abs(z) - 1.0), initial=0.0) > 1e-12:
            raise ValueError("z must lie on the unit circle")
        return cls(p, np.angle(z))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, pscale: float = 1.0,
               min_gap: float = 0.3) -> "PhasePoint":
        while True:
            q = rng.uniform(0, 2 * np.pi, size=n)
            if n < 2 or min_pair_distance(np.exp(1j * q)) > min_gap:
                return cls(rng.normal(scale=pscale, size=n), q)

    @property
    def n(self) -> int:
        return self.p.size

    @property
    def z(self) -> np.ndarray:
        return np.exp(1j * self.q)

    def distance(self, other: "PhasePoint") -> float:
        dq = np.angle(np.exp(1j * (self.q - other.q)))
        return float(np.sqrt(np.sum((self.p - other.p) ** 2) + np.sum(dq ** 2)))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.q])


def min_pair_distance(z: np.ndarray) -> float:
    z = np.asarray(z)
    if z.size < 2:
        return math.inf
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def _guard(z: np.ndarray) -> None:
    d = min_pair_distance(z)
    if d < COLLISION_TOL:
        raise CollisionError(f"coordinate collision: min |z_i - z_j| = {d:.3e}")


@dataclass(frozen=True)
class LaxData:
    L: np.ndarray
    P: np.ndarray
    M: np.ndarray


def lax_matrix(p, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    _guard(z)
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    M = z[:, None] / diff
    np.fill_diagonal(M, 0.0)
    return np.diag(np.asarray(p, dtype=complex)) + M


def lax(x: PhasePoint) -> LaxData:
    L = lax_matrix(x.p, x.z)
    P = np.diag(x.p).astype(complex)
    return LaxData(L, P, L - P)


def pair_weights(z) -> np.ndarray:
    """``W_ij = z_i z_j / (z_i - z_j)^2`` with zero diagonal (``-1/(4 sin^2)`` on the circle)."""
    z = np.asarray(z, dtype=complex)
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    W = np.outer(z, z) / diff ** 2
    np.fill_diagonal(W, 0.0)
    return W


def _real(v: complex, what: str) -> float:
    scale = max(1.0, abs(v))
    if abs(v.imag) > IMAG_TOL * scale * 1e3:
        raise NonRealValueError(f"{what} has imaginary part {v.imag:.3e}")
    return float(v.real)


def hamiltonian(k: int, x: PhasePoint) -> float:
    """``H_k = (1/k) tr L^k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    L = lax(x).L
    return _real(np.trace(np.linalg.matrix_power(L, k)) / k, f"H_{k}")


def grad_hamiltonian(k: int, x: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """``(dH_k/dp_i, z_i dH_k/dz_i)``."""
    L = lax(x).L
    A = np.linalg.matrix_power(L, k - 1)
    dp = np.real(np.diag(A)).copy()
    W = pair_weights(x.z)
    zdz = np.sum(W * (A - A.T), axis=1)
    return dp, zdz


def angle_gradient(k: int, x: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """``(dH_k/dp, dH_k/dq)`` as real arrays."""
    dp, zdz = grad_hamiltonian(k, x)
    return dp, np.real(1j * zdz)


def poisson_bracket(fgrad, ggrad) -> complex:
    """``{f, g} = sum_j i (df/dp_j z_j dg/dz_j - dg/dp_j z_j df/dz_j)``."""
    fp, fz = (np.asarray(a) for a in fgrad)
    gp, gz = (np.asarray(a) for a in ggrad)
    return complex(np.sum(1j * (fp * gz - gp * fz)))


def _weights(spec) -> dict[int, float]:
    if isinstance(spec, Mapping):
        return {int(k): float(v) for k, v in spec.items()}
    return {int(spec): 1.0}


def vector_field(weights: Mapping[int, float], x: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """``(dp/dt, dq/dt)`` for the flow of ``sum_k w_k H_k``."""
    L = lax_matrix(x.p, x.z)
    W = pair_weights(x.z)
    qdot = np.zeros(x.n)
    zdz = np.zeros(x.n, dtype=complex)
    A = np.eye(x.n, dtype=complex)
    for k in range(1, max(weights) + 1):
        # A = L^(k-1)
        w = weights.get(k, 0.0)
        if w:
            qdot += w * np.real(np.diag(A))
            zdz += w * np.sum(W * (A - A.T), axis=1)
        A = A @ L
    return -np.real(1j * zdz), qdot


@dataclass
class Trajectory:
    times: np.ndarray
    p: np.ndarray
    q: np.ndarray
    hams: np.ndarray
    ham_orders: tuple[int, ...]
    segments: list = field(default_factory=list)
    step_weights: list = field(default_factory=list)  # flow weights on each interval

    def point(self, i: int = -1) -> PhasePoint:
        return PhasePoint(self.p[i], self.q[i])

    @property
    def final(self) -> PhasePoint:
        return self.point(-1)

    def drift(self) -> np.ndarray:
        return np.max(np.abs(self.hams - self.hams[0]), axis=0)

    def to_csv(self) -> str:
        n = self.p.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"p_{i + 1}" for i in range(n)] + [f"q_{i + 1}" for i in range(n)]
                   + [f"H_{k}" for k in self.ham_orders])
        for t, p, q, h in zip(self.times, self.p, self.q, self.hams):
            w.writerow([f"{t:.12e}"] + [f"{v:.12e}" for v in (*p, *q, *h)])
        return buf.getvalue()


def rk4_step(weights, x: PhasePoint, h: float) -> PhasePoint:
    def f(y):
        pt = PhasePoint(y[: x.n], y[x.n:])
        pd, qd = vector_field(weights, pt)
        return np.concatenate([pd, qd])

    y = x.as_vector()
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return PhasePoint(y[: x.n], y[x.n:])


def flow(x0: PhasePoint, segments: Sequence, step: float = 1e-3,
         ham_orders: Sequence[int] | None = None, min_step: float = 1e-9) -> Trajectory:
    """Composite multi-time orbit.

    ``segments`` is a list of ``(k, duration)`` or ``({k: weight}, duration)``;
    each segment follows the flow of the (weighted) Hamiltonian for the given
    time.  Fixed-step RK4, with the step halved while two particles are closer
    than ``HALVING_TOL``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    ham_orders = tuple(ham_orders or range(1, max(3, x0.n) + 1))
    t = 0.0
    x = x0
    times, ps, qs, hs = [0.0], [x.p], [x.q], [[hamiltonian(k, x) for k in ham_orders]]
    step_weights: list[dict[int, float]] = []

    def partial():
        return Trajectory(np.array(times), np.array(ps), np.array(qs), np.array(hs), ham_orders,
                          list(segments), list(step_weights))

    for spec, duration in segments:
        weights = _weights(spec)
        if duration < 0:
            raise ValueError("durations must be non-negative")
        nsteps = max(1, int(round(duration / step))) if duration > 0 else 0
        h = duration / nsteps if nsteps else 0.0
        for _ in range(nsteps):
            try:
                sub = 1
                while min_pair_distance(x.z) < HALVING_TOL and h / sub > min_step:
                    sub *= 2
                if h / sub <= min_step and min_pair_distance(x.z) < HALVING_TOL:
                    raise StepUnderflowError("step underflow near a collision")
                for _ in range(sub):
                    x = rk4_step(weights, x, h / sub)
                    _guard(x.z)
            except CollisionError as exc:
                raise CollisionError(str(exc), partial()) from None
            t += h
            step_weights.append(weights)
            times.append(t)
            ps.append(x.p)
            qs.append(x.q)
            hs.append([hamiltonian(k, x) for k in ham_orders])
    return partial()


def freezing_point(n: int) -> PhasePoint:
    """``p = 0``, ``z_k = exp(2 pi i k / n)`` for ``k = 1..n``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    q = np.array([2 * np.pi * k / n for k in range(1, n + 1)])
    q = np.angle(np.exp(1j * q))  # keep angles in (-pi, pi]
    return PhasePoint(np.zeros(n), q)


def _adjugate(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    adj = np.empty_like(A)
    if n == 1:
        return np.ones_like(A)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(A, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def generating_gradient(lam: complex, x: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """``F_i = dS/dp_i`` and ``G_i = dS/dq_i`` for ``S = det(lam + L)``."""
    n = x.n
    L = lax(x).L
    adj = _adjugate(L + lam * np.eye(n))
    F = np.diag(adj).copy()
    W = pair_weights(x.z)
    # dM_ij/dq_m = i z_m dM_ij/dz_m: -i W_ij on row m (i = m), +i W_ij on column m (j = m)
    G = np.array([1j * (np.sum(adj.T[m, :] * W[m, :] * -1) + np.sum(adj.T[:, m] * W[:, m]))
                  for m in range(n)])
    return F, G


def verify_fixed_point(n: int, lambdas: Sequence[complex] = (0.5, 1.0, 2.0, -1.5, 3.0),
                       tol: float = 1e-11) -> list[Report]:
    x = freezing_point(n)
    anchor = "freezing point of the multi-time CMS flow (roots of unity, zero momenta)"
    out = []
    fspread, gmax = 0.0, 0.0
    for lam in lambdas:
        F, G = generating_gradient(lam, x)
        scale = max(1.0, float(np.max(np.abs(F))))
        fspread = max(fspread, float(np.max(np.abs(F - F[0]))) / scale)
        gmax = max(gmax, float(np.max(np.abs(G))) / scale)
    out.append(Report("F_i(lam, 0, zeta) equal across i", anchor, {"n": n, "lambdas": list(lambdas)},
                      passed=fspread <= tol, metrics={"spread": fspread}))
    out.append(Report("G_i(lam, 0, zeta) = 0", anchor, {"n": n, "lambdas": list(lambdas)},
                      passed=gmax <= tol, metrics={"max_abs": gmax}))
    worst = 0.0
    for k in range(2, n + 1):
        dp, dq = angle_gradient(k, x)
        scale = max(1.0, float(np.max(np.abs(dp))))
        worst = max(worst, float(np.max(np.abs(dp - dp[0]))) / scale, float(np.max(np.abs(dq))) / scale)
    out.append(Report("dH_k(x_*) in span{dH_1} on sum dp = 0", anchor, {"n": n},
                      passed=worst <= tol, metrics={"max_deviation": worst}))
    return out


def stationarity(n: int, t_end: float = 10.0, step: float = 1e-2) -> float:
    """Largest distance from ``x_*`` along its own ``t_2`` orbit."""
    x = freezing_point(n)
    traj = flow(x, [(2, t_end)], step=step, ham_orders=(2,))
    return max(traj.point(i).distance(x) for i in range(len(traj.times)))


def isospectral_drift(traj: Trajectory) -> float:
    ev0 = np.sort_complex(np.linalg.eigvals(lax(traj.point(0)).L))
    worst = 0.0
    for i in range(len(traj.times)):
        ev = np.sort_complex(np.linalg.eigvals(lax(traj.point(i)).L))
        worst = max(worst, float(np.max(np.abs(ev - ev0))))
    return worst


# exact oracles ---------------------------------------------------------------------

def _lax_exact(p, z, lam=GaussianRational(0)):
    n = len(z)
    return [[(p[i] + lam) if i == j else z[i] / (z[i] - z[j]) for j in range(n)] for i in range(n)]


def exact_determinant(A) -> GaussianRational:
    A = [row[:] for row in A]
    n = len(A)
    det = GaussianRational(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if not A[r][c].is_zero()), None)
        if piv is None:
            return GaussianRational(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det = det * A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            if not f.is_zero():
                A[r] = [A[r][m] - f * A[c][m] for m in range(n)]
    return det


def lax_determinant_exact(p, z, lam) -> GaussianRational:
    """``det(lam + L)`` at an exact point by Gaussian elimination."""
    return exact_determinant(_lax_exact(p, z, lam))


def _interpolate(xs, ys):
    """Coefficients ``c_0..c_m`` of the polynomial through ``(xs, ys)`` (Gaussian rationals)."""
    m = len(xs)
    V = [[x ** j for j in range(m)] + [y] for x, y in zip(xs, ys)]
    for c in range(m):
        piv = next(r for r in range(c, m) if not V[r][c].is_zero())
        V[c], V[piv] = V[piv], V[c]
        inv = GaussianRational(1) / V[c][c]
        V[c] = [v * inv for v in V[c]]
        for r in range(m):
            if r != c and not V[r][c].is_zero():
                f = V[r][c]
                V[r] = [a - f * b for a, b in zip(V[r], V[c])]
    return [V[i][m] for i in range(m)]


def newton_identities(p, z) -> dict:
    """Compare ``det(lam + L)`` coefficients with the power sums ``tr L^k`` exactly.

    Returns the elementary symmetric functions, power sums and the list of
    Newton residuals ``k e_k - sum_i (-1)^(i-1) e_{k-i} p_i`` (all should vanish).
    """
    n = len(z)
    lams = [GaussianRational(Fraction(j)) for j in range(n + 1)]
    dets = [lax_determinant_exact(p, z, lam) for lam in lams]
    coeffs = _interpolate(lams, dets)  # det = sum_j e_{n-j} lam^j
    e = [coeffs[n - j] for j in range(n + 1)]
    L = _lax_exact(p, z)
    power = [GaussianRational(0)]
    Lk = L
    for k in range(1, n + 1):
        power.append(sum((Lk[i][i] for i in range(n)), GaussianRational(0)))
        Lk = [[sum((Lk[i][m] * L[m][j] for m in range(n)), GaussianRational(0)) for j in range(n)]
              for i in range(n)]
    residuals = []
    for k in range(1, n + 1):
        s = GaussianRational(0)
        for i in range(1, k + 1):
            term = e[k - i] * power[i]
            s = s + term if i % 2 == 1 else s - term
        residuals.append(e[k] * k - s)
    return {"e": e, "power_sums": power, "residuals": residuals}
