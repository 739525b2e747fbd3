"""R-matrix identities: quantum and classical Yang-Baxter equations, unitarity.

Conventions: ``R(u, hbar) = 1 + i hbar r(u) + hbar^2 s(u) + O(hbar^3)`` acting
on ``C^N (x) C^N`` with ``np.kron`` ordering (first factor slowest).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .reports import Report

ANCHOR_YB = "Yang-Baxter relations for the R-matrix"
ANCHOR_UNIT = "unitarity condition and its semiclassical consequence"


def flip(N: int) -> np.ndarray:
    P = np.zeros((N * N, N * N))
    for a in range(N):
        for b in range(N):
            P[a * N + b, b * N + a] = 1.0
    return P


@dataclass
class RMatrixFamily:
    N: int
    evaluator: Callable[[complex, float], np.ndarray]
    r: Callable[[complex], np.ndarray] | None = None
    s: Callable[[complex], np.ndarray] | None = None
    name: str = "custom"

    def __call__(self, u, hbar) -> np.ndarray:
        if u == 0:
            raise ZeroDivisionError("R-matrix has a pole at u = 0")
        return np.asarray(self.evaluator(u, hbar), dtype=complex)

    def r21(self, u, hbar) -> np.ndarray:
        P = flip(self.N)
        return P @ self(u, hbar) @ P


def yang_r(N: int) -> RMatrixFamily:
    """``R(u, hbar) = 1 + (hbar / u) P``."""
    if N < 2:
        raise ValueError("N must be >= 2")
    P = flip(N)
    I = np.eye(N * N)
    return RMatrixFamily(N, lambda u, h: I + (h / u) * P,
                         r=lambda u: -1j * P / u, s=lambda u: np.zeros_like(I), name="yang")


def perturbed(family: RMatrixFamily, eps: float, rng: np.random.Generator) -> RMatrixFamily:
    """Negative control: ``R + eps * hbar * X`` with a fixed random ``X``."""
    d = family.N ** 2
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return RMatrixFamily(family.N, lambda u, h: family(u, h) + eps * h * X, name=f"{family.name}+noise")


def with_second_order(family: RMatrixFamily, S: np.ndarray) -> RMatrixFamily:
    """Negative control: add ``hbar^2 S`` (breaks the scalar condition on 1/2 r^2 + s when ``S`` is not scalar)."""
    base_s = family.s
    return RMatrixFamily(family.N, lambda u, h: family(u, h) + h * h * S, r=family.r,
                         s=(lambda u: base_s(u) + S) if base_s else None, name=f"{family.name}+s")


def _embed(R: np.ndarray, N: int):
    I = np.eye(N)
    R12 = np.kron(R, I)
    R23 = np.kron(I, R)
    P23 = np.kron(I, flip(N))
    R13 = P23 @ R12 @ P23
    return R12, R13, R23


def qybe_residual(family: RMatrixFamily, u, v, hbar) -> float:
    """``||R12(u) R13(u+v) R23(v) - R23(v) R13(u+v) R12(u)||_F``."""
    if u == 0 or v == 0 or u + v == 0:
        raise ZeroDivisionError("pole argument")
    N = family.N
    A12, _, _ = _embed(family(u, hbar), N)
    _, B13, _ = _embed(family(u + v, hbar), N)
    _, _, C23 = _embed(family(v, hbar), N)
    return float(np.linalg.norm(A12 @ B13 @ C23 - C23 @ B13 @ A12))


def semiclassical_extract(family: RMatrixFamily, u, h: float = 1e-2, levels: int = 4):
    """``r = (1/i) dR/dhbar`` and ``s = (1/2) d^2R/dhbar^2`` at ``hbar = 0`` by Richardson extrapolation."""
    R0 = family(u, 0.0)

    def d1(hh):
        return (family(u, hh) - family(u, -hh)) / (2 * hh)

    def d2(hh):
        return (family(u, hh) - 2 * R0 + family(u, -hh)) / (hh * hh)

    def richardson(fn):
        table = [fn(h / 2 ** i) for i in range(levels)]
        for j in range(1, levels):
            table = [(4 ** j * table[i + 1] - table[i]) / (4 ** j - 1) for i in range(len(table) - 1)]
        return table[0]

    r = richardson(d1) / 1j
    s = 0.5 * richardson(d2)
    return r, s


def cybe_residual(r: Callable[[complex], np.ndarray], u, v, N: int) -> float:
    """``||[r12(u), r13(u+v)] + [r12(u), r23(v)] + [r13(u+v), r23(v)]||``."""
    a12, _, _ = _embed(r(u), N)
    _, b13, _ = _embed(r(u + v), N)
    _, _, c23 = _embed(r(v), N)

    def br(x, y):
        return x @ y - y @ x

    return float(np.linalg.norm(br(a12, b13) + br(a12, c23) + br(b13, c23)))


def unitarity_scalar(family: RMatrixFamily, u, hbar) -> tuple[complex, float]:
    """``R12(u) R21(-u) = f(u, hbar) 1``: returns ``f`` and the non-scalar remainder."""
    M = family(u, hbar) @ family.r21(-u, hbar)
    d = M.shape[0]
    f = np.trace(M) / d
    return complex(f), float(np.linalg.norm(M - f * np.eye(d)))


def bar_symmetry_residual(family: RMatrixFamily, u, hbar) -> float:
    """``||R12(u, hbar) - R21(-u, -hbar)||``."""
    return float(np.linalg.norm(family(u, hbar) - family.r21(-u, -hbar)))


def unitarity_proposition_check(family: RMatrixFamily, us: Sequence[float] = (0.7, 1.1, 1.9, -1.3),
                                tol: float = 1e-12, h: float = 0.25) -> Report:
    """``1/2 r^2 + s`` is scalar and equals ``1/4 d^2f/dhbar^2 |_0``."""
    worst_scalar, worst_match, worst_pre = 0.0, 0.0, 0.0
    for u in us:
        worst_pre = max(worst_pre, bar_symmetry_residual(family, u, 0.3), unitarity_scalar(family, u, 0.3)[1])
        if family.r is not None and family.s is not None:
            r, s = family.r(u), family.s(u)
        else:
            r, s = semiclassical_extract(family, u)
        X = 0.5 * r @ r + s
        d = X.shape[0]
        c = np.trace(X) / d
        worst_scalar = max(worst_scalar, float(np.linalg.norm(X - c * np.eye(d))))
        # f'' at 0 by a Richardson-extrapolated central difference of the scalar f
        vals = []
        for hh in (h, h / 2, h / 4):
            fp = unitarity_scalar(family, u, hh)[0]
            fm = unitarity_scalar(family, u, -hh)[0]
            f0 = unitarity_scalar(family, u, 0.0)[0]
            vals.append((fp - 2 * f0 + fm) / hh ** 2)
        f2 = (16 * ((4 * vals[2] - vals[1]) / 3) - (4 * vals[1] - vals[0]) / 3) / 15
        worst_match = max(worst_match, float(abs(c - 0.25 * f2)))
    passed = worst_scalar <= tol and worst_match <= tol and worst_pre <= 1e-12
    return Report("1/2 r^2 + s = 1/4 f''(0) 1", ANCHOR_UNIT, {"family": family.name, "N": family.N,
                                                          "u": list(us)},
                  passed=passed, metrics={"scalar_deviation": worst_scalar, "f_match": worst_match,
                                          "hypotheses": worst_pre})


def qybe_grid(family: RMatrixFamily, hbars: Sequence[float] = (0.1, 0.5),
              grid: Sequence[float] = (-1.7, -0.6, 0.45, 1.3, 2.2), tol: float = 1e-12) -> Report:
    worst = 0.0
    for hb in hbars:
        for u in grid:
            for v in grid:
                if abs(u + v) < 1e-9:
                    continue
                worst = max(worst, qybe_residual(family, u, v, hb))
    return Report("R12 R13 R23 = R23 R13 R12", ANCHOR_YB,
                  {"family": family.name, "N": family.N, "hbars": list(hbars)},
                  passed=worst <= tol, metrics={"max_residual": worst})


def cybe_grid(family: RMatrixFamily, grid: Sequence[float] = (-1.7, -0.6, 0.45, 1.3, 2.2),
              tol: float = 1e-12, extracted: bool = False) -> Report:
    worst = 0.0
    if extracted:
        r = lambda u: semiclassical_extract(family, u)[0]
    else:
        r = family.r
    for u in grid:
        for v in grid:
            if abs(u + v) < 1e-9:
                continue
            worst = max(worst, cybe_residual(r, u, v, family.N))
    return Report("classical Yang-Baxter equation for r", ANCHOR_YB,
                  {"family": family.name, "N": family.N, "extracted": extracted},
                  passed=worst <= tol, metrics={"max_residual": worst})


def suite(N: int, seed: int = 0) -> list[Report]:
    fam = yang_r(N)
    rng = np.random.default_rng(seed)
    out = [qybe_grid(fam), cybe_grid(fam), cybe_grid(fam, tol=1e-9, extracted=True),
           unitarity_proposition_check(fam)]
    worst_r = max(float(np.max(np.abs(semiclassical_extract(fam, u)[0] - fam.r(u)))) for u in (0.7, 1.3))
    out.append(Report("extracted r matches the declared r", ANCHOR_YB, {"N": N},
                      passed=worst_r <= 1e-9, metrics={"max_abs": worst_r}))
    # negative controls: these must fail
    bad = qybe_grid(perturbed(fam, 1e-3, rng))
    out.append(Report("negative control: perturbed R violates QYBE", ANCHOR_YB, {"N": N, "eps": 1e-3},
                      passed=not bad.passed, metrics=bad.metrics))
    S = rng.normal(size=(N * N, N * N))
    S = S + S.T
    bad = unitarity_proposition_check(with_second_order(fam, S))
    out.append(Report("negative control: non-scalar s violates the scalar condition", ANCHOR_UNIT, {"N": N},
                      passed=not bad.passed, metrics=bad.metrics))
    return out
