"""Vectors and operators on the n-fold tensor power of C^N.

Basis convention: little-endian, site 1 varies fastest, i.e. the basis
index of ``e_{a_1} (x) ... (x) e_{a_n}`` is ``sum_i a_i N**(i-1)``.

A permutation ``w`` of the sites (one-line notation, 0-based tuple) acts by
``(P(w) v)[a_1..a_n] = v[a_{w(1)}..a_{w(n)}]``, which makes ``P`` a
homomorphism: ``P(w) P(v) = P(w o v)`` with ``(w o v)(i) = w(v(i))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

MAX_DENSE_DIM = 4096

Perm = tuple[int, ...]


def identity_perm(n: int) -> Perm:
    return tuple(range(n))


def compose(w: Perm, v: Perm) -> Perm:
    """``(w o v)(i) = w(v(i))``."""
    return tuple(w[v[i]] for i in range(len(v)))


def inverse(w: Perm) -> Perm:
    out = [0] * len(w)
    for i, wi in enumerate(w):
        out[wi] = i
    return tuple(out)


def transposition(i: int, j: int, n: int) -> Perm:
    """Transposition of 1-based sites ``i`` and ``j``."""
    _check_pair(i, j, n)
    w = list(range(n))
    w[i - 1], w[j - 1] = w[j - 1], w[i - 1]
    return tuple(w)


def _check_pair(i: int, j: int, n: int) -> None:
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"site index out of range 1..{n}: ({i}, {j})")
    if i == j:
        raise ValueError("transposition needs distinct sites")


@dataclass(frozen=True)
class SpinVector:
    n: int
    N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != self.N ** self.n:
            raise ValueError(f"expected {self.N ** self.n} amplitudes, got {amp.size}")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def basis(cls, labels: Iterable[int], N: int) -> "SpinVector":
        labels = list(labels)
        idx = sum(a * N ** i for i, a in enumerate(labels))
        amp = np.zeros(N ** len(labels), dtype=complex)
        amp[idx] = 1.0
        return cls(len(labels), N, amp)

    @classmethod
    def random(cls, n: int, N: int, rng: np.random.Generator) -> "SpinVector":
        amp = rng.normal(size=N ** n) + 1j * rng.normal(size=N ** n)
        return cls(n, N, amp / np.linalg.norm(amp))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "SpinVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes as an array whose axis ``i`` is site ``i + 1``."""
        return self.amplitudes.reshape((self.N,) * self.n, order="F")

    def to_json(self) -> dict:
        return {"n": self.n, "N": self.N,
                "re": self.amplitudes.real.tolist(), "im": self.amplitudes.imag.tolist()}

    @classmethod
    def from_json(cls, data: Mapping) -> "SpinVector":
        return cls(data["n"], data["N"], np.asarray(data["re"]) + 1j * np.asarray(data["im"]))


def _apply_perm(w: Perm, amp: np.ndarray, n: int, N: int) -> np.ndarray:
    t = amp.reshape((N,) * n, order="F")
    return np.transpose(t, inverse(w)).reshape(-1, order="F")


@dataclass(frozen=True)
class SpinOperator:
    """Operator given either densely or as a weighted sum of permutations.

    ``terms`` maps permutations to complex weights and is applied lazily,
    without materialising the ``N**n x N**n`` matrix.
    """

    n: int
    N: int
    matrix: np.ndarray | None = None
    terms: Mapping[Perm, complex] | None = field(default=None)

    def __post_init__(self):
        if (self.matrix is None) == (self.terms is None):
            raise ValueError("give exactly one of matrix or terms")
        dim = self.N ** self.n
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (dim, dim):
                raise ValueError(f"matrix shape {m.shape} does not match dimension {dim}")
            object.__setattr__(self, "matrix", m)
        else:
            clean = {}
            for w, c in self.terms.items():
                w = tuple(w)
                if sorted(w) != list(range(self.n)):
                    raise ValueError(f"{w} is not a permutation of {self.n} sites")
                if c != 0:
                    clean[w] = clean.get(w, 0) + complex(c)
            object.__setattr__(self, "terms", clean)

    @property
    def dim(self) -> int:
        return self.N ** self.n

    @property
    def is_lazy(self) -> bool:
        return self.terms is not None

    @classmethod
    def identity(cls, n: int, N: int) -> "SpinOperator":
        return cls(n, N, terms={identity_perm(n): 1.0})

    @classmethod
    def zero(cls, n: int, N: int) -> "SpinOperator":
        return cls(n, N, terms={})

    @classmethod
    def permutation(cls, w: Perm, N: int, weight: complex = 1.0) -> "SpinOperator":
        return cls(len(w), N, terms={tuple(w): weight})

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        if self.dim > MAX_DENSE_DIM:
            raise MemoryError(f"dense form of dimension {self.dim} exceeds {MAX_DENSE_DIM}")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for w, c in self.terms.items():
            out += c * permutation_matrix(w, self.N)
        return out

    def _check(self, other: "SpinOperator"):
        if (self.n, self.N) != (other.n, other.N):
            raise ValueError(f"dimension mismatch: (n={self.n}, N={self.N}) vs (n={other.n}, N={other.N})")

    def __add__(self, other: "SpinOperator") -> "SpinOperator":
        self._check(other)
        if self.is_lazy and other.is_lazy:
            terms = dict(self.terms)
            for w, c in other.terms.items():
                terms[w] = terms.get(w, 0) + c
            return SpinOperator(self.n, self.N, terms=terms)
        return SpinOperator(self.n, self.N, matrix=self.dense() + other.dense())

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other: "SpinOperator") -> "SpinOperator":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SpinOperator):
            return self @ other
        c = complex(other)
        if self.is_lazy:
            return SpinOperator(self.n, self.N, terms={w: c * x for w, x in self.terms.items()})
        return SpinOperator(self.n, self.N, matrix=c * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other: "SpinOperator") -> "SpinOperator":
        self._check(other)
        if self.is_lazy and other.is_lazy:
            terms: dict[Perm, complex] = {}
            for w, a in self.terms.items():
                for v, b in other.terms.items():
                    key = compose(w, v)
                    terms[key] = terms.get(key, 0) + a * b
            return SpinOperator(self.n, self.N, terms=terms)
        return SpinOperator(self.n, self.N, matrix=self.dense() @ other.dense())

    def adjoint(self) -> "SpinOperator":
        if self.is_lazy:
            return SpinOperator(self.n, self.N,
                                terms={inverse(w): np.conj(c) for w, c in self.terms.items()})
        return SpinOperator(self.n, self.N, matrix=self.matrix.conj().T)

    def to_json(self) -> dict:
        if self.is_lazy:
            return {"n": self.n, "N": self.N,
                    "terms": [{"perm": list(w), "re": c.real, "im": c.imag}
                              for w, c in sorted(self.terms.items())]}
        return {"n": self.n, "N": self.N,
                "re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}

    @classmethod
    def from_json(cls, data: Mapping) -> "SpinOperator":
        if "terms" in data:
            return cls(data["n"], data["N"],
                       terms={tuple(t["perm"]): complex(t["re"], t["im"]) for t in data["terms"]})
        return cls(data["n"], data["N"], matrix=np.asarray(data["re"]) + 1j * np.asarray(data["im"]))


def permutation_matrix(w: Perm, N: int) -> np.ndarray:
    n = len(w)
    dim = N ** n
    idx = np.arange(dim)
    # column j maps to row image(j): P e_j = e_{image}
    digits = np.array([(idx // N ** i) % N for i in range(n)])  # digits[i] = a_{i+1}
    # (P v)[a] = v[a_{w(1)}, ..., a_{w(n)}]  =>  row a has a 1 in column b with b_i = a_{w(i)}
    cols = sum(digits[w[i]] * N ** i for i in range(n))
    m = np.zeros((dim, dim))
    m[idx, cols] = 1.0
    return m


def permutation_op(i: int, j: int, n: int, N: int) -> SpinOperator:
    """Spin permutation ``P_ij`` swapping tensor factors ``i`` and ``j`` (1-based)."""
    return SpinOperator.permutation(transposition(i, j, n), N)


def cyclic_shift(n: int, N: int) -> SpinOperator:
    """Translation by one site, ``C = P(w)`` with ``w(i) = i + 1 mod n``."""
    return SpinOperator.permutation(tuple((i + 1) % n for i in range(n)), N)


def apply(op: SpinOperator, v: SpinVector) -> SpinVector:
    if (op.n, op.N) != (v.n, v.N):
        raise ValueError("dimension mismatch between operator and vector")
    if op.is_lazy:
        out = np.zeros(v.N ** v.n, dtype=complex)
        for w, c in op.terms.items():
            out += c * _apply_perm(w, v.amplitudes, v.n, v.N)
        return SpinVector(v.n, v.N, out)
    return SpinVector(v.n, v.N, op.matrix @ v.amplitudes)


def commutator(a: SpinOperator, b: SpinOperator) -> SpinOperator:
    return a @ b - b @ a


def op_norm(a: SpinOperator) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a.dense()))


def is_hermitian(a: SpinOperator, tol: float = 1e-12) -> bool:
    m = a.dense()
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)
