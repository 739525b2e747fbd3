"""Cherednik-Dunkl operators and their normal ordering over the symmetric group.

Operators are stored in normal order ``sum f_{a,w}(z; hbar, lam) phat^a K_w``:
coefficients on the left, momenta in the middle, coordinate permutations on
the right.  Quantum momenta are the Euler operators ``phat_i = hbar z_i d/dz_i``;
in the semiclassical kind the momenta are commuting symbols ``p_i`` folded
into the coefficients and only ``a = 0`` occurs.

Permutations act on positions, ``(K_w f)(z_1..z_n) = f(z_{w(1)}..z_{w(n)})``,
so ``K_w z_i = z_{w(i)} K_w``, ``K_w phat_i = phat_{w(i)} K_w`` and
``K_w K_v = K_{w o v}``.  On the symmetric space a coordinate permutation
``K_w`` acts as the spin permutation ``P(w^{-1})``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import comb
from typing import Mapping

import numpy as np

from .exactfun import GaussianRational, RationalFunction, VariableSet
from .reports import Report
from .spinspace import Perm, SpinOperator, compose, identity_perm, inverse, transposition

QUANTUM = "quantum"
SEMICLASSICAL = "semiclassical"

MAX_N = 4
MAX_K = 4

Alpha = tuple[int, ...]
Key = tuple[Alpha, Perm]


class CostGuardError(ValueError):
    """Requested exact computation is beyond the factorial cost guard."""


class UnityViolation(ArithmeticError):
    """The hbar^0 part of a restricted Hamiltonian carries a spin permutation."""


def _check_cost(n: int, k: int | None = None) -> None:
    if n < 1:
        raise ValueError("n must be positive")
    if n > MAX_N:
        raise CostGuardError(f"exact normal ordering limited to n <= {MAX_N} (got n={n})")
    if k is not None and k > MAX_K:
        raise CostGuardError(f"exact normal ordering limited to k <= {MAX_K} (got k={k})")


def perm_word(w: Perm) -> list[tuple[int, int]]:
    """A reduced decomposition of ``w`` into adjacent transpositions (1-based).

    The product of the returned transpositions, composed left to right,
    equals ``w``.
    """
    w = list(w)
    n = len(w)
    word = []
    # bubble sort w into the identity: w o s_1 o ... o s_m = id
    for i in range(n):
        for j in range(n - 1 - i):
            if w[j] > w[j + 1]:
                w[j], w[j + 1] = w[j + 1], w[j]
                word.append((j + 1, j + 2))
    return list(reversed(word))


def _act_alpha(w: Perm, a: Alpha) -> Alpha:
    out = [0] * len(a)
    for i, e in enumerate(a):
        out[w[i]] = e
    return tuple(out)


@dataclass(frozen=True)
class NormalOrderedOperator:
    n: int
    kind: str
    terms: Mapping[Key, RationalFunction]

    def __post_init__(self):
        if self.kind not in (QUANTUM, SEMICLASSICAL):
            raise ValueError(f"unknown kind {self.kind!r}")
        clean = {k: v for k, v in self.terms.items() if not v.is_zero()}
        if self.kind == SEMICLASSICAL and any(any(a) for a, _ in clean):
            raise ValueError("semiclassical operators carry momenta in their coefficients")
        object.__setattr__(self, "terms", clean)

    @property
    def vs(self) -> VariableSet:
        return VariableSet.cms(self.n)

    # constructors --------------------------------------------------------------
    @classmethod
    def scalar(cls, n: int, kind: str, f) -> "NormalOrderedOperator":
        vs = VariableSet.cms(n)
        if not isinstance(f, RationalFunction):
            f = RationalFunction.constant(vs, f)
        return cls(n, kind, {((0,) * n, identity_perm(n)): f})

    @classmethod
    def perm(cls, n: int, kind: str, w: Perm, coeff=1) -> "NormalOrderedOperator":
        vs = VariableSet.cms(n)
        if not isinstance(coeff, RationalFunction):
            coeff = RationalFunction.constant(vs, coeff)
        return cls(n, kind, {((0,) * n, tuple(w)): coeff})

    @classmethod
    def momentum(cls, n: int, kind: str, i: int) -> "NormalOrderedOperator":
        """``phat_i`` (quantum) or the symbol ``p_i`` (semiclassical); ``i`` 1-based."""
        vs = VariableSet.cms(n)
        if kind == QUANTUM:
            a = tuple(1 if m == i - 1 else 0 for m in range(n))
            return cls(n, kind, {(a, identity_perm(n)): RationalFunction.constant(vs, 1)})
        return cls.scalar(n, kind, vs.gen(f"p{i}"))

    @classmethod
    def zero(cls, n: int, kind: str) -> "NormalOrderedOperator":
        return cls(n, kind, {})

    def _check(self, other: "NormalOrderedOperator"):
        if self.kind != other.kind:
            raise TypeError(f"kind mismatch: {self.kind} vs {other.kind}")
        if self.n != other.n:
            raise ValueError(f"site-count mismatch: {self.n} vs {other.n}")

    # algebra ---------------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, NormalOrderedOperator):
            other = NormalOrderedOperator.scalar(self.n, self.kind, other)
        self._check(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return NormalOrderedOperator(self.n, self.kind, terms)

    __radd__ = __add__

    def __neg__(self):
        return NormalOrderedOperator(self.n, self.kind, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, NormalOrderedOperator):
            other = NormalOrderedOperator.scalar(self.n, self.kind, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, NormalOrderedOperator):
            return op_multiply(self, other)
        if not isinstance(other, RationalFunction):
            other = RationalFunction.constant(self.vs, other)
        return NormalOrderedOperator(self.n, self.kind, {k: v * other for k, v in self.terms.items()})

    def __rmul__(self, other):
        # scalars and coefficient functions multiply from the left
        if not isinstance(other, RationalFunction):
            other = RationalFunction.constant(self.vs, other)
        return NormalOrderedOperator(self.n, self.kind, {k: other * v for k, v in self.terms.items()})

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = NormalOrderedOperator.scalar(self.n, self.kind, 1)
        for _ in range(k):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, NormalOrderedOperator):
            return NotImplemented
        return (self.kind == other.kind and self.n == other.n
                and first_difference(self, other) is None)

    __hash__ = None

    def coefficient(self, w: Perm, alpha: Alpha | None = None) -> RationalFunction:
        alpha = (0,) * self.n if alpha is None else tuple(alpha)
        return self.terms.get((alpha, tuple(w)), RationalFunction.constant(self.vs, 0))

    def words(self) -> set[Perm]:
        return {w for _, w in self.terms}

    def to_text(self) -> list[str]:
        rows = []
        for (a, w), f in sorted(self.terms.items()):
            rows.append(f"alpha={list(a)} w={list(w)}: {f.to_text()}")
        return rows


def first_difference(a: NormalOrderedOperator, b: NormalOrderedOperator) -> dict | None:
    """First nonzero coefficient of ``a - b`` (``None`` when they agree)."""
    for k in sorted(set(a.terms) | set(b.terms)):
        fa = a.terms.get(k)
        fb = b.terms.get(k)
        if fa is None or fb is None or not (fa == fb):
            diff = (fa if fa is not None else 0) - (fb if fb is not None else 0) if fa is not None \
                else -fb
            return {"alpha": list(k[0]), "word": list(k[1]), "coefficient": diff.to_text()}
    return None


_subst_cache: dict[tuple[int, Perm, str], dict[str, str]] = {}


def _perm_mapping(n: int, w: Perm, kind: str) -> dict[str, str]:
    key = (n, w, kind)
    if key not in _subst_cache:
        m = {f"z{i + 1}": f"z{w[i] + 1}" for i in range(n)}
        if kind == SEMICLASSICAL:
            m.update({f"p{i + 1}": f"p{w[i] + 1}" for i in range(n)})
        _subst_cache[key] = m
    return _subst_cache[key]


def _euler(f: RationalFunction, delta: Alpha) -> RationalFunction:
    for i, e in enumerate(delta):
        for _ in range(e):
            f = f.derive(f"z{i + 1}", euler=True)
    return f


def op_multiply(a: NormalOrderedOperator, b: NormalOrderedOperator) -> NormalOrderedOperator:
    """Product ``a b`` rewritten into normal order."""
    a._check(b)
    n, kind = a.n, a.kind
    vs = a.vs
    hbar = vs.gen("hbar")
    acc: dict[Key, list[RationalFunction]] = {}
    permuted: dict[tuple[Perm, Key], RationalFunction] = {}
    derived: dict[tuple[Perm, Key, Alpha], RationalFunction] = {}

    for (alpha, w), f in a.terms.items():
        for bkey, g in b.terms.items():
            beta, v = bkey
            pk = (w, bkey)
            if pk not in permuted:
                permuted[pk] = g.permute(_perm_mapping(n, w, kind))
            wg = permuted[pk]
            wv = compose(w, v)
            wbeta = _act_alpha(w, beta)
            if kind == SEMICLASSICAL or not any(alpha):
                acc.setdefault((tuple(x + y for x, y in zip(alpha, wbeta)), wv), []).append(f * wg)
                continue
            # phat^alpha g = sum_delta C(alpha, delta) hbar^|alpha-delta| (theta^(alpha-delta) g) phat^delta
            for delta in product(*(range(e + 1) for e in alpha)):
                rest = tuple(x - d for x, d in zip(alpha, delta))
                dk = (w, bkey, rest)
                if dk not in derived:
                    derived[dk] = _euler(wg, rest)
                dg = derived[dk]
                if dg.is_zero():
                    continue
                c = 1
                for x, d in zip(alpha, delta):
                    c *= comb(x, d)
                order = sum(rest)
                coeff = f * dg * c
                if order:
                    coeff = coeff * hbar ** order
                key = (tuple(d + y for d, y in zip(delta, wbeta)), wv)
                acc.setdefault(key, []).append(coeff)

    terms = {}
    for key, parts in acc.items():
        s = parts[0]
        for p in parts[1:]:
            s = s + p
        terms[key] = s
    return NormalOrderedOperator(n, kind, terms)


def commutator(a: NormalOrderedOperator, b: NormalOrderedOperator) -> NormalOrderedOperator:
    return a * b - b * a


# Dunkl operators -------------------------------------------------------------------

def _pair_sum(j: int, n: int, kind: str) -> NormalOrderedOperator:
    vs = VariableSet.cms(n)
    z = [None] + [vs.gen(f"z{i}") for i in range(1, n + 1)]
    terms: dict[Key, RationalFunction] = {}
    zero = (0,) * n
    for i in range(1, n + 1):
        if i == j:
            continue
        w = transposition(i, j, n)
        if i > j:
            terms[(zero, w)] = z[i] / (z[i] - z[j])
        else:
            terms[(zero, w)] = -(z[j] / (z[j] - z[i]))
    return NormalOrderedOperator(n, kind, terms)


def dunkl_quantum(j: int, n: int) -> NormalOrderedOperator:
    """``d_j = hbar z_j d/dz_j + sum_{i>j} z_i/(z_i-z_j) K_ij - sum_{i<j} z_j/(z_j-z_i) K_ij``."""
    if not 1 <= j <= n:
        raise IndexError(f"site {j} out of range 1..{n}")
    return NormalOrderedOperator.momentum(n, QUANTUM, j) + _pair_sum(j, n, QUANTUM)


def dunkl_classical(j: int, n: int) -> NormalOrderedOperator:
    """Semiclassical Dunkl operator: ``hbar z_j d/dz_j`` replaced by the symbol ``p_j``."""
    if not 1 <= j <= n:
        raise IndexError(f"site {j} out of range 1..{n}")
    return NormalOrderedOperator.momentum(n, SEMICLASSICAL, j) + _pair_sum(j, n, SEMICLASSICAL)


def dunkl(j: int, n: int, kind: str) -> NormalOrderedOperator:
    return dunkl_quantum(j, n) if kind == QUANTUM else dunkl_classical(j, n)


def coordinate(k: int, n: int, kind: str) -> NormalOrderedOperator:
    return NormalOrderedOperator.scalar(n, kind, VariableSet.cms(n).gen(f"z{k}"))


def K(i: int, j: int, n: int, kind: str) -> NormalOrderedOperator:
    return NormalOrderedOperator.perm(n, kind, transposition(i, j, n))


def symmetric_hamiltonian(k: int, n: int, kind: str = QUANTUM) -> NormalOrderedOperator:
    """``(1/k) sum_i d_i^k`` (or with semiclassical ``D_i``), normal ordered."""
    if k < 1:
        raise ValueError("degree k must be >= 1")
    _check_cost(n, k)
    total = NormalOrderedOperator.zero(n, kind)
    for i in range(1, n + 1):
        d = dunkl(i, n, kind)
        total = total + d ** k
    return total * Fraction(1, k)


def generating_function(n: int) -> NormalOrderedOperator:
    """``t(lam) = prod_j (lam + D_j)`` for the semiclassical operators."""
    _check_cost(n)
    lam = VariableSet.cms(n).gen("lam")
    out = NormalOrderedOperator.scalar(n, SEMICLASSICAL, 1)
    for j in range(1, n + 1):
        out = out * (dunkl_classical(j, n) + lam)
    return out


# restriction to the symmetric (spin) space --------------------------------------------

@dataclass(frozen=True)
class SpinDifferentialOperator:
    """``sum f_{a,w}(z; hbar) P(w) phat^a`` acting on spin-valued functions."""

    n: int
    terms: Mapping[Key, RationalFunction]

    def __post_init__(self):
        object.__setattr__(self, "terms", {k: v for k, v in self.terms.items() if not v.is_zero()})

    def __eq__(self, other):
        if not isinstance(other, SpinDifferentialOperator):
            return NotImplemented
        return self.n == other.n and spin_table_difference(self, other) is None

    __hash__ = None

    def spin_words(self) -> set[Perm]:
        return {w for _, w in self.terms}


def spin_table_difference(a: SpinDifferentialOperator, b: SpinDifferentialOperator) -> dict | None:
    for k in sorted(set(a.terms) | set(b.terms)):
        fa, fb = a.terms.get(k), b.terms.get(k)
        if fa is None or fb is None or not (fa == fb):
            d = (fa - fb) if (fa is not None and fb is not None) else (fa if fa is not None else -fb)
            return {"alpha": list(k[0]), "spin_word": list(k[1]), "coefficient": d.to_text()}
    return None


def restrict_to_symmetric(a: NormalOrderedOperator, twist: bool = True) -> SpinDifferentialOperator:
    """Replace every ``K_w`` by the spin permutation ``sgn(w) P(w^{-1})``.

    With ``twist=False`` the sign is dropped (``K_ij P_ij = 1`` literally),
    which yields the same Hamiltonians with ``hbar -> -hbar`` in front of every
    transposition.
    """
    if a.kind != QUANTUM:
        raise TypeError("restriction applies to quantum operators")
    terms: dict[Key, RationalFunction] = {}
    for (alpha, w), f in a.terms.items():
        if twist and _perm_sign(w) < 0:
            f = -f
        key = (alpha, inverse(w))
        terms[key] = terms[key] + f if key in terms else f
    return SpinDifferentialOperator(a.n, terms)


@dataclass(frozen=True)
class SemiclassicalSplit:
    """``H = H0 + hbar H1 + O(hbar^2)``; ``H1`` maps spin words to functions of ``(p, z)``."""

    n: int
    h0: RationalFunction
    h1: Mapping[Perm, RationalFunction]

    def weyl_h1(self) -> dict[Perm, RationalFunction]:
        """First-order symbol in Weyl (symmetric) ordering.

        The (z, phat) ordered symbol differs from the Weyl one at order hbar by
        the scalar ``1/2 sum_j z_j d/dz_j dH0/dp_j``; removing it makes the
        spin Hamiltonian Hermitian on the unit torus.  For k = 2, 3 the
        correction vanishes.
        """
        corr = self.h0 * 0
        for j in range(1, self.n + 1):
            corr = corr + self.h0.derive(f"p{j}").derive(f"z{j}", euler=True)
        out = dict(self.h1)
        ident = identity_perm(self.n)
        shifted = out.get(ident, corr * 0) - corr * Fraction(1, 2)
        if shifted.is_zero():
            out.pop(ident, None)
        else:
            out[ident] = shifted
        return out

    def h1_operator(self, N: int, point: Mapping[str, complex]) -> SpinOperator:
        terms = {w: complex(f.evaluate(point, mode="float")) for w, f in self.weyl_h1().items()}
        return SpinOperator(self.n, N, terms=terms)


def semiclassical_split(a: SpinDifferentialOperator | NormalOrderedOperator) -> SemiclassicalSplit:
    """Symbol of the restricted operator in (z, phat) order, split by powers of hbar."""
    if isinstance(a, NormalOrderedOperator):
        a = restrict_to_symmetric(a)
    n = a.n
    vs = VariableSet.cms(n)
    p = [vs.gen(f"p{i}") for i in range(1, n + 1)]
    by_word: dict[Perm, RationalFunction] = {}
    for (alpha, w), f in a.terms.items():
        mono = RationalFunction.constant(vs, 1)
        for i, e in enumerate(alpha):
            if e:
                mono = mono * p[i] ** e
        by_word[w] = by_word[w] + f * mono if w in by_word else f * mono
    ident = identity_perm(n)
    h0 = RationalFunction.constant(vs, 0)
    h1: dict[Perm, RationalFunction] = {}
    for w, f in sorted(by_word.items()):
        c0 = f.coefficient("hbar", 0)
        c1 = f.coefficient("hbar", 1)
        if w == ident:
            h0 = c0
        elif not c0.is_zero():
            raise UnityViolation(f"hbar^0 part carries spin word {list(w)}: {c0.to_text()}")
        if not c1.is_zero():
            h1[w] = c1
    return SemiclassicalSplit(n, h0, h1)


# closed-form spin Hamiltonians, built independently of the Dunkl construction ----------------

def _cms_symbols(n: int):
    vs = VariableSet.cms(n)
    z = [None] + [vs.gen(f"z{i}") for i in range(1, n + 1)]
    return vs, z, vs.gen("hbar")


def displayed_h2(n: int) -> SpinDifferentialOperator:
    """``1/2 sum phat_i^2 - 1/2 sum_{i!=j} z_i z_j/(z_i-z_j)^2 (1 + hbar P_ij)``."""
    vs, z, hbar = _cms_symbols(n)
    ident = identity_perm(n)
    zero = (0,) * n
    half = Fraction(1, 2)
    terms: dict[Key, RationalFunction] = {}

    def add(key, f):
        terms[key] = terms[key] + f if key in terms else f

    for i in range(1, n + 1):
        a = tuple(2 if m == i - 1 else 0 for m in range(n))
        add((a, ident), RationalFunction.constant(vs, half))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            wij = z[i] * z[j] / (z[i] - z[j]) ** 2
            add((zero, ident), -half * wij)
            add((zero, transposition(i, j, n)), -half * wij * hbar)
    return SpinDifferentialOperator(n, terms)


def displayed_h3(n: int) -> SpinDifferentialOperator:
    """Displayed third Hamiltonian including the three-site ``P_jk P_ij`` term."""
    vs, z, hbar = _cms_symbols(n)
    ident = identity_perm(n)
    zero = (0,) * n
    third = Fraction(1, 3)
    terms: dict[Key, RationalFunction] = {}

    def add(key, f):
        terms[key] = terms[key] + f if key in terms else f

    for i in range(1, n + 1):
        a = tuple(3 if m == i - 1 else 0 for m in range(n))
        add((a, ident), RationalFunction.constant(vs, third))
    for i in range(1, n + 1):
        e_i = tuple(1 if m == i - 1 else 0 for m in range(n))
        for j in range(1, n + 1):
            if i == j:
                continue
            wij = z[i] * z[j] / (z[i] - z[j]) ** 2
            add((e_i, ident), -wij)
            add((e_i, transposition(i, j, n)), -wij * hbar)
    for i, j, k in permutations(range(1, n + 1), 3):
        c = z[i] * z[j] * z[k] / ((z[i] - z[j]) * (z[j] - z[k]) * (z[k] - z[i]))
        w = compose(transposition(j, k, n), transposition(i, j, n))
        add((zero, w), -third * hbar * c)
    return SpinDifferentialOperator(n, terms)


def displayed_h1_table(k: int, n: int) -> dict[Perm, RationalFunction]:
    """Displayed first-order (spin) parts of the second and third Hamiltonians."""
    vs, z, _ = _cms_symbols(n)
    p = [None] + [vs.gen(f"p{i}") for i in range(1, n + 1)]
    out: dict[Perm, RationalFunction] = {}

    def add(w, f):
        out[w] = out[w] + f if w in out else f

    if k not in (2, 3):
        raise ValueError("explicit formulas exist for k = 2, 3")
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            wij = z[i] * z[j] / (z[i] - z[j]) ** 2
            if k == 2:
                add(transposition(i, j, n), -Fraction(1, 2) * wij)
            else:
                add(transposition(i, j, n), -wij * p[i])
    if k == 3:
        for i, j, l in permutations(range(1, n + 1), 3):
            c = z[i] * z[j] * z[l] / ((z[i] - z[j]) * (z[j] - z[l]) * (z[l] - z[i]))
            add(compose(transposition(j, l, n), transposition(i, j, n)), -Fraction(1, 3) * c)
    return {w: f for w, f in out.items() if not f.is_zero()}


# Lax matrix, exact ------------------------------------------------------------------

def lax_exact(n: int) -> list[list[RationalFunction]]:
    """``L = diag(p) + M``, ``M_ij = z_i/(z_i - z_j)``, as exact rational functions."""
    vs = VariableSet.cms(n)
    z = [vs.gen(f"z{i}") for i in range(1, n + 1)]
    p = [vs.gen(f"p{i}") for i in range(1, n + 1)]
    zero = RationalFunction.constant(vs, 0)
    return [[p[i] if i == j else (z[i] / (z[i] - z[j]) if True else zero) for j in range(n)]
            for i in range(n)]


def _matmul(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), start=a[0][0] * 0) for j in range(n)]
            for i in range(n)]


def power_trace(n: int, k: int) -> RationalFunction:
    """``(1/k) tr L^k``."""
    L = lax_exact(n)
    M = L
    for _ in range(k - 1):
        M = _matmul(M, L)
    tr = M[0][0]
    for i in range(1, n):
        tr = tr + M[i][i]
    return tr * Fraction(1, k)


def _perm_sign(w: Perm) -> int:
    sign, seen = 1, [False] * len(w)
    for i in range(len(w)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = w[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def lax_determinant(n: int) -> RationalFunction:
    """``det(lam + L)`` by the Leibniz expansion."""
    vs = VariableSet.cms(n)
    lam = vs.gen("lam")
    L = lax_exact(n)
    A = [[L[i][j] + (lam if i == j else 0) for j in range(n)] for i in range(n)]
    total = RationalFunction.constant(vs, 0)
    for w in permutations(range(n)):
        term = RationalFunction.constant(vs, _perm_sign(w))
        for i in range(n):
            term = term * A[i][w[i]]
        total = total + term
    return total


# identity checks ----------------------------------------------------------------------

HECKE_ANCHOR = "degenerate affine Hecke algebra relations (Cherednik-Dunkl operators)"


def _report(identity, anchor, params, lhs, rhs) -> Report:
    wit = first_difference(lhs, rhs)
    return Report(identity=identity, anchor=anchor, parameters=params,
                  passed=wit is None, witness=wit)


def hecke_relations(n: int, kind: str) -> list[Report]:
    """Exact degenerate affine Hecke relations for ``d_i`` (or ``D_i``)."""
    _check_cost(n)
    d = [None] + [dunkl(i, n, kind) for i in range(1, n + 1)]
    one = NormalOrderedOperator.scalar(n, kind, 1)
    zero = NormalOrderedOperator.zero(n, kind)
    out = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            out.append(_report("[d_i, d_j] = 0 (degenerate affine Hecke)", HECKE_ANCHOR,
                               {"n": n, "kind": kind, "i": i, "j": j},
                               commutator(d[i], d[j]), zero))
    for i in range(1, n):
        s = K(i, i + 1, n, kind)
        out.append(_report("K_{i,i+1} d_i = d_{i+1} K_{i,i+1} + 1 (degenerate affine Hecke)",
                           HECKE_ANCHOR, {"n": n, "kind": kind, "i": i},
                           s * d[i], d[i + 1] * s + one))
    for i in range(1, n + 1):
        for j in range(1, n):
            if i in (j, j + 1):
                continue
            out.append(_report("[d_i, K_{j,j+1}] = 0 (degenerate affine Hecke)", HECKE_ANCHOR,
                               {"n": n, "kind": kind, "i": i, "j": j},
                               commutator(d[i], K(j, j + 1, n, kind)), zero))
    return out


def coordinate_relations(n: int, kind: str) -> list[Report]:
    """``[D_i, z_j] = -z_max(i,j) K_ij`` and ``[D_i, z_i] = sum_j z_max(i,j) K_ij``.

    For the quantum kind the diagonal relation acquires the extra ``hbar z_i``
    from ``[hbar z_i d/dz_i, z_i]``.
    """
    _check_cost(n)
    vs = VariableSet.cms(n)
    anchor = "semiclassical Dunkl/coordinate commutation relations"
    out = []
    for i in range(1, n + 1):
        d = dunkl(i, n, kind)
        for j in range(1, n + 1):
            zj = coordinate(j, n, kind)
            lhs = commutator(d, zj)
            if i != j:
                rhs = -coordinate(max(i, j), n, kind) * K(i, j, n, kind)
                ident = "[D_i, z_j] = -z_max(i,j) K_ij"
            else:
                rhs = NormalOrderedOperator.zero(n, kind)
                for m in range(1, n + 1):
                    if m != i:
                        rhs = rhs + coordinate(max(i, m), n, kind) * K(i, m, n, kind)
                if kind == QUANTUM:
                    rhs = rhs + NormalOrderedOperator.scalar(n, kind, vs.gen("hbar") * vs.gen(f"z{i}"))
                ident = "[D_i, z_i] = sum_j z_max(i,j) K_ij"
            out.append(_report(ident, anchor, {"n": n, "kind": kind, "i": i, "j": j}, lhs, rhs))
    return out


def kcancel_sides(n: int, l: int, kind: str = SEMICLASSICAL):
    """Both sides of the auxiliary K-cancellation identity for ``1 < l <= n``."""
    if not 1 < l <= n:
        raise ValueError("need 1 < l <= n")
    _check_cost(n)
    lam = NormalOrderedOperator.scalar(n, kind, VariableSet.cms(n).gen("lam"))
    D = [None] + [dunkl(i, n, kind) for i in range(1, n + 1)]
    zl = coordinate(l, n, kind)
    zl1 = coordinate(l - 1, n, kind)
    s = K(l - 1, l, n, kind)
    sum_l = NormalOrderedOperator.zero(n, kind)
    for j in range(1, l):
        sum_l = sum_l + zl * K(j, l, n, kind)
    inner = (lam + D[l - 1]) * sum_l - zl * s * (lam + D[l])
    lhs = s * inner * s
    sum_r = NormalOrderedOperator.zero(n, kind)
    for j in range(1, l - 1):
        sum_r = sum_r + zl1 * K(j, l - 1, n, kind)
    rhs = sum_r * (lam + D[l])
    return lhs, rhs


def kcancel(n: int, kind: str = SEMICLASSICAL) -> list[Report]:
    out = []
    for l in range(2, n + 1):
        lhs, rhs = kcancel_sides(n, l, kind)
        out.append(_report("K-cancellation identity", "auxiliary identity for [t(lam), z_k] = 0",
                           {"n": n, "l": l, "kind": kind}, lhs, rhs))
    return out


def random_exact_point(n: int, rng: np.random.Generator, on_circle: bool = True,
                       bound: int = 9) -> dict[str, GaussianRational]:
    """Seeded exact point: ``z`` on the unit circle (rational parametrisation), rational ``p``, ``lam``."""
    from .exactfun import unit_gaussian

    while True:
        zs = []
        for _ in range(n):
            if on_circle:
                m, k = (int(x) for x in rng.integers(-bound, bound + 1, size=2))
                if m == 0 and k == 0:
                    m = 1
                zs.append(unit_gaussian(m, k))
            else:
                a, b = (int(x) for x in rng.integers(-bound, bound + 1, size=2))
                zs.append(GaussianRational(Fraction(a, 3), Fraction(b, 3)))
        if len({(z.re, z.im) for z in zs}) == n:
            break
    point: dict[str, GaussianRational] = {f"z{i + 1}": zs[i] for i in range(n)}
    for i in range(n):
        point[f"p{i + 1}"] = GaussianRational(Fraction(int(rng.integers(-bound, bound + 1)),
                                                       int(rng.integers(1, 5))))
    point["lam"] = GaussianRational(Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, 5))))
    point["hbar"] = GaussianRational(0)
    return point


def classical_generating_check(n: int, samples: int = 5, seed: int = 0) -> list[Report]:
    """``t(lam) = prod (lam + D_j)`` is permutation-free, commutes with every ``z_k``
    and its identity coefficient equals ``det(lam + L)``."""
    t = generating_function(n)
    anchor = "generating function t(lam) = prod(lam + D_j) commutes with coordinates"
    ident = identity_perm(n)
    out = []
    nonid = sorted(w for w in t.words() if w != ident)
    out.append(Report("f_w(t(lam)) = 0 for w != id", anchor, {"n": n}, passed=not nonid,
                      witness=[list(w) for w in nonid] or None))
    for k in range(1, n + 1):
        zk = coordinate(k, n, SEMICLASSICAL)
        out.append(_report("[t(lam), z_k] = 0", anchor, {"n": n, "k": k},
                           commutator(t, zk), NormalOrderedOperator.zero(n, SEMICLASSICAL)))
    f_id = t.coefficient(ident)
    det = lax_determinant(n)
    out.append(Report("f_id(t(lam)) = det(lam + L) (symbolic)", anchor, {"n": n},
                      passed=bool(f_id == det), witness=None if f_id == det else (f_id - det).to_text()))
    rng = np.random.default_rng(seed)
    worst = None
    for s in range(samples):
        pt = random_exact_point(n, rng)
        lhs = f_id.evaluate(pt)
        rhs = _exact_det_at(n, pt)
        if lhs != rhs and worst is None:
            worst = {"sample": s, "lhs": str(lhs), "rhs": str(rhs)}
    out.append(Report("f_id(t(lam)) = det(lam + L) at random exact points", anchor,
                      {"n": n, "samples": samples, "seed": seed}, passed=worst is None, witness=worst))
    return out


def _exact_det_at(n: int, pt: Mapping[str, GaussianRational]) -> GaussianRational:
    """Exact Gaussian elimination on ``lam + L`` at a point (independent of the symbolic path)."""
    z = [pt[f"z{i + 1}"] for i in range(n)]
    p = [pt[f"p{i + 1}"] for i in range(n)]
    lam = pt["lam"]
    A = [[(p[i] + lam) if i == j else z[i] / (z[i] - z[j]) for j in range(n)] for i in range(n)]
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
            if f.is_zero():
                continue
            A[r] = [A[r][m] - f * A[c][m] for m in range(n)]
    return det


def unity_lemma(k: int, n: int) -> Report:
    """hbar^0 part of the restricted Hamiltonian is scalar and equals ``(1/k) tr L^k``."""
    anchor = "unity lemma: leading order of H_k is the spinless CMS Hamiltonian"
    try:
        split = semiclassical_split(symmetric_hamiltonian(k, n, QUANTUM))
    except UnityViolation as exc:
        return Report("hbar^0 part of H_k permutation-free", anchor, {"n": n, "k": k},
                      passed=False, witness=str(exc))
    target = power_trace(n, k)
    ok = split.h0 == target
    return Report("hbar^0 part of H_k = (1/k) tr L^k", anchor, {"n": n, "k": k}, passed=bool(ok),
                  witness=None if ok else (split.h0 - target).to_text())


def hamiltonian_golden(k: int, n: int) -> Report:
    anchor = f"closed-form spin Hamiltonian H_{k} (K -> P restriction)"
    built = restrict_to_symmetric(symmetric_hamiltonian(k, n, QUANTUM))
    target = displayed_h2(n) if k == 2 else displayed_h3(n)
    wit = spin_table_difference(built, target)
    return Report(f"restricted H_{k} equals the closed form", anchor, {"n": n, "k": k},
                  passed=wit is None, witness=wit)
