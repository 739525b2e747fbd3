"""Exact Gaussian-rational scalars and multivariate Laurent rational functions.

A :class:`RationalFunction` over ``Q(i)`` is stored as ``(re + i*im) / den``
with ``re``, ``im``, ``den`` polynomials over ``Q`` and a *real* denominator.
Every element of ``Q(i)(x)`` has such a representation, and after removing
``gcd(re, im, den)`` and making ``den`` monic (graded-lex leading
coefficient 1) it is unique, so equal functions share one canonical form.

Polynomial arithmetic and gcds are delegated to FLINT via ``python-flint``.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Mapping, Sequence

import flint
import numpy as np

__all__ = [
    "GaussianRational",
    "VariableSet",
    "RationalFunction",
    "PoleError",
    "rf_arith",
    "rf_derive",
    "rf_eval",
    "rf_equal",
]


class PoleError(ZeroDivisionError):
    """Evaluation hit a zero of the denominator (e.g. coinciding coordinates)."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + _frac(im)
        elif isinstance(re, complex):
            re, im = Fraction(re.real), Fraction(re.imag) + _frac(im)
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        return x if isinstance(x, GaussianRational) else cls(x)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        d = o.norm2()
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussianRational(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        out, base = GaussianRational(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


class VariableSet:
    """Ordered variable list; the order fixes the graded-lex monomial order.

    Variables whose name starts with ``z`` may carry negative exponents
    (Laurent variables); all others are polynomial.
    """

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        self.names = names
        self.ctx = flint.fmpq_mpoly_ctx.get(names, "deglex")
        self._index = {nm: i for i, nm in enumerate(names)}

    @classmethod
    @lru_cache(maxsize=None)
    def cms(cls, n: int) -> "VariableSet":
        """Variables ``z1..zn, p1..pn, hbar, lam`` used by the operator algebra."""
        names = [f"z{i}" for i in range(1, n + 1)]
        names += [f"p{i}" for i in range(1, n + 1)]
        names += ["hbar", "lam"]
        return cls(names)

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, VariableSet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"VariableSet({list(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}; declared {self.names}") from None

    def is_laurent(self, name: str) -> bool:
        return name.startswith("z")

    def gen(self, name: str) -> "RationalFunction":
        return RationalFunction.variable(self, name)

    def gens(self) -> list["RationalFunction"]:
        return [self.gen(nm) for nm in self.names]


def _poly_from_frac(ctx, c: Fraction):
    return ctx.constant(flint.fmpq(c.numerator, c.denominator))


class RationalFunction:
    """Immutable exact rational function over Gaussian rationals."""

    __slots__ = ("vs", "re", "im", "den")

    def __init__(self, vs: VariableSet, re, im=None, den=None, *, _canonical=False):
        ctx = vs.ctx
        if im is None:
            im = ctx.constant(0)
        if den is None:
            den = ctx.constant(1)
        if den.is_zero():
            raise ZeroDivisionError("denominator is identically zero")
        object.__setattr__(self, "vs", vs)
        if not _canonical:
            re, im, den = self._canonicalize(re, im, den)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    @staticmethod
    def _canonicalize(re, im, den):
        ctx = den.context()
        if re.is_zero() and im.is_zero():
            return re, im, ctx.constant(1)
        if not den.is_constant():
            g = den.gcd(re)
            if not im.is_zero() and not g.is_one():
                g = g.gcd(im)
            if not g.is_constant():
                re = re / g
                im = im / g if not im.is_zero() else im
                den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            inv = 1 / lc
            re, im, den = re * inv, im * inv, den * inv
        return re, im, den

    # construction -----------------------------------------------------------
    @classmethod
    def constant(cls, vs: VariableSet, c) -> "RationalFunction":
        g = GaussianRational.coerce(c)
        return cls(vs, _poly_from_frac(vs.ctx, g.re), _poly_from_frac(vs.ctx, g.im),
                   vs.ctx.constant(1), _canonical=True)

    @classmethod
    def variable(cls, vs: VariableSet, name: str) -> "RationalFunction":
        return cls(vs, vs.ctx.gens()[vs.index(name)], _canonical=True)

    @classmethod
    def monomial(cls, vs: VariableSet, exponents: Mapping[str, int], coeff=1) -> "RationalFunction":
        """``coeff * prod(var**e)``; negative ``e`` only for Laurent variables."""
        up = [0] * len(vs)
        down = [0] * len(vs)
        for name, e in exponents.items():
            i = vs.index(name)
            if e < 0:
                if not vs.is_laurent(name):
                    raise ValueError(f"negative exponent not allowed for polynomial variable {name!r}")
                down[i] = -e
            else:
                up[i] = e
        g = GaussianRational.coerce(coeff)
        ctx = vs.ctx
        mono = ctx.term(exp_vec=tuple(up))
        return cls(vs, mono * _poly_from_frac(ctx, g.re), mono * _poly_from_frac(ctx, g.im),
                   ctx.term(exp_vec=tuple(down)))

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            if other.vs != self.vs:
                raise ValueError(f"incompatible variable sets: {self.vs.names} vs {other.vs.names}")
            return other
        try:
            return RationalFunction.constant(self.vs, other)
        except TypeError:
            return NotImplemented

    # predicates ---------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def is_real(self) -> bool:
        """True when all coefficients are real rationals."""
        return self.im.is_zero()

    def is_constant(self) -> bool:
        return self.den.is_constant() and self.re.is_constant() and self.im.is_constant()

    def depends_on(self, name: str) -> bool:
        i = self.vs.index(name)
        return any(p.degrees()[i] > 0 for p in (self.re, self.im, self.den) if not p.is_zero())

    def constant_value(self) -> GaussianRational:
        if not self.is_constant():
            raise ValueError("not a constant")
        c = self.den.leading_coefficient()
        re = self.re.coefficient(0) if not self.re.is_zero() else 0
        im = self.im.coefficient(0) if not self.im.is_zero() else 0
        return GaussianRational(_frac(re) / _frac(c), _frac(im) / _frac(c))

    # arithmetic -----------------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        if self.den == o.den:
            return RationalFunction(self.vs, self.re + o.re, self.im + o.im, self.den)
        re = self.re * o.den + o.re * self.den
        im = self.im * o.den + o.im * self.den
        return RationalFunction(self.vs, re, im, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(self.vs, -self.re, -self.im, self.den, _canonical=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.is_zero() or o.is_zero():
            return RationalFunction.constant(self.vs, 0)
        if self.im.is_zero() and o.im.is_zero():
            return RationalFunction(self.vs, self.re * o.re, None, self.den * o.den)
        re = self.re * o.re - self.im * o.im
        im = self.re * o.im + self.im * o.re
        return RationalFunction(self.vs, re, im, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.is_zero():
            raise ZeroDivisionError("division by identically-zero rational function")
        if o.im.is_zero():
            return RationalFunction(self.vs, self.re * o.den, self.im * o.den, self.den * o.re)
        # multiply through by the conjugate of the divisor's numerator
        cre, cim = o.re, -o.im
        re = (self.re * cre - self.im * cim) * o.den
        im = (self.re * cim + self.im * cre) * o.den
        den = self.den * (o.re * o.re + o.im * o.im)
        return RationalFunction(self.vs, re, im, den)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return RationalFunction.constant(self.vs, 1) / (self ** (-k))
        if self.im.is_zero():
            return RationalFunction(self.vs, self.re ** k, None, self.den ** k, _canonical=True)
        out = RationalFunction.constant(self.vs, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "RationalFunction":
        """Complex conjugation of the coefficients (variables treated as formal)."""
        return RationalFunction(self.vs, self.re, -self.im, self.den, _canonical=True)

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return rf_equal(self, other)
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return rf_equal(self, o)

    def __hash__(self):
        return hash((self.vs, str(self.re), str(self.im), str(self.den)))

    # calculus ---------------------------------------------------------------------
    def derive(self, var: str, euler: bool = False) -> "RationalFunction":
        """``d/d var``; with ``euler`` the Euler derivative ``var * d/d var``."""
        name = self.vs.names[self.vs.index(var)]
        dden = self.den.derivative(name)
        re = self.re.derivative(name) * self.den - self.re * dden
        im = self.im.derivative(name) * self.den - self.im * dden if not self.im.is_zero() else self.im
        den = self.den * self.den
        if euler:
            x = self.vs.ctx.gens()[self.vs.index(name)]
            re, im = re * x, im * x
        return RationalFunction(self.vs, re, im, den)

    def permute(self, mapping: Mapping[str, str]) -> "RationalFunction":
        """Substitute variables by variables, e.g. ``{'z1': 'z2', 'z2': 'z1'}``."""
        gens = list(self.vs.ctx.gens())
        images = list(gens)
        for src, dst in mapping.items():
            images[self.vs.index(src)] = gens[self.vs.index(dst)]
        re = self.re.compose(*images)
        im = self.im.compose(*images) if not self.im.is_zero() else self.im
        den = self.den.compose(*images)
        # a variable permutation preserves degrees, so gcd-freeness is preserved
        lc = den.leading_coefficient()
        if lc != 1:
            inv = 1 / lc
            re, im, den = re * inv, im * inv, den * inv
        return RationalFunction(self.vs, re, im, den, _canonical=True)

    def coefficient(self, var: str, power: int) -> "RationalFunction":
        """Coefficient of ``var**power``; requires ``var`` absent from the denominator."""
        i = self.vs.index(var)
        if self.den.degrees()[i] != 0:
            raise ValueError(f"{var} appears in the denominator")
        ctx = self.vs.ctx

        def pick(poly):
            out = {}
            for exps, c in poly.terms():
                if exps[i] == power:
                    e = list(exps)
                    e[i] = 0
                    out[tuple(e)] = c
            return ctx.from_dict(out) if out else ctx.constant(0)

        return RationalFunction(self.vs, pick(self.re), pick(self.im), self.den)

    def degree(self, var: str) -> int:
        """Degree of the numerator in ``var`` (meaningful when ``var`` is polynomial)."""
        i = self.vs.index(var)
        degs = [p.degrees()[i] for p in (self.re, self.im) if not p.is_zero()]
        return max(degs) if degs else 0

    def substitute(self, values: Mapping[str, object]) -> "RationalFunction":
        """Substitute exact rational constants for some variables."""
        gens = list(self.vs.ctx.gens())
        images = list(gens)
        for name, v in values.items():
            c = _frac(v)
            images[self.vs.index(name)] = _poly_from_frac(self.vs.ctx, c)
        re = self.re.compose(*images)
        im = self.im.compose(*images)
        den = self.den.compose(*images)
        if den.is_zero():
            raise PoleError(f"substitution {dict(values)} hits a pole")
        return RationalFunction(self.vs, re, im, den)

    # evaluation ---------------------------------------------------------------
    def _point_vector(self, point: Mapping[str, object]) -> list:
        vals = []
        needed = self._used_indices()
        for i, name in enumerate(self.vs.names):
            if i in needed:
                if name not in point:
                    raise KeyError(f"variable {name!r} is not bound")
                vals.append(point[name])
            else:
                vals.append(point.get(name, 0))
        return vals

    def _used_indices(self) -> set[int]:
        used = set()
        for p in (self.re, self.im, self.den):
            if not p.is_zero():
                used.update(i for i, d in enumerate(p.degrees()) if d > 0)
        return used

    def evaluate(self, point: Mapping[str, object], mode: str = "exact"):
        """Evaluate at ``point``; exact mode returns :class:`GaussianRational`."""
        vals = self._point_vector(point)
        if mode == "exact":
            xs = [GaussianRational.coerce(v) for v in vals]
            den = _eval_poly_exact(self.den, xs)
            if den.is_zero():
                raise PoleError("denominator vanishes at the evaluation point")
            num = _eval_poly_exact(self.re, xs) + GaussianRational(0, 1) * _eval_poly_exact(self.im, xs)
            return num / den
        if mode == "float":
            xs = np.array([complex(v) for v in vals], dtype=complex)
            den, scale = _eval_poly_float(self.den, xs)
            if den == 0 or abs(den) <= 1e-14 * scale:
                raise PoleError("denominator vanishes at the evaluation point")
            re, _ = _eval_poly_float(self.re, xs)
            im, _ = _eval_poly_float(self.im, xs)
            return (re + 1j * im) / den
        raise ValueError(f"unknown mode {mode!r}")

    def compile(self, names: Sequence[str]):
        """Vectorised float evaluator ``f(*arrays) -> complex array`` over ``names``."""
        order = [self.vs.index(nm) for nm in names]
        used = self._used_indices()
        missing = used - set(order)
        if missing:
            raise KeyError(f"unbound variables {[self.vs.names[i] for i in sorted(missing)]}")
        parts = [_compile_poly(p, order) for p in (self.re, self.im, self.den)]

        def f(*args):
            args = [np.asarray(a, dtype=complex) for a in args]
            re, im, den = (part(args) for part in parts)
            return (re + 1j * im) / den

        return f

    # text -------------------------------------------------------------------
    def to_text(self) -> str:
        """Canonical serialisation: graded-lex sorted terms, explicit exponents."""
        return f"({_poly_text(self.vs, self.re, self.im)})/({_poly_text(self.vs, self.den, None)})"

    def __repr__(self):
        return f"RationalFunction({self.to_text()})"

    __str__ = to_text


def _eval_poly_exact(poly, xs: list[GaussianRational]) -> GaussianRational:
    total = GaussianRational(0)
    if poly.is_zero():
        return total
    powers: dict[tuple[int, int], GaussianRational] = {}
    for exps, c in poly.terms():
        exps = [int(e) for e in exps]
        term = GaussianRational(_frac(c))
        for i, e in enumerate(exps):
            if e:
                key = (i, e)
                if key not in powers:
                    powers[key] = xs[i] ** e
                term = term * powers[key]
        total = total + term
    return total


def _eval_poly_float(poly, xs: np.ndarray) -> tuple[complex, float]:
    if poly.is_zero():
        return 0j, 0.0
    total, scale = 0j, 0.0
    for exps, c in poly.terms():
        exps = [int(e) for e in exps]
        t = float(_frac(c))
        for i, e in enumerate(exps):
            if e:
                t = t * xs[i] ** e
        total += t
        scale += abs(t)
    return total, scale


def _compile_poly(poly, order: list[int]):
    if poly.is_zero():
        return lambda args: np.zeros(np.broadcast(*args).shape if args else (), dtype=complex)
    terms = list(poly.terms())
    coeffs = np.array([float(_frac(c)) for _, c in terms])
    exps = np.array([[int(e[i]) for i in order] for e, _ in terms], dtype=int)

    def ev(args):
        shape = np.broadcast(*args).shape if args else ()
        out = np.zeros(shape, dtype=complex)
        for c, row in zip(coeffs, exps):
            t = np.full(shape, c, dtype=complex)
            for a, e in zip(args, row):
                if e:
                    t = t * a ** e
            out = out + t
        return out

    return ev


def _mono_text(vs: VariableSet, exps) -> str:
    return "*".join(f"{vs.names[i]}^{e}" for i, e in enumerate(exps) if e)


def _poly_text(vs: VariableSet, re, im) -> str:
    coeffs: dict[tuple, GaussianRational] = {}
    for exps, c in re.terms():
        coeffs[tuple(int(e) for e in exps)] = GaussianRational(_frac(c))
    if im is not None:
        for exps, c in im.terms():
            key = tuple(int(e) for e in exps)
            coeffs[key] = coeffs.get(key, GaussianRational(0)) + GaussianRational(0, _frac(c))
    if not coeffs:
        return "0"
    # graded lex, descending
    keys = sorted(coeffs, key=lambda e: (sum(e), e), reverse=True)
    parts = []
    for e in keys:
        mono = _mono_text(vs, e)
        c = str(coeffs[e])
        parts.append(f"{c}*{mono}" if mono else c)
    return " + ".join(parts)


# functional surface ---------------------------------------------------------------

def rf_arith(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    """Exact ``a op b`` for ``op`` in ``add, sub, mul, div``."""
    if a.vs != b.vs:
        raise ValueError("incompatible variable sets")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def rf_derive(a: RationalFunction, var: str, euler: bool = False) -> RationalFunction:
    return a.derive(var, euler=euler)


def rf_eval(a: RationalFunction, point: Mapping[str, object], mode: str = "exact"):
    return a.evaluate(point, mode=mode)


def rf_equal(a: RationalFunction, b: RationalFunction) -> bool:
    """True iff ``a - b`` vanishes identically (cross-multiplied comparison)."""
    if a.vs != b.vs:
        raise ValueError("incompatible variable sets")
    if a.den == b.den:
        return a.re == b.re and a.im == b.im
    return a.re * b.den == b.re * a.den and a.im * b.den == b.im * a.den


def gaussian_from_complex(z: complex, max_den: int = 10**6) -> GaussianRational:
    """Closest Gaussian rational with bounded denominators."""
    return GaussianRational(Fraction(z.real).limit_denominator(max_den),
                            Fraction(z.imag).limit_denominator(max_den))


def unit_gaussian(m: int, k: int) -> GaussianRational:
    """Exact point on the unit circle, ``((m^2 - k^2) + 2mk i) / (m^2 + k^2)``."""
    d = m * m + k * k
    if d == 0:
        raise ValueError("m and k cannot both vanish")
    return GaussianRational(Fraction(m * m - k * k, d), Fraction(2 * m * k, d))

