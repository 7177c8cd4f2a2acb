"""Truncated power series with exact rational coefficients.

Two flavours are provided:

* :class:`Series1D` -- univariate, expanded about 0, truncated at degree ``order``.
* :class:`Series2D` -- bivariate in offsets ``(X, Y)`` from an expansion point,
  truncated at total degree ``order`` (entries with ``i + j > order`` are unknown).

Coefficients beyond the truncation order are *unknown*, not zero, so every
operation returns the largest order it can actually vouch for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

Rational = Union[int, Fraction]

DEFAULT_ORDER = 20
DEFAULT_RADIUS = 0.1


class SeriesError(ValueError):
    """Structural misuse of series (mismatched points, bad composition, ...)."""


class SeriesDivisionError(SeriesError, ZeroDivisionError):
    """Raised when dividing by a series whose constant term vanishes."""


class DomainError(ValueError):
    """Evaluation requested outside the configured radius."""


def _q(value: Rational | str) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text)


@dataclass(frozen=True)
class Series1D:
    """``sum(coeffs[k] * x**k)`` known through degree ``len(coeffs) - 1``."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise SeriesError("a series needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(_q(c) for c in self.coeffs))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[Rational], order: int | None = None) -> "Series1D":
        cs = [_q(c) for c in coeffs]
        if order is not None:
            cs = (cs + [Fraction(0)] * (order + 1))[: order + 1]
        return cls(tuple(cs))

    @classmethod
    def constant(cls, value: Rational, order: int) -> "Series1D":
        return cls.from_coeffs([value], order)

    @classmethod
    def variable(cls, order: int) -> "Series1D":
        return cls.from_coeffs([0, 1], order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> Fraction:
        if k > self.order:
            raise IndexError(f"coefficient {k} is beyond truncation order {self.order}")
        return self.coeffs[k]

    def truncate(self, order: int) -> "Series1D":
        if order > self.order:
            raise SeriesError(f"cannot extend order {self.order} to {order}")
        return Series1D(self.coeffs[: order + 1])

    def _coerce(self, other) -> "Series1D":
        if isinstance(other, Series1D):
            return other
        if isinstance(other, (int, Fraction)):
            return Series1D.constant(other, self.order)
        if isinstance(other, Series2D):
            raise SeriesError("cannot mix univariate and bivariate series")
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        return Series1D(tuple(self.coeffs[k] + other.coeffs[k] for k in range(n + 1)))

    __radd__ = __add__

    def __neg__(self):
        return Series1D(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Series1D(tuple(c * other for c in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(n + 1):
            s = Fraction(0)
            for i in range(k + 1):
                if a[i] and b[k - i]:
                    s += a[i] * b[k - i]
            out.append(s)
        return Series1D(tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise SeriesDivisionError("division by zero scalar")
            return Series1D(tuple(c / other for c in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self) -> "Series1D":
        b = self.coeffs
        if b[0] == 0:
            raise SeriesDivisionError("constant term is zero; series is not invertible")
        q = [1 / b[0]]
        for k in range(1, self.order + 1):
            s = sum((b[i] * q[k - i] for i in range(1, k + 1) if b[i]), Fraction(0))
            q.append(-s / b[0])
        return Series1D(tuple(q))

    def __pow__(self, n: int):
        if n < 0:
            return self.reciprocal() ** (-n)
        out = Series1D.constant(1, self.order)
        for _ in range(n):
            out = out * self
        return out

    def shift(self, k: int = 1) -> "Series1D":
        """Multiply by ``x**k`` exactly; the known order grows by ``k``."""
        return Series1D((Fraction(0),) * k + self.coeffs)

    def diff(self) -> "Series1D":
        if self.order < 1:
            raise SeriesError("cannot differentiate an order-0 series")
        return Series1D(tuple(k * self.coeffs[k] for k in range(1, self.order + 1)))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def max_abs_coeff(self) -> Fraction:
        return max(abs(c) for c in self.coeffs)

    def __call__(self, x, radius: float | None = DEFAULT_RADIUS):
        return self.evaluate(x, radius=radius)

    def evaluate(self, x, *, radius: float | None = DEFAULT_RADIUS, with_error: bool = False):
        """Horner evaluation in floating point; accepts scalars or arrays."""
        xa = np.asarray(x, dtype=float)
        if radius is not None and np.any(np.abs(xa) > radius * (1 + 1e-12)):
            raise DomainError(f"|x| exceeds evaluation radius {radius}")
        acc = np.zeros_like(xa)
        for c in reversed(self.coeffs):
            acc = acc * xa + float(c)
        value = acc if acc.ndim else float(acc)
        if not with_error:
            return value
        err = np.abs(float(self.coeffs[-1]) * xa ** self.order)
        return value, (err if err.ndim else float(err))

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [format_rational(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Series1D":
        return cls.from_coeffs([parse_rational(s) for s in data["coeffs"]])


def _by_degree(coeffs: Mapping[tuple[int, int], Fraction]) -> list[tuple[int, int, int, Fraction]]:
    return sorted(((i + j, i, j, c) for (i, j), c in coeffs.items()), key=lambda t: t[0])


@dataclass(frozen=True)
class Series2D:
    """Bivariate series ``sum c[i, j] X**i Y**j`` with total-degree truncation.

    Only nonzero coefficients are stored; ``coeff(i, j)`` returns exact zero for
    absent entries within the order.
    """

    terms: Mapping[tuple[int, int], Fraction]
    order: int
    point: tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
    _sorted: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        cleaned = {}
        for (i, j), c in self.terms.items():
            if i < 0 or j < 0:
                raise SeriesError("negative exponent")
            c = _q(c)
            if c and i + j <= self.order:
                cleaned[(i, j)] = c
        object.__setattr__(self, "terms", cleaned)
        object.__setattr__(self, "point", (_q(self.point[0]), _q(self.point[1])))
        object.__setattr__(self, "_sorted", _by_degree(cleaned))

    @classmethod
    def constant(cls, value: Rational, order: int, point=(0, 0)) -> "Series2D":
        return cls({(0, 0): value}, order, point)

    @classmethod
    def from_univariate(cls, s: Series1D, var: int, order: int | None = None, point=(0, 0)) -> "Series2D":
        """Embed a univariate series as a function of X (``var=0``) or Y (``var=1``)."""
        n = s.order if order is None else min(order, s.order)
        key = (lambda k: (k, 0)) if var == 0 else (lambda k: (0, k))
        return cls({key(k): s.coeffs[k] for k in range(n + 1)}, n, point)

    @classmethod
    def polynomial(cls, terms: Mapping[tuple[int, int], Rational], order: int, point=(0, 0)) -> "Series2D":
        return cls(dict(terms), order, point)

    def coeff(self, i: int, j: int) -> Fraction:
        if i + j > self.order:
            raise IndexError(f"({i}, {j}) is beyond total order {self.order}")
        return self.terms.get((i, j), Fraction(0))

    def table(self) -> list[list[Fraction]]:
        """Rectangular ``(order+1) x (order+1)`` table; entries with ``i+j > order`` are None."""
        n = self.order
        return [[self.coeff(i, j) if i + j <= n else None for j in range(n + 1)] for i in range(n + 1)]

    def block(self, degree: int) -> dict[tuple[int, int], Fraction]:
        return {(i, j): c for (i, j), c in self.terms.items() if i + j == degree}

    def truncate(self, order: int) -> "Series2D":
        if order > self.order:
            raise SeriesError(f"cannot extend order {self.order} to {order}")
        return Series2D(self.terms, order, self.point)

    def _check(self, other: "Series2D"):
        if self.point != other.point:
            raise SeriesError(f"expansion points differ: {self.point} vs {other.point}")

    def _coerce(self, other):
        if isinstance(other, Series2D):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Series2D.constant(other, self.order, self.point)
        if isinstance(other, Series1D):
            raise SeriesError("cannot mix univariate and bivariate series")
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return Series2D(out, min(self.order, other.order), self.point)

    __radd__ = __add__

    def __neg__(self):
        return Series2D({k: -c for k, c in self.terms.items()}, self.order, self.point)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Series2D({k: c * other for k, c in self.terms.items()}, self.order, self.point)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        out: dict[tuple[int, int], Fraction] = {}
        b_sorted = other._sorted
        for d1, i1, j1, c1 in self._sorted:
            if d1 > n:
                break
            budget = n - d1
            for d2, i2, j2, c2 in b_sorted:
                if d2 > budget:
                    break
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
        return Series2D(out, n, self.point)

    __rmul__ = __mul__

    def reciprocal(self) -> "Series2D":
        b0 = self.terms.get((0, 0), Fraction(0))
        if b0 == 0:
            raise SeriesDivisionError("constant term is zero; series is not invertible")
        # q = (1/b0) * sum_k (-r)^k with r = b/b0 - 1, which has no constant term
        r = self * (1 / b0) - 1
        q = Series2D.constant(1, self.order, self.point)
        for _ in range(self.order):
            q = 1 - r * q
        return q * (1 / b0)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise SeriesDivisionError("division by zero scalar")
            return self * (1 / _q(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.reciprocal() ** (-n)
        out = Series2D.constant(1, self.order, self.point)
        for _ in range(n):
            out = out * self
        return out

    def diff(self, var: int) -> "Series2D":
        """Formal partial derivative in X (``var=0``) or Y (``var=1``)."""
        if self.order < 1:
            raise SeriesError("cannot differentiate an order-0 series")
        out = {}
        for (i, j), c in self.terms.items():
            if var == 0 and i:
                out[(i - 1, j)] = i * c
            elif var == 1 and j:
                out[(i, j - 1)] = j * c
        return Series2D(out, self.order - 1, self.point)

    def min_degree(self) -> int | None:
        return self._sorted[0][0] if self._sorted else None

    def substitute_second(self, inner: "Series2D") -> "Series2D":
        """Treat self as ``f(X, A)`` about ``A = 0`` and return ``f(X, inner(X, Y))``.

        ``inner`` must have zero constant term and share self's X expansion point.
        """
        if inner.coeff(0, 0) != 0:
            raise SeriesError("inner series must vanish at the expansion point")
        if inner.point[0] != self.point[0]:
            raise SeriesError("X expansion points differ")
        m = inner.min_degree()
        n = inner.order
        if m is None:
            cols = {i: c for (i, j), c in self.terms.items() if j == 0}
            return Series2D({(i, 0): c for i, c in cols.items()}, min(n, self.order), inner.point)
        jmax = min(self.order, n // m)
        # coefficient polynomials c_j(X), as series in (X, Y)
        polys = [
            Series2D({(i, 0): c for (i, jj), c in self.terms.items() if jj == j}, n, inner.point)
            for j in range(jmax + 1)
        ]
        acc = polys[jmax]
        for j in range(jmax - 1, -1, -1):
            acc = acc * inner + polys[j]
        # unknown terms X^i A^j (i + j > self.order) land at degree > self.order
        return acc.truncate(min(n, self.order))

    def is_zero(self) -> bool:
        return not self.terms

    def is_even_in(self, var: int) -> bool:
        return all((k[var] % 2 == 0) for k in self.terms)

    def max_abs_coeff(self) -> Fraction:
        return max((abs(c) for c in self.terms.values()), default=Fraction(0))

    def float_arrays(self) -> np.ndarray:
        """Dense float coefficient table ``c[i, j]`` (zeros above the order)."""
        n = self.order
        arr = np.zeros((n + 1, n + 1))
        for (i, j), c in self.terms.items():
            arr[i, j] = float(c)
        return arr

    def evaluate(self, x, y, *, radius: float | None = DEFAULT_RADIUS, with_error: bool = False):
        """Evaluate at absolute coordinates ``(x, y)``; arrays broadcast."""
        return Evaluator(self, radius).value(x, y, with_error=with_error)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "point": [format_rational(p) for p in self.point],
            "coeffs": {f"{i},{j}": format_rational(c) for (i, j), c in sorted(self.terms.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Series2D":
        terms = {}
        for key, text in data["coeffs"].items():
            i, j = (int(s) for s in key.split(","))
            terms[(i, j)] = parse_rational(text)
        point = tuple(parse_rational(p) for p in data["point"])
        return cls(terms, int(data["order"]), point)


def compose_1d_into_2d(outer: Series1D, inner: Series2D) -> Series2D:
    """Return ``outer(inner(X, Y))`` for an ``outer`` expanded about 0.

    ``inner`` must vanish at its expansion point; re-expansion of ``outer``
    about a nonzero value is not supported.
    """
    if inner.coeff(0, 0) != 0:
        raise SeriesError("inner constant term must equal the outer expansion point (0)")
    m = inner.min_degree()
    if m is None:
        return Series2D.constant(outer.coeffs[0], inner.order, inner.point)
    # an unknown outer term of degree M+1 contributes from total degree (M+1)*m
    n = min(inner.order, (outer.order + 1) * m - 1)
    inner = inner.truncate(n)
    kmax = min(outer.order, n // m)
    acc = Series2D.constant(outer.coeffs[kmax], n, inner.point)
    for k in range(kmax - 1, -1, -1):
        acc = acc * inner + outer.coeffs[k]
    return acc


def compose_1d(outer: Series1D, inner: Series1D) -> Series1D:
    """Univariate composition ``outer(inner(x))``; inner must have zero constant term."""
    if inner.coeffs[0] != 0:
        raise SeriesError("inner constant term must be zero")
    nz = [k for k, c in enumerate(inner.coeffs) if c]
    if not nz:
        return Series1D.constant(outer.coeffs[0], inner.order)
    m = nz[0]
    n = min(inner.order, (outer.order + 1) * m - 1)
    inner = inner.truncate(n)
    kmax = min(outer.order, n // m)
    acc = Series1D.constant(outer.coeffs[kmax], n)
    for k in range(kmax - 1, -1, -1):
        acc = acc * inner + outer.coeffs[k]
    return acc


class Evaluator:
    """Vectorised float evaluation of a :class:`Series2D` and its partial derivatives."""

    def __init__(self, series: Series2D, radius: float | None = DEFAULT_RADIUS):
        self.series = series
        self.radius = radius
        self.x0 = float(series.point[0])
        self.y0 = float(series.point[1])
        self.n = series.order
        self.c = series.float_arrays()

    def _offsets(self, x, y):
        X = np.asarray(x, dtype=float) - self.x0
        Y = np.asarray(y, dtype=float) - self.y0
        X, Y = np.broadcast_arrays(X, Y)
        lim = None if self.radius is None else self.radius * (1 + 1e-12)
        if lim is not None and (np.any(np.abs(X) > lim) or np.any(np.abs(Y) > lim)):
            raise DomainError(f"point outside evaluation radius {self.radius} of {self.series.point}")
        return X, Y

    def _powers(self, v: np.ndarray, k: int) -> np.ndarray:
        # powers[m] holds d^k/dv^k of v^m
        n = self.n
        out = np.zeros((n + 1,) + v.shape)
        for m in range(k, n + 1):
            out[m] = math.perm(m, k) * v ** (m - k)
        return out

    def derivative(self, x, y, dx: int = 0, dy: int = 0) -> np.ndarray:
        X, Y = self._offsets(x, y)
        px = self._powers(X, dx)
        py = self._powers(Y, dy)
        val = np.einsum("ij,i...,j...->...", self.c, px, py)
        return val if val.ndim else float(val)

    def value(self, x, y, *, with_error: bool = False):
        v = self.derivative(x, y)
        if not with_error:
            return v
        X, Y = self._offsets(x, y)
        err = np.zeros_like(X)
        for (i, j), c in self.series.block(self.n).items():
            err = err + abs(float(c)) * np.abs(X) ** i * np.abs(Y) ** j
        return v, (err if err.ndim else float(err))
