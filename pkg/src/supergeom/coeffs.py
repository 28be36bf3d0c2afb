"""Coefficient-function backends for super functions.

Two backends exist:

* :class:`GridBackend` -- samples on an ``N x N`` grid of the torus
  ``[0, 2pi)^2`` with FFT differentiation.  Values are plain numpy arrays.
* :class:`PolyBackend` -- exact rational polynomials in ``x1, x2`` of bounded
  total degree.  Values are :class:`Poly` instances.

Super functions store raw backend values and call the backend only for the
operations that are not plain ring arithmetic (derivatives, integrals,
composition with a body map).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number

import numpy as np

from .errors import ConfigurationError, DegreeOverflowError, UnsupportedError


class Poly:
    """Exact rational polynomial in ``x1, x2`` with total degree at most ``max_degree``."""

    __slots__ = ("terms", "max_degree")

    def __init__(self, terms=None, max_degree: int = 8):
        self.max_degree = max_degree
        clean = {}
        for (i, j), c in (terms or {}).items():
            if c == 0:
                continue
            if i + j > max_degree:
                raise DegreeOverflowError(
                    f"monomial x1^{i} x2^{j} exceeds the degree bound {max_degree}"
                )
            if isinstance(c, float):
                raise ConfigurationError("float coefficient in an exact polynomial")
            clean[(i, j)] = Fraction(c)
        self.terms = clean

    @classmethod
    def const(cls, c, max_degree=8):
        return cls({(0, 0): c}, max_degree)

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def _bound(self, other):
        return max(self.max_degree, other.max_degree)

    def __add__(self, other):
        if isinstance(other, Number):
            other = Poly.const(other, self.max_degree)
        if not isinstance(other, Poly):
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return Poly(out, self._bound(other))

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -c for k, c in self.terms.items()}, self.max_degree)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            if isinstance(other, (float, complex)):
                raise ConfigurationError("inexact scalar times an exact polynomial")
            return Poly({k: c * other for k, c in self.terms.items()}, self.max_degree)
        if not isinstance(other, Poly):
            return NotImplemented
        bound = self._bound(other)
        if self.terms and other.terms and self.degree + other.degree > bound:
            raise DegreeOverflowError(
                f"product of degrees {self.degree} and {other.degree} exceeds the bound {bound}"
            )
        out = {}
        for (i, j), a in self.terms.items():
            for (k, m), b in other.terms.items():
                key = (i + k, j + m)
                out[key] = out.get(key, 0) + a * b
        return Poly(out, bound)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number) and not isinstance(other, (float, complex)):
            return self * (Fraction(1) / Fraction(other))
        raise UnsupportedError("polynomials can only be divided by exact scalars")

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Poly.const(other, self.max_degree)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        body = " + ".join(f"{c}*x1^{i}*x2^{j}" for (i, j), c in sorted(self.terms.items()))
        return f"Poly({body})"

    def diff(self, axis: int) -> "Poly":
        out = {}
        for (i, j), c in self.terms.items():
            e = (i, j)[axis]
            if e == 0:
                continue
            key = (i - 1, j) if axis == 0 else (i, j - 1)
            out[key] = c * e
        return Poly(out, self.max_degree)

    def integrate_box(self, box) -> Fraction:
        (a1, b1), (a2, b2) = box
        a1, b1, a2, b2 = (Fraction(v) for v in (a1, b1, a2, b2))
        total = Fraction(0)
        for (i, j), c in self.terms.items():
            total += c * (b1 ** (i + 1) - a1 ** (i + 1)) / (i + 1) * (b2 ** (j + 1) - a2 ** (j + 1)) / (j + 1)
        return total

    def evaluate(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape)
        for (i, j), c in self.terms.items():
            out = out + float(c) * x1**i * x2**j
        return out

    def compose(self, p1: "Poly", p2: "Poly") -> "Poly":
        """Substitute ``x1 -> p1, x2 -> p2``."""
        bound = max(self.max_degree, p1.max_degree, p2.max_degree)
        one = Poly.const(1, bound)
        pow1, pow2 = [one], [one]
        out = Poly({}, bound)
        for (i, j), c in self.terms.items():
            while len(pow1) <= i:
                pow1.append(pow1[-1] * p1)
            while len(pow2) <= j:
                pow2.append(pow2[-1] * p2)
            out = out + pow1[i] * pow2[j] * c
        return out


@dataclass(frozen=True)
class GridBackend:
    """Spectral backend on the torus ``[0, 2pi)^2`` sampled at ``n x n`` points."""

    n: int = 32
    name: str = field(default="grid", init=False)

    def __post_init__(self):
        if self.n < 4 or self.n & (self.n - 1):
            raise ConfigurationError("grid size must be a power of two >= 4")

    @property
    def spacing(self) -> float:
        return 2 * math.pi / self.n

    def points(self):
        x = np.arange(self.n) * self.spacing
        return np.meshgrid(x, x, indexing="ij")

    def wavenumbers(self):
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return np.meshgrid(k, k, indexing="ij")

    def zero(self):
        return np.zeros((self.n, self.n))

    def const(self, value):
        if isinstance(value, Fraction):
            value = float(value)
        return np.full((self.n, self.n), value, dtype=complex if isinstance(value, complex) else float)

    def coerce(self, value):
        if isinstance(value, Poly):
            return value.evaluate(*self.points())
        if isinstance(value, Number):
            return self.const(value)
        arr = np.asarray(value)
        if arr.shape != (self.n, self.n):
            raise ConfigurationError(f"grid coefficient has shape {arr.shape}, expected {(self.n, self.n)}")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("grid coefficient contains non-finite samples")
        return arr.astype(complex) if np.iscomplexobj(arr) else arr.astype(float)

    @staticmethod
    def is_zero(value) -> bool:
        return not np.any(value)

    def diff(self, value, axis: int):
        spec = np.fft.fft2(value)
        k = self.wavenumbers()[axis]
        if self.n % 2 == 0:
            k = np.where(np.abs(k) == self.n // 2, 0.0, k)
        out = np.fft.ifft2(1j * k * spec)
        return out if np.iscomplexobj(value) else out.real

    def diff_multi(self, value, orders):
        i, j = orders
        spec = np.fft.fft2(value)
        k1, k2 = self.wavenumbers()
        if self.n % 2 == 0:
            nyq = self.n // 2
            if i % 2:
                k1 = np.where(np.abs(k1) == nyq, 0.0, k1)
            if j % 2:
                k2 = np.where(np.abs(k2) == nyq, 0.0, k2)
        out = np.fft.ifft2((1j * k1) ** i * (1j * k2) ** j * spec)
        return out if np.iscomplexobj(value) else out.real

    def integrate(self, value):
        total = complex(np.sum(value)) * self.spacing**2
        return total if np.iscomplexobj(value) else total.real

    def compose(self, value, y1, y2):
        """Evaluate the trigonometric interpolant of ``value`` at the points ``(y1, y2)``."""
        n = self.n
        spec = np.fft.fft2(value) / n**2
        k = np.fft.fftfreq(n, d=1.0 / n)
        if n % 2 == 0:
            # split the Nyquist mode symmetrically so real data stays real
            half = n // 2
            k = k.copy()
            k[half] = half
        e1 = np.exp(1j * np.multiply.outer(np.ravel(y1), k))
        e2 = np.exp(1j * np.multiply.outer(np.ravel(y2), k))
        if n % 2 == 0:
            e1[:, n // 2] = np.cos(half * np.ravel(y1))
            e2[:, n // 2] = np.cos(half * np.ravel(y2))
        vals = np.einsum("pk,kl,pl->p", e1, spec, e2)
        vals = vals.reshape(np.shape(y1))
        return vals if np.iscomplexobj(value) else vals.real

    def to_numpy(self, value):
        return np.asarray(value)


@dataclass(frozen=True)
class PolyBackend:
    """Exact backend: rational polynomials of total degree <= ``max_degree``.

    ``box`` is the integration domain ``((a1, b1), (a2, b2))``; without it
    integration raises.
    """

    max_degree: int = 8
    box: tuple | None = None
    name: str = field(default="poly", init=False)

    def zero(self):
        return Poly({}, self.max_degree)

    def const(self, value):
        if isinstance(value, (float, complex)):
            raise ConfigurationError("inexact scalar in the exact polynomial backend")
        return Poly.const(value, self.max_degree)

    def coerce(self, value):
        if isinstance(value, Poly):
            if value.max_degree != self.max_degree:
                return Poly(value.terms, self.max_degree)
            return value
        if isinstance(value, Number):
            return self.const(value)
        if isinstance(value, dict):
            return Poly(value, self.max_degree)
        raise ConfigurationError(f"cannot use {type(value).__name__} as a polynomial coefficient")

    @staticmethod
    def is_zero(value) -> bool:
        return not value.terms

    @staticmethod
    def diff(value, axis: int):
        return value.diff(axis)

    def diff_multi(self, value, orders):
        out = value
        for _ in range(orders[0]):
            out = out.diff(0)
        for _ in range(orders[1]):
            out = out.diff(1)
        return out

    def integrate(self, value):
        if self.box is None:
            raise ConfigurationError("poly backend needs a declared integration box")
        return value.integrate_box(self.box)

    def compose(self, value, y1, y2):
        if not isinstance(y1, Poly) or not isinstance(y2, Poly):
            raise UnsupportedError("poly backend can only substitute polynomial body maps")
        return value.compose(y1, y2)

    def to_numpy(self, value, points):
        return value.evaluate(*points)


def max_abs(value) -> float:
    if isinstance(value, Poly):
        return float(max((abs(c) for c in value.terms.values()), default=0))
    return float(np.max(np.abs(value))) if np.size(value) else 0.0
