"""Finite Grassmann algebras over a choice of scalar ring.

Monomials are stored as integer bitmasks: generator ``k`` of a
:class:`GeneratorSet` is bit ``k`` and a mask stands for the product of its
generators in ascending order.  Fiber generators (``e1, e2, ...``) always
occupy the low bits, base generators (``b1, b2, ...``) the bits above them,
so ``eta^S beta^T`` is already in canonical order.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Number

from .errors import ConfigurationError

MAX_GENERATORS = 62


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"


@lru_cache(maxsize=1 << 16)
def merge_sign(a: int, b: int) -> int:
    """Sign of ``e_a * e_b = sign * e_(a|b)`` for disjoint ascending monomials."""
    count = 0
    rest = b
    while rest:
        low = rest & -rest
        count += bin(a >> low.bit_length()).count("1")
        rest ^= low
    return -1 if count & 1 else 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def graded_product(terms_a, terms_b, mul=None):
    """Product of two term tables ``{mask: coefficient}`` with the sign rule."""
    out = {}
    for ma, ca in terms_a.items():
        for mb, cb in terms_b.items():
            if ma & mb:
                continue
            val = ca * cb if mul is None else mul(ca, cb)
            if merge_sign(ma, mb) < 0:
                val = -val
            key = ma | mb
            if key in out:
                out[key] = out[key] + val
            else:
                out[key] = val
    return out


@dataclass(frozen=True)
class GeneratorSet:
    """Odd generators: ``n_fiber`` fiber generators followed by ``n_base`` base ones."""

    n_fiber: int = 2
    n_base: int = 6

    def __post_init__(self):
        if self.n_fiber < 0 or self.n_base < 0:
            raise ConfigurationError("generator counts must be non-negative")
        if self.count > MAX_GENERATORS:
            raise ConfigurationError(f"at most {MAX_GENERATORS} generators are supported")

    @property
    def count(self) -> int:
        return self.n_fiber + self.n_base

    @property
    def labels(self) -> tuple:
        return tuple(f"e{k + 1}" for k in range(self.n_fiber)) + tuple(
            f"b{k + 1}" for k in range(self.n_base)
        )

    @property
    def fiber_mask(self) -> int:
        return (1 << self.n_fiber) - 1

    @property
    def base_mask(self) -> int:
        return ((1 << self.count) - 1) ^ self.fiber_mask

    def fiber_bit(self, alpha: int) -> int:
        """Bit of fiber generator ``alpha`` (0-based)."""
        if not 0 <= alpha < self.n_fiber:
            raise ConfigurationError(f"no fiber generator with index {alpha}")
        return 1 << alpha

    def base_bit(self, k: int) -> int:
        """Bit of base generator ``k`` (0-based)."""
        if not 0 <= k < self.n_base:
            raise ConfigurationError(f"no base generator with index {k}")
        return 1 << (self.n_fiber + k)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ConfigurationError(f"unknown generator label {label!r}") from None

    def mask_of(self, labels) -> tuple:
        """Canonical ``(sign, mask)`` of the ordered product of the given labels."""
        sign, mask = 1, 0
        for lab in labels:
            bit = 1 << self.index(lab)
            if mask & bit:
                return 0, 0
            sign *= merge_sign(mask, bit)
            mask |= bit
        return sign, mask

    def monomial_text(self, mask: int) -> str:
        return "^".join(lab for k, lab in enumerate(self.labels) if mask >> k & 1)


RINGS = ("rational", "float", "complex")


def coerce_scalar(value, ring: str):
    if ring == "rational":
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, float):
            raise ConfigurationError("float coefficient in the exact rational ring")
        if isinstance(value, complex):
            raise ConfigurationError("complex coefficient in the exact rational ring")
        return Fraction(value)
    if ring == "float":
        if isinstance(value, complex):
            if value.imag:
                raise ConfigurationError("complex coefficient in the real float ring")
            value = value.real
        return float(value)
    if ring == "complex":
        return complex(value)
    raise ConfigurationError(f"unknown scalar ring {ring!r}")


class GrassmannElement:
    """Immutable element of the Grassmann algebra over ``gens`` with scalars in ``ring``."""

    __slots__ = ("gens", "ring", "_terms")

    def __init__(self, gens: GeneratorSet, terms=None, ring: str = "rational"):
        if ring not in RINGS:
            raise ConfigurationError(f"unknown scalar ring {ring!r}")
        self.gens = gens
        self.ring = ring
        clean = {}
        for mask, coef in (terms or {}).items():
            if mask >> gens.count:
                raise ConfigurationError(f"monomial {mask:#x} outside the algebra")
            c = coerce_scalar(coef, ring)
            if c != 0:
                clean[mask] = c
        self._terms = clean

    # -- constructors ---------------------------------------------------------
    @classmethod
    def scalar(cls, gens, value, ring="rational"):
        return cls(gens, {0: value}, ring)

    @classmethod
    def generator(cls, gens, label, ring="rational"):
        return cls(gens, {1 << gens.index(label): 1}, ring)

    @classmethod
    def monomial(cls, gens, labels, coef=1, ring="rational"):
        sign, mask = gens.mask_of(labels)
        return cls(gens, {mask: sign * coef} if sign else {}, ring)

    # -- inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient_of(self, subset):
        """Coefficient of a monomial given as a mask or an iterable of labels."""
        if isinstance(subset, int):
            return self._terms.get(subset, coerce_scalar(0, self.ring))
        sign, mask = self.gens.mask_of(list(subset))
        if not sign:
            return coerce_scalar(0, self.ring)
        return sign * self._terms.get(mask, coerce_scalar(0, self.ring))

    def parity(self) -> Parity:
        odd = {popcount(m) & 1 for m in self._terms}
        if odd == {1}:
            return Parity.ODD
        if len(odd) == 2:
            return Parity.MIXED
        return Parity.EVEN

    @property
    def body(self):
        return self._terms.get(0, coerce_scalar(0, self.ring))

    def is_zero(self) -> bool:
        return not self._terms

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def to_ring(self, ring: str) -> "GrassmannElement":
        if ring == "rational" and self.ring != "rational":
            raise ConfigurationError("cannot convert inexact scalars to the rational ring")
        return GrassmannElement(self.gens, self._terms, ring)

    # -- arithmetic -----------------------------------------------------------
    def _check(self, other: "GrassmannElement"):
        if other.gens != self.gens:
            raise ConfigurationError("Grassmann elements belong to different algebras")
        if other.ring != self.ring:
            raise ConfigurationError(
                f"scalar rings differ ({self.ring} vs {other.ring}); convert explicitly"
            )

    def _lift(self, other):
        if isinstance(other, GrassmannElement):
            self._check(other)
            return other
        if isinstance(other, Number):
            return GrassmannElement(self.gens, {0: other}, self.ring)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return GrassmannElement(self.gens, out, self.ring)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.gens, {m: -c for m, c in self._terms.items()}, self.ring)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            s = coerce_scalar(other, self.ring)
            return GrassmannElement(self.gens, {m: c * s for m, c in self._terms.items()}, self.ring)
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        self._check(other)
        return GrassmannElement(self.gens, graded_product(self._terms, other._terms), self.ring)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            if self.ring == "rational":
                return self * (Fraction(1) / Fraction(other))
            return self * (1 / other)
        return self * other.inverse()

    def inverse(self) -> "GrassmannElement":
        """Inverse of an element with nonzero body (finite geometric series)."""
        body = self.body
        if body == 0:
            raise ZeroDivisionError("Grassmann element with zero body is not invertible")
        inv0 = Fraction(1) / body if self.ring == "rational" else 1 / body
        nil = GrassmannElement(self.gens, {m: c for m, c in self._terms.items() if m}, self.ring)
        step = nil * (-inv0)
        out = GrassmannElement(self.gens, {0: inv0}, self.ring)
        term = out
        while True:
            term = term * step
            if term.is_zero():
                return out
            out = out + term

    def __eq__(self, other):
        if isinstance(other, Number):
            other = GrassmannElement(self.gens, {0: other}, self.ring)
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self.gens == other.gens and self._terms == other._terms

    def __hash__(self):
        return hash((self.gens, frozenset(self._terms.items())))

    def allclose(self, other: "GrassmannElement", atol: float = 1e-12) -> bool:
        diff = self - other.to_ring(self.ring) if other.ring != self.ring else self - other
        return diff.max_abs() <= atol

    # -- text format ----------------------------------------------------------
    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mask in sorted(self._terms, key=lambda m: (popcount(m), m)):
            coef = self._terms[mask]
            mono = self.gens.monomial_text(mask)
            neg = _is_negative(coef)
            mag = -coef if neg else coef
            if not mono:
                body = _fmt(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{_fmt(mag)}*{mono}"
            parts.append(("- " if neg else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self):
        return f"GrassmannElement({self.to_text()!r}, ring={self.ring!r})"

    @classmethod
    def from_text(cls, gens: GeneratorSet, text: str, ring: str = "rational"):
        return cls(gens, parse_terms(gens, text, ring), ring)


def _is_negative(c) -> bool:
    if isinstance(c, complex):
        return c.real < 0 or (c.real == 0 and c.imag < 0)
    return c < 0


def _fmt(c) -> str:
    if isinstance(c, complex):
        return f"({c.real!r}{c.imag:+}j)"
    return str(c)


_TERM_SPLIT = re.compile(r"\s*([+-])\s*")


def _parse_number(tok: str, ring: str):
    tok = tok.strip()
    if ring == "rational":
        return Fraction(tok)
    if ring == "complex":
        return complex(tok.replace("i", "j"))
    return float(tok)


def parse_terms(gens: GeneratorSet, text: str, ring: str) -> dict:
    """Parse ``"3 + 2*b1^b2 - e1^e2"`` into a canonical ``{mask: coefficient}`` table."""
    src = text.strip()
    if not src:
        raise ConfigurationError("empty Grassmann expression")
    # protect signs inside parenthesised complex numbers and exponents
    pieces, depth, cur = [], 0, ""
    for ch in src:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and cur.strip() and not cur.rstrip().endswith(("e", "E", "*")):
            pieces.append(cur)
            cur = ch
        else:
            cur += ch
    pieces.append(cur)
    out = {}
    for piece in pieces:
        piece = piece.strip()
        sign = 1
        while piece and piece[0] in "+-":
            if piece[0] == "-":
                sign = -sign
            piece = piece[1:].strip()
        if not piece:
            raise ConfigurationError(f"malformed term in {text!r}")
        coef_tok, mono_tok = "1", ""
        if "*" in piece:
            coef_tok, mono_tok = piece.split("*", 1)
        elif piece[0].isalpha() and piece[0] in "eb" and piece[1:2].isdigit():
            mono_tok = piece
        else:
            coef_tok = piece
        try:
            coef = _parse_number(coef_tok.strip("() ") if ring != "complex" else coef_tok, ring)
        except (ValueError, ZeroDivisionError):
            raise ConfigurationError(f"bad coefficient {coef_tok!r} in {text!r}") from None
        labels = [lab.strip() for lab in mono_tok.split("^")] if mono_tok else []
        msign, mask = gens.mask_of(labels)
        if not msign:
            continue
        out[mask] = out.get(mask, 0) + sign * msign * coef
    return out
