"""Super functions on a chart ``R^{2|n} x B`` and their pullbacks.

A :class:`SuperFunction` is a table ``{mask: coefficient}`` where ``mask``
ranges over monomials in fiber and base generators and the coefficients are
backend values (numpy arrays on the torus grid or exact :class:`Poly`).
Odd derivatives are *left* derivatives: ``d/d eta (eta g) = g - eta d/d eta g``.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Number

import numpy as np

from .coeffs import GridBackend, Poly, PolyBackend, max_abs
from .errors import ConfigurationError, NotNormalizedError, UnsupportedError
from .grassmann import GeneratorSet, GrassmannElement, Parity, merge_sign, popcount

EVEN_COORDS = ("x1", "x2")


class SuperFunction:
    """Immutable super function with coefficients in a single backend."""

    __slots__ = ("gens", "backend", "_terms")

    def __init__(self, gens: GeneratorSet, backend, terms=None, _trusted=False):
        self.gens = gens
        self.backend = backend
        if _trusted:
            self._terms = {m: c for m, c in terms.items() if not backend.is_zero(c)}
            return
        clean = {}
        for mask, coef in (terms or {}).items():
            if mask >> gens.count:
                raise ConfigurationError(f"monomial {mask:#x} outside the algebra")
            c = backend.coerce(coef)
            if not backend.is_zero(c):
                clean[mask] = c
        self._terms = clean

    # -- constructors ---------------------------------------------------------
    @classmethod
    def const(cls, gens, backend, value=1):
        if isinstance(value, GrassmannElement):
            return cls(gens, backend, {m: backend.const(c) for m, c in value.items()})
        return cls(gens, backend, {0: backend.const(value)})

    @classmethod
    def zero(cls, gens, backend):
        return cls(gens, backend, {}, _trusted=True)

    @classmethod
    def coordinate(cls, gens, backend, name: str):
        """Coordinate function ``x1``, ``x2`` or fiber generator ``e1``, ``e2``, ..."""
        if name in EVEN_COORDS:
            axis = EVEN_COORDS.index(name)
            if isinstance(backend, PolyBackend):
                val = Poly({(1, 0) if axis == 0 else (0, 1): 1}, backend.max_degree)
            else:
                raise UnsupportedError("x1, x2 are not periodic; the grid backend has no coordinate functions")
            return cls(gens, backend, {0: val})
        return cls(gens, backend, {1 << gens.index(name): backend.const(1)})

    @classmethod
    def from_function(cls, gens, backend, values, monomial=()):
        """``monomial * values`` where ``monomial`` is a tuple of generator labels."""
        sign, mask = gens.mask_of(list(monomial))
        if not sign:
            return cls.zero(gens, backend)
        val = backend.coerce(values)
        return cls(gens, backend, {mask: -val if sign < 0 else val})

    def _new(self, terms):
        return SuperFunction(self.gens, self.backend, terms, _trusted=True)

    # -- inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, mask: int):
        return self._terms.get(mask, self.backend.zero())

    def parity(self) -> Parity:
        odd = {popcount(m) & 1 for m in self._terms}
        if odd == {1}:
            return Parity.ODD
        if len(odd) == 2:
            return Parity.MIXED
        return Parity.EVEN

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def body(self):
        """Coefficient of the empty monomial (an ordinary function)."""
        return self.coefficient(0)

    def max_abs(self) -> float:
        return max((max_abs(c) for c in self._terms.values()), default=0.0)

    def fiber_degree(self) -> int:
        fm = self.gens.fiber_mask
        return max((popcount(m & fm) for m in self._terms), default=0)

    def eta_expansion(self) -> dict:
        """``{fiber_mask: SuperFunction over base generators}`` with ``f = sum eta^S f_S``."""
        fm = self.gens.fiber_mask
        out = {}
        for m, c in self._terms.items():
            out.setdefault(m & fm, {})[m & ~fm] = c
        return {s: self._new(t) for s, t in out.items()}

    def eta_coefficient(self, fiber_mask: int) -> "SuperFunction":
        fm = self.gens.fiber_mask
        return self._new({m & ~fm: c for m, c in self._terms.items() if m & fm == fiber_mask})

    def restrict(self) -> "SuperFunction":
        """Set all fiber generators to zero (pullback along the standard embedding)."""
        fm = self.gens.fiber_mask
        return self._new({m: c for m, c in self._terms.items() if not m & fm})

    def nilpotent(self) -> "SuperFunction":
        return self._new({m: c for m, c in self._terms.items() if m})

    def as_grassmann(self, at=None, ring=None) -> GrassmannElement:
        """Constant super functions as Grassmann elements (grid: sample ``at`` or check constancy)."""
        out = {}
        for m, c in self._terms.items():
            if isinstance(c, Poly):
                if any(k != (0, 0) for k in c.terms):
                    raise ConfigurationError("super function is not constant")
                out[m] = c.terms.get((0, 0), 0)
            else:
                out[m] = c.flat[0] if at is None else c[at]
        ring = ring or ("rational" if isinstance(self.backend, PolyBackend) else "float")
        return GrassmannElement(self.gens, out, ring)

    # -- arithmetic -----------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, SuperFunction):
            if other.gens != self.gens or other.backend != self.backend:
                raise ConfigurationError("super functions live on different charts or backends")
            return other
        if isinstance(other, GrassmannElement):
            if other.gens != self.gens:
                raise ConfigurationError("Grassmann constant from a different algebra")
            return SuperFunction.const(self.gens, self.backend, other)
        if isinstance(other, Number):
            return SuperFunction.const(self.gens, self.backend, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out[m] + c if m in out else c
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out[m] - c if m in out else -c
        return self._new(out)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            if isinstance(self.backend, GridBackend) and isinstance(other, Fraction):
                other = float(other)
            return self._new({m: c * other for m, c in self._terms.items()})
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = {}
        ta, tb = self._terms, other._terms
        for ma, ca in ta.items():
            for mb, cb in tb.items():
                if ma & mb:
                    continue
                val = ca * cb
                key = ma | mb
                if merge_sign(ma, mb) < 0:
                    out[key] = out[key] - val if key in out else -val
                else:
                    out[key] = out[key] + val if key in out else val
        return self._new(out)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other * self

    def __truediv__(self, other):
        if isinstance(other, Number):
            if isinstance(self.backend, PolyBackend):
                return self * (Fraction(1) / Fraction(other))
            return self * (1.0 / other)
        return self * other.inverse()

    def __eq__(self, other):
        if isinstance(other, Number):
            other = SuperFunction.const(self.gens, self.backend, other)
        if not isinstance(other, SuperFunction):
            return NotImplemented
        if other.gens != self.gens or self._terms.keys() != other._terms.keys():
            return False
        for m, c in self._terms.items():
            d = c - other._terms[m]
            if not self.backend.is_zero(d):
                return False
        return True

    __hash__ = None

    def allclose(self, other, atol=1e-10) -> bool:
        return (self - other).max_abs() <= atol

    def map_coefficients(self, fn) -> "SuperFunction":
        return SuperFunction(self.gens, self.backend, {m: fn(c) for m, c in self._terms.items()})

    def inverse(self) -> "SuperFunction":
        """Inverse of an even function with invertible body (finite geometric series)."""
        body = self.body
        if isinstance(self.backend, PolyBackend):
            if any(k != (0, 0) for k in body.terms) or not body.terms:
                raise UnsupportedError("poly backend can only invert functions with a nonzero constant body")
            inv0 = SuperFunction.const(self.gens, self.backend, Fraction(1) / body.terms[(0, 0)])
        else:
            if np.any(body == 0):
                raise ConfigurationError("body of the function vanishes on the grid")
            inv0 = self._new({0: 1.0 / body})
        nil = self.nilpotent()
        out = inv0
        term = inv0
        step = -(nil * inv0)
        while True:
            term = term * step
            if term.is_zero():
                break
            out = out + term
        return out

    def apply_scalar_function(self, derivatives) -> "SuperFunction":
        """``F(self)`` given ``derivatives[k] = F^(k)(body)`` as arrays (Taylor in the nilpotent part)."""
        nil = self.nilpotent()
        out = self._new({0: derivatives[0]})
        power = SuperFunction.const(self.gens, self.backend, 1)
        fact = 1.0
        for k in range(1, len(derivatives)):
            power = power * nil
            if power.is_zero():
                return out
            fact *= k
            out = out + power * self._new({0: derivatives[k] / fact})
        if not (power * nil).is_zero():
            raise ConfigurationError("not enough derivatives supplied for the nilpotent order")
        return out

    # -- derivatives ----------------------------------------------------------
    def d_even(self, axis: int) -> "SuperFunction":
        return d_even(self, axis)

    def d_odd(self, alpha: int) -> "SuperFunction":
        return d_odd(self, alpha)

    def __repr__(self):
        masks = ", ".join(self.gens.monomial_text(m) or "1" for m in sorted(self._terms))
        return f"SuperFunction[{self.backend.name}]({masks})"


def d_even(f: SuperFunction, axis: int) -> SuperFunction:
    """Coefficientwise derivative along ``x^(axis+1)``."""
    if axis not in (0, 1):
        raise ConfigurationError("axis must be 0 or 1")
    return f._new({m: f.backend.diff(c, axis) for m, c in f._terms.items()})


def d_odd(f: SuperFunction, alpha: int) -> SuperFunction:
    """Left derivative along the fiber generator ``eta^(alpha+1)``."""
    bit = f.gens.fiber_bit(alpha)
    below = bit - 1
    out = {}
    for m, c in f._terms.items():
        if m & bit:
            out[m ^ bit] = -c if popcount(m & below) & 1 else c
    return f._new(out)


class SuperMap:
    """A morphism of trivial families given by pullbacks of target coordinates.

    ``images`` maps ``"x1", "x2", "e1", "e2", ...`` to super functions on the
    source chart.  Base generators are mapped to themselves.
    """

    def __init__(self, images: dict, check=True):
        self.images = dict(images)
        first = next(iter(self.images.values()))
        self.gens = first.gens
        self.backend = first.backend
        if check:
            for name, img in self.images.items():
                want = Parity.EVEN if name in EVEN_COORDS else Parity.ODD
                if not img.is_zero() and img.parity() != want:
                    raise ConfigurationError(f"image of {name} must be {want.value}")

    @classmethod
    def identity(cls, gens, backend):
        imgs = {}
        for name in (*EVEN_COORDS, *(f"e{k + 1}" for k in range(gens.n_fiber))):
            imgs[name] = _identity_image(gens, backend, name)
        return cls(imgs)

    def image(self, name: str) -> SuperFunction:
        if name in self.images:
            return self.images[name]
        return _identity_image(self.gens, self.backend, name)

    def compose(self, inner: "SuperMap") -> "SuperMap":
        """``self o inner`` in the sense of pullbacks: ``(self o inner)^# = inner^# self^#``."""
        return SuperMap({k: pullback(inner, v) for k, v in self.images.items()})

    def is_normalized(self) -> bool:
        return all(self.image(f"e{k + 1}").is_zero() for k in range(self.gens.n_fiber))


def _identity_image(gens, backend, name):
    if name in EVEN_COORDS:
        if isinstance(backend, PolyBackend):
            return SuperFunction.coordinate(gens, backend, name)
        return _GridCoordinate(gens, backend, EVEN_COORDS.index(name))
    return SuperFunction.coordinate(gens, backend, name)


class _GridCoordinate(SuperFunction):
    """Marker for the (non-periodic) coordinate x^a on the torus chart.

    Only used as an image in :class:`SuperMap`: its displacement from the
    identity is what gets stored.
    """

    __slots__ = ("axis",)

    def __init__(self, gens, backend, axis, displacement=None):
        super().__init__(gens, backend, {} if displacement is None else displacement._terms, _trusted=True)
        self.axis = axis

    def parity(self):
        return Parity.EVEN


def grid_coordinate_image(gens, backend, axis, displacement: SuperFunction):
    """Image ``x^a + displacement`` for maps on the torus chart (displacement periodic)."""
    return _GridCoordinate(gens, backend, axis, displacement)


def _even_parts(m: SuperMap):
    """Split even images into (body map, nilpotent displacement)."""
    bodies, nils = [], []
    for axis, name in enumerate(EVEN_COORDS):
        img = m.image(name)
        if isinstance(img, _GridCoordinate):
            disp = SuperFunction(img.gens, img.backend, img._terms, _trusted=True)
            bodies.append(("grid", axis, disp.body))
            nils.append(disp.nilpotent())
        else:
            bodies.append(("poly", axis, img.body))
            nils.append(img.nilpotent())
    return bodies, nils


def _compose_body(f: SuperFunction, coef, bodies):
    backend = f.backend
    if isinstance(backend, PolyBackend):
        identity = all(
            b[2] == Poly({(1, 0) if b[1] == 0 else (0, 1): 1}, backend.max_degree) for b in bodies
        )
        if identity:
            return coef
        return backend.compose(coef, bodies[0][2], bodies[1][2])
    disp = [b[2] for b in bodies]
    if all(not np.any(d) for d in disp):
        return coef
    x1, x2 = backend.points()
    return backend.compose(coef, x1 + disp[0], x2 + disp[1])


def pullback(m: SuperMap, f: SuperFunction) -> SuperFunction:
    """Pull ``f`` (on the target chart) back along ``m``.

    Odd coordinates are substituted by their images; coefficient functions
    are composed with the body map and Taylor-expanded in the nilpotent part
    of the even images.
    """
    gens, backend = f.gens, f.backend
    if m.gens != gens or m.backend != backend:
        raise ConfigurationError("map and function live on different charts")
    bodies, nils = _even_parts(m)
    fm = gens.fiber_mask
    # Taylor data for every coefficient: sum_{i,j} (n1^i n2^j)/(i! j!) d1^i d2^j c(body)
    powers1 = [SuperFunction.const(gens, backend, 1)]
    powers2 = [SuperFunction.const(gens, backend, 1)]
    while not powers1[-1].is_zero():
        powers1.append(powers1[-1] * nils[0])
    while not powers2[-1].is_zero():
        powers2.append(powers2[-1] * nils[1])
    powers1.pop()
    powers2.pop()
    odd_images = [m.image(f"e{k + 1}") for k in range(gens.n_fiber)]
    result = SuperFunction.zero(gens, backend)
    fact = [1]
    for k in range(1, 2 * gens.count + 2):
        fact.append(fact[-1] * k)
    for mask, coef in f._terms.items():
        # substituted coefficient c(x'(x))
        sub = SuperFunction.zero(gens, backend)
        for i, p1 in enumerate(powers1):
            for j, p2 in enumerate(powers2):
                d = backend.diff_multi(coef, (i, j)) if (i or j) else coef
                d = _compose_body(f, d, bodies)
                scale = Fraction(1, fact[i] * fact[j])
                term = p1 * p2 * SuperFunction(gens, backend, {0: d}, _trusted=True)
                sub = sub + (term * scale if (i or j) else term)
        # odd monomial: images of fiber generators (ascending), then base generators
        mono = SuperFunction.const(gens, backend, 1)
        for k in range(gens.n_fiber):
            if mask >> k & 1:
                mono = mono * odd_images[k]
        base = mask & ~fm
        if base:
            mono = mono * SuperFunction(gens, backend, {base: backend.const(1)}, _trusted=True)
        result = result + mono * sub
    return result


def restrict_to_even(f: SuperFunction, emb: SuperMap) -> SuperFunction:
    """Pull ``f`` back along an embedding of the underlying even manifold."""
    out = pullback(emb, f)
    if out.fiber_degree():
        raise ConfigurationError("embedding images still contain fiber generators")
    return out


def embedding(gens, backend, odd_images=None) -> SuperMap:
    """Embedding ``i^# x = x, i^# eta^k = odd_images[k]`` (default zero)."""
    imgs = {name: _identity_image(gens, backend, name) for name in EVEN_COORDS}
    for k in range(gens.n_fiber):
        img = (odd_images or {}).get(k) if odd_images else None
        imgs[f"e{k + 1}"] = img if img is not None else SuperFunction.zero(gens, backend)
    for k in range(gens.n_fiber):
        if imgs[f"e{k + 1}"].fiber_degree():
            raise ConfigurationError("embedding images must not contain fiber generators")
    return SuperMap(imgs)


def normalize_embedding(emb: SuperMap) -> SuperMap:
    """Coordinate change ``x~ = x, eta~ = eta - i^# eta`` making ``emb`` normalized.

    The returned map lists the new coordinates as functions of the old ones;
    ``change.compose(emb)`` has vanishing odd images.
    """
    gens, backend = emb.gens, emb.backend
    for name in EVEN_COORDS:
        img = emb.image(name)
        if isinstance(img, _GridCoordinate):
            if img._terms:
                raise ConfigurationError("embedding must satisfy i^# x = x")
        elif img != _identity_image(gens, backend, name):
            raise ConfigurationError("embedding must satisfy i^# x = x")
    imgs = {name: _identity_image(gens, backend, name) for name in EVEN_COORDS}
    for k in range(gens.n_fiber):
        name = f"e{k + 1}"
        imgs[name] = SuperFunction.coordinate(gens, backend, name) - emb.image(name)
    return SuperMap(imgs)


def require_normalized(emb: SuperMap):
    if not emb.is_normalized():
        raise NotNormalizedError("embedding is not normalized; call normalize_embedding first")
