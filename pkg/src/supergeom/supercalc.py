"""Super vector fields, super matrices, Berezinians and Berezin integration."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .coeffs import Poly, PolyBackend
from .errors import ConfigurationError, NotNormalizedError, SingularFrameError
from .grassmann import GrassmannElement, Parity
from .superfield import (
    EVEN_COORDS,
    SuperFunction,
    SuperMap,
    _GridCoordinate,
    d_even,
    d_odd,
    pullback,
)


def coordinate_names(gens) -> tuple:
    return EVEN_COORDS + tuple(f"e{k + 1}" for k in range(gens.n_fiber))


def _parity_bit(p: Parity) -> int:
    if p is Parity.MIXED:
        raise ConfigurationError("operation needs a homogeneous parity")
    return 1 if p is Parity.ODD else 0


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------
class SuperVectorField:
    """Derivation ``sum_A v^A d_A`` with components along ``d_x1, d_x2, d_e1, d_e2, ...``."""

    __slots__ = ("components", "parity")

    def __init__(self, components, parity: Parity = Parity.EVEN, check=True):
        self.components = tuple(components)
        self.parity = parity
        if check:
            if parity is Parity.MIXED:
                raise ConfigurationError("vector fields must have homogeneous parity")
            gens = self.components[0].gens
            if len(self.components) != 2 + gens.n_fiber:
                raise ConfigurationError("a vector field needs one component per coordinate")
            for k, c in enumerate(self.components):
                if c.is_zero():
                    continue
                want = parity if k < 2 else (Parity.ODD if parity is Parity.EVEN else Parity.EVEN)
                if c.parity() is not want:
                    raise ConfigurationError(
                        f"component {k} of a {parity.value} vector field must be {want.value}"
                    )

    @property
    def gens(self):
        return self.components[0].gens

    @property
    def backend(self):
        return self.components[0].backend

    @classmethod
    def coordinate(cls, gens, backend, index: int) -> "SuperVectorField":
        comps = [SuperFunction.zero(gens, backend) for _ in range(2 + gens.n_fiber)]
        comps[index] = SuperFunction.const(gens, backend, 1)
        return cls(comps, Parity.EVEN if index < 2 else Parity.ODD)

    def __call__(self, f: SuperFunction) -> SuperFunction:
        return apply(self, f)

    def __add__(self, other: "SuperVectorField"):
        if other.parity is not self.parity:
            raise ConfigurationError("cannot add vector fields of different parity")
        return SuperVectorField([a + b for a, b in zip(self.components, other.components)], self.parity, False)

    def __sub__(self, other: "SuperVectorField"):
        if other.parity is not self.parity:
            raise ConfigurationError("cannot subtract vector fields of different parity")
        return SuperVectorField([a - b for a, b in zip(self.components, other.components)], self.parity, False)

    def __neg__(self):
        return SuperVectorField([-a for a in self.components], self.parity, False)

    def scale(self, f) -> "SuperVectorField":
        """Left multiplication ``f * v``; ``f`` a number or homogeneous super function."""
        if isinstance(f, SuperFunction):
            par = Parity.EVEN if f.is_zero() else f.parity()
            if par is Parity.MIXED:
                raise ConfigurationError("coefficient must be homogeneous")
            new = self.parity if par is Parity.EVEN else (Parity.ODD if self.parity is Parity.EVEN else Parity.EVEN)
            return SuperVectorField([f * c for c in self.components], new, False)
        return SuperVectorField([c * f for c in self.components], self.parity, False)

    def restrict(self) -> "SuperVectorField":
        return SuperVectorField([c.restrict() for c in self.components], self.parity, False)

    def allclose(self, other, atol=1e-10) -> bool:
        return all(a.allclose(b, atol) for a, b in zip(self.components, other.components))

    def max_abs(self) -> float:
        return max(c.max_abs() for c in self.components)


def apply(v: SuperVectorField, f: SuperFunction) -> SuperFunction:
    out = SuperFunction.zero(f.gens, f.backend)
    for k, c in enumerate(v.components):
        if c.is_zero():
            continue
        d = d_even(f, k) if k < 2 else d_odd(f, k - 2)
        if not d.is_zero():
            out = out + c * d
    return out


def supercommutator(v: SuperVectorField, w: SuperVectorField) -> SuperVectorField:
    """``[v, w] = v o w - (-1)^{|v||w|} w o v``."""
    pv, pw = _parity_bit(v.parity), _parity_bit(w.parity)
    sign = -1 if pv and pw else 1
    comps = []
    for a, b in zip(v.components, w.components):
        comps.append(apply(v, b) + apply(w, a) if sign < 0 else apply(v, b) - apply(w, a))
    par = Parity.ODD if (pv + pw) % 2 else Parity.EVEN
    return SuperVectorField(comps, par, False)


# ---------------------------------------------------------------------------
# super matrices
# ---------------------------------------------------------------------------
def _body_invertible(x) -> bool:
    if isinstance(x, GrassmannElement):
        return x.body != 0
    body = x.body
    if isinstance(body, Poly):
        return bool(body.terms) and all(k == (0, 0) for k in body.terms)
    return bool(np.all(np.abs(body) > 1e-14))


def _zero_like(x):
    return x * 0


def _det(rows):
    """Determinant of a square matrix with pairwise commuting (even) entries."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = None
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = rows[0][perm[0]]
        for i in range(1, n):
            term = term * rows[i][perm[i]]
        term = -term if inv % 2 else term
        total = term if total is None else total + term
    return total


def _even_inverse(rows):
    """Inverse of an even square matrix via the adjugate."""
    n = len(rows)
    det = _det(rows)
    if not _body_invertible(det):
        raise SingularFrameError("even block is not invertible at the body")
    dinv = det.inverse()
    if n == 1:
        return [[dinv]]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[rows[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            cof = _det(minor) if n > 2 else minor[0][0]
            out[i][j] = cof * dinv if (i + j) % 2 == 0 else -(cof * dinv)
    return out


def _matmul(a, b):
    n, m, k = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            acc = a[i][0] * b[0][j]
            for l in range(1, m):
                acc = acc + a[i][l] * b[l][j]
            row.append(acc)
        out.append(row)
    return out


def _matsub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _matadd(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _matneg(a):
    return [[-x for x in r] for r in a]


@dataclass
class SuperMatrix:
    """Block matrix ``[[A, B], [C, D]]``; ``A``/``D`` even, ``B``/``C`` odd entries.

    ``rows`` is the full ``(p+q) x (p+q)`` list of entries; the first ``p``
    rows/columns are even.
    """

    rows: list
    p: int

    def __post_init__(self):
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ConfigurationError("super matrix must be square")
        for i, r in enumerate(self.rows):
            for j, x in enumerate(r):
                if x.is_zero():
                    continue
                want = Parity.EVEN if (i < self.p) == (j < self.p) else Parity.ODD
                if x.parity() is not want:
                    raise ConfigurationError(f"entry ({i},{j}) must be {want.value}")

    @property
    def size(self) -> int:
        return len(self.rows)

    def blocks(self):
        p = self.p
        A = [r[:p] for r in self.rows[:p]]
        B = [r[p:] for r in self.rows[:p]]
        C = [r[:p] for r in self.rows[p:]]
        D = [r[p:] for r in self.rows[p:]]
        return A, B, C, D

    @classmethod
    def from_blocks(cls, A, B, C, D):
        rows = [ra + rb for ra, rb in zip(A, B)] + [rc + rd for rc, rd in zip(C, D)]
        return cls(rows, len(A))

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        if other.p != self.p or other.size != self.size:
            raise ConfigurationError("super matrices of different shape")
        return SuperMatrix(_matmul(self.rows, other.rows), self.p)

    def inverse(self) -> "SuperMatrix":
        A, B, C, D = self.blocks()
        if not D:
            return SuperMatrix(_even_inverse(A), self.p)
        if not A:
            return SuperMatrix(_even_inverse(D), self.p)
        Dinv = _even_inverse(D)
        S = _matsub(A, _matmul(_matmul(B, Dinv), C))
        Sinv = _even_inverse(S)
        BDinv = _matmul(B, Dinv)
        DinvC = _matmul(Dinv, C)
        top_right = _matneg(_matmul(Sinv, BDinv))
        bottom_left = _matneg(_matmul(DinvC, Sinv))
        bottom_right = _matadd(Dinv, _matmul(_matmul(DinvC, Sinv), BDinv))
        return SuperMatrix.from_blocks(Sinv, top_right, bottom_left, bottom_right)


def berezinian(m: SuperMatrix):
    """``Ber = det(A - B D^-1 C) / det(D)``."""
    A, B, C, D = m.blocks()
    if not D:
        return _det(A)
    detD = _det(D)
    if not _body_invertible(detD):
        raise SingularFrameError("odd-odd block is not invertible at the body")
    if not A:
        return detD.inverse()
    S = _matsub(A, _matmul(_matmul(B, _even_inverse(D)), C))
    return _det(S) * detD.inverse()


# ---------------------------------------------------------------------------
# frames and structure coefficients
# ---------------------------------------------------------------------------
def frame_matrix(frames) -> SuperMatrix:
    """Rows are frame fields, columns coordinate directions: ``M[A][B] = F_A^B``."""
    p = sum(1 for f in frames if f.parity is Parity.EVEN)
    if any(f.parity is not Parity.EVEN for f in frames[:p]):
        raise ConfigurationError("even frame fields must come first")
    return SuperMatrix([list(f.components) for f in frames], p)


def frame_inverse(frames) -> SuperMatrix:
    try:
        return frame_matrix(frames).inverse()
    except SingularFrameError as exc:
        raise SingularFrameError(f"frame is degenerate: {exc}") from None


def expand_in_frame(w: SuperVectorField, inv: SuperMatrix) -> list:
    """Coefficients ``t^C`` with ``w = t^C F_C`` given the inverse frame matrix."""
    n = inv.size
    out = []
    for c in range(n):
        acc = w.components[0] * inv.rows[0][c]
        for d in range(1, n):
            acc = acc + w.components[d] * inv.rows[d][c]
        out.append(acc)
    return out


def structure_coefficients(frames) -> dict:
    """``{(A, B): [t_AB^C for C]}`` for all ``A <= B`` (0-based frame indices)."""
    inv = frame_inverse(frames)
    table = {}
    for a in range(len(frames)):
        for b in range(a, len(frames)):
            table[(a, b)] = expand_in_frame(supercommutator(frames[a], frames[b]), inv)
    return table


def frame_berezinian(frames):
    return berezinian(frame_matrix(frames))


# ---------------------------------------------------------------------------
# densities and integration
# ---------------------------------------------------------------------------
@dataclass
class BerezinDensity:
    """``rho * [dx1 dx2 de1 de2]`` in chart coordinates."""

    rho: SuperFunction


def top_sign(n_fiber: int) -> int:
    """Sign relating ``eta^n ... eta^1`` to the canonical ascending monomial."""
    return -1 if (n_fiber * (n_fiber - 1) // 2) % 2 else 1


def top_coefficient(f: SuperFunction) -> SuperFunction:
    """Coefficient ``g`` of ``eta^n ... eta^1 g`` (a function of x and base generators)."""
    gens = f.gens
    part = f.eta_coefficient(gens.fiber_mask)
    return part if top_sign(gens.n_fiber) > 0 else -part


def _scalar_ring(backend, values) -> str:
    if isinstance(backend, PolyBackend):
        return "rational"
    return "complex" if any(np.iscomplexobj(v) for v in values) else "float"


def integrate_even(f: SuperFunction) -> GrassmannElement:
    """Integrate every base-monomial coefficient of an even-chart function."""
    if f.fiber_degree():
        raise ConfigurationError("integrand still depends on fiber generators")
    vals = {m: f.backend.integrate(c) for m, c in f.items()}
    return GrassmannElement(f.gens, vals, _scalar_ring(f.backend, [c for _, c in f.items()]))


def berezin_integrate(b: BerezinDensity) -> GrassmannElement:
    return integrate_even(top_coefficient(b.rho))


def reduce_to_even(b: BerezinDensity, emb: SuperMap) -> SuperFunction:
    """Pointwise density ``|b|`` on the even chart for a normalized embedding."""
    if not emb.is_normalized():
        raise NotNormalizedError("reduce_to_even needs a normalized embedding (i^# eta = 0)")
    return top_coefficient(b.rho)


def jacobian(m: SuperMap) -> SuperMatrix:
    """``J[B][A] = d_{Y^B} (m^# X^A)``: rows source coordinates, columns target coordinates."""
    gens, backend = m.gens, m.backend
    names = coordinate_names(gens)
    rows = []
    for b in range(len(names)):
        row = []
        for name in names:
            img = m.image(name)
            if isinstance(img, _GridCoordinate):
                disp = SuperFunction(gens, backend, img._terms, _trusted=True)
                d = d_even(disp, b) if b < 2 else d_odd(disp, b - 2)
                if b == img.axis:
                    d = d + 1
            else:
                d = d_even(img, b) if b < 2 else d_odd(img, b - 2)
            row.append(d)
        rows.append(row)
    return SuperMatrix(rows, 2)


def transform_density(b: BerezinDensity, m: SuperMap) -> BerezinDensity:
    """Density in source coordinates: ``m^# rho * Ber(J)``, so that integrals agree."""
    return BerezinDensity(pullback(m, b.rho) * berezinian(jacobian(m)))


def divergence(v: SuperVectorField, b: BerezinDensity) -> SuperFunction:
    """``Div v = rho^-1 sum_A (-1)^{|A|(|v|+1)} d_A (v^A rho)``."""
    pv = _parity_bit(v.parity)
    rho = b.rho
    acc = SuperFunction.zero(rho.gens, rho.backend)
    for k, c in enumerate(v.components):
        if c.is_zero():
            continue
        prod = c * rho
        if k < 2:
            acc = acc + d_even(prod, k)
        else:
            term = d_odd(prod, k - 2)
            acc = acc - term if (pv + 1) % 2 else acc + term
    return rho.inverse() * acc


def lie_derivative_density(v: SuperVectorField, b: BerezinDensity) -> BerezinDensity:
    return BerezinDensity(divergence(v, b) * b.rho)
