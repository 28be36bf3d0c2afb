"""Random inputs shared by the property tests and the acceptance suite."""
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from supergeom.coeffs import Poly, PolyBackend
from supergeom.grassmann import GeneratorSet, GrassmannElement, Parity
from supergeom.superfield import SuperFunction
from supergeom.supercalc import SuperVectorField

SMALL = GeneratorSet(2, 2)

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=6)
small_ints = st.integers(min_value=-5, max_value=5)


def _masks(gens, parity=None):
    return [m for m in range(1 << gens.count) if parity is None or bin(m).count("1") % 2 == parity]


@st.composite
def grassmann_elements(draw, gens=GeneratorSet(2, 6), parity=None, ring="rational", max_terms=6):
    """Element of ``Lambda_L``; ``parity`` 0/1 restricts to homogeneous elements."""
    masks = draw(st.lists(st.sampled_from(_masks(gens, parity)), max_size=max_terms, unique=True))
    coef = rationals if ring == "rational" else small_ints
    return GrassmannElement(gens, {m: draw(coef) for m in masks}, ring)


@st.composite
def homogeneous(draw, gens=GeneratorSet(2, 6), max_terms=6):
    """``(element, parity bit)``."""
    p = draw(st.integers(0, 1))
    return draw(grassmann_elements(gens, p, max_terms=max_terms)), p


# ---------------------------------------------------------------------------
# seeded numpy generators for the exact super function / vector field checks
# ---------------------------------------------------------------------------
class ExactSampler:
    """Sparse random objects over ``SMALL`` with rational degree-1 coefficients."""

    def __init__(self, seed=0, gens=SMALL, backend=None):
        self.rng = np.random.default_rng(seed)
        self.gens = gens
        self.backend = backend or PolyBackend(8)
        self._by_parity = {p: _masks(gens, p) for p in (0, 1)}

    def rational(self):
        return Fraction(int(self.rng.integers(-3, 4)), int(self.rng.integers(1, 3)))

    def poly(self, degree=1):
        terms = {(i, j): self.rational() for i in range(degree + 1) for j in range(degree + 1 - i)}
        return Poly(terms, self.backend.max_degree)

    def function(self, parity, nterms=2):
        masks = self._by_parity[parity]
        picks = self.rng.choice(len(masks), size=min(nterms, len(masks)), replace=False)
        return SuperFunction(self.gens, self.backend, {masks[int(k)]: self.poly() for k in picks})

    def zero(self):
        return SuperFunction.zero(self.gens, self.backend)

    def vector_field(self, parity, density=0.6):
        n = self.gens.n_fiber
        comps = []
        for k in range(2 + n):
            want = parity if k < 2 else 1 - parity
            comps.append(self.function(want) if self.rng.random() < density else self.zero())
        return SuperVectorField(comps, Parity.ODD if parity else Parity.EVEN)

    def parity(self):
        return int(self.rng.integers(0, 2))

    def element(self, parity, nterms=4, gens=None):
        gens = gens or self.gens
        masks = _masks(gens, parity)
        picks = self.rng.choice(len(masks), size=min(nterms, len(masks)), replace=False)
        return GrassmannElement(gens, {masks[int(k)]: self.rational() for k in picks})


def vf_is_zero(v):
    return all(c.is_zero() for c in v.components)


def jacobi_defect(X, Y, Z, px, py, pz):
    """``(-1)^{xz}[X,[Y,Z]] + (-1)^{yx}[Y,[Z,X]] + (-1)^{zy}[Z,[X,Y]]``."""
    from supergeom.supercalc import supercommutator

    total = None
    for A, B, C, pa, pc in ((X, Y, Z, px, pz), (Y, Z, X, py, px), (Z, X, Y, pz, py)):
        term = supercommutator(A, supercommutator(B, C))
        if pa and pc:
            term = -term
        total = term if total is None else SuperVectorField(
            [a + b for a, b in zip(total.components, term.components)], total.parity, check=False
        )
    return total
