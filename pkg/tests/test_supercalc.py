import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from supergeom.coeffs import GridBackend, Poly, PolyBackend
from supergeom.errors import NotNormalizedError, SingularFrameError
from supergeom.grassmann import GeneratorSet, GrassmannElement, Parity
from supergeom.sampling import FieldSampler
from supergeom.superfield import SuperFunction, SuperMap, embedding, grid_coordinate_image
from supergeom.supercalc import (
    BerezinDensity,
    SuperMatrix,
    SuperVectorField,
    apply,
    berezin_integrate,
    berezinian,
    divergence,
    jacobian,
    lie_derivative_density,
    reduce_to_even,
    structure_coefficients,
    supercommutator,
    transform_density,
)

from strategies import SMALL, ExactSampler, jacobi_defect, vf_is_zero

G = GeneratorSet(2, 6)
PB = PolyBackend(8)


def coord(name, backend=PB, gens=G):
    return SuperFunction.coordinate(gens, backend, name)


def one(backend=PB, gens=G):
    return SuperFunction.const(gens, backend, 1)


def zero(backend=PB, gens=G):
    return SuperFunction.zero(gens, backend)


def d(k, backend=PB, gens=G):
    return SuperVectorField.coordinate(gens, backend, k)


# -- vector fields -------------------------------------------------------------
def test_apply_examples():
    v = d(0).scale(coord("e1"))  # e1 d_x1
    assert v.parity is Parity.ODD
    assert apply(v, coord("x1")) == coord("e1")
    assert apply(d(2), coord("e1")) == one()


def test_model_pair_squares_to_translation():
    # [d_e1 + e1 d_x1, d_e1 + e1 d_x1] = 2 d_x1
    D = d(2) + d(0).scale(coord("e1"))
    c = supercommutator(D, D)
    assert c.parity is Parity.EVEN
    assert c.allclose(d(0).scale(2), 0)


def test_even_coordinate_fields_commute():
    assert vf_is_zero(supercommutator(d(0), d(1)))


def test_odd_shifts_anticommute_to_zero():
    v = d(0).scale(coord("e1"))
    w = d(0).scale(coord("e2"))
    c = supercommutator(v, w)
    assert all(comp.body.terms == {} for comp in c.components)
    assert vf_is_zero(c)


@given(st.integers(0, 10**6))
def test_apply_leibniz(seed):
    s = ExactSampler(seed)
    pv, pf = s.parity(), s.parity()
    v = s.vector_field(pv)
    f, g = s.function(pf, 3), s.function(s.parity(), 3)
    rhs = apply(v, f) * g + (f * apply(v, g)) * (-1 if pv and pf else 1)
    assert apply(v, f * g) == rhs


@given(st.integers(0, 10**6))
def test_supercommutator_is_a_derivation_commutator(seed):
    s = ExactSampler(seed)
    pv, pw = s.parity(), s.parity()
    v, w = s.vector_field(pv), s.vector_field(pw)
    f = s.function(s.parity(), 3)
    lhs = apply(supercommutator(v, w), f)
    rhs = apply(v, apply(w, f)) - apply(w, apply(v, f)) * (-1 if pv and pw else 1)
    assert lhs == rhs


@given(st.integers(0, 10**6))
def test_super_jacobi(seed):
    s = ExactSampler(seed)
    ps = [s.parity() for _ in range(3)]
    X, Y, Z = (s.vector_field(p) for p in ps)
    assert vf_is_zero(jacobi_defect(X, Y, Z, *ps))


@given(st.integers(0, 10**6))
def test_graded_antisymmetry(seed):
    s = ExactSampler(seed)
    pv, pw = s.parity(), s.parity()
    v, w = s.vector_field(pv), s.vector_field(pw)
    vw, wv = supercommutator(v, w), supercommutator(w, v)
    sign = 1 if pv and pw else -1
    assert all(a == b * sign for a, b in zip(vw.components, wv.components))


# -- structure coefficients ---------------------------------------------------------
def test_coordinate_frame_has_no_structure():
    frames = [d(k) for k in range(4)]
    table = structure_coefficients(frames)
    assert all(t.is_zero() for ts in table.values() for t in ts)


def test_structure_coefficient_resubstitution():
    s = ExactSampler(11, G, PB)
    base = [d(k) for k in range(4)]
    # invertible frame: coordinate frame plus nilpotent-coefficient corrections
    frames = []
    for A in range(4):
        par = 0 if A < 2 else 1
        extra = s.vector_field(par)
        comps = [c.nilpotent() * Fraction(1, 2) for c in extra.components]
        frames.append(base[A] + SuperVectorField(comps, base[A].parity, check=False))
    table = structure_coefficients(frames)
    for (a, b), coeffs in table.items():
        br = supercommutator(frames[a], frames[b])
        recon = None
        for C, t in enumerate(coeffs):
            part = frames[C].scale(t) if not t.is_zero() else None
            if part is None:
                continue
            comps = part.components if recon is None else [x + y for x, y in zip(recon, part.components)]
            recon = comps
        recon = recon or [zero() for _ in range(4)]
        assert all(x == y for x, y in zip(recon, br.components))


def test_degenerate_frame_raises():
    frames = [d(0), d(0), d(2), d(3)]
    with pytest.raises(SingularFrameError):
        structure_coefficients(frames)


# -- super matrices ----------------------------------------------------------------
MG = GeneratorSet(0, 4)


def _el(terms):
    return GrassmannElement(MG, terms)


def test_berezinian_block_diagonal_and_identity():
    z = _el({})
    A = [[_el({0: 2}), _el({0: 1})], [_el({0: 1}), _el({0: 3})]]
    D = [[_el({0: 5}), z], [z, _el({0: 2, 0b11: 1})]]
    m = SuperMatrix.from_blocks(A, [[z, z], [z, z]], [[z, z], [z, z]], D)
    assert berezinian(m) == _el({0: 5}) * (D[0][0] * D[1][1]).inverse()
    ident = SuperMatrix.from_blocks(
        [[_el({0: 1}), z], [z, _el({0: 1})]], [[z, z], [z, z]], [[z, z], [z, z]], [[_el({0: 1}), z], [z, _el({0: 1})]]
    )
    assert berezinian(ident) == _el({0: 1})


def test_berezinian_rejects_singular_odd_block():
    z = _el({})
    m = SuperMatrix.from_blocks([[_el({0: 1})]], [[z]], [[z]], [[_el({0b11: 1})]])
    with pytest.raises(SingularFrameError):
        berezinian(m)


def _parity_masks(p):
    return [m for m in range(1 << MG.count) if bin(m).count("1") % 2 == p]


@st.composite
def super_matrices(draw):
    """Random 2|2 super matrix; even-block bodies are upper triangular with nonzero diagonal."""
    rat = st.fractions(min_value=-3, max_value=3, max_denominator=3)
    nonzero = st.sampled_from([Fraction(k, q) for k in (-3, -2, -1, 1, 2, 3) for q in (1, 2)])
    rows = []
    for i in range(4):
        row = []
        for j in range(4):
            even = (i < 2) == (j < 2)
            masks = [m for m in _parity_masks(0 if even else 1) if m]
            terms = {m: draw(rat) for m in draw(st.lists(st.sampled_from(masks), max_size=2, unique=True))}
            if even and i == j:
                terms[0] = draw(nonzero)
            elif even and i < j:
                terms[0] = draw(rat)
            row.append(_el(terms))
        rows.append(row)
    return SuperMatrix(rows, 2)


@given(super_matrices(), super_matrices())
def test_berezinian_multiplicative(m, n):
    assert berezinian(m @ n) == berezinian(m) * berezinian(n)


@given(super_matrices())
def test_berezinian_of_inverse(m):
    assert berezinian(m.inverse()) * berezinian(m) == _el({0: 1})


# -- Berezin integration ------------------------------------------------------------
def test_integral_of_top_monomial(grid):
    e1, e2 = coord("e1", grid), coord("e2", grid)
    val = berezin_integrate(BerezinDensity(e2 * e1 * one(grid)))
    assert abs(val.body - (2 * math.pi) ** 2) <= 1e-12


def test_integral_without_top_term(grid):
    x1, _ = grid.points()
    rho = coord("e1", grid) * SuperFunction(G, grid, {0: np.sin(x1) + 2})
    assert berezin_integrate(BerezinDensity(rho)).is_zero()


def test_integral_cos_squared(grid):
    x1, _ = grid.points()
    e1, e2 = coord("e1", grid), coord("e2", grid)
    rho = e2 * e1 * SuperFunction(G, grid, {0: np.cos(x1) ** 2})
    assert abs(berezin_integrate(BerezinDensity(rho)).body - 2 * math.pi**2) <= 1e-12


def test_integral_poly_box():
    box = ((Fraction(0), Fraction(1)), (Fraction(0), Fraction(2)))
    pb = PolyBackend(8, box)
    e1, e2 = coord("e1", pb), coord("e2", pb)
    rho = e2 * e1 * SuperFunction(G, pb, {0: Poly({(1, 0): 3, (0, 2): 1})})
    # int_0^1 int_0^2 (3 x1 + x2^2) = 3 + 8/3
    assert berezin_integrate(BerezinDensity(rho)).body == Fraction(17, 3)


def test_reduce_to_even(grid):
    x1, x2 = grid.points()
    g = SuperFunction(G, grid, {0: np.cos(x1) * np.sin(x2) + 1})
    e1, e2 = coord("e1", grid), coord("e2", grid)
    b = BerezinDensity(e2 * e1 * g + e1 * one(grid))
    assert reduce_to_even(b, embedding(G, grid)).allclose(g, 0)
    assert reduce_to_even(BerezinDensity(e1 * g), embedding(G, grid)).is_zero()
    bad = embedding(G, grid, {0: SuperFunction(G, grid, {G.base_bit(0): np.sin(x1)})})
    with pytest.raises(NotNormalizedError):
        reduce_to_even(b, bad)


def _grid_map(s: FieldSampler, grid):
    e1, e2 = coord("e1", grid), coord("e2", grid)
    disp = [s.even(0.05, nilpotent=((0, 1),)) + e1 * s.odd((2,), 0.2) + e1 * e2 * s.even(0.1) for _ in range(2)]
    return SuperMap(
        {
            "x1": grid_coordinate_image(G, grid, 0, disp[0]),
            "x2": grid_coordinate_image(G, grid, 1, disp[1]),
            "e1": e1 * s.even(0.05, 1.0) + s.odd((3, 4), 0.2),
            "e2": e2 * s.even(0.05, 1.0) + s.odd((5,), 0.2),
        }
    )


@pytest.mark.parametrize("seed", range(3))
def test_coordinate_change_invariance_grid(seed, grid):
    s = FieldSampler(G, grid, seed)
    e1, e2 = coord("e1", grid), coord("e2", grid)
    b = BerezinDensity(s.even(0.3, 0.5) + e2 * e1 * s.even(0.3, 1.0, nilpotent=((0, 1),)) + e1 * s.odd((1, 2)))
    m = _grid_map(s, grid)
    i0, i1 = berezin_integrate(b), berezin_integrate(transform_density(b, m))
    assert (i1 - i0).max_abs() <= 1e-10 * max(1.0, i0.max_abs())


def test_coordinate_change_invariance_exact():
    box = ((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))
    pb = PolyBackend(16, box)
    s = ExactSampler(5, G, pb)
    x1, x2, e1, e2 = (coord(n, pb) for n in ("x1", "x2", "e1", "e2"))
    bubble = SuperFunction(G, pb, {0: Poly({(1, 0): 1, (2, 0): -1}, 16) * Poly({(0, 1): 1, (0, 2): -1}, 16)})
    b1b2 = SuperFunction(G, pb, {G.base_bit(0) | G.base_bit(1): pb.const(1)})
    b3 = SuperFunction(G, pb, {G.base_bit(2): pb.const(1)})
    m = SuperMap(
        {
            "x1": x1 + bubble * (e1 * e2 * Fraction(1, 2) + b1b2),
            "x2": x2 + bubble * e2 * b3,
            "e1": e1 * 2 + b3,
            "e2": e2 + e1 * b1b2 * 3,
        }
    )
    rho = one(pb) * 2 + e2 * e1 * (SuperFunction(G, pb, {0: s.poly()}) + b1b2) + e1 * b3
    b = BerezinDensity(rho)
    assert berezin_integrate(transform_density(b, m)) == berezin_integrate(b)


def test_jacobian_of_identity_is_identity():
    J = jacobian(SuperMap.identity(G, PB))
    for i, row in enumerate(J.rows):
        for j, x in enumerate(row):
            assert x == (one() if i == j else zero())


# -- divergence ---------------------------------------------------------------------
def test_divergence_examples():
    rho = BerezinDensity(one())
    assert divergence(d(0), rho).is_zero()
    assert divergence(d(0).scale(coord("x1")), rho) == one()


@pytest.mark.parametrize("parity", [0, 1])
def test_integration_by_parts(parity, grid):
    s = FieldSampler(G, grid, 7 + parity)
    e1, e2 = coord("e1", grid), coord("e2", grid)
    b = BerezinDensity(s.even(0.2, 1.0) + e2 * e1 * s.even(0.3) + e1 * s.odd((0,)))
    if parity == 0:
        comps = [s.even(0.3, nilpotent=((1, 2),)), s.even(0.3), s.odd((3,)), s.odd((4,)) + e1 * e2 * s.odd((5,))]
    else:
        comps = [s.odd((3,)), s.odd((4,)) + e1 * e2 * s.odd((5,)), s.even(0.3), s.even(0.3) + e1 * e2 * s.even(0.2)]
    v = SuperVectorField(comps, Parity.ODD if parity else Parity.EVEN)
    total = berezin_integrate(lie_derivative_density(v, b))
    assert total.max_abs() <= 1e-9
