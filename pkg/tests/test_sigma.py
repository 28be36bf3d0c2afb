import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supergeom.coeffs import GridBackend, PolyBackend
from supergeom.errors import ConfigurationError, UnsupportedError
from supergeom.grassmann import GeneratorSet
from supergeom.sampling import FieldSampler
from supergeom.scene import sphere_target
from supergeom.sigma import (
    ComponentFields,
    SuperfieldMap,
    TargetSpace,
    action_component,
    action_super,
    assemble,
    component_terms,
    components_of,
    conformal_transform,
    d_laplacian,
    el_residuals,
    gamma_trace,
    invariance_suite,
    loglog_slope,
    stress_supercurrent,
    stress_trace,
    super_weyl_transform,
    tensor_divergence,
    torus_shift,
)
from supergeom.srs import CliffordData, EvenGeometry, model_frame, wz_solve
from supergeom.superfield import SuperFunction

G = GeneratorSet(2, 6)
GB = GridBackend(32)
X1, X2 = GB.points()
BOX = ((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))


def fn(values, mask=0):
    return SuperFunction(G, GB, {mask: values})


def zero():
    return SuperFunction.zero(G, GB)


def eta(k):
    return SuperFunction.coordinate(G, GB, f"e{k}")


def const_odd(k, value):
    return fn(np.full_like(X1, value), G.base_bit(k))


# -- D-Laplacian -----------------------------------------------------------------
@pytest.mark.parametrize("o", [1, -1])
def test_d_laplacian_of_top_component(o):
    cl = CliffordData(eps_orientation=o)
    F = fn(np.cos(X1 + X2) + 0.5)
    lap = d_laplacian([eta(2) * eta(1) * F], model_frame(G, GB), cliff=cl)[0]
    assert (lap.restrict() - F * (2 * int(cl.eps_inv[0, 1]))).max_abs() <= 1e-13


def test_d_laplacian_constant_and_winding():
    mf = model_frame(G, GB)
    assert d_laplacian([fn(np.full_like(X1, 3.0))], mf)[0].is_zero()
    wound = SuperfieldMap([zero()], np.array([[1.0, -2.0]]))
    assert d_laplacian(wound, mf)[0].max_abs() <= 1e-14


def test_d_laplacian_rejects_curved_target():
    with pytest.raises(UnsupportedError):
        d_laplacian([zero()], model_frame(G, GB), target=sphere_target())


# -- actions -----------------------------------------------------------------------
def test_dirichlet_energy_normalization():
    phi = fn(np.sin(X1))
    c = ComponentFields([phi], [[zero(), zero()]], [zero()])
    assert abs(action_component(c, EvenGeometry.flat(G, GB)).body - 2 * math.pi**2) <= 1e-12
    assert abs(action_super([phi], model_frame(G, GB)).body - 2 * math.pi**2) <= 1e-12


def test_zero_map_has_zero_action():
    assert action_super([zero()], model_frame(G, GB)).is_zero()


def test_auxiliary_term_sign():
    F = np.cos(X1 + X2) + 0.5
    want = -np.sum(F**2) * GB.spacing**2
    assert abs(action_super([eta(2) * eta(1) * fn(F)], model_frame(G, GB)).body - want) <= 1e-11


def test_constant_spinor_has_zero_action():
    psi = [[const_odd(0, 0.7), const_odd(1, -0.3)], [const_odd(2, 1.1), const_odd(3, 0.4)]]
    c = ComponentFields([fn(np.full_like(X1, 1.0)), zero()], psi, [zero(), zero()])
    assert action_component(c, EvenGeometry.flat(G, GB)).max_abs() <= 1e-12


def test_components_of_simple_superfields():
    mf = model_frame(G, GB)
    phi = fn(np.sin(X2))
    c = components_of([phi], mf)
    assert c.phi[0].allclose(phi, 0) and c.psi[0][0].is_zero() and c.psi[0][1].is_zero() and c.F[0].is_zero()
    psi1 = fn(np.cos(X1), G.base_bit(0))
    c = components_of([eta(1) * psi1], mf)
    assert c.psi[0][0].allclose(psi1, 1e-14) and c.psi[0][1].is_zero()


@settings(max_examples=5)
@given(st.integers(0, 10**6))
def test_component_round_trip_exact(seed):
    pb = PolyBackend(8, BOX)
    s = FieldSampler(G, pb, seed)
    frames = wz_solve(s.geometry((0, 1)))
    c = s.fields(2)
    assert c.max_diff(components_of(assemble(c, frames), frames)) == 0


@settings(max_examples=3)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_reduction_identity_grid(seed, dim):
    s = FieldSampler(G, GB, seed)
    geom = s.geometry((0, 1), nilpotent=((4, 5),))
    c = s.fields(dim, winding=s.winding(dim))
    frames = wz_solve(geom)
    sup = action_super(assemble(c, frames), frames)
    comp = action_component(c, geom, TargetSpace(dim))
    assert (sup - comp).max_abs() <= 1e-8 * max(1.0, comp.max_abs())


def test_reduction_identity_poly_exact():
    pb = PolyBackend(8, BOX)
    s = FieldSampler(G, pb, 17)
    geom = s.geometry((0, 1), nilpotent=((4, 5),))
    c = s.fields(2)
    frames = wz_solve(geom)
    assert action_super(assemble(c, frames), frames) == action_component(c, geom, TargetSpace(2))


def test_curved_target_component_only():
    target = sphere_target()
    s = FieldSampler(G, GB, 3)
    geom = s.geometry((0, 1))
    c = s.fields(2)
    c = ComponentFields([SuperFunction(G, GB, {0: p.body}) for p in c.phi], c.psi, c.F)
    terms = component_terms(c, geom, target)
    assert "curvature" in terms
    assert target.check_symmetries([p.body for p in c.phi]) <= 1e-12
    with pytest.raises(UnsupportedError):
        action_super([zero(), zero()], wz_solve(geom), target=target)
    with pytest.raises(UnsupportedError):
        component_terms(ComponentFields(c.phi, c.psi, c.F, np.ones((2, 2))), geom, target)


def test_target_callbacks_must_be_complete():
    with pytest.raises(ConfigurationError):
        TargetSpace(2, metric=lambda phi: None)


# -- symmetries --------------------------------------------------------------------
@settings(max_examples=5)
@given(st.integers(0, 10**6))
def test_conformal_and_super_weyl_invariance(seed):
    s = FieldSampler(G, GB, seed)
    geom = s.geometry((0, 1))
    c = s.fields(2, winding=s.winding(2))
    A0 = action_component(c, geom)
    lam = s.even(0.05, 1.0, nilpotent=((4, 5),))
    c2, g2 = conformal_transform(c, geom, lam)
    assert (action_component(c2, g2) - A0).max_abs() <= 1e-10 * max(1.0, A0.max_abs())
    g3 = super_weyl_transform(geom, s.spinor((4, 5)))
    assert (action_component(c, g3) - A0).max_abs() <= 1e-10 * max(1.0, A0.max_abs())


def test_torus_shift_is_exact():
    s = FieldSampler(G, GB, 8)
    geom = s.geometry((0, 1))
    c = s.fields(1, winding=np.array([[1, 1]]))
    A0 = action_component(c, geom)
    c2, g2 = torus_shift(c, geom, (5, 11))
    assert (action_component(c2, g2) - A0).max_abs() <= 1e-10 * max(1.0, A0.max_abs())


def test_loglog_slope():
    eps = (1e-2, 1e-3, 1e-4)
    assert abs(loglog_slope([3 * e**2 for e in eps], eps) - 2) <= 1e-12
    assert abs(loglog_slope([3 * e for e in eps], eps) - 1) <= 1e-12
    assert loglog_slope([0.0, 0.0, 0.0], eps) == math.inf


def test_invariance_suite_small_grid():
    gb = GridBackend(16)
    s = FieldSampler(G, gb, 21)
    rep = invariance_suite(s.fields(2), s.geometry((0, 1)), seed=3)
    assert rep.passed, [c.to_dict() for c in rep.failures()]
    names = {c.name for c in rep.checks}
    assert {"super_weyl", "conformal", "translation_exact", "translation_slope", "susy_slope", "g_invariance"} <= names


@pytest.mark.parametrize("cl", [CliffordData(gamma1_sign=-1), CliffordData(swap_gammas=True)])
def test_reduction_pins_the_gamma_convention(cl):
    """Other gamma conventions are consistent on the component side but break the reduction."""
    s = FieldSampler(G, GridBackend(16), 21)
    geom, c = s.geometry((0, 1)), s.fields(1)
    frames = wz_solve(geom, cl)
    diff = action_super(assemble(c, frames, cliff=cl), frames, cliff=cl) - action_component(c, geom, cliff=cl)
    assert diff.max_abs() > 1.0


# -- Euler-Lagrange, T and J --------------------------------------------------------------
def _winding_solution(dim=2):
    psi = [[const_odd(2 * p, 0.4 + p), const_odd(2 * p + 1, -0.7)] for p in range(dim)]
    w = np.array([[1, -1], [2, 0]])[:dim]
    return ComponentFields([zero() for _ in range(dim)], psi, [zero() for _ in range(dim)], w)


def test_winding_solution_is_on_shell():
    flat = EvenGeometry.flat(G, GB)
    rep = el_residuals(_winding_solution(), flat)
    assert rep.max_residual <= 1e-12
    T, J = stress_supercurrent(_winding_solution(), flat)
    div = tensor_divergence(T, flat)
    assert max(d.max_abs() for d in div) <= 1e-10
    for a in range(2):
        for b in range(2):
            assert (T[a][b] - T[a][b].map_coefficients(lambda u: np.full_like(u, u.mean()))).max_abs() <= 1e-10


def test_auxiliary_field_residual():
    c = _winding_solution(1)
    F = fn(0.3 * np.sin(X1) + 0.2)
    c = ComponentFields(c.phi, c.psi, [F], c.winding)
    rep = el_residuals(c, EvenGeometry.flat(G, GB))
    assert abs(rep.operator["F"] - 2 * F.max_abs()) <= 1e-12


@settings(max_examples=3)
@given(st.integers(0, 10**6))
def test_traces_vanish_off_shell(seed):
    s = FieldSampler(G, GridBackend(16), seed)
    geom = s.geometry((0, 1))
    c = s.fields(2)
    T, J = stress_supercurrent(c, geom)
    assert stress_trace(T).max_abs() <= 1e-8
    assert max(x.max_abs() for x in gamma_trace(J)) <= 1e-8


def test_variational_cross_check():
    s = FieldSampler(G, GB, 9)
    geom = s.geometry((0, 1))
    c = s.fields(1)
    dirs = {"phi": ComponentFields([s.even(0.2)], [[zero(), zero()]], [zero()]),
            "psi": ComponentFields([zero()], [s.spinor((0, 2))], [zero()]),
            "F": ComponentFields([zero()], [[zero(), zero()]], [s.even(0.2)])}
    rep = el_residuals(c, geom, directions=dirs)
    assert max(rep.variational_mismatch.values()) <= 1e-6
    assert min(rep.directional.values()) > 1e-3
