"""Acceptance suite: criteria 1-8 on the shipped default scene.

Every criterion prints one ``CRITERION n PASS/FAIL`` line.  Tolerances are
fixed here (not read from the scene), so a scene cannot loosen them.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python scripts/run_acceptance.py``.
"""
import time

import pytest

from supergeom.grassmann import GeneratorSet, Parity
from supergeom.scene import Scene
from supergeom.supercalc import SuperVectorField, apply
from supergeom.superfield import d_even, d_odd
from supergeom.suites import (
    run_berezin_covariance,
    run_deformation,
    run_invariances,
    run_noether,
    run_reduce_action,
    run_srs_model,
    run_wz_solve,
)

from strategies import ExactSampler, jacobi_defect, vf_is_zero

N_ALGEBRA = 10_000


@pytest.fixture(scope="module")
def scene():
    s = Scene.default()
    assert s.raw["backend"] == {"kind": "grid", "n": 32}
    assert (s.gens().n_fiber, s.gens().n_base) == (2, 6)
    return s


def emit(capsys, n, title, failures, elapsed, detail=""):
    status = "PASS" if not failures else "FAIL"
    with capsys.disabled():
        print(f"\nCRITERION {n} {status}: {title} [{elapsed:.1f} s] {detail}".rstrip())
        for f in failures:
            print(f"    - {f}")
    assert not failures, failures


def check_values(rep, wanted):
    """``wanted``: ``{check name: (kind, bound)}``; returns failure strings."""
    by_name = {c.name: c for c in rep.checks}
    out = []
    for name, (kind, bound) in wanted.items():
        c = by_name.get(name)
        if c is None:
            out.append(f"missing check {name!r}")
        elif kind == "max" and not c.value <= bound:
            out.append(f"{name}: {c.value:.3e} > {bound:.1e}")
        elif kind == "min" and not c.value >= bound:
            out.append(f"{name}: {c.value} < {bound}")
    return out


def at_least(values, key, n):
    return [] if values.get(key, 0) >= n else [f"{key} = {values.get(key)} < {n}"]


def test_criterion_1_reduction(scene, capsys):
    t = time.perf_counter()
    rep = run_reduce_action(scene)
    fails = check_values(rep, {
        "|A_super - A_component| / max(1, |A|) (grid, every coefficient)": ("max", 1e-8),
        "|A_super - A_component| (poly, exact)": ("max", 0.0),
    })
    fails += at_least(rep.values, "samples", 20) + at_least(rep.values, "poly_samples", 5)
    emit(capsys, 1, "reduction identity (super action = component action)", fails, time.perf_counter() - t,
         f"grid samples={rep.values.get('samples')}, poly samples={rep.values.get('poly_samples')}")


def test_criterion_2_model_srs(scene, capsys):
    t = time.perf_counter()
    rep = run_srs_model(scene)
    names = ["t_{z+}^{zbar}", "t_{z+}^{-}", "t_{++}^{zbar}", "t_{++}^{-}", "t_{+-}^{z}", "t_{+zbar}^{z}", "t_{++}^{z} - 2"]
    fails = check_values(rep, {n: ("max", 0.0) for n in names})
    if rep.values.get("t_pp_z") != {"re": 2.0, "im": 0.0}:
        fails.append(f"t_pp_z = {rep.values.get('t_pp_z')}")
    emit(capsys, 2, "model super Riemann surface (t_++^z = 2, integrability exact)", fails, time.perf_counter() - t)


def test_criterion_3_wz_solver(scene, capsys):
    t = time.perf_counter()
    rep = run_wz_solve(scene)
    fails = check_values(rep, {
        "integrability residual (max over samples)": ("max", 1e-9),
        "WZ frame/coordinate residual (max over samples)": ("max", 1e-9),
        "extract(solve(geom)) - geom": ("max", 1e-10),
        "flat geometry reproduces the model frame": ("max", 0.0),
    })
    fails += at_least(rep.values, "samples", 20)
    emit(capsys, 3, "Wess-Zumino solver", fails, time.perf_counter() - t, f"samples={rep.values.get('samples')}")


def test_criterion_4_invariances(scene, capsys):
    t = time.perf_counter()
    rep = run_invariances(scene)
    fails = check_values(rep, {
        "conformal": ("max", 1e-10),
        "super_weyl": ("max", 1e-10),
        "translation_exact": ("max", 1e-10),
        "susy_slope": ("min", 1.9),
        "translation_slope": ("min", 1.9),
        "g_invariance": ("max", 1e-9),
    })
    emit(capsys, 4, "invariances (conformal, super Weyl, SUSY, translation, G)", fails, time.perf_counter() - t)


def test_criterion_5_noether(scene, capsys):
    t = time.perf_counter()
    rep = run_noether(scene)
    fails = check_values(rep, {
        "pointwise g-trace of T": ("max", 1e-8),
        "pointwise gamma-trace of J": ("max", 1e-8),
        "winding solutions: EL residual": ("max", 1e-9),
        "winding solutions: divergence of T": ("max", 1e-8),
        "winding solutions: d-bar of T dz^2": ("max", 1e-8),
    })
    emit(capsys, 5, "Noether structure (traces, EL, conservation, holomorphy)", fails, time.perf_counter() - t)


def test_criterion_6_berezin(scene, capsys):
    t = time.perf_counter()
    rep = run_berezin_covariance(scene)
    fails = check_values(rep, {
        "integral invariance under coordinate changes (grid)": ("max", 1e-10),
        "integral invariance under coordinate changes (poly, exact)": ("max", 0.0),
        "Ber(MN) != Ber(M) Ber(N) (count, exact rationals)": ("max", 0.0),
    })
    fails += at_least(rep.values, "coordinate_changes", 10) + at_least(rep.values, "ber_matrices", 100)
    emit(capsys, 6, "Berezin covariance and Ber multiplicativity", fails, time.perf_counter() - t,
         f"maps={rep.values.get('coordinate_changes')}, matrices={rep.values.get('ber_matrices')}")


def test_criterion_7_deformation(scene, capsys):
    t = time.perf_counter()
    rep = run_deformation(scene)
    fails = check_values(rep, {
        "forward-constructed: parameters recovered (X, q up to constants)": ("max", 1e-9),
        "forward-constructed: d-bar of holomorphic parts": ("max", 1e-9),
        "forward-constructed: reconstruction residual": ("max", 1e-8),
        "linearity": ("max", 1e-9),
        "pure Weyl: lam = lam0, X = 0, D = 0": ("max", 1e-9),
        "h = L_X delta: X recovered up to constants, D = 0": ("max", 1e-9),
        "rho = nabla q, q = c cos x1: q recovered up to constants, Dspin = 0": ("max", 1e-9),
    })
    emit(capsys, 7, "deformation decomposition", fails, time.perf_counter() - t)


# -- criterion 8: exact randomized algebra checks -------------------------------------------
def _sign(p, q):
    return -1 if (p and q) else 1


def test_criterion_8_algebra_core(capsys):
    t = time.perf_counter()
    fails = []
    s = ExactSampler(2024)

    # graded commutativity in Lambda_8 (2 fiber + 6 base generators), rational coefficients
    big = GeneratorSet(2, 6)
    bad = 0
    for _ in range(N_ALGEBRA):
        pa, pb = s.parity(), s.parity()
        a, b = s.element(pa, 4, big), s.element(pb, 4, big)
        if a * b != b * a * _sign(pa, pb):
            bad += 1
    if bad:
        fails.append(f"graded commutativity: {bad}/{N_ALGEBRA} failures")

    # super Jacobi identity for polynomial super vector fields
    bad = 0
    for _ in range(N_ALGEBRA):
        p = [s.parity() for _ in range(3)]
        X, Y, Z = (s.vector_field(q) for q in p)
        if not vf_is_zero(jacobi_defect(X, Y, Z, *p)):
            bad += 1
    if bad:
        fails.append(f"super Jacobi: {bad}/{N_ALGEBRA} failures")

    # graded Leibniz rules: a random vector field, and the coordinate derivations
    bad = {"vector field": 0, "odd derivative": 0, "even derivative": 0}
    for k in range(N_ALGEBRA):
        pv, pf = s.parity(), s.parity()
        f, g = s.function(pf, 3), s.function(s.parity(), 3)
        X = s.vector_field(pv)
        if apply(X, f * g) != apply(X, f) * g + (f * apply(X, g)) * _sign(pv, pf):
            bad["vector field"] += 1
        alpha, axis = k % 2, (k // 2) % 2
        if d_odd(f * g, alpha) != d_odd(f, alpha) * g + (f * d_odd(g, alpha)) * _sign(1, pf):
            bad["odd derivative"] += 1
        if d_even(f * g, axis) != d_even(f, axis) * g + f * d_even(g, axis):
            bad["even derivative"] += 1
    fails += [f"Leibniz ({k}): {v}/{N_ALGEBRA} failures" for k, v in bad.items() if v]

    emit(capsys, 8, "algebra core (graded commutativity, super Jacobi, Leibniz; exact)", fails,
         time.perf_counter() - t, f"{N_ALGEBRA} checks each")


def test_algebra_samplers_are_not_degenerate():
    """The criterion 8 samplers produce non-trivial products and brackets."""
    from supergeom.supercalc import supercommutator

    s = ExactSampler(7)
    nonzero = sum(not supercommutator(s.vector_field(1), s.vector_field(1)).components[0].is_zero() for _ in range(50))
    assert nonzero >= 10
    odd_products = sum(not (s.element(1, 4) * s.element(1, 4)).is_zero() for _ in range(50))
    assert odd_products >= 10
    assert s.vector_field(1).parity is Parity.ODD and isinstance(s.vector_field(0), SuperVectorField)
