"""Named verification suites run by the command line driver.

Every suite takes a :class:`~supergeom.scene.Scene` and returns a
:class:`~supergeom.checks.SuiteReport`.  All random data comes from
sub-streams of the scene seed, so reports are reproducible.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .checks import SuiteReport
from .coeffs import GridBackend, Poly, PolyBackend
from .deformation import (
    decompose,
    lie_derivative_metric,
    mean,
    quadratic_differential,
    super_weyl_gravitino,
    susy_gravitino,
)
from .errors import SupergeomError, UnsupportedError
from .grassmann import GeneratorSet, GrassmannElement
from .sampling import FieldSampler
from .scene import Scene
from .sigma import (
    ComponentFields,
    TargetSpace,
    action_component,
    action_super,
    assemble,
    components_of,
    el_residuals,
    gamma_trace,
    invariance_suite,
    metric_variation,
    stress_supercurrent,
    stress_trace,
    tensor_divergence,
)
from .srs import EvenGeometry, check_srs, extract_geometry, model_frame, wz_residuals, wz_solve
from .supercalc import (
    BerezinDensity,
    integrate_even,
    SuperMatrix,
    berezin_integrate,
    berezinian,
    transform_density,
)
from .superfield import SuperFunction, SuperMap, grid_coordinate_image

# stream offsets keep the suites' random data independent of each other
_STREAM = {"reduce": 1000, "wz": 2000, "noether": 3000, "berezin": 4000, "deformation": 5000, "invariances": 6000}


def grassmann_text(x: GrassmannElement, digits: int = 12) -> dict:
    """``{monomial: coefficient}`` with rounded floats (exact rationals as strings)."""
    out = {}
    for mask, c in sorted(x.terms.items()):
        key = x.gens.monomial_text(mask) or "1"
        if isinstance(c, Fraction):
            out[key] = str(c)
        elif isinstance(c, complex):
            out[key] = [float(f"{c.real:.{digits}g}"), float(f"{c.imag:.{digits}g}")]
        else:
            out[key] = float(f"{c:.{digits}g}")
    return out


def _rel(diff: float, scale: float) -> float:
    return float(diff) / max(1.0, float(scale))


# ---------------------------------------------------------------------------
# srs-model
# ---------------------------------------------------------------------------
def run_srs_model(scene: Scene) -> SuiteReport:
    """Model frame of the flat super Riemann surface: ``t_{++}^z = 2`` and integrability, exactly."""
    rep = SuiteReport("srs-model")
    gens, backend = scene.gens(), scene.backend()
    report = check_srs(model_frame(gens, backend))
    re, im = report.t_pp_z
    rep.values["t_pp_z"] = {"re": float(re.max_abs()), "im": float(im.max_abs())}
    for name, val in report.residuals.items():
        rep.add(name, val, 0.0, note="exact")
    # the coordinate frame is integrable but t_{++}^z = 0
    coord = check_srs(_coordinate_frame(gens, backend))
    rep.values["coordinate_frame_t_pp_z_minus_2"] = coord.residuals["t_{++}^{z} - 2"]
    rep.add("coordinate frame fails completeness", coord.residuals["t_{++}^{z} - 2"], 2.0, kind="min")
    return rep


def _coordinate_frame(gens, backend):
    from .grassmann import Parity
    from .supercalc import SuperVectorField

    one, z = SuperFunction.const(gens, backend, 1), SuperFunction.zero(gens, backend)
    rows = [[one, z, z, z], [z, one, z, z], [z, z, one, z], [z, z, z, one]]
    return [SuperVectorField(r, Parity.EVEN if k < 2 else Parity.ODD) for k, r in enumerate(rows)]


# ---------------------------------------------------------------------------
# wz-solve
# ---------------------------------------------------------------------------
def _geom_diff(a: EvenGeometry, b: EvenGeometry) -> float:
    vals = [(a.f[i][j] - b.f[i][j]).max_abs() for i in range(2) for j in range(2)]
    vals += [(a.chi[i][j] - b.chi[i][j]).max_abs() for i in range(2) for j in range(2)]
    return float(max(vals))


def run_wz_solve(scene: Scene) -> SuiteReport:
    """Wess--Zumino frames of random geometries: integrability, WZ conditions, round trip."""
    rep = SuiteReport("wz-solve")
    tol = scene.tolerances
    cliff = scene.cliff()
    gens, backend = scene.gens(), scene.backend()
    srs_worst, wz_worst, rt_worst = 0.0, 0.0, 0.0
    n = scene.samples["wz_solve"]
    for k in range(n):
        sampler = scene.sampler(_STREAM["wz"] + k)
        geom = sampler.geometry(scene.chi_base, nilpotent=() if gens.n_base < 6 else ((4, 5),))
        frames = wz_solve(geom, cliff)
        srs_worst = max(srs_worst, check_srs(frames).max_residual)
        wz_worst = max(wz_worst, max(wz_residuals(frames).values()))
        rt_worst = max(rt_worst, _geom_diff(extract_geometry(frames), geom))
    rep.values["samples"] = n
    rep.add("integrability residual (max over samples)", srs_worst, tol["wz_residual"])
    rep.add("WZ frame/coordinate residual (max over samples)", wz_worst, tol["wz_residual"])
    rep.add("extract(solve(geom)) - geom", rt_worst, tol["wz_roundtrip"])
    model = model_frame(gens, backend)
    solved = wz_solve(EvenGeometry.flat(gens, backend), cliff)
    diff = max(
        (a - b).max_abs() for fa, fb in zip(solved.frames, model.frames) for a, b in zip(fa.components, fb.components)
    )
    rep.add("flat geometry reproduces the model frame", diff, 0.0, note="exact")
    return rep


# ---------------------------------------------------------------------------
# reduce-action
# ---------------------------------------------------------------------------
def _reduction_sample(scene: Scene, sampler: FieldSampler, dim: int, winding: bool, cliff):
    nb = scene.gens().n_base
    geom = sampler.geometry(scene.chi_base, nilpotent=() if nb < 6 else ((4, 5),))
    w = sampler.winding(dim) if winding else None
    c = sampler.fields(dim, scene.psi_base, True, w)
    frames = wz_solve(geom, cliff)
    Phi = assemble(c, frames, cliff=cliff)
    sup = action_super(Phi, frames, cliff=cliff)
    comp, terms = action_component(c, geom, TargetSpace(dim), cliff, detail=True)
    rt = c.max_diff(components_of(Phi, frames, cliff=cliff))
    return (sup - comp).max_abs(), comp.max_abs(), rt, comp, terms


def run_reduce_action(scene: Scene) -> SuiteReport:
    """Super space action of the assembled superfield equals the component action."""
    rep = SuiteReport("reduce-action")
    target = scene.target()
    target.require_flat("the super space action")
    tol = scene.tolerances
    cliff = scene.cliff()
    grid = not scene.is_poly
    # scene's own data first
    sampler = scene.sampler(0)
    geom, c = scene.geometry(sampler), scene.fields(sampler)
    frames = wz_solve(geom, cliff)
    Phi = assemble(c, frames, cliff=cliff)
    sup = action_super(Phi, frames, cliff=cliff)
    comp, terms = action_component(c, geom, target, cliff, detail=True)
    rep.values["action"] = grassmann_text(comp)
    rep.values["terms"] = {k: grassmann_text(v) for k, v in terms.items()}
    worst = _rel((sup - comp).max_abs(), comp.max_abs())
    rt_worst = c.max_diff(components_of(Phi, frames, cliff=cliff))
    n = scene.samples["reduce_action"]
    for k in range(1, n):
        s = scene.sampler(_STREAM["reduce"] + k)
        d, size, rt, _, _ = _reduction_sample(scene, s, 1 + k % 3, grid and k % 2 == 1, cliff)
        worst = max(worst, _rel(d, size))
        rt_worst = max(rt_worst, rt)
    rep.values["samples"] = max(n, 1)
    label = "grid" if grid else "poly"
    rep.add(f"|A_super - A_component| / max(1, |A|) ({label}, every coefficient)", worst, tol["reduce_action"] if grid else 0.0)
    rep.add(f"components(assemble(c)) - c ({label})", rt_worst, tol["roundtrip"] if grid else 0.0)
    n_poly = scene.samples["reduce_action_poly"] if grid else 0
    if n_poly:
        pb = PolyBackend(8, ((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1))))
        exact_worst, rt_exact = 0.0, 0.0
        for k in range(n_poly):
            s = scene.sampler(_STREAM["reduce"] + 500 + k, backend=pb)
            d, _, rt, _, _ = _reduction_sample(scene, s, 1 + k % 3, False, cliff)
            exact_worst = max(exact_worst, float(d))
            rt_exact = max(rt_exact, float(rt))
        rep.values["poly_samples"] = n_poly
        rep.add("|A_super - A_component| (poly, exact)", exact_worst, 0.0, note="exact")
        rep.add("components(assemble(c)) - c (poly, exact)", rt_exact, 0.0, note="exact")
    return rep


# ---------------------------------------------------------------------------
# invariances
# ---------------------------------------------------------------------------
def run_invariances(scene: Scene) -> SuiteReport:
    sampler = scene.sampler(0)
    geom, c = scene.geometry(sampler), scene.fields(sampler)
    return invariance_suite(
        c, geom, scene.target(), scene.cliff(), seed=scene.seed + _STREAM["invariances"],
        param_base=scene.param_base, tolerances=scene.tolerances,
    )


# ---------------------------------------------------------------------------
# noether
# ---------------------------------------------------------------------------
def _winding_solution(gens, backend, dim: int, sampler: FieldSampler) -> ComponentFields:
    zero = SuperFunction.zero(gens, backend)
    nb = gens.n_base
    psi = []
    for A in range(dim):
        row = []
        for al in range(2):
            k = (2 * A + al) % max(nb, 1)
            val = float(sampler.rng.normal())
            row.append(SuperFunction(gens, backend, {gens.base_bit(k): backend.const(val)}) if nb else zero)
        psi.append(row)
    w = sampler.winding(dim)
    if not np.any(w):
        w[0, 0] = 1
    return ComponentFields([zero] * dim, psi, [zero] * dim, w)


def run_noether(scene: Scene) -> SuiteReport:
    """Trace identities of ``T`` and ``J``, cross-checks, and the winding-map solutions."""
    rep = SuiteReport("noether")
    if scene.is_poly:
        raise UnsupportedError("the noether suite needs the grid backend")
    tol = scene.tolerances
    cliff = scene.cliff()
    target = scene.target()
    gens, backend = scene.gens(), scene.backend()
    tr_worst, gtr_worst, t_fd, j_fd, el_fd = 0.0, 0.0, 0.0, 0.0, 0.0
    n = max(scene.samples["noether"], 1)
    for k in range(n):
        sampler = scene.sampler(0) if k == 0 else scene.sampler(_STREAM["noether"] + k)
        geom, c = scene.geometry(sampler), scene.fields(sampler)
        T, J = stress_supercurrent(c, geom, target, cliff)
        size = max(T[a][b].max_abs() for a in range(2) for b in range(2))
        tr_worst = max(tr_worst, stress_trace(T).max_abs())
        gtr_worst = max(gtr_worst, max(x.max_abs() for x in gamma_trace(J, cliff)))
        # finite-difference cross-checks along random h and delta chi
        h = [[sampler.even(0.3), sampler.even(0.2)], [None, sampler.even(0.3)]]
        h[1][0] = h[0][1]
        dc, df, dchi = metric_variation(c, geom, h)

        def A(t):
            g2 = EvenGeometry(
                [[geom.f[a][b] + df[a][b] * t for b in range(2)] for a in range(2)],
                [[geom.chi[a][b] + dchi[a][b] * t for b in range(2)] for a in range(2)],
            )
            return action_component(c.axpy(t, dc), g2, target, cliff)

        t = 1e-3
        fd = (A(-2 * t) - A(2 * t) + (A(t) - A(-t)) * 8) * (1 / (12 * t))
        pred = integrate_even(sum((h[a][b] * T[a][b] for a in range(2) for b in range(2)), SuperFunction.zero(gens, backend)) * geom.volume_density())
        t_fd = max(t_fd, _rel((fd - pred).max_abs(), fd.max_abs()))
        base = scene.param_base
        dch = [[sampler.odd(base) for _ in range(2)] for _ in range(2)]
        g_of = lambda s: EvenGeometry(geom.f, [[geom.chi[a][b] + dch[a][b] * s for b in range(2)] for a in range(2)])  # noqa: E731
        fd = (action_component(c, g_of(1.0), target, cliff) - action_component(c, g_of(-1.0), target, cliff)) * 0.5
        pred = integrate_even(sum((dch[a][al] * J[a][al] for a in range(2) for al in range(2)), SuperFunction.zero(gens, backend)) * geom.volume_density())
        # the action is quadratic in chi, so the unit-step central difference is exact
        j_fd = max(j_fd, _rel((fd - pred).max_abs(), fd.max_abs()))
        if target.flat:
            zero = SuperFunction.zero(gens, backend)
            dirs = {
                "phi": ComponentFields([sampler.even(0.2) for _ in range(c.dim)], [[zero, zero]] * c.dim, [zero] * c.dim),
                "psi": ComponentFields([zero] * c.dim, [sampler.spinor(base) for _ in range(c.dim)], [zero] * c.dim),
                "F": ComponentFields([zero] * c.dim, [[zero, zero]] * c.dim, [sampler.even(0.2) for _ in range(c.dim)]),
            }
            r = el_residuals(c, geom, target, cliff, directions=dirs)
            el_fd = max(el_fd, max(_rel(r.variational_mismatch[k_], r.directional[k_]) for k_ in dirs))
            rep.values.setdefault("size_T", size)
    rep.values["samples"] = n
    rep.add("pointwise g-trace of T", tr_worst, tol["trace"])
    rep.add("pointwise gamma-trace of J", gtr_worst, tol["trace"])
    rep.add("T: analytic vs finite difference", t_fd, tol["cross_check"])
    rep.add("J: analytic vs finite difference", j_fd, tol["cross_check"])
    if target.flat:
        rep.add("EL: operator vs variational", el_fd, tol["cross_check"])
        # winding-map / constant spinor solutions on the flat torus
        el_worst, div_worst, dbar_worst, F_worst = 0.0, 0.0, 0.0, 0.0
        flat = EvenGeometry.flat(gens, backend)
        frames = wz_solve(flat, cliff)
        for k in range(2):
            sampler = scene.sampler(_STREAM["noether"] + 100 + k)
            sol = _winding_solution(gens, backend, target.dim, sampler)
            r = el_residuals(sol, flat, target, cliff, frames=frames)
            el_worst = max(el_worst, r.max_residual)
            T, _ = stress_supercurrent(sol, flat, target, cliff)
            div_worst = max(div_worst, max(x.max_abs() for x in tensor_divergence(T, flat)))
            _, dbar = quadratic_differential(T, atol=tol["trace"])
            dbar_worst = max(dbar_worst, dbar)
            # switching on F violates only the auxiliary equation, by i^* Delta^D Phi = 2F
            F = sampler.even(0.3)
            withF = ComponentFields(sol.phi, sol.psi, [F] + sol.F[1:], sol.winding)
            rF = el_residuals(withF, flat, target, cliff, frames=frames)
            F_worst = max(F_worst, (rF.fields["F"][0] - F * 2).max_abs())
        rep.add("winding solutions: EL residual", el_worst, tol["el_residual"])
        rep.add("winding solutions: divergence of T", div_worst, tol["divergence"])
        rep.add("winding solutions: d-bar of T dz^2", dbar_worst, tol["dbar"])
        rep.add("i^* Delta^D Phi - 2F", F_worst, tol["el_residual"])
    else:
        rep.values["skipped"] = "Euler-Lagrange operator and winding solutions need a flat target"
    return rep


# ---------------------------------------------------------------------------
# deformation
# ---------------------------------------------------------------------------
def _mod_const(u: SuperFunction) -> float:
    return (u - mean(u)).max_abs()


def run_deformation(scene: Scene) -> SuiteReport:
    """Gauge deformations recover their parameters; holomorphic parts; linearity."""
    rep = SuiteReport("deformation")
    if scene.is_poly:
        raise UnsupportedError("the deformation suite needs the grid backend")
    tol = scene.tolerances
    cliff = scene.cliff()
    gens, backend = scene.gens(), scene.backend()
    flat = EvenGeometry.flat(gens, backend)
    zero = SuperFunction.zero(gens, backend)
    x1, x2 = backend.points()
    nb = gens.n_base
    b0 = (scene.param_base or (0,))[:1] if nb else ()

    def const(v, k=None):
        return SuperFunction(gens, backend, {0 if k is None else gens.base_bit(k): v + 0 * x1})

    zrho = [[zero, zero], [zero, zero]]
    # pure Weyl
    r = decompose([[const(0.7), zero], [zero, const(0.7)]], zrho, flat, cliff)
    err = max((r.lam - const(0.7)).max_abs(), r.X[0].max_abs(), r.X[1].max_abs(), max(r.D[i][j].max_abs() for i in range(2) for j in range(2)))
    rep.add("pure Weyl: lam = lam0, X = 0, D = 0", err, tol["gauge_recovery"])
    # Lie derivative of X = (sin x2, 0)
    X0 = [SuperFunction(gens, backend, {0: np.sin(x2)}), zero]
    r = decompose(lie_derivative_metric(X0), zrho, flat, cliff)
    err = max(_mod_const(r.X[0] - X0[0]), _mod_const(r.X[1]), r.lam.max_abs(), max(r.D[i][j].max_abs() for i in range(2) for j in range(2)))
    rep.add("h = L_X delta: X recovered up to constants, D = 0", err, tol["gauge_recovery"])
    # constant trace-free h is already holomorphic
    hc = [[const(0.4), const(-0.3)], [const(-0.3), const(-0.4)]]
    r = decompose(hc, zrho, flat, cliff)
    err = max(max((r.D[i][j] - hc[i][j]).max_abs() for i in range(2) for j in range(2)), r.lam.max_abs(), r.X[0].max_abs(), r.X[1].max_abs())
    rep.add("constant trace-free h: D = h, X = 0, lam = 0", err, tol["gauge_recovery"])
    (re, im), _ = quadratic_differential([[const(0.5), zero], [zero, const(-0.5)]])
    rep.add("[[a,0],[0,-a]] -> a dz^2", max((re - const(0.5)).max_abs(), im.max_abs()), 0.0, note="exact")
    if b0:
        q0 = [SuperFunction(gens, backend, {gens.base_bit(b0[0]): 0.8 * np.cos(x1)}), zero]
        r = decompose([[zero, zero], [zero, zero]], susy_gravitino(q0, cliff), flat, cliff)
        err = max(
            max(_mod_const(r.q[i] - q0[i]) for i in range(2)),
            max(r.Dspin[a][al].max_abs() for a in range(2) for al in range(2)),
            max(x.max_abs() for x in r.t),
        )
        rep.add("rho = nabla q, q = c cos x1: q recovered up to constants, Dspin = 0", err, tol["gauge_recovery"])

    # random forward-constructed deformations
    rec_worst, gauge_worst, holo_worst = 0.0, 0.0, 0.0
    for k in range(max(scene.samples["deformation_pairs"], 1)):
        s = scene.sampler(_STREAM["deformation"] + k)
        h, rho, truth = _forward_deformation(s, gens, backend, cliff, scene.param_base)
        r = decompose(h, rho, flat, cliff)
        rec_worst = max(rec_worst, r.residuals["reconstruction_metric"], r.residuals["reconstruction_gravitino"])
        holo_worst = max(holo_worst, r.residuals["holomorphic_D"], r.residuals["holomorphic_Dspin"])
        errs = [(r.lam - truth["lam"]).max_abs()]
        errs += [_mod_const(r.X[i] - truth["X"][i]) for i in range(2)]
        errs += [(r.D[i][j] - truth["D"][i][j]).max_abs() for i in range(2) for j in range(2)]
        errs += [_mod_const(r.q[i] - truth["q"][i]) for i in range(2)]
        errs += [(r.t[i] - truth["t"][i]).max_abs() for i in range(2)]
        errs += [(r.Dspin[a][al] - truth["Dspin"][a][al]).max_abs() for a in range(2) for al in range(2)]
        gauge_worst = max(gauge_worst, max(errs))
    rep.add("forward-constructed: parameters recovered (X, q up to constants)", gauge_worst, tol["gauge_recovery"])
    rep.add("forward-constructed: reconstruction residual", rec_worst, tol["reconstruction"])
    rep.add("forward-constructed: d-bar of holomorphic parts", holo_worst, tol["gauge_recovery"])

    # linearity on random pairs
    lin_worst = 0.0
    for k in range(max(scene.samples["deformation_pairs"], 1)):
        s = scene.sampler(_STREAM["deformation"] + 200 + k)
        h1, rho1, _ = _forward_deformation(s, gens, backend, cliff, scene.param_base)
        h2, rho2, _ = _forward_deformation(s, gens, backend, cliff, scene.param_base)
        a, b = 0.7, -1.3
        r1, r2 = decompose(h1, rho1, flat, cliff), decompose(h2, rho2, flat, cliff)
        r12 = decompose(
            [[h1[i][j] * a + h2[i][j] * b for j in range(2)] for i in range(2)],
            [[rho1[i][j] * a + rho2[i][j] * b for j in range(2)] for i in range(2)],
            flat,
            cliff,
        )
        pairs = [(r12.lam, r1.lam, r2.lam)] + list(zip(r12.X, r1.X, r2.X)) + list(zip(r12.q, r1.q, r2.q)) + list(zip(r12.t, r1.t, r2.t))
        pairs += [(r12.D[i][j], r1.D[i][j], r2.D[i][j]) for i in range(2) for j in range(2)]
        pairs += [(r12.Dspin[i][j], r1.Dspin[i][j], r2.Dspin[i][j]) for i in range(2) for j in range(2)]
        lin_worst = max(lin_worst, max((u - v * a - w * b).max_abs() for u, v, w in pairs))
    rep.add("linearity", lin_worst, tol["gauge_recovery"])

    # scene-declared deformation
    h, rho = scene.deformation()
    r = decompose(h, rho, flat, cliff)
    rep.values["declared"] = {k: float(f"{v:.6e}") for k, v in r.residuals.items()}
    rep.values["declared_D"] = [[float(f"{mean(r.D[i][j]).body.flat[0]:.12g}") for j in range(2)] for i in range(2)]
    rep.add("declared: reconstruction residual", max(r.residuals["reconstruction_metric"], r.residuals["reconstruction_gravitino"]), tol["reconstruction"])
    rep.add("declared: d-bar of D and Dspin", max(r.residuals["holomorphic_D"], r.residuals["holomorphic_Dspin"]), tol["dbar"])
    rep.add("declared: susy(q) moves no metric (chi = 0)", r.residuals["susy_metric_part"], 0.0, note="exact")
    return rep


def _forward_deformation(s: FieldSampler, gens, backend, cliff, base):
    """Random ``(h, rho)`` assembled from known parameters; returns the truth as well."""
    zero = SuperFunction.zero(gens, backend)
    x1 = backend.points()[0]

    def const(v, k=None):
        return SuperFunction(gens, backend, {0 if k is None else gens.base_bit(k): v + 0 * x1})

    lam = s.even(0.3)
    X = [s.even(0.2), s.even(0.2)]
    a, b = s.rng.normal(size=2) * 0.5
    D = [[const(a), const(b)], [const(b), const(-a)]]
    LX = lie_derivative_metric(X)
    h = [[lam * int(i == j) + LX[i][j] + D[i][j] for j in range(2)] for i in range(2)]
    if base:
        q, t = s.spinor(base), s.spinor(base)
        u, v = s.rng.normal(size=2) * 0.5
        Ds = [[const(u, base[0]), const(v, base[-1])], [const(v, base[-1]), const(-u, base[0])]]
    else:
        q = t = [zero, zero]
        Ds = [[zero, zero], [zero, zero]]
    sq, sw = susy_gravitino(q, cliff), super_weyl_gravitino(t, cliff)
    rho = [[sq[i][j] + sw[i][j] + Ds[i][j] for j in range(2)] for i in range(2)]
    return h, rho, {"lam": lam, "X": X, "D": D, "q": q, "t": t, "Dspin": Ds}


# ---------------------------------------------------------------------------
# berezin-covariance
# ---------------------------------------------------------------------------
def _random_grid_map(s: FieldSampler, gens, backend) -> SuperMap:
    """Torus diffeomorphism plus nilpotent and odd corrections (periodic displacements)."""
    e1 = SuperFunction.coordinate(gens, backend, "e1")
    e2 = SuperFunction.coordinate(gens, backend, "e2")
    nb = gens.n_base
    base = tuple(range(nb))
    pairs = tuple((i, i + 1) for i in range(0, nb - 1, 2))[:2]
    disp = []
    for _ in range(2):
        d = s.even(0.05, nilpotent=pairs) + e1 * e2 * s.even(0.2)
        if base:
            d = d + e1 * s.odd(base[:2], 0.2) + e2 * s.odd(base[-2:], 0.2)
        disp.append(d)
    odd_imgs = []
    for e in (e1, e2):
        img = e * s.even(0.05, 1.0, nilpotent=pairs[:1])
        if base:
            img = img + s.odd(base[:3], 0.2) + e1 * e2 * s.odd(base[:1], 0.2)
        odd_imgs.append(img)
    return SuperMap(
        {
            "x1": grid_coordinate_image(gens, backend, 0, disp[0]),
            "x2": grid_coordinate_image(gens, backend, 1, disp[1]),
            "e1": odd_imgs[0],
            "e2": odd_imgs[1],
        }
    )


def _random_poly_map(s: FieldSampler, gens, backend) -> SuperMap:
    """Box-preserving change: nilpotent displacements carry the bubble ``x1(1-x1)x2(1-x2)``."""
    (a1, b1_), (a2, b2_) = backend.box
    bubble = Poly({(1, 0): 1, (0, 0): -a1}, backend.max_degree) * Poly({(1, 0): -1, (0, 0): b1_}, backend.max_degree)
    bubble = bubble * Poly({(0, 1): 1, (0, 0): -a2}, backend.max_degree) * Poly({(0, 1): -1, (0, 0): b2_}, backend.max_degree)
    w = SuperFunction(gens, backend, {0: bubble})
    x1 = SuperFunction.coordinate(gens, backend, "x1")
    x2 = SuperFunction.coordinate(gens, backend, "x2")
    e1 = SuperFunction.coordinate(gens, backend, "e1")
    e2 = SuperFunction.coordinate(gens, backend, "e2")
    nb = gens.n_base
    base = tuple(range(nb))

    def r():
        return SuperFunction.const(gens, backend, s._rational())

    def bnil(k1, k2):
        if nb < 2:
            return SuperFunction.zero(gens, backend)
        return SuperFunction(gens, backend, {gens.base_bit(k1 % nb) | gens.base_bit(k2 % nb): backend.const(s._rational())})

    disp = []
    for k in range(2):
        d = e1 * e2 * r() + bnil(2 * k, 2 * k + 1)
        if base:
            d = d + e1 * s.odd(base[:1], 1) * r() + e2 * s.odd(base[-1:], 1) * r()
        disp.append(w * d)
    odd_imgs = []
    for e in (e1, e2):
        img = e * (SuperFunction.const(gens, backend, 1) + r() * bnil(0, 1))
        if base:
            img = img + s.odd(base[:2]) + e1 * e2 * s.odd(base[:1])
        odd_imgs.append(img)
    return SuperMap({"x1": x1 + disp[0], "x2": x2 + disp[1], "e1": odd_imgs[0], "e2": odd_imgs[1]})


def _random_density(s: FieldSampler, gens, backend) -> BerezinDensity:
    e1 = SuperFunction.coordinate(gens, backend, "e1")
    e2 = SuperFunction.coordinate(gens, backend, "e2")
    nb = gens.n_base
    pairs = tuple((i, i + 1) for i in range(0, nb - 1, 2))[:2]
    rho = s.even(0.4, 0.5, nilpotent=pairs) + e1 * e2 * s.even(0.4, nilpotent=pairs)
    if nb:
        rho = rho + e1 * s.odd(tuple(range(nb))[:2]) + e2 * s.odd(tuple(range(nb))[-2:])
    return BerezinDensity(rho)


def _random_super_matrix(rng, gens: GeneratorSet) -> SuperMatrix:
    def rat():
        return Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4)))

    def element(parity, invertible=False):
        terms = {}
        for mask in range(1 << gens.count):
            if bin(mask).count("1") % 2 != parity or bin(mask).count("1") > 3:
                continue
            if rng.random() < 0.5:
                terms[mask] = rat()
        if invertible:
            terms[0] = Fraction(int(rng.integers(1, 5))) * (1 if rng.random() < 0.5 else -1)
        return GrassmannElement(gens, terms)

    while True:
        rows = []
        for i in range(4):
            row = []
            for j in range(4):
                even = (i < 2) == (j < 2)
                row.append(element(0 if even else 1, invertible=even and i == j))
            rows.append(row)
        # both even blocks must be invertible at the body
        dets = [rows[k][k].body * rows[k + 1][k + 1].body - rows[k][k + 1].body * rows[k + 1][k].body for k in (0, 2)]
        if all(dets):
            return SuperMatrix(rows, 2)


def run_berezin_covariance(scene: Scene) -> SuiteReport:
    """Integrals are invariant under coordinate changes; Ber is multiplicative."""
    rep = SuiteReport("berezin-covariance")
    tol = scene.tolerances
    gens = scene.gens()
    n = scene.samples["berezin_maps"]
    grid_backend = scene.backend() if not scene.is_poly else GridBackend(32)
    # the bubble factor of the box-preserving maps needs a generous degree bound
    box = scene.backend().box if scene.is_poly else ((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))
    poly_backend = PolyBackend(32, box)
    worst = 0.0
    for k in range(n):
        s = scene.sampler(_STREAM["berezin"] + k, backend=grid_backend)
        b = _random_density(s, gens, grid_backend)
        m = _random_grid_map(s, gens, grid_backend)
        i0 = berezin_integrate(b)
        i1 = berezin_integrate(transform_density(b, m))
        worst = max(worst, _rel((i1 - i0).max_abs(), i0.max_abs()))
    rep.add("integral invariance under coordinate changes (grid)", worst, tol["berezin"])
    worst = 0.0
    for k in range(n):
        s = scene.sampler(_STREAM["berezin"] + 500 + k, backend=poly_backend)
        b = _random_density(s, gens, poly_backend)
        m = _random_poly_map(s, gens, poly_backend)
        worst = max(worst, float((berezin_integrate(transform_density(b, m)) - berezin_integrate(b)).max_abs()))
    rep.add("integral invariance under coordinate changes (poly, exact)", worst, 0.0, note="exact")
    rep.values["coordinate_changes"] = n
    rng = np.random.default_rng(np.random.SeedSequence([scene.seed, _STREAM["berezin"] + 900]))
    mgens = GeneratorSet(0, min(gens.n_base, 6))
    bad = 0
    m_count = scene.samples["ber_matrices"]
    for _ in range(m_count):
        M, N = _random_super_matrix(rng, mgens), _random_super_matrix(rng, mgens)
        if berezinian(M @ N) != berezinian(M) * berezinian(N):
            bad += 1
    rep.values["ber_matrices"] = m_count
    rep.add("Ber(MN) != Ber(M) Ber(N) (count, exact rationals)", bad, 0.0, note="exact")
    return rep


RUNNERS = {
    "srs-model": run_srs_model,
    "wz-solve": run_wz_solve,
    "reduce-action": run_reduce_action,
    "invariances": run_invariances,
    "noether": run_noether,
    "deformation": run_deformation,
    "berezin-covariance": run_berezin_covariance,
}


def run_suite(scene: Scene, name: str, strict: bool = True) -> SuiteReport:
    """Run one suite; package errors become a failing check named after the error class.

    With ``strict`` off, an :class:`UnsupportedError` (suite not applicable
    to this backend or target) is recorded under ``values['unsupported']``
    without failing the report.
    """
    try:
        return RUNNERS[name](scene)
    except SupergeomError as exc:
        rep = SuiteReport(name)
        info = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, UnsupportedError) and not strict:
            rep.values["unsupported"] = info
            return rep
        rep.add(type(exc).__name__, float("inf"), 0.0, note=str(exc))
        rep.values["error"] = info
        return rep
