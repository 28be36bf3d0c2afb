"""Supersymmetric sigma model: superspace action, component reduction and invariances."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .coeffs import GridBackend, PolyBackend
from .errors import ConfigurationError, UnsupportedError
from .grassmann import GrassmannElement, Parity
from .supercalc import (
    BerezinDensity,
    apply,
    berezin_integrate,
    divergence,
    frame_berezinian,
    integrate_even,
)
from .superfield import SuperFunction, SuperMap
from .srs import (
    CliffordData,
    EvenGeometry,
    WZFrame,
    g_action,
    gamma_apply,
    spin_connection,
    spinor_derivative,
    susy_variation,
    wz_solve,
)


@dataclass
class TargetSpace:
    """Target ``R^p`` (flat) or a Riemannian manifold given by callbacks.

    Curved callbacks take a list of ``p`` body arrays (the map ``phi``) and
    return ``metric[A][B]``, ``christoffel[A][B][C]`` (``Gamma^A_{BC}``) and
    ``riemann[A][B][C][D]`` (``<R(e_C, e_D) e_B, e_A>`` convention: ``R_{ABCD}``)
    as arrays on the grid.
    """

    dim: int = 1
    metric: Callable | None = None
    christoffel: Callable | None = None
    riemann: Callable | None = None

    @property
    def flat(self) -> bool:
        return self.metric is None

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError("target dimension must be positive")
        given = [self.metric is not None, self.christoffel is not None, self.riemann is not None]
        if any(given) and not all(given):
            raise ConfigurationError("curved targets need metric, christoffel and riemann callbacks")

    def require_flat(self, what: str):
        if not self.flat:
            raise UnsupportedError(f"{what} is only implemented for flat targets")

    def check_symmetries(self, phi_body, atol=1e-10) -> float:
        """Max violation of the Riemann tensor symmetries at the sampled points."""
        if self.flat:
            return 0.0
        R = self.riemann(phi_body)
        p, worst = self.dim, 0.0
        for a in range(p):
            for b in range(p):
                for c in range(p):
                    for d in range(p):
                        r = np.asarray(R[a][b][c][d])
                        worst = max(worst, np.max(np.abs(r + np.asarray(R[b][a][c][d]))))
                        worst = max(worst, np.max(np.abs(r + np.asarray(R[a][b][d][c]))))
                        worst = max(worst, np.max(np.abs(r - np.asarray(R[c][d][a][b]))))
                        bian = r + np.asarray(R[a][c][d][b]) + np.asarray(R[a][d][b][c])
                        worst = max(worst, np.max(np.abs(bian)))
        return float(worst)


@dataclass
class ComponentFields:
    """``phi[p]`` even, ``psi[p][alpha]`` odd, ``F[p]`` even fiber-free super functions."""

    phi: list
    psi: list
    F: list
    winding: np.ndarray | None = None

    def __post_init__(self):
        if not (len(self.phi) == len(self.psi) == len(self.F)):
            raise ConfigurationError("phi, psi and F need the same target dimension")
        if self.winding is not None:
            self.winding = np.asarray(self.winding, dtype=float)
            if self.winding.shape != (len(self.phi), 2):
                raise ConfigurationError("winding must be a (p, 2) matrix")
            if not np.any(self.winding):
                self.winding = None
        for p in range(len(self.phi)):
            for name, val, want in (("phi", self.phi[p], Parity.EVEN), ("F", self.F[p], Parity.EVEN)):
                if not val.is_zero() and val.parity() is not want:
                    raise ConfigurationError(f"{name} must be even")
                if val.fiber_degree():
                    raise ConfigurationError(f"{name} must not depend on fiber generators")
            for v in self.psi[p]:
                if not v.is_zero() and v.parity() is not Parity.ODD:
                    raise ConfigurationError("psi must be odd")
                if v.fiber_degree():
                    raise ConfigurationError("psi must not depend on fiber generators")

    @property
    def dim(self) -> int:
        return len(self.phi)

    def map(self, fn) -> "ComponentFields":
        """Apply ``fn`` to every periodic field; the winding is kept."""
        return ComponentFields(
            [fn(x) for x in self.phi], [[fn(x) for x in ps] for ps in self.psi], [fn(x) for x in self.F], self.winding
        )

    def axpy(self, t, other: "ComponentFields") -> "ComponentFields":
        """``self + t * other`` (windings add as well)."""
        w = self.winding
        if other.winding is not None:
            w = (0 if w is None else w) + t * other.winding
        return ComponentFields(
            [a + b * t for a, b in zip(self.phi, other.phi)],
            [[a + b * t for a, b in zip(pa, pb)] for pa, pb in zip(self.psi, other.psi)],
            [a + b * t for a, b in zip(self.F, other.F)],
            w,
        )

    def max_diff(self, other: "ComponentFields") -> float:
        vals = [(a - b).max_abs() for a, b in zip(self.phi, other.phi)]
        vals += [(a - b).max_abs() for pa, pb in zip(self.psi, other.psi) for a, b in zip(pa, pb)]
        vals += [(a - b).max_abs() for a, b in zip(self.F, other.F)]
        w1 = np.zeros((self.dim, 2)) if self.winding is None else self.winding
        w2 = np.zeros((other.dim, 2)) if other.winding is None else other.winding
        vals.append(float(np.max(np.abs(w1 - w2))))
        return max(vals)


def _num(backend, v):
    return Fraction(v) if isinstance(backend, PolyBackend) else float(v)


def _frames_of(frames):
    return frames.frames if isinstance(frames, WZFrame) else list(frames)


@dataclass
class SuperfieldMap:
    """Components ``Phi^# Y^B`` of a map into ``R^p``.

    ``winding[B][b]`` adds the non-periodic part ``winding[B][b] x^b`` (maps
    from the torus with nonzero degree); the stored components are periodic.
    """

    components: list
    winding: np.ndarray | None = None

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, k):
        return self.components[k]


def _require_components(Phi):
    """``(components, winding)`` of a superfield given as map, list or single function."""
    if isinstance(Phi, SuperfieldMap):
        return list(Phi.components), Phi.winding
    if isinstance(Phi, SuperFunction):
        return [Phi], None
    return list(Phi), None


def _apply_winding(F, comp, w):
    """``F(Phi^B)`` including the derivative ``w_b F^{x^b}`` of the linear part."""
    out = apply(F, comp)
    if w is not None:
        for b in range(2):
            if w[b]:
                out = out + F.components[b] * _num(comp.backend, w[b])
    return out


# ---------------------------------------------------------------------------
# superspace side
# ---------------------------------------------------------------------------
def frame_density(frames) -> BerezinDensity:
    """``[F^1 F^2 F^3 F^4] = (Ber F)^-1 [dx de]``."""
    return BerezinDensity(frame_berezinian(_frames_of(frames)).inverse())


def d_laplacian(Phi, frames, density: BerezinDensity | None = None, cliff: CliffordData | None = None, target=None):
    """``Delta^D Phi = eps^{ab} (F_a F_b Phi + (Div F_a) F_b Phi)`` for each target component."""
    if target is not None:
        target.require_flat("the superspace D-Laplacian")
    cliff = cliff or CliffordData()
    fr = _frames_of(frames)
    density = density or frame_density(frames)
    odd = fr[2:]
    divs = [divergence(F, density) for F in odd]
    e = cliff.eps_inv
    out = []
    comps, wind = _require_components(Phi)
    for B, comp in enumerate(comps):
        Fb = [_apply_winding(F, comp, None if wind is None else wind[B]) for F in odd]
        acc = SuperFunction.zero(comp.gens, comp.backend)
        for al in range(2):
            for be in range(2):
                if e[al, be]:
                    term = apply(odd[al], Fb[be]) + divs[al] * Fb[be]
                    acc = acc + term * int(e[al, be])
        out.append(acc)
    return out


def lagrangian_super(Phi, frames, cliff: CliffordData | None = None) -> SuperFunction:
    """``(1/2) eps^{ab} <F_a Phi, F_b Phi>`` times the frame density ``[F^1 F^2 F^3 F^4]``."""
    cliff = cliff or CliffordData()
    fr = _frames_of(frames)
    odd = fr[2:]
    e = cliff.eps_inv
    comps, wind = _require_components(Phi)
    acc = SuperFunction.zero(comps[0].gens, comps[0].backend)
    for B, comp in enumerate(comps):
        Fb = [_apply_winding(F, comp, None if wind is None else wind[B]) for F in odd]
        for al in range(2):
            for be in range(2):
                if e[al, be]:
                    acc = acc + Fb[al] * Fb[be] * int(e[al, be])
    dens = frame_density(frames).rho
    half = _num(acc.backend, Fraction(cliff.density_sign, 2))
    return acc * dens * half


def action_super(Phi, frames, density=None, cliff: CliffordData | None = None, target=None) -> GrassmannElement:
    """Berezin integral of the superspace Lagrangian (flat target)."""
    if target is not None:
        target.require_flat("the superspace action")
    return berezin_integrate(BerezinDensity(lagrangian_super(Phi, frames, cliff)))


def components_of(Phi, frames, emb: SuperMap | None = None, cliff: CliffordData | None = None) -> ComponentFields:
    """``phi = i^# Phi``, ``psi_a = i^# F_a Phi``, ``F = (1/2) i^# Delta^D Phi``."""
    if emb is not None and not emb.is_normalized():
        from .errors import NotNormalizedError

        raise NotNormalizedError("components_of needs a normalized embedding")
    fr = _frames_of(frames)
    comps, wind = _require_components(Phi)
    lap = d_laplacian(Phi, frames, cliff=cliff)
    half = _num(comps[0].backend, Fraction(1, 2))
    phi = [c.restrict() for c in comps]
    psi = [
        [_apply_winding(F, c, None if wind is None else wind[B]).restrict() for F in fr[2:]]
        for B, c in enumerate(comps)
    ]
    aux = [l.restrict() * half for l in lap]
    return ComponentFields(phi, psi, aux, wind)


def assemble(c: ComponentFields, frames, emb: SuperMap | None = None, cliff: CliffordData | None = None) -> SuperfieldMap:
    """Superfield with the given components (inverse of :func:`components_of`)."""
    cliff = cliff or CliffordData()
    gens, backend = c.phi[0].gens, c.phi[0].backend
    e1 = SuperFunction.coordinate(gens, backend, "e1")
    e2 = SuperFunction.coordinate(gens, backend, "e2")
    low = [c.phi[p] + e1 * c.psi[p][0] + e2 * c.psi[p][1] for p in range(c.dim)]
    lap = d_laplacian(SuperfieldMap(low, c.winding), frames, cliff=cliff)
    half = _num(backend, Fraction(1, 2))
    top = e2 * e1
    out = []
    for p in range(c.dim):
        # i^# Delta^D (eta^2 eta^1 k) = 2 eps^{12} k
        kappa = (c.F[p] - lap[p].restrict() * half) * int(cliff.eps_inv[0, 1])
        out.append(low[p] + top * kappa)
    return SuperfieldMap(out, c.winding)


# ---------------------------------------------------------------------------
# component side
# ---------------------------------------------------------------------------
def _pair(e, u, v):
    """``e[a, b] u_a v_b`` for a constant 2x2 matrix ``e``."""
    acc = None
    for al in range(2):
        for be in range(2):
            if e[al, be]:
                t = u[al] * v[be] * int(e[al, be])
                acc = t if acc is None else acc + t
    return acc


def _frame_derivative(geom: EvenGeometry, a: int, c: ComponentFields, A: int) -> SuperFunction:
    """``f_a(phi^A)`` including the winding part."""
    out = geom.frame_apply(a, c.phi[A])
    if c.winding is not None:
        for b in range(2):
            if c.winding[A, b]:
                out = out + geom.f[a][b] * _num(geom.backend, c.winding[A, b])
    return out


def component_terms(
    c: ComponentFields, geom: EvenGeometry, target: TargetSpace | None = None, cliff=None, densitize=True
) -> dict:
    """Pointwise Lagrangian terms, multiplied by the volume density unless ``densitize`` is off."""
    cliff = cliff or CliffordData()
    target = target or TargetSpace(c.dim)
    if target.dim != c.dim:
        raise ConfigurationError("target dimension does not match the fields")
    gam = cliff.gamma
    dgam = cliff.dual_gamma
    p = c.dim
    dvol = geom.volume_density() if densitize else SuperFunction.const(geom.gens, geom.backend, 1)
    gens, backend = geom.gens, geom.backend
    zero = SuperFunction.zero(gens, backend)
    if target.flat:
        n = [[1 if A == B else 0 for B in range(p)] for A in range(p)]
        chris = None
    else:
        for x in c.phi:
            if x.nilpotent().max_abs():
                raise UnsupportedError("curved targets need a purely even (body-only) map phi")
        if c.winding is not None:
            raise UnsupportedError("windings are only supported for flat targets")
        body = [x.body for x in c.phi]
        n = [[SuperFunction(gens, backend, {0: v}) for v in row] for row in target.metric(body)]
        chris = [[[SuperFunction(gens, backend, {0: v}) for v in r2] for r2 in r1] for r1 in target.christoffel(body)]

    def nmul(A, B, val):
        w = n[A][B]
        if isinstance(w, int):
            return val if w == 1 else (zero if w == 0 else val * w)
        return w * val

    dphi = [[_frame_derivative(geom, a, c, A) for A in range(p)] for a in range(2)]
    # covariant derivative of psi along f_a
    dpsi = []
    for a in range(2):
        row = []
        for A in range(p):
            v = spinor_derivative(geom, cliff, a, c.psi[A], dual=True)
            if chris is not None:
                for B in range(p):
                    for C in range(p):
                        for al in range(2):
                            v[al] = v[al] + chris[A][B][C] * dphi[a][B] * c.psi[C][al]
            row.append(v)
        dpsi.append(row)

    kinetic = zero
    dirac = zero
    aux = zero
    for A in range(p):
        for B in range(p):
            if target.flat and A != B:
                continue
            for a in range(2):
                kinetic = kinetic + nmul(A, B, dphi[a][A] * dphi[a][B])
                dirac = dirac + nmul(A, B, _pair(cliff.eps_inv, c.psi[A], gamma_apply(dgam[a], dpsi[a][B])))
            aux = aux - nmul(A, B, c.F[A] * c.F[B])
    coupling = zero
    for a in range(2):
        for b in range(2):
            # row spinor chi_a^T gamma^b gamma^a, paired with psi by the S x S^* duality
            row = gamma_apply((gam[b] @ gam[a]).T, geom.chi[a])
            for A in range(p):
                for B in range(p):
                    if target.flat and A != B:
                        continue
                    dual = row[0] * c.psi[B][0] + row[1] * c.psi[B][1]
                    coupling = coupling + nmul(A, B, dual * dphi[b][A]) * 2
    chichi = zero
    for a in range(2):
        for b in range(2):
            chichi = chichi + _pair(cliff.eps, geom.chi[a], gamma_apply(gam[b] @ gam[a], geom.chi[b]))
    psipsi = zero
    for A in range(p):
        for B in range(p):
            if target.flat and A != B:
                continue
            psipsi = psipsi + nmul(A, B, _pair(cliff.eps_inv, c.psi[A], c.psi[B]))
    quartic = chichi * psipsi * _num(backend, Fraction(1, 2))
    terms = {
        "kinetic": kinetic * dvol,
        "dirac": dirac * dvol,
        "auxiliary": aux * dvol,
        "coupling": coupling * dvol,
        "quartic": quartic * dvol,
    }
    if not target.flat:
        R = target.riemann([x.body for x in c.phi])
        e = cliff.eps_inv
        curv = zero
        for al in range(2):
            for be in range(2):
                for ga in range(2):
                    for de in range(2):
                        s = e[al, be] * e[ga, de]
                        if not s:
                            continue
                        for A in range(p):
                            for B in range(p):
                                for C in range(p):
                                    for D in range(p):
                                        r = R[A][B][C][D]
                                        if not np.any(r):
                                            continue
                                        # <R(psi_al, psi_ga) psi_de, psi_be>
                                        val = c.psi[C][al] * c.psi[D][ga] * c.psi[B][de] * c.psi[A][be]
                                        curv = curv + SuperFunction(gens, backend, {0: r}) * val * int(s)
        terms["curvature"] = curv * dvol * _num(backend, Fraction(1, 6))
    return terms


def lagrangian_component(c, geom, target=None, cliff=None) -> SuperFunction:
    terms = component_terms(c, geom, target, cliff)
    out = None
    for v in terms.values():
        out = v if out is None else out + v
    return out


def action_component(c, geom, target=None, cliff=None, detail=False):
    """Component action; with ``detail`` also the integrated value of every term."""
    terms = component_terms(c, geom, target, cliff)
    values = {k: integrate_even(v) for k, v in terms.items()}
    total = None
    for v in values.values():
        total = v if total is None else total + v
    return (total, values) if detail else total


# ---------------------------------------------------------------------------
# symmetries
# ---------------------------------------------------------------------------
def susy_field_variation(c: ComponentFields, geom: EvenGeometry, q: list, cliff=None) -> ComponentFields:
    """``delta phi = <q, psi>``, ``delta psi = (f_k phi - <psi, chi_k>) (gamma^k q)^flat``, ``delta F = 0``.

    ``<q, psi>`` is the duality pairing of a spinor with a cospinor and
    ``flat`` lowers a spinor index with the spinor metric.  Only meant for
    ``F = 0``: the auxiliary field is left untouched.
    """
    cliff = cliff or CliffordData()
    gam = cliff.gamma
    K = cliff.lowering
    gq = [gamma_apply(K @ gam[k], q) for k in range(2)]
    dphi, dpsi = [], []
    for A in range(c.dim):
        ps = c.psi[A]
        dphi.append(q[0] * ps[0] + q[1] * ps[1])
        w = [_frame_derivative(geom, k, c, A) - (ps[0] * geom.chi[k][0] + ps[1] * geom.chi[k][1]) for k in range(2)]
        dpsi.append([w[0] * gq[0][al] + w[1] * gq[1][al] for al in range(2)])
    zero = SuperFunction.zero(geom.gens, geom.backend)
    return ComponentFields(dphi, dpsi, [zero] * c.dim)


def translation_variation(c: ComponentFields, geom: EvenGeometry, v) -> tuple:
    """First-order change of all fields under the translation ``x -> x + t v`` (``v`` constant)."""

    def lie(u):
        return u.d_even(0) * _num(u.backend, v[0]) + u.d_even(1) * _num(u.backend, v[1])

    dc = c.map(lie)
    if c.winding is not None:
        shift = c.winding @ np.asarray(v, dtype=float)
        dc = ComponentFields(
            [x + SuperFunction.const(x.gens, x.backend, _num(x.backend, s)) for x, s in zip(dc.phi, shift)],
            dc.psi,
            dc.F,
        )
    df = [[lie(geom.f[a][b]) for b in range(2)] for a in range(2)]
    dchi = [[lie(geom.chi[a][b]) for b in range(2)] for a in range(2)]
    return dc, df, dchi


def _shift_geometry(geom: EvenGeometry, df, dchi, t) -> EvenGeometry:
    return EvenGeometry(
        [[geom.f[a][b] + df[a][b] * t for b in range(2)] for a in range(2)],
        [[geom.chi[a][b] + dchi[a][b] * t for b in range(2)] for a in range(2)],
    )


def conformal_transform(c: ComponentFields, geom: EvenGeometry, lam: SuperFunction) -> tuple:
    """``g -> lam^2 g`` with the weights ``f -> f/lam``, ``chi, psi -> lam^-1/2 (.)``, ``F -> F/lam``."""
    if isinstance(lam.backend, PolyBackend):
        raise UnsupportedError("conformal rescaling needs square roots; use the grid backend")
    b = lam.body
    if np.any(b <= 0):
        raise ConfigurationError("conformal factor must be positive")
    inv = lam.inverse()
    ders = [b ** -0.5]
    for k in range(1, 6):
        ders.append(ders[-1] * (-0.5 - (k - 1)) / b)
    isq = lam.apply_scalar_function(ders)
    new_geom = EvenGeometry(
        [[inv * geom.f[a][b_] for b_ in range(2)] for a in range(2)],
        [[isq * geom.chi[a][b_] for b_ in range(2)] for a in range(2)],
    )
    new_c = ComponentFields(
        list(c.phi), [[isq * x for x in ps] for ps in c.psi], [inv * x for x in c.F], c.winding
    )
    return new_c, new_geom


def super_weyl_transform(geom: EvenGeometry, s: list, cliff=None) -> EvenGeometry:
    """``chi_a -> chi_a + gamma_a s``."""
    cliff = cliff or CliffordData()
    gam = cliff.gamma
    chi = []
    for a in range(2):
        gs = gamma_apply(gam[a], s)
        chi.append([geom.chi[a][al] + gs[al] for al in range(2)])
    return EvenGeometry([list(r) for r in geom.f], chi)


# ---------------------------------------------------------------------------
# Euler-Lagrange equations
# ---------------------------------------------------------------------------
@dataclass
class ELReport:
    """Component Euler--Lagrange residuals.

    ``operator`` holds the max norms of ``i^# Delta^D Phi`` (``F``),
    ``i^# F_a Delta^D Phi`` (``psi``) and ``i^# Delta^D Delta^D Phi`` (``phi``).
    ``variational_mismatch`` compares finite-difference directional
    derivatives of the component action with the first-variation formula
    ``dA = +-int <Xi, Delta^D Phi> [F^1 F^2 F^3 F^4]`` in each field slot.
    """

    operator: dict
    fields: dict
    variational_mismatch: dict
    directional: dict

    @property
    def max_residual(self) -> float:
        return max(self.operator.values())


def el_equations(c: ComponentFields, frames: WZFrame, cliff=None) -> dict:
    """The three component equations as fields: ``F``-, ``psi``- and ``phi``-equation."""
    cliff = cliff or CliffordData()
    Phi = assemble(c, frames, cliff=cliff)
    lap = SuperfieldMap(d_laplacian(Phi, frames, cliff=cliff), None)
    lap2 = d_laplacian(lap, frames, cliff=cliff)
    odd = _frames_of(frames)[2:]
    return {
        "F": [x.restrict() for x in lap],
        "psi": [[apply(F, x).restrict() for F in odd] for x in lap],
        "phi": [x.restrict() for x in lap2],
    }


def first_variation(c: ComponentFields, dc: ComponentFields, frames: WZFrame, cliff=None) -> GrassmannElement:
    """``dA(c)[dc]`` from the superspace first-variation formula (flat target)."""
    cliff = cliff or CliffordData()
    Phi = assemble(c, frames, cliff=cliff)
    Xi = assemble(dc, frames, cliff=cliff)
    lap = d_laplacian(Phi, frames, cliff=cliff)
    acc = SuperFunction.zero(c.phi[0].gens, c.phi[0].backend)
    for x, l in zip(Xi, lap):
        acc = acc + x * l
    rho = acc * frame_density(frames).rho * (-cliff.density_sign)
    return berezin_integrate(BerezinDensity(rho))


def el_residuals(c: ComponentFields, geom: EvenGeometry, target=None, cliff=None, frames=None, directions=None) -> ELReport:
    """Operator-form residuals plus the variational cross-check (flat targets)."""
    cliff = cliff or CliffordData()
    if target is not None:
        target.require_flat("the superspace Euler-Lagrange operator")
    frames = frames or wz_solve(geom, cliff)
    eqs = el_equations(c, frames, cliff)
    operator = {
        "F": max(x.max_abs() for x in eqs["F"]),
        "psi": max(x.max_abs() for xs in eqs["psi"] for x in xs),
        "phi": max(x.max_abs() for x in eqs["phi"]),
    }
    mismatch, directional = {}, {}
    for name, dc in (directions or {}).items():
        exact = first_variation(c, dc, frames, cliff)
        # the action is quadratic in the fields, so the central difference is exact
        fd = (action_component(c.axpy(1.0, dc), geom, target, cliff) - action_component(c.axpy(-1.0, dc), geom, target, cliff)) * 0.5
        mismatch[name] = (fd - exact).max_abs()
        directional[name] = fd.max_abs()
    return ELReport(operator, eqs, mismatch, directional)


# ---------------------------------------------------------------------------
# energy-momentum tensor and super current
# ---------------------------------------------------------------------------
def metric_variation(c: ComponentFields, geom: EvenGeometry, h) -> tuple:
    """Field changes induced by ``delta g = h`` (frame components ``h[a][b]``, symmetric).

    ``delta f_a = -1/2 h_ab f_b``, ``delta chi_a = -1/2 h_ab chi_b + 1/8 tr(h) chi_a``,
    ``delta psi = -1/8 tr(h) psi``, ``delta F = -1/4 tr(h) F``: the spinor and
    auxiliary fields move with their conformal weights, so a pure trace
    ``h = 2 u g`` is the infinitesimal conformal rescaling.
    """
    backend = geom.backend
    half = _num(backend, Fraction(-1, 2))
    tr = h[0][0] + h[1][1]
    df = [[(h[a][0] * geom.f[0][b] + h[a][1] * geom.f[1][b]) * half for b in range(2)] for a in range(2)]
    dchi = [
        [(h[a][0] * geom.chi[0][b] + h[a][1] * geom.chi[1][b]) * half + tr * geom.chi[a][b] * _num(backend, Fraction(1, 8)) for b in range(2)]
        for a in range(2)
    ]
    dc = ComponentFields(
        [SuperFunction.zero(geom.gens, backend) for _ in c.phi],
        [[tr * x * _num(backend, Fraction(-1, 8)) for x in ps] for ps in c.psi],
        [tr * x * _num(backend, Fraction(-1, 4)) for x in c.F],
    )
    return dc, df, dchi


def _total(terms: dict) -> SuperFunction:
    out = None
    for v in terms.values():
        out = v if out is None else out + v
    return out


def stress_tensor(c: ComponentFields, geom: EvenGeometry, target=None, cliff=None, step=0.25) -> list:
    """Energy-momentum tensor ``T[a][b]`` in frame components: ``delta A = int h^ab T_ab dvol``.

    The undensitized Lagrangian is a polynomial of degree at most four in the
    variation parameter along a constant ``h``, so the five-point central
    difference below is its exact derivative; the volume form contributes
    ``1/2 tr(h) L``.
    """
    backend = geom.backend
    zero = SuperFunction.zero(geom.gens, backend)
    one = SuperFunction.const(geom.gens, backend, 1)
    L0 = _total(component_terms(c, geom, target, cliff, densitize=False))
    out = [[None, None], [None, None]]
    for a, b in ((0, 0), (1, 1), (0, 1)):
        h = [[zero, zero], [zero, zero]]
        h[a][b] = one
        h[b][a] = one
        dc, df, dchi = metric_variation(c, geom, h)

        def L(t):
            tt = _num(backend, t)
            return _total(component_terms(c.axpy(tt, dc), _shift_geometry(geom, df, dchi, tt), target, cliff, densitize=False))

        st = _num(backend, step)
        deriv = (L(-2 * st) - L(2 * st) + (L(st) - L(-st)) * 8) * (1 / (12 * st))
        val = deriv + L0 * _num(backend, Fraction(1, 2)) if a == b else deriv
        if a == b:
            out[a][a] = val
        else:
            out[0][1] = out[1][0] = val * _num(backend, Fraction(1, 2))
    return out


def supercurrent(c: ComponentFields, geom: EvenGeometry, target=None, cliff=None) -> list:
    """Super current ``J[a][alpha]``: ``delta A = int sum delta chi_a^alpha J_{a alpha} dvol``."""
    cliff = cliff or CliffordData()
    target = target or TargetSpace(c.dim)
    gam = cliff.gamma
    backend = geom.backend
    zero = SuperFunction.zero(geom.gens, backend)
    p = c.dim
    if target.flat:
        n = [[SuperFunction.const(geom.gens, backend, int(A == B)) for B in range(p)] for A in range(p)]
    else:
        n = [[SuperFunction(geom.gens, backend, {0: v}) for v in row] for row in target.metric([x.body for x in c.phi])]
    dphi = [[_frame_derivative(geom, a, c, A) for A in range(p)] for a in range(2)]
    psipsi = zero
    for A in range(p):
        for B in range(p):
            psipsi = psipsi + n[A][B] * _pair(cliff.eps_inv, c.psi[A], c.psi[B])
    J = [[zero, zero], [zero, zero]]
    for a in range(2):
        for b in range(2):
            M = gam[b] @ gam[a]
            for A in range(p):
                for B in range(p):
                    v = gamma_apply(M, c.psi[B])
                    w = n[A][B] * dphi[b][A] * 2
                    J[a] = [J[a][al] + v[al] * w for al in range(2)]
        for b in range(2):
            # quadratic term: 1/2 sum chi_a^T M_ab chi_b <psi, psi>, M_ab = eps gamma^b gamma^a
            Mab = cliff.eps @ gam[b] @ gam[a]
            Mba = cliff.eps @ gam[a] @ gam[b]
            v = gamma_apply(Mab - Mba.T, geom.chi[b])
            J[a] = [J[a][al] + v[al] * psipsi * _num(backend, Fraction(1, 2)) for al in range(2)]
    return J


def stress_supercurrent(c, geom, target=None, cliff=None):
    """``(T, J)``; see :func:`stress_tensor` and :func:`supercurrent`."""
    return stress_tensor(c, geom, target, cliff), supercurrent(c, geom, target, cliff)


def stress_trace(T, geom=None) -> SuperFunction:
    """``g^ab T_ab`` (frame components are orthonormal)."""
    return T[0][0] + T[1][1]


def gamma_trace(J, cliff=None) -> list:
    """``sum_a gamma_a^T J_a``: the pairing of ``J`` with a super Weyl shift ``gamma_a s``."""
    cliff = cliff or CliffordData()
    gam = cliff.gamma
    out = []
    for mu in range(2):
        acc = None
        for a in range(2):
            for al in range(2):
                if gam[a][al, mu]:
                    t = J[a][al] * int(gam[a][al, mu])
                    acc = t if acc is None else acc + t
        out.append(acc)
    return out


def tensor_divergence(T, geom: EvenGeometry) -> list:
    """``(div T)_b = nabla^a T_ab`` in frame components (Levi-Civita, torsion free)."""
    om = spin_connection(geom)
    # nabla_{f_a} f_1 = om_a f_2, nabla_{f_a} f_2 = -om_a f_1
    conn = [[[None] * 2 for _ in range(2)] for _ in range(2)]  # conn[a][b][c]: <nabla_a f_b, f_c>
    zero = SuperFunction.zero(geom.gens, geom.backend)
    for a in range(2):
        conn[a][0][0] = zero
        conn[a][1][1] = zero
        conn[a][0][1] = om[a]
        conn[a][1][0] = -om[a]
    out = []
    for b in range(2):
        acc = zero
        for a in range(2):
            acc = acc + geom.frame_apply(a, T[a][b])
            for c_ in range(2):
                # (nabla_a T)(f_a, f_b) = f_a(T_ab) - T(nabla_a f_a, f_b) - T(f_a, nabla_a f_b)
                acc = acc - conn[a][a][c_] * T[c_][b] - conn[a][b][c_] * T[a][c_]
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# invariance suite
# ---------------------------------------------------------------------------
SLOPE_EPS = (1e-2, 1e-3, 1e-4)


def loglog_slope(diffs, eps=SLOPE_EPS, floor: float = 1e-13) -> float:
    """Slope of ``log|dA|`` against ``log eps``; ``inf`` when every ``|dA|`` is below ``floor``.

    ``inf`` means the first order variation leaves ``A`` unchanged to
    rounding, which passes any ``>=`` bound.
    """
    diffs = np.asarray(diffs, dtype=float)
    if np.all(diffs <= floor):
        return float("inf")
    return float(np.polyfit(np.log(eps), np.log(np.maximum(diffs, floor * 1e-3)), 1)[0])


def torus_shift(c: ComponentFields, geom: EvenGeometry, cells) -> tuple:
    """Exact translation by ``cells`` grid steps: pull back every field along ``x -> x + v``."""
    backend = geom.backend
    if not isinstance(backend, GridBackend):
        raise UnsupportedError("exact torus translations need the grid backend")
    k = tuple(int(s) for s in cells)

    def roll(u):
        return u.map_coefficients(lambda arr: np.roll(arr, (-k[0], -k[1]), axis=(0, 1)))

    new_c = c.map(roll)
    if c.winding is not None:
        v = np.asarray(k, dtype=float) * backend.spacing
        shift = c.winding @ v
        new_c = ComponentFields(
            [x + SuperFunction.const(x.gens, x.backend, float(s)) for x, s in zip(new_c.phi, shift)],
            new_c.psi,
            new_c.F,
            c.winding,
        )
    new_geom = EvenGeometry([[roll(x) for x in r] for r in geom.f], [[roll(x) for x in r] for r in geom.chi])
    return new_c, new_geom


def invariance_suite(
    c: ComponentFields,
    geom: EvenGeometry,
    target: TargetSpace | None = None,
    cliff: CliffordData | None = None,
    seed: int = 0,
    param_base: tuple | None = None,
    tolerances: dict | None = None,
):
    """Evaluate the action before and after each symmetry.

    Exact symmetries (conformal ``lam = 1 + 0.3 cos x2``, super Weyl, grid
    translations) are compared directly; super symmetry and infinitesimal
    translations by the log-log slope of ``|A(eps) - A(0)|``; the super space
    action additionally under a random element of the structure group.
    ``param_base`` lists the base generators used for the random odd
    parameters (default: the last two).  Super symmetry is run with ``F = 0``
    and needs a flat target.  On the poly backend only the pointwise super
    Weyl check applies (the others hold up to boundary terms on the box).
    Returns a :class:`~supergeom.checks.SuiteReport`.
    """
    from .checks import SuiteReport
    from .sampling import FieldSampler

    tol = {"exact_symmetry": 1e-10, "slope": 1.9, "g_invariance": 1e-9, **(tolerances or {})}
    target = target or TargetSpace(c.dim)
    cliff = cliff or CliffordData()
    gens, backend = geom.gens, geom.backend
    grid = isinstance(backend, GridBackend)
    nb = gens.n_base
    if param_base is None:
        param_base = tuple(range(max(nb - 2, 0), nb))
    sampler = FieldSampler(gens, backend, seed)
    rep = SuiteReport("invariances")
    A0 = action_component(c, geom, target, cliff)
    scale = max(1.0, A0.max_abs())
    rep.values["action_max_abs"] = A0.max_abs()

    def dA(c2, g2):
        return (action_component(c2, g2, target, cliff) - A0).max_abs()

    s = sampler.spinor(param_base)
    rep.add("super_weyl", dA(c, super_weyl_transform(geom, s, cliff)) / scale, tol["exact_symmetry"])
    if not grid:
        rep.values["skipped"] = "conformal, translations, super symmetry and G-action need the torus"
        return rep

    x1, x2 = backend.points()
    lam = SuperFunction(gens, backend, {0: 1 + 0.3 * np.cos(x2)})
    rep.add("conformal", dA(*conformal_transform(c, geom, lam)) / scale, tol["exact_symmetry"])
    n = backend.n
    rep.add("translation_exact", dA(*torus_shift(c, geom, (n // 4, 3 * n // 8))) / scale, tol["exact_symmetry"])

    floor = 1e-13 * scale
    v = (0.7, -0.4)
    dc, df, dchi = translation_variation(c, geom, v)
    diffs = [dA(c.axpy(e, dc), _shift_geometry(geom, df, dchi, e)) for e in SLOPE_EPS]
    rep.values["translation_diffs"] = diffs
    rep.add("translation_slope", loglog_slope(diffs, floor=floor), tol["slope"], kind="min")

    if not target.flat:
        rep.values["skipped"] = "super symmetry and G-action need a flat target"
        return rep
    zero = SuperFunction.zero(gens, backend)
    c0 = ComponentFields(c.phi, c.psi, [zero] * c.dim, c.winding)
    A00 = action_component(c0, geom, target, cliff)
    q = sampler.spinor(param_base)
    dq = susy_field_variation(c0, geom, q, cliff)
    df, dchi = susy_variation(geom, q, cliff)
    diffs = [
        (action_component(c0.axpy(e, dq), _shift_geometry(geom, df, dchi, e), target, cliff) - A00).max_abs()
        for e in SLOPE_EPS
    ]
    rep.values["susy_diffs"] = diffs
    rep.add("susy_slope", loglog_slope(diffs, floor=floor), tol["slope"], kind="min", note="auxiliary field set to zero")

    frames = wz_solve(geom, cliff)
    Phi = assemble(c, frames, cliff=cliff)
    S0 = action_super(Phi, frames, cliff=cliff)
    U, R, T = sampler.group_element(tuple(range(nb))[-3:])
    moved, _ = g_action(frames, U, R, T)
    diff = (action_super(Phi, moved, cliff=cliff) - S0).max_abs()
    rep.add("g_invariance", diff / max(1.0, S0.max_abs()), tol["g_invariance"])
    return rep
