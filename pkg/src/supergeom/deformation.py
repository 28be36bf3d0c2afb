"""Infinitesimal deformations of (g, chi) on the flat torus.

A metric deformation ``h`` and a gravitino deformation ``rho`` (components
``rho[a][beta]`` of a cospinor valued one-form) are split as

    h   = lam g + L_X g + D,
    rho = (gamma t)^flat + (nabla q)^flat + Dspin,

for the flat torus ``g = delta``, ``chi = 0``.  ``X`` and ``q`` solve
Poisson equations (zero-mean gauge), ``lam`` and ``t`` are algebraic, and the
remainders ``D`` (trace-free symmetric) and ``Dspin`` (gamma-trace free) are
holomorphic, hence constant on the torus.  The super symmetry contribution to
``h`` and the Lie derivative of ``chi`` vanish because ``chi = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeffs import GridBackend
from .errors import ConfigurationError, UnsupportedError
from .grassmann import Parity
from .srs import CliffordData, EvenGeometry, gamma_apply, susy_variation
from .superfield import SuperFunction


def _require_flat(geom: EvenGeometry | None):
    if geom is None:
        return
    if not isinstance(geom.backend, GridBackend):
        raise UnsupportedError("the deformation decomposition needs the grid backend")
    one = SuperFunction.const(geom.gens, geom.backend, 1)
    zero = SuperFunction.zero(geom.gens, geom.backend)
    for a in range(2):
        for b in range(2):
            want = one if a == b else zero
            if not geom.f[a][b].allclose(want, 1e-12) or not geom.chi[a][b].is_zero():
                raise UnsupportedError("decompose is implemented for the flat torus (g = delta, chi = 0) only")


def inverse_laplacian(u: SuperFunction) -> SuperFunction:
    """Zero-mean solution of ``Delta w = u - mean(u)`` (coefficient-wise, spectral)."""
    backend = u.backend
    if not isinstance(backend, GridBackend):
        raise UnsupportedError("spectral Poisson solves need the grid backend")
    k1, k2 = backend.wavenumbers()
    k2sum = k1**2 + k2**2
    k2sum[0, 0] = 1.0

    def solve(arr):
        spec = np.fft.fft2(arr)
        spec = -spec / k2sum
        spec[0, 0] = 0.0
        out = np.fft.ifft2(spec)
        return out if np.iscomplexobj(arr) else out.real

    return u.map_coefficients(solve)


def mean(u: SuperFunction) -> SuperFunction:
    """Average over the torus (a constant super function)."""
    return u.map_coefficients(lambda arr: np.full_like(arr, np.mean(arr)))


def _d(u, axis):
    return u.d_even(axis)


def lie_derivative_metric(X) -> list:
    """``(L_X delta)_ij = d_i X^j + d_j X^i``."""
    return [[_d(X[j], i) + _d(X[i], j) for j in range(2)] for i in range(2)]


def lowered(v: list, cliff: CliffordData) -> list:
    """``v_beta = v^alpha eps_{alpha beta}``."""
    return gamma_apply(cliff.lowering, v)


def susy_gravitino(q: list, cliff: CliffordData | None = None) -> list:
    """``(nabla_{d_a} q)^flat`` on the flat torus: the super symmetry direction in ``rho``."""
    cliff = cliff or CliffordData()
    return [lowered([_d(q[0], a), _d(q[1], a)], cliff) for a in range(2)]


def super_weyl_gravitino(t: list, cliff: CliffordData | None = None) -> list:
    """``(gamma_a t)^flat``: the super Weyl direction in ``rho``."""
    cliff = cliff or CliffordData()
    return [lowered(gamma_apply(cliff.gamma[a], t), cliff) for a in range(2)]


def gamma_trace_cospinor(rho: list, cliff: CliffordData) -> list:
    """``sum_a gamma_a rho_a`` with the Clifford action transported to cospinors."""
    dg = cliff.dual_gamma
    parts = [gamma_apply(dg[a], rho[a]) for a in range(2)]
    return [parts[0][al] + parts[1][al] for al in range(2)]


@dataclass
class DecompositionResult:
    """Parameters and holomorphic remainders of a deformation ``(h, rho)``."""

    lam: SuperFunction
    X: list
    q: list
    t: list
    D: list
    Dspin: list
    residuals: dict = field(default_factory=dict)


def quadratic_differential(D, atol: float = 1e-8):
    """``[[a, b], [b, -a]] -> (a - i b) dz^2``; returns ``(re, im)`` and the d-bar residual.

    Raises :class:`ConfigurationError` when ``D`` is not symmetric trace-free
    within ``atol``.
    """
    sym = (D[0][1] - D[1][0]).max_abs()
    tr = (D[0][0] + D[1][1]).max_abs()
    if sym > atol or tr > atol:
        raise ConfigurationError(f"D must be symmetric trace-free (asymmetry {sym:.2e}, trace {tr:.2e})")
    a, b = D[0][0], D[0][1]
    re, im = a, -b
    # 2 d-bar (u + i v) = (d1 u - d2 v) + i (d2 u + d1 v)
    dbar = max((_d(re, 0) - _d(im, 1)).max_abs(), (_d(re, 1) + _d(im, 0)).max_abs()) / 2
    return (re, im), dbar


def cubic_spinor(Dspin, atol: float = 1e-8):
    """Gamma-trace free ``Dspin`` -> ``(Dspin_13 - i Dspin_14) dz s^+``; returns ``(re, im)`` and the d-bar residual.

    The minus sign is the combination whose Cauchy--Riemann equations are
    the Laplace equations for the super symmetry parameter, mirroring the
    ``(a - i b) dz^2`` identification of the metric part.
    """
    c1 = (Dspin[0][0] + Dspin[1][1]).max_abs()
    c2 = (Dspin[1][0] - Dspin[0][1]).max_abs()
    if c1 > atol or c2 > atol:
        raise ConfigurationError(f"Dspin violates the gamma-trace constraints ({c1:.2e}, {c2:.2e})")
    re, im = Dspin[0][0], -Dspin[0][1]
    dbar = max((_d(re, 0) - _d(im, 1)).max_abs(), (_d(re, 1) + _d(im, 0)).max_abs()) / 2
    return (re, im), dbar


def _check_inputs(h, rho):
    for i in range(2):
        for j in range(2):
            if not h[i][j].is_zero() and h[i][j].parity() is not Parity.EVEN:
                raise ConfigurationError("metric deformation must be even")
            if not rho[i][j].is_zero() and rho[i][j].parity() is not Parity.ODD:
                raise ConfigurationError("gravitino deformation must be odd")
            if h[i][j].fiber_degree() or rho[i][j].fiber_degree():
                raise ConfigurationError("deformations live on the even manifold (no fiber generators)")
    if (h[0][1] - h[1][0]).max_abs() > 1e-12:
        raise ConfigurationError("metric deformation must be symmetric")


def decompose(h, rho, geom: EvenGeometry | None = None, cliff: CliffordData | None = None) -> DecompositionResult:
    """Split ``(h, rho)`` into Weyl, diffeomorphism, super symmetry, super Weyl and holomorphic parts."""
    cliff = cliff or CliffordData()
    cliff.require_frame_compatible()
    _require_flat(geom)
    _check_inputs(h, rho)
    u = h[0][0]
    if not isinstance(u.backend, GridBackend):
        raise UnsupportedError("the deformation decomposition needs the grid backend")
    half = 0.5
    # metric: Laplace equations for X from the Cauchy-Riemann equations of D
    diff = h[0][0] - h[1][1]
    X1 = inverse_laplacian(_d(diff, 0) * half + _d(h[0][1], 1))
    X2 = inverse_laplacian(_d(h[0][1], 0) - _d(diff, 1) * half)
    X = [X1, X2]
    lam = (h[0][0] + h[1][1]) * half - (_d(X1, 0) + _d(X2, 1))
    LX = lie_derivative_metric(X)
    D = [[h[i][j] - LX[i][j] - (lam if i == j else lam * 0) for j in range(2)] for i in range(2)]

    # gravitino: Laplace equations for q from the Cauchy-Riemann equations of Dspin;
    # (gamma_a t)^flat does not see the orientation, (nabla q)^flat flips with it
    o = cliff.eps_orientation
    r1 = rho[0][0] - rho[1][1]  # rho_13 - rho_24
    r2 = rho[0][1] + rho[1][0]  # rho_14 + rho_23
    q4 = -inverse_laplacian(_d(r1, 0) + _d(r2, 1))
    q3 = -inverse_laplacian(_d(r1, 1) - _d(r2, 0))
    q = [q3 * o, q4 * o]
    sq = susy_gravitino(q, cliff)
    sigma = [[rho[a][al] - sq[a][al] for al in range(2)] for a in range(2)]
    tr = gamma_trace_cospinor(sigma, cliff)
    # gamma trace of (gamma_a t)^flat is 2 t^flat
    Kinv = np.linalg.inv(cliff.lowering).round().astype(int)
    t = [x * half for x in gamma_apply(Kinv, tr)]
    sw = super_weyl_gravitino(t, cliff)
    Dspin = [[sigma[a][al] - sw[a][al] for al in range(2)] for a in range(2)]

    res = {}
    recon_h = max(
        (lam * int(i == j) + LX[i][j] + D[i][j] - h[i][j]).max_abs() for i in range(2) for j in range(2)
    )
    recon_r = max((sw[a][al] + sq[a][al] + Dspin[a][al] - rho[a][al]).max_abs() for a in range(2) for al in range(2))
    res["reconstruction_metric"] = recon_h
    res["reconstruction_gravitino"] = recon_r
    res["trace_free"] = max((D[0][0] + D[1][1]).max_abs(), (D[0][1] - D[1][0]).max_abs())
    res["gamma_trace_free"] = max((Dspin[0][0] + Dspin[1][1]).max_abs(), (Dspin[1][0] - Dspin[0][1]).max_abs())
    _, res["holomorphic_D"] = quadratic_differential(D, atol=1e-6)
    _, res["holomorphic_Dspin"] = cubic_spinor(Dspin, atol=1e-6)
    # constancy of the holomorphic parts on the torus
    res["nonconstant_D"] = max((D[i][j] - mean(D[i][j])).max_abs() for i in range(2) for j in range(2))
    res["nonconstant_Dspin"] = max((Dspin[a][al] - mean(Dspin[a][al])).max_abs() for a in range(2) for al in range(2))
    # with chi = 0 the super symmetry moves no metric
    flat = EvenGeometry.flat(u.gens, u.backend)
    df, _ = susy_variation(flat, q, cliff)
    res["susy_metric_part"] = max(df[a][b].max_abs() for a in range(2) for b in range(2))
    return DecompositionResult(lam, X, q, t, D, Dspin, res)
