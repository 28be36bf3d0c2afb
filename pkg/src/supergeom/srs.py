"""Super Riemann surface structure in Wess--Zumino gauge.

Real frames ``F_1, F_2`` (even) and ``F_3, F_4`` (odd) are related to the
complex frames by ``F_z = (F_1 - i F_2)/2`` and ``F_+ = (F_3 - i F_4)/2``.
In Wess--Zumino coordinates the odd frames read

    F_alpha = d_alpha + eta^mu A[mu][alpha]^B d_B + eta^2 eta^1 C[alpha]^B d_B,

with ``A`` symmetric in ``(mu, alpha)``.  The even frames are not independent:
``[F_+, F_+] = 2 F_z`` gives ``F_1 = (F_3^2 - F_4^2)/2`` and
``F_2 = [F_3, F_4]/2``.  With this choice the remaining integrability and
Wess--Zumino conditions collapse to

    F_3^2 + F_4^2 = tau^alpha F_alpha,   tau|_0 = 0,   (F_alpha tau^beta)|_0 symmetric trace-free,

which is solved order by order in ``eta``: ``A`` is fixed by the body of the
even frames (zweibein and gravitino) and ``C``/``tau`` by a pointwise linear
system.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coeffs import Poly, PolyBackend
from .errors import ConfigurationError, SolverError, UnsupportedError
from .grassmann import Parity
from .supercalc import (
    SuperVectorField,
    apply,
    frame_berezinian,
    structure_coefficients,
    supercommutator,
)
from .superfield import SuperFunction, SuperMap

EPS = np.array([[0, 1], [-1, 0]])
# eta^mu A_{mu alpha}: the symmetric matrices multiplying the zweibein in the
# degree-one coefficients of the odd frames (forced by F_1, F_2 above).
FRAME_GAMMA = (np.array([[1, 0], [0, -1]]), np.array([[0, 1], [1, 0]]))


@dataclass(frozen=True)
class CliffordData:
    """Two-dimensional Clifford data with the convention switches.

    The frame-compatible choice is ``gamma^a = eps . FRAME_GAMMA^a``, i.e.
    ``gamma^1 = [[0,-1],[-1,0]]`` and ``gamma^2 = [[1,0],[0,-1]]`` for the
    standard orientation ``eps = [[0,1],[-1,0]]``.  ``gamma1_sign``,
    ``gamma2_sign`` and ``swap_gammas`` modify this choice; the sigma-model
    reduction only holds for the frame-compatible choice.
    """

    eps_orientation: int = 1
    gamma1_sign: int = 1
    gamma2_sign: int = 1
    swap_gammas: bool = False

    def __post_init__(self):
        for name in ("eps_orientation", "gamma1_sign", "gamma2_sign"):
            if getattr(self, name) not in (1, -1):
                raise ConfigurationError(f"{name} must be +1 or -1")

    @property
    def eps(self) -> np.ndarray:
        """``eps_{alpha beta} = g_S(s_alpha, s_beta)``."""
        return self.eps_orientation * EPS

    @property
    def eps_inv(self) -> np.ndarray:
        """``eps^{alpha beta}``: the inverse matrix, i.e. the dual pairing on ``S^*``."""
        return -self.eps

    @property
    def density_sign(self) -> int:
        """Sign of ``[F^1 F^2 F^3 F^4]`` relative to ``(Ber F)^-1 [dx de]``.

        Fixed once by requiring the ``|d phi|^2`` term to come with ``+1``.
        """
        return -self.eps_orientation

    @property
    def gamma(self) -> tuple:
        base = [self.eps @ FRAME_GAMMA[0], self.eps @ FRAME_GAMMA[1]]
        if self.swap_gammas:
            base = base[::-1]
        return (self.gamma1_sign * base[0], self.gamma2_sign * base[1])

    @property
    def gamma12(self) -> np.ndarray:
        return self.gamma[0] @ self.gamma[1]

    @property
    def lowering(self) -> np.ndarray:
        """``K`` with ``v_beta = (K v)_beta = v^alpha eps_{alpha beta}`` (``S -> S^*``)."""
        return self.eps.T

    @property
    def dual_gamma(self) -> tuple:
        """Clifford action transported to ``S^*`` along the lowering map."""
        K = self.lowering
        Kinv = np.linalg.inv(K).round().astype(int)
        return tuple(K @ g @ Kinv for g in self.gamma)

    @property
    def dual_gamma12(self) -> np.ndarray:
        g = self.dual_gamma
        return g[0] @ g[1]

    def clifford_residual(self) -> float:
        g = self.gamma
        out = 0.0
        for a in range(2):
            for b in range(2):
                anti = g[a] @ g[b] + g[b] @ g[a]
                out = max(out, float(np.max(np.abs(anti - 2 * (a == b) * np.eye(2)))))
        return out

    def is_frame_compatible(self) -> bool:
        return self.gamma1_sign == 1 and self.gamma2_sign == 1 and not self.swap_gammas

    def require_frame_compatible(self):
        if not self.is_frame_compatible():
            raise UnsupportedError(
                "gamma convention is not compatible with the frame orientation "
                "(gamma^a must equal eps . FRAME_GAMMA^a for the component reduction)"
            )

    def ledger(self) -> dict:
        return {
            "eps_lower": self.eps.tolist(),
            "eps_upper": self.eps_inv.tolist(),
            "density_sign": self.density_sign,
            "gamma1": self.gamma[0].tolist(),
            "gamma2": self.gamma[1].tolist(),
            "eps_orientation": self.eps_orientation,
            "gamma1_sign": self.gamma1_sign,
            "gamma2_sign": self.gamma2_sign,
            "swap_gammas": self.swap_gammas,
        }


# ---------------------------------------------------------------------------
# helpers on small matrices of super functions
# ---------------------------------------------------------------------------
def _zero(gens, backend):
    return SuperFunction.zero(gens, backend)


def _const(gens, backend, v):
    return SuperFunction.const(gens, backend, v)


def _eta(gens, backend, mu):
    return SuperFunction.coordinate(gens, backend, f"e{mu + 1}")


def _top(gens, backend):
    """``eta^2 eta^1``."""
    return _eta(gens, backend, 1) * _eta(gens, backend, 0)


def _scaled(f: SuperFunction, c):
    if c == 0:
        return _zero(f.gens, f.backend)
    if isinstance(f.backend, PolyBackend):
        return f * Fraction(c)
    return f * float(c)


def _num(backend, value):
    return Fraction(value) if isinstance(backend, PolyBackend) else float(value)


@dataclass
class EvenGeometry:
    """Zweibein ``f[a][b] = F_0_a^b`` and gravitino ``chi[a][beta] = F_0_a^beta``.

    All entries are fiber-free super functions on one chart; ``f`` even,
    ``chi`` odd.
    """

    f: list
    chi: list

    def __post_init__(self):
        first = self.f[0][0]
        self.gens, self.backend = first.gens, first.backend
        for a in range(2):
            for b in range(2):
                fe, ch = self.f[a][b], self.chi[a][b]
                if fe.fiber_degree() or ch.fiber_degree():
                    raise ConfigurationError("geometry entries must not depend on fiber generators")
                if not fe.is_zero() and fe.parity() is not Parity.EVEN:
                    raise ConfigurationError("zweibein entries must be even")
                if not ch.is_zero() and ch.parity() is not Parity.ODD:
                    raise ConfigurationError("gravitino entries must be odd")
        det = self.det_f().body
        if isinstance(det, Poly):
            if not det.terms or any(k != (0, 0) for k in det.terms) or det.terms[(0, 0)] <= 0:
                raise ConfigurationError("poly backend needs a zweibein with constant positive determinant")
        elif np.any(det <= 0):
            raise ConfigurationError("zweibein must be invertible and orientation preserving everywhere")

    @classmethod
    def flat(cls, gens, backend, scale=1):
        z = _zero(gens, backend)
        s = _const(gens, backend, scale)
        return cls([[s, z], [z, s]], [[z, z], [z, z]])

    def det_f(self) -> SuperFunction:
        f = self.f
        return f[0][0] * f[1][1] - f[0][1] * f[1][0]

    def inverse_f(self) -> list:
        """``finv[b][a]`` with ``sum_b f[a][b] finv[b][c] = delta_ac``."""
        f = self.f
        dinv = self.det_f().inverse()
        return [[f[1][1] * dinv, -(f[0][1] * dinv)], [-(f[1][0] * dinv), f[0][0] * dinv]]

    def metric(self) -> list:
        """``g_{bc}`` in coordinates (``f_a`` orthonormal)."""
        fi = self.inverse_f()
        return [[fi[b][0] * fi[c][0] + fi[b][1] * fi[c][1] for c in range(2)] for b in range(2)]

    def inverse_metric(self) -> list:
        f = self.f
        return [[f[0][b] * f[0][c] + f[1][b] * f[1][c] for c in range(2)] for b in range(2)]

    def volume_density(self) -> SuperFunction:
        """``sqrt(det g) = 1 / det f``."""
        return self.det_f().inverse()

    def frame_apply(self, a: int, u: SuperFunction) -> SuperFunction:
        """``f_a(u) = f[a][b] d_b u`` for fiber-free ``u``."""
        return self.f[a][0] * u.d_even(0) + self.f[a][1] * u.d_even(1)

    def allclose(self, other: "EvenGeometry", atol=1e-10) -> bool:
        return all(
            self.f[a][b].allclose(other.f[a][b], atol) and self.chi[a][b].allclose(other.chi[a][b], atol)
            for a in range(2)
            for b in range(2)
        )

    def max_diff(self, other: "EvenGeometry") -> float:
        return max(
            max((self.f[a][b] - other.f[a][b]).max_abs(), (self.chi[a][b] - other.chi[a][b]).max_abs())
            for a in range(2)
            for b in range(2)
        )


@dataclass
class WZFrame:
    """Wess--Zumino frame ``F_1..F_4`` with its expansion coefficients.

    ``coefficients`` holds ``A[mu][alpha][B]``, ``C[alpha][B]``,
    ``tau1[mu][alpha]`` and ``tau21[alpha]`` (see module docstring).
    """

    frames: list
    geometry: EvenGeometry | None = None
    coefficients: dict = field(default_factory=dict)
    solver_log: list = field(default_factory=list)

    @property
    def gens(self):
        return self.frames[0].gens

    @property
    def backend(self):
        return self.frames[0].backend

    @property
    def odd(self):
        return self.frames[2:]

    def berezinian(self) -> SuperFunction:
        return frame_berezinian(self.frames)

    def coefficient_table(self) -> dict:
        """Flat ``{name: SuperFunction}`` view of every eta-expansion coefficient."""
        out = {}
        names = ("x1", "x2", "e1", "e2")
        for A, fr in enumerate(self.frames):
            for B, comp in enumerate(fr.components):
                for mask, part in sorted(comp.eta_expansion().items()):
                    out[f"F{A + 1}[{names[B]}]@{fr.gens.monomial_text(mask) or '1'}"] = part
        return out


def square(v: SuperVectorField) -> SuperVectorField:
    """``v o v = [v, v]/2`` for odd ``v``."""
    return SuperVectorField([apply(v, c) for c in v.components], Parity.EVEN, check=False)


def even_frames_from_odd(F3: SuperVectorField, F4: SuperVectorField):
    s3, s4 = square(F3), square(F4)
    half = _num(F3.backend, Fraction(1, 2))
    F1 = SuperVectorField([(a - b) * half for a, b in zip(s3.components, s4.components)], Parity.EVEN, False)
    F2 = supercommutator(F3, F4)
    F2 = SuperVectorField([c * half for c in F2.components], Parity.EVEN, False)
    return F1, F2


def odd_frame(gens, backend, alpha, A, C) -> SuperVectorField:
    """``d_alpha + eta^mu A[mu][alpha]^B d_B + eta^2 eta^1 C[alpha]^B d_B``."""
    etas = [_eta(gens, backend, mu) for mu in range(2)]
    top = _top(gens, backend)
    comps = []
    for B in range(4):
        c = _const(gens, backend, 1) if B == 2 + alpha else _zero(gens, backend)
        for mu in range(2):
            if not A[mu][alpha][B].is_zero():
                c = c + etas[mu] * A[mu][alpha][B]
        if not C[alpha][B].is_zero():
            c = c + top * C[alpha][B]
        comps.append(c)
    return SuperVectorField(comps, Parity.ODD, check=False)


def degree_one_coefficients(geom: EvenGeometry) -> list:
    """``A[mu][alpha][B] = sum_a FRAME_GAMMA^a_{mu alpha} F_0_a^B`` (symmetric in mu, alpha)."""
    gens, backend = geom.gens, geom.backend
    f0 = [[geom.f[a][0], geom.f[a][1], geom.chi[a][0], geom.chi[a][1]] for a in range(2)]
    A = [[[_zero(gens, backend) for _ in range(4)] for _ in range(2)] for _ in range(2)]
    for mu in range(2):
        for al in range(2):
            for B in range(4):
                acc = _zero(gens, backend)
                for a in range(2):
                    c = int(FRAME_GAMMA[a][mu, al])
                    if c:
                        acc = acc + _scaled(f0[a][B], c)
                A[mu][al][B] = acc
    return A


# unknowns of the degree-two solve: C[alpha][B] (8), symmetric trace-free tau1 (2), tau21 (2)
UNKNOWN_NAMES = tuple(
    [f"C[{al + 3}][{'x1 x2 e1 e2'.split()[B]}]" for al in range(2) for B in range(4)]
    + ["tau1 (diagonal, trace-free)", "tau1 (off-diagonal, symmetric)", "tau21[3]", "tau21[4]"]
)
EQUATION_NAMES = tuple(
    f"{part} coefficient of (F3^2 + F4^2 - tau F) along d_{'x1 x2 e1 e2'.split()[B]}"
    for part in ("eta^1", "eta^2", "eta^2 eta^1")
    for B in range(4)
)


def _unpack(u, gens, backend):
    C = [[u[4 * al + B] for B in range(4)] for al in range(2)]
    s1, s2 = u[8], u[9]
    tau1 = [[s1, s2], [s2, -s1]]
    tau21 = [u[10], u[11]]
    return C, tau1, tau21


def _tau(gens, backend, tau1, tau21):
    etas = [_eta(gens, backend, mu) for mu in range(2)]
    top = _top(gens, backend)
    out = []
    for al in range(2):
        t = etas[0] * tau1[0][al] + etas[1] * tau1[1][al] + top * tau21[al]
        out.append(t)
    return out


def _condition_field(gens, backend, A, u):
    """``F_3^2 + F_4^2 - tau^alpha F_alpha`` as a list of four components."""
    C, tau1, tau21 = _unpack(u, gens, backend)
    F = [odd_frame(gens, backend, al, A, C) for al in range(2)]
    tau = _tau(gens, backend, tau1, tau21)
    comps = []
    for B in range(4):
        k = apply(F[0], F[0].components[B]) + apply(F[1], F[1].components[B])
        k = k - tau[0] * F[0].components[B] - tau[1] * F[1].components[B]
        comps.append(k)
    return comps


def _equations(comps) -> list:
    """Degree-one and top eta coefficients of the condition field (12 fiber-free functions)."""
    out = []
    for part in (1, 2):
        for B in range(4):
            out.append(comps[B].eta_coefficient(part))
    for B in range(4):
        out.append(-comps[B].eta_coefficient(3))
    return out


def _order_zero(comps) -> float:
    return max(c.eta_coefficient(0).max_abs() for c in comps)


def _pointwise_inverse(columns, backend, n):
    """Invert the body matrix ``M[i][k]`` (given column-wise) at every point."""
    if isinstance(backend, PolyBackend):
        M = []
        for i in range(n):
            row = []
            for k in range(n):
                p = columns[k][i]
                if any(key != (0, 0) for key in p.terms):
                    raise UnsupportedError(
                        "poly backend needs a constant body matrix (zweibein with constant body)"
                    )
                row.append(p.terms.get((0, 0), Fraction(0)))
            M.append(row)
        return _fraction_inverse(M)
    M = np.zeros(columns[0][0].shape + (n, n))
    for k in range(n):
        for i in range(n):
            M[..., i, k] = np.real(columns[k][i])
    s = np.linalg.svd(M, compute_uv=False)
    cond = s[..., -1] / s[..., 0]
    if np.min(cond) < 1e-12:
        worst = np.unravel_index(np.argmin(cond), cond.shape)
        _, _, vt = np.linalg.svd(M[worst])
        raise SolverError(
            f"degree-two Wess-Zumino system is singular at grid point {worst}",
            condition=EQUATION_NAMES[int(np.argmax(np.abs(vt[-1])))],
        )
    return np.linalg.inv(M)


def _fraction_inverse(M):
    n = len(M)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise SolverError("degree-two Wess-Zumino system is singular", condition=EQUATION_NAMES[col])
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                fac = aug[r][col]
                aug[r] = [x - fac * y for x, y in zip(aug[r], aug[col])]
    return [r[n:] for r in aug]


def _apply_inverse(P, eqs, backend, gens):
    """``P . eqs`` per base monomial."""
    n = len(eqs)
    masks = set()
    for e in eqs:
        masks.update(m for m, _ in e.items())
    out = [dict() for _ in range(n)]
    for m in masks:
        vals = [e.coefficient(m) for e in eqs]
        if isinstance(backend, PolyBackend):
            for k in range(n):
                acc = backend.zero()
                for i in range(n):
                    if P[k][i] != 0 and vals[i].terms:
                        acc = acc + vals[i] * P[k][i]
                out[k][m] = acc
        else:
            stack = np.stack([np.asarray(v, dtype=float) for v in vals], axis=-1)
            sol = np.einsum("...ki,...i->...k", P, stack)
            for k in range(n):
                out[k][m] = sol[..., k]
    return [SuperFunction(gens, backend, t) for t in out]


def wz_solve(geom: EvenGeometry, cliff: CliffordData | None = None, tol: float = 1e-11) -> WZFrame:
    """Construct the Wess--Zumino frame determined by a zweibein and gravitino."""
    gens, backend = geom.gens, geom.backend
    if gens.n_fiber != 2:
        raise UnsupportedError("Wess-Zumino frames need exactly two fiber generators")
    A = degree_one_coefficients(geom)
    n = len(UNKNOWN_NAMES)
    zero_u = [_zero(gens, backend) for _ in range(n)]
    base = _equations(_condition_field(gens, backend, A, zero_u))
    columns = []
    for k in range(n):
        probe = list(zero_u)
        probe[k] = _const(gens, backend, 1)
        eqs = _equations(_condition_field(gens, backend, A, probe))
        columns.append([(e - b0).body for e, b0 in zip(eqs, base)])
    P = _pointwise_inverse(columns, backend, n)
    u = zero_u
    log = []
    for it in range(gens.n_base + 3):
        eqs = _equations(_condition_field(gens, backend, A, u))
        res = max(e.max_abs() for e in eqs)
        log.append(res)
        if res == 0 or (not isinstance(backend, PolyBackend) and res <= tol):
            break
        du = _apply_inverse(P, eqs, backend, gens)
        u = [a - b for a, b in zip(u, du)]
    else:
        worst = int(np.argmax([e.max_abs() for e in eqs]))
        raise SolverError("Wess-Zumino iteration did not converge", condition=EQUATION_NAMES[worst])
    u = [_clean_parity(x, k) for k, x in enumerate(u)]
    C, tau1, tau21 = _unpack(u, gens, backend)
    F3 = odd_frame(gens, backend, 0, A, C)
    F4 = odd_frame(gens, backend, 1, A, C)
    F1, F2 = even_frames_from_odd(F3, F4)
    coeffs = {"A": A, "C": C, "tau1": tau1, "tau21": tau21}
    return WZFrame([F1, F2, F3, F4], geom, coeffs, log)


def _clean_parity(x: SuperFunction, k: int) -> SuperFunction:
    """Drop round-off terms of the wrong parity from unknown ``k``."""
    odd = k in (0, 1, 4, 5, 10, 11)  # C^b and tau21 are odd, C^beta and tau1 even
    return SuperFunction(x.gens, x.backend, {m: c for m, c in x.items() if (bin(m).count("1") % 2 == 1) == odd})


def model_frame(gens, backend) -> WZFrame:
    """Realified model frame ``F_+ = d_theta + theta d_z``: f = id, chi = 0."""
    one, z = _const(gens, backend, 1), _zero(gens, backend)
    e1, e2 = _eta(gens, backend, 0), _eta(gens, backend, 1)
    F1 = SuperVectorField([one, z, z, z], Parity.EVEN)
    F2 = SuperVectorField([z, one, z, z], Parity.EVEN)
    F3 = SuperVectorField([e1, e2, one, z], Parity.ODD)
    F4 = SuperVectorField([-e2, e1, z, one], Parity.ODD)
    return WZFrame([F1, F2, F3, F4], EvenGeometry.flat(gens, backend))


# ---------------------------------------------------------------------------
# complex structure coefficients and residual reports
# ---------------------------------------------------------------------------
# complex frames E = P F  (order z, zbar, +, -) and F = Q E
_P = np.array(
    [[0.5, -0.5j, 0, 0], [0.5, 0.5j, 0, 0], [0, 0, 0.5, -0.5j], [0, 0, 0.5, 0.5j]]
)
_Q = np.array([[1, 1, 0, 0], [1j, -1j, 0, 0], [0, 0, 1, 1], [0, 0, 1j, -1j]])
COMPLEX_LABELS = ("z", "zbar", "+", "-")
_PARITY = (0, 0, 1, 1)


def _full_table(table, n=4):
    """Complete ``t_AB^C`` using graded antisymmetry ``t_BA = -(-1)^{|A||B|} t_AB``."""
    full = {}
    for (a, b), t in table.items():
        full[(a, b)] = t
        if a != b:
            sign = 1 if _PARITY[a] and _PARITY[b] else -1
            full[(b, a)] = [c * sign for c in t]
    return full


def _cexact(backend, z: complex):
    if isinstance(backend, PolyBackend):
        return Fraction(z.real).limit_denominator(64), Fraction(z.imag).limit_denominator(64)
    return z.real, z.imag


def complex_structure_coefficients(frames) -> dict:
    """``{(I, J, K): (re, im)}`` for the complex frames ``z, zbar, +, -``."""
    backend = frames[0].backend
    full = _full_table(structure_coefficients(frames))
    gens = frames[0].gens
    out = {}
    for I in range(4):
        for J in range(4):
            for K in range(4):
                re = _zero(gens, backend)
                im = _zero(gens, backend)
                for A in range(4):
                    for B in range(4):
                        pab = _P[I, A] * _P[J, B]
                        if pab == 0:
                            continue
                        for C in range(4):
                            coef = pab * _Q[C, K]
                            if coef == 0:
                                continue
                            t = full[(A, B)][C]
                            if t.is_zero():
                                continue
                            cr, ci = _cexact(backend, complex(coef))
                            if cr:
                                re = re + t * cr
                            if ci:
                                im = im + t * ci
                out[(I, J, K)] = (re, im)
    return out


def _cabs(pair) -> float:
    re, im = pair
    diff_masks = set(m for m, _ in re.items()) | set(m for m, _ in im.items())
    worst = 0.0
    for m in diff_masks:
        a, b = re.coefficient(m), im.coefficient(m)
        if isinstance(a, Poly):
            worst = max(worst, float(max((abs(c) for c in a.terms.values()), default=0)),
                        float(max((abs(c) for c in b.terms.values()), default=0)))
        else:
            worst = max(worst, float(np.max(np.hypot(a, b))))
    return worst


INTEGRABILITY = (
    ("t_{z+}^{zbar}", (0, 2, 1)),
    ("t_{z+}^{-}", (0, 2, 3)),
    ("t_{++}^{zbar}", (2, 2, 1)),
    ("t_{++}^{-}", (2, 2, 3)),
    ("t_{+-}^{z}", (2, 3, 0)),
    ("t_{+zbar}^{z}", (2, 1, 0)),
)


@dataclass
class SRSReport:
    residuals: dict
    t_pp_z: object  # (re, im) pair

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def passed(self, tol=0.0) -> bool:
        return self.max_residual <= tol

    def as_dict(self):
        return dict(self.residuals)


def check_srs(frames) -> SRSReport:
    """The six vanishing structure coefficients and ``t_{++}^z - 2``."""
    if isinstance(frames, WZFrame):
        frames = frames.frames
    ct = complex_structure_coefficients(frames)
    res = {name: _cabs(ct[key]) for name, key in INTEGRABILITY}
    re, im = ct[(2, 2, 0)]
    res["t_{++}^{z} - 2"] = _cabs((re - 2, im))
    return SRSReport(res, (re, im))


def wz_residuals(frames) -> dict:
    """Wess--Zumino frame and coordinate conditions (max magnitudes)."""
    if isinstance(frames, WZFrame):
        frames = frames.frames
    backend = frames[0].backend
    ct = complex_structure_coefficients(frames)
    out = {}
    tre, tim = ct[(2, 3, 2)]  # t_{+-}^{+}
    out["i^# t_{+-}^{+}"] = _cabs((tre.restrict(), tim.restrict()))
    F3, F4 = frames[2], frames[3]
    half = _num(backend, Fraction(1, 2))
    # F_+ t = (F3 - i F4)(re + i im) / 2
    fre = (apply(F3, tre) + apply(F4, tim)) * half
    fim = (apply(F3, tim) - apply(F4, tre)) * half
    out["i^# F_+ t_{+-}^{+}"] = _cabs((fre.restrict(), fim.restrict()))
    out["t_{++}^{+}"] = _cabs(ct[(2, 2, 2)])
    sym = 0.0
    lead = 0.0
    for al in range(2):
        for B in range(4):
            comp = frames[2 + al].components[B]
            body = comp.eta_coefficient(0) - (1 if B == 2 + al else 0)
            lead = max(lead, body.max_abs())
    for B in range(4):
        # eps^{mu alpha} F_{mu alpha}^B = F_{1 2}^B - F_{2 1}^B  (eta^mu coefficient of F_alpha)
        a12 = frames[3].components[B].eta_coefficient(1)
        a21 = frames[2].components[B].eta_coefficient(2)
        sym = max(sym, (a12 - a21).max_abs())
    out["eps^{mu alpha} F_{mu alpha}^C"] = sym
    out["F_alpha|_0 - d_alpha"] = lead
    return out


# ---------------------------------------------------------------------------
# reading off the geometry, G-action, SUSY
# ---------------------------------------------------------------------------
def extract_geometry(frames, emb: SuperMap | None = None) -> EvenGeometry:
    """Zweibein and gravitino from the restriction of the even frames."""
    if isinstance(frames, WZFrame):
        frames = frames.frames
    if emb is not None and not emb.is_normalized():
        from .errors import NotNormalizedError

        raise NotNormalizedError("extract_geometry needs a normalized embedding")
    f = [[frames[a].components[b].restrict() for b in range(2)] for a in range(2)]
    chi = [[frames[a].components[2 + b].restrict() for b in range(2)] for a in range(2)]
    return EvenGeometry(f, chi)


def g_action(frames, U, R, T):
    """Apply the G-matrix ``diag(U^2, U) diag(R^2, R) [[1, T], [0, 1]]``.

    ``U`` and ``T`` are ``(re, im)`` pairs of super functions (``U`` even with
    unit-modulus body, ``T`` odd), ``R`` an even super function with positive
    body.  Returns the transformed frame list and its induced geometry.
    """
    if isinstance(frames, WZFrame):
        frames = frames.frames
    F1, F2, F3, F4 = frames
    ur, ui = U
    a, b = ur * R, ui * R  # U R = a + i b
    c, d = a * a - b * b, (a * b) * 2  # (U R)^2 = c + i d
    t1, t2 = T

    # a vanishing odd parameter contributes nothing (and scaling by it would not flip parity)
    G1 = F1
    G2 = F2
    if not t1.is_zero():
        G1 = G1 + F3.scale(t1)
        G2 = G2 + F4.scale(t1)
    if not t2.is_zero():
        G1 = G1 + F4.scale(t2)
        G2 = G2 - F3.scale(t2)
    N1 = G1.scale(c) + G2.scale(d)
    N2 = G2.scale(c) - G1.scale(d)
    N3 = F3.scale(a) + F4.scale(b)
    N4 = F4.scale(a) - F3.scale(b)
    new = [N1, N2, N3, N4]
    return new, extract_geometry(new)


def spin_connection(geom: EvenGeometry) -> list:
    """``omega(f_a)`` with ``nabla_{f_a} f_1 = omega(f_a) f_2``.

    Torsion freeness and ``[f_1, f_2] = c^1 f_1 + c^2 f_2`` give ``omega(f_a) = -c^a``.
    """
    f = geom.f
    br = [geom.frame_apply(0, f[1][b]) - geom.frame_apply(1, f[0][b]) for b in range(2)]
    fi = geom.inverse_f()
    c = [br[0] * fi[0][a] + br[1] * fi[1][a] for a in range(2)]
    return [-c[0], -c[1]]


def spinor_derivative(geom: EvenGeometry, cliff: CliffordData, a: int, q: list, dual=False) -> list:
    """Levi-Civita derivative ``nabla_{f_a} q = f_a(q) + omega(f_a)/2 gamma^2 gamma^1 q``.

    With ``nabla f_1 = omega f_2`` this is the lift that makes Clifford
    multiplication parallel.  ``dual`` selects the transported action on
    cospinors (``S^*``).
    """
    om = spin_connection(geom)[a]
    g12 = -(cliff.dual_gamma12 if dual else cliff.gamma12)
    out = []
    for al in range(2):
        acc = geom.frame_apply(a, q[al])
        for be in range(2):
            if g12[al, be]:
                acc = acc + om * q[be] * _num(geom.backend, Fraction(int(g12[al, be]), 2))
        out.append(acc)
    return out


def spinor_pair(cliff: CliffordData, u: list, v: list) -> SuperFunction:
    """``<u, v> = eps_{alpha beta} u^alpha v^beta``."""
    e = cliff.eps
    acc = None
    for al in range(2):
        for be in range(2):
            if e[al, be]:
                term = u[al] * v[be] * int(e[al, be])
                acc = term if acc is None else acc + term
    return acc


def gamma_apply(mat: np.ndarray, v: list) -> list:
    out = []
    for al in range(2):
        acc = None
        for be in range(2):
            if mat[al, be]:
                term = v[be] * int(mat[al, be])
                acc = term if acc is None else acc + term
        out.append(acc if acc is not None else v[0] * 0)
    return out


def susy_variation(geom: EvenGeometry, q: list, cliff: CliffordData | None = None):
    """Infinitesimal SUSY variation ``(delta f, delta chi)`` of the geometry with parameter spinor ``q``.

    ``delta f_a = 2 <gamma^b q, chi_a> f_b`` and
    ``delta chi_a = -nabla_{f_a} q - <chi_a, chi_b> gamma^b q - <chi_a, gamma^b chi_b> q``,
    with ``<,>`` the spinor metric.  Together with :func:`susy_field_variation`
    this leaves the component action invariant to first order; the
    quadratic gravitino term is fixed only up to super Weyl shifts
    ``gamma_a s``, which the action does not see.
    """
    cliff = cliff or CliffordData()
    gam = cliff.gamma
    gq = [gamma_apply(gam[b], q) for b in range(2)]
    df = [[None, None], [None, None]]
    for a in range(2):
        coeff = [spinor_pair(cliff, gq[b], geom.chi[a]) * 2 for b in range(2)]
        for c in range(2):
            df[a][c] = coeff[0] * geom.f[0][c] + coeff[1] * geom.f[1][c]
    gchi = [gamma_apply(gam[b], geom.chi[b]) for b in range(2)]
    dchi = [[None, None], [None, None]]
    for a in range(2):
        nab = spinor_derivative(geom, cliff, a, q)
        s = spinor_pair(cliff, geom.chi[a], gchi[0]) + spinor_pair(cliff, geom.chi[a], gchi[1])
        cc = [spinor_pair(cliff, geom.chi[a], geom.chi[b]) for b in range(2)]
        for be in range(2):
            dchi[a][be] = -(nab[be] + cc[0] * gq[0][be] + cc[1] * gq[1][be] + s * q[be])
    return df, dchi
