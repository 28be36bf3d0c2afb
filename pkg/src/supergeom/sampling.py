"""Seeded random low-mode data for the verification suites.

Grid samples are trigonometric polynomials with a ``cos`` *and* a ``sin``
term for each of the modes ``(1,0), (0,1), (1,1), (1,-1)`` plus a constant;
dropping either family makes many test integrals vanish by parity.  Poly
samples are small-integer rational polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .coeffs import GridBackend, Poly, PolyBackend
from .errors import ConfigurationError
from .grassmann import GeneratorSet
from .sigma import ComponentFields
from .srs import EvenGeometry
from .superfield import SuperFunction

LOW_MODES = ((1, 0), (0, 1), (1, 1), (1, -1))


@dataclass
class SamplerConfig:
    """Amplitudes of the random data (grid) and degree bounds (poly)."""

    f_amplitude: float = 0.1
    chi_amplitude: float = 0.3
    phi_amplitude: float = 0.3
    psi_amplitude: float = 0.3
    F_amplitude: float = 0.2
    poly_degree: int = 1
    poly_denominator: int = 4


class FieldSampler:
    """Random super functions, geometries and component fields from one seeded generator."""

    def __init__(self, gens: GeneratorSet, backend, seed: int = 0, config: SamplerConfig | None = None):
        self.gens = gens
        self.backend = backend
        self.rng = np.random.default_rng(seed)
        self.config = config or SamplerConfig()
        self.exact = isinstance(backend, PolyBackend)
        if isinstance(backend, GridBackend):
            self._x = backend.points()

    # -- scalar coefficient functions -------------------------------------
    def _rational(self) -> Fraction:
        den = self.config.poly_denominator
        return Fraction(int(self.rng.integers(-den, den + 1)), den)

    def coefficient(self, amp: float, const: float = 0.0):
        """One random body-type coefficient (array or polynomial)."""
        if self.exact:
            deg = self.config.poly_degree
            terms = {(i, j): self._rational() for i in range(deg + 1) for j in range(deg + 1 - i)}
            terms[(0, 0)] = terms.get((0, 0), 0) + Fraction(const)
            return Poly(terms, self.backend.max_degree)
        x1, x2 = self._x
        out = self.rng.normal() * amp * 0.5 + const + 0 * x1
        for k1, k2 in LOW_MODES:
            a, b = self.rng.normal(size=2) * amp
            out = out + a * np.cos(k1 * x1 + k2 * x2) + b * np.sin(k1 * x1 + k2 * x2)
        return out

    def constant(self, value=0.0):
        return Fraction(value) if self.exact else float(value)

    # -- super functions --------------------------------------------------
    def even(self, amp: float = 0.15, const: float = 0.0, nilpotent: tuple = ()) -> SuperFunction:
        """Even function: random body plus ``b_i b_j``-terms for the given base pairs."""
        terms = {0: self.coefficient(amp, const)}
        for i, j in nilpotent:
            terms[self.gens.base_bit(i) | self.gens.base_bit(j)] = self.coefficient(amp)
        return SuperFunction(self.gens, self.backend, terms)

    def odd(self, base: tuple, amp: float = 0.3) -> SuperFunction:
        """Odd function linear in the listed base generators (fiber-free)."""
        terms = {self.gens.base_bit(k): self.coefficient(amp) for k in base}
        return SuperFunction(self.gens, self.backend, terms)

    def spinor(self, base: tuple, amp: float = 0.3) -> list:
        return [self.odd(base, amp), self.odd(base, amp)]

    def zero(self) -> SuperFunction:
        return SuperFunction.zero(self.gens, self.backend)

    # -- composite data ---------------------------------------------------
    def geometry(self, chi_base: tuple = (0, 1), flat: bool = False, nilpotent: tuple = ()) -> EvenGeometry:
        """Random zweibein near the identity and random gravitino.

        For the poly backend the zweibein body is a constant matrix (WZ
        coordinates need a constant body there); nilpotent parts may vary.
        """
        cfg = self.config
        if flat:
            f = [[self.even(0, 1.0), self.zero()], [self.zero(), self.even(0, 1.0)]]
        elif self.exact:
            body = [[Fraction(1) + self._rational() / 4, self._rational() / 4], [self._rational() / 4, Fraction(1) + self._rational() / 4]]
            f = []
            for a in range(2):
                row = []
                for b in range(2):
                    terms = {0: Poly.const(body[a][b], self.backend.max_degree)}
                    for i, j in nilpotent:
                        terms[self.gens.base_bit(i) | self.gens.base_bit(j)] = self.coefficient(0)
                    row.append(SuperFunction(self.gens, self.backend, terms))
                f.append(row)
        else:
            f = [[self.even(cfg.f_amplitude, 1.0 if a == b else 0.0, nilpotent) for b in range(2)] for a in range(2)]
        chi = [[self.odd(chi_base, cfg.chi_amplitude) for _ in range(2)] for _ in range(2)]
        if not chi_base:
            chi = [[self.zero(), self.zero()], [self.zero(), self.zero()]]
        return EvenGeometry(f, chi)

    def fields(self, dim: int, psi_base: tuple = (2, 3), with_F: bool = True, winding=None) -> ComponentFields:
        cfg = self.config
        phi = [self.even(cfg.phi_amplitude) for _ in range(dim)]
        psi = [self.spinor(psi_base, cfg.psi_amplitude) for _ in range(dim)]
        F = [self.even(cfg.F_amplitude) if with_F else self.zero() for _ in range(dim)]
        return ComponentFields(phi, psi, F, winding)

    def winding(self, dim: int, bound: int = 2) -> np.ndarray:
        return self.rng.integers(-bound, bound + 1, size=(dim, 2))

    def group_element(self, base: tuple = (2, 3, 4), amp: float = 0.2):
        """Random ``(U, R, T)`` with coordinate dependent, nilpotent-decorated entries (grid only)."""
        if self.exact:
            raise ConfigurationError("random group elements need transcendental functions; use the grid backend")
        e1 = SuperFunction.coordinate(self.gens, self.backend, "e1")
        e2 = SuperFunction.coordinate(self.gens, self.backend, "e2")
        b0, b1 = self.odd(base[:1], 1.0), self.odd(base[1:2], 1.0)
        theta = self.even(amp * 2) + b0 * b1 * 0.3 + e1 * self.odd(base[2:], amp)
        body = theta.body
        cos = theta.apply_scalar_function([np.cos(body), -np.sin(body), -np.cos(body), np.sin(body), np.cos(body)])
        sin = theta.apply_scalar_function([np.sin(body), np.cos(body), -np.sin(body), -np.cos(body), np.sin(body)])
        R = self.even(amp, 1.0) + e1 * e2 * self.even(amp / 2)
        T = (self.odd(base[:1], amp) + e1 * self.even(amp), self.odd(base[1:2], amp) + e2 * self.even(amp / 2))
        return (cos, sin), R, T
