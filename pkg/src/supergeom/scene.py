"""Scene files: JSON declarations of algebra, backend, conventions, data and tolerances.

A scene is validated against :data:`SCENE_SCHEMA` before anything is
computed; all random data is derived from the scene's ``seed``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .coeffs import GridBackend, PolyBackend
from .errors import SchemaError
from .grassmann import GeneratorSet
from .sampling import FieldSampler, SamplerConfig
from .sigma import TargetSpace
from .srs import CliffordData
from .superfield import SuperFunction

SCHEMA_VERSION = 1

SUITES = ("srs-model", "wz-solve", "reduce-action", "invariances", "noether", "deformation", "berezin-covariance")

DEFAULT_TOLERANCES = {
    "reduce_action": 1e-8,
    "roundtrip": 1e-10,
    "wz_residual": 1e-9,
    "wz_roundtrip": 1e-10,
    "exact_symmetry": 1e-10,
    "slope": 1.9,
    "g_invariance": 1e-9,
    "trace": 1e-8,
    "el_residual": 1e-9,
    "divergence": 1e-8,
    "dbar": 1e-8,
    "cross_check": 1e-6,
    "berezin": 1e-10,
    "gauge_recovery": 1e-9,
    "reconstruction": 1e-8,
}

DEFAULT_SAMPLES = {
    "reduce_action": 20,
    "reduce_action_poly": 5,
    "wz_solve": 20,
    "noether": 3,
    "berezin_maps": 10,
    "ber_matrices": 100,
    "deformation_pairs": 3,
}

_int_list = {"type": "array", "items": {"type": "integer", "minimum": 0}}
_mode = {
    "type": "object",
    "required": ["component", "k"],
    "additionalProperties": False,
    "properties": {
        "component": {"type": "array", "items": {"type": "integer", "minimum": 0, "maximum": 1}, "minItems": 2, "maxItems": 2},
        "k": {"type": "array", "items": {"type": "integer", "minimum": -8, "maximum": 8}, "minItems": 2, "maxItems": 2},
        "cos": {"type": "number"},
        "sin": {"type": "number"},
        "base": {"type": "integer", "minimum": 0},
    },
}

SCENE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "seed", "algebra", "backend"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "algebra": {
            "type": "object",
            "required": ["n_fiber", "n_base"],
            "additionalProperties": False,
            "properties": {
                "n_fiber": {"const": 2},
                "n_base": {"type": "integer", "minimum": 0, "maximum": 10},
            },
        },
        "backend": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["kind", "n"],
                    "additionalProperties": False,
                    "properties": {"kind": {"const": "grid"}, "n": {"enum": [8, 16, 32, 64, 128]}},
                },
                {
                    "type": "object",
                    "required": ["kind", "box"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"const": "poly"},
                        "max_degree": {"type": "integer", "minimum": 2, "maximum": 16},
                        "box": {
                            "type": "array",
                            "minItems": 2,
                            "maxItems": 2,
                            "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                        },
                    },
                },
            ]
        },
        "conventions": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eps_orientation": {"enum": [1, -1]},
                "gamma1_sign": {"enum": [1, -1]},
                "gamma2_sign": {"enum": [1, -1]},
                "swap_gammas": {"type": "boolean"},
            },
        },
        "target": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["kind", "dim"],
                    "additionalProperties": False,
                    "properties": {"kind": {"const": "flat"}, "dim": {"type": "integer", "minimum": 1, "maximum": 3}},
                },
                {
                    "type": "object",
                    "required": ["kind"],
                    "additionalProperties": False,
                    "properties": {"kind": {"const": "sphere"}, "dim": {"const": 2}},
                },
            ]
        },
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["random", "flat"]},
                "chi_base": _int_list,
                "f_amplitude": {"type": "number", "minimum": 0, "maximum": 0.3},
                "chi_amplitude": {"type": "number", "minimum": 0},
            },
        },
        "fields": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "psi_base": _int_list,
                "auxiliary": {"type": "boolean"},
                "winding": {
                    "oneOf": [
                        {"type": "null"},
                        {"const": "random"},
                        {"type": "array", "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}},
                    ]
                },
            },
        },
        "parameters": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"base": _int_list},
        },
        "deformation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "metric": {"type": "array", "items": _mode},
                "gravitino": {"type": "array", "items": _mode},
            },
        },
        "samples": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "integer", "minimum": 0} for k in DEFAULT_SAMPLES},
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number", "exclusiveMinimum": 0} for k in DEFAULT_TOLERANCES},
        },
        "suites": {"type": "array", "items": {"enum": [*SUITES, "all"]}},
    },
}


def sphere_target() -> TargetSpace:
    """Unit round sphere in stereographic coordinates, ``g = 4 (1 + |phi|^2)^-2 delta``."""

    def conf(phi):
        r2 = phi[0] ** 2 + phi[1] ** 2
        return 4.0 / (1.0 + r2) ** 2, [-2.0 * phi[0] / (1.0 + r2), -2.0 * phi[1] / (1.0 + r2)]

    def metric(phi):
        w, _ = conf(phi)
        z = 0 * w
        return [[w, z], [z, w]]

    def christoffel(phi):
        # g = e^{2u} delta: Gamma^A_BC = d_B^A u_C + d_C^A u_B - d_BC u_A
        _, du = conf(phi)
        return [
            [[(A == B) * du[C] + (A == C) * du[B] - (B == C) * du[A] for C in range(2)] for B in range(2)]
            for A in range(2)
        ]

    def riemann(phi):
        # constant curvature one: R_ABCD = g_AC g_BD - g_AD g_BC
        g = metric(phi)
        return [
            [[[g[A][C] * g[B][D] - g[A][D] * g[B][C] for D in range(2)] for C in range(2)] for B in range(2)]
            for A in range(2)
        ]

    return TargetSpace(2, metric, christoffel, riemann)


@dataclass
class Scene:
    """A validated scene (see :data:`SCENE_SCHEMA`)."""

    raw: dict
    path: str | None = None
    tolerances: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tolerances = {**DEFAULT_TOLERANCES, **self.raw.get("tolerances", {})}
        self.samples = {**DEFAULT_SAMPLES, **self.raw.get("samples", {})}
        nb = self.gens().n_base
        for where, key in (("geometry", "chi_base"), ("fields", "psi_base"), ("parameters", "base")):
            for k in self.raw.get(where, {}).get(key, []):
                if k >= nb:
                    raise SchemaError(f"{where}.{key}: base generator {k} does not exist (n_base = {nb})")
        for m in self.raw.get("deformation", {}).get("gravitino", []):
            if "base" not in m:
                raise SchemaError("deformation.gravitino modes need a 'base' generator")
            if m["base"] >= nb:
                raise SchemaError(f"deformation.gravitino: base generator {m['base']} does not exist")
        w = self.raw.get("fields", {}).get("winding")
        if isinstance(w, list) and len(w) != self.target().dim:
            raise SchemaError("fields.winding needs one row per target dimension")
        if w is not None and self.is_poly:
            raise SchemaError("windings need the torus (grid backend)")

    # -- loading ------------------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict, path: str | None = None) -> "Scene":
        validator = jsonschema.Draft202012Validator(SCENE_SCHEMA)
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            msgs = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors]
            raise SchemaError("; ".join(msgs))
        return cls(data, path)

    @classmethod
    def load(cls, path) -> "Scene":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise SchemaError(f"cannot read scene {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"scene is not valid JSON: {exc}") from exc
        return cls.from_dict(data, str(path))

    @classmethod
    def default(cls) -> "Scene":
        text = resources.files("supergeom").joinpath("scenes/default.json").read_text()
        return cls.from_dict(json.loads(text), "default.json")

    def with_seed(self, seed: int) -> "Scene":
        return Scene.from_dict({**self.raw, "seed": int(seed)}, self.path)

    # -- derived objects -----------------------------------------------------
    @property
    def name(self) -> str:
        return self.raw.get("name", "scene")

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def is_poly(self) -> bool:
        return self.raw["backend"]["kind"] == "poly"

    def gens(self) -> GeneratorSet:
        a = self.raw["algebra"]
        return GeneratorSet(a["n_fiber"], a["n_base"])

    def backend(self):
        b = self.raw["backend"]
        if b["kind"] == "grid":
            return GridBackend(b["n"])
        return PolyBackend(b.get("max_degree", 8), tuple(tuple(Fraction(v) for v in r) for r in b["box"]))

    def cliff(self) -> CliffordData:
        return CliffordData(**self.raw.get("conventions", {}))

    def target(self) -> TargetSpace:
        t = self.raw.get("target", {"kind": "flat", "dim": 2})
        if t["kind"] == "sphere":
            return sphere_target()
        return TargetSpace(t["dim"])

    def sampler(self, stream: int = 0, backend=None) -> FieldSampler:
        """Independent generator for sub-stream ``stream`` of the scene seed."""
        g = self.raw.get("geometry", {})
        cfg = SamplerConfig(
            f_amplitude=g.get("f_amplitude", SamplerConfig.f_amplitude),
            chi_amplitude=g.get("chi_amplitude", SamplerConfig.chi_amplitude),
        )
        seed = np.random.SeedSequence([self.seed, stream])
        return FieldSampler(self.gens(), backend or self.backend(), int(seed.generate_state(1)[0]), cfg)

    @property
    def chi_base(self) -> tuple:
        nb = self.gens().n_base
        return tuple(self.raw.get("geometry", {}).get("chi_base", [k for k in (0, 1) if k < nb]))

    @property
    def psi_base(self) -> tuple:
        nb = self.gens().n_base
        return tuple(self.raw.get("fields", {}).get("psi_base", [k for k in (2, 3) if k < nb]))

    @property
    def param_base(self) -> tuple:
        nb = self.gens().n_base
        return tuple(self.raw.get("parameters", {}).get("base", [k for k in (nb - 2, nb - 1) if k >= 0]))

    def geometry(self, sampler: FieldSampler):
        kind = self.raw.get("geometry", {}).get("kind", "random")
        return sampler.geometry(self.chi_base, flat=(kind == "flat"))

    def fields(self, sampler: FieldSampler):
        spec = self.raw.get("fields", {})
        target = self.target()
        w = spec.get("winding")
        if w == "random":
            w = sampler.winding(target.dim)
        if not target.flat:
            # curved targets: body-only map (see the component action)
            c = sampler.fields(target.dim, self.psi_base, spec.get("auxiliary", True), w)
            c.phi = [SuperFunction(x.gens, x.backend, {0: x.body}) for x in c.phi]
            return c
        return sampler.fields(target.dim, self.psi_base, spec.get("auxiliary", True), w)

    def deformation(self):
        """``(h, rho)`` from the Fourier-mode tables (grid only)."""
        gens, backend = self.gens(), self.backend()
        zero = SuperFunction.zero(gens, backend)
        h = [[zero, zero], [zero, zero]]
        rho = [[zero, zero], [zero, zero]]
        x1, x2 = backend.points()
        spec = self.raw.get("deformation", {})

        def wave(m):
            k1, k2 = m["k"]
            return m.get("cos", 0.0) * np.cos(k1 * x1 + k2 * x2) + m.get("sin", 0.0) * np.sin(k1 * x1 + k2 * x2)

        for m in spec.get("metric", []):
            i, j = m["component"]
            term = SuperFunction(gens, backend, {0: wave(m)})
            h[i][j] = h[i][j] + term
            if i != j:
                h[j][i] = h[j][i] + term
        for m in spec.get("gravitino", []):
            a, be = m["component"]
            rho[a][be] = rho[a][be] + SuperFunction(gens, backend, {gens.base_bit(m["base"]): wave(m)})
        return h, rho

    def suites(self) -> list:
        names = self.raw.get("suites", ["all"])
        if "all" in names:
            return list(SUITES)
        return [s for s in SUITES if s in names]

    def summary(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "algebra": self.raw["algebra"],
            "backend": self.raw["backend"],
            "target": self.raw.get("target", {"kind": "flat", "dim": 2}),
        }
