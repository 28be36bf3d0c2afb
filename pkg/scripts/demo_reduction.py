#!/usr/bin/env python3
"""Assemble a superfield from random component data on the torus and compare the two actions.

Prints every base-monomial coefficient of the super space action and of the
component action, and their difference.
"""
import argparse

from supergeom.scene import Scene
from supergeom.sigma import action_component, action_super, assemble
from supergeom.srs import wz_solve
from supergeom.suites import grassmann_text


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="override the default scene seed")
    args = p.parse_args()
    scene = Scene.default() if args.seed is None else Scene.default().with_seed(args.seed)
    cliff = scene.cliff()
    s = scene.sampler(0)
    geom, c = scene.geometry(s), scene.fields(s)
    frames = wz_solve(geom, cliff)
    sup = action_super(assemble(c, frames, cliff=cliff), frames, cliff=cliff)
    comp, terms = action_component(c, geom, scene.target(), cliff, detail=True)
    print(f"scene {scene.name}, seed {scene.seed}")
    for name, val in terms.items():
        print(f"  component term {name:>12}: {grassmann_text(val, 8)}")
    print(f"  super space action      : {grassmann_text(sup, 10)}")
    print(f"  component action        : {grassmann_text(comp, 10)}")
    print(f"  max coefficient difference: {(sup - comp).max_abs():.3e}")


if __name__ == "__main__":
    main()
