"""Command line driver: ``supergeom verify [suite] [scene] [--flags]``.

Exit status: 0 when every check passes, 1 when a check fails (package
errors inside a suite count as failing checks), 2 for scene schema errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .errors import SchemaError
from .scene import SCHEMA_VERSION, SUITES, Scene

REPORT_SCHEMA_VERSION = 1
log = logging.getLogger("supergeom")


def build_report(scene: Scene, suites: list, tolerance_scale: float = 1.0, strict: bool = True) -> dict:
    """Run ``suites`` on ``scene`` and assemble the (deterministic) report record.

    ``strict`` makes suites that do not apply to the scene fail; otherwise
    they are listed as unsupported.
    """
    from .suites import run_suite

    if tolerance_scale != 1.0:
        scaled = {k: (v if k == "slope" else v * tolerance_scale) for k, v in scene.tolerances.items()}
        scene.tolerances = scaled
    results = []
    for name in suites:
        t0 = time.perf_counter()
        rep = run_suite(scene, name, strict)
        status = "unsupported" if "unsupported" in rep.values else ("pass" if rep.passed else "FAIL")
        log.info("%-20s %s (%.1f s)", name, status, time.perf_counter() - t0)
        results.append(rep.to_dict())
    return {
        "report_schema_version": REPORT_SCHEMA_VERSION,
        "scene_schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "scene": scene.summary(),
        "conventions": scene.cliff().ledger(),
        "tolerance_scale": tolerance_scale,
        "tolerances": dict(sorted(scene.tolerances.items())),
        "suites": results,
        "passed": all(r["passed"] for r in results),
    }


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supergeom", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run verification suites on a scene")
    v.add_argument("suite_pos", nargs="?", metavar="suite", help="suite name (same as --suite)")
    v.add_argument("scene_pos", nargs="?", metavar="scene", help="scene file (same as --scene)")
    v.add_argument("--scene", help="scene JSON file (default: the shipped default scene)")
    v.add_argument("--suite", choices=[*SUITES, "all"], help="suite to run (default: the scene's selection)")
    v.add_argument("--report", help="write the JSON report here (default: stdout)")
    v.add_argument("--seed", type=int, help="override the scene seed")
    v.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every tolerance (not slope bounds)")
    v.add_argument("-q", "--quiet", action="store_true", help="no progress lines on stderr")
    sub.add_parser("suites", help="list suite names")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "suites":
        print("\n".join(SUITES))
        return 0
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    suite = args.suite or args.suite_pos
    scene_path = args.scene or args.scene_pos
    if suite is not None and suite not in (*SUITES, "all"):
        print(f"error: unknown suite {suite!r}; choose from {', '.join((*SUITES, 'all'))}", file=sys.stderr)
        return 2
    if not args.tolerance_scale > 0:
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return 2
    try:
        scene = Scene.load(scene_path) if scene_path else Scene.default()
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise SchemaError("seed must be an unsigned 64-bit integer")
            scene = scene.with_seed(args.seed)
    except SchemaError as exc:
        print(f"SchemaError: {exc}", file=sys.stderr)
        return 2
    suites = scene.suites() if suite is None else (list(SUITES) if suite == "all" else [suite])
    # a single, explicitly named suite must apply to the scene
    strict = len(suites) == 1
    report = build_report(scene, suites, args.tolerance_scale, strict)
    text = json.dumps(report, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    for r in report["suites"]:
        for chk in r["checks"]:
            if not chk["passed"]:
                log.warning("FAIL %s: %s = %s (tolerance %s)", r["suite"], chk["name"], chk["value"], chk["tolerance"])
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
