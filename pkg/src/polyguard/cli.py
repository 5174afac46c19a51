"""Command-line entry point: deploy / analyze / simulate / serve."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import List, Optional

from . import __version__
from .activation import ActivationController
from .deployment import DeploymentError, deploy
from .geometry import Polygon, PolygonError, triangulate
from .geometry.context import PolygonContext
from .simulator import RandomWalkPolicy, SimConfig, WaypointPolicy, run

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2

ENV_PREFIX = "POLYGUARD_"


def _env_default(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), fallback)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="polyguard",
        description="Guard deployment, adaptive activation and intruder "
        "tracking in simple polygons.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument(
            "--input", default=_env_default("input"), help="polygon JSON file"
        )
        sp.add_argument(
            "--out", default=_env_default("out", "."), help="output directory"
        )
        sp.add_argument(
            "--seed", type=int, default=int(_env_default("seed", "0"))
        )

    sp = sub.add_parser("deploy", help="compute the guard deployment")
    common(sp)

    sp = sub.add_parser("analyze", help="activation staircase over a ratio sweep")
    common(sp)
    sp.add_argument("--r-max", type=float, default=float(_env_default("r_max", "0") or 0))
    sp.add_argument("--r-step", type=float, default=float(_env_default("r_step", "0.05")))
    sp.add_argument("--svg", action="store_true", help="emit an SVG staircase plot")

    sp = sub.add_parser("simulate", help="run a headless pursuit simulation")
    common(sp)
    sp.add_argument("--policy", default=_env_default("policy"), help="policy JSON file")
    sp.add_argument("--duration", type=float, default=float(_env_default("duration", "10")))
    sp.add_argument("--dt", type=float, default=float(_env_default("dt", str(1 / 60))))

    sp = sub.add_parser("serve", help="start the interactive session service")
    common(sp)
    sp.add_argument("--port", type=int, default=int(_env_default("port", "8642")))
    sp.add_argument("--host", default=_env_default("host", "127.0.0.1"))
    sp.add_argument("--dt", type=float, default=float(_env_default("dt", str(1 / 60))))
    return p


def _load_polygon(args) -> Polygon:
    if not args.input:
        raise PolygonError("--input is required")
    return Polygon.load(args.input)


def _prepare(args):
    polygon = _load_polygon(args)
    tri = triangulate(polygon)
    dep = deploy(tri)
    ctx = PolygonContext(polygon, tri)
    return polygon, tri, dep, ctx


def cmd_deploy(args) -> int:
    polygon, tri, dep, _ = _prepare(args)
    os.makedirs(args.out, exist_ok=True)
    payload = dep.to_json()
    n = polygon.n
    payload["summary"] = {
        "n": n,
        "candidates": len(dep.candidate_vertices),
        "candidate_bound": n // 3,
        "diagonal_guards": len(dep.diagonal_guards),
        "diagonal_bound": n // 4,
        "vertex_guards": len(dep.vertex_guards),
        "bounds_ok": (
            len(dep.candidate_vertices) <= n // 3
            and len(dep.diagonal_guards) <= n // 4
        ),
    }
    if polygon.was_reversed:
        payload["summary"]["input_orientation"] = "cw (reversed to ccw)"
    out = os.path.join(args.out, "deployment.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    s = payload["summary"]
    print(
        f"n={s['n']} |S_c|={s['candidates']} (<= {s['candidate_bound']}) "
        f"|S_h|={s['diagonal_guards']} (<= {s['diagonal_bound']}) "
        f"vertex_guards={s['vertex_guards']}"
    )
    print(f"wrote {out}")
    return EXIT_OK


def _default_r_max(dep) -> float:
    lens = [g.length for g in dep.diagonal_guards]
    if not lens:
        return 1.0
    return dep.tri.polygon.diameter / min(lens)


def cmd_analyze(args) -> int:
    polygon, tri, dep, ctx = _prepare(args)
    os.makedirs(args.out, exist_ok=True)
    controller = ActivationController(ctx, dep)
    r_max = args.r_max if args.r_max > 0 else _default_r_max(dep)
    if args.r_step <= 0:
        raise PolygonError("--r-step must be > 0")
    sweep = controller.threshold_sweep(r_max=r_max, step=args.r_step)
    csv_path = os.path.join(args.out, "staircase.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(sweep.to_csv())
    json_path = os.path.join(args.out, "staircase.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(sweep.to_json(), fh, indent=2)
        fh.write("\n")
    outputs = [csv_path, json_path]
    if args.svg:
        svg_path = os.path.join(args.out, "staircase.svg")
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(render_staircase_svg(sweep))
        outputs.append(svg_path)
    print(
        f"thresholds: {['%.4g@%d' % (r, c) for r, c in sweep.thresholds]} "
        f"saturation={sweep.saturation_count}/{len(dep.vertex_guards)}"
    )
    print("wrote " + ", ".join(outputs))
    return EXIT_OK


def render_staircase_svg(sweep, width: int = 480, height: int = 280) -> str:
    pts = sweep.points
    if not pts:
        return "<svg xmlns='http://www.w3.org/2000/svg'/>"
    r_max = max(r for r, _ in pts) or 1.0
    c_max = max(c for _, c in pts) or 1
    pad = 36
    sx = (width - 2 * pad) / r_max
    sy = (height - 2 * pad) / max(1, c_max)

    def x(r):
        return pad + r * sx

    def y(c):
        return height - pad - c * sy

    path: List[str] = []
    prev_c = pts[0][1]
    path.append(f"M {x(0):.2f} {y(prev_c):.2f}")
    for r, c in pts[1:]:
        if c != prev_c:
            path.append(f"L {x(r):.2f} {y(prev_c):.2f}")
            path.append(f"L {x(r):.2f} {y(c):.2f}")
            prev_c = c
    path.append(f"L {x(r_max):.2f} {y(prev_c):.2f}")
    ticks = []
    for c in range(0, c_max + 1):
        ticks.append(
            f"<text x='{pad - 6}' y='{y(c) + 4:.2f}' font-size='10' text-anchor='end'>{c}</text>"
        )
    return (
        "<svg xmlns='http://www.w3.org/2000/svg' "
        f"width='{width}' height='{height}'>"
        f"<rect width='{width}' height='{height}' fill='white'/>"
        f"<line x1='{pad}' y1='{height-pad}' x2='{width-pad}' y2='{height-pad}' stroke='black'/>"
        f"<line x1='{pad}' y1='{pad}' x2='{pad}' y2='{height-pad}' stroke='black'/>"
        f"<path d='{' '.join(path)}' fill='none' stroke='crimson' stroke-width='2'/>"
        + "".join(ticks)
        + f"<text x='{width/2:.0f}' y='{height-8}' font-size='11' text-anchor='middle'>speed ratio</text>"
        + f"<text x='12' y='{pad-10}' font-size='11'>active static guards</text>"
        + "</svg>\n"
    )


def _policy_from_spec(spec: Optional[dict], seed: int):
    if spec is None:
        return RandomWalkPolicy(seed=seed, speed=1.0)
    kind = spec.get("kind", "random-walk")
    if kind == "waypoints":
        return WaypointPolicy(
            waypoints=[tuple(w) for w in spec["waypoints"]],
            speed=float(spec.get("speed", 1.0)),
            loop=bool(spec.get("loop", True)),
        )
    if kind == "random-walk":
        return RandomWalkPolicy(
            seed=int(spec.get("seed", seed)),
            speed=float(spec.get("speed", 1.0)),
            turn_every=int(spec.get("turn_every", 30)),
        )
    raise PolygonError(f"unknown policy kind {kind!r}")


def cmd_simulate(args) -> int:
    polygon, tri, dep, ctx = _prepare(args)
    os.makedirs(args.out, exist_ok=True)
    spec = None
    if args.policy:
        with open(args.policy, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    policy = _policy_from_spec(spec, args.seed)
    config = SimConfig(dt=args.dt)
    trace = run(ctx, dep, policy, duration=args.duration, config=config)
    trace_path = os.path.join(args.out, "trace.jsonl")
    with open(trace_path, "w", encoding="utf-8") as fh:
        fh.write(trace.to_jsonl())
    report_path = os.path.join(args.out, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(trace.report(), fh, indent=2)
        fh.write("\n")
    nviol = len(trace.violations)
    print(
        f"steps={len(trace.records)} violations={nviol} "
        f"activations={len(trace.events)}"
    )
    print(f"wrote {trace_path}, {report_path}")
    return EXIT_INVARIANT if nviol else EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    polygon = _load_polygon(args)
    app = create_app(polygon, dt=args.dt)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "deploy":
            return cmd_deploy(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "serve":
            return cmd_serve(args)
    except (PolygonError, FileNotFoundError, json.JSONDecodeError) as ex:
        print(f"input error: {ex}", file=sys.stderr)
        return EXIT_INPUT
    except DeploymentError as ex:
        print(f"invariant violation: {ex}", file=sys.stderr)
        return EXIT_INVARIANT
    parser.error("unknown command")
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
