"""Discrete-time pursuit simulation: intruder kinematics with wall sliding,
reactive guard motion under a speed cap, speed-ratio-triggered activation
updates, and a per-step audit of the tracking invariant."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .activation import ActivationController, ActivationEvent, ActivationState
from .deployment import Deployment
from .geometry.context import PolygonContext
from .geometry.primitives import (
    Point,
    dist,
    lerp,
    point_in_triangle,
    segment_intersection_params,
)
from .geometry.visibility import segment_visible, segment_visible_pulled


@dataclass
class SimConfig:
    dt: float = 1.0 / 60.0
    guard_speed: float = 1.0  # max diagonal-guard speed
    delta_r: float = 0.01  # ratio change that triggers an update
    speed_cap: float = math.inf  # clamp on commanded intruder speed
    # Activation plans for a slightly higher ratio than measured. The margin
    # gives guards strictly positive slack to absorb transients (ratio jumps,
    # guard re-labelling); at zero margin the reactive law is exactly
    # feasible and any lag would persist forever.
    announce_margin: float = 0.15


@dataclass
class StepRecord:
    step: int
    t: float
    p_i: Point
    v_e: float
    r_meas: float
    r_announced: float
    guard_params: Tuple[float, ...]
    active: Tuple[int, ...]
    triangle: int
    covered: bool
    visible: bool
    wall_clip: bool

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "t": round(self.t, 9),
            "p_i": [self.p_i[0], self.p_i[1]],
            "v_e": self.v_e,
            "r_meas": self.r_meas,
            "r_announced": self.r_announced,
            "guard_params": list(self.guard_params),
            "active": list(self.active),
            "triangle": self.triangle,
            "covered": self.covered,
            "visible": self.visible,
            "wall_clip": self.wall_clip,
        }


@dataclass
class Violation:
    step: int
    kind: str  # "coverage" | "visibility"
    p_i: Point
    triangle: int

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "kind": self.kind,
            "p_i": [self.p_i[0], self.p_i[1]],
            "triangle": self.triangle,
        }


@dataclass
class SimTrace:
    records: List[StepRecord]
    violations: List[Violation]
    events: List[Tuple[int, ActivationEvent]]  # (step, event)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.to_json()) + "\n" for r in self.records)

    def report(self) -> dict:
        return {
            "steps": len(self.records),
            "violations": [v.to_json() for v in self.violations],
            "activations": [
                {"step": s, **e.to_json()} for s, e in self.events
            ],
        }


class Simulator:
    def __init__(
        self,
        ctx: PolygonContext,
        dep: Deployment,
        config: Optional[SimConfig] = None,
        start: Optional[Point] = None,
    ):
        self.ctx = ctx
        self.dep = dep
        self.config = config or SimConfig()
        self.controller = ActivationController(ctx, dep)
        self.state = self.controller.initial_state()
        self.state, _ = self.controller.update(self.state, 0.0)
        self.t = 0.0
        self.step_count = 0
        self.p_i = start if start is not None else self._default_start()
        self.ctx.polygon.require_inside(self.p_i, "intruder start")
        self._tri_hint: Optional[int] = None
        self._staged: Optional[ActivationState] = None
        self.events: List[Tuple[int, ActivationEvent]] = []
        # Guard positions as parameters along the stored diagonal (a -> b).
        self.guard_params: List[float] = []
        self._snap_guards_to_targets()

    def _default_start(self) -> Point:
        a, b, c = self.dep.tri.triangle_points(0)
        return (
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
        )

    # -- guard kinematics -------------------------------------------------

    def _target_param(self, g_idx: int, target: Point) -> float:
        g = self.dep.diagonal_guards[g_idx]
        a = self.ctx.polygon.vertices[g.diagonal[0]]
        b = self.ctx.polygon.vertices[g.diagonal[1]]
        denom = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
        if denom == 0.0:
            return 0.0
        t = ((target[0] - a[0]) * (b[0] - a[0]) + (target[1] - a[1]) * (b[1] - a[1])) / denom
        return min(1.0, max(0.0, t))

    def guard_point(self, g_idx: int) -> Point:
        g = self.dep.diagonal_guards[g_idx]
        a = self.ctx.polygon.vertices[g.diagonal[0]]
        b = self.ctx.polygon.vertices[g.diagonal[1]]
        return lerp(a, b, self.guard_params[g_idx])

    def _snap_guards_to_targets(self) -> None:
        self.guard_params = []
        if not self.dep.diagonal_guards:
            return
        model = self.controller.model(self.state.active)
        regions = model.regions(self.state.r)
        for g in self.dep.diagonal_guards:
            target = model.reactive_position(g.index, regions, self.p_i)
            self.guard_params.append(self._target_param(g.index, target))

    # -- stepping ----------------------------------------------------------

    def step(self, command: Tuple[float, float]) -> StepRecord:
        cfg = self.config
        vx, vy = command
        speed = math.hypot(vx, vy)
        if speed > cfg.speed_cap:
            scale = cfg.speed_cap / speed
            vx, vy = vx * scale, vy * scale
            speed = cfg.speed_cap
        r_meas = speed / cfg.guard_speed if cfg.guard_speed > 0 else math.inf
        r_plan = r_meas * (1.0 + cfg.announce_margin)

        # Ratio increases are staged: vertex guards activate immediately
        # (instant, static protection), but the higher ratio is announced
        # only once the diagonal guards have reached the positions the new
        # plan requires. Until then the announced ratio (the contract the
        # intruder's speed respects) stays at its old value. Decreases apply
        # immediately: protection only relaxes when the intruder is slow.
        if r_plan > self._plan_r() + cfg.delta_r:
            base = self._staged if self._staged is not None else self.state
            staged, evs = self.controller.update(base, r_plan)
            self.events.extend((self.step_count, e) for e in evs)
            # commit the enlarged active set now, hold the announcement
            self.state = ActivationState(r=self.state.r, active=staged.active)
            self._staged = staged
        elif self._staged is None and r_plan < self.state.r - cfg.delta_r:
            self.state, evs = self.controller.update(self.state, r_plan)
            self.events.extend((self.step_count, e) for e in evs)

        new_p, clipped = self._move_intruder((vx, vy), cfg.dt)
        self.p_i = new_p

        # Guards chase the staged plan's targets when one is pending.
        plan_state = self._staged if self._staged is not None else self.state
        model = self.controller.model(plan_state.active)
        regions = model.regions(plan_state.r)
        max_step = cfg.guard_speed * cfg.dt
        arrived = True
        for g in self.dep.diagonal_guards:
            target = model.reactive_position(g.index, regions, self.p_i)
            t_target = self._target_param(g.index, target)
            t_now = self.guard_params[g.index]
            budget = max_step / g.length if g.length > 0 else 1.0
            delta = t_target - t_now
            if abs(delta) > budget:
                delta = math.copysign(budget, delta)
                arrived = False
            self.guard_params[g.index] = t_now + delta
        if self._staged is not None and arrived:
            self.state = self._staged
            self._staged = None

        self.t += cfg.dt
        self.step_count += 1
        return self._audit(speed, r_meas, clipped)

    def _plan_r(self) -> float:
        return self._staged.r if self._staged is not None else self.state.r

    def teleport(self, p: Point) -> StepRecord:
        """Test hook: displace the intruder without kinematics; the audit in
        the returned record reflects the post-teleport situation."""
        self.ctx.polygon.require_inside(p, "teleport target")
        self.p_i = p
        self.step_count += 1
        return self._audit(0.0, self.state.r, False)

    def _move_intruder(
        self, vel: Tuple[float, float], dt: float
    ) -> Tuple[Point, bool]:
        polygon = self.ctx.polygon
        covers = self.ctx.covers_xy
        margin = 1e-9 * max(1.0, polygon.diameter)
        pull = margin
        p = self.p_i
        vx, vy = vel
        clipped = False
        remaining = dt
        for _ in range(3):
            if (vx == 0.0 and vy == 0.0) or remaining <= 0.0:
                break
            q = (p[0] + vx * remaining, p[1] + vy * remaining)
            if covers(q[0], q[1]) and segment_visible_pulled(
                polygon, p, q, self.ctx.arrays, pull
            ):
                p = q
                break
            clipped = True
            hit_t, edge = self._first_exit(p, q)
            if hit_t > 0.0:
                p = lerp(p, q, hit_t * (1.0 - 1e-9))
            remaining = remaining * (1.0 - hit_t)
            if edge is None:
                break
            (a, b) = edge
            ex, ey = b[0] - a[0], b[1] - a[1]
            norm = math.hypot(ex, ey)
            if norm == 0.0:
                break
            # stand off the wall a hair and slide along it
            cand = (p[0] - margin * ey / norm, p[1] + margin * ex / norm)
            if covers(cand[0], cand[1]):
                p = cand
            coef = (vx * ex + vy * ey) / (norm * norm)
            vx, vy = coef * ex, coef * ey
        if not covers(p[0], p[1]):
            p = polygon.snap_inside(p, tol=math.inf)
        return p, clipped

    def _first_exit(self, p: Point, q: Point):
        polygon = self.ctx.polygon
        covers = self.ctx.covers_xy
        a_arr, b_arr = self.ctx.arrays
        # numpy prefilter: edges that can touch segment pq
        px, py = p
        qx, qy = q
        dx, dy = qx - px, qy - py
        oa = dx * (a_arr[:, 1] - py) - dy * (a_arr[:, 0] - px)
        ob = dx * (b_arr[:, 1] - py) - dy * (b_arr[:, 0] - px)
        ex = b_arr[:, 0] - a_arr[:, 0]
        ey = b_arr[:, 1] - a_arr[:, 1]
        oc = ex * (py - a_arr[:, 1]) - ey * (px - a_arr[:, 0])
        od = ex * (qy - a_arr[:, 1]) - ey * (qx - a_arr[:, 0])
        scale = 1e-12 * (abs(oa) + abs(ob) + abs(oc) + abs(od) + 1e-300)
        touching = ~((oa * ob > scale) | (oc * od > scale))
        verts = polygon.vertices
        n = polygon.n
        params: List[Tuple[float, Tuple[Point, Point]]] = []
        import numpy as _np

        for i in _np.nonzero(touching)[0]:
            a, b = verts[int(i)], verts[(int(i) + 1) % n]
            hit = segment_intersection_params(p, q, a, b)
            if hit is not None:
                params.append((hit[0], (a, b)))
                if hit[1] > hit[0]:
                    params.append((hit[1], (a, b)))
        params.sort(key=lambda x: x[0])
        cuts = [0.0] + [t for t, _ in params] + [1.0]
        for k in range(len(cuts) - 1):
            t0, t1 = cuts[k], cuts[k + 1]
            if t1 - t0 <= 1e-12:
                continue
            mid = lerp(p, q, 0.5 * (t0 + t1))
            if not covers(mid[0], mid[1]):
                # exits at t0; find the edge touched there
                edge = None
                for t, e in params:
                    if abs(t - t0) <= 1e-9:
                        edge = e
                        break
                return t0, edge
        return 1.0, None

    # -- audit ----------------------------------------------------------------

    def _audit(self, speed: float, r_meas: float, clipped: bool) -> StepRecord:
        tri = self.dep.tri
        t_id = tri.locate_tolerant(self.p_i, hint=self._tri_hint)
        self._tri_hint = t_id
        verts = set(tri.triangles[t_id])
        vs = self.ctx.polygon.vertices
        tol = 1e-9 * max(1.0, self.ctx.polygon.diameter)

        covered_by: List[Tuple[str, int, Point]] = []
        for v in self.state.active:
            if v in verts:
                covered_by.append(("vertex", v, vs[v]))
        tri_edges = set(tri.triangle_edges(t_id))
        ta, tb, tc = tri.triangle_points(t_id)
        for g in self.dep.diagonal_guards:
            pos = self.guard_point(g.index)
            if g.diagonal in tri_edges:
                covered_by.append(("diagonal", g.index, pos))
                continue
            if point_in_triangle(pos, ta, tb, tc):
                # guard chords may cross triangles; a guard standing inside
                # the triangle covers it trivially
                covered_by.append(("diagonal", g.index, pos))
                continue
            for v in verts:
                if dist(pos, vs[v]) <= tol:
                    covered_by.append(("diagonal", g.index, pos))
                    break
        covered = bool(covered_by)

        visible = False
        watchers = [pos for (_k, _i, pos) in covered_by]
        watchers.extend(
            self.guard_point(g.index) for g in self.dep.diagonal_guards
        )
        watchers.extend(vs[v] for v in self.state.active)
        pull = 1e-9 * max(1.0, self.ctx.polygon.diameter)
        for pos in watchers:
            if segment_visible_pulled(
                self.ctx.polygon, pos, self.p_i, self.ctx.arrays, pull
            ):
                visible = True
                break

        return StepRecord(
            step=self.step_count,
            t=self.t,
            p_i=self.p_i,
            v_e=speed,
            r_meas=r_meas,
            r_announced=self.state.r,
            guard_params=tuple(self.guard_params),
            active=tuple(sorted(self.state.active)),
            triangle=t_id,
            covered=covered,
            visible=visible,
            wall_clip=clipped,
        )


# ---------------------------------------------------------------------------
# Intruder policies
# ---------------------------------------------------------------------------


class WaypointPolicy:
    """Drive toward a list of waypoints at a (possibly time-varying) speed."""

    def __init__(
        self,
        waypoints: Sequence[Point],
        speed: float | Callable[[float], float],
        loop: bool = True,
    ):
        self.waypoints = [tuple(w) for w in waypoints]
        self.speed = speed
        self.loop = loop
        self._idx = 0

    def command(self, sim: Simulator) -> Tuple[float, float]:
        if self._idx >= len(self.waypoints):
            return (0.0, 0.0)
        target = self.waypoints[self._idx]
        p = sim.p_i
        d = dist(p, target)
        spd = self.speed(sim.t) if callable(self.speed) else self.speed
        if d < max(1e-9, spd * sim.config.dt):
            self._idx += 1
            if self._idx >= len(self.waypoints) and self.loop:
                self._idx = 0
            return (0.0, 0.0)
        return ((target[0] - p[0]) / d * spd, (target[1] - p[1]) / d * spd)


class RandomWalkPolicy:
    """Seeded random heading with occasional turns and a speed profile.

    With respect_announced=True the commanded speed never exceeds what the
    last announced ratio permits (the adaptive-tracking contract).
    """

    def __init__(
        self,
        seed: int,
        speed: float | Callable[[float], float],
        turn_every: int = 30,
        respect_announced: bool = False,
    ):
        self.rng = random.Random(seed)
        self.speed = speed
        self.turn_every = turn_every
        self.respect_announced = respect_announced
        self._heading = self.rng.uniform(0, 2 * math.pi)
        self._count = 0

    def command(self, sim: Simulator) -> Tuple[float, float]:
        if self._count % self.turn_every == 0:
            self._heading = self.rng.uniform(0, 2 * math.pi)
        self._count += 1
        spd = self.speed(sim.t) if callable(self.speed) else self.speed
        if self.respect_announced:
            allowed = sim.state.r * sim.config.guard_speed
            spd = min(spd, max(allowed, 0.05 * sim.config.guard_speed))
        return (spd * math.cos(self._heading), spd * math.sin(self._heading))


def run(
    ctx: PolygonContext,
    dep: Deployment,
    policy,
    duration: float,
    config: Optional[SimConfig] = None,
    start: Optional[Point] = None,
) -> SimTrace:
    sim = Simulator(ctx, dep, config=config, start=start)
    records: List[StepRecord] = []
    violations: List[Violation] = []
    steps = int(round(duration / sim.config.dt))
    for _ in range(steps):
        cmd = policy.command(sim)
        rec = sim.step(cmd)
        records.append(rec)
        if not rec.covered:
            violations.append(
                Violation(rec.step, "coverage", rec.p_i, rec.triangle)
            )
        if not rec.visible:
            violations.append(
                Violation(rec.step, "visibility", rec.p_i, rec.triangle)
            )
    return SimTrace(records=records, violations=violations, events=sim.events)


def measure_speed(
    history: Sequence[Point], dt: float, window: int = 1
) -> float:
    """Windowed displacement/time speed estimate from position samples."""
    if len(history) < 2:
        return 0.0
    w = min(window, len(history) - 1)
    a = history[-1 - w]
    b = history[-1]
    return dist(a, b) / (w * dt)
