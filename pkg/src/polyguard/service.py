"""Session service: exposes a live simulation over a WebSocket with JSON
messages, plus an HTTP health endpoint. The UI is a pure client; the
simulation advances on server ticks (wall-clock cadence, or explicit tick
messages in manual mode for deterministic replay)."""

from __future__ import annotations

import asyncio
import itertools
import json
import math
from typing import Dict, List, Optional, Tuple

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import __version__
from .activation import ActivationController
from .deployment import deploy
from .geometry import Polygon, PolygonError, triangulate
from .geometry.context import PolygonContext
from .guard_model import TriClass
from .simulator import SimConfig, Simulator

PROTOCOL_VERSION = 1


class Session:
    def __init__(self, session_id: int, polygon: Polygon, dt: float):
        self.id = session_id
        self.dt = dt
        self.seq = itertools.count(1)
        self.command_velocity: Tuple[float, float] = (0.0, 0.0)
        self.speed_cap = math.inf
        self.event_cursor = 0
        self.load_polygon(polygon)

    def load_polygon(self, polygon: Polygon) -> None:
        self.polygon = polygon
        tri = triangulate(polygon)
        self.dep = deploy(tri)
        self.ctx = PolygonContext(polygon, tri)
        self.sim = Simulator(
            self.ctx, self.dep, config=SimConfig(dt=self.dt, speed_cap=self.speed_cap)
        )
        self.command_velocity = (0.0, 0.0)
        self.event_cursor = 0

    def reset(self) -> None:
        self.load_polygon(self.polygon)

    def apply_steer(self, vx: float, vy: float) -> Tuple[float, float]:
        speed = math.hypot(vx, vy)
        if speed > self.speed_cap and speed > 0:
            k = self.speed_cap / speed
            vx, vy = vx * k, vy * k
        self.command_velocity = (vx, vy)
        return self.command_velocity

    def tick(self) -> dict:
        self.sim.step(self.command_velocity)
        return self.snapshot()

    def new_events(self) -> List[dict]:
        out = []
        while self.event_cursor < len(self.sim.events):
            step, ev = self.sim.events[self.event_cursor]
            out.append({"type": "event", "session": self.id, "step": step, **ev.to_json()})
            self.event_cursor += 1
        return out

    def snapshot(self) -> dict:
        sim = self.sim
        dep = self.dep
        tri = dep.tri
        model = sim.controller.model(sim.state.active)
        regions = model.regions(sim.state.r)
        label_names = {TriClass.SAFE: "safe", TriClass.UNSAFE: "unsafe", TriClass.REGULAR: "regular"}
        guards = []
        for g in dep.diagonal_guards:
            a = self.polygon.vertices[g.diagonal[0]]
            b = self.polygon.vertices[g.diagonal[1]]
            reg = regions[g.index]
            guards.append(
                {
                    "id": g.index,
                    "diagonal": [list(a), list(b)],
                    "candidate": g.candidate,
                    "param": sim.guard_params[g.index],
                    "pos": list(sim.guard_point(g.index)),
                    "type": model.assignments[g.index].gtype,
                    "s_int": [[list(p) for p in seg] for seg in reg.s_int],
                    "c1": reg.c1.to_json(),
                }
            )
        return {
            "v": PROTOCOL_VERSION,
            "type": "snapshot",
            "session": self.id,
            "seq": next(self.seq),
            "t": sim.t,
            "step": sim.step_count,
            "polygon": [list(p) for p in self.polygon.vertices],
            "triangles": [list(t) for t in tri.triangles],
            "labels": [label_names[c] for c in model.labels.cls],
            "intruder": list(sim.p_i),
            "v_e": math.hypot(*self.command_velocity),
            "r": sim.state.r,
            "speed_cap": None if math.isinf(self.speed_cap) else self.speed_cap,
            "guard_speed": sim.config.guard_speed,
            "active_vertices": sorted(sim.state.active),
            "vertex_guards": list(dep.vertex_guards),
            "active_count": len(sim.state.active),
            "guards": guards,
        }


def create_app(
    polygon: Optional[Polygon] = None,
    dt: float = 1.0 / 60.0,
    manual_tick: bool = False,
) -> FastAPI:
    app = FastAPI(title="polyguard service", version=__version__)
    sessions: Dict[int, Session] = {}
    session_ids = itertools.count(1)
    default_polygon = polygon or Polygon.from_points(
        [(0, 0), (10, 0), (10, 10), (0, 10)]
    )

    @app.get("/health")
    def health():
        return {"version": __version__, "sessions": len(sessions)}

    async def _broadcaster(session: Session, ws: WebSocket):
        try:
            while True:
                await asyncio.sleep(session.dt)
                payload = session.tick()
                for ev in session.new_events():
                    await ws.send_text(json.dumps(ev))
                try:
                    await ws.send_text(json.dumps(payload))
                except RuntimeError:
                    return
        except (WebSocketDisconnect, asyncio.CancelledError):
            return

    @app.websocket("/session")
    async def session_ws(ws: WebSocket):
        await ws.accept()
        session = Session(next(session_ids), default_polygon, dt)
        sessions[session.id] = session
        ticker = None
        if not manual_tick:
            ticker = asyncio.create_task(_broadcaster(session, ws))
        try:
            hello = session.snapshot()
            hello["type"] = "hello"
            await ws.send_text(json.dumps(hello))
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_text(
                        json.dumps(
                            {"type": "error", "code": "bad_json", "message": "unparseable message"}
                        )
                    )
                    continue
                reply = _handle(session, msg)
                await ws.send_text(json.dumps(reply))
                if msg.get("type") == "tick" and manual_tick:
                    for ev in session.new_events():
                        await ws.send_text(json.dumps(ev))
                    await ws.send_text(json.dumps(session.snapshot()))
        except WebSocketDisconnect:
            pass
        finally:
            if ticker:
                ticker.cancel()
            sessions.pop(session.id, None)

    def _handle(session: Session, msg: dict) -> dict:
        mtype = msg.get("type")
        seq = msg.get("seq")
        if mtype == "steer":
            try:
                vx = float(msg["vx"])
                vy = float(msg["vy"])
            except (KeyError, TypeError, ValueError):
                return {"type": "error", "code": "bad_steer", "seq": seq,
                        "message": "steer requires numeric vx, vy"}
            applied = session.apply_steer(vx, vy)
            return {
                "type": "ack",
                "session": session.id,
                "seq": seq,
                "applied": {"vx": applied[0], "vy": applied[1]},
            }
        if mtype == "set_speed_cap":
            try:
                value = float(msg["value"])
                if value <= 0:
                    raise ValueError
            except (KeyError, TypeError, ValueError):
                return {"type": "error", "code": "bad_cap", "seq": seq,
                        "message": "set_speed_cap requires value > 0"}
            session.speed_cap = value
            session.sim.config.speed_cap = value
            return {"type": "ack", "session": session.id, "seq": seq,
                    "applied": {"speed_cap": value}}
        if mtype == "reset":
            session.reset()
            return {"type": "ack", "session": session.id, "seq": seq, "applied": "reset"}
        if mtype == "load_polygon":
            try:
                poly = Polygon.from_points(msg["vertices"])
            except (KeyError, TypeError, PolygonError) as ex:
                return {"type": "error", "code": "bad_polygon", "seq": seq,
                        "message": str(ex)}
            session.load_polygon(poly)
            return {"type": "ack", "session": session.id, "seq": seq, "applied": "load_polygon"}
        if mtype == "tick":
            return {"type": "ack", "session": session.id, "seq": seq, "applied": "tick"}
        return {"type": "error", "code": "unknown_type", "seq": seq,
                "message": f"unknown message type {mtype!r}"}

    return app
