"""Interactive sandbox server: a 60 Hz pipeline thread plus a WebSocket feed.

The client steers the virtual pipette with ``set_pose`` messages; every
tick the server broadcasts a full ``tick`` message mirroring the pipeline
snapshot.  Consumers never block the loop: each client has a small queue
and the oldest snapshot is dropped on overflow.

Wire messages (JSON, one per WebSocket frame):

    {"type": "set_pose", "angle_deg": 0|45|90|135,
     "position": "center"|"left"|"right", "grip_step": 0..30,
     "mode": "direct"|"masked"}

    {"type": "tick", "tick": int, "merged": [[10x10]], "downsized": [[3x3]],
     "prediction": {"angle_deg", "position", "pattern_id"} | null,
     "mask": [[3x3 bool]] | null, "stimulus": [[3x3]],
     "contacts": [{"x_mm", "y_mm", "tau_a", "tau_e", "active"} x3],
     "latency_ms": float}

Invalid client messages get {"type": "error", "message": ...} and the
connection stays up.
"""
from __future__ import annotations

import asyncio
import json
import threading
import time
from contextlib import asynccontextmanager

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, HTMLResponse
from fastapi.staticfiles import StaticFiles
from pathlib import Path

from .core_types import AngleClass, PositionClass
from .cnn.model import ModelParams
from .pipeline import Mode, Pipeline, PoseState, TICK_HZ, TickSnapshot
from .sensor_sim import SimConfig, synth_frame

_ANGLE_BY_DEG = {a.degrees: a for a in AngleClass}
_POSITION_BY_NAME = {p.name.lower(): p for p in PositionClass}

FRONTEND_DIR = Path(__file__).resolve().parents[2] / "frontend"


class PoseCommandError(ValueError):
    """Client message failed validation."""


def parse_pose_command(raw: str) -> tuple[PoseState, Mode]:
    """Validate a set_pose message; enumerations are exact or rejected."""
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise PoseCommandError(f"not valid JSON: {exc}") from exc
    if not isinstance(msg, dict) or msg.get("type") != "set_pose":
        raise PoseCommandError("expected a message with type 'set_pose'")
    angle_deg = msg.get("angle_deg")
    if angle_deg not in _ANGLE_BY_DEG:
        raise PoseCommandError(f"angle_deg must be one of {sorted(_ANGLE_BY_DEG)}")
    position = msg.get("position")
    if position not in _POSITION_BY_NAME:
        raise PoseCommandError(f"position must be one of {sorted(_POSITION_BY_NAME)}")
    grip = msg.get("grip_step")
    if not isinstance(grip, int) or isinstance(grip, bool) or not 0 <= grip <= 30:
        raise PoseCommandError("grip_step must be an integer in [0, 30]")
    mode = msg.get("mode")
    if mode not in ("direct", "masked"):
        raise PoseCommandError("mode must be 'direct' or 'masked'")
    pose = PoseState(
        angle=_ANGLE_BY_DEG[angle_deg],
        position=_POSITION_BY_NAME[position],
        grip_step=grip,
    )
    return pose, Mode(mode)


def tick_message(snapshot: TickSnapshot) -> str:
    prediction = None
    if snapshot.prediction is not None:
        prediction = {
            "angle_deg": snapshot.prediction.angle.degrees,
            "position": snapshot.prediction.position.name.lower(),
            "pattern_id": snapshot.prediction.pattern,
        }
    return json.dumps(
        {
            "type": "tick",
            "tick": snapshot.tick_index,
            "merged": np.round(snapshot.merged, 4).tolist(),
            "downsized": np.round(snapshot.downsized, 4).tolist(),
            "prediction": prediction,
            "mask": snapshot.mask.tolist() if snapshot.mask is not None else None,
            "stimulus": np.round(snapshot.stimulus, 4).tolist(),
            "contacts": [
                {
                    "x_mm": round(c.x_mm, 3),
                    "y_mm": round(c.y_mm, 3),
                    "tau_a": round(c.angles.tau_a, 5),
                    "tau_e": round(c.angles.tau_e, 5),
                    "active": c.active,
                }
                for c in snapshot.contacts
            ],
            "latency_ms": round(snapshot.total_ms, 3),
        }
    )


class SandboxEngine:
    """Runs the pipeline at 60 Hz in a thread and fans snapshots out."""

    def __init__(self, model: ModelParams, sim_config: SimConfig, tick_hz: float = TICK_HZ):
        self.model = model
        self.sim_config = sim_config
        self.tick_hz = tick_hz
        self.pose = PoseState()
        self.mode = Mode.MASKED
        self._lock = threading.Lock()
        self._subscribers: list[tuple[asyncio.Queue, asyncio.AbstractEventLoop]] = []
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._rng = np.random.Generator(np.random.PCG64(0))
        self._pipelines = {
            Mode.DIRECT: Pipeline(mode=Mode.DIRECT),
            Mode.MASKED: Pipeline(mode=Mode.MASKED, model=model),
        }

    def set_pose(self, pose: PoseState, mode: Mode) -> None:
        with self._lock:
            self.pose = pose
            self.mode = mode

    def subscribe(self, queue: asyncio.Queue, loop: asyncio.AbstractEventLoop) -> None:
        with self._lock:
            self._subscribers.append((queue, loop))

    def unsubscribe(self, queue: asyncio.Queue) -> None:
        with self._lock:
            self._subscribers = [(q, l) for q, l in self._subscribers if q is not queue]

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, name="palmpipe-ticks", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def _run(self) -> None:
        period = 1.0 / self.tick_hz
        next_tick = time.monotonic()
        frame_index = 0
        while not self._stop.is_set():
            with self._lock:
                pose, mode = self.pose, self.mode
                subscribers = list(self._subscribers)
            frame = synth_frame(
                pose.angle,
                pose.position,
                pose.grip_step,
                self._rng,
                self.sim_config,
                timestamp=frame_index / self.tick_hz,
            )
            snapshot = self._pipelines[mode].tick(frame)
            message = tick_message(snapshot)
            for queue, loop in subscribers:
                try:
                    loop.call_soon_threadsafe(_offer, queue, message)
                except RuntimeError:
                    pass  # client loop already shut down; unsubscribe races are fine
            frame_index += 1
            next_tick += period
            delay = next_tick - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_tick = time.monotonic()  # overran: resynchronize, keep going


def _offer(queue: asyncio.Queue, message: str) -> None:
    # bounded queue, drop-oldest: the UI only ever needs the latest state
    while queue.full():
        try:
            queue.get_nowait()
        except asyncio.QueueEmpty:
            break
    queue.put_nowait(message)


_FALLBACK_PAGE = """<!doctype html>
<html><head><title>palmpipe sandbox</title></head>
<body><h1>palmpipe sandbox</h1>
<p>The WebSocket endpoint is at <code>/ws</code>.  The browser UI has not
been built; run <code>npm install &amp;&amp; npm run build</code> inside
<code>frontend/</code> and restart the server.</p></body></html>
"""


def create_app(
    model: ModelParams,
    sim_config: SimConfig = SimConfig(),
    tick_hz: float = TICK_HZ,
    frontend_dir: Path | None = None,
) -> FastAPI:
    engine = SandboxEngine(model, sim_config, tick_hz)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        engine.start()
        yield
        engine.stop()

    app = FastAPI(title="palmpipe sandbox", lifespan=lifespan)
    app.state.engine = engine

    front = frontend_dir if frontend_dir is not None else FRONTEND_DIR
    index = front / "index.html"
    dist = front / "dist"
    if dist.is_dir():
        app.mount("/dist", StaticFiles(directory=str(dist)), name="dist")

    @app.get("/")
    async def root():
        if index.is_file():
            return FileResponse(str(index))
        return HTMLResponse(_FALLBACK_PAGE)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue(maxsize=4)
        engine.subscribe(queue, asyncio.get_running_loop())

        async def pump() -> None:
            while True:
                await ws.send_text(await queue.get())

        sender = asyncio.create_task(pump())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    pose, mode = parse_pose_command(raw)
                except PoseCommandError as exc:
                    await ws.send_text(json.dumps({"type": "error", "message": str(exc)}))
                    continue
                engine.set_pose(pose, mode)
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            engine.unsubscribe(queue)

    return app
