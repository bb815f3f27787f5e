"""The 60 Hz sense -> analyze -> render loop.

Each tick consumes the newest available sensor frame (stale frames are
dropped, never queued: the display wants freshness) and produces a
:class:`TickSnapshot` covering every intermediate stage plus per-stage
latencies.  Two rendering modes exist:

* ``direct``: merge -> resize -> row peak -> contacts.
* ``masked``: the raw frame is classified by the CNN, the predicted
  pattern selects a mask, and the downsized grid is gated through it
  before the peak filter.

The loop is soft real-time: a tick that overruns its 16.67 ms budget is
counted and the loop continues.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .core_types import AngleClass, PositionClass, TactileFrame, pattern_id, pattern_of
from .cnn.model import ModelParams, predict
from .cnn.train import frame_to_input
from .downsample import bicubic_resize, merge_fingers, row_peak_filter
from .kinematics import ContactCommand, DisplayMap, grid_to_contacts
from .masks import mask_for, render_masked
from .sensor_sim import SimConfig, synth_frame

TICK_HZ = 60.0
TICK_BUDGET_MS = 1000.0 / TICK_HZ  # 16.67 ms
SENSOR_HZ = 120.0


class Mode(enum.Enum):
    DIRECT = "direct"
    MASKED = "masked"


@dataclass(frozen=True)
class Prediction:
    angle: AngleClass
    position: PositionClass
    pattern: int


@dataclass(frozen=True)
class TickSnapshot:
    tick_index: int
    mode: Mode
    frame: TactileFrame
    merged: np.ndarray
    downsized: np.ndarray
    prediction: Prediction | None
    mask: np.ndarray | None
    stimulus: np.ndarray
    contacts: list[ContactCommand]
    stage_ms: dict[str, float]
    total_ms: float


class Pipeline:
    """Stateful tick executor; one instance per running mode."""

    def __init__(
        self,
        mode: Mode = Mode.DIRECT,
        model: ModelParams | None = None,
        display: DisplayMap | None = None,
        mask_ordering: str = "mask_first",
        merge_rule: str = "max",
    ) -> None:
        if mode == Mode.MASKED and model is None:
            raise ValueError("masked mode needs a trained model")
        self.mode = mode
        self.model = model
        self.display = display if display is not None else DisplayMap()
        self.mask_ordering = mask_ordering
        self.merge_rule = merge_rule
        self.tick_count = 0
        self.cnn_calls = 0  # instrumentation: must stay 0 in direct mode

    def tick(self, frame: TactileFrame) -> TickSnapshot:
        t_start = time.perf_counter()
        stage_ms: dict[str, float] = {}

        t0 = time.perf_counter()
        merged = merge_fingers(frame, self.merge_rule)
        stage_ms["merge"] = (time.perf_counter() - t0) * 1e3

        t0 = time.perf_counter()
        downsized = bicubic_resize(merged)
        stage_ms["resize"] = (time.perf_counter() - t0) * 1e3

        prediction = None
        mask = None
        if self.mode == Mode.MASKED:
            t0 = time.perf_counter()
            angle_idx, pos_idx = predict(self.model, frame_to_input(frame)[None])
            self.cnn_calls += 1
            angle = AngleClass(int(angle_idx[0]))
            position = PositionClass(int(pos_idx[0]))
            prediction = Prediction(angle, position, pattern_id(angle, position))
            stage_ms["cnn"] = (time.perf_counter() - t0) * 1e3

            t0 = time.perf_counter()
            mask = mask_for(prediction.pattern)
            stimulus = render_masked(downsized, prediction.pattern, self.mask_ordering)
            stage_ms["mask"] = (time.perf_counter() - t0) * 1e3
            if self.mask_ordering == "mask_first":
                assert not np.any(stimulus[~mask] > 0), "stimulus escaped its mask"
        else:
            t0 = time.perf_counter()
            stimulus = row_peak_filter(downsized)
            stage_ms["mask"] = (time.perf_counter() - t0) * 1e3

        t0 = time.perf_counter()
        contacts = grid_to_contacts(stimulus, self.display)
        stage_ms["ik"] = (time.perf_counter() - t0) * 1e3

        total_ms = (time.perf_counter() - t_start) * 1e3
        snapshot = TickSnapshot(
            tick_index=self.tick_count,
            mode=self.mode,
            frame=frame,
            merged=merged,
            downsized=downsized,
            prediction=prediction,
            mask=mask,
            stimulus=stimulus,
            contacts=contacts,
            stage_ms=stage_ms,
            total_ms=total_ms,
        )
        self.tick_count += 1
        return snapshot


@dataclass
class PoseState:
    """Mutable pipette pose driven by a schedule or by UI commands."""

    angle: AngleClass = AngleClass.DEG0
    position: PositionClass = PositionClass.CENTER
    grip_step: int = 0


class ScriptedSource:
    """Synthetic 120 Hz sensor: frames are generated on demand by time.

    The pose walks through all 12 patterns, one per ``seconds_per_pose``,
    with the grip ramping up and down inside each pose.  ``latest(now)``
    returns the newest frame whose sample time is <= now and counts how
    many intermediate frames were skipped (dropped).
    """

    def __init__(
        self,
        config: SimConfig = SimConfig(),
        seed: int = 0,
        fps: float = SENSOR_HZ,
        seconds_per_pose: float = 1.0,
        pose_override: PoseState | None = None,
    ) -> None:
        self.config = config
        self.fps = fps
        self.seconds_per_pose = seconds_per_pose
        self.pose_override = pose_override
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        self._last_index = -1

    def pose_at(self, frame_index: int) -> tuple[AngleClass, PositionClass, int]:
        if self.pose_override is not None:
            p = self.pose_override
            return p.angle, p.position, p.grip_step
        frames_per_pose = max(int(self.fps * self.seconds_per_pose), 1)
        pose_idx = (frame_index // frames_per_pose) % 12
        within = frame_index % frames_per_pose
        # triangle wave over the grip range inside each pose
        half = max(frames_per_pose // 2, 1)
        grip = int(round(30 * (within / half if within <= half else (frames_per_pose - within) / half)))
        angle, position = pattern_of(pose_idx)
        return angle, position, min(max(grip, 0), 30)

    def frame_at(self, frame_index: int) -> TactileFrame:
        angle, position, grip = self.pose_at(frame_index)
        return synth_frame(
            angle, position, grip, self._rng, self.config, timestamp=frame_index / self.fps
        )

    def latest(self, now_s: float) -> tuple[TactileFrame | None, int]:
        """Newest frame at or before ``now_s`` plus the count of skipped ones."""
        index = int(now_s * self.fps)
        if index <= self._last_index:
            return None, 0  # no new frame yet (source slower than the loop)
        skipped = index - self._last_index - 1
        self._last_index = index
        return self.frame_at(index), skipped


@dataclass
class RunReport:
    ticks: int
    dropped_frames: int
    reused_frames: int
    overruns: int
    starved: bool
    latency_p50_ms: float
    latency_p99_ms: float
    latency_max_ms: float

    def format(self) -> str:
        return (
            f"ticks={self.ticks} dropped_frames={self.dropped_frames} "
            f"reused_frames={self.reused_frames} overruns={self.overruns} "
            f"starved={str(self.starved).lower()}\n"
            f"latency_ms p50={self.latency_p50_ms:.3f} p99={self.latency_p99_ms:.3f} "
            f"max={self.latency_max_ms:.3f} budget={TICK_BUDGET_MS:.2f}\n"
        )


class SinkError(RuntimeError):
    """A snapshot consumer failed; the loop stops with this diagnostic."""


def run(
    source: ScriptedSource,
    pipeline: Pipeline,
    duration_s: float,
    sink=None,
    tick_hz: float = TICK_HZ,
) -> RunReport:
    """Fixed-rate loop: ``round(duration_s * tick_hz)`` ticks, wall-clock paced.

    Uses latest-value sampling against the source; a tick with no fresh
    frame reuses the previous frame and flags starvation in the report.
    """
    n_ticks = int(round(duration_s * tick_hz))
    period = 1.0 / tick_hz
    latencies = np.zeros(n_ticks)
    dropped = 0
    reused = 0
    overruns = 0
    last_frame: TactileFrame | None = None

    t_start = time.monotonic()
    for i in range(n_ticks):
        target = t_start + i * period
        delay = target - time.monotonic()
        if delay > 0:
            time.sleep(delay)
        now = time.monotonic() - t_start
        frame, skipped = source.latest(now)
        if frame is None:
            if last_frame is None:
                continue  # nothing sensed yet
            frame = last_frame
            reused += 1
        else:
            dropped += skipped
            last_frame = frame
        snapshot = pipeline.tick(frame)
        latencies[i] = snapshot.total_ms
        if snapshot.total_ms > TICK_BUDGET_MS:
            overruns += 1
        if sink is not None:
            try:
                sink(snapshot)
            except Exception as exc:
                raise SinkError(f"snapshot sink failed at tick {i}: {exc}") from exc

    done = latencies[latencies > 0]
    if len(done) == 0:
        done = np.zeros(1)
    return RunReport(
        ticks=n_ticks,
        dropped_frames=dropped,
        reused_frames=reused,
        overruns=overruns,
        starved=reused > 0,
        latency_p50_ms=float(np.percentile(done, 50)),
        latency_p99_ms=float(np.percentile(done, 99)),
        latency_max_ms=float(done.max()),
    )


SNAPSHOT_LOG_FIELDS = (
    "tick mode pattern_id mask_bits stimulus[9] "
    "contacts[3 x (x_mm y_mm tau_a tau_e active)] total_ms"
)


def snapshot_log_line(s: TickSnapshot) -> str:
    """One whitespace-separated record per tick; field order above."""
    pid = s.prediction.pattern if s.prediction is not None else -1
    mask_bits = (
        "".join("1" if v else "0" for v in s.mask.ravel()) if s.mask is not None else "-"
    )
    stim = " ".join(f"{v:.6f}" for v in s.stimulus.ravel())
    contacts = " ".join(
        f"{c.x_mm:.3f} {c.y_mm:.3f} {c.angles.tau_a:.6f} {c.angles.tau_e:.6f} "
        f"{1 if c.active else 0}"
        for c in s.contacts
    )
    return f"{s.tick_index} {s.mode.value} {pid} {mask_bits} {stim} {contacts} {s.total_ms:.3f}"


def bench(
    pipeline: Pipeline,
    n_ticks: int,
    config: SimConfig = SimConfig(),
    seed: int = 0,
) -> dict[str, np.ndarray]:
    """Back-to-back ticks over a scripted pose cycle; per-stage latencies (ms)."""
    source = ScriptedSource(config=config, seed=seed, seconds_per_pose=0.25)
    stages: dict[str, list[float]] = {}
    for i in range(n_ticks):
        snapshot = pipeline.tick(source.frame_at(i))
        for name, ms in snapshot.stage_ms.items():
            stages.setdefault(name, []).append(ms)
        stages.setdefault("total", []).append(snapshot.total_ms)
    return {name: np.asarray(vals) for name, vals in stages.items()}
