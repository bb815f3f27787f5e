import numpy as np
import pytest

from palmpipe.core_types import AngleClass, PositionClass, TactileFrame
from palmpipe.masks import mask_for
from palmpipe.pipeline import (
    Mode,
    Pipeline,
    PoseState,
    ScriptedSource,
    SinkError,
    TICK_BUDGET_MS,
    bench,
    run,
    snapshot_log_line,
)
from palmpipe.sensor_sim import SimConfig, synth_frame, with_noise

CLEAN = SimConfig(noise_sigma=0.0)


def zero_frame():
    return TactileFrame(np.zeros((10, 10)), np.zeros((10, 10)))


def test_masked_mode_requires_model():
    with pytest.raises(ValueError):
        Pipeline(mode=Mode.MASKED, model=None)


def test_zero_frame_direct_gives_zero_stimulus_and_retracted_contacts():
    pipeline = Pipeline(mode=Mode.DIRECT)
    snapshot = pipeline.tick(zero_frame())
    assert np.all(snapshot.stimulus == 0.0)
    assert snapshot.prediction is None
    assert snapshot.mask is None
    assert all(not c.active for c in snapshot.contacts)
    assert set(snapshot.stage_ms) == {"merge", "resize", "mask", "ik"}


def test_direct_mode_never_calls_the_classifier(mini_model):
    pipeline = Pipeline(mode=Mode.DIRECT, model=mini_model)
    rng = np.random.default_rng(0)
    for pid in range(6):
        frame = synth_frame(AngleClass.DEG90, PositionClass.LEFT, 20, rng, CLEAN)
        pipeline.tick(frame)
    assert pipeline.cnn_calls == 0


def test_masked_tick_predicts_and_gates(mini_model):
    pipeline = Pipeline(mode=Mode.MASKED, model=mini_model)
    rng = np.random.default_rng(1)
    frame = synth_frame(AngleClass.DEG45, PositionClass.RIGHT, 30, rng, CLEAN)
    snapshot = pipeline.tick(frame)
    assert snapshot.prediction is not None
    assert snapshot.prediction.pattern == 5
    mask = mask_for(5)
    assert np.array_equal(snapshot.mask, mask)
    assert not np.any(snapshot.stimulus[~mask] > 0)
    assert "cnn" in snapshot.stage_ms


def test_masked_support_contained_for_noisy_frames(mini_model):
    pipeline = Pipeline(mode=Mode.MASKED, model=mini_model)
    rng = np.random.default_rng(2)
    noisy = with_noise(CLEAN, 0.3)
    for trial in range(40):
        pid = trial % 12
        from palmpipe.core_types import pattern_of

        angle, position = pattern_of(pid)
        frame = synth_frame(angle, position, 10 + trial % 21, rng, noisy)
        snapshot = pipeline.tick(frame)
        assert not np.any(snapshot.stimulus[~snapshot.mask] > 0)


def test_tick_sequence_is_deterministic(mini_model):
    rng = np.random.default_rng(3)
    frames = [
        synth_frame(AngleClass.DEG135, PositionClass.LEFT, 5 + i, rng, with_noise(CLEAN, 0.2))
        for i in range(10)
    ]

    def run_once():
        pipeline = Pipeline(mode=Mode.MASKED, model=mini_model)
        outs = []
        for f in frames:
            s = pipeline.tick(f)
            outs.append((s.prediction.pattern, s.stimulus.tobytes(), s.merged.tobytes()))
        return outs

    assert run_once() == run_once()


def test_run_tick_and_drop_counts():
    pipeline = Pipeline(mode=Mode.DIRECT)
    source = ScriptedSource(CLEAN, seed=0)
    report = run(source, pipeline, duration_s=1.0)
    assert 59 <= report.ticks <= 61
    assert 50 <= report.dropped_frames <= 70  # ~60 of 120 sensor frames unused
    assert report.latency_p99_ms >= report.latency_p50_ms


def test_run_slow_source_flags_starvation():
    pipeline = Pipeline(mode=Mode.DIRECT)
    source = ScriptedSource(CLEAN, seed=0, fps=20.0)  # slower than the loop
    report = run(source, pipeline, duration_s=0.5)
    assert report.reused_frames > 0
    assert report.starved


def test_run_sink_failure_stops_with_diagnostic():
    pipeline = Pipeline(mode=Mode.DIRECT)
    source = ScriptedSource(CLEAN, seed=0)

    def broken_sink(snapshot):
        raise IOError("disk full")

    with pytest.raises(SinkError, match="disk full"):
        run(source, pipeline, duration_s=0.2, sink=broken_sink)


def test_snapshot_log_line_layout(mini_model):
    pipeline = Pipeline(mode=Mode.MASKED, model=mini_model)
    rng = np.random.default_rng(4)
    frame = synth_frame(AngleClass.DEG0, PositionClass.CENTER, 25, rng, CLEAN)
    line = snapshot_log_line(pipeline.tick(frame))
    fields = line.split()
    # tick mode pid maskbits 9 stimulus values, 3 contacts x 5 fields, total
    assert len(fields) == 4 + 9 + 15 + 1
    assert fields[1] == "masked"
    assert len(fields[3]) == 9

    direct = Pipeline(mode=Mode.DIRECT)
    dfields = snapshot_log_line(direct.tick(frame)).split()
    assert dfields[1] == "direct"
    assert dfields[2] == "-1" and dfields[3] == "-"


def test_bench_rows_per_mode(mini_model):
    direct_stages = bench(Pipeline(mode=Mode.DIRECT), 50)
    assert set(direct_stages) == {"merge", "resize", "mask", "ik", "total"}
    masked_stages = bench(Pipeline(mode=Mode.MASKED, model=mini_model), 50)
    assert set(masked_stages) == {"merge", "resize", "cnn", "mask", "ik", "total"}
    assert np.percentile(masked_stages["total"], 99) < TICK_BUDGET_MS


def test_scripted_source_walks_all_patterns():
    source = ScriptedSource(CLEAN, seed=0, seconds_per_pose=0.1)
    poses = {source.pose_at(i)[:2] for i in range(0, 12 * 12, 12)}
    assert len(poses) == 12


def test_scripted_source_pose_override():
    override = PoseState(AngleClass.DEG45, PositionClass.RIGHT, 30)
    source = ScriptedSource(CLEAN, seed=0, pose_override=override)
    angle, position, grip = source.pose_at(1234)
    assert (angle, position, grip) == (AngleClass.DEG45, PositionClass.RIGHT, 30)
