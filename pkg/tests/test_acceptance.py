"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The slowest item is
the full-dataset training (shared session fixture, a few minutes at most
on desk hardware).
"""
import copy
import math
import time

import numpy as np
import pytest

from helpers import (
    bicubic_oracle,
    finite_difference_gradients,
    gradient_relative_errors,
)
from palmpipe.cli import main as cli_main
from palmpipe.cnn import TrainConfig, evaluate, init_model, train
from palmpipe.cnn.model import ArchConfig, loss_and_gradients
from palmpipe.downsample import bicubic_resize_raw
from palmpipe.eval import (
    REFERENCE_CONFUSION_DIRECT,
    REFERENCE_CONFUSION_MASKED,
    machine_observer_study,
    overall_rate,
)
from palmpipe.kinematics import (
    LinkageGeometry,
    OutOfWorkspaceError,
    SingularConfigurationError,
    forward_kinematics,
    inverse_kinematics,
)
from palmpipe.masks import MASK_TABLE, mask_for, render_masked
from palmpipe.pipeline import Mode, Pipeline, TICK_BUDGET_MS, bench
from palmpipe.sensor_sim import SimConfig, generate_dataset, split_dataset

TRAIN_EPOCHS = 8  # <= 50 permitted; the synthetic set converges far earlier


def report(name: str, detail: str) -> None:
    print(f"\nACCEPTANCE {name}: PASS  [{detail}]")


@pytest.fixture(scope="module")
def trained():
    """Default 13392-sample dataset, 50/25/25 split, full training run."""
    t0 = time.perf_counter()
    dataset = generate_dataset(SimConfig(), seed=0)
    assert len(dataset) == 13392
    train_set, val_set, test_set = split_dataset(dataset, (0.5, 0.25, 0.25), seed=1)
    assert (len(train_set), len(val_set), len(test_set)) == (6696, 3348, 3348)
    params, history = train(None, train_set, val_set, TrainConfig(epochs=TRAIN_EPOCHS, seed=0))
    result = evaluate(params, test_set)
    return {
        "params": params,
        "history": history,
        "test_report": result,
        "seconds": time.perf_counter() - t0,
    }


def test_metric_arithmetic():
    masked = overall_rate(REFERENCE_CONFUSION_MASKED, normalized=True)
    direct = overall_rate(REFERENCE_CONFUSION_DIRECT, normalized=True)
    assert masked == pytest.approx(0.825, abs=5e-4)
    assert direct == pytest.approx(0.0967, abs=5e-4)
    report("metric-arithmetic", f"masked {masked:.4f}, direct {direct:.4f}")


def test_cnn_training_accuracy(trained):
    result = trained["test_report"]
    assert result.angle_accuracy >= 0.90
    assert result.pos_accuracy >= 0.90
    assert trained["seconds"] < 600.0
    report(
        "cnn-training",
        f"angle {result.angle_accuracy:.4f}, position {result.pos_accuracy:.4f}, "
        f"{TRAIN_EPOCHS} epochs in {trained['seconds']:.0f}s",
    )


def test_gradient_correctness():
    arch = ArchConfig(in_channels=2, grid=4, conv_channels=(3, 4), head_widths=(8, 6, 5))
    params = init_model(arch, seed=1)
    rng = np.random.default_rng(7)
    x = rng.uniform(0.0, 1.0, (3, 2, 4, 4))
    ya = rng.integers(0, 4, 3)
    yp = rng.integers(0, 3, 3)
    _, grads = loss_and_gradients(params, x, ya, yp, train=True)
    fd = finite_difference_gradients(copy.deepcopy(params), x, ya, yp)
    errors = gradient_relative_errors(grads, fd)
    worst_layer = max(errors, key=errors.get)
    n_params = sum(arr.size for _, arr in params.trainable())
    assert errors[worst_layer] < 1e-4
    report(
        "gradient-correctness",
        f"{n_params} parameters, worst rel err {errors[worst_layer]:.2e} in {worst_layer}",
    )


def test_resampling_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(120):
        grid = rng.uniform(0.0, 9.0, (10, 10))
        worst = max(worst, np.abs(bicubic_resize_raw(grid) - bicubic_oracle(grid)).max())
    assert worst < 1e-9
    const_err = 0.0
    for c in (0.0, 0.37, 4.5, 9.0):
        const_err = max(const_err, np.abs(bicubic_resize_raw(np.full((10, 10), c)) - c).max())
    assert const_err < 1e-12
    report("resampling-oracle", f"120 grids, worst {worst:.2e}; constants {const_err:.2e}")


def test_kinematics_roundtrip():
    geometry = LinkageGeometry()
    rng = np.random.default_rng(0)
    worst = 0.0
    per_branch = {}
    for branch in ((1, -1), (-1, 1)):
        count = 0
        while count < 1000:
            x = rng.uniform(-20.0, 60.0)
            y = rng.uniform(1.0, 64.0)
            try:
                angles = inverse_kinematics(x, y, geometry, branch)
            except (OutOfWorkspaceError, SingularConfigurationError):
                continue
            fx, fy = forward_kinematics(angles, geometry)
            worst = max(worst, math.hypot(fx - x, fy - y))
            count += 1
        per_branch[branch] = count
    assert worst < 1e-9
    for x, y in ((0.0, geometry.l2 + geometry.l3 + 10.0), (500.0, 5.0)):
        with pytest.raises(OutOfWorkspaceError):
            inverse_kinematics(x, y, geometry)
    report("kinematics-roundtrip", f"2x1000 targets, worst {worst:.2e} mm; unreachable rejected")


def test_mask_properties():
    assert len({tuple(m.ravel()) for m in MASK_TABLE}) == 12
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        pid = int(rng.integers(0, 12))
        grid = rng.uniform(0.0, 1.0, (3, 3))
        out = render_masked(grid, pid, "mask_first")
        assert not np.any(out[~mask_for(pid)] > 0)
    report("mask-properties", "12 distinct masks; support containment on 10000 random grids")


def test_directional_study(trained):
    params = trained["params"]
    trials = 500
    masked0 = machine_observer_study(params, Mode.MASKED, 0.0, trials, seed=100)
    direct0 = machine_observer_study(None, Mode.DIRECT, 0.0, trials, seed=100)
    assert masked0.overall >= 0.99
    assert masked0.overall > direct0.overall
    masked3 = machine_observer_study(params, Mode.MASKED, 0.3, trials, seed=200)
    direct3 = machine_observer_study(None, Mode.DIRECT, 0.3, trials, seed=200)
    assert masked3.overall - direct3.overall >= 0.20
    report(
        "directional-study",
        f"zero noise {masked0.overall:.4f} vs {direct0.overall:.4f}; "
        f"0.3 N noise {masked3.overall:.4f} vs {direct3.overall:.4f} "
        f"(gap {masked3.overall - direct3.overall:.3f}, {trials} trials/pattern)",
    )


def test_timing_budget(trained):
    pipeline = Pipeline(mode=Mode.MASKED, model=trained["params"])
    stages = bench(pipeline, 3000)
    p99 = float(np.percentile(stages["total"], 99))
    assert p99 <= TICK_BUDGET_MS
    report(
        "timing-budget",
        f"3000 masked ticks, p99 {p99:.3f} ms <= {TICK_BUDGET_MS:.2f} ms",
    )


def test_reproducibility(tmp_path, capsys):
    a, b = tmp_path / "a.ds", tmp_path / "b.ds"
    assert cli_main(["gen", "--out", str(a), "--n-reps", "2", "--seed", "17"]) == 0
    assert cli_main(["gen", "--out", str(b), "--n-reps", "2", "--seed", "17"]) == 0
    assert a.read_bytes() == b.read_bytes()

    def train_accuracies(tag):
        assert (
            cli_main(
                ["train", "--data", str(a), "--epochs", "2", "--seed", "3",
                 "--out", str(tmp_path / f"{tag}.ckpt"), "--batch-size", "32"]
            )
            == 0
        )
        out = capsys.readouterr().out
        return [line for line in out.splitlines() if "test accuracy" in line]

    first = train_accuracies("first")
    second = train_accuracies("second")
    assert first == second and first
    ck1 = (tmp_path / "first.ckpt").read_bytes()
    ck2 = (tmp_path / "second.ckpt").read_bytes()
    assert ck1 == ck2
    report(
        "reproducibility",
        f"dataset files identical ({a.stat().st_size} bytes); "
        f"train accuracies identical: {first[0].strip()}",
    )
