import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from palmpipe.cnn import ArchConfig, TrainConfig, train
from palmpipe.sensor_sim import SimConfig, generate_dataset, split_dataset

MINI_ARCH = ArchConfig(conv_channels=(8, 12), head_widths=(64, 32, 16))
MINI_SIM = SimConfig(reps_per_config=4)


@pytest.fixture(scope="session")
def mini_model():
    """Small classifier trained in a couple of seconds; correct on all
    noiseless frames at moderate-to-high grip.  Shared by pipeline,
    study, and server tests."""
    dataset = generate_dataset(MINI_SIM, seed=5)
    train_set, val_set, _ = split_dataset(dataset, (0.5, 0.25, 0.25), seed=5)
    params, _ = train(
        None, train_set, val_set,
        TrainConfig(epochs=8, batch_size=32, seed=5),
        arch=MINI_ARCH,
    )
    return params
