import json

import pytest
from fastapi.testclient import TestClient

from palmpipe.sensor_sim import SimConfig
from palmpipe.server import create_app, parse_pose_command, tick_message


@pytest.fixture()
def client(mini_model):
    app = create_app(model=mini_model, sim_config=SimConfig(noise_sigma=0.0))
    with TestClient(app) as c:
        yield c


def recv_ticks(ws, n):
    """Read messages until n tick messages have arrived."""
    ticks = []
    while len(ticks) < n:
        msg = json.loads(ws.receive_text())
        if msg["type"] == "tick":
            ticks.append(msg)
    return ticks


def pose(angle=45, position="right", grip=30, mode="masked"):
    return json.dumps(
        {"type": "set_pose", "angle_deg": angle, "position": position,
         "grip_step": grip, "mode": mode}
    )


def test_pose_command_validation():
    with pytest.raises(ValueError, match="angle_deg"):
        parse_pose_command(pose(angle=30))
    with pytest.raises(ValueError, match="position"):
        parse_pose_command(pose(position="middle"))
    with pytest.raises(ValueError, match="grip_step"):
        parse_pose_command(pose(grip=31))
    with pytest.raises(ValueError, match="mode"):
        parse_pose_command(pose(mode="auto"))
    with pytest.raises(ValueError, match="JSON"):
        parse_pose_command("{nope")
    state, mode = parse_pose_command(pose())
    assert state.grip_step == 30 and mode.value == "masked"


def test_snapshot_arrives_within_two_ticks(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_text(pose(grip=10))
        ticks = recv_ticks(ws, 2)
    assert {t["type"] for t in ticks} == {"tick"}
    assert len(ticks[0]["merged"]) == 10
    assert len(ticks[0]["stimulus"]) == 3


def test_masked_pose_converges_to_pattern_five(client):
    with client.websocket_connect("/ws") as ws:
        first = recv_ticks(ws, 1)[0]  # wait for the stream, then switch pose
        ws.send_text(pose(angle=45, position="right", grip=30, mode="masked"))
        ticks = recv_ticks(ws, 6)
    predictions = [t["prediction"]["pattern_id"] for t in ticks if t["prediction"]]
    assert 5 in predictions[:5]
    hit = next(t for t in ticks if t["prediction"] and t["prediction"]["pattern_id"] == 5)
    assert hit["prediction"]["angle_deg"] == 45
    assert hit["prediction"]["position"] == "right"
    assert hit["mask"] is not None
    assert len(hit["contacts"]) == 3


def test_direct_mode_has_null_prediction_and_mask(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_text(pose(mode="direct", grip=20))
        # skip messages produced before the pose switch took effect
        ticks = recv_ticks(ws, 8)
    assert any(t["prediction"] is None and t["mask"] is None for t in ticks)
    tail = ticks[-1]
    assert tail["prediction"] is None and tail["mask"] is None


def test_invalid_message_gets_error_and_stream_continues(client):
    with client.websocket_connect("/ws") as ws:
        recv_ticks(ws, 1)
        ws.send_text(json.dumps({"type": "set_pose", "angle_deg": 12}))
        saw_error = False
        for _ in range(20):
            msg = json.loads(ws.receive_text())
            if msg["type"] == "error":
                saw_error = True
                break
        assert saw_error
        assert recv_ticks(ws, 1)  # ticks keep flowing afterwards


def test_root_serves_a_page(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "palmpipe" in response.text


def test_tick_message_round_trips_snapshot(mini_model):
    import numpy as np

    from palmpipe.pipeline import Mode, Pipeline
    from palmpipe.sensor_sim import synth_frame
    from palmpipe.core_types import AngleClass, PositionClass

    pipeline = Pipeline(mode=Mode.MASKED, model=mini_model)
    frame = synth_frame(
        AngleClass.DEG90, PositionClass.CENTER, 25,
        np.random.default_rng(0), SimConfig(noise_sigma=0.0),
    )
    msg = json.loads(tick_message(pipeline.tick(frame)))
    assert msg["type"] == "tick"
    assert msg["prediction"]["pattern_id"] == 9
    assert len(msg["merged"]) == 10 and len(msg["merged"][0]) == 10
    assert len(msg["mask"]) == 3
    assert all(len(c) == 5 for c in msg["contacts"])
    assert msg["latency_ms"] >= 0.0
