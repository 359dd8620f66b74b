"""HTTP session API: state machine, payload contracts, isolation."""

import pytest
from fastapi.testclient import TestClient

from pareto_pilot.config import parse_config
from pareto_pilot.service import create_app

FAST_RAW = {
    "loop": {"num_steps": 4, "front_particles": 200, "pref_particles": 150},
    "acquisition": {
        "p_grid_size": 41,
        "num_sims": 8,
        "num_curve_candidates": 3,
        "num_p_candidates": 5,
    },
    "user_model": {"q": 15},
}


@pytest.fixture()
def client():
    app = create_app(parse_config(FAST_RAW))
    with TestClient(app) as client:
        client.app = app
        yield client


def create_session(client, **body):
    resp = client.post("/sessions", json=body or {"seed": 0})
    assert resp.status_code == 200
    return resp.json()


class TestLifecycle:
    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"ok": True}

    def test_create_starts_awaiting_evaluation(self, client):
        created = create_session(client)
        assert created["status"] == "AwaitingEvaluation"
        assert isinstance(created["id"], str) and created["id"]

    def test_full_alternation_to_done(self, client):
        sid = create_session(client, seed=1)["id"]
        for _ in range(2):
            ev = client.post(f"/sessions/{sid}/evaluate")
            assert ev.status_code == 200
            assert ev.json()["status"] == "AwaitingChoice"
            q = client.get(f"/sessions/{sid}/query").json()
            choice = client.post(f"/sessions/{sid}/choice", json={"chosen_index": len(q["points"]) // 2})
            assert choice.status_code == 200
        assert client.get(f"/sessions/{sid}/state").json()["status"] == "Done"
        assert client.post(f"/sessions/{sid}/evaluate").status_code == 409

    def test_observation_payload(self, client):
        sid = create_session(client, seed=2)["id"]
        body = client.post(f"/sessions/{sid}/evaluate").json()
        obs = body["observation"]
        assert 0.0 <= obs["p"] <= 1.0
        assert 0.01 <= obs["epsilon"] <= 0.5
        assert "ess" in body["front_summary"]


class TestStateMachine:
    def test_choice_while_awaiting_evaluation_conflicts(self, client):
        sid = create_session(client)["id"]
        resp = client.post(f"/sessions/{sid}/choice", json={"chosen_index": 0})
        assert resp.status_code == 409

    def test_query_requires_pending_choice(self, client):
        sid = create_session(client)["id"]
        assert client.get(f"/sessions/{sid}/query").status_code == 409

    def test_out_of_range_choice_is_400(self, client):
        sid = create_session(client)["id"]
        client.post(f"/sessions/{sid}/evaluate")
        resp = client.post(f"/sessions/{sid}/choice", json={"chosen_index": 15})
        assert resp.status_code == 400
        resp = client.post(f"/sessions/{sid}/choice", json={"chosen_index": -1})
        assert resp.status_code == 400

    def test_malformed_body_is_400(self, client):
        sid = create_session(client)["id"]
        client.post(f"/sessions/{sid}/evaluate")
        resp = client.post(f"/sessions/{sid}/choice", json={"wrong_key": 1})
        assert resp.status_code == 400
        resp = client.post(
            f"/sessions/{sid}/choice",
            content=b"not json",
            headers={"content-type": "application/json"},
        )
        assert resp.status_code == 400

    def test_unknown_session_is_404(self, client):
        assert client.get("/sessions/nope/state").status_code == 404
        assert client.post("/sessions/nope/evaluate").status_code == 404


class TestPayloadContracts:
    def test_query_has_q_points_and_curve(self, client):
        sid = create_session(client, seed=3)["id"]
        client.post(f"/sessions/{sid}/evaluate")
        q = client.get(f"/sessions/{sid}/query").json()
        assert len(q["points"]) == 15
        assert set(q["curve"]) == {"kind", "L", "k", "b", "c"}
        ps = [pt["p"] for pt in q["points"]]
        assert ps == sorted(ps)

    def test_query_stable_across_reads(self, client):
        sid = create_session(client, seed=4)["id"]
        client.post(f"/sessions/{sid}/evaluate")
        a = client.get(f"/sessions/{sid}/query").json()
        b = client.get(f"/sessions/{sid}/query").json()
        assert a == b

    def test_choice_conditions_on_served_points_exactly(self, client):
        sid = create_session(client, seed=5)["id"]
        client.post(f"/sessions/{sid}/evaluate")
        served = client.get(f"/sessions/{sid}/query").json()["points"]
        client.post(f"/sessions/{sid}/choice", json={"chosen_index": 7})
        session = client.app.state.sessions[sid]
        record = session.state.choice_history[0]
        assert record.chosen_index == 7
        for pt, raw in zip(record.query.points, served):
            assert pt.p == raw["p"]  # bit-identical round trip
            assert pt.alpha == raw["alpha"]

    def test_choice_moves_preference_mean(self, client):
        sid = create_session(client, seed=6)["id"]
        before = client.get(f"/sessions/{sid}/state").json()["mean_w"]
        client.post(f"/sessions/{sid}/evaluate")
        q = client.get(f"/sessions/{sid}/query").json()
        resp = client.post(f"/sessions/{sid}/choice", json={"chosen_index": len(q["points"]) - 1})
        after = resp.json()["pref_summary"]["mean_w"]
        assert abs(after[0] - before[0]) > 1e-6
        assert after[0] + after[1] == pytest.approx(1.0, abs=1e-9)

    def test_state_payload_shape(self, client):
        sid = create_session(client, seed=7)["id"]
        client.post(f"/sessions/{sid}/evaluate")
        state = client.get(f"/sessions/{sid}/state").json()
        assert state["step"] == 1
        assert len(state["obs_history"]) == 1
        assert state["choice_count"] == 0
        assert len(state["posterior_mean_curve"]["mean"]) == len(
            state["posterior_mean_curve"]["p_grid"]
        )
        assert len(state["credible_band"]["lower"]) == len(
            state["posterior_mean_curve"]["mean"]
        )
        assert 0.01 <= state["p_star_denormalized"] <= 0.5
        # live mode: no fabricated truth metrics
        for entry in state["metric_trace"]:
            assert "regret" not in entry and "pref_error" not in entry

    def test_sessions_are_isolated(self, client):
        a = create_session(client, seed=8)["id"]
        b = create_session(client, seed=9)["id"]
        client.post(f"/sessions/{a}/evaluate")
        state_a = client.get(f"/sessions/{a}/state").json()
        state_b = client.get(f"/sessions/{b}/state").json()
        assert state_a["step"] == 1 and state_b["step"] == 0

    def test_config_overrides_apply(self, client):
        body = {"seed": 10, "user_model": {"q": 7}}
        sid = create_session(client, **body)["id"]
        client.post(f"/sessions/{sid}/evaluate")
        q = client.get(f"/sessions/{sid}/query").json()
        assert len(q["points"]) == 7

    def test_bad_override_rejected(self, client):
        resp = client.post("/sessions", json={"user_model": {"T": -1}})
        assert resp.status_code == 400


def test_snapshot_persistence(tmp_path):
    app = create_app(parse_config(FAST_RAW), snapshot_dir=str(tmp_path))
    with TestClient(app) as client:
        sid = client.post("/sessions", json={"seed": 0}).json()["id"]
        client.post(f"/sessions/{sid}/evaluate")
    files = list(tmp_path.glob("session_*.json"))
    assert len(files) == 1
    assert sid in files[0].name
