import numpy as np
import pytest
from fastapi.testclient import TestClient

from pbo.service import create_app


def _fast_session_body(**overrides):
    body = {
        "lower": [0.0, -1.0],
        "upper": [1.0, 1.0],
        "names": ["gain", "offset"],
        "budget": 7,
        "n_init": 3,
        "seed": 5,
        "swarm_size": 10,
        "max_iters": 20,
    }
    body.update(overrides)
    return body


def _wait_ready(client, sid, tries=400):
    for _ in range(tries):
        state = client.get(f"/sessions/{sid}").json()
        if state["phase"] != "computing":
            return state
    raise AssertionError("session stayed in computing phase")


def _drive_to_completion(client, sid, answer=lambda left, right: -1):
    answered = 0
    while True:
        state = _wait_ready(client, sid)
        if state["phase"] == "done":
            return state, answered
        assert state["phase"] in ("initial_queries", "iterating")
        pending = state["pending_query"]
        resp = client.post(
            f"/sessions/{sid}/answer",
            json={
                "token": pending["token"],
                "preference": answer(pending["left"], pending["right"]),
            },
        )
        assert resp.status_code == 200
        answered += 1


class TestSessionLifecycle:
    def test_create_returns_first_initial_query(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        resp = client.post("/sessions", json=_fast_session_body())
        assert resp.status_code == 201
        desc = resp.json()
        assert desc["phase"] == "initial_queries"
        assert desc["pending_query"] is not None
        assert len(desc["pending_query"]["left"]) == 2
        assert desc["queries_answered"] == 0
        assert desc["config"]["names"] == ["gain", "offset"]

    def test_default_n_init_follows_dimension_rule(self, tmp_path):
        client = TestClient(create_app(tmp_path, default_budget=10))
        resp = client.post("/sessions", json={"lower": [0.0], "upper": [1.0]})
        assert resp.status_code == 201
        assert resp.json()["config"]["n_init"] == 4

    def test_invalid_bounds_reports_offending_index(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        resp = client.post(
            "/sessions", json=_fast_session_body(lower=[0.0, 2.0], upper=[1.0, 1.0])
        )
        assert resp.status_code == 422
        assert "indexes [1]" in resp.json()["detail"]

    def test_full_loop_costs_budget_minus_one_queries(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        sid = client.post("/sessions", json=_fast_session_body()).json()["id"]
        rng = np.random.default_rng(0)
        state, answered = _drive_to_completion(
            client, sid, answer=lambda l, r: int(rng.choice([-1, 0, 1]))
        )
        assert answered == 7 - 1
        assert state["x_best"] is not None
        assert len(state["x_best"]) == 2
        assert state["pending_query"] is None

    def test_history_grows_with_iterations(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        sid = client.post("/sessions", json=_fast_session_body()).json()["id"]
        state, _ = _drive_to_completion(client, sid)
        assert len(state["history"]) == 7 - 3
        assert all("delta" in rec for rec in state["history"])

    def test_answer_validation(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        desc = client.post("/sessions", json=_fast_session_body()).json()
        sid = desc["id"]
        token = desc["pending_query"]["token"]
        resp = client.post(f"/sessions/{sid}/answer", json={"token": token, "preference": 5})
        assert resp.status_code == 422

    def test_stale_token_conflict(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        desc = client.post("/sessions", json=_fast_session_body()).json()
        sid = desc["id"]
        token = desc["pending_query"]["token"]
        first = client.post(f"/sessions/{sid}/answer", json={"token": token, "preference": -1})
        assert first.status_code == 200
        _wait_ready(client, sid)
        before = client.get(f"/sessions/{sid}").json()
        dup = client.post(f"/sessions/{sid}/answer", json={"token": token, "preference": 1})
        assert dup.status_code == 409
        after = client.get(f"/sessions/{sid}").json()
        assert after["queries_answered"] == before["queries_answered"]
        assert after["pending_query"] == before["pending_query"]

    def test_unknown_session(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        assert client.get("/sessions/does-not-exist").status_code == 404


class TestPersistence:
    def test_restart_restores_exact_pending_query(self, tmp_path):
        app1 = create_app(tmp_path)
        client1 = TestClient(app1)
        sid = client1.post("/sessions", json=_fast_session_body()).json()["id"]
        answers = [-1, 1, 0]
        for preference in answers:
            state = _wait_ready(client1, sid)
            token = state["pending_query"]["token"]
            client1.post(f"/sessions/{sid}/answer", json={"token": token, "preference": preference})
        mid_state = _wait_ready(client1, sid)

        # a fresh app over the same data dir replays the event log
        client2 = TestClient(create_app(tmp_path))
        restored = _wait_ready(client2, sid)
        assert restored["queries_answered"] == mid_state["queries_answered"]
        assert restored["phase"] == mid_state["phase"]
        assert restored["pending_query"]["token"] == mid_state["pending_query"]["token"]
        np.testing.assert_allclose(
            restored["pending_query"]["left"], mid_state["pending_query"]["left"], atol=1e-12
        )
        np.testing.assert_allclose(
            restored["pending_query"]["right"], mid_state["pending_query"]["right"], atol=1e-12
        )

    def test_restarted_session_can_finish(self, tmp_path):
        client1 = TestClient(create_app(tmp_path))
        sid = client1.post("/sessions", json=_fast_session_body()).json()["id"]
        state = _wait_ready(client1, sid)
        client1.post(
            f"/sessions/{sid}/answer",
            json={"token": state["pending_query"]["token"], "preference": -1},
        )

        client2 = TestClient(create_app(tmp_path))
        state, answered = _drive_to_completion(client2, sid)
        assert state["phase"] == "done"
        assert answered == 7 - 1 - 1

    def test_concurrent_sessions_do_not_interleave(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        sid_a = client.post("/sessions", json=_fast_session_body(seed=1)).json()["id"]
        sid_b = client.post("/sessions", json=_fast_session_body(seed=2)).json()["id"]
        state_a = _wait_ready(client, sid_a)
        state_b = _wait_ready(client, sid_b)
        client.post(
            f"/sessions/{sid_a}/answer",
            json={"token": state_a["pending_query"]["token"], "preference": -1},
        )
        after_b = client.get(f"/sessions/{sid_b}").json()
        assert after_b["queries_answered"] == state_b["queries_answered"]
        state_a2, _ = _drive_to_completion(client, sid_a)
        state_b2, _ = _drive_to_completion(client, sid_b)
        assert state_a2["x_best"] != state_b2["x_best"]
