import json
import random

import pytest
from websockets.sync.client import connect as ws_connect

from flatpack.env import EpisodeConfig, make
from flatpack.record import replay_check, state_digest
from flatpack.server import FlatpackService, ServerThread

NULL = [0.0] * 15


class Client:
    """Minimal synchronous protocol client for tests."""

    def __init__(self, ws):
        self.ws = ws
        self.rid = 0

    def rpc(self, mtype, **payload):
        self.rid += 1
        self.ws.send(json.dumps({"type": mtype, "rid": self.rid, **payload}))
        reply = json.loads(self.ws.recv())
        assert reply["rid"] == self.rid
        return reply

    def ok(self, mtype, **payload):
        reply = self.rpc(mtype, **payload)
        assert reply["type"] == "result", reply
        return reply["data"]


@pytest.fixture(scope="module")
def server():
    with ServerThread(port=0) as srv:
        yield srv


@pytest.fixture
def client(server):
    with ws_connect(f"ws://127.0.0.1:{server.port}", open_timeout=10) as ws:
        yield Client(ws)


class TestProtocolBasics:
    def test_hello(self, client):
        data = client.ok("hello")
        assert data["protocol"] == 1
        assert data["engine"].startswith("flatpack ")

    def test_list_models(self, client):
        data = client.ok("list_models")
        names = [m["name"] for m in data["models"]]
        assert "block" in names and names == sorted(names)

    def test_make_returns_session_and_model(self, client):
        data = client.ok("make", config={"model": "block"})
        assert data["session_id"]
        assert len(data["model"]["parts"]) == 2

    def test_make_unknown_model(self, client):
        reply = client.rpc("make", config={"model": "bogus"})
        assert reply["type"] == "error" and reply["code"] == "unknown_model"

    def test_make_invalid_config(self, client):
        reply = client.rpc("make", config={"model": "block", "max_steps": 0})
        assert reply["type"] == "error" and reply["code"] == "invalid_config"

    def test_step_before_reset(self, client):
        sid = client.ok("make", config={"model": "block"})["session_id"]
        reply = client.rpc("step", session=sid, action=NULL)
        assert reply["code"] == "not_reset"

    def test_unknown_session(self, client):
        reply = client.rpc("reset", session="nope", seed=0)
        assert reply["code"] == "unknown_session"

    def test_bad_action(self, client):
        sid = client.ok("make", config={"model": "block"})["session_id"]
        client.ok("reset", session=sid, seed=0)
        reply = client.rpc("step", session=sid, action=[1, 2])
        assert reply["code"] == "bad_action"

    def test_unknown_type(self, client):
        assert client.rpc("warp")["code"] == "unknown_type"

    def test_close_session(self, client):
        sid = client.ok("make", config={"model": "block"})["session_id"]
        client.ok("close", session=sid)
        assert client.rpc("observe", session=sid)["code"] == "unknown_session"


class TestFullCycleMatchesInProcess:
    def test_wire_digests_equal_in_process(self, client, tmp_path):
        seed = 17
        actions = []
        rng = random.Random(3)
        for _ in range(25):
            actions.append([rng.uniform(-1, 1) for _ in range(15)])

        sid = client.ok("make", config={"model": "block"})["session_id"]
        client.ok("reset", session=sid, seed=seed)
        path = str(tmp_path / "wire.traj.jsonl")
        client.ok("record_start", session=sid, path=path)
        wire_rewards = []
        for a in actions:
            data = client.ok("step", session=sid, action=a)
            wire_rewards.append(data["reward"])
        stopped = client.ok("record_stop", session=sid)
        assert stopped["steps"] == len(actions)

        env = make(EpisodeConfig(model="block"))
        env.reset(seed)
        local_digests = []
        local_rewards = []
        for a in actions:
            r = env.step(a)
            local_digests.append(state_digest(env.state))
            local_rewards.append(r.reward)

        recorded = [json.loads(line) for line in open(path).read().splitlines()[1:]]
        assert [r["digest"] for r in recorded] == local_digests
        assert wire_rewards == local_rewards
        assert replay_check(path).ok

    def test_observation_on_wire_matches_local(self, client):
        sid = client.ok("make", config={"model": "shelf_simple"})["session_id"]
        wire_obs = client.ok("reset", session=sid, seed=5)["obs"]
        env = make(EpisodeConfig(model="shelf_simple"))
        local_obs = env.reset(5).to_dict()
        assert wire_obs == local_obs


class TestRecordingLifecycle:
    def test_record_before_reset_rejected(self, client, tmp_path):
        sid = client.ok("make", config={"model": "block"})["session_id"]
        reply = client.rpc("record_start", session=sid, path=str(tmp_path / "x.traj.jsonl"))
        assert reply["code"] == "not_reset"

    def test_mid_episode_record_start_captures_from_reset(self, client, tmp_path):
        sid = client.ok("make", config={"model": "block"})["session_id"]
        client.ok("reset", session=sid, seed=2)
        for _ in range(5):
            client.ok("step", session=sid, action=NULL)
        path = str(tmp_path / "buffered.traj.jsonl")
        data = client.ok("record_start", session=sid, path=path)
        assert data["buffered"] == 5
        client.ok("step", session=sid, action=NULL)
        stopped = client.ok("record_stop", session=sid)
        assert stopped["steps"] == 6
        assert replay_check(path).ok

    def test_double_start_rejected(self, client, tmp_path):
        sid = client.ok("make", config={"model": "block"})["session_id"]
        client.ok("reset", session=sid, seed=0)
        client.ok("record_start", session=sid, path=str(tmp_path / "a.traj.jsonl"))
        reply = client.rpc("record_start", session=sid, path=str(tmp_path / "b.traj.jsonl"))
        assert reply["code"] == "io_error"
        client.ok("record_stop", session=sid)

    def test_stop_without_start_is_benign(self, client):
        sid = client.ok("make", config={"model": "block"})["session_id"]
        client.ok("reset", session=sid, seed=0)
        data = client.ok("record_stop", session=sid)
        assert data == {"recording": False, "path": None, "steps": 0}

    def test_reset_finalizes_recording(self, client, tmp_path):
        sid = client.ok("make", config={"model": "block"})["session_id"]
        client.ok("reset", session=sid, seed=2)
        path = str(tmp_path / "cut.traj.jsonl")
        client.ok("record_start", session=sid, path=path)
        client.ok("step", session=sid, action=NULL)
        client.ok("reset", session=sid, seed=3)  # ends the recording
        data = client.ok("record_stop", session=sid)
        assert data["steps"] == 0 and data["path"] is None
        assert replay_check(path).ok

    def test_unwritable_record_path(self, client, tmp_path):
        sid = client.ok("make", config={"model": "block"})["session_id"]
        client.ok("reset", session=sid, seed=0)
        reply = client.rpc("record_start", session=sid, path=str(tmp_path / "no" / "x.jsonl"))
        assert reply["code"] == "io_error"


class TestIsolationAndRobustness:
    def test_two_connections_are_isolated(self, server):
        with ws_connect(f"ws://127.0.0.1:{server.port}") as ws1, ws_connect(
            f"ws://127.0.0.1:{server.port}"
        ) as ws2:
            c1, c2 = Client(ws1), Client(ws2)
            s1 = c1.ok("make", config={"model": "block"})["session_id"]
            s2 = c2.ok("make", config={"model": "block"})["session_id"]
            c1.ok("reset", session=s1, seed=1)
            c2.ok("reset", session=s2, seed=1)
            base2 = c2.ok("observe", session=s2)["obs"]
            for _ in range(10):
                c1.ok("step", session=s1, action=[1.0] * 15)
            # Session 2 unchanged by session 1 traffic.
            assert c2.ok("observe", session=s2)["obs"] == base2

    def test_fuzzing_never_crashes(self, server):
        rng = random.Random(99)
        with ws_connect(f"ws://127.0.0.1:{server.port}") as ws:
            for _ in range(200):
                kind = rng.randrange(4)
                if kind == 0:
                    payload = "".join(chr(rng.randrange(32, 127)) for _ in range(rng.randrange(40)))
                elif kind == 1:
                    payload = json.dumps({"type": rng.choice(["step", "reset", "", "x"]) ,
                                          "rid": rng.choice([None, "x", 1.5, 3])})
                elif kind == 2:
                    payload = json.dumps(rng.choice([[], 42, "hi", None]))
                else:
                    payload = json.dumps({"type": "step", "rid": 1, "session": "ghost",
                                          "action": rng.choice([None, "x", [1] * 99])})
                ws.send(payload)
                reply = json.loads(ws.recv())
                assert reply["type"] in ("result", "error")
            # The connection still works afterwards.
            c = Client(ws)
            assert c.ok("hello")["protocol"] == 1

    def test_binary_frame_rejected(self, server):
        with ws_connect(f"ws://127.0.0.1:{server.port}") as ws:
            ws.send(b"\x00\x01\x02")
            reply = json.loads(ws.recv())
            assert reply["type"] == "error" and reply["code"] == "bad_json"

    def test_http_get_on_ws_port(self, server):
        import urllib.request

        with urllib.request.urlopen(f"http://127.0.0.1:{server.port}/", timeout=5) as resp:
            assert resp.status == 200
            assert b"flatpack" in resp.read()


class TestServiceUnit:
    def test_reply_rid_echo(self):
        svc = FlatpackService()
        reply = svc.handle_text(json.dumps({"type": "hello", "rid": 77}))
        assert reply["rid"] == 77

    def test_missing_rid(self):
        svc = FlatpackService()
        reply = svc.handle_text(json.dumps({"type": "hello"}))
        assert reply["type"] == "error" and reply["code"] == "bad_json"

    def test_idle_eviction(self):
        svc = FlatpackService(idle_timeout=0.0)
        reply = svc.handle_text(json.dumps({"type": "make", "rid": 1, "config": {"model": "block"}}))
        sid = reply["data"]["session_id"]
        assert svc.evict_idle() == [sid]
        assert svc.sessions == {}

    def test_sessions_survive_when_active(self):
        svc = FlatpackService(idle_timeout=3600.0)
        reply = svc.handle_text(json.dumps({"type": "make", "rid": 1, "config": {"model": "block"}}))
        assert svc.evict_idle() == []
        assert len(svc.sessions) == 1
