import json

import pytest

from conftest import make_state, yaw_pose
from flatpack._version import ENGINE
from flatpack.env import EpisodeConfig, make
from flatpack.oracle import OracleProgress, oracle_step, plan
from flatpack.record import (
    ReplayReport,
    TrajectoryError,
    read_trajectory,
    record_episode,
    replay_check,
    state_digest,
)
from flatpack.rng import CounterRng


def oracle_policy(env):
    state = {}

    def policy(obs):
        if "plan" not in state:
            state["plan"] = plan(env.model, [p.id for p in obs.parts])
            state["progress"] = OracleProgress.for_env(env)
        return oracle_step(obs, state["plan"], state["progress"])

    return policy


def random_policy(seed):
    rng = CounterRng(seed ^ 0xABCD)

    def policy(_obs):
        return [rng.uniform(-1, 1) for _ in range(15)]

    return policy


class TestStateDigest:
    def test_same_state_equal_digest(self, block_model):
        s = make_state({"block_a": yaw_pose(0.1, 0.2, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        d = state_digest(s)
        assert d == state_digest(s)
        assert len(d) == 64
        int(d, 16)  # hex

    def test_micrometer_change_differs(self, block_model):
        s1 = make_state({"block_a": yaw_pose(0.1, 0.2, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        s2 = make_state({"block_a": yaw_pose(0.1 + 1e-6, 0.2, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        assert state_digest(s1) != state_digest(s2)

    def test_below_quantum_equal(self, block_model):
        s1 = make_state({"block_a": yaw_pose(0.1, 0.2, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        s2 = make_state(
            {"block_a": yaw_pose(0.1 + 1e-12, 0.2, 0.05), "block_b": yaw_pose(1, 1, 0.05)}
        )
        assert state_digest(s1) == state_digest(s2)

    def test_weld_and_pairs_participate(self, block_model):
        s1 = make_state({"block_a": yaw_pose(0, 0, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        s2 = make_state({"block_a": yaw_pose(0, 0, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        s2.weld.union("block_a", "block_b")
        assert state_digest(s1) != state_digest(s2)
        s3 = make_state({"block_a": yaw_pose(0, 0, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        s3.connected_pairs.add("block_a.top|block_b.bottom")
        assert state_digest(s1) != state_digest(s3)

    def test_cursor_state_participates(self, block_model):
        s1 = make_state({"block_a": yaw_pose(0, 0, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        s2 = make_state({"block_a": yaw_pose(0, 0, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        s2.cursors[0].held = "block_a"
        assert state_digest(s1) != state_digest(s2)

    def test_insertion_order_independent(self, block_model):
        a = make_state({"block_a": yaw_pose(0, 0, 0.05), "block_b": yaw_pose(1, 1, 0.05)})
        b = make_state({"block_b": yaw_pose(1, 1, 0.05), "block_a": yaw_pose(0, 0, 0.05)})
        assert state_digest(a) == state_digest(b)


class TestRecordEpisode:
    def test_oracle_block_recording(self, tmp_path):
        env = make(EpisodeConfig(model="block", max_steps=300))
        path = str(tmp_path / "ep.traj.jsonl")
        steps = record_episode(env, oracle_policy(env), path, seed=0)
        header, records = read_trajectory(path)
        assert header["model"] == "block"
        assert header["seed"] == 0
        assert header["engine"] == ENGINE
        assert len(records) == steps > 0
        assert records[-1]["done"] is True
        assert all(len(r["digest"]) == 64 for r in records)

    def test_zero_step_episode_header_only(self, tmp_path):
        env = make(EpisodeConfig(model="block"))
        path = str(tmp_path / "empty.traj.jsonl")
        steps = record_episode(env, iter([]), path, seed=1)
        assert steps == 0
        header, records = read_trajectory(path)
        assert records == []
        assert header["config"]["model"] == "block"

    def test_unwritable_path(self, tmp_path):
        env = make(EpisodeConfig(model="block"))
        with pytest.raises(OSError):
            record_episode(env, iter([]), str(tmp_path / "nodir" / "x.traj.jsonl"), seed=0)

    def test_action_iterable_policy(self, tmp_path):
        env = make(EpisodeConfig(model="block", max_steps=10))
        path = str(tmp_path / "3steps.traj.jsonl")
        steps = record_episode(env, [[0.0] * 15] * 3, path, seed=0)
        assert steps == 3

    def test_include_obs(self, tmp_path):
        env = make(EpisodeConfig(model="block", max_steps=5))
        path = str(tmp_path / "obs.traj.jsonl")
        record_episode(env, [[0.0] * 15] * 2, path, seed=0, include_obs=True)
        _, records = read_trajectory(path)
        assert all("obs" in r and r["obs"]["parts"] for r in records)


class TestReplayCheck:
    def test_fresh_recording_replays_ok(self, tmp_path):
        env = make(EpisodeConfig(model="block", max_steps=300))
        path = str(tmp_path / "ok.traj.jsonl")
        record_episode(env, oracle_policy(env), path, seed=3)
        report = replay_check(path)
        assert report == ReplayReport(ok=True)

    def test_random_policy_replays_ok(self, tmp_path):
        env = make(EpisodeConfig(model="shelf_simple", max_steps=40))
        path = str(tmp_path / "rand.traj.jsonl")
        record_episode(env, random_policy(9), path, seed=9)
        assert replay_check(path).ok

    def test_flipped_digest_byte_detected(self, tmp_path):
        env = make(EpisodeConfig(model="block", max_steps=300))
        path = str(tmp_path / "flip.traj.jsonl")
        record_episode(env, oracle_policy(env), path, seed=3)
        lines = open(path).read().splitlines()
        target = 5
        rec = json.loads(lines[1 + target])
        d = rec["digest"]
        rec["digest"] = ("0" if d[0] != "0" else "1") + d[1:]
        lines[1 + target] = json.dumps(rec, sort_keys=True, separators=(",", ":"))
        open(path, "w").write("\n".join(lines) + "\n")
        report = replay_check(path)
        assert report.ok is False
        assert report.divergence == target

    def test_action_mutation_detected(self, tmp_path):
        env = make(EpisodeConfig(model="block", max_steps=300))
        path = str(tmp_path / "mut.traj.jsonl")
        record_episode(env, oracle_policy(env), path, seed=4)
        lines = open(path).read().splitlines()
        target = 2
        rec = json.loads(lines[1 + target])
        # Sign-flip the largest action component: a single-bit mutation of
        # the encoded float.
        idx = max(range(15), key=lambda i: abs(rec["action"][i]))
        rec["action"][idx] = -rec["action"][idx]
        lines[1 + target] = json.dumps(rec, sort_keys=True, separators=(",", ":"))
        open(path, "w").write("\n".join(lines) + "\n")
        report = replay_check(path)
        assert report.ok is False
        assert report.divergence == target

    def test_engine_mismatch_warns_but_replays(self, tmp_path):
        env = make(EpisodeConfig(model="block", max_steps=20))
        path = str(tmp_path / "old.traj.jsonl")
        record_episode(env, [[0.0] * 15] * 2, path, seed=0)
        lines = open(path).read().splitlines()
        header = json.loads(lines[0])
        header["engine"] = "flatpack 0.0.1"
        lines[0] = json.dumps(header, sort_keys=True, separators=(",", ":"))
        open(path, "w").write("\n".join(lines) + "\n")
        report = replay_check(path)
        assert report.ok is True
        assert report.warnings and "0.0.1" in report.warnings[0]

    def test_version_mismatch_rejected(self, tmp_path):
        env = make(EpisodeConfig(model="block", max_steps=20))
        path = str(tmp_path / "v9.traj.jsonl")
        record_episode(env, [[0.0] * 15] * 1, path, seed=0)
        lines = open(path).read().splitlines()
        header = json.loads(lines[0])
        header["version"] = 9
        lines[0] = json.dumps(header)
        open(path, "w").write("\n".join(lines) + "\n")
        with pytest.raises(TrajectoryError):
            replay_check(path)

    def test_truncated_json_line(self, tmp_path):
        env = make(EpisodeConfig(model="block", max_steps=20))
        path = str(tmp_path / "trunc.traj.jsonl")
        record_episode(env, [[0.0] * 15] * 2, path, seed=0)
        raw = open(path).read()
        open(path, "w").write(raw[:-20])
        with pytest.raises(TrajectoryError):
            replay_check(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "void.traj.jsonl"
        path.write_text("")
        with pytest.raises(TrajectoryError):
            replay_check(str(path))

    def test_all_models_seeds_policies_roundtrip(self, tmp_path):
        for model in ("block", "table_simple", "shelf_simple"):
            for seed in range(2):
                for kind in ("oracle", "random"):
                    env = make(EpisodeConfig(model=model, max_steps=60 if kind == "random" else 1500))
                    path = str(tmp_path / f"{model}_{seed}_{kind}.traj.jsonl")
                    policy = oracle_policy(env) if kind == "oracle" else random_policy(seed)
                    record_episode(env, policy, path, seed=seed)
                    assert replay_check(path).ok, (model, seed, kind)
