import pytest

from flatpack.agents import decode_action
from flatpack.env import EpisodeConfig, make
from flatpack.model import load_bundled
from flatpack.oracle import (
    DisconnectedSubsetError,
    OracleError,
    OracleProgress,
    oracle_step,
    plan,
    run_oracle,
)


class TestPlan:
    def test_block_single_pair(self, block_model):
        pl = plan(block_model, ["block_a", "block_b"])
        assert len(pl.steps) == 1
        assert pl.base_part == "block_a"
        assert pl.steps[0].moving_part == "block_b"

    def test_table_board_is_base(self, table_model):
        pl = plan(table_model, [p.id for p in table_model.parts])
        assert pl.base_part == "board"
        assert len(pl.steps) == 4
        assert all(s.target_part == "board" for s in pl.steps)
        assert [s.moving_part for s in pl.steps] == ["leg1", "leg2", "leg3", "leg4"]

    def test_single_part_empty_plan(self, block_model):
        pl = plan(block_model, ["block_a"])
        assert len(pl.steps) == 0

    def test_empty_spawn(self, block_model):
        assert len(plan(block_model, []).steps) == 0

    def test_disconnected_subset(self, table_model):
        with pytest.raises(DisconnectedSubsetError) as exc:
            plan(table_model, ["leg1", "leg2"])
        assert "leg2" in str(exc.value)

    def test_shelf_traversal_order(self):
        m = load_bundled("shelf_simple")
        pl = plan(m, [p.id for p in m.parts])
        assert pl.base_part == "back"
        assert [s.moving_part for s in pl.steps] == ["shelf_high", "shelf_low", "shelf_mid"]


class TestOracleStep:
    def test_connect_when_attachable(self):
        env = make(EpisodeConfig(model="block"))
        obs = env.reset(0)
        pl = plan(env.model, [p.id for p in obs.parts])
        progress = OracleProgress.for_env(env)
        # Drive until the pair reports attachable, then expect connect.
        for _ in range(300):
            action = oracle_step(obs, pl, progress)
            if obs.attachable:
                assert action[14] == 1.0
                break
            assert action[14] == 0.0
            obs = env.step(action).observation
        else:
            pytest.fail("never became attachable")

    def test_grasp_phase_moves_toward_part(self):
        env = make(EpisodeConfig(model="block"))
        obs = env.reset(1)
        pl = plan(env.model, [p.id for p in obs.parts])
        progress = OracleProgress.for_env(env)
        action = oracle_step(obs, pl, progress)
        moving = obs.part(pl.steps[0].moving_part)
        cursor = obs.cursors[1]
        err = moving.pos - cursor.pos
        # Clamped proportional control on cursor 1's move channels.
        for got, e in zip(action[7:10], err.as_tuple()):
            expected = max(-1.0, min(1.0, e / env.cfg.move_step))
            assert got == pytest.approx(expected)
        assert action[13] <= 0.0  # not holding yet

    def test_clamped_move_channel_saturates(self):
        env = make(EpisodeConfig(model="block"))
        obs = env.reset(1)
        pl = plan(env.model, [p.id for p in obs.parts])
        progress = OracleProgress.for_env(env)
        action = oracle_step(obs, pl, progress)
        moving = obs.part(pl.steps[0].moving_part)
        err = moving.pos - obs.cursors[1].pos
        # Any error beyond one step saturates at +/-1 (0.1 error / 0.02 step -> 1).
        big = [abs(e) > env.cfg.move_step for e in err.as_tuple()]
        for flag, got in zip(big, action[7:10]):
            if flag:
                assert abs(got) == 1.0

    def test_all_emitted_actions_decodable(self):
        env = make(EpisodeConfig(model="shelf_simple", max_steps=900))
        obs = env.reset(2)
        pl = plan(env.model, [p.id for p in obs.parts])
        progress = OracleProgress.for_env(env)
        for _ in range(900):
            action = oracle_step(obs, pl, progress)
            decode_action(action, "continuous")  # raises on any violation
            r = env.step(action)
            obs = r.observation
            if r.info["success"]:
                break
        assert r.info["success"]


class TestRunOracle:
    def test_block_success(self):
        env = make(EpisodeConfig(model="block", max_steps=600))
        env.reset(0)
        out = run_oracle(env, budget=600)
        assert out.success is True
        assert out.connections == 1

    def test_budget_one_fails(self):
        env = make(EpisodeConfig(model="block"))
        env.reset(0)
        out = run_oracle(env, budget=1)
        assert out.success is False
        assert out.steps_used == 1

    def test_discrete_mode_rejected(self):
        env = make(EpisodeConfig(model="block", mode="discrete"))
        env.reset(0)
        with pytest.raises(OracleError):
            run_oracle(env, budget=10)

    def test_subset_spawns_assemble(self):
        env = make(EpisodeConfig(model="table_simple", random_subset=True, max_steps=1200))
        for seed in range(5):
            env.reset(seed)
            out = run_oracle(env, budget=1200)
            assert out.success, seed

    def test_orientation_none_assembles(self):
        env = make(
            EpisodeConfig(model="table_simple", orientation_randomization="none", max_steps=1200)
        )
        env.reset(4)
        assert run_oracle(env, budget=1200).success


class TestAlignMonotonicity:
    def test_connector_distance_non_increasing_every_ten_steps(self):
        # Once the moving part is grasped, the controller never lets the
        # active pair's connector distance grow across 10-step windows.
        for model, seed in (("block", 3), ("table_simple", 7), ("shelf_simple", 1)):
            env = make(EpisodeConfig(model=model, max_steps=2000))
            obs = env.reset(seed)
            pl = plan(env.model, [p.id for p in obs.parts])
            progress = OracleProgress.for_env(env)
            distances = {}
            history = []
            while True:
                if progress.index >= len(pl.steps):
                    break
                step = pl.steps[progress.index]
                held = obs.cursors[1].held
                grasped = held is not None and obs.part(held).root == obs.part(step.moving_part).root
                action = oracle_step(obs, pl, progress)
                if grasped:
                    from flatpack.assembly import connector_world_frame

                    fa = connector_world_frame(env.state, env.model, step.target_conn)
                    fb = connector_world_frame(env.state, env.model, step.moving_conn)
                    history.append((progress.index, (fa.pos - fb.pos).norm()))
                r = env.step(action)
                obs = r.observation
                if r.info["success"]:
                    break
            assert history, model
            by_pair = {}
            for idx, d in history:
                by_pair.setdefault(idx, []).append(d)
            for idx, ds in by_pair.items():
                for i in range(len(ds) - 10):
                    assert ds[i + 10] <= ds[i] + 1e-9, (model, idx, i)
