"""Recording episodes and verifying deterministic replay.

A trajectory file carries everything needed to re-run the episode: the
config, the seed, and per-step actions with state digests. replay_check
re-executes it and compares digests, so silent drift is impossible.
"""

import json
import tempfile
from pathlib import Path

from flatpack import EpisodeConfig, make, record_episode, replay_check
from flatpack.oracle import OracleProgress, oracle_step, plan

workdir = Path(tempfile.mkdtemp(prefix="flatpack-demo-"))
path = workdir / "table.traj.jsonl"


def scripted(env):
    memo = {}

    def policy(obs):
        if "plan" not in memo:
            memo["plan"] = plan(env.model, [p.id for p in obs.parts])
            memo["progress"] = OracleProgress.for_env(env)
        return oracle_step(obs, memo["plan"], memo["progress"])

    return policy


env = make(EpisodeConfig(model="table_simple", max_steps=1200))
steps = record_episode(env, scripted(env), str(path), seed=11)
print(f"recorded {steps} steps to {path}")

header = json.loads(path.read_text().splitlines()[0])
print("header:", {k: header[k] for k in ("version", "model", "seed", "engine")})

report = replay_check(str(path))
print("replay ok:", report.ok)

# Tamper with one action and watch the replay diverge at exactly that step.
lines = path.read_text().splitlines()
record = json.loads(lines[3])
record["action"][7] = -record["action"][7] if record["action"][7] else 1.0
lines[3] = json.dumps(record, sort_keys=True, separators=(",", ":"))
tampered = workdir / "tampered.traj.jsonl"
tampered.write_text("\n".join(lines) + "\n")

report = replay_check(str(tampered))
print("tampered replay ok:", report.ok, "- first divergence at step", report.divergence)
