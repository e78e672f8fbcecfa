"""The scripted assembly policy: plan, grasp, align, attach, repeat.

The policy reads only public observations and emits only legal actions,
so a successful run is an end-to-end proof that the model is assemblable
through the same interface a learning agent would use.
"""

import time

from flatpack import EpisodeConfig, list_bundled_models, make
from flatpack.oracle import OracleProgress, oracle_step, plan, run_oracle

# Fine-grained view on the block model: watch the phases go by.
env = make(EpisodeConfig(model="block", max_steps=600))
obs = env.reset(seed=5)
pl = plan(env.model, [p.id for p in obs.parts])
progress = OracleProgress.for_env(env)
print("plan:", [(s.target_conn, "<-", s.moving_conn) for s in pl.steps])

phase = None
for t in range(600):
    action = oracle_step(obs, pl, progress)
    if action[14] > 0:
        now = "attach"
    elif obs.cursors[1].held:
        now = "align"
    elif action[13] > 0:
        now = "grasp"
    else:
        now = "approach"
    if now != phase:
        print(f"step {t:3d}: {now}")
        phase = now
    result = env.step(action)
    obs = result.observation
    if result.done:
        break
print("done: success =", result.info["success"], "in", t + 1, "steps\n")

# Headline numbers across the whole bundle.
for name, parts, _ in list_bundled_models():
    budget = 300 * (parts - 1)
    env = make(EpisodeConfig(model=name, max_steps=budget))
    wins = 0
    t0 = time.perf_counter()
    for seed in range(10):
        env.reset(seed)
        wins += run_oracle(env, budget=budget).success
    dt = time.perf_counter() - t0
    print(f"{name:14s} {wins}/10 seeds assembled ({dt:.2f}s)")
