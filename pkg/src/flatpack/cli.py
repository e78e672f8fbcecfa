"""Operator command line: validate models, run episodes, verify replays, serve.

Exit codes: 0 success, 1 domain failure (invalid model, failed replay,
bind error), 2 usage error (bad flags, missing files). With --json the
machine-readable result goes to stdout; logs go to stderr only.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import os
import sys
from typing import List, Optional

from ._version import ENGINE
from .env import EpisodeConfig, EnvError, make
from .model import ModelError, ModelSyntaxError, parse_model, validate_model
from .oracle import OracleError, oracle_step, plan, OracleProgress
from .record import TrajectoryError, TrajectoryWriter, replay_check, state_digest
from .rng import CounterRng
from .server import DEFAULT_PORT, FlatpackServer

log = logging.getLogger("flatpack.cli")

_RANDOM_POLICY_SALT = 0x5EEDF00D


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flatpack", description=__doc__)
    parser.add_argument("--version", action="version", version=ENGINE)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a furniture model file")
    p.add_argument("path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run headless episodes with a policy")
    p.add_argument("--model", required=True, help="bundled model name or .furn.json path")
    p.add_argument("--policy", choices=("random", "oracle"), default="oracle")
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--record", metavar="DIR", help="write one .traj.jsonl per episode")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="verify a recorded trajectory replays identically")
    p.add_argument("path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="start the WebSocket protocol server")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", nargs="?", const="auto", default=None, metavar="DIR",
                   help="also serve the teleoperation UI (auto-detects frontend/dist)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_serve)
    return parser


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        with open(args.path, "rb") as f:
            text = f.read()
    except OSError as e:
        print(f"cannot read {args.path}: {e}", file=sys.stderr)
        return 2
    try:
        model = parse_model(text)
    except ModelError as e:
        where = "syntax" if isinstance(e, ModelSyntaxError) else "format"
        if args.json:
            print(json.dumps({"ok": False, "errors": [{"code": where, "message": str(e)}],
                              "warnings": []}))
        else:
            print(f"error[{where}]: {e}")
        return 1
    diags = validate_model(model)
    if args.json:
        print(json.dumps({
            "ok": diags.ok,
            "errors": [d.__dict__ for d in diags.errors],
            "warnings": [d.__dict__ for d in diags.warnings],
        }, sort_keys=True))
    else:
        for d in diags.errors:
            print(f"error[{d.code}] {d.path}: {d.message}")
        for d in diags.warnings:
            print(f"warning[{d.code}] {d.path}: {d.message}")
        if diags.ok:
            print(f"{model.name}: ok ({len(model.parts)} parts, "
                  f"{len(model.mate_pairs())} mate pairs)")
    return 0 if diags.ok else 1


def _random_policy(seed: int):
    rng = CounterRng(seed ^ _RANDOM_POLICY_SALT)

    def policy(_obs):
        return [rng.uniform(-1.0, 1.0) for _ in range(15)]

    return policy


def _oracle_policy(env):
    state = {}

    def policy(obs):
        if "plan" not in state:
            state["plan"] = plan(env.model, [p.id for p in obs.parts])
            state["progress"] = OracleProgress.for_env(env)
        return oracle_step(obs, state["plan"], state["progress"])

    return policy


def cmd_run(args: argparse.Namespace) -> int:
    if args.episodes < 1:
        print("--episodes must be >= 1", file=sys.stderr)
        return 2
    if args.record:
        try:
            os.makedirs(args.record, exist_ok=True)
        except OSError as e:
            print(f"cannot create record directory: {e}", file=sys.stderr)
            return 2
    try:
        probe = make(EpisodeConfig(model=args.model))
        # The scripted policy needs headroom of 300 steps per mate pair.
        max_steps = 300 * max(1, len(probe.model.parts) - 1) if args.policy == "oracle" else 500
        env = make(EpisodeConfig(model=args.model, max_steps=max_steps))
    except (EnvError, ModelError) as e:
        print(f"cannot set up environment: {e}", file=sys.stderr)
        return 1

    episodes = []
    for i in range(args.episodes):
        seed = args.seed + i
        writer = None
        if args.record:
            name = f"{env.model.name}_seed{seed}.traj.jsonl"
            writer = TrajectoryWriter(
                os.path.join(args.record, name), env.cfg.model, env.cfg.to_dict(), seed
            )
        obs = env.reset(seed)
        policy = _random_policy(seed) if args.policy == "random" else _oracle_policy(env)
        total = 0.0
        steps = 0
        try:
            while True:
                action = policy(obs)
                result = env.step(action)
                if writer is not None:
                    writer.write_step(steps, action, result.reward, result.done,
                                      state_digest(env.state))
                total += result.reward
                steps += 1
                obs = result.observation
                if result.done:
                    break
        except OracleError as e:
            print(f"oracle failed: {e}", file=sys.stderr)
            return 1
        finally:
            if writer is not None:
                writer.close()
        episodes.append({"seed": seed, "success": env.success, "steps": steps, "return": total})
        if not args.json:
            print(f"seed={seed} success={env.success} steps={steps} return={total}")

    rate = sum(1 for e in episodes if e["success"]) / len(episodes)
    if args.json:
        print(json.dumps({"episodes": episodes, "success_rate": rate}, sort_keys=True))
    else:
        print(f"success_rate={rate}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    if not os.path.isfile(args.path):
        print(f"no such file: {args.path}", file=sys.stderr)
        return 2
    try:
        report = replay_check(args.path)
    except (TrajectoryError, EnvError) as e:
        if args.json:
            print(json.dumps({"ok": False, "error": str(e)}))
        else:
            print(f"cannot replay: {e}")
        return 1
    for w in report.warnings:
        log.warning("%s", w)
    if args.json:
        print(json.dumps({"ok": report.ok, "divergence": report.divergence}))
    elif report.ok:
        print("replay ok")
    else:
        print(f"replay diverged at step {report.divergence}")
    return 0 if report.ok else 1


def _detect_ui_dir() -> Optional[str]:
    here = os.path.dirname(os.path.abspath(__file__))
    for candidate in (
        os.path.join(os.getcwd(), "frontend", "dist"),
        os.path.abspath(os.path.join(here, "..", "..", "frontend", "dist")),
    ):
        if os.path.isfile(os.path.join(candidate, "index.html")):
            return candidate
    return None


def cmd_serve(args: argparse.Namespace) -> int:
    ui_dir = None
    if args.ui == "auto":
        ui_dir = _detect_ui_dir()
        if ui_dir is None:
            print("cannot find frontend/dist; pass --ui DIR explicitly", file=sys.stderr)
            return 1
    elif args.ui is not None:
        if not os.path.isfile(os.path.join(args.ui, "index.html")):
            print(f"no index.html under {args.ui}", file=sys.stderr)
            return 1
        ui_dir = args.ui

    server = FlatpackServer(host=args.host, port=args.port, ui_dir=ui_dir)

    async def _serve() -> None:
        ready = asyncio.Event()
        task = asyncio.create_task(server.run(ready))
        # run() fills in the OS-assigned port before signalling readiness.
        ready_wait = asyncio.create_task(ready.wait())
        done, _ = await asyncio.wait({task, ready_wait}, return_when=asyncio.FIRST_COMPLETED)
        if task in done:
            ready_wait.cancel()
            task.result()  # surfaces bind errors
            return
        if args.json:
            print(json.dumps({"host": args.host, "port": server.port, "ui": ui_dir}), flush=True)
        else:
            print(f"listening on {args.host}:{server.port}"
                  + (f" (ui from {ui_dir})" if ui_dir else ""), flush=True)
        await task

    try:
        asyncio.run(_serve())
    except OSError as e:
        print(f"cannot bind {args.host}:{args.port}: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        log.info("shutting down")
    return 0


if __name__ == "__main__":
    sys.exit(main())
