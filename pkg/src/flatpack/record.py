"""Trajectory persistence and deterministic replay verification.

File format: UTF-8 line-delimited JSON, LF endings, extension .traj.jsonl.
The first line is a header (version, model, config, seed, engine); every
following line is one step (t, action, reward, done, digest, optional obs).
Poses are quantized to 1e-9 before hashing, which absorbs last-bit float
noise while catching any real divergence.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Union

from ._version import ENGINE
from .assembly import AssemblyState
from .env import BadActionError, Env, EpisodeConfig, make

TRAJECTORY_VERSION = 1
_QUANTUM = 1e-9


class TrajectoryError(Exception):
    """Unreadable or structurally invalid trajectory file."""


def _q(value: float) -> int:
    return int(round(value / _QUANTUM))


def state_digest(state: AssemblyState) -> str:
    """SHA-256 hex digest of the canonical, quantized state serialization."""
    doc = {
        "poses": {
            pid: [_q(v) for v in state.poses[pid].as_tuple()] for pid in sorted(state.poses)
        },
        "weld": state.weld.root_map(),
        "pairs": sorted(state.connected_pairs),
        "cursors": [
            {"pos": [_q(v) for v in c.pos.as_tuple()], "held": c.held} for c in state.cursors
        ],
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


class TrajectoryWriter:
    """Streams one episode to disk: header first, then one line per step."""

    def __init__(self, path: str, model: str, config: dict, seed: int, engine: str = ENGINE):
        self._file = open(path, "w", encoding="utf-8", newline="\n")
        self.path = path
        self.steps = 0
        header = {
            "version": TRAJECTORY_VERSION,
            "model": model,
            "config": config,
            "seed": seed,
            "engine": engine,
        }
        self._file.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")

    def write_step(
        self,
        t: int,
        action: Union[List[float], int],
        reward: float,
        done: bool,
        digest: str,
        obs: Optional[dict] = None,
    ) -> None:
        line = {"t": t, "action": action, "reward": reward, "done": done, "digest": digest}
        if obs is not None:
            line["obs"] = obs
        self._file.write(json.dumps(line, sort_keys=True, separators=(",", ":")) + "\n")
        self.steps += 1

    def close(self) -> None:
        if not self._file.closed:
            self._file.flush()
            self._file.close()

    def __enter__(self) -> "TrajectoryWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


Policy = Union[Callable[[object], Union[List[float], int]], Iterable]


def record_episode(
    env: Env,
    policy: Policy,
    path: str,
    seed: int,
    include_obs: bool = False,
) -> int:
    """Reset env with seed, drive it with policy, and record every step.

    The policy is either a callable obs -> action or an iterable of actions;
    an exhausted iterable ends the recording early (header-only files are
    valid). Returns the number of recorded steps.
    """
    if callable(policy):
        get_action = policy
    else:
        actions = iter(policy)

        def get_action(_obs):  # type: ignore[misc]
            return next(actions)

    writer = TrajectoryWriter(path, env.cfg.model, env.cfg.to_dict(), seed)
    try:
        obs = env.reset(seed)
        t = 0
        while True:
            try:
                action = get_action(obs)
            except StopIteration:
                break
            result = env.step(action)
            writer.write_step(
                t,
                action,
                result.reward,
                result.done,
                state_digest(env.state),
                result.observation.to_dict() if include_obs else None,
            )
            obs = result.observation
            t += 1
            if result.done:
                break
    finally:
        writer.close()
    return writer.steps


@dataclass(frozen=True)
class ReplayReport:
    ok: bool
    divergence: Optional[int] = None  # first step index whose record did not match
    warnings: tuple = ()


def _parse_line(raw: str, lineno: int) -> dict:
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise TrajectoryError(f"line {lineno}: invalid JSON: {e.msg}") from None
    if not isinstance(doc, dict):
        raise TrajectoryError(f"line {lineno}: expected an object")
    return doc


def read_trajectory(path: str) -> tuple:
    """(header, steps) from a trajectory file, with structural validation."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise TrajectoryError("empty trajectory file")
    header = _parse_line(lines[0], 1)
    for key in ("version", "model", "config", "seed", "engine"):
        if key not in header:
            raise TrajectoryError(f"header missing {key!r}")
    if header["version"] != TRAJECTORY_VERSION:
        raise TrajectoryError(f"unsupported trajectory version {header['version']!r}")
    steps = []
    for i, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        doc = _parse_line(raw, i)
        for key in ("t", "action", "reward", "done", "digest"):
            if key not in doc:
                raise TrajectoryError(f"line {i}: step missing {key!r}")
        if doc["t"] != len(steps):
            raise TrajectoryError(f"line {i}: step index {doc['t']!r}, expected {len(steps)}")
        steps.append(doc)
    return header, steps


def replay_check(path: str) -> ReplayReport:
    """Re-run a recorded episode and compare digests, rewards, and done flags.

    An engine-version mismatch is reported as a warning and the replay still
    runs. Structural problems raise TrajectoryError; behavioral divergence
    comes back as ok=False with the first differing step.
    """
    header, steps = read_trajectory(path)
    warnings = []
    if header["engine"] != ENGINE:
        warnings.append(
            f"recorded with engine {header['engine']!r}, replaying with {ENGINE!r}"
        )
    cfg = EpisodeConfig.from_dict(header["config"])
    env = make(cfg)
    env.reset(header["seed"])
    for rec in steps:
        t = rec["t"]
        try:
            result = env.step(rec["action"])
        except BadActionError:
            return ReplayReport(ok=False, divergence=t, warnings=tuple(warnings))
        if (
            state_digest(env.state) != rec["digest"]
            or result.reward != rec["reward"]
            or result.done != rec["done"]
        ):
            return ReplayReport(ok=False, divergence=t, warnings=tuple(warnings))
    return ReplayReport(ok=True, warnings=tuple(warnings))
