"""Episode lifecycle in the Gym style: make, reset, step, observe.

Reset seeds a counter-based generator, scatters the parts, and zeroes the
weld partition; step decodes one action, drives the cursors, runs the
connect machinery when the connect channel fires, and accounts reward.
Identical (seed, action sequence) pairs give bit-identical state digests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields as dataclass_fields
from typing import Dict, List, Optional, Tuple, Union

from .agents import (
    ActionError,
    CursorConfig,
    CursorState,
    apply_cursor_command,
    decode_action,
)
from .assembly import (
    AlignmentThresholds,
    AssemblyState,
    DEFAULT_THRESHOLDS,
    connect,
    scan_attachable,
)
from .collision import part_bounding_radius, part_lowest_z
from .geom import IDENTITY_QUAT, Pose, UnitQuat, Vec3, ZERO3, quat_from_axis_angle, UNIT_Z
from .model import FurnitureModel, ModelNotFoundError, pair_id, resolve_model, validate_model
from .rng import CounterRng

SPAWN_RANGE = 0.8  # parts spawn with x, y uniform in [-SPAWN_RANGE, SPAWN_RANGE]
CURSOR_HOMES = (Vec3(-0.3, 0.0, 0.3), Vec3(0.3, 0.0, 0.3))
MAX_PLACEMENT_ATTEMPTS = 100

ORIENTATION_MODES = ("none", "yaw", "full")
ACTION_MODES = ("continuous", "discrete")


class EnvError(Exception):
    pass


class UnknownModelError(EnvError):
    pass


class InvalidConfigError(EnvError):
    pass


class NotResetError(EnvError):
    pass


class BadActionError(EnvError):
    pass


class PlacementError(EnvError):
    """Rejection sampling could not place a part without bounding-sphere overlap."""


@dataclass(frozen=True)
class RewardConfig:
    connect_reward: float = 1.0
    success_bonus: float = 0.0
    step_penalty: float = 0.0
    dense_shaping: bool = False
    shaping_scale: float = 0.1

    def to_dict(self) -> dict:
        return {
            "connect_reward": self.connect_reward,
            "success_bonus": self.success_bonus,
            "step_penalty": self.step_penalty,
            "dense_shaping": self.dense_shaping,
            "shaping_scale": self.shaping_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RewardConfig":
        _check_keys(d, {f.name for f in dataclass_fields(cls)}, "reward")
        return cls(**d)


@dataclass(frozen=True)
class EpisodeConfig:
    model: str
    mode: str = "continuous"
    max_steps: int = 500
    thresholds: Optional[AlignmentThresholds] = None
    move_step: float = 0.02
    rot_step: float = math.radians(3.0)
    collision_check: bool = False
    settle: bool = False
    random_subset: bool = False
    orientation_randomization: str = "yaw"
    reward: RewardConfig = field(default_factory=RewardConfig)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "mode": self.mode,
            "max_steps": self.max_steps,
            "thresholds": None
            if self.thresholds is None
            else {
                "distance": self.thresholds.epsilon_distance,
                "up": self.thresholds.epsilon_up,
                "forward": self.thresholds.epsilon_forward,
            },
            "move_step": self.move_step,
            "rot_step": self.rot_step,
            "collision_check": self.collision_check,
            "settle": self.settle,
            "random_subset": self.random_subset,
            "orientation_randomization": self.orientation_randomization,
            "reward": self.reward.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeConfig":
        if not isinstance(d, dict):
            raise InvalidConfigError("config must be an object")
        _check_keys(d, {f.name for f in dataclass_fields(cls)}, "config")
        if "model" not in d:
            raise InvalidConfigError("config needs a model name")
        kwargs = dict(d)
        t = kwargs.get("thresholds")
        if t is not None:
            _check_keys(t, {"distance", "up", "forward"}, "thresholds")
            base = DEFAULT_THRESHOLDS
            kwargs["thresholds"] = AlignmentThresholds(
                epsilon_distance=t.get("distance", base.epsilon_distance),
                epsilon_up=t.get("up", base.epsilon_up),
                epsilon_forward=t.get("forward", base.epsilon_forward),
            )
        if "reward" in kwargs and kwargs["reward"] is not None:
            kwargs["reward"] = RewardConfig.from_dict(kwargs["reward"])
        elif "reward" in kwargs:
            del kwargs["reward"]
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise InvalidConfigError(str(e)) from None


def _check_keys(d: object, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise InvalidConfigError(f"{where} must be an object")
    unknown = set(d) - allowed
    if unknown:
        raise InvalidConfigError(f"unknown {where} field(s): {', '.join(sorted(unknown))}")


@dataclass(frozen=True)
class PartObs:
    id: str
    pos: Vec3
    quat: UnitQuat
    root: str


@dataclass(frozen=True)
class CursorObs:
    pos: Vec3
    held: Optional[str]


@dataclass(frozen=True)
class AttachableObs:
    pair: str
    distance: float
    up_sim: float
    forward_sim: float


@dataclass(frozen=True)
class Observation:
    parts: Tuple[PartObs, ...]
    cursors: Tuple[CursorObs, ...]
    attachable: Tuple[AttachableObs, ...]
    connected_count: int
    step: int

    def to_dict(self) -> dict:
        return {
            "parts": [
                {
                    "id": p.id,
                    "pos": list(p.pos.as_tuple()),
                    "quat": list(p.quat.as_tuple()),
                    "root": p.root,
                }
                for p in self.parts
            ],
            "cursors": [{"pos": list(c.pos.as_tuple()), "held": c.held} for c in self.cursors],
            "attachable": [
                {
                    "pair": a.pair,
                    "distance": a.distance,
                    "up_sim": a.up_sim,
                    "forward_sim": a.forward_sim,
                }
                for a in self.attachable
            ],
            "connected_count": self.connected_count,
            "step": self.step,
        }

    def canonical_json(self) -> str:
        """Stable serialization: sorted keys, shortest round-trip floats."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def part(self, part_id: str) -> PartObs:
        for p in self.parts:
            if p.id == part_id:
                return p
        raise KeyError(f"part {part_id!r} not in observation")


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict


def is_success(state: AssemblyState, spawned: List[str]) -> bool:
    """All spawned parts welded into a single group."""
    roots = {state.weld.find(p) for p in spawned}
    return len(roots) <= 1


def _connected_subsets(m: FurnitureModel, min_size: int = 2) -> List[Tuple[str, ...]]:
    """All connected induced subgraphs of the goal graph with >= min_size parts."""
    ids = sorted(p.id for p in m.parts)
    adj = m.goal_adjacency()
    out = []
    for mask in range(1, 1 << len(ids)):
        subset = [ids[i] for i in range(len(ids)) if mask & (1 << i)]
        if len(subset) < min_size:
            continue
        seen = {subset[0]}
        queue = [subset[0]]
        inside = set(subset)
        while queue:
            for nb, _, _ in adj[queue.pop()]:
                if nb in inside and nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        if len(seen) == len(subset):
            out.append(tuple(subset))
    return sorted(out)


def randomize_layout(m: FurnitureModel, rng: CounterRng, cfg: EpisodeConfig) -> Dict[str, Pose]:
    """Scatter (a subset of) the parts on the floor plane, seeded and reproducible.

    Draw order is fixed: the subset choice, then per part (sorted by id) one
    orientation draw followed by up to 100 position attempts. Parts rest on
    z = 0 and reject placements whose bounding spheres overlap.
    """
    ids = sorted(p.id for p in m.parts)
    if cfg.random_subset and len(ids) > 2:
        subsets = _connected_subsets(m)
        ids = list(subsets[rng.randrange(len(subsets))])

    placed: Dict[str, Pose] = {}
    radii: Dict[str, float] = {}
    for part_id in ids:
        part = m.part(part_id)
        if cfg.orientation_randomization == "none":
            rot = IDENTITY_QUAT
        elif cfg.orientation_randomization == "yaw":
            rot = quat_from_axis_angle(UNIT_Z, rng.uniform(0.0, 2.0 * math.pi))
        else:
            rot = rng.unit_quat()
        z = -part_lowest_z(part, Pose(ZERO3, rot))
        radius = part_bounding_radius(part)
        for attempt in range(MAX_PLACEMENT_ATTEMPTS):
            x = rng.uniform(-SPAWN_RANGE, SPAWN_RANGE)
            y = rng.uniform(-SPAWN_RANGE, SPAWN_RANGE)
            center = Vec3(x, y, z)
            if all(
                (center - placed[o].pos).norm() >= radius + radii[o] for o in placed
            ):
                placed[part_id] = Pose(center, rot)
                radii[part_id] = radius
                break
        else:
            raise PlacementError(
                f"could not place part {part_id!r} in {MAX_PLACEMENT_ATTEMPTS} attempts"
            )
    return placed


def compute_reward(
    events: List[dict],
    state: AssemblyState,
    m: FurnitureModel,
    reward_cfg: RewardConfig,
    thresholds: AlignmentThresholds,
    became_success: bool,
) -> float:
    """Sparse per-connection reward, optional success bonus, penalty, and shaping."""
    connections = sum(1 for e in events if e.get("kind") == "connected")
    total = reward_cfg.connect_reward * connections
    if became_success:
        total += reward_cfg.success_bonus
    total -= reward_cfg.step_penalty
    if reward_cfg.dense_shaping:
        open_pairs = scan_attachable(state, m, thresholds)
        if open_pairs:
            total -= reward_cfg.shaping_scale * min(r.distance for _, r in open_pairs)
    return total


class Env:
    """One episode session. Construct through make()."""

    def __init__(self, cfg: EpisodeConfig, model: FurnitureModel):
        self.cfg = cfg
        self.model = model
        self.thresholds = cfg.thresholds or model.thresholds or DEFAULT_THRESHOLDS
        self.state: Optional[AssemblyState] = None
        self.last_seed: Optional[int] = None
        self._steps = 0
        self._spawned: List[str] = []
        self._cursor_cfg = CursorConfig(
            move_step=cfg.move_step,
            rot_step=cfg.rot_step,
            collision_check=cfg.collision_check,
            settle=cfg.settle,
        )

    @property
    def spawned(self) -> List[str]:
        return list(self._spawned)

    @property
    def steps(self) -> int:
        return self._steps

    def reset(self, seed: int) -> Observation:
        rng = CounterRng(seed)
        poses = randomize_layout(self.model, rng, self.cfg)
        cursors = [CursorState(CURSOR_HOMES[0]), CursorState(CURSOR_HOMES[1])]
        self.state = AssemblyState.from_poses(poses, cursors)
        self._spawned = sorted(poses)
        self._steps = 0
        self.last_seed = seed
        return self.observe()

    def step(self, action: Union[List[float], int]) -> StepResult:
        if self.state is None:
            raise NotResetError("step before reset")
        try:
            cmd = decode_action(action, self.cfg.mode)
        except ActionError as e:
            raise BadActionError(str(e)) from None
        was_success = is_success(self.state, self._spawned)
        events = [e.to_dict() for e in apply_cursor_command(self.state, self.model, cmd, self._cursor_cfg)]
        if cmd.connect > 0.0:
            events.extend(e.to_dict() for e in connect(self.state, self.model, self.thresholds))
        success = is_success(self.state, self._spawned)
        reward = compute_reward(
            events, self.state, self.model, self.cfg.reward, self.thresholds,
            became_success=success and not was_success,
        )
        self._steps += 1
        done = success or self._steps >= self.cfg.max_steps
        return StepResult(
            observation=self.observe(),
            reward=reward,
            done=done,
            info={"events": events, "success": success},
        )

    def observe(self) -> Observation:
        if self.state is None:
            raise NotResetError("observe before reset")
        state = self.state
        parts = tuple(
            PartObs(pid, state.poses[pid].pos, state.poses[pid].rot, state.weld.find(pid))
            for pid in sorted(state.poses)
        )
        cursors = tuple(CursorObs(c.pos, c.held) for c in state.cursors)
        attachable = tuple(
            AttachableObs(pair_id(qa, qb), r.distance, r.up_sim, r.forward_sim)
            for (qa, qb), r in scan_attachable(state, self.model, self.thresholds)
            if r.attachable
        )
        return Observation(
            parts=parts,
            cursors=cursors,
            attachable=attachable,
            connected_count=len(state.connected_pairs),
            step=self._steps,
        )

    @property
    def success(self) -> bool:
        return self.state is not None and is_success(self.state, self._spawned)


def make(cfg: EpisodeConfig) -> Env:
    """Construct an environment; step before reset is an error."""
    if cfg.mode not in ACTION_MODES:
        raise InvalidConfigError(f"mode must be one of {ACTION_MODES}, got {cfg.mode!r}")
    if not isinstance(cfg.max_steps, int) or isinstance(cfg.max_steps, bool) or cfg.max_steps < 1:
        raise InvalidConfigError(f"max_steps must be an integer >= 1, got {cfg.max_steps!r}")
    if not (cfg.move_step > 0.0) or not math.isfinite(cfg.move_step):
        raise InvalidConfigError(f"move_step must be positive, got {cfg.move_step!r}")
    if not (0.0 < cfg.rot_step <= math.pi):
        raise InvalidConfigError(f"rot_step must be in (0, pi], got {cfg.rot_step!r}")
    if cfg.orientation_randomization not in ORIENTATION_MODES:
        raise InvalidConfigError(
            f"orientation_randomization must be one of {ORIENTATION_MODES}, "
            f"got {cfg.orientation_randomization!r}"
        )
    if cfg.thresholds is not None and not (cfg.thresholds.epsilon_distance > 0.0):
        raise InvalidConfigError("epsilon_distance must be positive")
    try:
        model = resolve_model(cfg.model)
    except ModelNotFoundError as e:
        raise UnknownModelError(str(e)) from None
    diags = validate_model(model)
    if not diags.ok:
        details = "; ".join(f"{d.code} at {d.path}" for d in diags.errors)
        raise InvalidConfigError(f"model {cfg.model!r} failed validation: {details}")
    return Env(cfg, model)
