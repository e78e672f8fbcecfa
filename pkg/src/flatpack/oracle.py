"""Scripted greedy assembly policy driving the public action interface.

For each mate pair of a breadth-first plan over the goal tree, cursor 1
flies to the moving part, grasps it at its origin, then every step commands
a clamped rotation toward the goal orientation together with a translation
chosen so the active connector's distance to its mate never increases (the
translation compensates the swing the rotation is about to cause, which the
policy can predict exactly because the kinematics are deterministic). Once
the pair reports attachable, it fires connect and moves on.

Guarantees hold for the bundled models with collision checking off and
orientation randomization "none" or "yaw"; full 3-D orientation errors can
stall the axis-by-axis rotation controller near gimbal configurations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .env import Env, Observation
from .geom import (
    IDENTITY_QUAT,
    Pose,
    Vec3,
    euler_increment,
    euler_xyz_from_quat,
    pose_compose,
    quat_conjugate,
    quat_mul,
    quat_rotate,
)
from .model import FurnitureModel, goal_relative_pose, pair_id


class OracleError(Exception):
    pass


class DisconnectedSubsetError(OracleError):
    """Spawned parts do not induce a connected goal subtree."""


@dataclass(frozen=True)
class PlanStep:
    target_conn: str  # on the group already welded to the base
    moving_conn: str
    target_part: str
    moving_part: str

    @property
    def pair(self) -> str:
        return pair_id(self.target_conn, self.moving_conn)


@dataclass(frozen=True)
class AssemblyPlan:
    steps: tuple
    base_part: str
    model: FurnitureModel

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class OracleProgress:
    """Mutable cursor into the plan plus the step scales the policy predicts with."""

    move_step: float
    rot_step: float
    index: int = 0

    @classmethod
    def for_env(cls, env: Env) -> "OracleProgress":
        return cls(move_step=env.cfg.move_step, rot_step=env.cfg.rot_step)


@dataclass(frozen=True)
class OracleOutcome:
    success: bool
    steps_used: int
    connections: int
    trajectory: Optional[str] = None  # path of a recording, when one was made


def plan(m: FurnitureModel, spawned: List[str]) -> AssemblyPlan:
    """Breadth-first traversal of the goal tree from the smallest spawned part id."""
    if not spawned:
        return AssemblyPlan(steps=(), base_part="", model=m)
    present = set(spawned)
    adj = m.goal_adjacency()
    base = min(present)
    seen = {base}
    queue = [base]
    steps: List[PlanStep] = []
    while queue:
        current = queue.pop(0)
        for neighbor, own_conn, their_conn in adj[current]:
            if neighbor in present and neighbor not in seen:
                seen.add(neighbor)
                queue.append(neighbor)
                steps.append(
                    PlanStep(
                        target_conn=own_conn,
                        moving_conn=their_conn,
                        target_part=current,
                        moving_part=neighbor,
                    )
                )
    missing = sorted(present - seen)
    if missing:
        raise DisconnectedSubsetError(f"goal subtree does not reach: {', '.join(missing)}")
    return AssemblyPlan(steps=tuple(steps), base_part=base, model=m)


def _clamp_unit(v: float) -> float:
    return min(1.0, max(-1.0, v))


def _action(
    move: Vec3 = Vec3(0.0, 0.0, 0.0),
    rot: Vec3 = Vec3(0.0, 0.0, 0.0),
    hold: float = 0.0,
    do_connect: float = 0.0,
) -> List[float]:
    """Cursor 0 stays idle; the oracle drives cursor 1 only."""
    return [
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        move.x, move.y, move.z, rot.x, rot.y, rot.z, hold,
        do_connect,
    ]


def oracle_step(obs: Observation, pl: AssemblyPlan, progress: OracleProgress) -> List[float]:
    """Emit exactly one continuous action toward completing the plan."""
    roots = {p.id: p.root for p in obs.parts}
    while progress.index < len(pl.steps):
        step = pl.steps[progress.index]
        if roots[step.moving_part] == roots[step.target_part]:
            progress.index += 1
            continue
        break
    if progress.index >= len(pl.steps):
        return _action()
    step = pl.steps[progress.index]

    if any(a.pair == step.pair for a in obs.attachable):
        return _action(do_connect=1.0)

    cursor = obs.cursors[1]
    moving = obs.part(step.moving_part)
    if cursor.held is None or roots.get(cursor.held) != roots[step.moving_part]:
        if cursor.held is not None:
            return _action(hold=-1.0)
        error = moving.pos - cursor.pos
        if max(abs(error.x), abs(error.y), abs(error.z)) <= 0.5 * progress.move_step:
            # Grasp at the part origin: spawn spacing guarantees it is the
            # only holdable part there, and rotation then pivots near the
            # part center.
            return _action(hold=1.0)
        return _action(move=_clamped_move(error, progress.move_step))

    m = pl.model
    target_pose = pose_compose(
        Pose(obs.part(step.target_part).pos, obs.part(step.target_part).quat),
        goal_relative_pose(m, step.target_conn, step.moving_conn),
    )
    current_pose = Pose(moving.pos, moving.quat)

    # Rotation toward the goal orientation, one clamped intrinsic-XYZ nibble.
    q_err = quat_mul(target_pose.rot, quat_conjugate(current_pose.rot))
    ax, ay, az = euler_xyz_from_quat(q_err)
    rot_cmd = Vec3(
        _clamp_unit(ax / progress.rot_step),
        _clamp_unit(ay / progress.rot_step),
        _clamp_unit(az / progress.rot_step),
    )
    applied = euler_increment(
        IDENTITY_QUAT,
        Vec3(rot_cmd.x * progress.rot_step, rot_cmd.y * progress.rot_step,
             rot_cmd.z * progress.rot_step),
    )

    # Translation that lands the moving connector as close to its mate as one
    # step allows, including the swing the rotation above is about to cause.
    _, conn_moving = m.connector(step.moving_conn)
    _, conn_target = m.connector(step.target_conn)
    conn_pos = pose_compose(current_pose, conn_moving.local).pos
    target_conn_pos = pose_compose(
        Pose(obs.part(step.target_part).pos, obs.part(step.target_part).quat),
        conn_target.local,
    ).pos
    lever = conn_pos - cursor.pos
    swing = quat_rotate(applied, lever) - lever
    error = target_conn_pos - conn_pos - swing
    return _action(move=_clamped_move(error, progress.move_step), rot=rot_cmd)


def _clamped_move(error: Vec3, move_step: float) -> Vec3:
    return Vec3(
        _clamp_unit(error.x / move_step),
        _clamp_unit(error.y / move_step),
        _clamp_unit(error.z / move_step),
    )


def run_oracle(env: Env, budget: int) -> OracleOutcome:
    """Drive a reset environment with the scripted policy until success or budget."""
    if env.cfg.mode != "continuous":
        raise OracleError("the scripted policy emits continuous actions only")
    obs = env.observe()
    pl = plan(env.model, [p.id for p in obs.parts])
    progress = OracleProgress.for_env(env)
    steps_used = 0
    success = len({p.root for p in obs.parts}) <= 1
    while not success and steps_used < budget:
        result = env.step(oracle_step(obs, pl, progress))
        obs = result.observation
        steps_used += 1
        success = result.info["success"]
    return OracleOutcome(
        success=success, steps_used=steps_used, connections=obs.connected_count
    )
