"""Two floating, collision-free cube cursors that grasp and carry weld groups.

Action encodings (part of the wire protocol):

  continuous: 15 reals, clamped to [-1, 1] --
      [move0.xyz, rot0.xyz, hold0, move1.xyz, rot1.xyz, hold1, connect]
  discrete: one integer in [0, 29) --
      id = cursor * 14 + primitive for ids < 28, connect = 28, with
      primitives 0..5 move +x -x +y -y +z -z, 6..11 rot likewise,
      12 hold (+1), 13 release (-1).

The hold channel is tri-state: positive grasps, negative releases, zero
leaves the grip unchanged. Zero must be neutral or discrete mode could
never carry a part between steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple, Union

from .assembly import AssemblyState, collide, transform_group
from .collision import aabb_intersects, part_lowest_z, part_world_aabb
from .geom import IDENTITY_QUAT, Pose, Vec3, ZERO3, euler_increment

if TYPE_CHECKING:  # pragma: no cover
    from .model import FurnitureModel

CONNECT_ACTION_ID = 28
DISCRETE_ACTION_COUNT = 29
CONTINUOUS_ACTION_SIZE = 15


class ActionError(ValueError):
    """Malformed action payload (wrong arity, type, or range)."""


@dataclass
class CursorState:
    pos: Vec3
    held: Optional[str] = None  # part id; holding a part holds its weld group
    half_extent: float = 0.06


@dataclass(frozen=True)
class Workspace:
    x: Tuple[float, float] = (-1.25, 1.25)
    y: Tuple[float, float] = (-1.25, 1.25)
    z: Tuple[float, float] = (0.0, 1.5)

    def clamp(self, v: Vec3) -> Vec3:
        return Vec3(
            min(max(v.x, self.x[0]), self.x[1]),
            min(max(v.y, self.y[0]), self.y[1]),
            min(max(v.z, self.z[0]), self.z[1]),
        )


DEFAULT_WORKSPACE = Workspace()


@dataclass(frozen=True)
class CursorConfig:
    move_step: float = 0.02  # meters per unit of move command
    rot_step: float = math.radians(3.0)  # radians per unit of rot command
    collision_check: bool = False
    settle: bool = False
    workspace: Workspace = DEFAULT_WORKSPACE


@dataclass(frozen=True)
class CursorChannels:
    move: Vec3 = ZERO3
    rot: Vec3 = ZERO3
    hold: float = 0.0


@dataclass(frozen=True)
class CursorCommand:
    cursors: Tuple[CursorChannels, CursorChannels] = (CursorChannels(), CursorChannels())
    connect: float = 0.0


@dataclass(frozen=True)
class AgentEvent:
    kind: str  # grasp | grasp_none | release | clamped | blocked | settled
    cursor: Optional[int] = None
    detail: Optional[str] = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.cursor is not None:
            out["cursor"] = self.cursor
        if self.detail is not None:
            out["detail"] = self.detail
        return out


def _clamp_unit(v: float) -> float:
    return min(1.0, max(-1.0, v))


def decode_action(raw: Union[Sequence[float], int], mode: str) -> CursorCommand:
    """Decode a raw action payload into a cursor command.

    Continuous payloads are clamped componentwise; a discrete id maps to a
    unit-magnitude command on exactly one channel.
    """
    if mode == "continuous":
        if isinstance(raw, (int, bool)) or not isinstance(raw, (list, tuple)):
            raise ActionError(f"continuous action must be a sequence of {CONTINUOUS_ACTION_SIZE} reals")
        if len(raw) != CONTINUOUS_ACTION_SIZE:
            raise ActionError(
                f"continuous action needs {CONTINUOUS_ACTION_SIZE} reals, got {len(raw)}"
            )
        vals = []
        for i, v in enumerate(raw):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ActionError(f"action component {i} is not a finite number: {v!r}")
            vals.append(_clamp_unit(float(v)))
        return CursorCommand(
            cursors=(
                CursorChannels(Vec3(*vals[0:3]), Vec3(*vals[3:6]), vals[6]),
                CursorChannels(Vec3(*vals[7:10]), Vec3(*vals[10:13]), vals[13]),
            ),
            connect=vals[14],
        )
    if mode == "discrete":
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ActionError(f"discrete action must be an integer, got {raw!r}")
        if not 0 <= raw < DISCRETE_ACTION_COUNT:
            raise ActionError(f"discrete action id {raw} out of range [0, {DISCRETE_ACTION_COUNT})")
        if raw == CONNECT_ACTION_ID:
            return CursorCommand(connect=1.0)
        cursor, prim = divmod(raw, 14)
        move, rot, hold = ZERO3, ZERO3, 0.0
        if prim < 6:
            move = _axis_unit(prim)
        elif prim < 12:
            rot = _axis_unit(prim - 6)
        elif prim == 12:
            hold = 1.0
        else:
            hold = -1.0
        channels = CursorChannels(move, rot, hold)
        idle = CursorChannels()
        return CursorCommand(cursors=(channels, idle) if cursor == 0 else (idle, channels))
    raise ActionError(f"unknown action mode {mode!r}")


def _axis_unit(prim: int) -> Vec3:
    axis, sign = divmod(prim, 2)
    s = 1.0 if sign == 0 else -1.0
    return Vec3(s if axis == 0 else 0.0, s if axis == 1 else 0.0, s if axis == 2 else 0.0)


def cursor_aabb(cursor: CursorState) -> Tuple[Vec3, Vec3]:
    h = cursor.half_extent
    return (
        Vec3(cursor.pos.x - h, cursor.pos.y - h, cursor.pos.z - h),
        Vec3(cursor.pos.x + h, cursor.pos.y + h, cursor.pos.z + h),
    )


def holdable_parts(state: AssemblyState, m: "FurnitureModel", cursor_index: int) -> List[str]:
    """Parts whose world bounding box intersects the cursor's cube, sorted by id."""
    cube = cursor_aabb(state.cursors[cursor_index])
    out = []
    for part_id in sorted(state.poses):
        if aabb_intersects(cube, part_world_aabb(m.part(part_id), state.poses[part_id])):
            out.append(part_id)
    return out


def apply_cursor_command(
    state: AssemblyState, m: "FurnitureModel", cmd: CursorCommand, cfg: CursorConfig
) -> List[AgentEvent]:
    """Apply both cursors' channels in fixed order (cursor 0, then cursor 1).

    Per cursor: hold/release first, then translation, then rotation of the
    held group about the cursor center. With collision checking on, a move
    or rotation that would overlap the held group with another weld group is
    rejected wholesale and reported as a blocked event. The connect channel
    is not handled here; the episode loop owns it.
    """
    events: List[AgentEvent] = []
    for i in (0, 1):
        channels = cmd.cursors[i]
        cursor = state.cursors[i]

        if channels.hold > 0.0 and cursor.held is None:
            candidates = holdable_parts(state, m, i)
            if candidates:
                cursor.held = candidates[0]
                events.append(AgentEvent("grasp", cursor=i, detail=cursor.held))
            else:
                events.append(AgentEvent("grasp_none", cursor=i))
        elif channels.hold < 0.0 and cursor.held is not None:
            released = cursor.held
            cursor.held = None
            events.append(AgentEvent("release", cursor=i, detail=released))
            if cfg.settle:
                root = state.weld.find(released)
                still_held = any(
                    c.held is not None and state.weld.same(c.held, released) for c in state.cursors
                )
                if not still_held and _settle_group(state, m, root, cfg.collision_check):
                    events.append(AgentEvent("settled", cursor=i, detail=root))

        if channels.move != ZERO3:
            target = cursor.pos + channels.move.scale(cfg.move_step)
            new_pos = cfg.workspace.clamp(target)
            actual = new_pos - cursor.pos
            if new_pos != target:
                events.append(AgentEvent("clamped", cursor=i))
            if cursor.held is not None:
                root = state.weld.find(cursor.held)
                snapshot = {p: state.poses[p] for p in state.group_members(root)}
                transform_group(state, root, Pose(actual, IDENTITY_QUAT), ZERO3)
                if cfg.collision_check and collide(state, m, root):
                    state.poses.update(snapshot)
                    events.append(AgentEvent("blocked", cursor=i, detail="move"))
                else:
                    cursor.pos = new_pos
            else:
                cursor.pos = new_pos

        if channels.rot != ZERO3 and cursor.held is not None:
            angles = channels.rot.scale(cfg.rot_step)
            delta_rot = euler_increment(IDENTITY_QUAT, angles)
            root = state.weld.find(cursor.held)
            snapshot = {p: state.poses[p] for p in state.group_members(root)}
            transform_group(state, root, Pose(ZERO3, delta_rot), cursor.pos)
            if cfg.collision_check and collide(state, m, root):
                state.poses.update(snapshot)
                events.append(AgentEvent("blocked", cursor=i, detail="rot"))
    return events


def _settle_group(state: AssemblyState, m: "FurnitureModel", root: str, collision_check: bool
                  ) -> bool:
    """Drop a group along -z until its lowest point reaches the floor or a collision."""
    members = state.group_members(root)
    lowest = min(part_lowest_z(m.part(p), state.poses[p]) for p in members)
    if lowest <= 1e-12:
        return False
    original = {p: state.poses[p] for p in members}

    def place(drop: float) -> None:
        state.poses.update(original)
        transform_group(state, root, Pose(Vec3(0.0, 0.0, -drop), IDENTITY_QUAT), ZERO3)

    if not collision_check:
        place(lowest)
        return True
    place(lowest)
    if not collide(state, m, root):
        return True
    lo, hi = 0.0, lowest  # lo stays collision-free, hi collides
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        place(mid)
        if collide(state, m, root):
            hi = mid
        else:
            lo = mid
    place(lo)
    return lo > 0.0
