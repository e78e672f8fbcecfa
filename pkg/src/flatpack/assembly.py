"""World connector frames, the attachability predicate, and welded rigid motion.

A mate pair is *attachable* when three checks pass at once:

  pos:     L2 distance between the connector origins   <  epsilon_distance
  up:      cosine similarity of the connector up axes  >  epsilon_up
  forward: cosine similarity of the forward axes       >  epsilon_forward

For a connector with n-fold symmetry the forward check takes the best match
over the n rotations of one forward axis about its up axis; n = 1 is the
plain predicate. Connecting snaps the moving weld group so the two frames
coincide exactly, then merges the groups; welded parts move as one rigid
body from then on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Set, Tuple

from .collision import shapes_overlap
from .geom import (
    Pose,
    UNIT_X,
    UNIT_Z,
    UnitQuat,
    Vec3,
    cosine_similarity,
    euclidean_distance,
    pose_compose,
    quat_conjugate,
    quat_from_axis_angle,
    quat_mul,
    quat_rotate,
)
from .model_ids import pair_id
from .unionfind import UnionFind

if TYPE_CHECKING:  # pragma: no cover
    from .agents import CursorState
    from .model import FurnitureModel


@dataclass(frozen=True)
class AlignmentThresholds:
    epsilon_distance: float = 0.05  # meters
    epsilon_up: float = 0.95  # cosine similarity
    epsilon_forward: float = 0.90  # cosine similarity


DEFAULT_THRESHOLDS = AlignmentThresholds()


@dataclass(frozen=True)
class WorldConnectorFrame:
    pos: Vec3
    up: Vec3
    forward: Vec3
    owner: str  # qualified connector id
    rot: UnitQuat  # full world orientation the axes derive from


@dataclass(frozen=True)
class AttachabilityResult:
    pos_ok: bool
    up_ok: bool
    forward_ok: bool
    attachable: bool
    distance: float
    up_sim: float
    forward_sim: float


@dataclass(frozen=True)
class ConnectEvent:
    kind: str  # "connected" | "not_attachable" | "already_connected" | "no_op"
    pair: Optional[str] = None
    moved_root: Optional[str] = None
    distance: Optional[float] = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.pair is not None:
            out["pair"] = self.pair
        if self.moved_root is not None:
            out["moved_root"] = self.moved_root
        if self.distance is not None:
            out["distance"] = self.distance
        return out


@dataclass
class AssemblyState:
    """Authoritative episode state: world poses, weld partition, cursors."""

    poses: Dict[str, Pose]
    weld: UnionFind
    connected_pairs: Set[str] = field(default_factory=set)
    cursors: List["CursorState"] = field(default_factory=list)

    @classmethod
    def from_poses(cls, poses: Dict[str, Pose], cursors: Optional[List["CursorState"]] = None
                   ) -> "AssemblyState":
        return cls(
            poses=dict(poses),
            weld=UnionFind(sorted(poses)),
            connected_pairs=set(),
            cursors=list(cursors or []),
        )

    def group_members(self, part_id: str) -> List[str]:
        return self.weld.members(part_id)


def connector_world_frame(state: AssemblyState, m: "FurnitureModel", qualified: str
                          ) -> WorldConnectorFrame:
    """World-space frame of a connector: origin plus unit up and forward axes."""
    part, conn = m.connector(qualified)
    if part.id not in state.poses:
        raise KeyError(f"part {part.id!r} is not present in this episode")
    world = pose_compose(state.poses[part.id], conn.local)
    return WorldConnectorFrame(
        pos=world.pos,
        up=quat_rotate(world.rot, UNIT_Z),
        forward=quat_rotate(world.rot, UNIT_X),
        owner=qualified,
        rot=world.rot,
    )


def check_alignment(
    a: WorldConnectorFrame,
    b: WorldConnectorFrame,
    t: AlignmentThresholds,
    symmetry_order: int = 1,
) -> AttachabilityResult:
    """Evaluate the three-way attachability predicate for a connector pair.

    The reported forward similarity is the best over the symmetry images, so
    for symmetry_order 1 it is the plain axis similarity. Symmetric in its
    frame arguments when symmetry_order is 1.
    """
    distance = euclidean_distance(a.pos, b.pos)
    up_sim = cosine_similarity(a.up, b.up)
    if symmetry_order <= 1:
        forward_sim = cosine_similarity(a.forward, b.forward)
    else:
        forward_sim = -2.0
        for k in range(symmetry_order):
            angle = 2.0 * math.pi * k / symmetry_order
            rotated = quat_rotate(quat_from_axis_angle(a.up, angle), a.forward)
            forward_sim = max(forward_sim, cosine_similarity(rotated, b.forward))
    pos_ok = distance < t.epsilon_distance
    up_ok = up_sim > t.epsilon_up
    forward_ok = forward_sim > t.epsilon_forward
    return AttachabilityResult(
        pos_ok=pos_ok,
        up_ok=up_ok,
        forward_ok=forward_ok,
        attachable=pos_ok and up_ok and forward_ok,
        distance=distance,
        up_sim=up_sim,
        forward_sim=forward_sim,
    )


def scan_attachable(
    state: AssemblyState, m: "FurnitureModel", t: AlignmentThresholds
) -> List[Tuple[Tuple[str, str], AttachabilityResult]]:
    """Evaluate every open mate pair, in lexicographic pair order.

    Open means: both parts spawned, pair not already connected, and the two
    parts not already welded into the same group.
    """
    out = []
    for qa, qb in m.mate_pairs():
        pa = qa.split(".", 1)[0]
        pb = qb.split(".", 1)[0]
        if pa not in state.poses or pb not in state.poses:
            continue
        if pair_id(qa, qb) in state.connected_pairs:
            continue
        if state.weld.same(pa, pb):
            continue
        fa = connector_world_frame(state, m, qa)
        fb = connector_world_frame(state, m, qb)
        out.append(((qa, qb), check_alignment(fa, fb, t, m.pair_symmetry(qa, qb))))
    return out


def snap_transform(
    target: WorldConnectorFrame, moving: WorldConnectorFrame, symmetry_order: int = 1
) -> Pose:
    """World transform T with pose_compose(T, moving frame) == target frame.

    With n-fold symmetry the moving frame lands on whichever of the target
    frame's n symmetric images is nearest the moving frame's current forward,
    minimizing the applied twist.
    """
    target_rot = target.rot
    if symmetry_order > 1:
        best = -2.0
        for k in range(symmetry_order):
            angle = 2.0 * math.pi * k / symmetry_order
            spin = quat_from_axis_angle(target.up, angle)
            sim = cosine_similarity(quat_rotate(spin, target.forward), moving.forward)
            if sim > best:
                best = sim
                target_rot = quat_mul(spin, target.rot)
    delta_rot = quat_mul(target_rot, quat_conjugate(moving.rot))
    delta_pos = target.pos - quat_rotate(delta_rot, moving.pos)
    return Pose(delta_pos, delta_rot)


def transform_group(state: AssemblyState, root: str, delta: Pose, pivot: Vec3) -> None:
    """Rigidly move one weld group: rotate about pivot by delta.rot, then translate."""
    if root not in state.poses:
        raise KeyError(f"unknown group root {root!r}")
    for part_id in state.group_members(root):
        p = state.poses[part_id]
        new_pos = pivot + quat_rotate(delta.rot, p.pos - pivot) + delta.pos
        state.poses[part_id] = Pose(new_pos, quat_mul(delta.rot, p.rot))


def apply_world_transform(state: AssemblyState, root: str, transform: Pose) -> None:
    """Pre-multiply every pose in a weld group by a world transform."""
    for part_id in state.group_members(root):
        state.poses[part_id] = pose_compose(transform, state.poses[part_id])


def connect(
    state: AssemblyState,
    m: "FurnitureModel",
    t: AlignmentThresholds,
    pair: Optional[Tuple[str, str]] = None,
) -> List[ConnectEvent]:
    """Attempt one connection, mutating the state.

    With an explicit pair, connect it iff attachable. Without, connect the
    attachable pair with the smallest connector distance (ties break on the
    pair id). The moving side is the cursor-held group when exactly one side
    is held, otherwise the smaller group, then the lexicographically smaller
    root. Cursors holding a part of the moved group release it: the snap has
    yanked the part out of their cube.
    """
    if pair is not None:
        qa, qb = pair
        if not (m.has_connector(qa) and m.has_connector(qb)):
            raise KeyError(f"unknown connector pair ({qa!r}, {qb!r})")
        if pair_id(qa, qb) in state.connected_pairs:
            return [ConnectEvent("already_connected", pair=pair_id(qa, qb))]
        candidates = [c for c in scan_attachable(state, m, t) if pair_id(*c[0]) == pair_id(qa, qb)]
        if not candidates:
            return [ConnectEvent("not_attachable", pair=pair_id(qa, qb))]
        (qa, qb), result = candidates[0]
        if not result.attachable:
            return [ConnectEvent("not_attachable", pair=pair_id(qa, qb))]
    else:
        attachable = [c for c in scan_attachable(state, m, t) if c[1].attachable]
        if not attachable:
            return [ConnectEvent("no_op")]
        (qa, qb), result = min(attachable, key=lambda c: (c[1].distance, pair_id(*c[0])))

    pa = qa.split(".", 1)[0]
    pb = qb.split(".", 1)[0]
    root_a = state.weld.find(pa)
    root_b = state.weld.find(pb)
    held_roots = {
        state.weld.find(c.held) for c in state.cursors if c.held is not None and c.held in state.poses
    }
    a_held = root_a in held_roots
    b_held = root_b in held_roots
    if a_held != b_held:
        moving_root, moving_q, target_q = (root_a, qa, qb) if a_held else (root_b, qb, qa)
    elif state.weld.group_size(root_a) != state.weld.group_size(root_b):
        small_is_a = state.weld.group_size(root_a) < state.weld.group_size(root_b)
        moving_root, moving_q, target_q = (root_a, qa, qb) if small_is_a else (root_b, qb, qa)
    else:
        moving_root, moving_q, target_q = (root_a, qa, qb) if root_a < root_b else (root_b, qb, qa)

    frame_target = connector_world_frame(state, m, target_q)
    frame_moving = connector_world_frame(state, m, moving_q)
    transform = snap_transform(frame_target, frame_moving, m.pair_symmetry(qa, qb))
    moved_members = set(state.group_members(moving_root))
    apply_world_transform(state, moving_root, transform)
    state.weld.union(pa, pb)
    state.connected_pairs.add(pair_id(qa, qb))
    for cursor in state.cursors:
        if cursor.held is not None and cursor.held in moved_members:
            cursor.held = None
    return [
        ConnectEvent(
            "connected", pair=pair_id(qa, qb), moved_root=moving_root, distance=result.distance
        )
    ]


def collide(state: AssemblyState, m: "FurnitureModel", root: str) -> bool:
    """True iff any shape of the group strictly overlaps a shape of another group."""
    group = set(state.group_members(root))
    others = [pid for pid in state.poses if pid not in group]
    for gid in group:
        gpart = m.part(gid)
        gpose = state.poses[gid]
        for oid in others:
            opart = m.part(oid)
            opose = state.poses[oid]
            for sa in gpart.shapes:
                for sb in opart.shapes:
                    if shapes_overlap(sa, gpose, sb, opose):
                        return True
    return False
