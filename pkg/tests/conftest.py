import json
import math

import pytest

from flatpack.assembly import AssemblyState
from flatpack.agents import CursorState
from flatpack.geom import IDENTITY_QUAT, Pose, Vec3, quat_from_axis_angle, UNIT_Z
from flatpack.model import load_bundled, parse_model

MINIMAL_DOC = {
    "name": "minimal",
    "version": 1,
    "parts": [
        {
            "id": "a",
            "shapes": [{"kind": "box", "half_extents": [0.05, 0.05, 0.05]}],
            "connectors": [
                {"id": "c", "size": 0.02, "pos": [0, 0, 0.05], "quat": [1, 0, 0, 0], "mate": "b.c"}
            ],
        },
        {
            "id": "b",
            "shapes": [{"kind": "box", "half_extents": [0.05, 0.05, 0.05]}],
            "connectors": [
                {"id": "c", "size": 0.02, "pos": [0, 0, -0.05], "quat": [1, 0, 0, 0], "mate": "a.c"}
            ],
        },
    ],
}


def minimal_doc_text(**overrides) -> str:
    doc = json.loads(json.dumps(MINIMAL_DOC))
    doc.update(overrides)
    return json.dumps(doc)


@pytest.fixture
def block_model():
    return load_bundled("block")


@pytest.fixture
def table_model():
    return load_bundled("table_simple")


@pytest.fixture
def minimal_model():
    return parse_model(minimal_doc_text())


def make_state(poses: dict, cursors=None) -> AssemblyState:
    if cursors is None:
        cursors = [CursorState(Vec3(-0.3, 0.0, 0.3)), CursorState(Vec3(0.3, 0.0, 0.3))]
    return AssemblyState.from_poses(poses, cursors)


def yaw_pose(x: float, y: float, z: float, yaw: float = 0.0) -> Pose:
    rot = quat_from_axis_angle(UNIT_Z, yaw) if yaw else IDENTITY_QUAT
    return Pose(Vec3(x, y, z), rot)


def pose_close(a: Pose, b: Pose, tol: float = 1e-9) -> bool:
    dp = max(abs(x - y) for x, y in zip(a.pos.as_tuple(), b.pos.as_tuple()))
    dq = max(abs(x - y) for x, y in zip(a.rot.as_tuple(), b.rot.as_tuple()))
    return dp <= tol and dq <= tol


def quat_angle(a, b) -> float:
    """Rotation angle between two unit quaternions.

    Computed from the vector part of the relative rotation (2 asin |v|),
    which stays well-conditioned for tiny angles where the acos-of-dot
    formula bottoms out near 1e-8.
    """
    from flatpack.geom import quat_conjugate, quat_mul

    d = quat_mul(quat_conjugate(a), b)
    v = math.sqrt(d.x * d.x + d.y * d.y + d.z * d.z)
    return 2.0 * math.asin(min(1.0, v))
