"""flatpack: a deterministic kinematic furniture-assembly simulator.

Rigid parts carrying typed connector frames are moved, aligned, and welded
by two floating cube cursors under a Gym-style step protocol. Includes a
declarative model format, seeded domain randomization, a scripted assembly
policy, trajectory recording with exact replay, and a WebSocket protocol
server with a browser teleoperation client.
"""

from ._version import ENGINE, __version__
from .agents import (
    ActionError,
    AgentEvent,
    CursorCommand,
    CursorConfig,
    CursorState,
    Workspace,
    apply_cursor_command,
    decode_action,
    holdable_parts,
)
from .assembly import (
    AlignmentThresholds,
    AssemblyState,
    AttachabilityResult,
    ConnectEvent,
    DEFAULT_THRESHOLDS,
    WorldConnectorFrame,
    check_alignment,
    collide,
    connect,
    connector_world_frame,
    scan_attachable,
    snap_transform,
    transform_group,
)
from .env import (
    BadActionError,
    Env,
    EnvError,
    EpisodeConfig,
    InvalidConfigError,
    NotResetError,
    Observation,
    PlacementError,
    RewardConfig,
    StepResult,
    UnknownModelError,
    compute_reward,
    is_success,
    make,
    randomize_layout,
)
from .geom import (
    GeometryError,
    Pose,
    UnitQuat,
    Vec3,
    cosine_similarity,
    euclidean_distance,
    euler_increment,
    pose_compose,
    pose_inverse,
    quat_mul,
    quat_normalize,
    quat_rotate,
)
from .model import (
    Connector,
    ConvexShape,
    Diagnostics,
    FurnitureModel,
    ModelError,
    ModelFormatError,
    ModelNotFoundError,
    ModelSyntaxError,
    NotMatesError,
    Part,
    goal_relative_pose,
    list_bundled_models,
    load_bundled,
    pair_id,
    parse_model,
    resolve_model,
    serialize_model,
    validate_model,
)
from .oracle import (
    AssemblyPlan,
    DisconnectedSubsetError,
    OracleOutcome,
    OracleProgress,
    oracle_step,
    plan,
    run_oracle,
)
from .record import (
    ReplayReport,
    TrajectoryError,
    TrajectoryWriter,
    record_episode,
    replay_check,
    state_digest,
)
from .rng import CounterRng
from .server import FlatpackServer, FlatpackService, ServerThread
