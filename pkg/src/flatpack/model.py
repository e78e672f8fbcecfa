"""Furniture description documents: schema, parser, validator, goal queries.

A model is a UTF-8 JSON document (extension ``.furn.json``) declaring parts
built from convex primitives, named connector frames on those parts, and a
one-to-one mating between connectors. The mating edges define the goal
assembly; bundled models keep that graph a tree.

Part and connector ids may not contain ``.`` or ``|``; those characters
separate qualified ids ("part.connector") and pair ids.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Tuple, Union

from .assembly import AlignmentThresholds
from .model_ids import pair_id, split_qualified
from .geom import (
    GeometryError,
    IDENTITY_POSE,
    Pose,
    UnitQuat,
    Vec3,
    pose_compose,
    pose_inverse,
    quat_normalize,
    quat_rotate,
)

MODEL_SUFFIX = ".furn.json"
MODEL_PATH_ENV = "FLATPACK_MODEL_PATH"
_ID_FORBIDDEN = set(".|")


class ModelError(Exception):
    """Base for all model-document failures."""


class ModelSyntaxError(ModelError):
    """Document is not well-formed JSON/UTF-8. Carries line and column."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ModelFormatError(ModelError):
    """Document is valid JSON but violates the schema. Carries the JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ModelNotFoundError(ModelError):
    """Named or pathed model does not exist."""


class NotMatesError(ModelError):
    """Goal query on two connectors that are not declared mates."""


@dataclass(frozen=True)
class ConvexShape:
    kind: str  # "box" | "sphere"
    offset: Pose = IDENTITY_POSE
    half_extents: Optional[Vec3] = None  # box only
    radius: Optional[float] = None  # sphere only


@dataclass(frozen=True)
class Connector:
    id: str
    size: float
    local: Pose
    mate: str  # qualified "part.connector"
    symmetry_order: int = 1


@dataclass(frozen=True)
class Part:
    id: str
    shapes: Tuple[ConvexShape, ...]
    connectors: Tuple[Connector, ...] = ()


@dataclass(frozen=True)
class FurnitureModel:
    name: str
    version: int
    parts: Tuple[Part, ...]
    thresholds: Optional[AlignmentThresholds] = None

    def part(self, part_id: str) -> Part:
        for p in self.parts:
            if p.id == part_id:
                return p
        raise KeyError(f"unknown part {part_id!r}")

    def connector(self, qualified: str) -> Tuple[Part, Connector]:
        part_id, conn_id = split_qualified(qualified)
        p = self.part(part_id)
        for c in p.connectors:
            if c.id == conn_id:
                return p, c
        raise KeyError(f"unknown connector {qualified!r}")

    def has_connector(self, qualified: str) -> bool:
        try:
            self.connector(qualified)
            return True
        except KeyError:
            return False

    def qualified_connectors(self) -> List[str]:
        return sorted(f"{p.id}.{c.id}" for p in self.parts for c in p.connectors)

    def mate_pairs(self) -> List[Tuple[str, str]]:
        """All declared mate pairs as sorted (low, high) qualified-id tuples."""
        pairs = set()
        for p in self.parts:
            for c in p.connectors:
                qid = f"{p.id}.{c.id}"
                pairs.add(tuple(sorted((qid, c.mate))))
        return sorted(pairs)  # type: ignore[return-value]

    def pair_symmetry(self, qa: str, qb: str) -> int:
        _, ca = self.connector(qa)
        _, cb = self.connector(qb)
        return max(ca.symmetry_order, cb.symmetry_order)

    def goal_adjacency(self) -> Dict[str, List[Tuple[str, str, str]]]:
        """Part adjacency from mate pairs: part -> [(neighbor, own conn qid, their conn qid)]."""
        adj: Dict[str, List[Tuple[str, str, str]]] = {p.id: [] for p in self.parts}
        for qa, qb in self.mate_pairs():
            pa = qa.split(".", 1)[0]
            pb = qb.split(".", 1)[0]
            if pa in adj and pb in adj and pa != pb:
                adj[pa].append((pb, qa, qb))
                adj[pb].append((pa, qb, qa))
        for lst in adj.values():
            lst.sort()
        return adj


@dataclass(frozen=True)
class Diagnostic:
    code: str
    path: str
    message: str


@dataclass
class Diagnostics:
    errors: List[Diagnostic] = field(default_factory=list)
    warnings: List[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, code: str, path: str, message: str) -> None:
        self.errors.append(Diagnostic(code, path, message))

    def warn(self, code: str, path: str, message: str) -> None:
        self.warnings.append(Diagnostic(code, path, message))


# --------------------------------------------------------------------------
# Parsing


def _reject_constant(name: str) -> float:
    raise ValueError(f"non-finite literal {name}")


class _Walker:
    """Strict schema walker with JSON-path error reporting."""

    def __init__(self, doc: object):
        self.doc = doc

    @staticmethod
    def fail(path: str, message: str) -> "ModelFormatError":
        return ModelFormatError(path, message)

    def obj(self, value: object, path: str, required: set, optional: set) -> dict:
        if not isinstance(value, dict):
            raise self.fail(path, f"expected object, got {_kind(value)}")
        for key in value:
            if key not in required and key not in optional:
                raise self.fail(f"{path}.{key}", "unknown field")
        for key in required:
            if key not in value:
                raise self.fail(path, f"missing required field {key!r}")
        return value

    def string(self, value: object, path: str) -> str:
        if not isinstance(value, str):
            raise self.fail(path, f"expected string, got {_kind(value)}")
        return value

    def ident(self, value: object, path: str) -> str:
        s = self.string(value, path)
        if not s or any(ch in _ID_FORBIDDEN or ch.isspace() for ch in s):
            raise self.fail(path, f"invalid id {s!r} (nonempty, no '.', '|', or whitespace)")
        return s

    def integer(self, value: object, path: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.fail(path, f"expected integer, got {_kind(value)}")
        return value

    def real(self, value: object, path: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.fail(path, f"expected number, got {_kind(value)}")
        out = float(value)
        if out != out or out in (float("inf"), float("-inf")):
            raise self.fail(path, "non-finite number")
        return out

    def reals(self, value: object, path: str, n: int) -> List[float]:
        if not isinstance(value, list) or len(value) != n:
            raise self.fail(path, f"expected array of {n} numbers")
        return [self.real(v, f"{path}[{i}]") for i, v in enumerate(value)]

    def vec3(self, value: object, path: str) -> Vec3:
        v = self.reals(value, path, 3)
        return Vec3(v[0], v[1], v[2])

    def quat(self, value: object, path: str) -> UnitQuat:
        v = self.reals(value, path, 4)
        try:
            return quat_normalize((v[0], v[1], v[2], v[3]))
        except GeometryError:
            raise self.fail(path, "degenerate quaternion (near-zero norm)") from None

    def array(self, value: object, path: str) -> list:
        if not isinstance(value, list):
            raise self.fail(path, f"expected array, got {_kind(value)}")
        return value


def _kind(value: object) -> str:
    return {dict: "object", list: "array", str: "string", bool: "boolean", int: "number",
            float: "number", type(None): "null"}.get(type(value), type(value).__name__)


def parse_model(text: Union[bytes, str]) -> FurnitureModel:
    """Parse a furniture document. Raises ModelSyntaxError or ModelFormatError.

    The returned model has defaults filled in and quaternions normalized.
    Cross-reference rules (mating involution, connectivity) are the job of
    validate_model, not the parser.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ModelSyntaxError(1, 1, f"invalid UTF-8 at byte {e.start}") from None
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ModelSyntaxError(e.lineno, e.colno, e.msg) from None
    except ValueError as e:
        raise ModelSyntaxError(1, 1, str(e)) from None
    except RecursionError:
        raise ModelSyntaxError(1, 1, "document nesting too deep") from None

    w = _Walker(doc)
    top = w.obj(doc, "$", {"name", "version", "parts"}, {"thresholds"})
    name = w.string(top["name"], "$.name")
    version = w.integer(top["version"], "$.version")
    if version != 1:
        raise w.fail("$.version", f"unsupported version {version} (expected 1)")

    thresholds = None
    if "thresholds" in top:
        t = w.obj(top["thresholds"], "$.thresholds", set(), {"distance", "up", "forward"})
        base = AlignmentThresholds()
        thresholds = AlignmentThresholds(
            epsilon_distance=w.real(t["distance"], "$.thresholds.distance")
            if "distance" in t else base.epsilon_distance,
            epsilon_up=w.real(t["up"], "$.thresholds.up") if "up" in t else base.epsilon_up,
            epsilon_forward=w.real(t["forward"], "$.thresholds.forward")
            if "forward" in t else base.epsilon_forward,
        )
        if thresholds.epsilon_distance <= 0.0:
            raise w.fail("$.thresholds.distance", "distance threshold must be positive")

    parts: List[Part] = []
    seen_parts: set = set()
    for i, raw_part in enumerate(w.array(top["parts"], "$.parts")):
        ppath = f"$.parts[{i}]"
        pobj = w.obj(raw_part, ppath, {"id", "shapes"}, {"connectors"})
        pid = w.ident(pobj["id"], f"{ppath}.id")
        if pid in seen_parts:
            raise w.fail(f"{ppath}.id", f"duplicate part id {pid!r}")
        seen_parts.add(pid)

        shapes: List[ConvexShape] = []
        raw_shapes = w.array(pobj["shapes"], f"{ppath}.shapes")
        if not raw_shapes:
            raise w.fail(f"{ppath}.shapes", "part needs at least one shape")
        for j, raw_shape in enumerate(raw_shapes):
            spath = f"{ppath}.shapes[{j}]"
            shapes.append(_parse_shape(w, raw_shape, spath))

        connectors: List[Connector] = []
        seen_conns: set = set()
        for j, raw_conn in enumerate(w.array(pobj.get("connectors", []), f"{ppath}.connectors")):
            cpath = f"{ppath}.connectors[{j}]"
            conn = _parse_connector(w, raw_conn, cpath)
            if conn.id in seen_conns:
                raise w.fail(f"{cpath}.id", f"duplicate connector id {conn.id!r}")
            seen_conns.add(conn.id)
            connectors.append(conn)

        parts.append(Part(pid, tuple(shapes), tuple(connectors)))

    return FurnitureModel(name=name, version=version, parts=tuple(parts), thresholds=thresholds)


def _parse_shape(w: _Walker, raw: object, path: str) -> ConvexShape:
    obj = w.obj(raw, path, {"kind"}, {"half_extents", "radius", "pos", "quat"})
    kind = w.string(obj["kind"], f"{path}.kind")
    pos = w.vec3(obj["pos"], f"{path}.pos") if "pos" in obj else Vec3(0.0, 0.0, 0.0)
    quat = w.quat(obj["quat"], f"{path}.quat") if "quat" in obj else quat_normalize((1, 0, 0, 0))
    offset = Pose(pos, quat)
    if kind == "box":
        if "half_extents" not in obj:
            raise w.fail(path, "box shape needs half_extents")
        if "radius" in obj:
            raise w.fail(f"{path}.radius", "box shape cannot have a radius")
        return ConvexShape("box", offset, half_extents=w.vec3(obj["half_extents"], f"{path}.half_extents"))
    if kind == "sphere":
        if "radius" not in obj:
            raise w.fail(path, "sphere shape needs radius")
        if "half_extents" in obj:
            raise w.fail(f"{path}.half_extents", "sphere shape cannot have half_extents")
        return ConvexShape("sphere", offset, radius=w.real(obj["radius"], f"{path}.radius"))
    raise w.fail(f"{path}.kind", f"unknown shape kind {kind!r}")


def _parse_connector(w: _Walker, raw: object, path: str) -> Connector:
    obj = w.obj(raw, path, {"id", "size", "pos", "quat", "mate"}, {"symmetry_order"})
    cid = w.ident(obj["id"], f"{path}.id")
    size = w.real(obj["size"], f"{path}.size")
    if size < 0.0:
        raise w.fail(f"{path}.size", "size must be non-negative")
    local = Pose(w.vec3(obj["pos"], f"{path}.pos"), w.quat(obj["quat"], f"{path}.quat"))
    mate = w.string(obj["mate"], f"{path}.mate")
    if mate.count(".") != 1 or not all(mate.split(".")):
        raise w.fail(f"{path}.mate", f"mate must be 'part.connector', got {mate!r}")
    order = 1
    if "symmetry_order" in obj:
        order = w.integer(obj["symmetry_order"], f"{path}.symmetry_order")
        if order < 1:
            raise w.fail(f"{path}.symmetry_order", "symmetry_order must be >= 1")
    return Connector(cid, size, local, mate, order)


# --------------------------------------------------------------------------
# Validation


def validate_model(m: FurnitureModel) -> Diagnostics:
    """Cross-reference and geometric sanity checks. Errors empty <=> model usable."""
    diags = Diagnostics()
    qualified = {f"{p.id}.{c.id}": c for p in m.parts for c in p.connectors}

    if len(m.parts) < 2:
        diags.error("not-assemblable", "$.parts", f"model has {len(m.parts)} part(s), needs >= 2")

    for pi, p in enumerate(m.parts):
        for si, s in enumerate(p.shapes):
            spath = f"$.parts[{pi}].shapes[{si}]"
            if s.kind == "box":
                he = s.half_extents
                if he is None or min(he.x, he.y, he.z) <= 0.0:
                    diags.error("nonpositive-extents", spath, f"box half_extents must be positive, got {he}")
            elif s.radius is None or s.radius <= 0.0:
                diags.error("nonpositive-extents", spath, f"sphere radius must be positive, got {s.radius}")
            _check_quat(diags, s.offset.rot, f"{spath}.quat")
        for ci, c in enumerate(p.connectors):
            cpath = f"$.parts[{pi}].connectors[{ci}]"
            qid = f"{p.id}.{c.id}"
            _check_quat(diags, c.local.rot, f"{cpath}.quat")
            if c.mate == qid or c.mate.split(".", 1)[0] == p.id:
                diags.error("self-mate", f"{cpath}.mate", f"{qid} mates its own part ({c.mate})")
            elif c.mate not in qualified:
                diags.error("unknown-mate", f"{cpath}.mate", f"{qid} mates nonexistent {c.mate}")
            elif qualified[c.mate].mate != qid:
                diags.error(
                    "non-involutive-mating",
                    f"{cpath}.mate",
                    f"{qid} mates {c.mate}, but {c.mate} mates {qualified[c.mate].mate}",
                )
            _warn_embedded(diags, p, c, cpath)

    if len(m.parts) >= 2:
        adj = m.goal_adjacency()
        start = min(adj)
        seen = {start}
        queue = [start]
        while queue:
            for nb, _, _ in adj[queue.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        missing = sorted(set(adj) - seen)
        if missing:
            diags.error(
                "disconnected-goal",
                "$.parts",
                "goal assembly does not reach: " + ", ".join(missing),
            )
    return diags


def _check_quat(diags: Diagnostics, q: UnitQuat, path: str) -> None:
    n = (q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z) ** 0.5
    if abs(n - 1.0) > 1e-6:
        diags.error("non-unit-quat", path, f"quaternion norm {n} beyond tolerance")


def _warn_embedded(diags: Diagnostics, part: Part, conn: Connector, path: str) -> None:
    """Warn when a connector sits deeper than its size inside one of its part's shapes."""
    p = conn.local.pos
    for s in part.shapes:
        inv = pose_inverse(s.offset)
        q = inv.pos + quat_rotate(inv.rot, p)
        if s.kind == "sphere" and s.radius is not None:
            depth = s.radius - q.norm()
        elif s.half_extents is not None:
            he = s.half_extents
            depth = min(he.x - abs(q.x), he.y - abs(q.y), he.z - abs(q.z))
        else:
            continue
        if depth > conn.size:
            diags.warn(
                "embedded-connector",
                path,
                f"connector {conn.id!r} is {depth:.4f} m inside a shape (size {conn.size})",
            )
            return


# --------------------------------------------------------------------------
# Goal queries


def goal_relative_pose(m: FurnitureModel, a: str, b: str) -> Pose:
    """Pose of b's part in a's part frame when both connector frames coincide."""
    _, ca = m.connector(a)
    _, cb = m.connector(b)
    if ca.mate != b or cb.mate != a:
        raise NotMatesError(f"{a} and {b} are not mates")
    return pose_compose(ca.local, pose_inverse(cb.local))


# --------------------------------------------------------------------------
# Serialization and bundled models


def model_to_dict(m: FurnitureModel) -> dict:
    doc: dict = {"name": m.name, "version": m.version}
    if m.thresholds is not None:
        doc["thresholds"] = {
            "distance": m.thresholds.epsilon_distance,
            "up": m.thresholds.epsilon_up,
            "forward": m.thresholds.epsilon_forward,
        }
    doc["parts"] = []
    for p in m.parts:
        shapes = []
        for s in p.shapes:
            d: dict = {"kind": s.kind}
            if s.kind == "box":
                d["half_extents"] = list(s.half_extents.as_tuple())
            else:
                d["radius"] = s.radius
            d["pos"] = list(s.offset.pos.as_tuple())
            d["quat"] = list(s.offset.rot.as_tuple())
            shapes.append(d)
        conns = []
        for c in p.connectors:
            conns.append(
                {
                    "id": c.id,
                    "size": c.size,
                    "pos": list(c.local.pos.as_tuple()),
                    "quat": list(c.local.rot.as_tuple()),
                    "mate": c.mate,
                    "symmetry_order": c.symmetry_order,
                }
            )
        doc["parts"].append({"id": p.id, "shapes": shapes, "connectors": conns})
    return doc


def serialize_model(m: FurnitureModel) -> str:
    return json.dumps(model_to_dict(m), indent=2) + "\n"


def _bundled_dir():
    return resources.files("flatpack") / "models"


def list_bundled_models() -> List[Tuple[str, int, int]]:
    """(name, part count, connector count) for each bundled model, sorted by name."""
    out = []
    for entry in _bundled_dir().iterdir():
        if entry.name.endswith(MODEL_SUFFIX):
            m = parse_model(entry.read_bytes())
            out.append((m.name, len(m.parts), sum(len(p.connectors) for p in m.parts)))
    return sorted(out)


def load_bundled(name: str) -> FurnitureModel:
    entry = _bundled_dir() / f"{name}{MODEL_SUFFIX}"
    try:
        data = entry.read_bytes()
    except (FileNotFoundError, IsADirectoryError):
        raise ModelNotFoundError(f"no bundled model named {name!r}") from None
    return parse_model(data)


def resolve_model(spec: str) -> FurnitureModel:
    """Load a model by bundled name or file path.

    Anything containing a path separator or ending in .furn.json is a path;
    bare names search the FLATPACK_MODEL_PATH directories, then the bundle.
    """
    if os.sep in spec or spec.endswith(MODEL_SUFFIX):
        try:
            with open(spec, "rb") as f:
                return parse_model(f.read())
        except OSError as e:
            raise ModelNotFoundError(f"cannot read model file {spec!r}: {e}") from None
    search = os.environ.get(MODEL_PATH_ENV, "")
    for directory in filter(None, search.split(":")):
        candidate = os.path.join(directory, spec + MODEL_SUFFIX)
        if os.path.isfile(candidate):
            with open(candidate, "rb") as f:
                return parse_model(f.read())
    return load_bundled(spec)
