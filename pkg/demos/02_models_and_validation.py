"""The furniture model format: parsing, validation, and goal queries."""

import json

from flatpack import (
    goal_relative_pose,
    list_bundled_models,
    load_bundled,
    parse_model,
    validate_model,
)
from flatpack.model import ModelFormatError

print("bundled models (name, parts, connectors):")
for row in list_bundled_models():
    print("  ", row)

table = load_bundled("table_simple")
print("\ntable parts:", [p.id for p in table.parts])
print("mate pairs:", table.mate_pairs())

# Where does leg1 sit, relative to the board, when its peg meets board.c1?
rel = goal_relative_pose(table, "board.c1", "leg1.peg")
print("leg1 goal pose in board frame:", rel.pos, rel.rot)

# The validator reports structured diagnostics rather than raising.
broken = {
    "name": "broken",
    "version": 1,
    "parts": [
        {
            "id": "a",
            "shapes": [{"kind": "box", "half_extents": [0.1, 0.1, 0.1]}],
            "connectors": [
                {"id": "c", "size": 0.02, "pos": [0, 0, 0.1], "quat": [1, 0, 0, 0],
                 "mate": "b.c"}
            ],
        },
        {
            "id": "b",
            "shapes": [{"kind": "box", "half_extents": [0.1, 0.1, -0.1]}],
            "connectors": [
                {"id": "c", "size": 0.02, "pos": [0, 0, -0.1], "quat": [1, 0, 0, 0],
                 "mate": "orphan.c"}
            ],
        },
        {"id": "floating", "shapes": [{"kind": "sphere", "radius": 0.05}]},
    ],
}
diags = validate_model(parse_model(json.dumps(broken)))
print("\nvalidator verdict: ok =", diags.ok)
for d in diags.errors:
    print(f"  error[{d.code}] {d.path}: {d.message}")

# The parser itself is strict: unknown keys, bad types, and malformed JSON
# all come back as located diagnostics, never as crashes.
try:
    parse_model(b'{"name": "x", "version": 1, "parts": [], "color": "red"}')
except ModelFormatError as e:
    print("\nstrict parser:", e)
