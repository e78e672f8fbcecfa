"""Qualified connector ids and canonical pair ids.

Leaf module: both the model schema and the assembly engine need these, and
neither should import the other for it.
"""

from __future__ import annotations

from typing import Tuple


def split_qualified(qualified: str) -> Tuple[str, str]:
    """Split "part.connector" into its components."""
    if qualified.count(".") != 1:
        raise KeyError(f"malformed qualified connector id {qualified!r}")
    part_id, conn_id = qualified.split(".")
    return part_id, conn_id


def pair_id(qa: str, qb: str) -> str:
    """Canonical id of a mate pair, order-independent."""
    return "|".join(sorted((qa, qb)))
