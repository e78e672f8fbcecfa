"""Disjoint-set partition tracking which parts are welded together.

Root election is deterministic: larger group wins, ties go to the
lexicographically smaller root. Digests and moving-group tie-breaks depend
on roots, so this must not vary with insertion order hashing.
"""

from __future__ import annotations

from typing import Dict, Iterable, List


class UnionFind:
    def __init__(self, items: Iterable[str] = ()):
        self._parent: Dict[str, str] = {}
        self._size: Dict[str, int] = {}
        for item in items:
            self.add(item)

    def add(self, item: str) -> None:
        if item not in self._parent:
            self._parent[item] = item
            self._size[item] = 1

    def find(self, item: str) -> str:
        root = item
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[item] != root:
            self._parent[item], item = root, self._parent[item]
        return root

    def union(self, a: str, b: str) -> str:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if (self._size[rb], ra) < (self._size[ra], rb):
            ra, rb = rb, ra
        # ra is now the loser: smaller group, or equal-sized with larger id.
        self._parent[ra] = rb
        self._size[rb] += self._size[ra]
        del self._size[ra]
        return rb

    def same(self, a: str, b: str) -> bool:
        return self.find(a) == self.find(b)

    def members(self, item: str) -> List[str]:
        root = self.find(item)
        return sorted(x for x in self._parent if self.find(x) == root)

    def group_size(self, item: str) -> int:
        return self._size[self.find(item)]

    def roots(self) -> List[str]:
        return sorted(self._size)

    def root_map(self) -> Dict[str, str]:
        return {item: self.find(item) for item in sorted(self._parent)}

    def items(self) -> List[str]:
        return sorted(self._parent)

    def copy(self) -> "UnionFind":
        out = UnionFind()
        out._parent = dict(self._parent)
        out._size = dict(self._size)
        return out
