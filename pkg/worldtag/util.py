from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any, Dict, Hashable, Iterable, List, Sequence, Tuple


# Order statistics -------------------------------------------------------------
def median_pair(values: Sequence[float]) -> Tuple[float, float]:
    """Return (lower, upper) middle values; both are the median for odd n."""
    if not values:
        raise ValueError("median of an empty sample")
    ordered = sorted(values)
    n = len(ordered)
    if n % 2:
        return ordered[n // 2], ordered[n // 2]
    return ordered[n // 2 - 1], ordered[n // 2]


# Disjoint sets ----------------------------------------------------------------
class DisjointSet:
    """Union-find with path halving; roots are the smallest-inserted members."""

    def __init__(self, items: Iterable[Hashable] = ()):
        self._parent: Dict[Hashable, Hashable] = {}
        self._order: Dict[Hashable, int] = {}
        for item in items:
            self.add(item)

    def add(self, item: Hashable) -> None:
        if item not in self._parent:
            self._parent[item] = item
            self._order[item] = len(self._order)

    def find(self, item: Hashable) -> Hashable:
        parent = self._parent
        while parent[item] != item:
            parent[item] = parent[parent[item]]
            item = parent[item]
        return item

    def union(self, a: Hashable, b: Hashable) -> Hashable:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        # keep the earlier-inserted root so groups are numbered stably
        if self._order[rb] < self._order[ra]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        return ra

    def groups(self) -> List[List[Hashable]]:
        """Members grouped by root, in insertion order of the roots and members."""
        grouped: Dict[Hashable, List[Hashable]] = {}
        for item in self._parent:
            grouped.setdefault(self.find(item), []).append(item)
        return list(grouped.values())


# Hashing ----------------------------------------------------------------------
def digest_files(paths: Iterable[Path]) -> str:
    """SHA-256 over the concatenated bytes of the given files, in order."""
    h = hashlib.sha256()
    for path in paths:
        h.update(Path(path).read_bytes())
    return h.hexdigest()


# Presentation -----------------------------------------------------------------
def round_floats(value: Any, digits: int) -> Any:
    """Recursively round floats inside dicts/lists; ints and strings pass through."""
    if isinstance(value, float):
        return round(value, digits)
    if isinstance(value, dict):
        return {k: round_floats(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v, digits) for v in value]
    return value
