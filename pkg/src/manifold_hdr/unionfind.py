import numpy as np


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def labels(self) -> np.ndarray:
        """Component labels numbered 0.. in order of first appearance."""
        roots = [self.find(i) for i in range(len(self.parent))]
        seen: dict[int, int] = {}
        return np.array([seen.setdefault(r, len(seen)) for r in roots], dtype=int)


def components_from_pairs(n: int, pairs) -> tuple[int, np.ndarray]:
    uf = UnionFind(n)
    for i, j in pairs:
        uf.union(int(i), int(j))
    return uf.count, uf.labels()
