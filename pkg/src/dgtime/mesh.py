"""Time partitions and the affine maps to the reference interval."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TimeMesh", "uniform_mesh"]


@dataclass(frozen=True)
class TimeMesh:
    """Partition t_0 < t_1 < ... < t_N; interval n is I_n = (t_{n-1}, t_n)."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("mesh needs at least two nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        return self.nodes.size - 1

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def kmax(self) -> float:
        return float(np.max(self.steps))

    def _check_index(self, n: int):
        if not 1 <= n <= self.N:
            raise ValueError(f"interval index {n} outside 1..{self.N}")

    def to_physical(self, n: int, tau):
        """Map reference coordinates in [-1, 1] onto interval n."""
        self._check_index(n)
        a, b = self.nodes[n - 1], self.nodes[n]
        return 0.5 * ((1.0 - np.asarray(tau)) * a + (1.0 + np.asarray(tau)) * b)

    def to_reference(self, n: int, t):
        """Inverse of to_physical on interval n."""
        self._check_index(n)
        a, b = self.nodes[n - 1], self.nodes[n]
        return (2.0 * np.asarray(t) - (a + b)) / (b - a)

    def interval_of(self, t: float) -> int:
        """Index n with t in (t_{n-1}, t_n]; break points belong to the left."""
        if not self.nodes[0] < t <= self.nodes[-1]:
            raise ValueError(f"time {t} outside ({self.nodes[0]}, {self.nodes[-1]}]")
        return int(np.searchsorted(self.nodes, t, side="left"))


def uniform_mesh(T: float, N: int) -> TimeMesh:
    """Uniform partition of (0, T] into N steps of size T / N."""
    if T <= 0:
        raise ValueError("final time must be positive")
    if N < 1:
        raise ValueError("interval count must be at least 1")
    return TimeMesh(np.arange(N + 1) * (T / N))
