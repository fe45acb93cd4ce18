"""Finite metric lattices, balls and F-functions."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnknownSite


@dataclass(frozen=True, eq=False)
class Lattice:
    """Sites ``0..n-1`` with local Hilbert dimensions and a distance table."""

    local_dims: tuple
    metric: np.ndarray
    dim_D: int = 1
    labels: tuple | None = None

    def __post_init__(self):
        M = np.asarray(self.metric, dtype=float)
        n = len(self.local_dims)
        if M.shape != (n, n):
            raise DimensionMismatch(f"metric shape {M.shape} does not match {n} sites")
        if not np.allclose(M, M.T) or np.any(np.diag(M) != 0) or np.any(M < 0):
            raise ValueError("metric must be symmetric, nonnegative and zero on the diagonal")
        if n and np.any(M[:, None, :] > M[:, :, None] + M[None, :, :] + 1e-12):
            raise ValueError("metric violates the triangle inequality")
        M.setflags(write=False)
        object.__setattr__(self, "metric", M)
        object.__setattr__(self, "local_dims", tuple(int(d) for d in self.local_dims))

    @property
    def n(self) -> int:
        return len(self.local_dims)

    @property
    def sites(self) -> tuple:
        return tuple(range(self.n))

    @property
    def dim(self) -> int:
        return int(np.prod(self.local_dims)) if self.n else 1

    @property
    def is_qubit(self) -> bool:
        return all(d == 2 for d in self.local_dims)

    def dist(self, i: int, j: int) -> float:
        return float(self.metric[i, j])

    def set_dist(self, A, B) -> float:
        A, B = list(A), list(B)
        if not A or not B:
            return math.inf
        return float(self.metric[np.ix_(A, B)].min())

    @property
    def diameter(self) -> float:
        return float(self.metric.max()) if self.n else 0.0

    def sublattice(self, sites) -> "Lattice":
        sites = list(sites)
        self.check_sites(sites)
        labels = tuple(self.labels[s] for s in sites) if self.labels else None
        return Lattice(tuple(self.local_dims[s] for s in sites), self.metric[np.ix_(sites, sites)],
                       self.dim_D, labels)

    def check_sites(self, A) -> None:
        for s in A:
            if not isinstance(s, (int, np.integer)) or s < 0 or s >= self.n:
                raise UnknownSite(s)

    def k_D(self) -> float:
        """max over sites i and integer radii r >= 1 of |B_r(i)| r^{-D}.

        Ball sizes only change at distances present in the table, and the
        ratio is maximised at the smallest radius reaching each size, so the
        finite scan over r = 1..ceil(diameter) is exact.
        """
        best = 0.0
        rmax = max(1, int(math.ceil(self.diameter)))
        for i in range(self.n):
            for r in range(1, rmax + 1):
                size = int(np.sum(self.metric[i] <= r))
                best = max(best, size / r ** self.dim_D)
        return best

    def to_dict(self) -> dict:
        return {"custom": self.metric.tolist(), "local_dims": list(self.local_dims), "D": self.dim_D}


def ball(lattice: Lattice, A, r: float) -> frozenset:
    """Sites within distance ``r`` of the set ``A``."""
    A = list(A)
    lattice.check_sites(A)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if not A:
        return frozenset()
    d = lattice.metric[A].min(axis=0)
    return frozenset(int(i) for i in np.nonzero(d <= r + 1e-12)[0])


def chain(n: int, local_dim: int = 2) -> Lattice:
    idx = np.arange(n)
    return Lattice((local_dim,) * n, np.abs(idx[:, None] - idx[None, :]).astype(float), 1)


def ring(n: int, local_dim: int = 2) -> Lattice:
    idx = np.arange(n)
    d = np.abs(idx[:, None] - idx[None, :])
    return Lattice((local_dim,) * n, np.minimum(d, n - d).astype(float), 1)


def grid(w: int, h: int, local_dim: int = 2) -> Lattice:
    """Row-major w x h grid with Manhattan distance."""
    xy = np.array([(i % w, i // w) for i in range(w * h)])
    M = np.abs(xy[:, None, :] - xy[None, :, :]).sum(axis=2).astype(float)
    return Lattice((local_dim,) * (w * h), M, 2)


def from_graph(n: int, edges, local_dim: int = 2, dim_D: int = 1) -> Lattice:
    """Shortest-path metric of an undirected graph with unit edges."""
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    M = np.full((n, n), np.inf)
    for s in range(n):
        M[s, s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if M[s, v] == np.inf:
                    M[s, v] = M[s, u] + 1
                    q.append(v)
    if np.isinf(M).any():
        raise ValueError("graph is disconnected")
    return Lattice((local_dim,) * n, M, dim_D)


def complete(n: int, local_dim: int = 2) -> Lattice:
    """All distinct sites at distance 1."""
    return Lattice((local_dim,) * n, 1.0 - np.eye(n), 1)


def custom(metric, local_dims=None, dim_D: int = 1) -> Lattice:
    M = np.asarray(metric, dtype=float)
    dims = tuple(local_dims) if local_dims is not None else (2,) * M.shape[0]
    return Lattice(dims, M, dim_D)


def from_config(cfg) -> Lattice:
    """Build from ``{"chain": n}``, ``{"ring": n}``, ``{"grid": [w, h]}`` or ``{"custom": matrix}``."""
    d = int(cfg.get("local_dim", 2))
    if "chain" in cfg:
        return chain(int(cfg["chain"]), d)
    if "ring" in cfg:
        return ring(int(cfg["ring"]), d)
    if "grid" in cfg:
        w, h = cfg["grid"]
        return grid(int(w), int(h), d)
    if "custom" in cfg:
        return custom(cfg["custom"], cfg.get("local_dims"), int(cfg.get("D", 1)))
    if "complete" in cfg:
        return complete(int(cfg["complete"]), d)
    raise ValueError(f"unrecognised lattice spec {cfg!r}")


@dataclass(frozen=True)
class FFunction:
    """Decay profile F(r); ``kind`` is ``"power"`` ((1+r)^-(D+1)) or ``"exp"`` (F_g)."""

    kind: str = "exp"
    D: int = 1
    a: float = 1.0
    prefactor: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "exp"):
            raise ValueError(f"unknown F kind {self.kind!r}")
        if self.kind == "exp" and self.a <= 0:
            raise ValueError("decay rate must be positive")
        if self.prefactor <= 0:
            raise ValueError("prefactor must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        val = (1.0 + r) ** (-(self.D + 1))
        if self.kind == "exp":
            val = val * np.exp(-self.a * r)
        out = self.prefactor * val
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "D": self.D, "a": self.a, "prefactor": self.prefactor}


def f_constants(F: FFunction, lattice: Lattice) -> tuple[float, float]:
    """(||F||, C_F) computed exactly over the finite lattice."""
    Fm = F(lattice.metric)
    Fm = np.atleast_2d(Fm)
    normF = float(Fm.sum(axis=1).max())
    C_F = float(((Fm @ Fm) / Fm).max())
    return normF, C_F


def normalize(F: FFunction, lattice: Lattice) -> FFunction:
    _, C_F = f_constants(F, lattice)
    return FFunction(F.kind, F.D, F.a, F.prefactor / C_F)
