"""Integer transport problems solved exactly as min-cost flows."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, InfeasibleError, InvalidSpecError


class _Graph:
    def __init__(self, n_nodes: int):
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[float] = []

    def add_edge(self, u: int, v: int, cap: int, cost: float) -> int:
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        return len(self.to) - 2


def _shortest_path(g: _Graph, src: int, eps: float):
    n = len(g.adj)
    dist = [np.inf] * n
    prev = [-1] * n
    dist[src] = 0.0
    for _ in range(n - 1):
        changed = False
        for u in range(n):
            du = dist[u]
            if du == np.inf:
                continue
            for e in g.adj[u]:
                if g.cap[e] > 0:
                    v = g.to[e]
                    nd = du + g.cost[e]
                    if nd < dist[v] - eps:
                        dist[v] = nd
                        prev[v] = e
                        changed = True
        if not changed:
            break
    return dist, prev


def min_cost_flow(g: _Graph, src: int, sink: int, demand: int, eps: float) -> None:
    """Push ``demand`` units from ``src`` to ``sink`` along successive shortest paths."""
    sent = 0
    while sent < demand:
        dist, prev = _shortest_path(g, src, eps)
        if dist[sink] == np.inf:
            raise InfeasibleError(f"only {sent} of {demand} units can be routed")
        path = []
        v = sink
        while v != src:
            e = prev[v]
            path.append(e)
            v = g.to[e ^ 1]
            if len(path) > len(g.adj):
                raise RuntimeError("cycle in shortest-path tree")
        push = min(demand - sent, min(g.cap[e] for e in path))
        for e in path:
            g.cap[e] -= push
            g.cap[e ^ 1] += push
        sent += push


def solve_transport(cost, supplies, demands) -> np.ndarray:
    """Minimum-cost integer transport plan.

    Args:
        cost: ``(m, n)`` per-unit costs. ``+inf`` marks a forbidden cell.
        supplies: Length-m positive integers (row sums).
        demands: Length-n positive integers (column sums).

    Returns:
        ``(m, n)`` float array of integer flows. Flatten row-major to get the
        action vector.

    Raises:
        InvalidSpecError: if the marginals do not balance.
        InfeasibleError: if forbidden cells leave no feasible plan.
    """
    c = np.asarray(cost, dtype=float)
    s = np.asarray(supplies).reshape(-1)
    t = np.asarray(demands).reshape(-1)
    if c.shape != (s.shape[0], t.shape[0]):
        raise DimensionError(f"cost has shape {c.shape}, expected {(s.shape[0], t.shape[0])}")
    if np.any(s < 0) or np.any(t < 0):
        raise InvalidSpecError("marginals must be nonnegative")
    if s.sum() != t.sum():
        raise InvalidSpecError(f"unbalanced marginals: {s.sum()} supplied, {t.sum()} demanded")
    if np.any(np.isnan(c)) or np.any(c == -np.inf):
        raise InvalidSpecError("costs must be finite or +inf")
    m, n = c.shape
    finite = c[np.isfinite(c)]
    eps = 1e-12 * (1.0 + (np.abs(finite).max() if finite.size else 0.0))

    src, sink = m + n, m + n + 1
    g = _Graph(m + n + 2)
    for i in range(m):
        g.add_edge(src, i, int(s[i]), 0.0)
    cells = {}
    for i in range(m):
        for j in range(n):
            if np.isfinite(c[i, j]):
                cells[i, j] = g.add_edge(i, m + j, int(min(s[i], t[j])), float(c[i, j]))
    for j in range(n):
        g.add_edge(m + j, sink, int(t[j]), 0.0)

    min_cost_flow(g, src, sink, int(s.sum()), eps)
    plan = np.zeros((m, n))
    for (i, j), e in cells.items():
        plan[i, j] = g.cap[e ^ 1]
    return plan
