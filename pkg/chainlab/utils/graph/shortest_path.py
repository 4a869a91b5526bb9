"""
Node-weighted shortest chains on an eps-graph.

Stepping from q to q' over distance d costs (lam * w(q) + (1 - lam) * w(q')) * d.
Ties are broken toward the smaller predecessor id so results are deterministic.
"""

import heapq
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from chainlab.schemas.space import EpsilonGraph
from chainlab.utils.numeric import step_cost


@dataclass
class ShortestChains:
    distance: np.ndarray
    predecessor: np.ndarray

    def chain_to(self, target: int) -> Tuple[int, ...]:
        """Walk predecessors back to a source; empty if unreachable."""
        if not np.isfinite(self.distance[target]):
            return ()
        path = [target]
        while self.predecessor[path[-1]] >= 0:
            path.append(int(self.predecessor[path[-1]]))
        return tuple(reversed(path))


def dijkstra(
    graph: EpsilonGraph,
    weights: np.ndarray,
    lam: float,
    sources: Dict[int, float],
    target: Optional[int] = None,
) -> ShortestChains:
    """Multi-source Dijkstra; each source starts at its own offset."""
    n = graph.n
    distance = np.full(n, np.inf)
    predecessor = np.full(n, -1, dtype=int)
    done = np.zeros(n, dtype=bool)
    heap: List[Tuple[float, int]] = []

    for node, offset in sorted(sources.items()):
        if offset < distance[node]:
            distance[node] = offset
            heapq.heappush(heap, (offset, node))

    while heap:
        d_u, u = heapq.heappop(heap)
        if done[u] or d_u > distance[u]:
            continue
        done[u] = True
        if u == target:
            break
        nbrs = graph.neighbors[u]
        if nbrs.size == 0:
            continue
        costs = step_cost(weights[u], weights[nbrs], graph.lengths[u], lam)
        for v, c in zip(nbrs.tolist(), costs.tolist()):
            if done[v] or not np.isfinite(c):
                continue
            candidate = d_u + c
            if candidate < distance[v] or (candidate == distance[v] and u < predecessor[v]):
                distance[v] = candidate
                predecessor[v] = u
                heapq.heappush(heap, (candidate, v))

    return ShortestChains(distance=distance, predecessor=predecessor)


@dataclass(order=True)
class Label:
    cost: float
    length: float
    node: int
    index: int = field(compare=True)
    parent: int = field(default=-1, compare=False)


@dataclass
class ConstrainedChain:
    cost: float
    chain: Tuple[int, ...]
    length: float
    exact: bool
    lower_bound: float
    labels_created: int


def dominates(a: Label, b: Label) -> bool:
    return a.cost <= b.cost and a.length <= b.length


def constrained_shortest_chain(
    graph: EpsilonGraph,
    weights: np.ndarray,
    lam: float,
    source: int,
    target: int,
    length_budget: float,
    time_budget_ms: Optional[int] = None,
) -> ConstrainedChain:
    """
    Cheapest chain source -> target with total length <= length_budget.

    Pareto label-setting over (cost, length). Labels are expanded by cost, so
    the first label settled at the target is optimal; when the time budget
    runs out the cost of the next unexpanded label is a certified lower bound.
    Cycles never help since both resources are nonnegative.
    """
    started = time.time()
    labels: List[Label] = [Label(0.0, 0.0, source, 0)]
    frontier: Dict[int, List[Label]] = {source: [labels[0]]}
    heap: List[Label] = [labels[0]]

    while heap:
        label = heapq.heappop(heap)
        if label.node == target:
            return ConstrainedChain(
                cost=label.cost,
                chain=_unwind(labels, label),
                length=label.length,
                exact=True,
                lower_bound=label.cost,
                labels_created=len(labels),
            )
        if time_budget_ms is not None and (time.time() - started) * 1000.0 > time_budget_ms:
            return ConstrainedChain(
                cost=float("inf"),
                chain=(),
                length=float("inf"),
                exact=False,
                lower_bound=label.cost,
                labels_created=len(labels),
            )
        if label not in frontier.get(label.node, []):
            continue

        u = label.node
        nbrs = graph.neighbors[u]
        if nbrs.size == 0:
            continue
        costs = step_cost(weights[u], weights[nbrs], graph.lengths[u], lam)
        for v, c, d in zip(nbrs.tolist(), costs.tolist(), graph.lengths[u].tolist()):
            new_length = label.length + d
            if new_length > length_budget or not np.isfinite(c):
                continue
            candidate = Label(label.cost + c, new_length, v, len(labels), label.index)
            existing = frontier.setdefault(v, [])
            if any(dominates(other, candidate) for other in existing):
                continue
            frontier[v] = [other for other in existing if not dominates(candidate, other)]
            frontier[v].append(candidate)
            labels.append(candidate)
            heapq.heappush(heap, candidate)

    return ConstrainedChain(
        cost=float("inf"),
        chain=(),
        length=float("inf"),
        exact=True,
        lower_bound=float("inf"),
        labels_created=len(labels),
    )


def _unwind(labels: Sequence[Label], label: Label) -> Tuple[int, ...]:
    path = [label.node]
    while label.parent >= 0:
        label = labels[label.parent]
        path.append(label.node)
    return tuple(reversed(path))
