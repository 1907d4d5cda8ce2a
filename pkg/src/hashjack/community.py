"""Community detection by greedy modularity optimization (Louvain method).

Two-phase scheme: local moving of nodes between communities while the
weighted modularity

    Q = sum_c [ W_c / m - gamma * (S_c / 2m)^2 ]

improves (W_c: weight inside community c, S_c: total strength of its nodes,
m: total edge weight, gamma: resolution), then aggregation of communities
into supernodes, repeated until no local move helps. Unlike the common
library implementations, runs here are fully reproducible: node traversal
is shuffled by a seeded PRNG per level, candidate communities are evaluated
in ascending community id, and a move is only accepted on strict
improvement (delta Q > 1e-12).

References
----------
.. [1] Blondel V.D., Guillaume J.-L., Lambiotte R., Lefebvre E. (2008)
   Fast unfolding of communities in large networks. J. Stat. Mech.
   doi:10.1088/1742-5468/2008/10/P10008
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from .errors import EdgelessGraphError
from .graph import UndirectedGraph

# A move must beat staying put by more than this (in modularity units).
MIN_GAIN = 1e-12


@dataclass(frozen=True)
class CommunityPartition:
    """Assignment of nodes to dense 0-based community ids.

    modularity is recomputed from the graph at the end of the run, so
    recomputing it again from (graph, assignment) reproduces the stored
    value exactly. level_modularity holds Q after each aggregation level.
    """

    assignment: dict[int, int]
    modularity: float
    resolution: float
    seed: int
    levels: int
    level_modularity: tuple[float, ...] = ()

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> dict[int, list[int]]:
        """Community id -> sorted member nodes."""
        groups: dict[int, list[int]] = {}
        for node, cid in self.assignment.items():
            groups.setdefault(cid, []).append(node)
        return {cid: sorted(members) for cid, members in sorted(groups.items())}

    def members(self, cid: int) -> set[int]:
        return {node for node, c in self.assignment.items() if c == cid}


def modularity(
    graph: UndirectedGraph, assignment: Mapping[int, int], resolution: float = 1.0
) -> float:
    """Weighted modularity of a partition; raises on an edgeless graph."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    m = graph.total_weight()
    if m <= 0:
        raise EdgelessGraphError("modularity is undefined on an edgeless graph")
    for node in graph.nodes:
        if node not in assignment:
            raise ValueError(f"node {node} has no community assignment")
    within: dict[int, float] = {}
    strength: dict[int, float] = {}
    for node in graph.nodes:
        cid = assignment[node]
        strength[cid] = strength.get(cid, 0.0) + graph.strength(node)
        loop = graph.self_loop(node)
        if loop:
            within[cid] = within.get(cid, 0.0) + loop
        for other, w in graph.neighbors(node).items():
            if other > node and assignment[other] == cid:
                within[cid] = within.get(cid, 0.0) + w
    two_m = 2.0 * m
    q = 0.0
    for cid, s in strength.items():
        q += within.get(cid, 0.0) / m - resolution * (s / two_m) ** 2
    return q


def _local_move(
    adj: list[list[tuple[int, float]]],
    selfw: list[float],
    m: float,
    resolution: float,
    rng: random.Random,
) -> tuple[list[int], bool, float]:
    """One level of local moving over a compact 0..n-1 node space.

    Returns (community of each node, whether any move was accepted, total
    modularity gain of the accepted moves). Community ids start as node
    ids; ties between equally good candidates resolve to the lowest id.
    """
    n = len(adj)
    order = list(range(n))
    rng.shuffle(order)
    comm = list(range(n))
    strength = [sum(w for _, w in row) + 2.0 * s for row, s in zip(adj, selfw)]
    tot = strength.copy()
    two_m = 2.0 * m
    threshold = MIN_GAIN * m
    moved_any = False
    gain_total = 0.0
    improved = True
    while improved:
        improved = False
        for v in order:
            c0 = comm[v]
            kv = strength[v]
            link: dict[int, float] = {}
            for u, w in adj[v]:
                cu = comm[u]
                link[cu] = link.get(cu, 0.0) + w
            tot[c0] -= kv
            factor = resolution * kv / two_m
            g_stay = link.get(c0, 0.0) - tot[c0] * factor
            best_g = g_stay
            best_c = c0
            for c in sorted(link):
                if c == c0:
                    continue
                g = link[c] - tot[c] * factor
                if g > best_g:
                    best_g = g
                    best_c = c
            if best_c != c0 and best_g - g_stay > threshold:
                comm[v] = best_c
                tot[best_c] += kv
                gain_total += (best_g - g_stay) / m
                improved = True
                moved_any = True
            else:
                tot[c0] += kv
    return comm, moved_any, gain_total


def _aggregate(
    adj: list[list[tuple[int, float]]],
    selfw: list[float],
    comm: list[int],
    relabel: dict[int, int],
) -> tuple[list[list[tuple[int, float]]], list[float]]:
    k = len(relabel)
    new_adj: list[dict[int, float]] = [{} for _ in range(k)]
    new_selfw = [0.0] * k
    for v, row in enumerate(adj):
        cv = relabel[comm[v]]
        new_selfw[cv] += selfw[v]
        for u, w in row:
            if u <= v:
                continue
            cu = relabel[comm[u]]
            if cu == cv:
                new_selfw[cv] += w
            else:
                new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
                new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
    return [sorted(row.items()) for row in new_adj], new_selfw


def louvain(
    graph: UndirectedGraph, resolution: float = 1.0, seed: int = 42
) -> CommunityPartition:
    """Greedy modularity clustering, deterministic given (graph, resolution, seed).

    Nodes are compacted in ascending node-id order before the seeded level
    shuffle, so the result depends only on the graph's structure and ids,
    not on construction order.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    m = graph.total_weight()
    if m <= 0:
        raise EdgelessGraphError("community detection needs at least one edge")
    node_ids = sorted(graph.nodes)
    pos = {node: i for i, node in enumerate(node_ids)}
    adj: list[list[tuple[int, float]]] = [
        sorted((pos[u], w) for u, w in graph.neighbors(node).items()) for node in node_ids
    ]
    selfw = [graph.self_loop(node) for node in node_ids]

    rng = random.Random(seed)
    membership = list(range(len(node_ids)))  # original compact node -> level node
    levels = 0
    level_q: list[float] = []
    while True:
        comm, moved, _ = _local_move(adj, selfw, m, resolution, rng)
        if not moved:
            break
        levels += 1
        relabel = {label: idx for idx, label in enumerate(sorted(set(comm)))}
        membership = [relabel[comm[v]] for v in membership]
        level_q.append(
            modularity(
                graph,
                {node: membership[i] for i, node in enumerate(node_ids)},
                resolution,
            )
        )
        adj, selfw = _aggregate(adj, selfw, comm, relabel)

    if levels == 0:
        assignment = {node: i for i, node in enumerate(node_ids)}
    else:
        assignment = {node: membership[i] for i, node in enumerate(node_ids)}
    q = modularity(graph, assignment, resolution)
    return CommunityPartition(
        assignment=assignment,
        modularity=q,
        resolution=resolution,
        seed=seed,
        levels=levels,
        level_modularity=tuple(level_q),
    )
