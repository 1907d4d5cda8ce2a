"""Weighted retweet networks over a shared account registry.

One directed multigraph per tracked hashtag: an edge (i, j) with weight w
means account i retweeted account j w times inside that hashtag's stream.
All networks of a run share one AccountRegistry, so the same account keeps
the same integer index across networks and cross-network membership can be
compared index-for-index. Clustering consumes the symmetrized projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .ingest import TweetRecord, normalize_hashtag


class AccountRegistry:
    """Bijective account-id <-> dense index map, append-only within a run."""

    def __init__(self, ids: Iterable[str] = ()):
        self._ids: list[str] = []
        self._index: dict[str, int] = {}
        for account in ids:
            self.intern(account)

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, account: str) -> bool:
        return account in self._index

    def intern(self, account: str) -> int:
        """Return the index for account, assigning the next free one if new."""
        idx = self._index.get(account)
        if idx is None:
            idx = len(self._ids)
            self._index[account] = idx
            self._ids.append(account)
        return idx

    def index_of(self, account: str) -> int:
        return self._index[account]

    def id_of(self, index: int) -> str:
        return self._ids[index]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self._ids)

    def sorted_remap(self) -> tuple["AccountRegistry", list[int]]:
        """New registry sorted by account id plus the old->new index map.

        Applying the remap makes indices independent of insertion order,
        which is what keeps multi-stream builds deterministic.
        """
        order = sorted(range(len(self._ids)), key=self._ids.__getitem__)
        mapping = [0] * len(order)
        for new, old in enumerate(order):
            mapping[old] = new
        return AccountRegistry(self._ids[old] for old in order), mapping


@dataclass
class RetweetNetwork:
    """Directed weighted retweet graph for one hashtag.

    edges maps (retweeter, retweeted) index pairs to event counts; the sum
    of all weights equals the number of deduplicated retweet records in the
    stream. Self-edges cannot occur (self-retweets are rejected upstream).
    """

    hashtag: str
    nodes: set[int] = field(default_factory=set)
    edges: dict[tuple[int, int], int] = field(default_factory=dict)
    retweets_made: dict[int, int] = field(default_factory=dict)
    retweets_received: dict[int, int] = field(default_factory=dict)
    retweet_count: int = 0
    original_count: int = 0
    dedup_count: int = 0

    def made(self, node: int) -> int:
        return self.retweets_made.get(node, 0)

    def received(self, node: int) -> int:
        return self.retweets_received.get(node, 0)


def build_network(
    stream: Iterable[TweetRecord], registry: AccountRegistry, hashtag: str
) -> RetweetNetwork:
    """Build one hashtag's network from its stream.

    Every record must carry the hashtag. Duplicate tweet_ids are skipped
    (first occurrence wins) and counted as dedup events. Original tweets add
    their author as a node but no edge; an empty stream yields an empty
    network.
    """
    tag = normalize_hashtag(hashtag)
    net = RetweetNetwork(hashtag=tag)
    seen: set[str] = set()
    nodes = net.nodes
    edges = net.edges
    made = net.retweets_made
    received = net.retweets_received
    for record in stream:
        if tag not in record.hashtags:
            raise ValueError(
                f"record {record.tweet_id} does not carry #{tag}; stream is mixed"
            )
        if record.tweet_id in seen:
            net.dedup_count += 1
            continue
        seen.add(record.tweet_id)
        author = registry.intern(record.author)
        nodes.add(author)
        if record.retweeted_author is None:
            net.original_count += 1
            continue
        target = registry.intern(record.retweeted_author)
        nodes.add(target)
        key = (author, target)
        edges[key] = edges.get(key, 0) + 1
        made[author] = made.get(author, 0) + 1
        received[target] = received.get(target, 0) + 1
        net.retweet_count += 1
    return net


def remap_network(net: RetweetNetwork, mapping: list[int]) -> RetweetNetwork:
    """Apply an old->new index map (from AccountRegistry.sorted_remap)."""
    return RetweetNetwork(
        hashtag=net.hashtag,
        nodes={mapping[i] for i in net.nodes},
        edges={(mapping[i], mapping[j]): w for (i, j), w in net.edges.items()},
        retweets_made={mapping[i]: c for i, c in net.retweets_made.items()},
        retweets_received={mapping[i]: c for i, c in net.retweets_received.items()},
        retweet_count=net.retweet_count,
        original_count=net.original_count,
        dedup_count=net.dedup_count,
    )


def build_networks(
    streams: Mapping[str, Iterable[TweetRecord]],
    registry: AccountRegistry | None = None,
    sort_accounts: bool = True,
) -> tuple[dict[str, RetweetNetwork], AccountRegistry]:
    """Build all hashtag networks over one shared registry.

    With sort_accounts (the default) the registry is remapped to account-id
    order afterwards, so the result does not depend on the order streams
    were ingested in.
    """
    registry = registry if registry is not None else AccountRegistry()
    nets = {
        tag: build_network(stream, registry, tag) for tag, stream in sorted(streams.items())
    }
    if sort_accounts:
        registry, mapping = registry.sorted_remap()
        nets = {tag: remap_network(net, mapping) for tag, net in nets.items()}
    return nets, registry


class UndirectedGraph:
    """Symmetric weighted graph with optional self-loops.

    Self-loop weight is stored once per node and counts twice toward the
    node's strength, following the usual modularity convention.
    """

    def __init__(self):
        self._adj: dict[int, dict[int, float]] = {}
        self._self: dict[int, float] = {}

    def add_node(self, node: int) -> None:
        self._adj.setdefault(node, {})

    def add_edge(self, i: int, j: int, weight: float = 1.0) -> None:
        if i == j:
            self._adj.setdefault(i, {})
            self._self[i] = self._self.get(i, 0.0) + weight
            return
        row_i = self._adj.setdefault(i, {})
        row_j = self._adj.setdefault(j, {})
        row_i[j] = row_i.get(j, 0.0) + weight
        row_j[i] = row_j.get(i, 0.0) + weight

    @property
    def nodes(self) -> list[int]:
        return list(self._adj)

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, node: int) -> bool:
        return node in self._adj

    def neighbors(self, node: int) -> dict[int, float]:
        return self._adj[node]

    def self_loop(self, node: int) -> float:
        return self._self.get(node, 0.0)

    def strength(self, node: int) -> float:
        return sum(self._adj[node].values()) + 2.0 * self._self.get(node, 0.0)

    def edge_weight(self, i: int, j: int) -> float:
        if i == j:
            return self._self.get(i, 0.0)
        return self._adj.get(i, {}).get(j, 0.0)

    def total_weight(self) -> float:
        half = sum(w for row in self._adj.values() for w in row.values())
        return half / 2.0 + sum(self._self.values())


def undirected_projection(net: RetweetNetwork) -> UndirectedGraph:
    """Symmetrize a directed network: weight'(i,j) = w(i,j) + w(j,i)."""
    graph = UndirectedGraph()
    for node in net.nodes:
        graph.add_node(node)
    for (i, j), w in net.edges.items():
        graph.add_edge(i, j, float(w))
    return graph
