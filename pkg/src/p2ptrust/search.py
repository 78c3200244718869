"""Trust- and community-aware query propagation.

A query spreads hop by hop.  Each peer forwards to ``(1 - prob_com) * N``
neighbors, so peers whose community links are saturated forward to a single
neighbor and the flood degenerates into a directed walk.  Neighbors are picked
community-first, content-match-first, most-trusted-first.  A peer drops any
packet handed to it by a sender it considers malicious, and any query whose
originator it considers malicious.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .adversary import will_respond
from .content import FileId
from .network import Network
from .overlay import OverlayGraph
from .reputation import TRUST_THRESHOLD, trust_value

Matcher = Callable[[int], bool]


@dataclass(frozen=True)
class QueryPacket:
    origin: int
    target: FileId | None  # None for hash-prefix lookups, which hide the category
    ttl: int
    path: tuple[int, ...]  # peers that already held this packet, origin first
    directed: bool = False  # directed walk: one next hop per peer

    @property
    def sender(self) -> int:
        return self.path[-1]


@dataclass(frozen=True)
class QueryResponse:
    responder: int
    target: FileId | None
    hops: int


def prob_com(graph: OverlayGraph, x: int) -> float:
    init = graph.initial_degree[x]
    p = (graph.degree(x) - init) / (init * (graph.edge_limit - 1.0))
    return min(1.0, max(0.0, p))


def fanout(p: float, contactable: int, max_fanout: int) -> int:
    """Number of neighbors to forward to, at least one whenever anyone is reachable."""
    if contactable <= 0:
        return 0
    n = min(contactable, max_fanout)
    return max(1, math.floor((1.0 - p) * n + 1e-9))


def select_neighbors(
    net: Network, x: int, packet: QueryPacket, k: int | None = None, *, resolve: bool = False
) -> list[int]:
    """Next hops for ``packet`` at ``x``; ``k`` defaults to the prob_com fanout.

    Tiers, in order: community neighbors sharing the query's category, other
    community neighbors, connectivity neighbors sharing the category, other
    connectivity neighbors.  Within a tier peers go by descending trust with
    random tie-breaks.  Distrusted, inactive and already-visited peers are
    skipped.  ``resolve`` lets ``x`` ask around about strangers (only the
    initiator does this); otherwise strangers count as neutral.
    """
    g = net.graph
    category = packet.target.category if packet.target is not None else None
    visited = set(packet.path)
    inactive = net.inactive
    comm = sorted(y for y in g.community[x] if y not in visited and y not in inactive)
    conn = sorted(y for y in g.connectivity[x] if y not in visited and y not in inactive)
    if k is None and packet.directed:
        k = 1 if comm or conn else 0
    elif k is None:
        k = fanout(prob_com(g, x), len(comm) + len(conn), net.config.max_fanout)
    if k <= 0:
        return []
    libraries = net.libraries
    cache = net.caches[x]
    rand = net.rng.random
    chosen: list[int] = []
    for members in (comm, conn):
        matching, other = [], []
        for y in members:
            if resolve:
                t = net.resolve_trust(x, y)
            else:
                rec = cache.peek(y)
                t = 0.5 if rec is None else trust_value(rec)
            if t < TRUST_THRESHOLD:
                continue
            entry = (-t, rand(), y)
            if category is not None and category in libraries[y].categories:
                matching.append(entry)
            else:
                other.append(entry)
        for tier in (matching, other):
            tier.sort()
            chosen.extend(y for _, _, y in tier[: k - len(chosen)])
            if len(chosen) >= k:
                return chosen
    return chosen


def forward_query(
    net: Network,
    packet: QueryPacket,
    receiver: int,
    seen: set[int],
    matcher: Matcher,
    query_id: int = 0,
) -> tuple[QueryResponse | None, list[tuple[QueryPacket, int]]]:
    """Handle ``packet`` arriving at ``receiver``; returns (response, outgoing packets)."""
    if receiver in seen or not net.is_active(receiver):
        return None, []
    seen.add(receiver)
    hop = len(packet.path)
    if (net.known_trust(receiver, packet.sender) < TRUST_THRESHOLD
            or net.known_trust(receiver, packet.origin) < TRUST_THRESHOLD):
        net.trace(query_id, hop, receiver, "block")
        return None, []
    response = None
    if matcher(receiver):
        response = QueryResponse(receiver, packet.target, hop)
        net.trace(query_id, hop, receiver, "respond")
    ttl = packet.ttl - 1
    if ttl <= 0:
        net.trace(query_id, hop, receiver, "die")
        return response, []
    onward = QueryPacket(packet.origin, packet.target, ttl, packet.path + (receiver,), packet.directed)
    hops = [y for y in select_neighbors(net, receiver, onward) if y not in seen]
    net.trace(query_id, hop, receiver, "forward" if hops else "die")
    return response, [(onward, y) for y in hops]


def default_matcher(net: Network, target: FileId) -> Matcher:
    return lambda x: will_respond(net.dispositions[x], net.libraries[x], target)


def initiate_query(
    net: Network,
    i: int,
    target: FileId | None,
    *,
    query_id: int = 0,
    matcher: Matcher | None = None,
    seen: set[int] | None = None,
) -> list[QueryResponse]:
    """Run one query from ``i`` to completion and collect every response.

    An initiator whose community links are at least half saturated launches
    a directed walk (one next hop per peer, ``dfs_ttl`` hops); any other
    initiator floods with the prob_com fanout for ``bfs_ttl`` hops.  Responses
    travel back along the reverse of the packet path; every peer on that path
    is active for the whole generation, so all of them arrive.
    ``seen`` (if given) is filled with every peer the query reached.
    """
    if matcher is None:
        matcher = default_matcher(net, target)
    directed = prob_com(net.graph, i) >= 0.5
    ttl = net.config.dfs_ttl if directed else net.config.bfs_ttl
    packet = QueryPacket(i, target, ttl, (i,), directed)
    first = select_neighbors(net, i, packet)
    net.trace(query_id, 0, i, "forward" if first else "die")
    seen = set() if seen is None else seen
    seen.add(i)
    responses: list[QueryResponse] = []
    frontier = [(packet, y) for y in first]
    while frontier:
        upcoming = []
        for pkt, peer in frontier:
            response, outgoing = forward_query(net, pkt, peer, seen, matcher, query_id)
            if response is not None:
                responses.append(response)
            upcoming.extend(outgoing)
        frontier = upcoming
    return responses
