"""Source selection after a search, and the topology changes it triggers."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator

from .adversary import serve_decision
from .content import FileId
from .network import Network
from .reputation import NEUTRAL, TRUST_THRESHOLD, Outcome, trust_value, update_direct
from .search import QueryResponse


@dataclass(frozen=True)
class DownloadAttempt:
    requester: int
    provider: int
    target: FileId
    outcome: Outcome


def approve_link(net: Network, i: int, j: int) -> bool:
    """Provider ``j`` decides whether to accept a community link from requester ``i``."""
    g = net.graph
    if not (g.has_capacity(i) and g.has_capacity(j)):
        return False
    return net.resolve_trust(j, i) >= TRUST_THRESHOLD


def rewire(net: Network, i: int, j: int, outcome: Outcome) -> str:
    """Adapt the (i, j) link after a download; returns ``add``, ``del`` or ``none``."""
    g = net.graph
    if outcome is Outcome.FAKE:
        if g.remove_community_edge(i, j):
            net.counters.edges_deleted += 1
            return "del"
        return "none"
    if g.adjacent(i, j) or net.rng.random() > net.config.degree_of_rewiring:
        return "none"
    if approve_link(net, i, j) and g.add_community_edge(i, j):
        net.counters.edges_added += 1
        return "add"
    return "none"


def prune_distrusted(net: Network, i: int) -> list[int]:
    """Drop i's community links to neighbors it now rates below the trust threshold.

    Neighbors missing from i's history are checked with a poll of i's other
    community neighbors (no DFS), so a link that was approved blindly goes as
    soon as the community reports badly on the other end.
    """
    dropped = []
    for k in sorted(net.graph.community[i]):
        if net.is_active(k) and net.resolve_trust(i, k, escalate=False) < TRUST_THRESHOLD:
            net.graph.remove_community_edge(i, k)
            net.counters.edges_deleted += 1
            dropped.append(k)
            if net.adaptation_log is not None:
                net.adaptation_log.append((i, k, "audit", "del"))
    return dropped


def download(net: Network, i: int, j: int, target: FileId) -> DownloadAttempt:
    """Fetch from ``j``, verify, and record the outcome in i's cache."""
    outcome = serve_decision(net.dispositions[j], net.graph, j, net.rng)
    cache = net.caches[i]
    cache.put(j, update_direct(cache.get(j) or NEUTRAL, outcome, net.config.recency_rho))
    return DownloadAttempt(i, j, target, outcome)


def rank_providers(net: Network, i: int, providers: Iterable[int]) -> Iterator[int]:
    """Yield providers ``i`` is willing to use, most trusted first (random among equals).

    Strangers start at the neutral score and are only asked about (trust
    query) once they reach the front of the queue; the answer puts them back
    in their proper place.  Anyone below the trust threshold is dropped.
    """
    heap = []
    for k in sorted(set(providers)):
        rec = net.caches[i].peek(k)
        known = rec is not None
        t = trust_value(rec) if known else 0.5
        heap.append((-t, net.rng.random(), k, known))
    heapq.heapify(heap)
    while heap:
        neg_t, tie, k, known = heapq.heappop(heap)
        if not known:
            t = trust_value(net.resolve(i, k))
            if heap and (-t, tie) > heap[0][:2]:
                heapq.heappush(heap, (-t, tie, k, True))
                continue
            neg_t = -t
        if -neg_t >= TRUST_THRESHOLD:
            yield k


def process_responses(net: Network, i: int, responses: Iterable[QueryResponse]) -> list[DownloadAttempt]:
    """Download from the best-trusted provider, falling back down the list until authentic."""
    responses = list(responses)
    if not responses:
        return []
    target = responses[0].target
    attempts = []
    for j in rank_providers(net, i, (r.responder for r in responses)):
        attempt = download(net, i, j, target)
        attempts.append(attempt)
        action = rewire(net, i, j, attempt.outcome)
        if net.adaptation_log is not None:
            net.adaptation_log.append((i, j, attempt.outcome.value, action))
        if attempt.outcome is Outcome.AUTHENTIC:
            break
    return attempts
