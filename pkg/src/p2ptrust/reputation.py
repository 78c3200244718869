"""Beta reputation bookkeeping and second-hand trust resolution.

A record ``(alpha, beta)`` counts authentic and fake downloads; the trust value
is the mean of ``Beta(alpha + 1, beta + 1)``.  Recommendations are merged with
belief discounting: the weight given to recommender ``k`` grows with how much
the observer already trusts ``k``.
"""

from __future__ import annotations

import enum
import random
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

TRUST_THRESHOLD = 0.5
DEFAULT_CACHE_SIZE = 32


class Outcome(str, enum.Enum):
    AUTHENTIC = "authentic"
    FAKE = "fake"


@dataclass(frozen=True)
class ReputationRecord:
    alpha: float = 0.0
    beta: float = 0.0

    @property
    def trust(self) -> float:
        return trust_value(self)

    @property
    def is_vacuous(self) -> bool:
        return self.alpha == 0 and self.beta == 0


NEUTRAL = ReputationRecord()


def trust_value(rec: ReputationRecord) -> float:
    return (rec.alpha + 1.0) / (rec.alpha + rec.beta + 2.0)


def is_trustworthy(rec: ReputationRecord) -> bool:
    return trust_value(rec) >= TRUST_THRESHOLD


def update_direct(rec: ReputationRecord, outcome: Outcome, rho: float = 1.0) -> ReputationRecord:
    """First-hand update; ``rho < 1`` decays old evidence before counting the new one."""
    alpha, beta = rec.alpha * rho, rec.beta * rho
    if outcome is Outcome.AUTHENTIC:
        return ReputationRecord(alpha + 1.0, beta)
    return ReputationRecord(alpha, beta + 1.0)


def merge_indirect(
    r_ij: ReputationRecord, r_ik: ReputationRecord, r_kj: ReputationRecord
) -> ReputationRecord:
    """Fold k's report about j into i's record of j, discounted by i's record of k."""
    denom = (r_ik.beta + 2.0) * (r_kj.alpha + r_kj.beta + 2.0) + 2.0 * r_ik.alpha
    scale = 2.0 * r_ik.alpha / denom
    return ReputationRecord(r_ij.alpha + scale * r_kj.alpha, r_ij.beta + scale * r_kj.beta)


class TrustCache:
    """Bounded LRU map of peer -> record.

    ``get`` and ``put`` mark the entry as most recently used; ``peek`` reads
    without touching recency.
    """

    def __init__(self, capacity: int = DEFAULT_CACHE_SIZE):
        self.capacity = capacity
        self._entries: OrderedDict[int, ReputationRecord] = OrderedDict()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, peer: int) -> bool:
        return peer in self._entries

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def items(self):
        return self._entries.items()

    def peek(self, peer: int) -> ReputationRecord | None:
        return self._entries.get(peer)

    def get(self, peer: int) -> ReputationRecord | None:
        rec = self._entries.get(peer)
        if rec is not None:
            self._entries.move_to_end(peer)
        return rec

    def put(self, peer: int, rec: ReputationRecord) -> None:
        self._entries[peer] = rec
        self._entries.move_to_end(peer)
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)

    def clear(self) -> None:
        self._entries.clear()


@dataclass
class TrustQueryResult:
    record: ReputationRecord
    hops: int
    escalated: bool
    recommenders: tuple[int, ...] = ()


def _peek(caches: Sequence[TrustCache], observer: int, subject: int) -> ReputationRecord:
    return caches[observer].peek(subject) or NEUTRAL


def trust_query(
    i: int,
    j: int,
    community: Sequence[set[int]],
    neighbors: Callable[[int], set[int]],
    caches: Sequence[TrustCache],
    *,
    dfs_ttl: int,
    rng: random.Random,
    active: Callable[[int], bool] = lambda _: True,
    escalate: bool = True,
) -> TrustQueryResult:
    """Second-hand reputation of ``j`` as seen from ``i``.

    Phase 1 polls i's community neighbors (in id order) and merges every
    report.  If none of them knows ``j``, phase 2 walks one directed DFS of at
    most ``dfs_ttl`` hops without backtracking, always stepping to the
    neighbor the current walker trusts most; the first peer on the walk that
    knows ``j`` answers.  Its report is discounted by i's trust in it, which
    for a peer several hops away is the chain of records along the walk.
    With ``escalate`` false the query stops after phase 1.
    """
    start = caches[i].peek(j) or NEUTRAL
    merged = start
    recommenders = []
    for k in sorted(community[i]):
        if k == j or not active(k):
            continue
        r_kj = caches[k].peek(j)
        if r_kj is not None:
            merged = merge_indirect(merged, _peek(caches, i, k), r_kj)
            recommenders.append(k)
    if recommenders or not escalate:
        return TrustQueryResult(merged, 1 if recommenders else 0, False, tuple(recommenders))

    visited = {i, j}
    walker = i
    via = NEUTRAL  # i's effective record of the current walker
    hops = 0
    while hops < dfs_ttl:
        options = sorted(k for k in neighbors(walker) if k not in visited and active(k))
        if not options:
            break
        view = caches[walker]
        best = max(options, key=lambda k: (trust_value(view.peek(k) or NEUTRAL), rng.random()))
        step = view.peek(best) or NEUTRAL
        via = step if walker == i else merge_indirect(NEUTRAL, via, step)
        walker = best
        visited.add(best)
        hops += 1
        r_kj = caches[best].peek(j)
        if r_kj is not None:
            return TrustQueryResult(merge_indirect(start, via, r_kj), hops, True, (best,))
    return TrustQueryResult(start, hops, True)
