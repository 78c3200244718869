"""Mutable simulation state shared by search, adaptation and privacy."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .adversary import PeerDisposition
from .config import SimConfig
from .content import FileId, PeerLibrary
from .overlay import OverlayGraph
from .reputation import NEUTRAL, ReputationRecord, TrustCache, trust_query, trust_value


@dataclass
class Counters:
    """Per-generation tallies that the metrics need but cannot see in the final graph."""

    dfs_trust_queries: list[int] = field(default_factory=lambda: [0, 0])  # [honest, malicious]
    edges_added: int = 0
    edges_deleted: int = 0


@dataclass
class Network:
    config: SimConfig
    graph: OverlayGraph
    libraries: list[PeerLibrary]
    dispositions: list[PeerDisposition]
    caches: list[TrustCache]
    rng: random.Random
    inactive: frozenset[int] = frozenset()
    counters: Counters = field(default_factory=Counters)
    query_trace: list[tuple[int, int, int, str]] | None = None
    adaptation_log: list[tuple[int, int, str, str]] | None = None

    @property
    def n(self) -> int:
        return self.graph.n

    def is_active(self, x: int) -> bool:
        return x not in self.inactive

    def is_malicious(self, x: int) -> bool:
        return self.dispositions[x].malicious

    def shares(self, x: int, category: int) -> bool:
        return self.libraries[x].shares(category)

    def holds(self, x: int, target: FileId) -> bool:
        return target in self.libraries[x].files

    def known_trust(self, observer: int, subject: int) -> float:
        """Trust from the observer's cache only; strangers are neutral."""
        rec = self.caches[observer].peek(subject)
        return 0.5 if rec is None else trust_value(rec)

    def resolve(self, observer: int, subject: int, *, escalate: bool = True) -> ReputationRecord:
        """Record of ``subject`` in the observer's view, asking around when unknown.

        The cache holds first-hand transaction history only.  Second-hand
        answers are used for the decision at hand and not stored, so the next
        lookup hears the latest reports.
        """
        rec = self.caches[observer].get(subject)
        if rec is not None:
            return rec
        result = trust_query(
            observer,
            subject,
            self.graph.community,
            self.graph.neighbors,
            self.caches,
            dfs_ttl=self.config.dfs_ttl,
            rng=self.rng,
            active=self.is_active,
            escalate=escalate,
        )
        if result.escalated:
            self.counters.dfs_trust_queries[int(self.is_malicious(observer))] += 1
        return result.record

    def resolve_trust(self, observer: int, subject: int, *, escalate: bool = True) -> float:
        return trust_value(self.resolve(observer, subject, escalate=escalate))

    def trace(self, query_id: int, hop: int, peer: int, action: str) -> None:
        if self.query_trace is not None:
            self.query_trace.append((query_id, hop, peer, action))
