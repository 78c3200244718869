"""Small hand-built networks for unit tests."""

from __future__ import annotations

import random
from typing import Iterable

from p2ptrust.adversary import PeerDisposition, PeerKind
from p2ptrust.config import build_config
from p2ptrust.content import FileId, PeerLibrary
from p2ptrust.network import Network
from p2ptrust.overlay import OverlayGraph
from p2ptrust.reputation import Outcome, ReputationRecord, TrustCache, update_direct


def make_graph(
    n: int,
    connectivity: Iterable[tuple[int, int]],
    community: Iterable[tuple[int, int]] = (),
    edge_limit: float = 2.0,
) -> OverlayGraph:
    g = OverlayGraph(n=n, edge_limit=edge_limit)
    for i, j in connectivity:
        g.connectivity[i].add(j)
        g.connectivity[j].add(i)
    g.initial_degree = [len(s) for s in g.connectivity]
    for i, j in community:
        g.community[i].add(j)
        g.community[j].add(i)
    return g


def library(owner: int, categories: Iterable[int], files: Iterable[FileId] = ()) -> PeerLibrary:
    return PeerLibrary(owner, tuple(sorted(categories)), frozenset(files))


def make_net(
    graph: OverlayGraph,
    libraries: list[PeerLibrary] | None = None,
    malicious: Iterable[int] = (),
    *,
    model: str = "A",
    deception: float = 0.0,
    seed: int = 0,
    **overrides,
) -> Network:
    n = graph.n
    cfg = build_config(overrides={"peers": n, "ba_m": 1, "edge_limit": graph.edge_limit, **overrides})
    libs = libraries or [library(x, (1, 2, 3)) for x in range(n)]
    bad = set(malicious)
    kind = PeerKind.MALICIOUS_A if model == "A" else PeerKind.MALICIOUS_B
    disp = [PeerDisposition(kind if x in bad else PeerKind.HONEST, deception) for x in range(n)]
    caches = [TrustCache(cfg.trust_cache_size) for _ in range(n)]
    return Network(cfg, graph, list(libs), disp, caches, rng=random.Random(seed))


def record(authentic: int = 0, fake: int = 0) -> ReputationRecord:
    rec = ReputationRecord()
    for _ in range(authentic):
        rec = update_direct(rec, Outcome.AUTHENTIC)
    for _ in range(fake):
        rec = update_direct(rec, Outcome.FAKE)
    return rec


def remember(net: Network, observer: int, subject: int, authentic: int = 0, fake: int = 0) -> None:
    net.caches[observer].put(subject, record(authentic, fake))


# one "[PASS] criterion N: ..." line per acceptance check, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
