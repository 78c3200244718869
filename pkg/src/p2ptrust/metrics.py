"""Per-generation performance metrics, split by peer class.

Path-based metrics (closeness centrality, average shortest path distance) use
community links only and substitute a fixed long length for unreachable pairs.
They are computed against a sample of peers to keep the cost linear in N.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

CLASSES = ("honest", "malicious", "all")
METRIC_COLUMNS = ("peers", "searches", "ar", "ear", "qmr", "ric", "cc", "clc", "aspd", "tqpo")


@dataclass(frozen=True)
class SearchRecord:
    initiator: int
    malicious: bool
    attempts: int  # downloads tried
    authentic: bool  # the last attempt produced the authentic file
    private: bool = False

    @property
    def reciprocal_cost(self) -> float:
        """1 / attempts needed for the authentic file, 0 when none was obtained."""
        return 1.0 / self.attempts if self.authentic else 0.0


def attempt_ratio(searches: Iterable[SearchRecord]) -> float | None:
    eligible = [s for s in searches if s.attempts > 0]
    if not eligible:
        return None
    return sum(1 for s in eligible if s.authentic and s.attempts == 1) / len(eligible)


def _mean_reciprocal_per_peer(searches: Iterable[SearchRecord]) -> list[float]:
    per_peer: dict[int, list[float]] = {}
    for s in searches:
        if s.attempts > 0:
            per_peer.setdefault(s.initiator, []).append(s.reciprocal_cost)
    return [sum(v) / len(v) for _, v in sorted(per_peer.items())]


def effective_attempt_ratio(searches: Iterable[SearchRecord]) -> float | None:
    """100 x (mean good-peer 1/P - mean malicious-peer 1/P); absent if a class is missing."""
    searches = list(searches)
    good = _mean_reciprocal_per_peer(s for s in searches if not s.malicious)
    bad = _mean_reciprocal_per_peer(s for s in searches if s.malicious)
    if not good or not bad:
        return None
    return 100.0 * (sum(good) / len(good) - sum(bad) / len(bad))


def query_miss_ratio(searches: Sequence[SearchRecord]) -> float | None:
    if not searches:
        return None
    return sum(1 for s in searches if not s.authentic) / len(searches)


def bfs_lengths(adj: Sequence[set[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def closeness_centrality(adj: Sequence[set[int]], i: int, others: Iterable[int], unreachable: int = 15) -> float:
    dist = bfs_lengths(adj, i)
    total = sum(dist.get(j, unreachable) for j in others if j != i)
    return 1.0 / total if total else 0.0


def clustering_coefficient(adj: Sequence[set[int]], i: int) -> float | None:
    """Fraction of neighbor pairs that are themselves linked; None below two neighbors."""
    nbrs = adj[i]
    k = len(nbrs)
    if k < 2:
        return None
    links = sum(len(adj[y] & nbrs) for y in nbrs) // 2
    return 2.0 * links / (k * (k - 1))


def largest_connected_component(adj: Sequence[set[int]], members: Iterable[int]) -> float:
    """Percentage of ``members`` in the largest component of the subgraph they induce."""
    members = set(members)
    if not members:
        raise ValueError("no peers share this category")
    best = 0
    unseen = set(members)
    while unseen:
        root = unseen.pop()
        size = 1
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y in unseen:
                    unseen.discard(y)
                    size += 1
                    queue.append(y)
        best = max(best, size)
    return 100.0 * best / len(members)


def sample_distances(adj: Sequence[set[int]], sample: Sequence[int], unreachable: int) -> np.ndarray:
    """Community path lengths from every sampled peer to every peer, shape (len(sample), n)."""
    n = len(adj)
    rows = [i for i in range(n) for _ in adj[i]]
    cols = [j for i in range(n) for j in adj[i]]
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    dist = shortest_path(graph, directed=False, unweighted=True, indices=list(sample))
    dist[np.isinf(dist)] = unreachable
    return dist


def class_aspd(dist: np.ndarray, sample: Sequence[int], peers: Sequence[int]) -> float | None:
    """Mean community distance between distinct peers of one class.

    Rows of ``dist`` are the sampled peers; pairs run from each sampled class
    member to every other class member.
    """
    members = np.zeros(dist.shape[1], dtype=bool)
    members[list(peers)] = True
    rows = [r for r, s in enumerate(sample) if members[s]]
    if not rows:
        return None
    pairs = len(rows) * (int(members.sum()) - 1)
    if pairs <= 0:
        return None
    return float(dist[rows][:, members].sum() / pairs)  # self-distances are 0


@dataclass
class ClassMetrics:
    peers: int = 0
    searches: int = 0
    ar: float | None = None
    ear: float | None = None
    qmr: float | None = None
    ric: float | None = None
    cc: float | None = None
    clc: float | None = None
    aspd: float | None = None
    tqpo: int = 0


@dataclass
class MetricsReport:
    generation: int
    classes: dict[str, ClassMetrics]
    lcc: dict[int, float] = field(default_factory=dict)
    ear: float | None = None


def _mean(values: Sequence[float]) -> float | None:
    return float(sum(values) / len(values)) if values else None


def compute_report(
    generation: int,
    community: Sequence[set[int]],
    degrees: Sequence[int],
    initial_degrees: Sequence[int],
    malicious: Sequence[bool],
    categories_of: Sequence[Iterable[int]],
    n_categories: int,
    searches: Sequence[SearchRecord],
    tqpo: Sequence[int],
    sample: Sequence[int],
    unreachable: int = 15,
) -> MetricsReport:
    """Evaluate every metric on a frozen end-of-generation snapshot."""
    n = len(community)
    members = {
        "honest": [x for x in range(n) if not malicious[x]],
        "malicious": [x for x in range(n) if malicious[x]],
        "all": list(range(n)),
    }
    dist = sample_distances(community, sample, unreachable)
    col_sums = dist.sum(axis=0)
    cc = np.where(col_sums > 0, 1.0 / np.where(col_sums > 0, col_sums, 1.0), 0.0)
    clc = [clustering_coefficient(community, x) for x in range(n)]
    ear = effective_attempt_ratio(searches)

    classes = {}
    for name, peers in members.items():
        mine = [s for s in searches if name == "all" or s.malicious == (name == "malicious")]
        m = ClassMetrics(peers=len(peers), searches=len(mine), ear=ear)
        m.ar = attempt_ratio(mine)
        m.qmr = query_miss_ratio(mine)
        if peers:
            idx = np.asarray(peers)
            m.ric = float(np.mean([degrees[x] / initial_degrees[x] for x in peers]))
            m.cc = float(cc[idx].mean())
            m.aspd = class_aspd(dist, sample, peers)
            m.clc = _mean([clc[x] for x in peers if clc[x] is not None])
        m.tqpo = sum(tqpo) if name == "all" else tqpo[int(name == "malicious")]
        classes[name] = m

    holders: dict[int, list[int]] = {c: [] for c in range(1, n_categories + 1)}
    for x in range(n):
        for c in categories_of[x]:
            holders[c].append(x)
    lcc = {c: largest_connected_component(community, xs) for c, xs in holders.items() if xs}
    return MetricsReport(generation, classes, lcc, ear)


def _fmt(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_metrics_header(out: TextIO) -> None:
    out.write(",".join(("generation", "peer_class") + METRIC_COLUMNS) + "\n")


def write_metrics_rows(out: TextIO, report: MetricsReport) -> None:
    for name in CLASSES:
        m = report.classes[name]
        cells = [str(report.generation), name] + [_fmt(getattr(m, col)) for col in METRIC_COLUMNS]
        out.write(",".join(cells) + "\n")


def write_lcc_header(out: TextIO) -> None:
    out.write("generation,category,lcc_pct\n")


def write_lcc_rows(out: TextIO, report: MetricsReport) -> None:
    for c, pct in sorted(report.lcc.items()):
        out.write(f"{report.generation},{c},{pct:.6f}\n")


def read_metrics(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
