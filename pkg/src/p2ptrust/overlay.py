"""Overlay graph with immutable connectivity links and adaptive community links.

Peers are dense integer ids ``0..n-1``.  Connectivity links come from the
initial power-law graph and are never removed; community links are added and
deleted by topology adaptation, subject to the relative-increase-in-connectivity
cap (``degree / initial_degree <= edge_limit``).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .errors import ParameterError

# Slack for comparing degree ratios against a float cap.
_EPS = 1e-9


@dataclass
class OverlayGraph:
    n: int
    edge_limit: float = 2.0
    connectivity: list[set[int]] = field(default_factory=list)
    community: list[set[int]] = field(default_factory=list)
    initial_degree: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.connectivity:
            self.connectivity = [set() for _ in range(self.n)]
        if not self.community:
            self.community = [set() for _ in range(self.n)]
        if not self.initial_degree:
            self.initial_degree = [len(s) for s in self.connectivity]

    @property
    def peers(self) -> range:
        return range(self.n)

    def _check_peer(self, x: int) -> None:
        if not 0 <= x < self.n:
            raise ParameterError(f"unknown peer {x}")

    def degree(self, x: int) -> int:
        return len(self.connectivity[x]) + len(self.community[x])

    def neighbors(self, x: int) -> set[int]:
        return self.connectivity[x] | self.community[x]

    def adjacent(self, i: int, j: int) -> bool:
        return j in self.connectivity[i] or j in self.community[i]

    def is_community_edge(self, i: int, j: int) -> bool:
        return j in self.community[i]

    def ric(self, x: int) -> float:
        return self.degree(x) / self.initial_degree[x]

    def has_capacity(self, x: int, extra: int = 1) -> bool:
        """True if ``x`` can take ``extra`` more links without breaking the cap."""
        return self.degree(x) + extra <= self.edge_limit * self.initial_degree[x] + _EPS

    def add_community_edge(self, i: int, j: int) -> bool:
        self._check_peer(i)
        self._check_peer(j)
        if i == j:
            raise ParameterError("community edge endpoints must differ")
        if self.adjacent(i, j):
            return False
        if not (self.has_capacity(i) and self.has_capacity(j)):
            return False
        self.community[i].add(j)
        self.community[j].add(i)
        return True

    def remove_community_edge(self, i: int, j: int) -> bool:
        """Delete community link (i, j) if present; connectivity links are untouched."""
        if not (0 <= i < self.n and 0 <= j < self.n) or j not in self.community[i]:
            return False
        self.community[i].discard(j)
        self.community[j].discard(i)
        return True

    def edges(self, kind: str = "C") -> list[tuple[int, int]]:
        adj = self.connectivity if kind == "C" else self.community
        return [(i, j) for i in range(self.n) for j in sorted(adj[i]) if i < j]

    def community_edge_count(self) -> int:
        return sum(len(s) for s in self.community) // 2

    def check_invariants(self, initial_connectivity: Iterable[tuple[int, int]] | None = None) -> list[str]:
        """Return a list of human-readable invariant violations (empty when sound)."""
        problems = []
        for x in range(self.n):
            if x in self.connectivity[x] or x in self.community[x]:
                problems.append(f"self-loop at {x}")
            overlap = self.connectivity[x] & self.community[x]
            if overlap:
                problems.append(f"parallel edges at {x}: {sorted(overlap)}")
            for y in self.community[x]:
                if x not in self.community[y]:
                    problems.append(f"asymmetric community edge {x}-{y}")
            if self.degree(x) > self.edge_limit * self.initial_degree[x] + _EPS:
                problems.append(f"RIC({x}) = {self.ric(x):.3f} exceeds {self.edge_limit}")
        if initial_connectivity is not None and set(initial_connectivity) != set(self.edges("C")):
            problems.append("connectivity edge set changed")
        return problems

    def write_edges(self, out: TextIO) -> None:
        """Dump as ``<i> <j> <C|M>`` lines (C = connectivity, M = community)."""
        for kind, tag in (("C", "C"), ("M", "M")):
            for i, j in self.edges(kind):
                out.write(f"{i} {j} {tag}\n")


def generate_power_law(n: int, m: int, seed: int, edge_limit: float = 2.0) -> OverlayGraph:
    """Barabasi-Albert graph grown from an (m+1)-clique, all links as connectivity links.

    Each new node attaches to ``m`` distinct existing nodes chosen with
    probability proportional to their current degree.
    """
    if m < 1 or n < m + 1:
        raise ParameterError(f"need m >= 1 and n >= m + 1, got n={n}, m={m}")
    rng = random.Random(seed)
    conn: list[set[int]] = [set() for _ in range(n)]
    # Each node appears once per incident edge end, so uniform draws are degree-proportional.
    ends: list[int] = []
    for i in range(m + 1):
        for j in range(i + 1, m + 1):
            conn[i].add(j)
            conn[j].add(i)
            ends += (i, j)
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[rng.randrange(len(ends))])
        for t in sorted(targets):
            conn[new].add(t)
            conn[t].add(new)
            ends += (new, t)
    return OverlayGraph(n=n, edge_limit=edge_limit, connectivity=conn)


def read_edges(lines: Iterable[str], n: int, edge_limit: float = 2.0) -> OverlayGraph:
    """Rebuild a graph from an edge dump; initial degrees are the connectivity degrees."""
    g = OverlayGraph(n=n, edge_limit=edge_limit)
    pending = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        a, b, tag = line.split()
        i, j = int(a), int(b)
        if tag == "C":
            g.connectivity[i].add(j)
            g.connectivity[j].add(i)
        else:
            pending.append((i, j))
    g.initial_degree = [len(s) for s in g.connectivity]
    for i, j in pending:
        g.community[i].add(j)
        g.community[j].add(i)
    return g
