"""Content placement and query workload.

Categories and file ranks within a category are both zipf-distributed.  A file
is the pair ``(category, rank)``; category 1 is the most popular and rank 1 is
the most popular file of its category.
"""

from __future__ import annotations

import bisect
import csv
import itertools
import math
import random
from dataclasses import dataclass, replace
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True, order=True)
class FileId:
    category: int
    rank: int

    @property
    def handle(self) -> str:
        """Name used as the data handle in privacy-preserving lookups."""
        return f"file-{self.category}-{self.rank}"


@dataclass(frozen=True)
class PeerLibrary:
    owner: int
    categories: tuple[int, ...]
    files: frozenset[FileId]

    def shares(self, category: int) -> bool:
        return category in self.categories

    def count_in(self, category: int) -> int:
        return sum(1 for f in self.files if f.category == category)


def zipf_weight(rank: int, alpha: float) -> float:
    if rank < 1:
        raise ParameterError(f"zipf rank must be >= 1, got {rank}")
    if alpha <= 0:
        raise ParameterError(f"zipf exponent must be > 0, got {alpha}")
    return rank ** -alpha


def _normalized(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    return w / w.sum()


def allocate_files(categories: Sequence[int], alpha: float, total: int) -> list[int]:
    """Split ``total`` files over categories (given most popular first).

    Every category gets at least one file; the rest is shared in proportion to
    the category zipf weight, leftovers going to the most popular categories,
    so counts never increase down the popularity order.
    """
    k = len(categories)
    if total < k:
        raise ParameterError(f"cannot place {total} files in {k} categories")
    weights = [zipf_weight(c, alpha) for c in categories]
    spare = total - k
    share = [spare * w / sum(weights) for w in weights]
    counts = [1 + math.floor(s) for s in share]
    for idx in range(total - sum(counts)):
        counts[idx % k] += 1
    return counts


def assign_content(
    n_peers: int,
    n_categories: int,
    seed: int,
    *,
    alpha: float = 0.8,
    files_per_peer: int = 20,
    files_per_category: int = 100,
    min_categories: int = 3,
    max_categories: int = 6,
) -> list[PeerLibrary]:
    """Give every peer 3-6 zipf-sampled categories and zipf-ranked files in each."""
    if n_categories < max_categories:
        raise ParameterError(f"need at least {max_categories} categories, got {n_categories}")
    if files_per_category < files_per_peer:
        raise ParameterError("files_per_category must be >= files_per_peer")
    rng = np.random.default_rng(seed)
    cat_p = _normalized([zipf_weight(c, alpha) for c in range(1, n_categories + 1)])
    rank_p = _normalized([zipf_weight(r, alpha) for r in range(1, files_per_category + 1)])
    libraries = []
    for peer in range(n_peers):
        k = int(rng.integers(min_categories, max_categories + 1))
        cats = sorted(int(c) + 1 for c in rng.choice(n_categories, size=k, replace=False, p=cat_p))
        files = set()
        for cat, count in zip(cats, allocate_files(cats, alpha, files_per_peer)):
            ranks = rng.choice(files_per_category, size=count, replace=False, p=rank_p)
            files.update(FileId(cat, int(r) + 1) for r in ranks)
        libraries.append(PeerLibrary(owner=peer, categories=tuple(cats), files=frozenset(files)))
    return libraries


class QuerySampler:
    """Draws per-generation query workloads against the current libraries.

    Targets always exist in some other peer's library and lie in one of the
    initiator's categories, chosen by interest (normalized category zipf
    weight) then by rank zipf weight among the ranks present in the network.
    """

    def __init__(self, libraries: Sequence[PeerLibrary], alpha: float = 0.8):
        self.alpha = alpha
        holders: dict[FileId, int] = {}
        for lib in libraries:
            for f in lib.files:
                holders[f] = holders.get(f, 0) + 1
        self.holders = holders
        by_cat: dict[int, list[int]] = {}
        for f in sorted(holders):
            by_cat.setdefault(f.category, []).append(f.rank)
        self._ranks = by_cat
        self._cum = {
            c: list(itertools.accumulate(zipf_weight(r, alpha) for r in ranks)) for c, ranks in by_cat.items()
        }

    def _pick_rank(self, category: int, rng: random.Random) -> int:
        cum = self._cum[category]
        return self._ranks[category][bisect.bisect_right(cum, rng.random() * cum[-1])]

    def target_for(self, lib: PeerLibrary, rng: random.Random) -> FileId | None:
        weights = list(itertools.accumulate(zipf_weight(c, self.alpha) for c in lib.categories))
        category = lib.categories[bisect.bisect_right(weights, rng.random() * weights[-1])]
        for _ in range(32):
            f = FileId(category, self._pick_rank(category, rng))
            # Every sampled rank is held somewhere, so missing locally means held by another peer.
            if f not in lib.files:
                return f
        # Fall back to an explicit scan of what others hold in this category.
        options = [r for r in self._ranks[category] if FileId(category, r) not in lib.files]
        if not options:
            return None
        cum = list(itertools.accumulate(zipf_weight(r, self.alpha) for r in options))
        return FileId(category, options[bisect.bisect_right(cum, rng.random() * cum[-1])])


def query_rate(total_queries: int, n_peers: int) -> float:
    if n_peers < 1:
        raise ParameterError("need at least one peer")
    return total_queries / n_peers


def sample_queries(
    libraries: Sequence[PeerLibrary],
    active: Iterable[int],
    total_queries: int,
    seed: int,
    *,
    alpha: float = 0.8,
    exact: bool = False,
) -> list[tuple[int, FileId]]:
    """One generation's workload as ``(initiator, target)`` pairs in processing order.

    Each active peer issues ``K ~ Poisson(M / N)`` queries; with ``exact`` the
    generation instead has exactly ``M`` queries spread uniformly over active
    peers.
    """
    active = sorted(active)
    if total_queries <= 0 or not active:
        return []
    lam = query_rate(total_queries, len(libraries))
    nrng = np.random.default_rng(seed)
    if exact:
        counts = nrng.multinomial(total_queries, [1 / len(active)] * len(active))
    else:
        counts = nrng.poisson(lam, size=len(active))
    rng = random.Random(seed)
    sampler = QuerySampler(libraries, alpha)
    workload = []
    for peer, k in zip(active, counts):
        for _ in range(int(k)):
            target = sampler.target_for(libraries[peer], rng)
            if target is not None:
                workload.append((peer, target))
    rng.shuffle(workload)
    return workload


def churn_exchange(libraries: Sequence[PeerLibrary], churned: Iterable[int], rng: random.Random) -> list[PeerLibrary]:
    """Permute libraries among churned peers so each one receives another's content.

    A shuffled cyclic shift is a derangement, so with two or more peers nobody
    keeps their own library.  Returns a new list; the multiset of libraries is
    unchanged.
    """
    churned = sorted(churned)
    out = list(libraries)
    if len(churned) < 2:
        return out
    order = list(churned)
    rng.shuffle(order)
    for pos, src in enumerate(order):
        dst = order[(pos + 1) % len(order)]
        out[dst] = replace(libraries[src], owner=dst)
    return out


def content_census(libraries: Sequence[PeerLibrary], n_categories: int) -> list[tuple[int, int, int]]:
    """Rows of ``(category, holders, files)`` for every category."""
    holders = [0] * (n_categories + 1)
    files = [0] * (n_categories + 1)
    for lib in libraries:
        for c in lib.categories:
            holders[c] += 1
        for f in lib.files:
            files[f.category] += 1
    return [(c, holders[c], files[c]) for c in range(1, n_categories + 1)]


def write_census(out: TextIO, rows: Iterable[tuple[int, int, int]]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["category", "holders", "files"])
    writer.writerows(rows)
