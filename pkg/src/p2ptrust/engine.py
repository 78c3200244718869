"""Generation loop, output files and parameter sweeps."""

from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .adaptation import process_responses, prune_distrusted
from .adversary import apply_churn, mark_malicious
from .config import SimConfig
from .content import assign_content, churn_exchange, content_census, sample_queries, write_census
from .metrics import (
    MetricsReport,
    SearchRecord,
    compute_report,
    write_lcc_header,
    write_lcc_rows,
    write_metrics_header,
    write_metrics_rows,
)
from .network import Counters, Network
from .overlay import generate_power_law
from .privacy import PrivacyContext, make_suite, private_search
from .reputation import Outcome, TrustCache
from .search import initiate_query
from .seeding import derive_seed, py_rng

log = logging.getLogger(__name__)


@dataclass
class GenerationResult:
    report: MetricsReport
    queries: int
    edges_added: int
    edges_deleted: int


class Simulation:
    """One seeded run.  Everything it produces is a function of the config alone."""

    def __init__(self, config: SimConfig):
        self.config = cfg = config
        graph = generate_power_law(cfg.peers, cfg.ba_m, derive_seed(cfg.seed, "topology"), cfg.edge_limit)
        libraries = assign_content(
            cfg.peers,
            cfg.categories,
            derive_seed(cfg.seed, "content"),
            alpha=cfg.zipf_alpha,
            files_per_peer=cfg.files_per_peer,
            files_per_category=cfg.files_per_category,
        )
        dispositions = mark_malicious(
            cfg.peers, cfg.malicious_fraction, cfg.threat_model, py_rng(cfg.seed, "malicious"),
            cfg.degree_of_deception,
        )
        caches = [TrustCache(cfg.trust_cache_size) for _ in range(cfg.peers)]
        self.net = Network(cfg, graph, libraries, dispositions, caches, rng=py_rng(cfg.seed, "setup"))
        self.initial_connectivity = frozenset(graph.edges("C"))
        self.privacy = None
        if cfg.privacy != "off":
            self.privacy = PrivacyContext(
                make_suite(cfg.crypto, derive_seed(cfg.seed, "crypto")),
                prefix_bits=cfg.prefix_bits, bloom_m=cfg.bloom_m, bloom_k=cfg.bloom_k,
            )
        self.generation = 0
        self._sitting_out: frozenset[int] = frozenset()
        self._query_id = 0
        self.after_query: Callable[[Network], None] | None = None

    def _churn(self, g: int) -> None:
        net, cfg = self.net, self.config
        rejoining = sorted(self._sitting_out)
        for x in rejoining:
            net.caches[x].clear()
        net.libraries = churn_exchange(net.libraries, rejoining, py_rng(cfg.seed, "exchange", g))
        net.inactive = apply_churn(cfg.peers, cfg.churn_fraction, py_rng(cfg.seed, "churn", g))
        self._sitting_out = net.inactive

    def _search(self, i: int, target) -> SearchRecord:
        net = self.net
        qid = self._query_id
        self._query_id += 1
        private = False
        if self.privacy is not None:
            result = private_search(net, self.privacy, i, target, self.config.privacy, query_id=qid)
            attempts, private = result.attempts, result.proxy is not None
        else:
            prune_distrusted(net, i)
            attempts = process_responses(net, i, initiate_query(net, i, target, query_id=qid))
        authentic = bool(attempts) and attempts[-1].outcome is Outcome.AUTHENTIC
        return SearchRecord(i, net.is_malicious(i), len(attempts), authentic, private)

    def run_generation(self) -> GenerationResult:
        g = self.generation
        net, cfg = self.net, self.config
        net.counters = Counters()
        self._churn(g)
        net.rng = py_rng(cfg.seed, "generation", g)
        active = [x for x in range(cfg.peers) if net.is_active(x)]
        workload = sample_queries(
            net.libraries, active, cfg.searches_per_generation, derive_seed(cfg.seed, "queries", g),
            alpha=cfg.zipf_alpha, exact=cfg.exact_query_count,
        )
        searches = []
        for i, target in workload:
            searches.append(self._search(i, target))
            if self.after_query is not None:
                self.after_query(net)
        sample = sorted(py_rng(cfg.seed, "sample", g).sample(range(cfg.peers), min(cfg.cc_sample, cfg.peers)))
        graph = net.graph
        report = compute_report(
            g,
            graph.community,
            [graph.degree(x) for x in range(cfg.peers)],
            graph.initial_degree,
            [net.is_malicious(x) for x in range(cfg.peers)],
            [lib.categories for lib in net.libraries],
            cfg.categories,
            searches,
            net.counters.dfs_trust_queries,
            sample,
            cfg.unreachable_path_len,
        )
        self.generation += 1
        return GenerationResult(report, len(workload), net.counters.edges_added, net.counters.edges_deleted)

    def run(self, out_dir: str | Path | None = None, *, name: str = "") -> list[GenerationResult]:
        """Run every generation; with ``out_dir``, stream the CSV outputs there."""
        cfg = self.config
        suffix = f"-{name}" if name else ""
        if out_dir is None:
            return [self.run_generation() for _ in range(cfg.generations)]
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"config{suffix}.cfg").write_text("\n".join(cfg.to_lines()) + "\n")
        if cfg.trace_queries:
            self.net.query_trace = []
        results = []
        with open(out / f"metrics{suffix}.csv", "w") as mfh, open(out / f"lcc{suffix}.csv", "w") as lfh, \
                (open(out / f"trace{suffix}.log", "w") if cfg.trace_queries else _Null()) as tfh:
            write_metrics_header(mfh)
            write_lcc_header(lfh)
            if cfg.trace_queries:
                tfh.write("query_id,hop,peer,action\n")
            for _ in range(cfg.generations):
                if cfg.write_adaptation:
                    self.net.adaptation_log = []
                result = self.run_generation()
                results.append(result)
                g = result.report.generation
                write_metrics_rows(mfh, result.report)
                write_lcc_rows(lfh, result.report)
                if cfg.trace_queries:
                    for row in self.net.query_trace:
                        tfh.write(",".join(map(str, row)) + "\n")
                    self.net.query_trace = []
                self._write_snapshots(out, g, suffix)
                log.info("generation %d: %d queries, +%d/-%d community links",
                         g, result.queries, result.edges_added, result.edges_deleted)
        if self.privacy is not None:
            with open(out / f"privacy-trace{suffix}.csv", "w") as fh:
                self.privacy.trace.write_csv(fh)
        return results

    def _write_snapshots(self, out: Path, g: int, suffix: str) -> None:
        cfg, net = self.config, self.net
        last = g == cfg.generations - 1
        if cfg.graph_dump_interval and (g % cfg.graph_dump_interval == 0 or last):
            with open(out / f"graph-{g}{suffix}.edges", "w") as fh:
                net.graph.write_edges(fh)
        if cfg.write_census:
            with open(out / f"census-{g}{suffix}.csv", "w") as fh:
                write_census(fh, content_census(net.libraries, cfg.categories))
        if cfg.write_trust:
            with open(out / f"trust-{g}{suffix}.csv", "w") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["observer", "subject", "alpha", "beta", "trust"])
                for x, cache in enumerate(net.caches):
                    for y, rec in sorted(cache.items()):
                        w.writerow([x, y, f"{rec.alpha:.6f}", f"{rec.beta:.6f}", f"{rec.trust:.6f}"])
        if cfg.write_adaptation and net.adaptation_log is not None:
            with open(out / f"adaptation-{g}{suffix}.csv", "w") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["requester", "provider", "outcome", "edge_action"])
                w.writerows(net.adaptation_log)


class _Null:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def variant_name(overrides: Mapping[str, object]) -> str:
    return "_".join(f"{k}-{v}" for k, v in overrides.items())


def expand_sweep(vary: Mapping[str, Sequence[object]]) -> list[dict[str, object]]:
    """Cartesian product of the varied keys, in the order given."""
    keys = list(vary)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(vary[k] for k in keys))]


def run_experiment(
    base: SimConfig, vary: Mapping[str, Sequence[object]], out_dir: str | Path
) -> list[Path]:
    """Run ``base`` once per sweep point and return the metrics files written."""
    from .config import build_config  # local: keeps engine importable without file IO helpers

    written = []
    points = expand_sweep(vary) if vary else [{}]
    for overrides in points:
        cfg = build_config(overrides={**_as_overrides(base), **overrides})
        name = variant_name(overrides)
        log.info("running variant %s", name or "base")
        Simulation(cfg).run(out_dir, name=name)
        written.append(Path(out_dir) / (f"metrics-{name}.csv" if name else "metrics.csv"))
    return written


def _as_overrides(cfg: SimConfig) -> dict[str, object]:
    return {line.split("=", 1)[0]: line.split("=", 1)[1] for line in cfg.to_lines()}
