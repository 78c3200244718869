"""Acceptance suite at desk scale: 1000 peers, 50 generations, five seeds.

Each test checks one criterion at its stated tolerance and prints a single
pass/fail line (also repeated in the pytest terminal summary).
"""

from __future__ import annotations

import filecmp
import math
import random

import numpy as np
import pytest

from p2ptrust import Simulation, build_config
from p2ptrust.privacy import BloomFilter, session_report
from p2ptrust.reputation import NEUTRAL, ReputationRecord, merge_indirect, trust_value

from helpers import report_criterion

DESK = "configs/desk.cfg"
FRACTIONS = (0.1, 0.2, 0.4)
SEEDS = (1, 2, 3, 4, 5)
WINDOW = 10


class OverlayAudit:
    """Checks the overlay invariants at both endpoints after every community-link mutation."""

    def __init__(self, sim: Simulation):
        self.graph = g = sim.net.graph
        self.initial = sim.initial_connectivity
        self.connectivity = [frozenset(s) for s in g.connectivity]
        self.violations: list[str] = []
        self.mutations = 0
        g.add_community_edge = self._wrap(g.add_community_edge)
        g.remove_community_edge = self._wrap(g.remove_community_edge)

    def _wrap(self, mutate):
        def checked(i, j):
            changed = mutate(i, j)
            self.mutations += 1
            for x in (i, j):
                self._check(x)
            return changed

        return checked

    def _check(self, x: int) -> None:
        g = self.graph
        if g.connectivity[x] != self.connectivity[x]:
            self.violations.append(f"connectivity links of {x} changed")
        if x in g.connectivity[x] or x in g.community[x]:
            self.violations.append(f"self-loop at {x}")
        if g.connectivity[x] & g.community[x]:
            self.violations.append(f"parallel edge at {x}")
        if any(x not in g.community[y] for y in g.community[x]):
            self.violations.append(f"asymmetric community link at {x}")
        if g.degree(x) > g.edge_limit * g.initial_degree[x] + 1e-9:
            self.violations.append(f"RIC({x}) = {g.ric(x):.3f} above the cap")

    def full_check(self) -> None:
        self.violations += self.graph.check_invariants(self.initial)


@pytest.fixture(scope="session")
def desk_runs():
    """Reports per (fraction, seed), plus the overlay audit and trust-range tallies."""
    reports = {}
    audit = {"violations": [], "mutations": 0}
    trust_range = [1.0, 0.0, 0]
    for fraction in FRACTIONS:
        for seed in SEEDS:
            sim = Simulation(build_config(DESK, {"malicious_fraction": fraction, "seed": seed}))
            check = OverlayAudit(sim)
            series = []
            for _ in range(sim.config.generations):
                series.append(sim.run_generation().report)
                check.full_check()
            audit["violations"] += check.violations
            audit["mutations"] += check.mutations
            for cache in sim.net.caches:
                for _, rec in cache.items():
                    t = trust_value(rec)
                    trust_range[0], trust_range[1] = min(trust_range[0], t), max(trust_range[1], t)
                    trust_range[2] += 1
            reports[fraction, seed] = series
    return {"reports": reports, "audit": audit, "trust": trust_range}


def seed_mean(runs, fraction, metric):
    """Per-generation mean over seeds; generations where every seed is absent are NaN."""
    rows = [[np.nan if (v := metric(r)) is None else v for r in runs["reports"][fraction, s]] for s in SEEDS]
    table = np.array(rows, dtype=float)
    with np.errstate(all="ignore"):
        counts = np.sum(~np.isnan(table), axis=0)
        sums = np.nansum(table, axis=0)
    return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def cls(name, field):
    return lambda r: getattr(r.classes[name], field)


def test_criterion_1_overlay_invariants(desk_runs):
    audit = desk_runs["audit"]
    ok = not audit["violations"] and audit["mutations"] > 0
    report_criterion(1, ok, f"{audit['mutations']} community-link mutations checked over "
                            f"{len(FRACTIONS) * len(SEEDS)} desk runs, {len(audit['violations'])} violations")
    assert ok, audit["violations"][:5]


def test_criterion_2_trust_bounds(desk_runs):
    lo, hi, count = desk_runs["trust"]
    rng = random.Random(0)
    sampled = [ReputationRecord(rng.uniform(0, 1e4), rng.uniform(0, 1e4)) for _ in range(10_000)]
    in_range = 0 < lo and hi < 1 and all(0 < trust_value(r) < 1 for r in sampled)
    r_ij = ReputationRecord(2.5, 1.25)
    noop = (merge_indirect(r_ij, ReputationRecord(4, 1), NEUTRAL) == r_ij
            and merge_indirect(r_ij, ReputationRecord(0, 3), ReputationRecord(5, 2)) == r_ij
            and all(merge_indirect(r, ReputationRecord(0, b), ReputationRecord(a, 1)) == r
                    for r, a, b in zip(sampled[:1000], range(1000), range(1000))))
    examples = (abs(trust_value(ReputationRecord(0, 0)) - 0.5) <= 1e-12
                and abs(trust_value(ReputationRecord(3, 1)) - 4 / 6) <= 1e-12
                and abs(trust_value(ReputationRecord(0, 8)) - 0.1) <= 1e-12)
    ok = in_range and noop and examples
    report_criterion(2, ok, f"{count} cached trust values in [{lo:.4f}, {hi:.4f}]; no-op merges exact: {noop}; "
                            f"trust examples within 1e-12: {examples}")
    assert ok


def test_criterion_3_bloom_filter():
    bloom = BloomFilter(1024, 7)
    for x in range(1000):
        bloom.add(x)
    false_negatives = sum(not bloom.query(x) for x in range(1000))
    rng = random.Random(11)
    small = BloomFilter(1024, 7)
    inserted = {rng.getrandbits(64) for _ in range(100)}
    for x in inserted:
        small.add(x)
    probes = [p for p in (rng.getrandbits(64) for _ in range(100_000)) if p not in inserted]
    measured = sum(small.query(p) for p in probes) / len(probes)
    theory = (1 - math.exp(-7 * 100 / 1024)) ** 7
    ok = false_negatives == 0 and abs(measured - theory) <= 0.5 * theory
    report_criterion(3, ok, f"{false_negatives} false negatives over 1000 inserts; FPR {measured:.5f} "
                            f"vs expected {theory:.5f} (limit +/-50%)")
    assert ok


def test_criterion_4_privacy_traces():
    totals = {"sessions": 0, "fallback": 0, "anonymity_failures": 0, "blindness_failures": 0}
    full_sessions = 0
    runs = [("proxy", "hash", {}), ("handle", "hash", {}), ("full", "hash", {}),
            ("full", "rsa", {"peers": 200, "searches_per_generation": 100, "generations": 2})]
    for mode, crypto, extra in runs:
        overrides = {"privacy": mode, "crypto": crypto, "generations": 5, "malicious_fraction": 0.2, **extra}
        sim = Simulation(build_config(DESK, overrides))
        sim.run()
        rep = session_report(sim.privacy)
        for key in totals:
            totals[key] += rep[key]
        if mode == "full":
            full_sessions += rep["sessions"]
    ok = totals["sessions"] > 0 and full_sessions > 0 and totals["anonymity_failures"] == 0 \
        and totals["blindness_failures"] == 0
    report_criterion(4, ok, f"{totals['sessions']} private sessions ({full_sessions} with secure transfer, "
                            f"{totals['fallback']} direct fallbacks): {totals['anonymity_failures']} anonymity and "
                            f"{totals['blindness_failures']} blindness failures")
    assert ok


def test_criterion_5_determinism(tmp_path):
    cfg = build_config(DESK, {"generations": 10, "malicious_fraction": 0.2, "trace_queries": True,
                              "graph_dump_interval": 5})
    Simulation(cfg).run(tmp_path / "a")
    Simulation(cfg).run(tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    ok = not mismatch and not errors and "metrics.csv" in names
    report_criterion(5, ok, f"{len(names)} output files compared byte for byte, {len(mismatch)} differ")
    assert ok


def test_criterion_6_honest_only():
    sim = Simulation(build_config(DESK, {"malicious_fraction": 0.0, "generations": 20}))
    results = sim.run()
    ar = [r.report.classes["all"].ar for r in results]
    ear = [r.report.ear for r in results]
    deletions = sum(r.edges_deleted for r in results)
    ok = all(a == 1.0 for a in ar) and all(e is None for e in ear) and deletions == 0
    report_criterion(6, ok, f"AR min {min(ar)}, EAR present in {sum(e is not None for e in ear)} generations, "
                            f"{deletions} community-link deletions")
    assert ok


def late(series):
    return float(np.nanmean(series[-WINDOW:]))


def test_criterion_7_ear_trend(desk_runs):
    ok, parts = True, []
    late_ear = {}
    for fraction in (0.1, 0.2):
        ear = seed_mean(desk_runs, fraction, lambda r: r.ear)[WINDOW:]
        gens = np.arange(WINDOW, WINDOW + len(ear))
        keep = ~np.isnan(ear)
        slope = float(np.polyfit(gens[keep], ear[keep], 1)[0])
        mean = float(np.mean(ear[keep]))
        late_ear[fraction] = late(ear)
        ok &= mean > 0 and slope >= 0
        parts.append(f"{fraction:.0%}: mean {mean:.2f}, slope {slope:+.4f}/gen")
    ok &= late_ear[0.2] <= late_ear[0.1]
    parts.append(f"late EAR 20% {late_ear[0.2]:.2f} <= 10% {late_ear[0.1]:.2f}")
    report_criterion(7, bool(ok), "EAR after generation 10 (positive, non-decreasing); " + "; ".join(parts))
    assert ok


def test_criterion_8_closeness_separation(desk_runs):
    ok, parts = True, []
    for fraction in (0.2, 0.4):
        honest = late(seed_mean(desk_runs, fraction, cls("honest", "cc")))
        bad = late(seed_mean(desk_runs, fraction, cls("malicious", "cc")))
        ok &= honest >= 1.5 * bad
        parts.append(f"{fraction:.0%}: CC honest/malicious = {honest / bad:.3f}")
    report_criterion(8, bool(ok), "need ratio >= 1.5; " + "; ".join(parts))
    assert ok


def test_criterion_9_path_distance(desk_runs):
    fraction = 0.4
    honest = seed_mean(desk_runs, fraction, cls("honest", "aspd"))[-1]
    bad = seed_mean(desk_runs, fraction, cls("malicious", "aspd"))[-1]
    ok = honest < 0.6 * 15 and bad >= 0.9 * 15
    report_criterion(9, bool(ok), f"40% malicious, final ASPD honest {honest:.2f} (need < 9), "
                                  f"malicious {bad:.2f} (need >= 13.5)")
    assert ok


def test_criterion_10_trust_query_overhead(desk_runs):
    ok, parts = True, []
    for fraction in (0.1, 0.2):
        tq = seed_mean(desk_runs, fraction, cls("all", "tqpo"))
        first, last = float(np.mean(tq[:WINDOW])), float(np.mean(tq[-WINDOW:]))
        ok &= last < first
        parts.append(f"{fraction:.0%}: {first:.1f} -> {last:.1f}")
    report_criterion(10, bool(ok), "TQPO first-10 -> last-10 mean; " + "; ".join(parts))
    assert ok


def test_criterion_11_lcc_stability(desk_runs):
    def lcc(fraction):
        return late(seed_mean(desk_runs, fraction, lambda r: float(np.mean(list(r.lcc.values())))))

    low, high = lcc(0.1), lcc(0.4)
    change = abs(high - low) / low
    ok = change < 0.2
    report_criterion(11, ok, f"mean LCC {low:.2f}% at 10% vs {high:.2f}% at 40%, relative change {change:.1%} "
                             f"(need < 20%)")
    assert ok


def test_criterion_12_clustering(desk_runs):
    ok, parts = True, []
    for fraction in (0.2, 0.4):
        honest = late(seed_mean(desk_runs, fraction, cls("honest", "clc")))
        bad = late(seed_mean(desk_runs, fraction, cls("malicious", "clc")))
        ok &= honest > bad
        parts.append(f"{fraction:.0%}: honest {honest:.4f} vs malicious {bad:.4f}")
    report_criterion(12, bool(ok), "mean CLC over the last 10 generations; " + "; ".join(parts))
    assert ok
