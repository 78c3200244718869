from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2ptrust.reputation import (
    NEUTRAL,
    Outcome,
    ReputationRecord,
    TrustCache,
    is_trustworthy,
    merge_indirect,
    trust_query,
    trust_value,
    update_direct,
)

from helpers import make_graph, make_net, record, remember

counts = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)
records = st.builds(ReputationRecord, counts, counts)


def test_trust_value_examples():
    assert trust_value(ReputationRecord(0, 0)) == 0.5
    assert trust_value(ReputationRecord(3, 1)) == pytest.approx(4 / 6, abs=1e-12)
    assert trust_value(ReputationRecord(0, 8)) == pytest.approx(0.1, abs=1e-12)


def test_update_direct_examples():
    up = update_direct(NEUTRAL, Outcome.AUTHENTIC)
    assert up == ReputationRecord(1, 0) and up.trust == pytest.approx(2 / 3, abs=1e-12)
    down = update_direct(NEUTRAL, Outcome.FAKE)
    assert down == ReputationRecord(0, 1) and down.trust == pytest.approx(1 / 3, abs=1e-12)


def test_recency_decay():
    rec = update_direct(ReputationRecord(4, 2), Outcome.FAKE, rho=0.5)
    assert rec == ReputationRecord(2, 2)


def test_threshold():
    assert is_trustworthy(NEUTRAL)
    assert not is_trustworthy(record(fake=1))


@given(records)
@settings(max_examples=200)
def test_trust_in_open_interval(rec):
    t = trust_value(rec)
    assert 0 < t < 1


@given(st.integers(0, 500), st.integers(0, 500))
def test_trust_increases_with_authentic_outcomes(a, b):
    rec = ReputationRecord(a, b)
    assert trust_value(update_direct(rec, Outcome.AUTHENTIC)) > trust_value(rec)


def test_merge_with_vacuous_recommendation_is_noop():
    r_ij = ReputationRecord(1.5, 2.25)
    assert merge_indirect(r_ij, ReputationRecord(7, 1), NEUTRAL) == r_ij


def test_merge_with_never_successful_recommender_is_noop():
    r_ij = ReputationRecord(1.5, 2.25)
    assert merge_indirect(r_ij, ReputationRecord(0, 5), ReputationRecord(9, 3)) == r_ij


def test_merge_worked_example():
    out = merge_indirect(ReputationRecord(1, 1), ReputationRecord(4, 0), ReputationRecord(6, 0))
    # denominator (0 + 2) * (6 + 0 + 2) + 2 * 4 = 24, numerator 2 * 4 * 6 = 48
    assert out.alpha == pytest.approx(1 + 48 / 24, abs=1e-12)
    assert out.beta == pytest.approx(1.0, abs=1e-12)


def merge_oracle(r_ij, r_ik, r_kj):
    den = (r_ik.beta + 2) * (r_kj.alpha + r_kj.beta + 2) + 2 * r_ik.alpha
    return (r_ij.alpha + 2 * r_ik.alpha * r_kj.alpha / den, r_ij.beta + 2 * r_ik.alpha * r_kj.beta / den)


@given(records, records, records)
@settings(max_examples=200)
def test_merge_matches_formula_and_never_decreases(r_ij, r_ik, r_kj):
    out = merge_indirect(r_ij, r_ik, r_kj)
    a, b = merge_oracle(r_ij, r_ik, r_kj)
    assert out.alpha == pytest.approx(a, rel=1e-12, abs=1e-12)
    assert out.beta == pytest.approx(b, rel=1e-12, abs=1e-12)
    assert out.alpha >= r_ij.alpha and out.beta >= r_ij.beta
    assert 0 < trust_value(out) < 1


@given(st.floats(0, 1e3), st.floats(0.01, 1e3), st.floats(0, 1e3), st.floats(0.01, 1e3), st.floats(0, 1e3))
@settings(max_examples=200)
def test_more_trusted_recommenders_count_more(a_ik, delta, b_ik, a_kj, b_kj):
    r_kj = ReputationRecord(a_kj, b_kj)
    low = merge_indirect(NEUTRAL, ReputationRecord(a_ik, b_ik), r_kj)
    high = merge_indirect(NEUTRAL, ReputationRecord(a_ik + delta, b_ik), r_kj)
    assert high.alpha > low.alpha


def test_cache_capacity_and_lru_eviction():
    cache = TrustCache()
    for peer in range(32):
        cache.put(peer, record(authentic=1))
    cache.get(0)  # refresh the oldest entry
    cache.put(99, record(fake=1))
    assert len(cache) == 32
    assert 1 not in cache and 0 in cache and 99 in cache


@given(st.lists(st.integers(0, 80), max_size=300))
def test_cache_never_exceeds_capacity(peers):
    cache = TrustCache(32)
    order: list[int] = []
    for p in peers:
        cache.put(p, NEUTRAL)
        if p in order:
            order.remove(p)
        order.append(p)
        assert len(cache) <= 32
    assert list(cache) == order[-32:]


def line_network():
    # 0 - 1 - 2 - 3 - 4 connectivity chain, 0-5 community link, 5 has a connectivity link to 6
    g = make_graph(7, [(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (0, 6)], [(0, 5)], edge_limit=3.0)
    return make_net(g)


def query(net, i, j, **kw):
    return trust_query(i, j, net.graph.community, net.graph.neighbors, net.caches,
                       dfs_ttl=net.config.dfs_ttl, rng=random.Random(0), **kw)


def test_trust_query_phase_one():
    net = line_network()
    remember(net, 0, 5, authentic=4)
    remember(net, 5, 3, fake=6)
    result = query(net, 0, 3)
    assert not result.escalated and result.recommenders == (5,)
    assert result.record == merge_indirect(NEUTRAL, record(authentic=4), record(fake=6))
    assert trust_value(result.record) < 0.5


def test_trust_query_nobody_knows():
    net = line_network()
    result = query(net, 0, 4)
    assert result.record == NEUTRAL and result.escalated


def test_trust_query_without_escalation_stops_after_poll():
    net = line_network()
    remember(net, 2, 4, fake=3)
    result = query(net, 0, 4, escalate=False)
    assert result.record == NEUTRAL and not result.escalated and result.hops == 0


def test_trust_query_dfs_follows_trusted_chain():
    net = line_network()
    remember(net, 0, 1, authentic=5)
    remember(net, 1, 2, authentic=5)
    remember(net, 2, 4, fake=3)
    result = query(net, 0, 4)
    assert result.escalated and result.recommenders == (2,)
    assert result.hops == 2
    assert trust_value(result.record) < 0.5


def test_resolve_counts_one_escalation():
    net = line_network()
    net.resolve(0, 4)
    assert net.counters.dfs_trust_queries == [1, 0]
    remember(net, 5, 4, authentic=1)
    net.resolve(0, 4)  # answered by the community poll
    assert net.counters.dfs_trust_queries == [1, 0]


def test_second_hand_answers_are_not_cached():
    net = line_network()
    remember(net, 0, 5, authentic=4)
    remember(net, 5, 3, fake=6)
    net.resolve(0, 3)
    assert 3 not in net.caches[0]


def test_inactive_peers_do_not_answer():
    net = line_network()
    remember(net, 0, 5, authentic=4)
    remember(net, 5, 3, fake=6)
    net.inactive = frozenset({5})
    assert net.resolve(0, 3) == NEUTRAL
