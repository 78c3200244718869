"""Requester-private lookups routed through a trusted community neighbor.

Three layered modes:

``proxy``   the trusted peer searches and downloads on the requester's behalf.
``handle``  the requester reveals only a prefix of the hashed data handle;
            suppliers answer with Bloom filters over the hidden suffixes of
            their matching handles, and the full request is sealed to the
            chosen supplier.
``full``    as ``handle``, plus the content travels under a session key the
            requester wraps for the supplier, and the relay signs every packet
            it forwards so both ends can detect tampering.

Every message is written to a protocol trace.  ``payload_visible`` records
whether the recipient can actually recover the payload with the keys it
holds, so the anonymity and blindness checks read real decryptability rather
than a hard-coded flag.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, TextIO

from ..adaptation import DownloadAttempt, process_responses, rank_providers
from ..adversary import serve_decision, will_respond
from ..content import FileId
from ..errors import ProtocolViolation
from ..network import Network
from ..reputation import NEUTRAL, TRUST_THRESHOLD, Outcome, update_direct
from ..search import default_matcher, initiate_query
from .bloom import BloomFilter
from .crypto import CryptoSuite, KeyPair

DIGEST_BITS = 256


@dataclass(frozen=True)
class TraceRecord:
    session_id: int
    step: int
    src: int
    dst: int
    msg_type: str
    payload_visible: bool


@dataclass
class Session:
    session_id: int
    requester: int
    proxy: int | None
    mode: str
    suppliers: set[int] = field(default_factory=set)
    aborted: bool = False

    @property
    def fallback(self) -> bool:
        return self.proxy is None


class ProtocolTrace:
    def __init__(self) -> None:
        self.records: list[TraceRecord] = []
        self.sessions: dict[int, Session] = {}
        self._steps: dict[int, int] = {}

    def open(self, requester: int, proxy: int | None, mode: str) -> Session:
        session = Session(len(self.sessions), requester, proxy, mode)
        self.sessions[session.session_id] = session
        self._steps[session.session_id] = 0
        return session

    def log(self, session: Session, src: int, dst: int, msg_type: str, visible: bool) -> None:
        step = self._steps[session.session_id] + 1
        self._steps[session.session_id] = step
        self.records.append(TraceRecord(session.session_id, step, src, dst, msg_type, visible))

    def of(self, session_id: int) -> list[TraceRecord]:
        return [r for r in self.records if r.session_id == session_id]

    def write_csv(self, out: TextIO) -> None:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["session_id", "step", "from", "to", "msg_type", "payload_visible"])
        for r in self.records:
            writer.writerow([r.session_id, r.step, r.src, r.dst, r.msg_type, int(r.payload_visible)])


def anonymity_violations(trace: ProtocolTrace, session: Session) -> list[str]:
    """Messages in a private session that would expose the requester."""
    if session.fallback:
        return []
    i, j = session.requester, session.proxy
    problems = []
    for r in trace.of(session.session_id):
        if r.src == i and r.dst != j:
            problems.append(f"step {r.step}: requester sent {r.msg_type} to {r.dst}")
        if r.dst == i and r.src != j:
            problems.append(f"step {r.step}: requester received {r.msg_type} from {r.src}")
        if r.dst in session.suppliers and r.src == i:
            problems.append(f"step {r.step}: supplier {r.dst} saw the requester")
    return problems


def blindness_violations(trace: ProtocolTrace, session: Session) -> list[str]:
    """Content or full requests the relay could read (only meaningful in ``full`` mode)."""
    if session.fallback:
        return []
    return [
        f"step {r.step}: relay could read {r.msg_type}"
        for r in trace.of(session.session_id)
        if r.dst == session.proxy and r.msg_type in ("KEY_REQ", "DATA")
        and r.payload_visible
    ]


@dataclass
class KeyRing:
    identity: KeyPair
    session_keys: list[bytes] = field(default_factory=list)


@dataclass
class Payload:
    kind: str  # plain | sealed | sym
    blob: bytes


class PrivacyContext:
    """Keys, handle hashes and the protocol trace for one run."""

    def __init__(self, suite: CryptoSuite, *, prefix_bits: int = 16, bloom_m: int = 1024, bloom_k: int = 7):
        self.suite = suite
        self.prefix_bits = prefix_bits
        self.bloom_m = bloom_m
        self.bloom_k = bloom_k
        self.trace = ProtocolTrace()
        self._rings: dict[int, KeyRing] = {}
        self._digests: dict[FileId, int] = {}

    def ring(self, peer: int) -> KeyRing:
        if peer not in self._rings:
            self._rings[peer] = KeyRing(self.suite.keypair(peer))
        return self._rings[peer]

    def public(self, peer: int) -> bytes:
        return self.ring(peer).identity.public

    def digest(self, f: FileId) -> int:
        if f not in self._digests:
            self._digests[f] = int.from_bytes(self.suite.hash(f.handle.encode()), "big")
        return self._digests[f]

    def split(self, digest: int, bits: int | None = None) -> tuple[int, int]:
        bits = self.prefix_bits if bits is None else bits
        low = DIGEST_BITS - bits
        return digest >> low, digest & ((1 << low) - 1)

    def readable(self, peer: int, payload: Payload) -> bool:
        if payload.kind == "plain":
            return True
        ring = self.ring(peer)
        if payload.kind == "sealed":
            return self.suite.can_open(ring.identity, payload.blob)
        return any(self.suite.can_decrypt(key, payload.blob) for key in ring.session_keys)

    def send(self, session: Session, src: int, dst: int, msg_type: str, payload: Payload) -> None:
        self.trace.log(session, src, dst, msg_type, self.readable(dst, payload))


def pick_proxy(net: Network, i: int) -> int | None:
    """Most-trusted active community neighbor of ``i`` that ``i`` does not distrust."""
    best = None
    for y in sorted(net.graph.community[i]):
        if not net.is_active(y):
            continue
        t = net.known_trust(i, y)
        if t >= TRUST_THRESHOLD:
            key = (t, net.rng.random())
            if best is None or key > best[0]:
                best = (key, y)
    return None if best is None else best[1]


def _content(target: FileId, outcome: Outcome) -> bytes:
    return f"{target.handle}|{outcome.value}".encode()


def _outcome_of(content: bytes) -> Outcome:
    return Outcome(content.rsplit(b"|", 1)[1].decode())


@dataclass
class PrivateSearch:
    mode: str
    proxy: int | None
    attempts: list[DownloadAttempt]
    session: Session | None = None
    lookup: "HandleLookup | None" = None

    @property
    def authentic(self) -> bool:
        return bool(self.attempts) and self.attempts[-1].outcome is Outcome.AUTHENTIC


def proxy_lookup(net: Network, ctx: PrivacyContext, i: int, target: FileId, *, query_id: int = 0) -> PrivateSearch:
    """Identity protection: the trusted peer searches and downloads as if it were the origin."""
    j = pick_proxy(net, i)
    if j is None:
        return _direct(net, ctx, i, target, "proxy", query_id)
    session = ctx.trace.open(i, j, "proxy")
    plain = Payload("plain", target.handle.encode())
    ctx.send(session, i, j, "REQ", plain)
    holds = default_matcher(net, target)
    responses = initiate_query(net, j, target, query_id=query_id, matcher=lambda x: x != i and holds(x))
    attempts = process_responses(net, j, responses)
    for a in attempts:
        session.suppliers.add(a.provider)
        ctx.send(session, j, a.provider, "REQ", plain)
        ctx.send(session, a.provider, j, "DATA", Payload("plain", _content(target, a.outcome)))
    if attempts and attempts[-1].outcome is Outcome.AUTHENTIC:
        ctx.send(session, j, i, "DATA", Payload("plain", _content(target, Outcome.AUTHENTIC)))
    attempts = [DownloadAttempt(i, a.provider, a.target, a.outcome) for a in attempts]
    return PrivateSearch("proxy", j, attempts, session)


def _direct(net: Network, ctx: PrivacyContext, i: int, target: FileId, mode: str, query_id: int) -> PrivateSearch:
    session = ctx.trace.open(i, None, mode)
    responses = initiate_query(net, i, target, query_id=query_id)
    return PrivateSearch(mode, None, process_responses(net, i, responses), session)


@dataclass
class HandleLookup:
    reached: set[int]
    no_match: list[int]  # reached peers holding no handle with the revealed prefix
    filtered: list[int]  # answered, but their Bloom filter rejected the hidden suffix
    candidates: list[int]


def partial_hash_lookup(
    net: Network,
    ctx: PrivacyContext,
    i: int,
    j: int,
    target: FileId,
    session: Session,
    *,
    prefix_bits: int | None = None,
    query_id: int = 0,
) -> HandleLookup:
    """Prefix broadcast via ``j``; suppliers reply with Bloom filters over hidden suffixes."""
    bits = ctx.prefix_bits if prefix_bits is None else prefix_bits
    prefix, suffix = ctx.split(ctx.digest(target), bits)
    ctx.send(session, i, j, "PREFIX_REQ", Payload("plain", prefix.to_bytes(32, "big")))

    def matches(x: int) -> list[int]:
        found = []
        for f in net.libraries[x].files:
            p, s = ctx.split(ctx.digest(f), bits)
            if p == prefix:
                found.append(s)
        return found

    reached: set[int] = set()
    responses = initiate_query(
        net, j, None, query_id=query_id, seen=reached, matcher=lambda x: x != i and bool(matches(x))
    )
    responders = sorted({r.responder for r in responses})
    candidates, filtered = [], []
    for k in responders:
        bloom = BloomFilter(ctx.bloom_m, ctx.bloom_k)
        for s in matches(k):
            bloom.add(s)
        reply = Payload("plain", bloom.to_bytes() + ctx.public(k))
        ctx.send(session, k, j, "FILTER", reply)
        ctx.send(session, j, i, "FILTER", reply)
        (candidates if suffix in bloom else filtered).append(k)
    answered = set(responders)
    no_match = sorted(x for x in reached if x not in answered and x not in (i, j))
    return HandleLookup(reached, no_match, filtered, candidates)


def secure_transfer(
    ctx: PrivacyContext,
    session: Session,
    i: int,
    j: int,
    k: int,
    request: bytes,
    serve: Callable[[bytes], bytes],
    *,
    tamper: Callable[[str, bytes], bytes] | None = None,
) -> bytes:
    """Session-key transfer from ``k`` to ``i`` through relay ``j``.

    ``i`` wraps a fresh session key and ``request`` for ``k``; ``k`` answers
    with ``serve(request)`` under that key.  ``j`` signs each packet it relays
    and never holds the session key.  ``tamper(stage, blob)`` lets tests
    corrupt a relayed packet.  Raises ProtocolViolation when a signature check
    fails.
    """
    suite = ctx.suite
    relay = ctx.ring(j).identity
    key = suite.session_key()
    ctx.ring(i).session_keys.append(key)
    sealed = suite.seal(ctx.public(k), key + request)
    ctx.send(session, i, j, "KEY_REQ", Payload("sealed", sealed))
    signature = suite.sign(relay, sealed)
    relayed = tamper("request", sealed) if tamper else sealed
    ctx.send(session, j, k, "KEY_REQ", Payload("sealed", relayed))
    if not suite.verify(ctx.public(j), relayed, signature):
        _abort(ctx, session, k, j)
        raise ProtocolViolation(f"supplier {k} rejected the relay signature of {j}")
    opened = suite.open(ctx.ring(k).identity, relayed)
    session_key, asked = opened[:32], opened[32:]
    ctx.ring(k).session_keys.append(session_key)
    reply = suite.encrypt(session_key, serve(asked))
    ctx.send(session, k, j, "DATA", Payload("sym", reply))
    signature = suite.sign(relay, reply)
    relayed = tamper("reply", reply) if tamper else reply
    ctx.send(session, j, i, "DATA", Payload("sym", relayed))
    if not suite.verify(ctx.public(j), relayed, signature):
        _abort(ctx, session, i, j)
        raise ProtocolViolation(f"requester {i} rejected the relay signature of {j}")
    return suite.decrypt(key, relayed)


def _abort(ctx: PrivacyContext, session: Session, src: int, dst: int) -> None:
    session.aborted = True
    ctx.trace.log(session, src, dst, "ABORT", False)


NOT_FOUND = b"NOT_FOUND"


def _supplier_reply(net: Network, k: int, target: FileId) -> Callable[[bytes], bytes]:
    """What supplier ``k`` sends back for a full request naming ``target``."""

    def serve(asked: bytes) -> bytes:
        if asked != target.handle.encode() or not will_respond(net.dispositions[k], net.libraries[k], target):
            return NOT_FOUND
        return _content(target, serve_decision(net.dispositions[k], net.graph, k, net.rng))

    return serve


def handle_lookup_search(
    net: Network, ctx: PrivacyContext, i: int, target: FileId, mode: str, *, query_id: int = 0
) -> PrivateSearch:
    """Prefix lookup, then sealed full requests to candidates in i's trust order.

    The requester verifies each delivered file and updates its own trust in
    the supplier.  No community link is proposed: the supplier would have to
    learn who is asking to approve it.
    """
    j = pick_proxy(net, i)
    if j is None:
        return _direct(net, ctx, i, target, mode, query_id)
    session = ctx.trace.open(i, j, mode)
    lookup = partial_hash_lookup(net, ctx, i, j, target, session, query_id=query_id)
    request = target.handle.encode()
    attempts = []
    for k in rank_providers(net, i, lookup.candidates):
        session.suppliers.add(k)
        serve = _supplier_reply(net, k, target)
        if mode == "full":
            try:
                content = secure_transfer(ctx, session, i, j, k, request, serve)
            except ProtocolViolation:
                continue
        else:
            sealed = ctx.suite.seal(ctx.public(k), request)
            ctx.send(session, i, j, "ENC_REQ", Payload("sealed", sealed))
            ctx.send(session, j, k, "ENC_REQ", Payload("sealed", sealed))
            content = serve(ctx.suite.open(ctx.ring(k).identity, sealed))
            ctx.send(session, k, j, "DATA", Payload("plain", content))
            ctx.send(session, j, i, "DATA", Payload("plain", content))
        if content == NOT_FOUND:
            continue
        outcome = _outcome_of(content)
        cache = net.caches[i]
        cache.put(k, update_direct(cache.get(k) or NEUTRAL, outcome, net.config.recency_rho))
        attempts.append(DownloadAttempt(i, k, target, outcome))
        if outcome is Outcome.AUTHENTIC:
            break
    return PrivateSearch(mode, j, attempts, session, lookup)


def private_search(
    net: Network, ctx: PrivacyContext, i: int, target: FileId, mode: str, *, query_id: int = 0
) -> PrivateSearch:
    if mode == "proxy":
        return proxy_lookup(net, ctx, i, target, query_id=query_id)
    if mode in ("handle", "full"):
        return handle_lookup_search(net, ctx, i, target, mode, query_id=query_id)
    raise ValueError(f"unknown privacy mode {mode!r}")


def session_report(ctx: PrivacyContext) -> dict[str, int]:
    """Counts of private sessions, fallbacks and check failures over the whole trace."""
    report = {"sessions": 0, "fallback": 0, "anonymity_failures": 0, "blindness_failures": 0}
    for session in ctx.trace.sessions.values():
        if session.fallback:
            report["fallback"] += 1
            continue
        report["sessions"] += 1
        report["anonymity_failures"] += bool(anonymity_violations(ctx.trace, session))
        if session.mode == "full":
            report["blindness_failures"] += bool(blindness_violations(ctx.trace, session))
    return report
