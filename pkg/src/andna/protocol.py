"""Per-node protocol handlers.

Handlers run on the simulator's event thread. Each one receives the node it
runs on, the delivered :class:`Message` and a context object (the
simulator) exposing the clock, the shared rng, membership queries and the
``send``/``request``/``reply`` primitives. Multi-step flows (register ->
double check -> counter check -> commit) keep their continuation in
``node.pending`` keyed by request id, so no handler ever blocks.
"""

import copy
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .counter import CounterDb, check_request, is_active
from .errors import AndnaError, QueueFull
from .identity import KeyPair, counter_ip, sign
from .idspace import gnode_of, hash_hostname, hostname_bytes, ip_to_str, rounded_hash_gnode
from .registry import (
    EXPIRATION,
    MAX_ANDNA_QUEUE,
    AndnaEntry,
    RegistryDb,
    apply_registration,
    apply_update,
    check_update,
)
from .snsd import (
    ResolvedRecord,
    SnsdConfigLine,
    SnsdRecord,
    challenge_bytes,
    challenge_check,
    delete_snsd,
    register_snsd,
    resolve_service,
    target_str,
)
from .wire import SignedRequest, make_request

log = logging.getLogger(__name__)

Done = Callable[..., None]


@dataclass(frozen=True)
class Message:
    kind: str
    sender: int
    receiver: int
    rid: int
    body: dict = field(default_factory=dict)
    request: Optional[SignedRequest] = None


@dataclass
class ResolvedCacheEntry:
    hname_hash: int
    ip: int
    registered_or_updated_at: int
    expires_at: int
    records: Optional[Tuple[ResolvedRecord, ...]] = None


@dataclass
class Resolution:
    """What a client ends up with after one resolution (and its chain hop).

    ``records`` is the answer as served; ``addresses`` keeps only ips, with
    each hostname-valued record replaced by the main ip it resolved to.
    """

    hostname: bytes
    service: int
    records: List[ResolvedRecord]
    addresses: List[ResolvedRecord]
    registered_or_updated_at: int
    from_cache: bool = False
    chained: Dict[bytes, int] = field(default_factory=dict)

    @property
    def ip(self) -> Optional[int]:
        return self.addresses[0].target if self.addresses else None

    def describe(self) -> str:
        parts = []
        for rec in self.records:
            text = target_str(rec.target)
            if isinstance(rec.target, bytes):
                hop = self.chained.get(rec.target)
                text += "=>" + (ip_to_str(hop) if hop is not None else "?")
            parts.append(f"{text}/{rec.priority}/{rec.weight}")
        return ",".join(parts) or "-"


@dataclass
class LocalName:
    hostname: bytes
    hname_hash: int
    updates_sent: int = 0


@dataclass
class Pending:
    on_reply: Callable[[Message], None]
    on_timeout: Callable[[], None]


@dataclass
class Node:
    ip: int
    kp: KeyPair
    registry: RegistryDb
    counter: CounterDb
    cache: Dict[int, ResolvedCacheEntry] = field(default_factory=dict)
    local_names: Dict[bytes, LocalName] = field(default_factory=dict)
    snsd_config: List[Tuple[SnsdConfigLine, object]] = field(default_factory=list)
    snsd_owned: List[Tuple[bytes, SnsdRecord]] = field(default_factory=list)
    pending: Dict[int, Pending] = field(default_factory=dict)

    @classmethod
    def create(cls, ip: int, kp: KeyPair) -> "Node":
        g = gnode_of(ip)
        return cls(ip, kp, RegistryDb(g), CounterDb(g))

    @property
    def gnode(self) -> int:
        return gnode_of(self.ip)


# -- membership helpers -------------------------------------------------------

def serving_gnode(hname_hash: int, ctx) -> int:
    return rounded_hash_gnode(gnode_of(hname_hash), ctx.live_gnodes())


def previous_gnode(node: Node, target: int, ctx) -> Optional[int]:
    """Nearest live gnode to ``target``'s gnode once our own gnode is left out."""
    others = [g for g in ctx.live_gnodes() if g != node.gnode]
    return rounded_hash_gnode(gnode_of(target), others) if others else None


def pick_member(gnode: int, ctx, exclude: Optional[int] = None) -> Optional[int]:
    members = [m for m in ctx.gnode_members(gnode) if m != exclude]
    return ctx.rng.choice(members) if members else None


def forward_gnode(node: Node, ctx, op: str, request: Optional[SignedRequest] = None, **body) -> None:
    for peer in ctx.gnode_members(node.gnode):
        if peer != node.ip:
            ctx.send(Message("GnodeForward", node.ip, peer, 0, dict(body, op=op), request))


def install_entry(node: Node, entry: AndnaEntry, ctx) -> None:
    node.registry.entries[entry.hname_hash] = copy.deepcopy(entry)
    forward_gnode(node, ctx, "install", entry=copy.deepcopy(entry))


def _reply(node: Node, msg: Message, ctx, verdict: str, **body) -> None:
    ctx.reply(node, msg, dict(body, verdict=verdict))


# -- server side --------------------------------------------------------------

def fetch_from_previous(node: Node, kind: str, hname_hash: int, ctx, done: Callable[[Optional[AndnaEntry]], None],
                        pubkey=None) -> None:
    """Ask the previous rounded gnode for its copy of ``hname_hash``.

    With ``pubkey`` the previous *counter* gnode of that key is asked for its
    counter entry instead.
    """
    target = hname_hash if pubkey is None else counter_ip(pubkey)
    prev = previous_gnode(node, target, ctx)
    if prev is None:
        return done(None)
    z = pick_member(prev, ctx)
    what = f"{hname_hash:08x}" if pubkey is None else f"key={pubkey.fingerprint()}"

    def on_timeout():
        ctx.note(node.ip, kind, f"{what} old gnode unreachable", "clear")
        done(None)

    body = {"hname_hash": hname_hash} if pubkey is None else {"pubkey": pubkey}
    ctx.request(node, z, kind, body, None, lambda m: done(m.body.get("entry")), on_timeout)


def passive_transfer(node: Node, hname_hash: int, ctx, done: Callable[[bool], None]) -> None:
    def got(entry):
        if entry is None:
            return done(False)
        install_entry(node, entry, ctx)
        ctx.note(node.ip, "transfer", f"{hname_hash:08x}", "transferred")
        done(True)

    fetch_from_previous(node, "CacheTransferReq", hname_hash, ctx, got)


def double_check_register(node: Node, req: SignedRequest, ctx, done: Callable[[bool], None]) -> None:
    """``done(True)`` when the old gnode has no competing holder of the name."""
    h = req["hname_hash"]

    def got(entry):
        if entry is None:
            return done(True)
        install_entry(node, entry, ctx)
        done(entry.head.pubkey == req.pubkey)

    fetch_from_previous(node, "DoubleCheckReq", h, ctx, got)


def counter_check(node: Node, req: SignedRequest, mode: str, registrant: int, ctx,
                  on_ok: Callable[[], None], on_fail: Callable[[str], None]) -> None:
    cg = rounded_hash_gnode(gnode_of(counter_ip(req.pubkey)), ctx.live_gnodes())
    c = pick_member(cg, ctx)
    body = {"ip": registrant, "hname_hash": req["hname_hash"], "mode": mode}

    def on_reply(m):
        v = m.body["verdict"]
        on_ok() if v == "ok" else on_fail(v)

    # the counter node may itself fetch from a previous counter gnode first
    ctx.request(node, c, "CounterCheckReq", body, req, on_reply, lambda: on_fail("CounterUnreachable"),
                2 * ctx.request_timeout)


def _gate(node: Node, msg: Message, ctx) -> Optional[str]:
    """Common checks for signed requests aimed at a hash gnode."""
    req = msg.request
    if req is None or req.kind != msg.kind:
        return "BadRequest"
    if serving_gnode(req["hname_hash"], ctx) != node.gnode:
        return "WrongGnode"
    if not req.is_valid():
        return "BadSignature"
    return None


def on_register(node: Node, msg: Message, ctx) -> None:
    bad = _gate(node, msg, ctx)
    if bad:
        return _reply(node, msg, ctx, bad)
    req = msg.request
    h = req["hname_hash"]

    def full(entry):
        return entry is not None and entry.position_of(req.pubkey) is None and len(entry.queue) >= MAX_ANDNA_QUEUE

    def commit():
        try:
            pos = apply_registration(node.registry, h, req["registrant"], req.pubkey, ctx.now)
        except QueueFull:
            return _reply(node, msg, ctx, "QueueFull")
        forward_gnode(node, ctx, "register", req, at=ctx.now)
        _reply(node, msg, ctx, "ok", position=pos)

    def after_double_check(clear):
        if not clear:
            return _reply(node, msg, ctx, "StolenNameBlocked")
        if full(node.registry.entries.get(h)):
            return _reply(node, msg, ctx, "QueueFull")
        counter_check(node, req, "register", req["registrant"], ctx, commit,
                      lambda v: _reply(node, msg, ctx, v))

    entry = node.registry.entries.get(h)
    if full(entry):
        return _reply(node, msg, ctx, "QueueFull")
    if entry is None:
        double_check_register(node, req, ctx, after_double_check)
    else:
        after_double_check(True)


def on_update(node: Node, msg: Message, ctx) -> None:
    bad = _gate(node, msg, ctx)
    if bad:
        return _reply(node, msg, ctx, bad)
    req = msg.request
    h, new_ip, uid = req["hname_hash"], req["new_ip"], req["update_id"]

    def commit():
        try:
            apply_update(node.registry, h, req.pubkey, new_ip, uid, ctx.now)
        except AndnaError as exc:
            return _reply(node, msg, ctx, exc.reason)
        forward_gnode(node, ctx, "update", req, at=ctx.now)
        _reply(node, msg, ctx, "ok")

    def proceed(_=None):
        try:
            check_update(node.registry, h, req.pubkey, uid)
        except AndnaError as exc:
            return _reply(node, msg, ctx, exc.reason)
        counter_check(node, req, "update", new_ip, ctx, commit, lambda v: _reply(node, msg, ctx, v))

    if h in node.registry.entries:
        proceed()
    else:
        passive_transfer(node, h, ctx, proceed)


def _keys_total(node: Node, pk) -> int:
    return sum(len(e.snsd) for e in node.registry.entries.values() if e.head.pubkey == pk)


def on_snsd_register(node: Node, msg: Message, ctx) -> None:
    bad = _gate(node, msg, ctx)
    if bad:
        return _reply(node, msg, ctx, bad)
    req = msg.request
    h = req["hname_hash"]

    def proceed(_=None):
        entry = node.registry.entries.get(h)
        if entry is None:
            return _reply(node, msg, ctx, "UnknownHostname")
        rec = SnsdRecord.from_request(req)
        try:
            register_snsd(entry, rec, req.pubkey, req.signature, _keys_total(node, req.pubkey))
        except AndnaError as exc:
            return _reply(node, msg, ctx, exc.reason)
        forward_gnode(node, ctx, "snsd", req)
        _reply(node, msg, ctx, "ok")

    if h in node.registry.entries:
        proceed()
    else:
        passive_transfer(node, h, ctx, proceed)


def on_snsd_delete(node: Node, msg: Message, ctx) -> None:
    bad = _gate(node, msg, ctx)
    if bad:
        return _reply(node, msg, ctx, bad)
    req = msg.request
    entry = node.registry.entries.get(req["hname_hash"])
    if entry is None:
        return _reply(node, msg, ctx, "UnknownHostname")
    pos = entry.position_of(req.pubkey)
    if pos is None:
        return _reply(node, msg, ctx, "NotOwner")
    if pos != 0:
        return _reply(node, msg, ctx, "QueuedNotActive")
    delete_snsd(entry, SnsdRecord.from_request(req))
    forward_gnode(node, ctx, "snsd-delete", req)
    _reply(node, msg, ctx, "ok")


def on_counter_check(node: Node, msg: Message, ctx) -> None:
    req = msg.request
    h = msg.body["hname_hash"]
    if req is None or req["hname_hash"] != h:
        return _reply(node, msg, ctx, "BadRequest")
    cg = rounded_hash_gnode(gnode_of(counter_ip(req.pubkey)), ctx.live_gnodes())
    if cg != node.gnode:
        return _reply(node, msg, ctx, "WrongGnode")
    if not req.is_valid():
        return _reply(node, msg, ctx, "BadSignature")

    def proceed(_=None):
        if msg.body["mode"] == "update" and not is_active(node.counter, req.pubkey, h):
            return _reply(node, msg, ctx, "CounterInactive")
        if not check_request(node.counter, req.pubkey, h, ctx.now):
            return _reply(node, msg, ctx, "OverQuota")
        for peer in ctx.gnode_members(node.gnode):
            if peer != node.ip:
                ctx.send(Message("CounterForward", node.ip, peer, 0, {"hname_hash": h, "at": ctx.now}, req))
        _reply(node, msg, ctx, "ok")

    if req.pubkey.data in node.counter.entries:
        proceed()
    else:
        counter_transfer(node, req.pubkey, h, ctx, proceed)


def counter_transfer(node: Node, pk, hname_hash: int, ctx, done: Callable[[bool], None]) -> None:
    """Pull a key's counter entry from its previous counter gnode, if any."""
    def got(entry):
        if entry is None:
            return done(False)
        node.counter.entries[pk.data] = copy.deepcopy(entry)
        for peer in ctx.gnode_members(node.gnode):
            if peer != node.ip:
                ctx.send(Message("CounterForward", node.ip, peer, 0, {"entry": copy.deepcopy(entry)}))
        ctx.note(node.ip, "counter-transfer", f"key={pk.fingerprint()}", "transferred")
        done(True)

    fetch_from_previous(node, "CacheTransferReq", hname_hash, ctx, got, pubkey=pk)


def on_counter_forward(node: Node, msg: Message, ctx) -> None:
    if "entry" in msg.body:
        entry = msg.body["entry"]
        node.counter.entries[entry.pubkey.data] = copy.deepcopy(entry)
        return
    req = msg.request
    if req is None or not req.is_valid():
        return ctx.note(node.ip, "CounterForward", "bad signature", "rejected")
    check_request(node.counter, req.pubkey, msg.body["hname_hash"], msg.body["at"])


def on_gnode_forward(node: Node, msg: Message, ctx) -> None:
    op = msg.body["op"]
    req = msg.request
    if op == "install":
        entry = msg.body["entry"]
        node.registry.entries[entry.hname_hash] = copy.deepcopy(entry)
        return
    if req is None or not req.is_valid():
        return ctx.note(node.ip, "GnodeForward", op, "BadSignature")
    h = req["hname_hash"]
    try:
        if op == "register":
            apply_registration(node.registry, h, req["registrant"], req.pubkey, msg.body["at"])
        elif op == "update":
            apply_update(node.registry, h, req.pubkey, req["new_ip"], req["update_id"], msg.body["at"])
        elif op in ("snsd", "snsd-delete"):
            entry = node.registry.entries.get(h)
            if entry is None:
                return ctx.note(node.ip, "GnodeForward", op, "UnknownHostname")
            rec = SnsdRecord.from_request(req)
            if op == "snsd":
                register_snsd(entry, rec, req.pubkey, req.signature, _keys_total(node, req.pubkey))
            elif entry.position_of(req.pubkey) == 0:
                delete_snsd(entry, rec)
    except AndnaError as exc:
        ctx.note(node.ip, "GnodeForward", op, exc.reason)


def on_entry_request(node: Node, msg: Message, ctx) -> None:
    """DoubleCheckReq / CacheTransferReq: hand over our copy of an entry.

    A transfer request naming a ``pubkey`` asks for that key's counter entry.
    """
    if "pubkey" in msg.body:
        entry = node.counter.entries.get(msg.body["pubkey"].data)
    else:
        entry = node.registry.entries.get(msg.body["hname_hash"])
    _reply(node, msg, ctx, "ok", entry=copy.deepcopy(entry))


def on_resolve(node: Node, msg: Message, ctx) -> None:
    h, service = msg.body["hname_hash"], msg.body["service"]
    if serving_gnode(h, ctx) != node.gnode:
        return _reply(node, msg, ctx, "WrongGnode")

    def answer(_=None):
        entry = node.registry.entries.get(h)
        if entry is None:
            return _reply(node, msg, ctx, "NotFound")
        _reply(node, msg, ctx, "ok",
               records=resolve_service(entry, None, service),
               main_ip=entry.head.registrant_ip,
               timestamp=entry.head.last_update_at)

    if h in node.registry.entries:
        answer()
    else:
        passive_transfer(node, h, ctx, answer)


def on_delegated_resolve(node: Node, msg: Message, ctx) -> None:
    def done(verdict, res=None):
        _reply(node, msg, ctx, verdict, resolution=res)

    resolve(node, msg.body["hostname"], 0, ctx, done)


def on_reverse(node: Node, msg: Message, ctx) -> None:
    _reply(node, msg, ctx, "ok", hostnames=sorted(node.local_names))


def on_challenge(node: Node, msg: Message, ctx) -> None:
    _reply(node, msg, ctx, "ok", signature=sign(node.kp, challenge_bytes(msg.body["nonce"])))


HANDLERS = {
    "RegisterReq": on_register,
    "UpdateReq": on_update,
    "SnsdRegisterReq": on_snsd_register,
    "SnsdDeleteReq": on_snsd_delete,
    "CounterCheckReq": on_counter_check,
    "CounterForward": on_counter_forward,
    "GnodeForward": on_gnode_forward,
    "DoubleCheckReq": on_entry_request,
    "CacheTransferReq": on_entry_request,
    "ResolveReq": on_resolve,
    "DelegatedResolveReq": on_delegated_resolve,
    "ReverseReq": on_reverse,
    "ChallengeReq": on_challenge,
}


def handle(node: Node, msg: Message, ctx) -> None:
    if msg.kind == "Reply":
        pending = node.pending.pop(msg.rid, None)
        if pending is None:
            ctx.note(node.ip, "Reply", f"rid={msg.rid}", "late")
            return
        ctx.settled(node, msg.rid)
        pending.on_reply(msg)
        return
    HANDLERS[msg.kind](node, msg, ctx)


def handle_timeout(node: Node, rid: int, ctx) -> None:
    pending = node.pending.pop(rid, None)
    if pending is not None:
        ctx.settled(node, rid)
        pending.on_timeout()


# -- client side --------------------------------------------------------------

def _send_to_hash_gnode(node: Node, kind: str, h: int, body: dict, req, ctx, done: Done) -> None:
    y = pick_member(serving_gnode(h, ctx), ctx)
    ctx.request(node, y, kind, body, req, lambda m: done(m), lambda: done(None), ctx.op_timeout)


def register(node: Node, hostname, ctx, done: Done) -> None:
    """``done(verdict, position)``; position 0 is the head of the queue."""
    name = hostname_bytes(hostname)
    h = hash_hostname(name)
    req = make_request(node.kp, "RegisterReq", h, node.ip)

    def finish(m):
        if m is None:
            return done("Timeout")
        if m.body["verdict"] != "ok":
            return done(m.body["verdict"])
        if name not in node.local_names:
            node.local_names[name] = LocalName(name, h)
        done("ok", m.body["position"])

    _send_to_hash_gnode(node, "RegisterReq", h, {}, req, ctx, finish)


def build_update(node: Node, hostname, new_ip: Optional[int] = None) -> SignedRequest:
    name = hostname_bytes(hostname)
    local = node.local_names.get(name)
    if local is None:
        raise KeyError(name)
    ip = node.ip if new_ip is None else new_ip
    return make_request(node.kp, "UpdateReq", local.hname_hash, ip, local.updates_sent + 1)


def update(node: Node, hostname, ctx, done: Done, new_ip: Optional[int] = None) -> None:
    name = hostname_bytes(hostname)
    if name not in node.local_names:
        return done("UnknownHostname")
    req = build_update(node, name, new_ip)
    send_signed(node, req, ctx, lambda verdict, m=None: _after_update(node, name, req, verdict, done))


def _after_update(node, name, req, verdict, done):
    if verdict == "ok":
        node.local_names[name].updates_sent = req["update_id"]
    done(verdict)


def send_signed(node: Node, req: SignedRequest, ctx, done: Done) -> None:
    """Route an already-signed request to its hash gnode; ``done(verdict, reply)``."""
    def finish(m):
        if m is None:
            return done("Timeout")
        done(m.body["verdict"], m)

    _send_to_hash_gnode(node, req.kind, req["hname_hash"], {}, req, ctx, finish)


def resolve(node: Node, hostname, service: int, ctx, done: Done, chain: bool = True) -> None:
    """``done(verdict, Resolution)``; service-0 answers may come from the cache."""
    name = hostname_bytes(hostname)
    h = hash_hostname(name)
    cached = node.cache.get(h)
    if cached is not None and ctx.now >= cached.expires_at:
        del node.cache[h]
        cached = None
    if service == 0 and cached is not None and cached.records is not None:
        recs = list(cached.records)
        return done("ok", Resolution(name, 0, recs, _ips(recs), cached.registered_or_updated_at, True))

    def on_reply(m):
        if m is None:
            return done("Timeout")
        if m.body["verdict"] != "ok":
            return done(m.body["verdict"])
        recs = list(m.body["records"])
        ts = m.body["timestamp"]
        node.cache[h] = ResolvedCacheEntry(
            h, m.body["main_ip"], ts, ts + EXPIRATION,
            tuple(recs) if service == 0 else (cached.records if cached else None))
        res = Resolution(name, service, recs, _ips(recs), ts)
        hops = [r for r in recs if isinstance(r.target, bytes)] if service != 0 and chain else []
        if not hops:
            return done("ok", res)
        _chain(node, res, hops, ctx, done)

    y = pick_member(serving_gnode(h, ctx), ctx)
    ctx.request(node, y, "ResolveReq", {"hname_hash": h, "service": service}, None,
                on_reply, lambda: on_reply(None), ctx.op_timeout)


def _ips(recs):
    return [r for r in recs if isinstance(r.target, int)]


def _chain(node: Node, res: Resolution, hops, ctx, done: Done) -> None:
    """Resolve hostname targets once at service 0; deeper chains are ignored."""
    targets = sorted({r.target for r in hops})
    results = {}

    def one(target):
        def got(verdict, sub=None):
            results[target] = sub.records[0].target if verdict == "ok" and sub and sub.records else None
            if len(results) < len(targets):
                return
            res.chained = {t: ip for t, ip in results.items() if ip is not None}
            res.addresses = [
                r if isinstance(r.target, int) else ResolvedRecord(res.chained[r.target], r.priority, r.weight)
                for r in res.records
                if isinstance(r.target, int) or r.target in res.chained
            ]
            done("ok", res)
        return got

    for t in targets:
        resolve(node, t, 0, ctx, one(t), chain=False)


def delegated_resolve(node: Node, hostname, ctx, done: Done) -> None:
    name = hostname_bytes(hostname)
    y = pick_member(node.gnode, ctx, exclude=node.ip)
    if y is None:
        return resolve(node, name, 0, ctx, done)

    def on_reply(m):
        if m is None:
            return done("Timeout")
        res = m.body.get("resolution")
        if m.body["verdict"] == "ok" and res is not None:
            h = hash_hostname(name)
            ts = res.registered_or_updated_at
            node.cache[h] = ResolvedCacheEntry(h, res.records[0].target, ts, ts + EXPIRATION, tuple(res.records))
        done(m.body["verdict"], res)

    ctx.request(node, y, "DelegatedResolveReq", {"hostname": name}, None,
                on_reply, lambda: on_reply(None), ctx.op_timeout)


def reverse(node: Node, target: int, ctx, done: Done) -> None:
    def on_reply(m):
        done("ok", list(m.body["hostnames"]))

    ctx.request(node, target, "ReverseReq", {}, None, on_reply, lambda: done("Unreachable"), ctx.op_timeout)


def snsd_requests(node: Node, hostname) -> List[Tuple[SnsdRecord, SignedRequest]]:
    """Signed SnsdRegisterReqs for every loaded config line of ``hostname``."""
    name = hostname_bytes(hostname)
    h = hash_hostname(name)
    out = []
    for line, trusted in node.snsd_config:
        if line.hostname != name:
            continue
        if line.is_zero_override:
            rec = SnsdRecord(node.ip, 0, line.priority, line.weight)
        else:
            rec = line.record(trusted)
        out.append((rec, make_request(node.kp, "SnsdRegisterReq", *rec.wire_fields(h))))
    return out


def challenge(node: Node, hostname: bytes, rec: SnsdRecord, ctx, done: Done) -> None:
    """One challenge round against ``rec``'s node; on failure a delete is sent."""
    nonce = ctx.rng.getrandbits(128).to_bytes(16, "big")

    def failed():
        h = hash_hostname(hostname)
        req = make_request(node.kp, "SnsdDeleteReq", *rec.wire_fields(h))
        node.snsd_owned = [(n, r) for n, r in node.snsd_owned if not (n == hostname and r == rec)]
        send_signed(node, req, ctx, lambda verdict, m=None: done("fail", f"delete={verdict}"))

    def ask(ip):
        def on_reply(m):
            sig = m.body.get("signature")
            ok = challenge_check(node.kp, rec, lambda n: sig, nonce=nonce)
            done("pass") if ok else failed()

        ctx.request(node, ip, "ChallengeReq", {"nonce": nonce}, None, on_reply, failed)

    if isinstance(rec.target, int):
        ask(rec.target)
    else:
        def got(verdict, res=None):
            if verdict != "ok" or res is None or res.ip is None:
                return failed()
            ask(res.ip)
        resolve(node, rec.target, 0, ctx, got)
