"""Deterministic discrete-event simulator.

Everything random draws from one ``random.Random(seed)`` in handler order,
events run in ``(at, seq)`` order, and messages take ``link_delay`` virtual
seconds per hop. Expiry sweeps and SNSD challenge rounds run network-wide at
fixed multiples of their intervals, so expiry precision is one
``sweep_interval``.

Log lines are tab-separated: ``time, kind, actor_ip, detail, verdict``.
"""

import copy
import heapq
import itertools
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from . import protocol
from .counter import counter_expire_sweep
from .errors import AndnaError, DuplicateIp, UnknownIp
from .identity import import_pubkey, keygen
from .idspace import gnode_of, hostname_bytes, ip_to_str, parse_ip
from .protocol import Message, Node
from .registry import expire_sweep
from .snsd import parse_snsd_nodes

DAY = 86400


@dataclass
class SimConfig:
    seed: int = 0
    link_delay: int = 1
    sweep_interval: int = DAY
    challenge_interval: Optional[int] = None  # defaults to sweep_interval
    trace: bool = False
    key_scheme: str = "ed25519"
    # per-hop wait for server-side sub-requests / whole client operations
    request_timeout: Optional[int] = None
    op_timeout: Optional[int] = None


@dataclass
class Outcome:
    verb: str
    actor: int
    detail: str
    verdict: Optional[str] = None
    value: Any = None

    @property
    def ok(self) -> bool:
        return self.verdict == "ok"


@dataclass(order=True)
class Event:
    at: int
    seq: int
    action: str = field(compare=False)
    payload: Any = field(compare=False, default=None)


def _ip(x: Union[int, str]) -> int:
    return parse_ip(x) if isinstance(x, str) else int(x)


def _q(name: bytes) -> str:
    return '"' + name.decode("utf-8", "replace") + '"'


class Simulation:
    def __init__(self, config: Optional[SimConfig] = None):
        self.config = config or SimConfig()
        c = self.config
        self.request_timeout = c.request_timeout or 4 * c.link_delay
        self.op_timeout = c.op_timeout or 40 * c.link_delay
        self.challenge_interval = c.challenge_interval or c.sweep_interval
        self.now = 0
        self.rng = random.Random(c.seed)
        self.members: Dict[int, Node] = {}
        self._gnodes: Dict[int, List[int]] = {}
        self._queue: List[Event] = []
        self._seq = itertools.count()
        self._rids = itertools.count(1)
        self._active = 0  # deliveries in flight + outstanding requests
        self.log: List[str] = []
        self.messages_delivered = 0
        self.outcomes: List[Outcome] = []
        self._open_ops: Dict[int, Outcome] = {}
        self._op_ids = itertools.count()
        self._schedule(c.sweep_interval, "sweep")
        self._schedule(self.challenge_interval, "challenge")

    # -- context interface used by protocol handlers --------------------------

    def live_gnodes(self) -> List[int]:
        return list(self._gnodes)

    def gnode_members(self, g: int) -> List[int]:
        return self._gnodes.get(g, [])

    def send(self, msg: Message) -> None:
        self._active += 1
        self._schedule(self.now + self.config.link_delay, "deliver", msg)

    def request(self, node: Node, to: int, kind: str, body: dict, req, on_reply, on_timeout,
                timeout: Optional[int] = None) -> int:
        rid = next(self._rids)
        node.pending[rid] = protocol.Pending(on_reply, on_timeout)
        self._active += 1
        self._schedule(self.now + (timeout or self.request_timeout), "timer", (node.ip, rid))
        self.send(Message(kind, node.ip, to, rid, body, req))
        return rid

    def reply(self, node: Node, msg: Message, body: dict) -> None:
        self.send(Message("Reply", node.ip, msg.sender, msg.rid, dict(body, kind=msg.kind)))

    def settled(self, node: Node, rid: int) -> None:
        self._active -= 1

    def note(self, actor: int, kind: str, detail: str, verdict: str) -> None:
        self._emit(kind, actor, detail, verdict)

    # -- event loop ------------------------------------------------------------

    def _schedule(self, at: int, action: str, payload=None) -> None:
        heapq.heappush(self._queue, Event(at, next(self._seq), action, payload))

    def _emit(self, kind: str, actor, detail: str, verdict: str) -> None:
        who = ip_to_str(actor) if isinstance(actor, int) else actor
        self.log.append(f"{self.now}\t{kind}\t{who}\t{detail}\t{verdict}")

    def step(self) -> List[str]:
        """Run the earliest event; returns the log lines it produced."""
        mark = len(self.log)
        ev = heapq.heappop(self._queue)
        self.now = max(self.now, ev.at)
        getattr(self, "_on_" + ev.action)(ev.payload)
        return self.log[mark:]

    def _on_deliver(self, msg: Message) -> None:
        self._active -= 1
        node = self.members.get(msg.receiver)
        kind = msg.kind if msg.kind != "Reply" else f"Reply({msg.body.get('kind')})"
        if node is None:
            self._emit("msg:" + kind, msg.receiver, f"from={ip_to_str(msg.sender)} rid={msg.rid}", "dropped")
            return
        self.messages_delivered += 1
        if self.config.trace:
            verdict = msg.body.get("verdict", "delivered") if msg.kind == "Reply" else "delivered"
            self._emit("msg:" + kind, msg.receiver, f"from={ip_to_str(msg.sender)} rid={msg.rid}", verdict)
        protocol.handle(node, msg, self)

    def _on_timer(self, payload) -> None:
        ip, rid = payload
        node = self.members.get(ip)
        if node is not None:
            protocol.handle_timeout(node, rid, self)

    def _on_sweep(self, _) -> None:
        for ip in sorted(self.members):
            node = self.members[ip]
            for h, gone, promoted in expire_sweep(node.registry, self.now):
                detail = f"{h:08x} key={gone.fingerprint()} promoted={promoted.fingerprint() if promoted else '-'}"
                self._emit("expire", ip, detail, "expired")
            for pk in counter_expire_sweep(node.counter, self.now):
                self._emit("counter-expire", ip, f"key={pk.fingerprint()}", "deactivated")
            for h in [h for h, c in node.cache.items() if self.now >= c.expires_at]:
                del node.cache[h]
        self._schedule(self.now + self.config.sweep_interval, "sweep")

    def _on_challenge(self, _) -> None:
        for ip in sorted(self.members):
            node = self.members[ip]
            for name, rec in list(node.snsd_owned):
                if rec.trusted_pubkey is not None:
                    op = self._open("challenge", ip, f"{_q(name)} svc={rec.service} {rec.target_str()}")
                    protocol.challenge(node, name, rec, self, self._closer(op))
        self._schedule(self.now + self.challenge_interval, "challenge")

    def _on_call(self, fn: Callable[[], None]) -> None:
        fn()

    @property
    def idle(self) -> bool:
        return self._active == 0

    def settle(self, limit: int = 1_000_000) -> None:
        """Step until no message or request is outstanding."""
        while self._active > 0:
            limit -= 1
            if limit < 0:
                raise RuntimeError("simulation did not settle")
            self.step()

    def advance_to(self, t: int) -> None:
        if t < self.now:
            raise ValueError(f"cannot go back from {self.now} to {t}")
        while self._queue and self._queue[0].at <= t:
            self.step()
        self.now = t

    def advance(self, seconds: int) -> None:
        self.advance_to(self.now + seconds)

    def schedule_call(self, at: int, fn: Callable[[], None]) -> None:
        self._schedule(at, "call", fn)

    # -- operations ------------------------------------------------------------

    def _open(self, verb: str, actor: int, detail: str) -> int:
        op = next(self._op_ids)
        out = Outcome(verb, actor, detail)
        self._open_ops[op] = out
        self.outcomes.append(out)
        return op

    def _finish(self, op: int, verdict: str, extra: str = "", value=None) -> None:
        out = self._open_ops.pop(op, None)
        if out is None:
            return
        out.verdict, out.value = verdict, value
        if extra:
            out.detail = f"{out.detail} {extra}"
        self._emit(out.verb, out.actor, out.detail, verdict)

    def _closer(self, op: int) -> Callable:
        def done(verdict, value=None):
            self._finish(op, verdict, "" if value is None else str(value), value)
        return done

    def _node(self, ip) -> Node:
        node = self.members.get(_ip(ip))
        if node is None:
            raise UnknownIp(f"{ip} is not a live node")
        return node

    def join(self, ip, key_label: str = "") -> Node:
        """Add a node and run the andna hook against one same-gnode peer."""
        ip = _ip(ip)
        if ip in self.members:
            raise DuplicateIp(ip_to_str(ip))
        kp = node_keypair(self.config.seed, ip, key_label, self.config.key_scheme)
        node = Node.create(ip, kp)
        peers = self._gnodes.get(node.gnode, [])
        if peers:
            src = self.members[self.rng.choice(peers)]
            andna_hook(node, src)
            detail = f"hook from {ip_to_str(src.ip)}"
        else:
            detail = f"new gnode {node.gnode:06x}"
        self.members[ip] = node
        self._gnodes[node.gnode] = sorted(peers + [ip])
        self._emit("join", ip, detail, "ok")
        return node

    def leave(self, ip) -> None:
        ip = _ip(ip)
        node = self.members.pop(ip, None)
        if node is None:
            raise UnknownIp(ip_to_str(ip))
        self._active -= len(node.pending)
        node.pending.clear()
        g = node.gnode
        self._gnodes[g] = [m for m in self._gnodes[g] if m != ip]
        if not self._gnodes[g]:
            del self._gnodes[g]
        for op, out in list(self._open_ops.items()):
            if out.actor == ip:
                self._finish(op, "Aborted")
        self._emit("leave", ip, "-", "ok")

    def start_register(self, ip, hostname) -> Outcome:
        node = self._node(ip)
        name = hostname_bytes(hostname)
        op = self._open("register", node.ip, _q(name))
        protocol.register(node, name, self, lambda v, pos=None: self._finish(
            op, v, "" if pos is None else f"pos={pos}", pos))
        return self._last(op)

    def start_update(self, ip, hostname, new_ip=None) -> Outcome:
        node = self._node(ip)
        name = hostname_bytes(hostname)
        new = None if new_ip is None else _ip(new_ip)
        detail = _q(name) + ("" if new is None else f" ip={ip_to_str(new)}")
        op = self._open("update", node.ip, detail)
        protocol.update(node, name, self, lambda v: self._finish(op, v), new_ip=new)
        return self._last(op)

    def start_resolve(self, ip, hostname, service: int = 0, delegated: bool = False) -> Outcome:
        node = self._node(ip)
        name = hostname_bytes(hostname)
        verb = "resolve-delegated" if delegated else "resolve"
        op = self._open(verb, node.ip, f"{_q(name)} svc={service}")

        def done(verdict, res=None):
            if res is None:
                return self._finish(op, verdict)
            extra = "-> " + res.describe() + (" (cache)" if res.from_cache else "")
            self._finish(op, verdict, extra, res)

        if delegated:
            protocol.delegated_resolve(node, name, self, done)
        else:
            protocol.resolve(node, name, service, self, done)
        return self._last(op)

    def start_reverse(self, ip, target) -> Outcome:
        node = self._node(ip)
        t = _ip(target)
        op = self._open("reverse", node.ip, ip_to_str(t))

        def done(verdict, names=None):
            extra = "" if names is None else "-> " + (",".join(_q(n) for n in names) or "-")
            self._finish(op, verdict, extra, names)

        protocol.reverse(node, t, self, done)
        return self._last(op)

    def snsd_load(self, ip, text: Union[str, bytes], base_dir: Union[str, Path] = ".") -> int:
        """Load an snsd_nodes file into a node; returns the number of lines.

        Raises ValueError listing the diagnostics if any line is rejected.
        """
        node = self._node(ip)
        result = parse_snsd_nodes(text)
        if result.diagnostics:
            raise ValueError("; ".join(str(d) for d in result.diagnostics))
        config = []
        for line in result.lines:
            trusted = None
            if line.pub_key_file:
                trusted = import_pubkey(Path(base_dir) / line.pub_key_file.lstrip("/"))
            config.append((line, trusted))
        node.snsd_config = config
        self._emit("snsd-load", node.ip, f"lines={len(config)}", "ok")
        return len(config)

    def start_snsd_register(self, ip, hostname) -> List[Outcome]:
        node = self._node(ip)
        name = hostname_bytes(hostname)
        outs = []
        for rec, req in protocol.snsd_requests(node, name):
            op = self._open("snsd-register", node.ip, f"{_q(name)} svc={rec.service} {rec.target_str()}")

            def done(verdict, m=None, op=op, rec=rec):
                if verdict == "ok" and not (rec.service == 0 and rec.target == node.ip):
                    node.snsd_owned = [(n, r) for n, r in node.snsd_owned
                                       if not (n == name and r.same_slot(rec))] + [(name, rec)]
                self._finish(op, verdict)

            protocol.send_signed(node, req, self, done)
            outs.append(self._last(op))
        return outs

    def inject(self, sender, receiver, request) -> Outcome:
        """Deliver a captured signed request verbatim, as a replaying attacker would."""
        src = self._node(sender)
        op = self._open("inject", src.ip, request.kind)

        def on_reply(m):
            self._finish(op, m.body["verdict"])

        self.request(src, _ip(receiver), request.kind, {}, request, on_reply,
                     lambda: self._finish(op, "Timeout"), self.op_timeout)
        return self._last(op)

    def _last(self, op: int) -> Outcome:
        return self.outcomes[op]

    # synchronous conveniences: issue now, run to quiescence, return the outcome

    def register(self, ip, hostname) -> Outcome:
        out = self.start_register(ip, hostname)
        self.settle()
        return out

    def update(self, ip, hostname, new_ip=None) -> Outcome:
        out = self.start_update(ip, hostname, new_ip)
        self.settle()
        return out

    def resolve(self, ip, hostname, service: int = 0, delegated: bool = False) -> Outcome:
        out = self.start_resolve(ip, hostname, service, delegated)
        self.settle()
        return out

    def reverse(self, ip, target) -> Outcome:
        out = self.start_reverse(ip, target)
        self.settle()
        return out

    def snsd_register(self, ip, hostname) -> List[Outcome]:
        outs = self.start_snsd_register(ip, hostname)
        self.settle()
        return outs

    # -- inspection ------------------------------------------------------------

    def node(self, ip) -> Node:
        return self._node(ip)

    def gnode_dumps(self) -> Dict[int, Dict[int, str]]:
        """``{gnode: {ip: registry dump + snsd dump + counter dump}}`` for live nodes."""
        out: Dict[int, Dict[int, str]] = {}
        for g, ips in sorted(self._gnodes.items()):
            out[g] = {}
            for ip in ips:
                n = self.members[ip]
                out[g][ip] = n.registry.dump() + n.registry.snsd_dump() + n.counter.dump()
        return out


def node_keypair(seed: int, ip: int, key_label: str = "", scheme: str = "ed25519"):
    """Key pair of a simulated node.

    Unlabelled nodes derive their key from the global seed and their ip; a
    labelled key depends on the label alone, so its public key can be
    exported once and referenced from snsd_nodes files under any seed.
    """
    if key_label:
        return keygen(seed=("label", key_label), scheme=scheme)
    return keygen(seed=(seed, ip), scheme=scheme)


def andna_hook(joiner: Node, peer: Node) -> None:
    """Copy a same-gnode peer's registry, counter db and resolved cache."""
    joiner.registry.entries = copy.deepcopy(peer.registry.entries)
    joiner.counter.entries = copy.deepcopy(peer.counter.entries)
    joiner.cache = copy.deepcopy(peer.cache)
