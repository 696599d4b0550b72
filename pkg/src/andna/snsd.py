"""SNSD service records: validation, weighted selection, the snsd_nodes file
parser, and the trusted-node challenge.

A record target is either an ip (``int``) or a hostname (``bytes``). Lower
numeric priority is tried first, as with DNS SRV records.
"""

import os
import random
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from .errors import (
    AllDisabled,
    BadSignature,
    GlobalLimit,
    InvalidRecord,
    NotOwner,
    PerNameLimit,
    QueuedNotActive,
)
from .identity import KeyPair, PubKey, Signature, verify
from .idspace import MAX_HOSTNAME_LEN, ip_to_str, parse_ip
from .wire import SignedRequest

Target = Union[int, bytes]

MAX_WEIGHT = 127
MAX_SNSD_PER_NAME = 16
MAX_SNSD_PER_KEY = 256
DEFAULT_PRIORITY = 16
DEFAULT_WEIGHT = 1

SERVICES: Dict[str, int] = {"http": 80, "ftp": 21, "ssh": 22, "smtp": 25, "domain": 53}

_DOTTED_QUAD = re.compile(r"^\d{1,3}(\.\d{1,3}){3}$")


def target_str(target: Target) -> str:
    return ip_to_str(target) if isinstance(target, int) else target.decode("utf-8", "replace")


@dataclass(frozen=True)
class SnsdRecord:
    target: Target
    service: int
    priority: int = DEFAULT_PRIORITY
    weight: int = DEFAULT_WEIGHT
    trusted_pubkey: Optional[PubKey] = None

    def target_str(self) -> str:
        return target_str(self.target)

    def wire_fields(self, hname_hash: int) -> tuple:
        is_host = isinstance(self.target, bytes)
        return (
            hname_hash,
            1 if is_host else 0,
            self.target if is_host else self.target.to_bytes(4, "big"),
            self.service,
            self.priority,
            self.weight,
            self.trusted_pubkey.data if self.trusted_pubkey else b"",
        )

    @classmethod
    def from_request(cls, req: SignedRequest) -> "SnsdRecord":
        _, kind, raw, service, priority, weight, tpk = req.fields
        target = raw if kind == 1 else int.from_bytes(raw, "big")
        return cls(target, service, priority, weight, PubKey(tpk) if tpk else None)

    def same_slot(self, other: "SnsdRecord") -> bool:
        return self.target == other.target and self.service == other.service


@dataclass
class ZeroRecordPolicy:
    priority: int = DEFAULT_PRIORITY
    weight: int = DEFAULT_WEIGHT


class ResolvedRecord(NamedTuple):
    target: Target
    priority: int
    weight: int


def validate_record(r: SnsdRecord, registrant_ip: Optional[int] = None) -> List[str]:
    """Return a list of violations; empty means the record is acceptable."""
    out = []
    if not 0 <= r.weight <= MAX_WEIGHT:
        out.append(f"weight {r.weight} must be less than {MAX_WEIGHT + 1}")
    if not 0 <= r.priority <= 255:
        out.append(f"priority {r.priority} outside 0..255")
    if not 0 <= r.service <= 0xFFFF:
        out.append(f"service {r.service} outside 0..65535")
    if isinstance(r.target, bytes):
        if not 1 <= len(r.target) <= MAX_HOSTNAME_LEN:
            out.append(f"hostname target must be 1..{MAX_HOSTNAME_LEN} bytes")
    elif not 0 <= r.target < 1 << 32:
        out.append("ip target out of range")
    elif r.service == 0 and registrant_ip is not None and r.target != registrant_ip:
        out.append("service 0 main ip is always the register node's ip")
    return out


def is_zero_override(r: SnsdRecord, head_ip: int) -> bool:
    return r.service == 0 and r.target == head_ip


def register_snsd(entry, r: SnsdRecord, pk: PubKey, sig: Signature, total_for_key: int) -> None:
    """Attach ``r`` to ``entry`` on behalf of ``pk``; raises on rejection.

    A service-0 record aimed at the head's own ip adjusts the zero record's
    priority and weight instead of being stored.
    """
    pos = entry.position_of(pk)
    if pos is None:
        raise NotOwner("key does not hold this hostname")
    if pos != 0:
        raise QueuedNotActive(f"key is queued at position {pos}")
    req = SignedRequest("SnsdRegisterReq", r.wire_fields(entry.hname_hash), pk, sig)
    if not req.is_valid():
        raise BadSignature("snsd record signature")
    problems = validate_record(r, entry.head.registrant_ip)
    if problems:
        raise InvalidRecord("; ".join(problems))
    if is_zero_override(r, entry.head.registrant_ip):
        entry.zero = ZeroRecordPolicy(r.priority, r.weight)
        return
    for i, old in enumerate(entry.snsd):
        if old.same_slot(r):
            entry.snsd[i] = r
            return
    if len(entry.snsd) >= MAX_SNSD_PER_NAME:
        raise PerNameLimit(f"already {MAX_SNSD_PER_NAME} records")
    if total_for_key >= MAX_SNSD_PER_KEY:
        raise GlobalLimit(f"key already holds {MAX_SNSD_PER_KEY} records")
    entry.snsd.append(r)


def delete_snsd(entry, r: SnsdRecord) -> bool:
    before = len(entry.snsd)
    entry.snsd = [x for x in entry.snsd if not x.same_slot(r)]
    return len(entry.snsd) != before


def resolve_service(entry, zero: Optional[ZeroRecordPolicy], service: int) -> List[ResolvedRecord]:
    zero = zero or entry.zero
    out = []
    if service == 0:
        out.append(ResolvedRecord(entry.head.registrant_ip, zero.priority, zero.weight))
    out += [ResolvedRecord(r.target, r.priority, r.weight) for r in entry.snsd if r.service == service]
    return out


def select_record(records: Sequence, reachable: Callable[[Target], bool] = lambda t: True, rng=None):
    """Pick one record: best reachable priority class, then weight-proportional.

    ``records`` may hold anything exposing ``target``, ``priority`` and
    ``weight``. Weight-0 records are never chosen.
    """
    rng = rng or random.Random()
    live = [r for r in records if r.weight > 0 and reachable(r.target)]
    if not live:
        raise AllDisabled("no enabled, reachable record")
    best = min(r.priority for r in live)
    cls = [r for r in live if r.priority == best]
    return rng.choices(cls, weights=[r.weight for r in cls])[0]


def challenge_check(register_kp: KeyPair, record: SnsdRecord,
                    respond: Callable[[bytes], Optional[Signature]],
                    nonce: Optional[bytes] = None) -> bool:
    """Ask the SNSD node to sign a fresh nonce; True iff ``trusted_pubkey`` verifies it.

    ``respond`` returning None or raising TimeoutError counts as a failure.
    """
    if record.trusted_pubkey is None:
        raise ValueError("record has no trusted public key")
    nonce = nonce if nonce is not None else os.urandom(16)
    try:
        sig = respond(nonce)
    except TimeoutError:
        return False
    if sig is None:
        return False
    return verify(record.trusted_pubkey, challenge_bytes(nonce), sig)


def challenge_bytes(nonce: bytes) -> bytes:
    return b"andna-snsd-challenge:" + nonce


# -- snsd_nodes file ---------------------------------------------------------

@dataclass(frozen=True)
class SnsdConfigLine:
    hostname: bytes
    target: Target
    service: int
    priority: int = DEFAULT_PRIORITY
    weight: int = DEFAULT_WEIGHT
    pub_key_file: Optional[str] = None

    def record(self, trusted_pubkey: Optional[PubKey] = None) -> SnsdRecord:
        return SnsdRecord(self.target, self.service, self.priority, self.weight, trusted_pubkey)

    @property
    def is_zero_override(self) -> bool:
        return self.service == 0 and self.target == self.hostname


@dataclass(frozen=True)
class Diagnostic:
    lineno: int
    message: str

    def __str__(self):
        return f"line {self.lineno}: {self.message}"


@dataclass
class ParseResult:
    lines: List[SnsdConfigLine] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)
    linenos: List[int] = field(default_factory=list)


def _parse_target(text: str) -> Target:
    if _DOTTED_QUAD.match(text):
        return parse_ip(text)
    return text.encode("utf-8")


def _parse_line(text: str, services: Dict[str, int]) -> SnsdConfigLine:
    parts = text.split(":")
    if len(parts) < 3:
        raise ValueError("expected hostname:target:service[:priority[:weight]][:pub_key_file]")
    host, target_txt, service_txt = (p.strip() for p in parts[:3])
    rest = parts[3:]
    if not host:
        raise ValueError("empty hostname")
    hostname = host.encode("utf-8")
    if len(hostname) > MAX_HOSTNAME_LEN:
        raise ValueError(f"hostname longer than {MAX_HOSTNAME_LEN} bytes")
    if not target_txt:
        raise ValueError("empty target")
    try:
        target = _parse_target(target_txt)
    except ValueError:
        raise ValueError(f"malformed ip target {target_txt!r}") from None

    if service_txt.isdigit():
        service = int(service_txt)
    elif service_txt in services:
        service = services[service_txt]
    else:
        raise ValueError(f"unknown service {service_txt!r}")
    if service > 0xFFFF:
        raise ValueError(f"service {service} outside 0..65535")

    nums = []
    while rest and len(nums) < 2 and rest[0].strip().isdigit():
        nums.append(int(rest.pop(0)))
    pub_key_file = ":".join(rest).strip() or None
    if rest and pub_key_file is None:
        raise ValueError("empty pub_key_file field")
    if pub_key_file is not None and pub_key_file.isdigit():
        raise ValueError("too many numeric fields")
    priority = nums[0] if nums else DEFAULT_PRIORITY
    weight = nums[1] if len(nums) > 1 else DEFAULT_WEIGHT
    if priority > 255:
        raise ValueError(f"priority {priority} outside 0..255")

    line = SnsdConfigLine(hostname, target, service, priority, weight, pub_key_file)
    problems = validate_record(line.record())
    if problems:
        raise ValueError("; ".join(problems))
    return line


def parse_snsd_nodes(text: Union[str, bytes], service_table: Optional[Dict[str, int]] = None) -> ParseResult:
    """Parse an snsd_nodes file; bad lines become diagnostics, never exceptions."""
    services = SERVICES if service_table is None else service_table
    if isinstance(text, bytes):
        text = text.decode("utf-8", "replace")
    result = ParseResult()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            line = _parse_line(stripped, services)
        except ValueError as exc:
            result.diagnostics.append(Diagnostic(lineno, str(exc)))
            continue
        result.lines.append(line)
        result.linenos.append(lineno)
    return result


def serialize_line(line: SnsdConfigLine) -> str:
    fields = [
        line.hostname.decode("utf-8"),
        target_str(line.target),
        str(line.service),
        str(line.priority),
        str(line.weight),
    ]
    if line.pub_key_file:
        fields.append(line.pub_key_file)
    return ":".join(fields)


def serialize_snsd_nodes(lines: Sequence[SnsdConfigLine]) -> str:
    return "".join(serialize_line(l) + "\n" for l in lines)
