"""Counter-node database: the per-key hostname quota.

Entries store the set of counted hostname hashes rather than a bare number,
which makes a repeated check for the same name a harmless refresh.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Set

from .identity import PubKey
from .registry import EXPIRATION

MAX_HOSTNAMES = 256


@dataclass
class CounterEntry:
    pubkey: PubKey
    hname_hashes: Set[int] = field(default_factory=set)
    last_check_at: int = 0


@dataclass
class CounterDb:
    owner_gnode: int
    entries: Dict[bytes, CounterEntry] = field(default_factory=dict)

    def count(self, pk: PubKey) -> int:
        e = self.entries.get(pk.data)
        return len(e.hname_hashes) if e else 0

    def dump(self) -> str:
        lines = []
        for key in sorted(self.entries):
            e = self.entries[key]
            lines.append(f"{e.pubkey.fingerprint()}\t{len(e.hname_hashes)}\t{e.last_check_at}")
        return "".join(line + "\n" for line in lines)


def check_request(db: CounterDb, pk: PubKey, hname_hash: int, now: int) -> bool:
    """Count ``hname_hash`` against ``pk``'s quota; False means over quota.

    An over-quota verdict leaves the database untouched.
    """
    e = db.entries.get(pk.data)
    if e is None:
        e = CounterEntry(pk)
    elif hname_hash not in e.hname_hashes and len(e.hname_hashes) >= MAX_HOSTNAMES:
        return False
    e.hname_hashes.add(hname_hash)
    e.last_check_at = now
    db.entries[pk.data] = e
    return True


def is_active(db: CounterDb, pk: PubKey, hname_hash: int) -> bool:
    """True when ``pk`` has a live entry that already counts ``hname_hash``."""
    e = db.entries.get(pk.data)
    return e is not None and hname_hash in e.hname_hashes


def counter_expire_sweep(db: CounterDb, now: int) -> List[PubKey]:
    gone = [k for k in sorted(db.entries) if now - db.entries[k].last_check_at >= EXPIRATION]
    return [db.entries.pop(k).pubkey for k in gone]
