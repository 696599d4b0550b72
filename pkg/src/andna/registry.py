"""Per-node ANDNA database.

Each hostname hash maps to an :class:`AndnaEntry` holding a queue of at
most five registrants. The head of the queue is the active registrant; the
others wait for it to expire.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import GapId, QueueFull, StaleId, UnknownHostname, UnknownKey
from .identity import PubKey
from .idspace import ip_to_str
from .snsd import SnsdRecord, ZeroRecordPolicy

MAX_ANDNA_QUEUE = 5
EXPIRATION = 30 * 86400


@dataclass
class QueueSlot:
    registrant_ip: int
    pubkey: PubKey
    registered_at: int
    last_update_at: int
    update_count: int = 0


@dataclass
class AndnaEntry:
    hname_hash: int
    queue: List[QueueSlot]
    snsd: List[SnsdRecord] = field(default_factory=list)
    zero: ZeroRecordPolicy = field(default_factory=ZeroRecordPolicy)

    @property
    def head(self) -> QueueSlot:
        return self.queue[0]

    def position_of(self, pk: PubKey) -> Optional[int]:
        for i, slot in enumerate(self.queue):
            if slot.pubkey == pk:
                return i
        return None


@dataclass(frozen=True)
class HeadView:
    ip: int
    last_update_at: int
    update_count: int


@dataclass
class RegistryDb:
    owner_gnode: int
    entries: Dict[int, AndnaEntry] = field(default_factory=dict)

    def dump(self) -> str:
        """Tab-separated debug dump, one line per queue slot, sorted by hash."""
        lines = []
        for h in sorted(self.entries):
            for pos, slot in enumerate(self.entries[h].queue):
                lines.append(
                    f"{h:08x}\t{pos}\t{ip_to_str(slot.registrant_ip)}\t"
                    f"{slot.update_count}\t{slot.last_update_at}"
                )
        return "".join(line + "\n" for line in lines)

    def snsd_dump(self) -> str:
        lines = []
        for h in sorted(self.entries):
            e = self.entries[h]
            lines.append(f"{h:08x}\tzero\t{e.zero.priority}\t{e.zero.weight}")
            for r in e.snsd:
                lines.append(f"{h:08x}\t{r.service}\t{r.target_str()}\t{r.priority}\t{r.weight}")
        return "".join(line + "\n" for line in lines)


def apply_registration(db: RegistryDb, hname_hash: int, registrant: int, pk: PubKey, now: int) -> int:
    """Add ``pk`` to the queue for ``hname_hash``; returns its position (0 = head).

    A key already in the queue gets its existing position back unchanged.
    """
    entry = db.entries.get(hname_hash)
    if entry is None:
        db.entries[hname_hash] = AndnaEntry(hname_hash, [QueueSlot(registrant, pk, now, now)])
        return 0
    pos = entry.position_of(pk)
    if pos is not None:
        return pos
    if len(entry.queue) >= MAX_ANDNA_QUEUE:
        raise QueueFull(f"queue for {hname_hash:08x} already holds {MAX_ANDNA_QUEUE}")
    entry.queue.append(QueueSlot(registrant, pk, now, now))
    return len(entry.queue) - 1


def check_update(db: RegistryDb, hname_hash: int, pk: PubKey, update_id: int) -> QueueSlot:
    """Validate an update without applying it; returns the target slot."""
    entry = db.entries.get(hname_hash)
    if entry is None:
        raise UnknownHostname(f"{hname_hash:08x}")
    pos = entry.position_of(pk)
    if pos is None:
        raise UnknownKey(f"key not queued for {hname_hash:08x}")
    slot = entry.queue[pos]
    if update_id <= slot.update_count:
        raise StaleId(f"update id {update_id} <= {slot.update_count}")
    if update_id > slot.update_count + 1:
        raise GapId(f"update id {update_id} skips past {slot.update_count + 1}")
    return slot


def apply_update(db: RegistryDb, hname_hash: int, pk: PubKey, new_ip: int, update_id: int, now: int) -> None:
    slot = check_update(db, hname_hash, pk, update_id)
    slot.registrant_ip = new_ip
    slot.last_update_at = now
    slot.update_count = update_id


def expire_sweep(db: RegistryDb, now: int) -> List[Tuple[int, PubKey, Optional[PubKey]]]:
    """Drop slots idle for 30 days or more and promote the next registrant.

    Returns ``(hname_hash, expired_key, promoted_key_or_None)`` per removal.
    """
    out = []
    for h in sorted(db.entries):
        entry = db.entries[h]
        kept = []
        head_gone = False
        expired = []
        for pos, slot in enumerate(entry.queue):
            if now - slot.last_update_at >= EXPIRATION:
                expired.append(slot.pubkey)
                head_gone |= pos == 0
            else:
                kept.append(slot)
        if not expired:
            continue
        entry.queue = kept
        if head_gone:
            entry.snsd = []
            entry.zero = ZeroRecordPolicy()
        new_head = kept[0].pubkey if kept and head_gone else None
        for pk in expired:
            out.append((h, pk, new_head))
            new_head = None
        if not kept:
            del db.entries[h]
    return out


def lookup(db: RegistryDb, hname_hash: int) -> Optional[HeadView]:
    entry = db.entries.get(hname_hash)
    if entry is None:
        return None
    head = entry.head
    return HeadView(head.registrant_ip, head.last_update_at, head.update_count)
