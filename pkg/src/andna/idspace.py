"""Address space, digests and nearest-gnode selection.

Ips are plain ints in ``[0, 2**32)``. The level-1 gnode of an ip is its top
24 bits. Hostnames and public keys are mapped onto the ip space with
:func:`digest32`: the first four bytes of SHA-256, read big-endian.
"""

import hashlib
import ipaddress
from typing import Iterable, NewType, Union

from .errors import EmptyNetwork, LengthError

Ip = NewType("Ip", int)
GnodeId = NewType("GnodeId", int)

IP_BITS = 32
GNODE_BITS = 24
GNODE_SPACE = 1 << GNODE_BITS
MAX_HOSTNAME_LEN = 512


def digest32(data: bytes) -> Ip:
    return Ip(int.from_bytes(hashlib.sha256(data).digest()[:4], "big"))


def hostname_bytes(h: Union[str, bytes]) -> bytes:
    """Normalize a hostname to octets and enforce the 1..512 byte bound."""
    b = h.encode("utf-8") if isinstance(h, str) else bytes(h)
    if not 1 <= len(b) <= MAX_HOSTNAME_LEN:
        raise LengthError(f"hostname must be 1..{MAX_HOSTNAME_LEN} bytes, got {len(b)}")
    return b


def hash_hostname(h: Union[str, bytes]) -> Ip:
    return digest32(hostname_bytes(h))


def gnode_of(ip: int) -> GnodeId:
    return GnodeId((ip >> 8) & (GNODE_SPACE - 1))


def ring_distance(a: int, b: int) -> int:
    d = abs(a - b) % GNODE_SPACE
    return min(d, GNODE_SPACE - d)


def rounded_hash_gnode(target: int, active: Iterable[int]) -> GnodeId:
    """Nearest active gnode to ``target`` on the 24-bit ring.

    Ties go to the numerically smaller id so the answer is a pure function
    of its inputs.
    """
    best = None
    for g in active:
        key = (ring_distance(target, g), g)
        if best is None or key < best:
            best = key
    if best is None:
        raise EmptyNetwork("no active gnode")
    return GnodeId(best[1])


def ip_to_str(ip: int) -> str:
    return str(ipaddress.IPv4Address(ip))


def parse_ip(text: str) -> Ip:
    """Parse a dotted quad; raises ValueError on anything else."""
    return Ip(int(ipaddress.IPv4Address(text)))
