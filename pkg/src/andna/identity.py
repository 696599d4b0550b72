"""Key pairs, signing and the counter-node address of a key.

Two schemes sit behind the same ``sign``/``verify`` pair:

* ``ed25519`` (default): deterministic signatures from ``cryptography``;
  the public key serializes to its 32 raw bytes.
* ``mac``: a transparent keyed-MAC stand-in for fast tests. Its "public"
  key embeds the secret, so it proves nothing against an adversary.

The scheme is recovered from the public key bytes alone, which is what lets
a serving node verify a request it has never seen the sender of.
"""

import hashlib
import hmac
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import MalformedKey
from .idspace import Ip, digest32

MAX_PUBKEY_LEN = 1024
_MAC_TAG = b"\x00MAC"
_MAC_SECRET_LEN = 32

Signature = bytes


@dataclass(frozen=True)
class PubKey:
    data: bytes

    def __post_init__(self):
        if not self.data or len(self.data) > MAX_PUBKEY_LEN:
            raise MalformedKey(f"public key length {len(self.data)} outside 1..{MAX_PUBKEY_LEN}")

    @property
    def scheme(self) -> str:
        if len(self.data) == 32:
            return "ed25519"
        if len(self.data) == len(_MAC_TAG) + _MAC_SECRET_LEN and self.data.startswith(_MAC_TAG):
            return "mac"
        raise MalformedKey("unrecognized public key encoding")

    def fingerprint(self) -> str:
        return hashlib.sha256(self.data).hexdigest()[:16]

    def __repr__(self):
        return f"PubKey({self.fingerprint()})"


@dataclass(frozen=True)
class KeyPair:
    pub: PubKey
    priv: object = field(repr=False, compare=False)


def _seed_bytes(seed) -> bytes:
    return hashlib.sha256(b"andna-keygen:" + repr(seed).encode()).digest()


def keygen(seed=None, scheme: str = "ed25519") -> KeyPair:
    """Fresh key pair; any hashable ``seed`` makes generation reproducible."""
    secret = os.urandom(32) if seed is None else _seed_bytes(seed)
    if scheme == "ed25519":
        priv = Ed25519PrivateKey.from_private_bytes(secret)
        raw = priv.public_key().public_bytes_raw()
        return KeyPair(PubKey(raw), priv)
    if scheme == "mac":
        return KeyPair(PubKey(_MAC_TAG + secret), secret)
    raise ValueError(f"unknown signature scheme {scheme!r}")


def sign(kp: KeyPair, msg: bytes) -> Signature:
    if kp.pub.scheme == "ed25519":
        return kp.priv.sign(msg)
    return hmac.new(kp.priv, msg, hashlib.sha256).digest()


def verify(pk: PubKey, msg: bytes, sig: Signature) -> bool:
    scheme = pk.scheme
    if scheme == "ed25519":
        try:
            Ed25519PublicKey.from_public_bytes(pk.data).verify(bytes(sig), msg)
        except InvalidSignature:
            return False
        except ValueError as exc:
            raise MalformedKey(str(exc)) from exc
        return True
    secret = pk.data[len(_MAC_TAG):]
    return hmac.compare_digest(hmac.new(secret, msg, hashlib.sha256).digest(), bytes(sig))


def counter_ip(pk: PubKey) -> Ip:
    pk.scheme  # raises MalformedKey for garbage
    return digest32(pk.data)


def export_pubkey(pk: PubKey, path: Union[str, Path]) -> None:
    Path(path).write_bytes(pk.data)


def import_pubkey(path: Union[str, Path]) -> PubKey:
    pk = PubKey(Path(path).read_bytes())
    pk.scheme
    return pk


def load_pubkey(data: Optional[bytes]) -> Optional[PubKey]:
    return None if not data else PubKey(bytes(data))
