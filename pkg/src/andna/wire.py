"""Canonical serialization of signed client requests.

Layout (all integers big-endian)::

    request   := field(kind) field(f1) ... field(fn) field(pubkey) field(signature)
    field(x)  := u32 length || bytes(x)

Integer fields are encoded at the fixed width of their declared type. The
signature is signed and verified over the same encoding with an empty
signature field. See docs/wire.md for the per-kind field lists.
"""

import struct
from dataclasses import dataclass, replace
from typing import Dict, List, Tuple

from .identity import KeyPair, PubKey, Signature, sign, verify
from .errors import MalformedKey

_WIDTH = {"u8": 1, "u16": 2, "u32": 4}

SCHEMAS: Dict[str, List[Tuple[str, str]]] = {
    "RegisterReq": [("hname_hash", "u32"), ("registrant", "u32")],
    "UpdateReq": [("hname_hash", "u32"), ("new_ip", "u32"), ("update_id", "u32")],
    "SnsdRegisterReq": [
        ("hname_hash", "u32"),
        ("target_kind", "u8"),
        ("target", "bytes"),
        ("service", "u16"),
        ("priority", "u8"),
        ("weight", "u8"),
        ("trusted_pubkey", "bytes"),
    ],
}
SCHEMAS["SnsdDeleteReq"] = SCHEMAS["SnsdRegisterReq"]


class WireError(ValueError):
    pass


def _field(b: bytes) -> bytes:
    return struct.pack(">I", len(b)) + b


def _encode_value(typ: str, value) -> bytes:
    if typ == "bytes":
        return bytes(value)
    width = _WIDTH[typ]
    if not 0 <= value < 1 << (8 * width):
        raise WireError(f"{value} does not fit {typ}")
    return int(value).to_bytes(width, "big")


@dataclass(frozen=True)
class SignedRequest:
    """A client-originated request, carried intact through every hop."""

    kind: str
    fields: Tuple
    pubkey: PubKey
    signature: Signature = b""

    def __getitem__(self, name):
        for (fname, _), value in zip(SCHEMAS[self.kind], self.fields):
            if fname == name:
                return value
        raise KeyError(name)

    def encode(self, with_signature: bool = True) -> bytes:
        schema = SCHEMAS[self.kind]
        if len(schema) != len(self.fields):
            raise WireError(f"{self.kind} expects {len(schema)} fields")
        out = [_field(self.kind.encode("ascii"))]
        out += [_field(_encode_value(t, v)) for (_, t), v in zip(schema, self.fields)]
        out.append(_field(self.pubkey.data))
        out.append(_field(self.signature if with_signature else b""))
        return b"".join(out)

    def signing_bytes(self) -> bytes:
        return self.encode(with_signature=False)

    def signed_by(self, kp: KeyPair) -> "SignedRequest":
        unsigned = replace(self, pubkey=kp.pub, signature=b"")
        return replace(unsigned, signature=sign(kp, unsigned.signing_bytes()))

    def is_valid(self) -> bool:
        try:
            return verify(self.pubkey, self.signing_bytes(), self.signature)
        except (MalformedKey, WireError):
            return False


def make_request(kp: KeyPair, kind: str, *fields) -> SignedRequest:
    return SignedRequest(kind, tuple(fields), kp.pub).signed_by(kp)


def decode(data: bytes) -> SignedRequest:
    parts = []
    pos = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise WireError("truncated length prefix")
        (n,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if pos + n > len(data):
            raise WireError("truncated field")
        parts.append(data[pos:pos + n])
        pos += n
    if not parts:
        raise WireError("empty message")
    kind = parts[0].decode("ascii")
    schema = SCHEMAS.get(kind)
    if schema is None:
        raise WireError(f"unknown kind {kind!r}")
    if len(parts) != len(schema) + 3:
        raise WireError(f"{kind}: expected {len(schema) + 3} fields, got {len(parts)}")
    values = []
    for (_, typ), raw in zip(schema, parts[1:-2]):
        if typ == "bytes":
            values.append(raw)
        else:
            if len(raw) != _WIDTH[typ]:
                raise WireError(f"bad width for {typ}")
            values.append(int.from_bytes(raw, "big"))
    try:
        pk = PubKey(parts[-2])
    except MalformedKey as exc:
        raise WireError(str(exc)) from exc
    return SignedRequest(kind, tuple(values), pk, parts[-1])
