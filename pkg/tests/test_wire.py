import pytest
from hypothesis import given, strategies as st

from andna.identity import keygen
from andna.snsd import SnsdRecord
from andna.wire import SignedRequest, WireError, decode, make_request

KP = keygen(seed=11)


def test_register_roundtrip_and_signature():
    req = make_request(KP, "RegisterReq", 0x8B38AE9A, 0x7B7B7B7B)
    assert req.is_valid()
    again = decode(req.encode())
    assert again == req
    assert again["hname_hash"] == 0x8B38AE9A


def test_layout_is_length_prefixed():
    req = SignedRequest("RegisterReq", (1, 2), KP.pub)
    raw = req.signing_bytes()
    assert raw[:4] == b"\x00\x00\x00\x0b" and raw[4:15] == b"RegisterReq"
    assert raw[15:23] == b"\x00\x00\x00\x04\x00\x00\x00\x01"
    assert raw.endswith(b"\x00\x00\x00\x00")  # empty signature field


def test_signature_covers_every_field():
    req = make_request(KP, "UpdateReq", 5, 6, 1)
    forged = SignedRequest("UpdateReq", (5, 6, 2), req.pubkey, req.signature)
    assert not forged.is_valid()


@given(st.integers(0, 2**32 - 1), st.binary(min_size=1, max_size=40), st.integers(0, 65535),
       st.integers(0, 255), st.integers(0, 127))
def test_snsd_request_roundtrip(h, target, service, prio, weight):
    rec = SnsdRecord(target, service, prio, weight)
    req = make_request(KP, "SnsdRegisterReq", *rec.wire_fields(h))
    back = decode(req.encode())
    assert back.is_valid()
    assert SnsdRecord.from_request(back) == rec


def test_decode_rejects_garbage():
    with pytest.raises(WireError):
        decode(b"\x00\x00\x00\x05Nope!")
    with pytest.raises(WireError):
        decode(make_request(KP, "RegisterReq", 1, 2).encode()[:-3])


def test_out_of_range_field():
    with pytest.raises(WireError):
        SignedRequest("RegisterReq", (2**32, 0), KP.pub).encode()
