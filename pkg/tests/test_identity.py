import pytest
from hypothesis import given, settings, strategies as st

from andna.errors import MalformedKey
from andna.identity import (
    MAX_PUBKEY_LEN,
    PubKey,
    counter_ip,
    export_pubkey,
    import_pubkey,
    keygen,
    sign,
    verify,
)
from andna.idspace import digest32, gnode_of, rounded_hash_gnode


@pytest.mark.parametrize("scheme", ["ed25519", "mac"])
def test_seeded_keygen_is_reproducible(scheme):
    assert keygen(seed=7, scheme=scheme).pub == keygen(seed=7, scheme=scheme).pub
    assert keygen(seed=7, scheme=scheme).pub != keygen(seed=8, scheme=scheme).pub


def test_unseeded_keys_differ():
    assert keygen().pub != keygen().pub


def test_pubkey_size_cap():
    assert len(keygen(seed=7).pub.data) <= MAX_PUBKEY_LEN
    with pytest.raises(MalformedKey):
        PubKey(b"x" * (MAX_PUBKEY_LEN + 1))
    with pytest.raises(MalformedKey):
        PubKey(b"")


@pytest.mark.parametrize("scheme", ["ed25519", "mac"])
def test_sign_verify_examples(scheme):
    kp, other = keygen(seed=1, scheme=scheme), keygen(seed=2, scheme=scheme)
    m = b"register netsukuku"
    sig = sign(kp, m)
    assert verify(kp.pub, m, sig)
    assert not verify(kp.pub, m + b"!", sig)
    assert not verify(other.pub, m, sig)


def test_verify_rejects_unparseable_key():
    with pytest.raises(MalformedKey):
        verify(PubKey(b"\x01" * 33), b"m", b"s")


def _flip(b: bytes, bit: int) -> bytes:
    i = bit % (8 * len(b))
    out = bytearray(b)
    out[i // 8] ^= 1 << (i % 8)
    return bytes(out)


KP = {s: keygen(seed=3, scheme=s) for s in ("ed25519", "mac")}


@settings(max_examples=60)
@given(st.sampled_from(["ed25519", "mac"]), st.binary(min_size=1, max_size=64), st.integers(0, 10_000))
def test_bit_flips_break_verification(scheme, m, bit):
    kp = KP[scheme]
    sig = sign(kp, m)
    assert verify(kp.pub, m, sig)
    assert not verify(kp.pub, _flip(m, bit), sig)
    assert not verify(kp.pub, m, _flip(sig, bit))


def test_counter_ip():
    a, b = keygen(seed=1), keygen(seed=2)
    assert counter_ip(a.pub) == counter_ip(a.pub) == digest32(a.pub.data)
    assert counter_ip(a.pub) != counter_ip(b.pub)
    g = rounded_hash_gnode(gnode_of(counter_ip(a.pub)), {1, 2, 3})
    assert g in {1, 2, 3}


def test_pubkey_file_roundtrip(tmp_path):
    kp = keygen(seed=5)
    export_pubkey(kp.pub, tmp_path / "k.pubk")
    assert import_pubkey(tmp_path / "k.pubk") == kp.pub
