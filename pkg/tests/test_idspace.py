import hashlib
import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from andna.errors import EmptyNetwork, LengthError
from andna.idspace import (
    GNODE_SPACE,
    digest32,
    gnode_of,
    hash_hostname,
    ip_to_str,
    parse_ip,
    ring_distance,
    rounded_hash_gnode,
)

gnodes = st.integers(0, GNODE_SPACE - 1)

# first four bytes of sha256, frozen once from hashlib
GOLDEN_DIGESTS = {
    b"netsukuku": 0x8B38AE9A,
    b"netsukuka": 0x799527C9,
}


def test_digest_golden():
    for data, expected in GOLDEN_DIGESTS.items():
        assert digest32(data) == expected
        assert digest32(data) == int(hashlib.sha256(data).hexdigest()[:8], 16)
    assert digest32(b"netsukuku") != digest32(b"netsukuka")


@given(st.binary())
def test_digest_deterministic(b):
    assert digest32(b) == digest32(b)
    assert 0 <= digest32(b) < 2**32


def test_hash_hostname_bounds():
    with pytest.raises(LengthError):
        hash_hostname(b"x" * 513)
    with pytest.raises(LengthError):
        hash_hostname(b"")
    assert hash_hostname(b"x" * 512) == digest32(b"x" * 512)
    assert hash_hostname("netsukuku") == digest32(b"netsukuku")


def test_bucket_occupancy_monte_carlo():
    # 2^14 draws into 2^16 buckets occupy 1 - e^(-1/4) of them
    rng = random.Random(1)
    buckets = np.zeros(1 << 16, dtype=bool)
    for _ in range(1 << 14):
        buckets[digest32(rng.randbytes(16)) & 0xFFFF] = True
    assert abs(buckets.mean() - (1 - math.exp(-0.25))) < 0.01


@pytest.mark.parametrize("ip,g", [(0x0B16212C, 0x0B1621), (0, 0), (0xFFFFFFFF, 0xFFFFFF)])
def test_gnode_of(ip, g):
    assert gnode_of(ip) == g


def test_gnode_of_dotted():
    assert gnode_of(parse_ip("11.22.33.44")) == 0x0B1621
    assert ip_to_str(0x0B16212C) == "11.22.33.44"


@given(gnodes, st.integers(0, 255))
def test_gnode_constant_over_last_octet(g, low):
    assert gnode_of((g << 8) | low) == g


def test_ring_distance_examples():
    g = 12345
    assert ring_distance(g, g) == 0
    assert ring_distance(0, GNODE_SPACE - 1) == 1
    assert ring_distance(8, 13) == 5


@given(gnodes, gnodes)
def test_ring_distance_symmetric_and_bounded(a, b):
    assert ring_distance(a, b) == ring_distance(b, a)
    assert ring_distance(a, b) <= GNODE_SPACE // 2


def _scan(target, active):
    # exhaustive oracle: sort by (distance, id) computed from scratch
    def dist(g):
        d = abs(target - g)
        return min(d, GNODE_SPACE - d)
    return sorted(active, key=lambda g: (dist(g), g))[0]


def test_rounded_hash_gnode_examples():
    assert rounded_hash_gnode(10, {10, 99}) == 10
    assert rounded_hash_gnode(10, {8, 13}) == 8 == _scan(10, {8, 13})
    assert rounded_hash_gnode(10, {8, 12}) == 8
    with pytest.raises(EmptyNetwork):
        rounded_hash_gnode(10, set())


@given(gnodes, st.sets(gnodes, min_size=1, max_size=30))
def test_rounded_hash_gnode_is_nearest_member(t, active):
    r = rounded_hash_gnode(t, active)
    assert r in active
    assert all(ring_distance(t, r) <= ring_distance(t, g) for g in active)
    assert r == _scan(t, active)
    if t in active:
        assert r == t
