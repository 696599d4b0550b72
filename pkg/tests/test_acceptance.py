"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line that the terminal summary prints
at the end of the run (see ``conftest.py``). Tolerances are fixed here and
must not be loosened to make a run green. ``python3 tests/test_acceptance.py``
prints the same lines without pytest.
"""

import math
import random
import re
from dataclasses import replace

import numpy as np
import pytest

from andna import protocol
from andna.idspace import digest32, hash_hostname, parse_ip
from andna.netsim import SimConfig, Simulation
from andna.scenario import run_scenario
from andna.snsd import ResolvedRecord, parse_snsd_nodes, select_record, serialize_snsd_nodes
from andna.wire import make_request

from conftest import DATA, GOLDEN, SCENARIOS

DAY = 86400
CORPUS = ["basic", "queue", "expiry", "mutation", "angelica", "challenge", "churn"]

SELECTION_DRAWS = 10_000
SELECTION_TOL = 0.02
OCCUPANCY_TRIALS = 100_000
OCCUPANCY_TOL = 0.01
SEEDS = range(6)

RESULTS = {}


def report(n, title, ok, detail=""):
    RESULTS[n] = f"{'PASS' if ok else 'FAIL'}  {n:>2}. {title}" + (f": {detail}" if detail else "")
    assert ok, RESULTS[n]


def net(ips, **cfg):
    s = Simulation(SimConfig(**cfg))
    for ip in ips:
        s.join(ip)
    return s


def test_01_quota():
    s = net(["1.2.3.4", "9.9.9.9", "77.0.0.1"], seed=1)
    verdicts = [s.register("1.2.3.4", f"host-{i}").verdict for i in range(257)]
    ok = verdicts[:256] == ["ok"] * 256 and verdicts[256] == "OverQuota"
    report(1, "quota", ok, f"{verdicts.count('ok')} accepted, 257th {verdicts[256]}")


def test_02_queue():
    s = net([f"10.0.0.{i}" for i in range(1, 7)] + ["50.0.0.1"], sweep_interval=3600)
    outs = [s.register(f"10.0.0.{i}", "popular") for i in range(1, 7)]
    head_at = int(next(l for l in s.log if '\tregister\t10.0.0.1\t' in l).split("\t")[0])
    positions = [o.value for o in outs[:5]]
    s.advance_to(head_at + 20 * DAY)
    for i in range(2, 6):
        s.start_update(f"10.0.0.{i}", "popular")
    s.settle()
    s.advance_to(head_at + 30 * DAY - 3600)
    before = s.resolve("50.0.0.1", "popular").value.ip
    # expiry is applied by the hourly sweep
    s.advance_to(head_at + 30 * DAY + 3600)
    after = s.resolve("50.0.0.1", "popular").value.ip
    ok = (positions == [0, 1, 2, 3, 4] and outs[5].verdict == "QueueFull"
          and before == parse_ip("10.0.0.1") and after == parse_ip("10.0.0.2"))
    report(2, "queue", ok, f"positions {positions}, 6th {outs[5].verdict}, "
                           f"day 30 head {before == parse_ip('10.0.0.1')}, promoted {after == parse_ip('10.0.0.2')}")


def test_03_expiry():
    log = run_scenario(SCENARIOS / "expiry.scn").log
    probes = {int(l.split("\t")[0]) // DAY: l.split("\t")[-1]
              for l in log if '\tresolve\t' in l and '"ephemeral"' in l}
    ok = probes == {29: "ok", 46: "NotFound"}
    report(3, "expiry window", ok, f"day 29 {probes.get(29)}, day 46 {probes.get(46)}")


def test_04_mutation():
    golden = (GOLDEN / "mutation.log").read_text()
    result = run_scenario(SCENARIOS / "mutation.scn")
    log = result.log
    transfer = any(re.fullmatch(r"203\ttransfer\t119\.0\.0\.[12]\t74ae323f\ttransferred", l) for l in log)
    via_b = '204\tresolve\t10.0.0.3\t"treasure" svc=0 -> 10.0.0.1/16/1\tok' in log
    blocked = '304\tregister\t10.0.0.2\t"netsukuka"\tStolenNameBlocked' in log
    ok = transfer and via_b and blocked and result.text == golden
    report(4, "mutation safety", ok, f"transfer {transfer}, resolve via B {via_b}, attacker blocked {blocked}")


def test_05_replica_agreement():
    bad = []
    for name in CORPUS:
        sim = run_scenario(SCENARIOS / f"{name}.scn").sim
        for g, dumps in sim.gnode_dumps().items():
            if len(set(dumps.values())) != 1:
                bad.append(f"{name}:{g:06x}")
    report(5, "replica agreement", not bad, f"{len(CORPUS)} scenarios" + (f", diverged {bad}" if bad else ""))


def test_06_snsd_selection():
    rng = random.Random(6)
    a, b, off = ResolvedRecord(1, 1, 3), ResolvedRecord(2, 1, 1), ResolvedRecord(3, 1, 0)
    draws = [select_record([a, b, off], rng=rng).target for _ in range(SELECTION_DRAWS)]
    fa, fb = draws.count(1) / SELECTION_DRAWS, draws.count(2) / SELECTION_DRAWS
    better = ResolvedRecord(4, 0, 1)
    best = sum(select_record([a, b, better], rng=rng) is better for _ in range(SELECTION_DRAWS))
    ok = (abs(fa - 0.75) <= SELECTION_TOL and abs(fb - 0.25) <= SELECTION_TOL
          and draws.count(3) == 0 and best == SELECTION_DRAWS)
    report(6, "snsd weighted selection", ok,
           f"{fa:.4f}/{fb:.4f}, weight-0 drawn {draws.count(3)}, better priority {best}/{SELECTION_DRAWS}")


def test_07_angelica():
    log = run_scenario(SCENARIOS / "angelica.scn").log
    got = {}
    for l in log:
        m = re.match(r'\d+\tresolve\t99\.0\.0\.1\t"angelica" svc=(\d+) -> (\S+)\tok', l)
        if m:
            got[int(m.group(1))] = m.group(2)
    want = {80: "depausceve=>5.6.7.8/1/1", 21: "11.22.33.44/1/1", 0: "1.2.3.4/16/1", 9999: "-"}
    report(7, "snsd angelica example", got == want, ", ".join(f"{k}: {v}" for k, v in sorted(got.items())))


def test_08_parser_roundtrip():
    first = parse_snsd_nodes((DATA / "snsd_nodes").read_bytes())
    second = parse_snsd_nodes(serialize_snsd_nodes(first.lines))
    ok = (not first.diagnostics and len(first.lines) == 3
          and not second.diagnostics and second.lines == first.lines)
    report(8, "parser golden round-trip", ok, f"{len(first.lines)} lines, {len(first.diagnostics)} diagnostics")


def test_09_hash_occupancy():
    gen = np.random.default_rng(9)
    live_sets, per_set = 100, OCCUPANCY_TRIALS // 100
    hits = 0
    for k in range(live_sets):
        live = np.zeros(1 << 16, dtype=bool)
        live[gen.integers(0, 1 << 16, size=1 << 14)] = True
        hashes = [digest32(f"host-{k}-{i}".encode()) & 0xFFFF for i in range(per_set)]
        hits += int(live[hashes].sum())
    p = hits / OCCUPANCY_TRIALS
    expected = 1 - math.exp(-0.25)
    report(9, "hash-space occupancy", abs(p - expected) <= OCCUPANCY_TOL, f"{p:.4f} vs {expected:.4f}")


def _normalise(log):
    """Drop what the seed legitimately changes: peer picks, key-derived values, timing."""
    out = []
    for line in log:
        t, kind, actor, detail, verdict = line.split("\t")
        if kind.startswith("counter-") or kind.startswith("msg:"):
            continue
        if kind == "transfer":
            actor = "*"
        detail = re.sub(r"hook from \S+", "hook", detail)
        detail = re.sub(r"(key|promoted)=[0-9a-f]{16}", r"\1=*", detail)
        out.append((kind, actor, detail, verdict))
    return out


def test_10_determinism():
    same, stable = [], []
    for name in CORPUS:
        path = SCENARIOS / f"{name}.scn"
        a = run_scenario(path, SimConfig(seed=0, trace=True)).text
        b = run_scenario(path, SimConfig(seed=0, trace=True)).text
        same.append(a == b)
        base = _normalise(run_scenario(path, SimConfig(seed=0)).log)
        stable.append(all(_normalise(run_scenario(path, SimConfig(seed=s)).log) == base for s in SEEDS))
    ok = all(same) and all(stable)
    report(10, "determinism", ok, f"same seed identical {sum(same)}/{len(CORPUS)}, "
                                  f"verdicts stable over {len(SEEDS)} seeds {sum(stable)}/{len(CORPUS)}")


def test_11_security_gate():
    s = net(["10.0.0.1", "10.0.0.2", "10.0.0.3", "20.0.0.1", "20.0.0.2"], seed=11)
    assert s.register("10.0.0.1", "treasure").ok
    owner = s.node("10.0.0.1")
    h = hash_hostname("treasure")
    serving = s.gnode_members(protocol.serving_gnode(h, s))
    verdicts = []
    for req in (make_request(owner.kp, "RegisterReq", h, owner.ip),
                make_request(owner.kp, "UpdateReq", h, owner.ip, 1)):
        sig = bytearray(req.signature)
        sig[0] ^= 0x01
        bad = replace(req, signature=bytes(sig))
        for y in serving:
            out = s.inject("10.0.0.2", y, bad)
            s.settle()
            verdicts.append(out.verdict)
    captured = protocol.build_update(owner, "treasure")
    first = s.inject("10.0.0.3", serving[0], captured)
    s.settle()
    replay = s.inject("10.0.0.3", serving[-1], captured)
    s.settle()
    ok = verdicts == ["BadSignature"] * len(verdicts) and first.verdict == "ok" and replay.verdict == "StaleId"
    report(11, "security gate", ok, f"flipped signature rejected {verdicts.count('BadSignature')}/{len(verdicts)}, "
                                    f"replay {replay.verdict}")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                pass
    for n in sorted(RESULTS):
        print(RESULTS[n])
