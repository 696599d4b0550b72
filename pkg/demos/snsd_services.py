"""
Per-service records
===================

A registered name can point each service at a different machine, given
either as an ip or as another hostname. Within a priority class the
answer is picked by weight.
"""

import random
from collections import Counter

import andna
from andna.idspace import ip_to_str
from andna.snsd import ResolvedRecord, serialize_snsd_nodes

text = """\
# hostname:target:service[:priority[:weight[:pub_key_file]]]
angelica:depausceve:http:1
angelica:11.22.33.44:ftp:1
angelica:angelica:0:1:5
"""

parsed = andna.parse_snsd_nodes(text)
print("diagnostics:", parsed.diagnostics)
print(serialize_snsd_nodes(parsed.lines))

sim = andna.Simulation(andna.SimConfig(seed=4))
for ip in ["1.2.3.4", "5.6.7.8", "99.0.0.1"]:
    sim.join(ip)
sim.register("1.2.3.4", "angelica")
sim.register("5.6.7.8", "depausceve")
sim.snsd_load("1.2.3.4", text)
for out in sim.snsd_register("1.2.3.4", "angelica"):
    print(out.detail, out.verdict)

# http follows "depausceve" one hop to its own address
for service in (80, 21, 0, 22):
    res = sim.resolve("99.0.0.1", "angelica", service).value
    ip = ip_to_str(res.ip) if res.ip is not None else "-"
    print(f"service {service:>2}: {res.describe():<28} ip {ip}")

# Weighted choice: 3:1 inside the best priority class, weight 0 never.
records = [ResolvedRecord(1, 1, 3), ResolvedRecord(2, 1, 1), ResolvedRecord(3, 1, 0), ResolvedRecord(4, 2, 50)]
rng = random.Random(0)
print(Counter(andna.select_record(records, rng=rng).target for _ in range(10_000)))
# If the preferred class is unreachable, the next one serves.
print(andna.select_record(records, reachable=lambda t: t > 2, rng=rng))
