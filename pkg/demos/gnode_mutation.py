"""
When a nearer gnode appears
===========================

Names are served by the gnode nearest to their hash. When a nearer one
joins, it pulls records from the old one on demand, and it checks the old
gnode before letting anyone claim a name it does not know yet.
"""

import andna
from andna.idspace import ip_to_str

sim = andna.Simulation(andna.SimConfig(seed=0))
for ip in ["10.0.0.1", "10.0.0.2", "10.0.0.3", "96.0.0.1", "96.0.0.2"]:
    sim.join(ip)

for name in ("treasure", "netsukuka"):
    sim.register("10.0.0.1", name)
    print(f"{name}: hash gnode {andna.gnode_of(andna.hash_hostname(name)):06x}")

before = {g: len(sim.gnode_members(g)) for g in sim.live_gnodes()}
sim.join("119.0.0.1")
sim.join("119.0.0.2")
print("gnodes before:", {f"{g:06x}": n for g, n in before.items()})
print("gnodes after: ", {f"{g:06x}": len(sim.gnode_members(g)) for g in sim.live_gnodes()})

# 119.0.0.0/24 is empty for now; the first query fills it.
new = sim.node("119.0.0.1")
print("entries held by 119.0.0.1:", len(new.registry.entries))
print("resolve treasure:", sim.resolve("10.0.0.3", "treasure").value.describe())
print("entries held by 119.0.0.1:", len(new.registry.entries))

# Without the double check the new gnode would hand "netsukuka" to whoever asks first.
print("attacker:", sim.register("10.0.0.2", "netsukuka").verdict)
print("owner:   ", sim.register("10.0.0.1", "netsukuka").verdict)
print("resolve netsukuka:", ip_to_str(sim.resolve("10.0.0.3", "netsukuka").value.ip))

# Every member of a gnode holds the same databases.
for g, dumps in sim.gnode_dumps().items():
    print(f"{g:06x}: {len(dumps)} members, identical={len(set(dumps.values())) == 1}")
