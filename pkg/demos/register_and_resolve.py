"""
Registering and resolving a hostname
====================================

A handful of nodes in three gnodes. One of them claims "netsukuku"; the
others look it up, first directly, then through a gnode peer, then in
reverse.
"""

import andna

sim = andna.Simulation(andna.SimConfig(seed=1))
for ip in ["1.2.3.4", "1.2.3.5", "123.123.123.123", "200.1.1.1"]:
    sim.join(ip)

# The name lives on the gnode nearest to its 32-bit digest.
h = andna.hash_hostname("netsukuku")
print(f"hash(netsukuku) = {h:08x}, hash gnode {andna.gnode_of(h):06x}")
print("live gnodes:", ", ".join(f"{g:06x}" for g in sim.live_gnodes()))
print(f"served by {andna.rounded_hash_gnode(andna.gnode_of(h), sim.live_gnodes()):06x}")

out = sim.register("1.2.3.4", "netsukuku")
print("register:", out.verdict, "position", out.value)

res = sim.resolve("123.123.123.123", "netsukuku")
print("resolve:", res.value.describe())

# Asked again, the resolver answers from its own cache: no messages move.
sent = sim.messages_delivered
res = sim.resolve("123.123.123.123", "netsukuku")
print("again:", res.value.describe(), "from cache" if res.value.from_cache else "",
      "messages", sim.messages_delivered - sent)

print("delegated:", sim.resolve("1.2.3.5", "netsukuku", delegated=True).value.describe())
print("reverse 1.2.3.4:", sim.reverse("200.1.1.1", "1.2.3.4").value)

# The full event log, as the command line tool prints it
print()
print("\n".join(sim.log))
