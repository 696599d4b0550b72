"""ANDNA: a decentralized hostname system, as a protocol library driven by a
deterministic discrete-event network simulator."""

from .errors import AndnaError
from .identity import KeyPair, PubKey, counter_ip, keygen, sign, verify
from .idspace import digest32, gnode_of, hash_hostname, ring_distance, rounded_hash_gnode
from .netsim import SimConfig, Simulation
from .scenario import parse_scenario, run_scenario
from .snsd import SnsdRecord, parse_snsd_nodes, select_record

__version__ = "0.1.0"
