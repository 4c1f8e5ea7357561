"""Shared static topologies for oracle tests."""
import random

from adhopsim.ants import AdhopConfig, AdhopProtocol
from adhopsim.config import Scenario
from adhopsim.pheromone import PheromoneParams
from adhopsim.scripted import ScriptedNet
from adhopsim.sim import Simulation

# addresses: 0 = source A, 1 = sink, routers after
LINE = [(100.0, 100.0), (400.0, 100.0), (250.0, 100.0)]          # A, C, B
DIAMOND = [(100.0, 300.0), (340.0, 300.0), (220.0, 400.0), (220.0, 200.0)]  # A, D, B, C


def static_sim(positions, protocol="adhop", duration=10.0, seed=3, **kw):
    routers = len(positions) - 2
    scenario = Scenario(protocol=protocol, seed=seed, duration_s=duration, node_count=routers,
                        source_count=1, sink_count=1, v_max=0.0, **kw)
    return Simulation(scenario, positions=positions)


def diamond_trial(seed: int, rounds: int = 8, h_b: float = 1.0, h_c: float = 0.2) -> bool:
    """Exploration rounds on A-{B,C}-D with seeded arrival order; True if A then routes via B."""
    a, b, c, d = 0, 1, 2, 3
    adjacency = {a: [b, c], b: [a, d], c: [a, d], d: [b, c]}
    net = ScriptedNet(adjacency, random.Random(seed), {b: h_b, c: h_c})
    config = AdhopConfig(PheromoneParams(kappa=0.5))
    for addr in adjacency:
        net.attach(addr, AdhopProtocol(addr, net, config))
    for _ in range(rounds):
        net.nodes[a].explore(d, 32)
        net.run()
        net.tick(1.0)
    entry = net.nodes[a].table.lookup(d)
    return entry is not None and entry.neighbor == b
