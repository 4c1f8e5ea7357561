from adhopsim.aodvjr import AodvjrConfig, AodvjrProtocol, MsgKind
from adhopsim.frames import BROADCAST
from adhopsim.scripted import ScriptedNet

from oracles import LINE, static_sim


def build(adjacency, **cfg):
    net = ScriptedNet(adjacency)
    config = AodvjrConfig(**cfg)
    for addr in adjacency:
        net.attach(addr, AodvjrProtocol(addr, net, config))
    return net


def kinds(net):
    return [(src, dst, f.body.kind) for src, dst, f in net.sent]


def test_line_discovery_and_flush():
    a, b, c = 0, 1, 2
    net = build({a: [b], b: [a, c], c: [b]})
    net.nodes[a].send_data(c, 32)
    net.nodes[a].send_data(c, 32)
    net.run()
    assert net.delivered == [(c, (a, 1)), (c, (a, 2))]
    assert net.nodes[a].routes[c].next_hop == b
    assert net.nodes[b].routes[c].next_hop == c
    rreqs = [k for k in kinds(net) if k[2] is MsgKind.RREQ]
    assert len(rreqs) <= 3
    rreps = [k for k in kinds(net) if k[2] is MsgKind.RREP]
    assert [src for src, _, _ in rreps] == [c, b]


def test_known_route_sends_single_unicast():
    a, b, c = 0, 1, 2
    net = build({a: [b], b: [a, c], c: [b]})
    net.nodes[a].send_data(c, 32)
    net.run()
    net.sent.clear()
    net.nodes[a].send_data(c, 32)
    net.run()
    assert kinds(net) == [(a, b, MsgKind.DATA), (b, c, MsgKind.DATA)]


def test_only_destination_replies():
    # B already knows C, but must not answer A's RREQ
    a, b, c = 0, 1, 2
    net = build({a: [b], b: [a, c], c: [b]})
    net.nodes[b]._learn(c, c)
    net.nodes[a].send_data(c, 32)
    net.run()
    repliers = {src for src, dst, f in net.sent if f.body.kind is MsgKind.RREP and f.body.origin == a
                and src != b}
    assert repliers == {c}
    origins = [f for _, _, f in net.sent if f.body.kind is MsgKind.RREP]
    assert all(f.body.destination == c for f in origins)


def test_flood_bound_and_duplicates():
    mesh = {0: [1, 2, 3], 1: [0, 2, 3], 2: [0, 1, 3], 3: [0, 1, 2]}
    net = build(mesh)
    net.nodes[0].send_data(99, 32)
    net.run()
    rreqs = [k for k in kinds(net) if k[2] is MsgKind.RREQ]
    assert len(rreqs) <= 4
    assert net.counters["rreq_duplicate"] > 0


def test_unreachable_destination_retries_then_drops():
    net = build({0: [1], 1: [0]})
    net.nodes[0].send_data(7, 32)
    net.run()
    for _ in range(10):
        net.now += 2.0
        net.fire_timers()
        net.run()
    floods = sum(1 for src, dst, f in net.sent if src == 0 and f.body.kind is MsgKind.RREQ)
    assert floods == 4
    assert net.counters["discovery_failed"] == 1
    assert len(net.nodes[0].buffer) == 0


def test_buffer_overflow_drops_oldest():
    net = build({0: []}, buffer_size=2)
    for _ in range(3):
        net.nodes[0].send_data(5, 32)
    assert net.counters["buffer_overflow"] == 1
    assert [m for _, _, m in net.nodes[0].buffer] == [(0, 2), (0, 3)]


def test_route_expiry_refloods():
    a, b, c = 0, 1, 2
    net = build({a: [b], b: [a, c], c: [b]}, route_timeout=10.0)
    net.nodes[a].send_data(c, 32)
    net.run()
    net.now = 10.5
    net.sent.clear()
    net.nodes[a].send_data(c, 32)
    assert kinds(net)[0] == (a, BROADCAST, MsgKind.RREQ)
    assert net.counters["route_expired"] == 1


def test_no_forwarding_over_stale_entry():
    a, b, c = 0, 1, 2
    net = build({a: [b], b: [a, c], c: [b]}, route_timeout=10.0)
    net.nodes[a].send_data(c, 32)
    net.run()
    # A's entry is refreshed, B's entry is left to age out
    net.now = 12.0
    net.nodes[a].routes[c].last_used = 11.0
    net.nodes[a].send_data(c, 32)
    net.run()
    assert net.counters["no_route_drop"] == 1


def test_full_simulation_line():
    sim = static_sim(LINE, protocol="aodvjr", duration=20.0)
    report = sim.run()
    assert report.delivered == report.generated == 5
    assert report.counters["rreq_originated"] == 1
