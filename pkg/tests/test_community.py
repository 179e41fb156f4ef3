"""Modularity, Louvain, multislice coupling, flattening, restriction.

Frozen expected values in this file were computed with independent
references (exhaustive partition enumeration, closed-form arithmetic)
before the implementation was tested against them.
"""

import math

import numpy as np
import pytest

from conftest import random_layer, two_clique_bridge
from multicoord.community import (GAIN_TOLERANCE, FlattenedGraph,
                                  MultiplexPartition, Partition, communities,
                                  flatten_intersection, flatten_union,
                                  generalized_louvain, louvain, modularity,
                                  multislice_modularity, restrict_to_layer)
from multicoord.netbuild import LayerGraph, MultiplexNetwork


def path3():
    return LayerGraph.from_pairs("rtw", [("a", "b", 1.0), ("b", "c", 1.0)])


# ---------------------------------------------------------------------------
# modularity values


def test_modularity_path_fixtures():
    g = path3()
    # 2m = 4; singletons: Q = -[(1/4)^2 + (2/4)^2 + (1/4)^2] = -0.375
    singles = Partition("rtw", {"a": 0, "b": 1, "c": 2})
    assert modularity(g, singles) == pytest.approx(-0.375, abs=1e-15)
    # {a,b},{c}: 2*1/4 - (3/4)^2 - (1/4)^2 = -0.125
    split = Partition("rtw", {"a": 0, "b": 0, "c": 1})
    assert modularity(g, split) == pytest.approx(-0.125, abs=1e-15)
    whole = Partition("rtw", {"a": 0, "b": 0, "c": 0})
    assert modularity(g, whole) == pytest.approx(0.0, abs=1e-15)


def test_modularity_gamma_scaling():
    g = path3()
    split = Partition("rtw", {"a": 0, "b": 0, "c": 1})
    # Q(gamma) = 0.5 - gamma * 0.625 for this partition
    for gamma in (0.5, 1.0, 2.0):
        assert modularity(g, split, gamma) == pytest.approx(
            0.5 - gamma * 0.625, abs=1e-12)


def test_modularity_insertion_order_invariant():
    g = two_clique_bridge()
    assign = {n: (0 if n.startswith("a") else 1) for n in sorted(g.nodes)}
    q1 = modularity(g, Partition("rtw", assign))
    shuffled = dict(sorted(assign.items(), key=lambda kv: kv[0], reverse=True))
    q2 = modularity(g, Partition("rtw", shuffled))
    assert q1 == q2


# ---------------------------------------------------------------------------
# louvain


def test_louvain_two_clique_exact_optimum():
    # brute force over all 115975 partitions of the 10 nodes puts the
    # optimum at the two cliques with Q = 0.45238095238095233
    g = two_clique_bridge()
    p = louvain(g, seed=42)
    groups = set(communities(p.assignment).values())
    assert groups == {frozenset({f"a{i}" for i in range(5)}),
                      frozenset({f"b{i}" for i in range(5)})}
    assert modularity(g, p) == pytest.approx(0.45238095238095233, abs=1e-12)


def test_louvain_canonical_ids():
    g = LayerGraph.from_pairs("rtw", [
        ("x1", "x2", 5.0), ("y1", "y2", 5.0), ("y2", "y3", 5.0),
        ("y1", "y3", 5.0), ("x1", "y1", 0.01)])
    p = louvain(g, seed=42)
    groups = communities(p.assignment)
    # ids are dense, ordered by decreasing size then smallest member
    assert sorted(groups) == list(range(len(groups)))
    sizes = [len(groups[i]) for i in sorted(groups)]
    assert sizes == sorted(sizes, reverse=True)
    assert groups[0] == frozenset({"y1", "y2", "y3"})


def test_louvain_trace_monotone_and_beats_singletons(rng):
    for _ in range(20):
        g = random_layer(rng, n=int(rng.integers(6, 25)), p=0.3)
        if g.n_edges == 0:
            continue
        p = louvain(g, seed=int(rng.integers(10000)))
        assert len(p.trace) >= 1
        diffs = np.diff(p.trace)
        assert (diffs >= -1e-12).all()
        singles = Partition(g.layer, {n: i for i, n in enumerate(sorted(g.nodes))})
        assert modularity(g, p) >= modularity(g, singles) - 1e-12
        assert p.trace[-1] == pytest.approx(modularity(g, p), abs=1e-9)


def test_louvain_gamma_zero_merges_everything():
    g = two_clique_bridge()
    p = louvain(g, gamma=0.0, seed=42)
    assert p.n_communities() == 1


def test_louvain_empty_and_determinism():
    g = two_clique_bridge()
    assert louvain(g, seed=7).assignment == louvain(g, seed=7).assignment


# ---------------------------------------------------------------------------
# multislice


def two_layer_net(g1=None, g2=None):
    g1 = g1 or two_clique_bridge("rtw")
    g2 = g2 or LayerGraph.from_pairs("rpl", [(u, v, d.weight)
                                             for (u, v), d in two_clique_bridge().edges.items()])
    return MultiplexNetwork.from_layers({"rtw": g1, "rpl": g2})


def test_multislice_hand_fixture():
    # two actors, one unit edge in each of two layers, omega = 0.5, all four
    # state nodes in one community:
    #   intra per layer: 2*(1 - 1/2) - 2*(1/2) = 0; coupling: 2 actors * 2
    #   ordered cross-layer pairs * 0.5 = 2; 2mu = 2 + 2 + 2*0.5*2 = 6
    net = MultiplexNetwork.from_layers({
        "rtw": LayerGraph.from_pairs("rtw", [("u", "v", 1.0)]),
        "rpl": LayerGraph.from_pairs("rpl", [("u", "v", 1.0)]),
    })
    p = MultiplexPartition({("u", "rtw"): 0, ("v", "rtw"): 0,
                            ("u", "rpl"): 0, ("v", "rpl"): 0}, omega=0.5)
    q = multislice_modularity(net, p, gamma=1.0, omega=0.5)
    assert q == pytest.approx(1 / 3, abs=1e-15)


def test_multislice_omega_zero_reduces_to_weighted_layer_mean(rng):
    # with no coupling the multislice quality is the 2m_s-weighted average
    # of per-layer modularities
    for _ in range(30):
        g1 = random_layer(rng, "rtw", n=10, p=0.4)
        g2 = random_layer(rng, "rpl", n=10, p=0.4)
        if g1.n_edges == 0 or g2.n_edges == 0:
            continue
        net = MultiplexNetwork.from_layers({"rtw": g1, "rpl": g2})
        assign1 = louvain(g1, seed=1).assignment
        assign2 = louvain(g2, seed=1).assignment
        joint = {(n, "rtw"): ("rtw", c) for n, c in assign1.items()}
        joint.update({(n, "rpl"): ("rpl", c) for n, c in assign2.items()})
        mp = MultiplexPartition(joint, omega=0.0)
        q = multislice_modularity(net, mp, gamma=1.0, omega=0.0)
        m1, m2 = 2 * g1.total_weight(), 2 * g2.total_weight()
        q1 = modularity(g1, Partition("rtw", assign1))
        q2 = modularity(g2, Partition("rpl", assign2))
        assert q == pytest.approx((m1 * q1 + m2 * q2) / (m1 + m2), abs=1e-12)


def test_generalized_louvain_omega_zero_matches_per_layer():
    # fixtures small enough that the optimum is unique: two triangles per
    # layer, so every solver must find the triangles
    def triangles(layer, shift):
        names = [f"{layer}{i + shift}" for i in range(6)]
        return LayerGraph.from_pairs(layer, [
            (names[0], names[1], 1.0), (names[1], names[2], 1.0),
            (names[0], names[2], 1.0), (names[3], names[4], 1.0),
            (names[4], names[5], 1.0), (names[3], names[5], 1.0),
            (names[2], names[3], 0.05)])
    net = MultiplexNetwork.from_layers({"rtw": triangles("rtw", 0),
                                        "rpl": triangles("rpl", 0)})
    mp = generalized_louvain(net, gamma=1.0, omega=0.0, seed=42)
    for layer in ("rtw", "rpl"):
        restricted = restrict_to_layer(mp, layer)
        direct = louvain(net.layers[layer], seed=42)
        got = set(communities(restricted.assignment).values())
        want = set(communities(direct.assignment).values())
        assert got == want


def test_generalized_louvain_high_omega_aligns_layers():
    # strong coupling fuses each actor's copies into one community
    net = two_layer_net()
    mp = generalized_louvain(net, gamma=1.0, omega=50.0, seed=42)
    per_actor = {}
    for (actor, layer), cid in mp.assignment.items():
        per_actor.setdefault(actor, set()).add(cid)
    assert all(len(cids) == 1 for cids in per_actor.values())


def test_generalized_louvain_trace_monotone():
    net = two_layer_net()
    mp = generalized_louvain(net, gamma=1.0, omega=0.1, seed=42)
    diffs = np.diff(mp.trace)
    assert (diffs >= -1e-12).all()
    assert mp.trace[-1] == pytest.approx(
        multislice_modularity(net, mp, gamma=1.0, omega=0.1), abs=1e-9)


def test_generalized_louvain_recovers_cross_layer_cliques():
    net = two_layer_net()
    mp = generalized_louvain(net, gamma=1.0, omega=0.1, seed=42)
    groups = communities(mp.assignment)
    members = {frozenset(actor for actor, _ in g) for g in groups.values()}
    assert members == {frozenset({f"a{i}" for i in range(5)}),
                       frozenset({f"b{i}" for i in range(5)})}


# ---------------------------------------------------------------------------
# flattening


def three_layer_net():
    return MultiplexNetwork.from_layers({
        "rtw": LayerGraph.from_pairs("rtw", [("a", "b", 0.2, 2, 3),
                                             ("b", "c", 0.4, 1, 1)]),
        "rpl": LayerGraph.from_pairs("rpl", [("a", "b", 0.5, 1, 1),
                                             ("c", "d", 0.9, 4, 2)]),
        "men": LayerGraph.from_pairs("men", [("a", "b", 0.25, 1, 1)]),
    })


def test_flatten_union_strategies_hand_case():
    net = three_layer_net()
    nw = flatten_union(net, "nw").graph
    ec = flatten_union(net, "ec").graph
    sm = flatten_union(net, "sum").graph
    union_edges = {("a", "b"), ("b", "c"), ("c", "d")}
    for g in (nw, ec, sm):
        assert set(g.edges) == union_edges
        assert g.nodes == {"a", "b", "c", "d"}
    assert all(d.weight == 1.0 for d in nw.edges.values())
    assert ec.edges[("a", "b")].weight == 3.0
    assert ec.edges[("b", "c")].weight == 1.0
    assert sm.edges[("a", "b")].weight == pytest.approx(0.2 + 0.5 + 0.25, abs=1e-15)
    assert sm.edges[("c", "d")].weight == 0.9
    # co-actions and window counts accumulate identically in all strategies
    assert nw.edges[("a", "b")].co_actions == 4
    assert nw.edges[("a", "b")].window_count == 5


def test_flatten_intersection_hand_case():
    g = flatten_intersection(three_layer_net()).graph
    # only (a, b) lives in all three layers
    assert set(g.edges) == {("a", "b")}
    assert g.nodes == {"a", "b"}
    assert g.edges[("a", "b")].weight == pytest.approx(0.95, abs=1e-15)
    with pytest.raises(ValueError):
        flatten_intersection(MultiplexNetwork.from_layers(
            {"rtw": LayerGraph.from_pairs("rtw", [("a", "b", 1.0)])}))


def test_flatten_laws_random(rng):
    # brute-force set computation over random 3-layer multiplexes
    for _ in range(50):
        layers = {}
        for name in ("rtw", "rpl", "men"):
            layers[name] = random_layer(rng, name, n=int(rng.integers(5, 20)), p=0.25)
        net = MultiplexNetwork.from_layers(layers)
        union = set().union(*(set(g.edges) for g in layers.values()))
        inter = set.intersection(*(set(g.edges) for g in layers.values())) \
            if all(g.edges for g in layers.values()) else set()

        for strategy in ("nw", "ec", "sum"):
            flat = flatten_union(net, strategy).graph
            assert set(flat.edges) == union
            for key, data in flat.edges.items():
                carrying = [g.edges[key] for g in layers.values() if key in g.edges]
                if strategy == "nw":
                    assert data.weight == 1.0
                elif strategy == "ec":
                    assert data.weight == float(len(carrying))
                else:
                    assert data.weight == pytest.approx(
                        math.fsum(d.weight for d in carrying), abs=1e-12)
        flat_i = flatten_intersection(net).graph
        assert set(flat_i.edges) == inter
    with pytest.raises(ValueError):
        flatten_union(three_layer_net(), "mean")


def test_flattened_graph_feeds_louvain():
    flat = flatten_union(two_layer_net(), "sum")
    assert isinstance(flat, FlattenedGraph)
    p = louvain(flat, seed=42)
    groups = set(communities(p.assignment).values())
    assert groups == {frozenset({f"a{i}" for i in range(5)}),
                      frozenset({f"b{i}" for i in range(5)})}


# ---------------------------------------------------------------------------
# restriction


def test_restrict_to_layer():
    mp = MultiplexPartition({("u1", "rtw"): 5, ("u2", "rtw"): 5,
                             ("u3", "rtw"): 9, ("u1", "rpl"): 9},
                            gamma=1.3)
    r = restrict_to_layer(mp, "rtw")
    assert r.scope == "rtw" and r.gamma == 1.3
    # canonical ids: {u1, u2} is larger -> 0, {u3} -> 1
    assert r.assignment == {"u1": 0, "u2": 0, "u3": 1}
    r2 = restrict_to_layer(mp, "rpl")
    assert r2.assignment == {"u1": 0}
    with pytest.raises(ValueError):
        restrict_to_layer(mp, "hst")


def test_gain_tolerance_is_tight():
    assert 0 < GAIN_TOLERANCE <= 1e-9
