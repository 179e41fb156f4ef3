"""Community detection: the five operationalizations of multimodality.

MONO and INDI run plain greedy modularity optimization (Louvain: local
moving + aggregation) on single layers. UNFL and INTFL flatten the
multiplex into one graph first (union with nw/ec/sum weighting, or
intersection with summed weights). MULTI optimizes multislice modularity
over the supra-graph of (actor, layer) nodes, where each actor's copies
are coupled across layers with weight omega and each layer keeps its own
null model:

    Q = (1/2mu) * sum_ijsr [ (w_ijs - gamma * k_is * k_js / 2m_s) d_sr
                             + d_ij * omega ] * d(g_is, g_jr)

with 2mu = sum_s 2m_s + total coupling weight. Setting omega = 0 on a
single layer reduces Q to standard Newman-Girvan modularity, which the
test suite checks to 1e-12. One shared engine runs both cases: a node
carries a per-layer strength vector, so the aggregated problem keeps the
factorized per-layer null model while coupling weights behave as plain
edges.

All detection is deterministic for a fixed seed (node visit order is a
seeded shuffle) and community ids are canonicalized by decreasing size,
ties broken by smallest member id.
"""

from __future__ import annotations

import logging
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field

from .errors import DataError
from .netbuild import EdgeData, LayerGraph, MultiplexNetwork, _ekey

logger = logging.getLogger(__name__)

# A full local-moving sweep that gains less than this (in Q units) stops
# the sweep loop; passes that gain less stop the algorithm.
GAIN_TOLERANCE = 1e-10

UNION_STRATEGIES = ("nw", "ec", "sum")


@dataclass(frozen=True)
class Partition:
    """Node -> community assignment for one scope (a layer or a flattened
    network), with the resolution used and the per-pass modularity trace
    of the optimization that produced it (empty for derived partitions).
    """

    scope: str
    assignment: dict[str, int]
    gamma: float = 1.0
    trace: tuple[float, ...] = ()

    def n_communities(self) -> int:
        return len(set(self.assignment.values()))


@dataclass(frozen=True)
class MultiplexPartition:
    """(actor, layer) -> community assignment; communities may span layers."""

    assignment: dict[tuple[str, str], int]
    gamma: float = 1.0
    omega: float = 0.1
    trace: tuple[float, ...] = ()

    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def layers(self) -> tuple[str, ...]:
        return tuple(sorted({layer for (_, layer) in self.assignment}))


@dataclass(frozen=True)
class FlattenedGraph:
    strategy: str  # nw | ec | sum | intersection
    graph: LayerGraph


def communities(assignment: dict) -> dict[int, frozenset]:
    """Group an assignment map into community id -> member set."""
    groups: dict[int, set] = defaultdict(set)
    for node, cid in assignment.items():
        groups[cid].add(node)
    return {cid: frozenset(members) for cid, members in groups.items()}


def _canonical_ids(assignment: dict) -> dict:
    """Relabel community ids densely: by decreasing size, then smallest member."""
    groups = defaultdict(list)
    for node, cid in assignment.items():
        groups[cid].append(node)
    ordered = sorted(groups.values(), key=lambda members: (-len(members), min(members)))
    return {node: i for i, members in enumerate(ordered) for node in members}


def _as_layer_graph(g) -> LayerGraph:
    return g.graph if isinstance(g, FlattenedGraph) else g


# ---------------------------------------------------------------------------
# quality functions


def modularity(g, p: Partition, gamma: float = 1.0) -> float:
    """Newman-Girvan weighted modularity
    Q = (1/2m) sum_ij (w_ij - gamma k_i k_j / 2m) d(c_i, c_j).

    Zero-edge graphs score 0 by convention.
    """
    g = _as_layer_graph(g)
    missing = [n for n in g.nodes if n not in p.assignment]
    if missing:
        raise DataError(f"partition does not cover {len(missing)} nodes of {g.layer}")
    two_m = 2.0 * g.total_weight()
    if two_m == 0.0:
        return 0.0
    strength: dict[str, float] = defaultdict(float)
    internal: dict[int, float] = defaultdict(float)
    for (u, v), data in g.edges.items():
        strength[u] += data.weight
        strength[v] += data.weight
        if p.assignment[u] == p.assignment[v]:
            internal[p.assignment[u]] += 2.0 * data.weight
    comm_strength: dict[int, float] = defaultdict(float)
    for n in sorted(g.nodes):  # fixed order: float sums must not follow set order
        comm_strength[p.assignment[n]] += strength[n]
    return math.fsum(
        internal.get(c, 0.0) / two_m - gamma * (k / two_m) ** 2
        for c, k in sorted(comm_strength.items()))


def multislice_modularity(net: MultiplexNetwork, p: MultiplexPartition,
                          gamma: float = 1.0, omega: float = 0.1) -> float:
    """Multislice modularity with categorical (all-to-all) coupling.

    Every (actor, layer) node must be assigned; 2mu includes the coupling
    weight (omega per ordered pair of an actor's copies).
    """
    layer_order = net.layer_names()
    copies: dict[str, int] = defaultdict(int)
    for layer in layer_order:
        for node in net.layers[layer].nodes:
            if (node, layer) not in p.assignment:
                raise DataError(f"partition does not cover ({node!r}, {layer!r})")
            copies[node] += 1
    coupling_total = omega * math.fsum(c * (c - 1) for c in copies.values())
    two_m = {layer: 2.0 * net.layers[layer].total_weight() for layer in layer_order}
    two_mu = math.fsum(two_m.values()) + coupling_total
    if two_mu == 0.0:
        return 0.0
    raw = 0.0
    for layer in layer_order:
        g = net.layers[layer]
        if not g.edges:
            continue
        strength: dict[str, float] = defaultdict(float)
        internal = 0.0
        for (u, v), data in g.edges.items():
            strength[u] += data.weight
            strength[v] += data.weight
            if p.assignment[(u, layer)] == p.assignment[(v, layer)]:
                internal += 2.0 * data.weight
        comm_strength: dict[int, float] = defaultdict(float)
        for node in sorted(g.nodes):  # fixed order, see modularity()
            comm_strength[p.assignment[(node, layer)]] += strength[node]
        null = math.fsum(k * k for _, k in sorted(comm_strength.items())) / two_m[layer]
        raw += internal - gamma * null
    if omega != 0.0:
        coupled = 0.0
        for actor in sorted(copies):
            layers_of = [l for l in layer_order if actor in net.layers[l].nodes]
            for i in range(len(layers_of)):
                for j in range(i + 1, len(layers_of)):
                    if p.assignment[(actor, layers_of[i])] == p.assignment[(actor, layers_of[j])]:
                        coupled += 2.0 * omega
        raw += coupled
    return raw / two_mu


# ---------------------------------------------------------------------------
# the shared Louvain engine


class _Problem:
    """State of one aggregation level.

    adj holds symmetric neighbor weights (coupling included, no self
    entries); loops holds collapsed internal weight as an ordered-pair sum;
    strength holds per-layer null-model strength vectors (couplings are
    excluded from the null model by construction).
    """

    __slots__ = ("n", "adj", "loops", "strength", "scaled", "n_layers")

    def __init__(self, n: int, n_layers: int):
        self.n = n
        self.n_layers = n_layers
        self.adj: list[dict[int, float]] = [dict() for _ in range(n)]
        self.loops: list[float] = [0.0] * n
        self.strength: list[list[float]] = [[0.0] * n_layers for _ in range(n)]
        self.scaled: list[list[float]] = []

    def finalize_scaled(self, inv_two_m: list[float]):
        self.scaled = [
            [k * inv for k, inv in zip(vec, inv_two_m)] for vec in self.strength
        ]


def _null_term(scaled_u: list[float], comm_k: list[float]) -> float:
    return sum(s * k for s, k in zip(scaled_u, comm_k))


def _local_moving(prob: _Problem, comm: list[int], comm_k: list[list[float]],
                  comm_size: list[int], gamma: float, two_mu: float,
                  rng: random.Random) -> bool:
    """Greedy node moves until a full sweep gains < GAIN_TOLERANCE.

    Returns whether any node moved. comm/comm_k/comm_size are updated in
    place; emptied community slots are recycled for nodes moving to fresh
    solitude.
    """
    order = list(range(prob.n))
    rng.shuffle(order)
    free_ids: list[int] = []
    moved_any = False
    nl = prob.n_layers
    while True:
        sweep_gain = 0.0
        for u in order:
            c_old = comm[u]
            links: dict[int, float] = defaultdict(float)
            for v, w in prob.adj[u].items():
                links[comm[v]] += w
            ku = prob.strength[u]
            su = prob.scaled[u]
            # take u out of its community
            kc = comm_k[c_old]
            for s in range(nl):
                kc[s] -= ku[s]
            comm_size[c_old] -= 1
            gain_old = links.get(c_old, 0.0) - gamma * _null_term(su, kc)
            best_c, best_gain = c_old, gain_old
            for c in sorted(links):
                if c == c_old:
                    continue
                gain = links[c] - gamma * _null_term(su, comm_k[c])
                if gain > best_gain:
                    best_c, best_gain = c, gain
            if comm_size[c_old] > 0 and 0.0 > best_gain:
                # strictly better off alone in a fresh community
                if free_ids:
                    best_c = free_ids.pop()
                else:
                    best_c = len(comm_k)
                    comm_k.append([0.0] * nl)
                    comm_size.append(0)
                best_gain = 0.0
            kc = comm_k[best_c]
            for s in range(nl):
                kc[s] += ku[s]
            comm_size[best_c] += 1
            if best_c != c_old:
                if comm_size[c_old] == 0:
                    free_ids.append(c_old)
                comm[u] = best_c
                moved_any = True
                sweep_gain += best_gain - gain_old
        if sweep_gain / two_mu < GAIN_TOLERANCE:
            break
    return moved_any


def _aggregate(prob: _Problem, comm: list[int]) -> tuple[_Problem, dict[int, int]]:
    """Collapse communities into super-nodes; returns the new problem and
    the old-community-id -> new-node-id map (dense, ordered by old id)."""
    live = sorted({c for c in comm})
    remap = {c: i for i, c in enumerate(live)}
    agg = _Problem(len(live), prob.n_layers)
    for u in range(prob.n):
        cu = remap[comm[u]]
        vec = agg.strength[cu]
        for s in range(prob.n_layers):
            vec[s] += prob.strength[u][s]
        agg.loops[cu] += prob.loops[u]
        for v, w in prob.adj[u].items():
            cv = remap[comm[v]]
            if cv == cu:
                agg.loops[cu] += w  # ordered pair, counted from both ends
            else:
                agg.adj[cu][cv] = agg.adj[cu].get(cv, 0.0) + w
    return agg, remap


def _optimize(prob: _Problem, gamma: float, inv_two_m: list[float], two_mu: float,
              rng: random.Random, quality) -> tuple[list[int], list[float]]:
    """Run local moving + aggregation passes until no node moves.

    quality(assignment: list[int] over original nodes) supplies the
    reported per-pass quality; returns (assignment, trace).
    """
    prob.finalize_scaled(inv_two_m)
    node_of = [[i] for i in range(prob.n)]  # level node -> original nodes
    global_comm = list(range(prob.n))
    trace: list[float] = []
    while True:
        comm = list(range(prob.n))
        comm_k = [list(vec) for vec in prob.strength]
        comm_size = [1] * prob.n
        moved = _local_moving(prob, comm, comm_k, comm_size, gamma, two_mu, rng)
        for level_node, originals in zip(range(prob.n), node_of):
            for o in originals:
                global_comm[o] = comm[level_node]
        trace.append(quality(global_comm))
        if not moved:
            break
        prob, remap = _aggregate(prob, comm)
        prob.finalize_scaled(inv_two_m)
        merged_members: list[list[int]] = [[] for _ in range(prob.n)]
        for level_node, originals in enumerate(node_of):
            merged_members[remap[comm[level_node]]].extend(originals)
        node_of = merged_members
        if len(trace) >= 2 and trace[-1] - trace[-2] < GAIN_TOLERANCE:
            break
    # densify ids in original-node order
    remap_final: dict[int, int] = {}
    for c in global_comm:
        if c not in remap_final:
            remap_final[c] = len(remap_final)
    return [remap_final[c] for c in global_comm], trace


# ---------------------------------------------------------------------------
# public detection operations


def louvain(g, gamma: float = 1.0, seed: int = 42) -> Partition:
    """Greedy modularity optimization on a single graph.

    Deterministic for a fixed seed; the returned partition's trace holds
    modularity after each pass and is non-decreasing (within float noise).
    """
    lg = _as_layer_graph(g)
    if not lg.nodes:
        raise DataError(f"cannot run louvain on empty graph {lg.layer!r}")
    names = sorted(lg.nodes)
    index = {u: i for i, u in enumerate(names)}
    if not lg.edges:
        assignment = {u: i for i, u in enumerate(names)}
        return Partition(scope=lg.layer, assignment=assignment, gamma=gamma, trace=(0.0,))
    prob = _Problem(len(names), 1)
    for (u, v), data in lg.edges.items():
        iu, iv = index[u], index[v]
        prob.adj[iu][iv] = prob.adj[iu].get(iv, 0.0) + data.weight
        prob.adj[iv][iu] = prob.adj[iv].get(iu, 0.0) + data.weight
        prob.strength[iu][0] += data.weight
        prob.strength[iv][0] += data.weight
    two_m = 2.0 * lg.total_weight()

    def quality(assignment: list[int]) -> float:
        p = Partition(scope=lg.layer,
                      assignment={u: assignment[index[u]] for u in names}, gamma=gamma)
        return modularity(lg, p, gamma)

    rng = random.Random(seed)
    comm, trace = _optimize(prob, gamma, [1.0 / two_m], two_m, rng, quality)
    assignment = _canonical_ids({u: comm[index[u]] for u in names})
    logger.info("louvain[%s]: %d nodes -> %d communities, Q=%.6f (%d passes)",
                lg.layer, len(names), len(set(assignment.values())), trace[-1], len(trace))
    return Partition(scope=lg.layer, assignment=assignment, gamma=gamma, trace=tuple(trace))


def generalized_louvain(net: MultiplexNetwork, gamma: float = 1.0,
                        omega: float = 0.1, seed: int = 42) -> MultiplexPartition:
    """Multislice community detection over the (actor, layer) supra-graph.

    Intra-layer edges keep their weights and per-layer null models; every
    actor's copies are coupled all-to-all with weight omega (edges without
    a null-model term). Deterministic for a fixed seed.
    """
    layer_order = net.layer_names()
    names: list[tuple[str, str]] = []
    for layer in layer_order:
        names.extend((actor, layer) for actor in sorted(net.layers[layer].nodes))
    if not names:
        raise DataError("cannot run generalized_louvain on an empty network")
    index = {node: i for i, node in enumerate(names)}
    slice_of = {layer: s for s, layer in enumerate(layer_order)}
    prob = _Problem(len(names), len(layer_order))
    two_m = [0.0] * len(layer_order)
    for layer in layer_order:
        s = slice_of[layer]
        for (u, v), data in net.layers[layer].edges.items():
            iu, iv = index[(u, layer)], index[(v, layer)]
            prob.adj[iu][iv] = prob.adj[iu].get(iv, 0.0) + data.weight
            prob.adj[iv][iu] = prob.adj[iv].get(iu, 0.0) + data.weight
            prob.strength[iu][s] += data.weight
            prob.strength[iv][s] += data.weight
            two_m[s] += 2.0 * data.weight
    coupling_total = 0.0
    if omega != 0.0:
        copies: dict[str, list[int]] = defaultdict(list)
        for layer in layer_order:
            for actor in sorted(net.layers[layer].nodes):
                copies[actor].append(index[(actor, layer)])
        for actor in sorted(copies):
            idxs = copies[actor]
            coupling_total += omega * len(idxs) * (len(idxs) - 1)
            for a in range(len(idxs)):
                for b in range(a + 1, len(idxs)):
                    iu, iv = idxs[a], idxs[b]
                    prob.adj[iu][iv] = prob.adj[iu].get(iv, 0.0) + omega
                    prob.adj[iv][iu] = prob.adj[iv].get(iu, 0.0) + omega
    two_mu = math.fsum(two_m) + coupling_total
    if two_mu == 0.0:
        assignment = _canonical_ids({node: i for i, node in enumerate(names)})
        return MultiplexPartition(assignment=assignment, gamma=gamma, omega=omega, trace=(0.0,))
    inv_two_m = [1.0 / m if m > 0.0 else 0.0 for m in two_m]

    def quality(assignment: list[int]) -> float:
        p = MultiplexPartition(
            assignment={node: assignment[index[node]] for node in names},
            gamma=gamma, omega=omega)
        return multislice_modularity(net, p, gamma, omega)

    rng = random.Random(seed)
    comm, trace = _optimize(prob, gamma, inv_two_m, two_mu, rng, quality)
    assignment = _canonical_ids({node: comm[index[node]] for node in names})
    logger.info("generalized_louvain: %d supra-nodes over %d layers -> %d communities, "
                "Q=%.6f (%d passes)", len(names), len(layer_order),
                len(set(assignment.values())), trace[-1], len(trace))
    return MultiplexPartition(assignment=assignment, gamma=gamma, omega=omega,
                              trace=tuple(trace))


# ---------------------------------------------------------------------------
# flattening and restriction


def flatten_union(net: MultiplexNetwork, strategy: str) -> FlattenedGraph:
    """Union-flatten the multiplex: node and edge sets are unions over
    layers; weights per strategy: nw -> 1, ec -> number of layers carrying
    the edge, sum -> sum of layer weights (layers summed in canonical order).
    """
    if strategy not in UNION_STRATEGIES:
        raise ValueError(f"unknown union strategy {strategy!r}; expected one of {UNION_STRATEGIES}")
    per_edge: dict[tuple[str, str], list[EdgeData]] = defaultdict(list)
    nodes: set[str] = set()
    for layer in net.layer_names():
        g = net.layers[layer]
        nodes |= g.nodes
        for key, data in g.edges.items():
            per_edge[key].append(data)
    out = LayerGraph(layer=f"unfl-{strategy}", nodes=nodes)
    for key in sorted(per_edge):
        datas = per_edge[key]
        if strategy == "nw":
            w = 1.0
        elif strategy == "ec":
            w = float(len(datas))
        else:
            w = math.fsum(d.weight for d in datas)
        out.edges[key] = EdgeData(w, sum(d.co_actions for d in datas),
                                  sum(d.window_count for d in datas))
    return FlattenedGraph(strategy=strategy, graph=out)


def flatten_intersection(net: MultiplexNetwork) -> FlattenedGraph:
    """Intersection-flatten: keep only edges present in every layer, with
    summed weights; nodes are the endpoints of surviving edges.
    """
    layer_order = net.layer_names()
    if len(layer_order) < 2:
        raise ValueError("intersection flattening needs at least 2 layers")
    counts: dict[tuple[str, str], int] = defaultdict(int)
    for layer in layer_order:
        for key in net.layers[layer].edges:
            counts[key] += 1
    out = LayerGraph(layer="intfl")
    for key in sorted(counts):
        if counts[key] != len(layer_order):
            continue
        w = math.fsum(net.layers[layer].edges[key].weight for layer in layer_order)
        co = sum(net.layers[layer].edges[key].co_actions for layer in layer_order)
        wc = sum(net.layers[layer].edges[key].window_count for layer in layer_order)
        out.edges[key] = EdgeData(w, co, wc)
        out.nodes.add(key[0])
        out.nodes.add(key[1])
    return FlattenedGraph(strategy="intersection", graph=out)


def restrict_to_layer(p: MultiplexPartition, layer: str) -> Partition:
    """Project a multiplex partition onto one layer (C restricted to V^l),
    re-expressed as actor -> community id with canonical dense ids.
    """
    restricted = {actor: cid for (actor, l), cid in p.assignment.items() if l == layer}
    if not restricted:
        raise ValueError(f"layer {layer!r} not present in the multiplex partition")
    return Partition(scope=layer, assignment=_canonical_ids(restricted), gamma=p.gamma)
