"""Agreement between two community structures.

Given community sets from two approaches A and B, this module computes the
harmonic-mean overlap matrix

    r_ij = |C_i^A n C_j^B| / |C_i^A|,   r_ji = |C_i^A n C_j^B| / |C_j^B|,
    o_ij = 2 r_ij r_ji / (r_ij + r_ji)   (0 when the intersection is empty)

an optimal one-to-one matching maximizing the total overlap (Hungarian
algorithm, O(n^3) augmenting-path form on the negated matrix), lost /
common / gained labels for communities (threshold theta on matched
overlap) and for nodes (threshold-free set algebra inside matched pairs),
NMI over the common node universe, and layer-level coverage metrics.

Size filtering keeps communities with strictly more than ``min_size``
members, applied to both sides before anything else.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, UndefinedMetricError
from .community import MultiplexPartition, Partition, communities

logger = logging.getLogger(__name__)

COMMON = "common"
LOST = "lost"
GAINED = "gained"


def community_sets(source, min_size: int = 0) -> dict:
    """Normalize a community-set source into {community_id: frozenset}.

    Accepts a Partition / MultiplexPartition, a node -> community-id
    assignment map, or a community-id -> member-set map. Communities with
    size <= min_size are dropped.
    """
    if isinstance(source, (Partition, MultiplexPartition)):
        sets = communities(source.assignment)
    elif isinstance(source, dict):
        if source and all(isinstance(v, (set, frozenset, list, tuple)) for v in source.values()):
            sets = {cid: frozenset(members) for cid, members in source.items()}
        else:
            sets = communities(source)
    else:
        raise TypeError(f"cannot interpret {type(source).__name__} as a community set")
    for cid, members in sets.items():
        if not members:
            raise ValueError(f"community {cid!r} is empty")
    return {cid: members for cid, members in sets.items() if len(members) > min_size}


@dataclass
class OverlapMatrix:
    """Harmonic-mean overlaps between two filtered community sets.

    values has one row per B community and one column per A community;
    values[bi, aj] is the overlap between B community b_ids[bi] and A
    community a_ids[aj] (the harmonic mean is direction-symmetric).
    """

    a_ids: tuple
    b_ids: tuple
    a_members: tuple  # of frozenset, aligned with a_ids
    b_members: tuple
    values: np.ndarray  # shape (len(b_ids), len(a_ids))

    @property
    def k_a(self) -> int:
        return len(self.a_ids)

    @property
    def k_b(self) -> int:
        return len(self.b_ids)

    def overlap(self, a_idx: int, b_idx: int) -> float:
        return float(self.values[b_idx, a_idx])


@dataclass
class MatchResult:
    """Optimal one-to-one matching over an OverlapMatrix.

    pairs holds (a_idx, b_idx) index pairs into the matrix registries;
    exactly min(k_a, k_b) pairs, the rest of the larger side is unmatched.
    """

    pairs: tuple[tuple[int, int], ...]
    unmatched_a: tuple[int, ...]
    unmatched_b: tuple[int, ...]
    total: float


@dataclass
class LabelReport:
    """Lost/common/gained labels; community part keyed by community id,
    node part keyed by node id. theta is None for the threshold-free
    node labeling.
    """

    theta: float | None = None
    community_labels_a: dict = field(default_factory=dict)
    community_labels_b: dict = field(default_factory=dict)
    node_labels: dict = field(default_factory=dict)


def _sort_key(cid):
    return (str(type(cid).__name__), cid)


def overlap_matrix(C_A, C_B, min_size: int = 0) -> OverlapMatrix:
    """Pairwise harmonic-mean overlap of two community sets, after dropping
    communities with size <= min_size on both sides.
    """
    if min_size < 0:
        raise ValueError(f"min_size must be >= 0, got {min_size}")
    a_sets = community_sets(C_A, min_size)
    b_sets = community_sets(C_B, min_size)
    a_ids = tuple(sorted(a_sets, key=_sort_key))
    b_ids = tuple(sorted(b_sets, key=_sort_key))
    a_members = tuple(a_sets[i] for i in a_ids)
    b_members = tuple(b_sets[i] for i in b_ids)
    values = np.zeros((len(b_ids), len(a_ids)))
    for bi, bm in enumerate(b_members):
        for aj, am in enumerate(a_members):
            inter = len(am & bm)
            if inter == 0:
                continue
            r_ab = inter / len(am)
            r_ba = inter / len(bm)
            values[bi, aj] = 2.0 * r_ab * r_ba / (r_ab + r_ba)
    return OverlapMatrix(a_ids=a_ids, b_ids=b_ids, a_members=a_members,
                         b_members=b_members, values=values)


def _solve_min_assignment(cost: np.ndarray) -> list[int]:
    """Square min-cost assignment; returns the column chosen for each row.

    Augmenting-path algorithm with potentials (O(n^3)); deterministic.
    """
    n = cost.shape[0]
    INF = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)    # p[j]: row matched to column j, 1-based, 0 = free
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:  # augment along the alternating path
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = [0] * n
    for j in range(1, n + 1):
        if p[j]:
            row_to_col[p[j] - 1] = j - 1
    return row_to_col


def hungarian_match(O: OverlapMatrix) -> MatchResult:
    """Assignment maximizing the total overlap; optimal, not greedy.

    Rectangular matrices are padded with zero rows/columns, so exactly
    min(k_a, k_b) real pairs come back and the remainder is unmatched.
    """
    if not np.all(np.isfinite(O.values)):
        raise ValueError("overlap matrix contains non-finite values")
    k_b, k_a = O.values.shape
    if min(k_a, k_b) == 0:
        return MatchResult(pairs=(), unmatched_a=tuple(range(k_a)),
                           unmatched_b=tuple(range(k_b)), total=0.0)
    n = max(k_a, k_b)
    cost = np.zeros((n, n))
    cost[:k_b, :k_a] = -O.values
    row_to_col = _solve_min_assignment(cost)
    pairs = tuple(sorted((c, r) for r, c in enumerate(row_to_col[:k_b]) if c < k_a))
    total = math.fsum(O.values[b, a] for a, b in pairs)
    matched_a = {a for a, _ in pairs}
    matched_b = {b for _, b in pairs}
    return MatchResult(
        pairs=pairs,
        unmatched_a=tuple(i for i in range(k_a) if i not in matched_a),
        unmatched_b=tuple(i for i in range(k_b) if i not in matched_b),
        total=total)


def label_communities(O: OverlapMatrix, M: MatchResult, theta: float = 0.5) -> LabelReport:
    """Community labels: a matched pair with overlap >= theta is common on
    both sides; below theta the A community is lost and the B community
    gained; unmatched A are lost, unmatched B gained.
    """
    if not (0.0 <= theta <= 1.0):
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    labels_a: dict = {}
    labels_b: dict = {}
    for a_idx, b_idx in M.pairs:
        if O.overlap(a_idx, b_idx) >= theta:
            labels_a[O.a_ids[a_idx]] = COMMON
            labels_b[O.b_ids[b_idx]] = COMMON
        else:
            labels_a[O.a_ids[a_idx]] = LOST
            labels_b[O.b_ids[b_idx]] = GAINED
    for a_idx in M.unmatched_a:
        labels_a[O.a_ids[a_idx]] = LOST
    for b_idx in M.unmatched_b:
        labels_b[O.b_ids[b_idx]] = GAINED
    return LabelReport(theta=theta, community_labels_a=labels_a, community_labels_b=labels_b)


def label_nodes(C_A, C_B, M: MatchResult) -> LabelReport:
    """Node labels from matched-pair set algebra, threshold-free.

    C_A and C_B must be the size-filtered community sets the match was
    derived from (e.g. zip(O.a_ids, O.a_members)); they are indexed in
    sorted-id order exactly like the OverlapMatrix registries. A node in a
    matched intersection is common; otherwise any node covered on the A
    side is lost and any node covered only on the B side is gained.
    """
    a_sets = community_sets(C_A)
    b_sets = community_sets(C_B)
    a_members = [a_sets[i] for i in sorted(a_sets, key=_sort_key)]
    b_members = [b_sets[i] for i in sorted(b_sets, key=_sort_key)]
    for side, members in (("A", a_members), ("B", b_members)):
        seen: set = set()
        for m in members:
            if seen & m:
                raise DataError(f"side {side} communities overlap; node labeling "
                                "requires disjoint communities per side")
            seen |= m
    a_of: dict = {}
    b_of: dict = {}
    for idx, m in enumerate(a_members):
        for node in m:
            a_of[node] = idx
    for idx, m in enumerate(b_members):
        for node in m:
            b_of[node] = idx
    matched = set(M.pairs)
    labels: dict = {}
    for node in set(a_of) | set(b_of):
        ai = a_of.get(node)
        bi = b_of.get(node)
        if ai is not None and bi is not None and (ai, bi) in matched:
            labels[node] = COMMON
        elif ai is not None:
            labels[node] = LOST
        else:
            labels[node] = GAINED
    return LabelReport(theta=None, node_labels=labels)


def nmi(p1, p2, min_size: int = 0) -> float:
    """Normalized mutual information, 2 I / (H1 + H2), over the node
    universe covered by both partitions after the size filter.

    Degenerate entropies (both partitions constant) give 0 by convention.
    """
    sets1 = community_sets(p1, min_size)
    sets2 = community_sets(p2, min_size)
    of1: dict = {}
    for cid, members in sets1.items():
        for node in members:
            of1[node] = cid
    of2: dict = {}
    for cid, members in sets2.items():
        for node in members:
            of2[node] = cid
    universe = set(of1) & set(of2)
    if not universe:
        raise DataError("no common nodes between the two partitions after filtering")
    n = len(universe)
    joint: dict = defaultdict(int)
    c1: dict = defaultdict(int)
    c2: dict = defaultdict(int)
    for node in universe:
        a, b = of1[node], of2[node]
        joint[(a, b)] += 1
        c1[a] += 1
        c2[b] += 1
    h1 = -math.fsum((c / n) * math.log(c / n) for c in c1.values())
    h2 = -math.fsum((c / n) * math.log(c / n) for c in c2.values())
    if h1 + h2 == 0.0:
        return 0.0
    mi = math.fsum((cnt / n) * math.log(n * cnt / (c1[a] * c2[b]))
                   for (a, b), cnt in joint.items())
    return min(1.0, max(0.0, 2.0 * mi / (h1 + h2)))


def actor_coverage(net, layer_i: str, layer_j: str) -> float:
    """|V^i n V^j| / |V^i|; directional."""
    gi, gj = net.layers[layer_i], net.layers[layer_j]
    if not gi.nodes:
        raise DataError(f"layer {layer_i!r} has no nodes")
    return len(gi.nodes & gj.nodes) / len(gi.nodes)


def edge_coverage(net, layer_i: str, layer_j: str) -> float:
    """|E^i n E^j| / |E^i| over unordered endpoint pairs, ignoring weights."""
    gi, gj = net.layers[layer_i], net.layers[layer_j]
    if not gi.edges:
        raise DataError(f"layer {layer_i!r} has no edges")
    return len(gi.edges.keys() & gj.edges.keys()) / len(gi.edges)


def pearson_degree_correlation(net, layer_i: str, layer_j: str) -> float:
    """Pearson correlation of unweighted degrees over the common actors."""
    gi, gj = net.layers[layer_i], net.layers[layer_j]
    common = sorted(gi.nodes & gj.nodes)
    if len(common) < 2:
        raise UndefinedMetricError(
            f"degree correlation needs >= 2 common actors between {layer_i!r} and {layer_j!r}")
    di = gi.degrees()
    dj = gj.degrees()
    x = np.array([di[u] for u in common], dtype=float)
    y = np.array([dj[u] for u in common], dtype=float)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedMetricError("degree correlation undefined for a constant degree vector")
    return float(np.corrcoef(x, y)[0, 1])
