"""Structural profiles of detected communities and statistical comparison.

Community descriptors (size, density, mean internal degree, mean internal
edge weight, mean local clustering, conductance, degree assortativity)
feed cosine similarity, PCA projections, and Brunner-Munzel tests between
groups of communities. Node descriptors (degree centrality, eigenvector
centrality, local clustering, PageRank) profile lost / common / gained
node groups.

Undefined structural values (assortativity with zero degree variance,
conductance when the member set is the whole graph) are reported as 0.0
with an explicit defined flag, so downstream vectors keep a fixed length.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.stats import rankdata, t as t_dist

from .errors import DegenerateSampleError, UndefinedMetricError
from .netbuild import LayerGraph

logger = logging.getLogger(__name__)

COMMUNITY_METRIC_NAMES = ("size", "density", "avg_degree", "avg_weight",
                          "avg_clustering", "conductance", "assortativity")
NODE_METRIC_NAMES = ("degree_centrality", "eigenvector_centrality",
                     "local_clustering", "pagerank")

_POWER_TOL = 1e-13
_POWER_MAX_ITER = 100000
_PAGERANK_TOL = 1e-12
_PAGERANK_MAX_ITER = 100000


@dataclass(frozen=True)
class CommunityMetrics:
    """Fixed-order structural descriptor of one community."""

    size: int
    density: float
    avg_degree: float
    avg_weight: float
    avg_clustering: float
    conductance: float
    assortativity: float
    conductance_defined: bool = True
    assortativity_defined: bool = True

    def vector(self) -> np.ndarray:
        return np.array([self.size, self.density, self.avg_degree,
                         self.avg_weight, self.avg_clustering,
                         self.conductance, self.assortativity], dtype=float)


@dataclass(frozen=True)
class NodeMetrics:
    """Fixed-order centrality descriptor of one node."""

    degree_centrality: float
    eigenvector_centrality: float
    local_clustering: float
    pagerank: float

    def vector(self) -> np.ndarray:
        return np.array([self.degree_centrality, self.eigenvector_centrality,
                         self.local_clustering, self.pagerank], dtype=float)


@dataclass(frozen=True)
class TestResult:
    """Two-sided Brunner-Munzel outcome."""

    statistic: float
    p_value: float
    df: float
    n_x: int
    n_y: int


def _adjacency_sets(g: LayerGraph) -> dict:
    adj: dict = {u: set() for u in g.nodes}
    for u, v in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def _local_clustering(adj: dict, node) -> float:
    neigh = adj[node]
    d = len(neigh)
    if d < 2:
        return 0.0
    links = 0
    for w in neigh:
        links += len(adj[w] & neigh)
    # each triangle edge counted twice in the loop above
    return links / (d * (d - 1))


def community_metrics(g: LayerGraph, members) -> CommunityMetrics:
    """Structural descriptor of the member set within graph g.

    Density, mean degree, weight, and clustering are computed on the
    induced subgraph; conductance uses unweighted volumes on the full
    graph; assortativity is the degree assortativity of the induced
    subgraph. Weights enter only through avg_weight.
    """
    members = frozenset(members)
    if not members:
        raise ValueError("empty member set")
    missing = members - g.nodes
    if missing:
        raise ValueError(f"{len(missing)} members not in graph, e.g. {sorted(missing)[:3]}")
    n = len(members)
    internal = [(u, v, data) for (u, v), data in g.edges.items()
                if u in members and v in members]
    e_in = len(internal)
    density = 2.0 * e_in / (n * (n - 1)) if n >= 2 else 0.0
    avg_degree = 2.0 * e_in / n
    avg_weight = math.fsum(d.weight for _, _, d in internal) / e_in if e_in else 0.0

    sub_adj: dict = {u: set() for u in members}
    for u, v, _ in internal:
        sub_adj[u].add(v)
        sub_adj[v].add(u)
    avg_clustering = math.fsum(_local_clustering(sub_adj, u) for u in members) / n

    # conductance: unweighted cut over the smaller unweighted volume
    cut = 0
    vol_in = 0
    vol_total = 0
    for (u, v) in g.edges:
        u_in, v_in = u in members, v in members
        vol_total += 2
        vol_in += int(u_in) + int(v_in)
        if u_in != v_in:
            cut += 1
    vol_out = vol_total - vol_in
    if min(vol_in, vol_out) == 0:
        conductance, conductance_defined = 0.0, False
    else:
        conductance, conductance_defined = cut / min(vol_in, vol_out), True

    assortativity, assortativity_defined = _degree_assortativity(sub_adj)
    return CommunityMetrics(size=n, density=density, avg_degree=avg_degree,
                            avg_weight=avg_weight, avg_clustering=avg_clustering,
                            conductance=conductance, assortativity=assortativity,
                            conductance_defined=conductance_defined,
                            assortativity_defined=assortativity_defined)


def _degree_assortativity(adj: dict) -> tuple[float, bool]:
    """Pearson correlation of endpoint degrees over edges, symmetrized."""
    deg = {u: len(vs) for u, vs in adj.items()}
    xs = []
    ys = []
    for u in sorted(adj):  # fixed order so the numpy reductions are reproducible
        for v in sorted(adj[u]):
            xs.append(deg[u])
            ys.append(deg[v])
    if not xs:
        return 0.0, False
    x = np.array(xs, dtype=float)
    y = np.array(ys, dtype=float)
    vx = x.var()
    vy = y.var()
    if vx == 0.0 or vy == 0.0:
        return 0.0, False
    r = float(((x - x.mean()) * (y - y.mean())).mean() / math.sqrt(vx * vy))
    return r, True


def _eigenvector_centrality(g: LayerGraph, order: list, index: dict) -> np.ndarray:
    """Power iteration per connected component, keep the one with the
    largest eigenvalue, zero elsewhere, unit Euclidean norm overall.

    The iteration runs on A + I so bipartite components (paired +/- lambda
    spectrum) still converge; the shift cancels out of the reported
    eigenvector and is removed from the eigenvalue estimate.
    """
    n = len(order)
    rows, cols, vals = [], [], []
    for (u, v), data in g.edges.items():
        i, j = index[u], index[v]
        rows += [i, j]
        cols += [j, i]
        vals += [data.weight, data.weight]
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    n_comp, labels = connected_components(A, directed=False)
    best_val = -np.inf
    best_vec = None
    for c in range(n_comp):
        mask = labels == c
        idx = np.flatnonzero(mask)
        if idx.size == 1:
            lam = 0.0
            vec = np.ones(1)
        else:
            sub = A[idx][:, idx]
            x = np.full(idx.size, 1.0 / math.sqrt(idx.size))
            lam = 0.0
            for _ in range(_POWER_MAX_ITER):
                y = sub @ x + x
                norm = np.linalg.norm(y)
                if norm == 0.0:
                    break
                y /= norm
                if np.max(np.abs(y - x)) < _POWER_TOL:
                    x = y
                    break
                x = y
            lam = float(x @ (sub @ x)) / float(x @ x)
            vec = x
        if lam > best_val + 1e-12 or best_vec is None:
            best_val = lam
            best_idx = idx
            best_vec = vec
    out = np.zeros(n)
    out[best_idx] = np.abs(best_vec)
    norm = np.linalg.norm(out)
    if norm > 0:
        out /= norm
    return out


def _pagerank(g: LayerGraph, order: list, index: dict, damping: float) -> np.ndarray:
    """Weighted PageRank with uniform teleport, L1 stopping rule."""
    n = len(order)
    rows, cols, vals = [], [], []
    for (u, v), data in g.edges.items():
        i, j = index[u], index[v]
        rows += [i, j]
        cols += [j, i]
        vals += [data.weight, data.weight]
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    out_strength = np.asarray(A.sum(axis=1)).ravel()
    dangling = out_strength == 0.0
    inv = np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, out_strength))
    P = sp.diags(inv) @ A  # row-stochastic on non-dangling rows
    x = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    for _ in range(_PAGERANK_MAX_ITER):
        x_new = damping * (P.T @ x) + teleport
        x_new += damping * x[dangling].sum() / n
        err = np.abs(x_new - x).sum()
        x = x_new
        if err < _PAGERANK_TOL:
            break
    return x / x.sum()


def node_metrics(g: LayerGraph, damping: float = 0.85) -> dict:
    """All four node descriptors for every node of g."""
    if not g.nodes:
        raise ValueError("empty graph")
    if not (0.0 < damping < 1.0):
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    order = sorted(g.nodes)
    index = {u: i for i, u in enumerate(order)}
    n = len(order)
    adj = _adjacency_sets(g)
    degc = {u: (len(adj[u]) / (n - 1) if n > 1 else 0.0) for u in order}
    clus = {u: _local_clustering(adj, u) for u in order}
    eig = _eigenvector_centrality(g, order, index) if g.edges else (
        np.ones(n) / math.sqrt(n))
    pr = _pagerank(g, order, index, damping) if g.edges else np.full(n, 1.0 / n)
    return {u: NodeMetrics(degree_centrality=degc[u],
                           eigenvector_centrality=float(eig[i]),
                           local_clustering=clus[u],
                           pagerank=float(pr[i]))
            for i, u in enumerate(order)}


def metric_cosine(v1, v2) -> float:
    """Cosine similarity between two descriptor vectors."""
    a = np.asarray(v1, dtype=float)
    b = np.asarray(v2, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise UndefinedMetricError("cosine undefined for a zero vector")
    return float(a @ b / (na * nb))


def pca_project(vectors, dims: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Project descriptor rows onto principal axes of the z-scored data.

    Zero-variance features are dropped (with a warning) before scoring.
    Returns (coordinates (n, dims), explained variance ratios for all kept
    components, eigenvalues over the original feature count, so the ratios
    sum to 1 exactly when nothing was dropped).
    """
    if isinstance(vectors, (list, tuple)) and vectors and isinstance(vectors[0], CommunityMetrics):
        X = np.vstack([v.vector() for v in vectors])
    else:
        X = np.asarray(vectors, dtype=float)
    if X.ndim != 2:
        raise ValueError("vectors must form a 2D array")
    n, n_feat = X.shape
    if n < 3:
        raise ValueError(f"PCA needs at least 3 rows, got {n}")
    std = X.std(axis=0, ddof=1)
    keep = std > 0.0
    if not np.any(keep):
        raise ValueError("all features have zero variance")
    if not np.all(keep):
        dropped = [COMMUNITY_METRIC_NAMES[i] if n_feat == len(COMMUNITY_METRIC_NAMES) else str(i)
                   for i in np.flatnonzero(~keep)]
        warnings.warn(f"dropping zero-variance features: {', '.join(dropped)}",
                      stacklevel=2)
    Xk = X[:, keep]
    Z = (Xk - Xk.mean(axis=0)) / std[keep]
    C = np.cov(Z, rowvar=False, ddof=1)
    C = np.atleast_2d(C)
    eigval, eigvec = np.linalg.eigh(C)
    order = np.argsort(eigval)[::-1]
    eigval = np.clip(eigval[order], 0.0, None)
    eigvec = eigvec[:, order]
    if dims < 1 or dims > eigvec.shape[1]:
        raise ValueError(f"dims must be in [1, {eigvec.shape[1]}], got {dims}")
    # orient each axis so its largest-magnitude loading is positive
    for k in range(eigvec.shape[1]):
        pivot = int(np.argmax(np.abs(eigvec[:, k])))
        if eigvec[pivot, k] < 0:
            eigvec[:, k] = -eigvec[:, k]
    coords = Z @ eigvec[:, :dims]
    ratios = eigval / n_feat
    return coords, ratios


def brunner_munzel(x, y) -> TestResult:
    """Two-sided rank test for P(X < Y) + 0.5 P(X = Y) = 0.5 with
    Satterthwaite degrees of freedom; midranks handle ties.

    Fully separated samples have zero rank variance and no finite
    statistic; that raises DegenerateSampleError.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx, ny = len(x), len(y)
    if nx < 2 or ny < 2:
        raise ValueError(f"each sample needs >= 2 values, got {nx} and {ny}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("samples must be finite")
    rank_all = rankdata(np.concatenate((x, y)))
    rx, ry = rank_all[:nx], rank_all[nx:]
    rx_mean, ry_mean = rx.mean(), ry.mean()
    rx_within = rankdata(x)
    ry_within = rankdata(y)
    sx = np.square(rx - rx_within - rx_mean + rx_within.mean()).sum() / (nx - 1)
    sy = np.square(ry - ry_within - ry_mean + ry_within.mean()).sum() / (ny - 1)
    pooled = nx * sx + ny * sy
    if pooled <= 0.0:
        raise DegenerateSampleError("zero rank variance (fully separated or constant samples)")
    statistic = nx * ny * (ry_mean - rx_mean) / ((nx + ny) * math.sqrt(pooled))
    df = pooled ** 2 / ((nx * sx) ** 2 / (nx - 1) + (ny * sy) ** 2 / (ny - 1))
    p_value = 2.0 * float(t_dist.sf(abs(statistic), df))
    return TestResult(statistic=float(statistic), p_value=min(1.0, p_value),
                      df=float(df), n_x=nx, n_y=ny)


def significance_band(p: float) -> str:
    """Compact significance label: *** / ** / * / ns."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p <= 0.001:
        return "***"
    if p <= 0.01:
        return "**"
    if p <= 0.05:
        return "*"
    return "ns"
