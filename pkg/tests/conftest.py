"""Shared builders for the test suite."""

import numpy as np
import pytest

from multicoord.netbuild import LayerGraph, MultiplexNetwork


def clique(layer, names, weight=1.0):
    pairs = [(names[i], names[j], weight)
             for i in range(len(names)) for j in range(i + 1, len(names))]
    return LayerGraph.from_pairs(layer, pairs)


def random_layer(rng, layer="rtw", n=10, p=0.3, w_lo=0.05, w_hi=1.05):
    """Erdos-Renyi-ish weighted layer; may contain isolated-node-free subsets."""
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                pairs.append((f"n{i:02d}", f"n{j:02d}",
                              float(w_lo + rng.random() * (w_hi - w_lo))))
    return LayerGraph.from_pairs(layer, pairs)


def two_clique_bridge(layer="rtw"):
    """Two 5-cliques joined by one edge; the unique modularity optimum is
    the two cliques (verified by exhaustive search over all partitions).
    """
    pairs = [(f"a{i}", f"a{j}", 1.0) for i in range(5) for j in range(i + 1, 5)]
    pairs += [(f"b{i}", f"b{j}", 1.0) for i in range(5) for j in range(i + 1, 5)]
    pairs.append(("a4", "b0", 1.0))
    return LayerGraph.from_pairs(layer, pairs)


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)


@pytest.fixture
def barbell():
    """Two triangles abc and def joined by the bridge c-d, unit weights."""
    return LayerGraph.from_pairs("rtw", [
        ("a", "b", 1.0), ("a", "c", 1.0), ("b", "c", 1.0),
        ("d", "e", 1.0), ("d", "f", 1.0), ("e", "f", 1.0),
        ("c", "d", 1.0)])


def multiplex_from(layer_pairs):
    layers = {name: LayerGraph.from_pairs(name, pairs)
              for name, pairs in layer_pairs.items()}
    return MultiplexNetwork.from_layers(layers)
