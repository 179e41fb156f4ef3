"""Synthetic action logs with planted coordinated communities.

Members of a planted community draw items from a small community-specific
pool in each layer the community is active in, which concentrates their
TF-IDF vectors on the same few items and produces high-cosine edges. Noise
events draw from a large per-layer pool shared by everyone. Community pools
are disjoint from each other and from the noise pools, so at high strength
the planted partition is the unique reasonable answer and every planted
co-action is traceable to its community by the item prefix.

Activity is planted window by window: for every window slice, each member
emits a Poisson-distributed number of events with timestamps uniform in
that window, so the windowing logic is exercised, overlap regions included.
Generation is single-threaded and fully determined by the seed.

Beware the degenerate regime: TF-IDF nulls items used by every active user
of a layer window, so a lone community with zero noise and a tiny pool can
produce empty vectors. Keep at least two populations active per layer (a
second community or a nonzero noise rate) or a pool comfortably larger
than one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .ingest import ACTIONS, ActionEvent, EventLog
from .netbuild import window_slices

logger = logging.getLogger(__name__)

NOISE = "noise"


def _as_layer_map(value, what: str) -> dict:
    """Normalize an int/float or {layer: value} mapping to a full per-layer dict."""
    if isinstance(value, dict):
        unknown = set(value) - set(ACTIONS)
        if unknown:
            raise ValueError(f"{what}: unknown layers {sorted(unknown)}")
        return {layer: value.get(layer, 0) for layer in ACTIONS}
    return {layer: value for layer in ACTIONS}


@dataclass
class SynthConfig:
    """Recipe for one synthetic log.

    strengths has one mapping per community: layer -> expected planted
    events per member per window (0 or absent = inactive in that layer).
    noise_rate is the expected noise events per user per layer per window,
    applied to every user, members included. Pool sizes are per layer.
    """

    n_users: int
    community_sizes: tuple
    strengths: tuple
    seed: int
    noise_rate: float = 0.0
    community_pool_size: int = 6
    noise_pool_size: object = 5000
    span_hours: float = 48.0
    width_hours: float = 6.0
    shift_hours: float = 5.0
    _noise_pools: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if self.seed is None:
            raise ValueError("seed is mandatory")
        self.seed = int(self.seed)
        self.community_sizes = tuple(int(s) for s in self.community_sizes)
        self.strengths = tuple(dict(s) for s in self.strengths)
        if self.n_users < 1:
            raise ValueError(f"n_users must be >= 1, got {self.n_users}")
        if len(self.strengths) != len(self.community_sizes):
            raise ValueError(f"{len(self.community_sizes)} sizes but "
                             f"{len(self.strengths)} strength maps")
        if any(s < 1 for s in self.community_sizes):
            raise ValueError("community sizes must be >= 1")
        if sum(self.community_sizes) > self.n_users:
            raise ValueError(f"community sizes sum to {sum(self.community_sizes)} "
                             f"> n_users {self.n_users}")
        for ci, smap in enumerate(self.strengths):
            unknown = set(smap) - set(ACTIONS)
            if unknown:
                raise ValueError(f"community {ci}: unknown layers {sorted(unknown)}")
            if any(v < 0 for v in smap.values()):
                raise ValueError(f"community {ci}: negative strength")
        if self.noise_rate < 0:
            raise ValueError(f"noise_rate must be >= 0, got {self.noise_rate}")
        if self.community_pool_size < 2:
            raise DataError("community_pool_size must be >= 2: a single-item pool "
                            "shared by every active user is nulled by TF-IDF")
        self._noise_pools = {k: int(v) for k, v in
                             _as_layer_map(self.noise_pool_size, "noise_pool_size").items()}
        if self.noise_rate > 0 and any(v < 1 for v in self._noise_pools.values()):
            raise DataError("noise_pool_size must be >= 1 in every layer when noise_rate > 0")
        if self.width_hours <= 0 or self.shift_hours <= 0:
            raise ValueError("width_hours and shift_hours must be positive")
        if self.span_hours < self.width_hours:
            raise ValueError(f"span_hours {self.span_hours} shorter than "
                             f"width_hours {self.width_hours}")

    @property
    def n_communities(self) -> int:
        return len(self.community_sizes)


@dataclass(frozen=True)
class GroundTruth:
    """Planted assignment: user -> community id for members; noise users
    are absent from the map. active_layers marks where each community
    coordinates.
    """

    assignment: dict
    active_layers: dict  # community id -> frozenset of layer names
    noise_users: frozenset

    def communities(self) -> dict:
        out: dict = {}
        for user, cid in self.assignment.items():
            out.setdefault(cid, set()).add(user)
        return {cid: frozenset(members) for cid, members in out.items()}

    def members(self, cid) -> frozenset:
        return self.communities().get(cid, frozenset())


def generate(cfg: SynthConfig) -> tuple[EventLog, GroundTruth]:
    """Build the planted log and its ground truth; deterministic per seed."""
    rng = np.random.default_rng(cfg.seed)
    digits = max(4, len(str(cfg.n_users - 1)))
    users = [f"u{i:0{digits}d}" for i in range(cfg.n_users)]

    assignment: dict = {}
    members: list[list[str]] = []
    cursor = 0
    for ci, size in enumerate(cfg.community_sizes):
        block = users[cursor:cursor + size]
        members.append(block)
        for u in block:
            assignment[u] = ci
        cursor += size
    noise_users = frozenset(users[cursor:])
    active = {ci: frozenset(layer for layer, s in cfg.strengths[ci].items() if s > 0)
              for ci in range(cfg.n_communities)}

    span_s = cfg.span_hours * 3600.0
    width_s = cfg.width_hours * 3600.0
    windows = window_slices((0.0, span_s), width_s, cfg.shift_hours * 3600.0)

    events: list[ActionEvent] = []
    for w in windows:
        for layer in ACTIONS:
            for ci in range(cfg.n_communities):
                strength = cfg.strengths[ci].get(layer, 0.0)
                if strength <= 0:
                    continue
                block = members[ci]
                counts = rng.poisson(strength, size=len(block))
                total = int(counts.sum())
                if total == 0:
                    continue
                items = rng.integers(0, cfg.community_pool_size, size=total)
                offsets = rng.random(total) * width_s
                pos = 0
                for u, k in zip(block, counts):
                    for j in range(k):
                        events.append(ActionEvent(
                            user_id=u, action=layer,
                            item_id=f"c{ci}.{layer}.{int(items[pos])}",
                            timestamp=float(w.start + offsets[pos])))
                        pos += 1
            if cfg.noise_rate > 0:
                counts = rng.poisson(cfg.noise_rate, size=len(users))
                total = int(counts.sum())
                if total == 0:
                    continue
                pool = cfg._noise_pools[layer]
                items = rng.integers(0, pool, size=total)
                offsets = rng.random(total) * width_s
                pos = 0
                for u, k in zip(users, counts):
                    for j in range(k):
                        events.append(ActionEvent(
                            user_id=u, action=layer,
                            item_id=f"n.{layer}.{int(items[pos])}",
                            timestamp=float(w.start + offsets[pos])))
                        pos += 1

    events.sort(key=lambda e: (e.timestamp, e.user_id, e.action, e.item_id))
    log = EventLog(events=tuple(events), time_span=(0.0, span_s))
    truth = GroundTruth(assignment=assignment, active_layers=active,
                        noise_users=noise_users)
    planted = sum(1 for e in events if e.item_id.startswith("c"))
    logger.info("synth: %d events (%d planted, %d noise) over %d windows, %d users",
                len(events), planted, len(events) - planted, len(windows), cfg.n_users)
    return log, truth
