"""Batch orchestration: config file -> artifact directory.

A run configuration is a JSON document; unknown keys are rejected at every
level so typos fail loudly instead of silently using defaults. Each stage
reads the previous stage's files from the output directory, which makes
stages restartable and the whole pipeline a plain function of (config,
seed): two runs with the same effective config produce byte-identical
artifacts.

Approach tokens name community structures when comparing:

    rtw rpl men hst url    per-layer partitions
    unfl-nw unfl-ec unfl-sum intfl    flattened partitions
    multi    the multiplex partition (auto-restricted when the other
             side is a single layer)
    multi:<layer>    explicit restriction

The reference side of a comparison is the B side: lost communities are
those of the baseline A that the reference no longer detects, gained ones
are new in the reference.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, DataError
from .ingest import (ACTIONS, StopLists, apply_stoplists, load_stoplist,
                     parse_events, select_users)
from .netbuild import LayerGraph, MultiplexNetwork, build_multiplex
from .filternet import FilterConfig, filter_multiplex
from .community import (UNION_STRATEGIES, flatten_intersection, flatten_union,
                        generalized_louvain, louvain, modularity,
                        multislice_modularity, restrict_to_layer)
from .compare import (hungarian_match, label_communities, label_nodes, nmi,
                      overlap_matrix, actor_coverage, edge_coverage,
                      pearson_degree_correlation, COMMON, GAINED, LOST)
from .characterize import (COMMUNITY_METRIC_NAMES, NODE_METRIC_NAMES,
                           brunner_munzel, community_metrics, metric_cosine,
                           node_metrics, pca_project, significance_band)
from .errors import DegenerateSampleError, UndefinedMetricError
from .synth import SynthConfig, generate
from . import reports
from .reports import ReportContext

logger = logging.getLogger(__name__)

DETECT_MODES = ("mono", "indi", "unfl-nw", "unfl-ec", "unfl-sum", "multi", "intfl")
FLAT_SCOPES = tuple(f"unfl-{s}" for s in UNION_STRATEGIES) + ("intfl",)

_STOP_KEYS = ("hashtags", "mentions", "url_domains")
_FILTER_KEYS = ("th_a", "max_nodes", "weight_rule", "weight_value")
_DETECT_KEYS = ("gamma", "omega", "seed", "theta", "min_size")
_SYNTH_KEYS = ("n_users", "community_sizes", "strengths", "seed", "noise_rate",
               "community_pool_size", "noise_pool_size", "span_hours",
               "width_hours", "shift_hours")
_TOP_KEYS = ("input", "schema", "stoplists", "fraction", "width_hours",
             "shift_hours", "filter", "detection", "comparisons", "out", "synth")


def _check_keys(d: dict, allowed, where: str) -> None:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


@dataclass
class DetectionSettings:
    gamma: float = 1.0
    omega: float = 0.1
    seed: int = 42
    theta: float = 0.5
    min_size: int = 0

    def __post_init__(self):
        if not (0.0 <= self.theta <= 1.0):
            raise ConfigError(f"theta must be in [0, 1], got {self.theta}")
        if self.gamma < 0 or self.omega < 0:
            raise ConfigError("gamma and omega must be >= 0")
        if self.min_size < 0:
            raise ConfigError(f"min_size must be >= 0, got {self.min_size}")
        self.seed = int(self.seed)


@dataclass
class RunConfig:
    """Validated run configuration; see from_dict for the document schema."""

    input: str | None = None
    schema: str = "tsv"
    stoplist_paths: dict = field(default_factory=dict)
    fraction: float = 1.0
    width_hours: float = 6.0
    shift_hours: float = 5.0
    filter: FilterConfig = field(default_factory=FilterConfig)
    detection: DetectionSettings = field(default_factory=DetectionSettings)
    comparisons: tuple = ()
    out: str = "out"
    synth: SynthConfig | None = None

    def __post_init__(self):
        if not (0.0 < self.fraction <= 1.0):
            raise ConfigError(f"fraction must be in (0, 1], got {self.fraction}")
        if self.width_hours <= 0 or self.shift_hours <= 0:
            raise ConfigError("width_hours and shift_hours must be positive")
        if self.schema not in ("tsv", "jsonl"):
            raise ConfigError(f"schema must be tsv or jsonl, got {self.schema!r}")

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str = ".") -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        _check_keys(doc, _TOP_KEYS, "config")

        def respath(p):
            return p if os.path.isabs(p) else os.path.join(base_dir, p)

        input_path = doc.get("input")
        if input_path is not None:
            input_path = respath(str(input_path))
            if not os.path.exists(input_path):
                raise ConfigError(f"input file does not exist: {input_path}")

        stop_doc = doc.get("stoplists", {})
        if not isinstance(stop_doc, dict):
            raise ConfigError("stoplists must be an object")
        _check_keys(stop_doc, _STOP_KEYS, "stoplists")
        stop_paths = {}
        for key, p in stop_doc.items():
            p = respath(str(p))
            if not os.path.exists(p):
                raise ConfigError(f"stoplist file does not exist: {p}")
            stop_paths[key] = p

        filt_doc = dict(doc.get("filter", {}))
        if not isinstance(filt_doc, dict):
            raise ConfigError("filter must be an object")
        _check_keys(filt_doc, _FILTER_KEYS, "filter")
        try:
            filt = FilterConfig(**filt_doc)
        except ValueError as exc:
            raise ConfigError(f"filter: {exc}") from exc

        det_doc = dict(doc.get("detection", {}))
        if not isinstance(det_doc, dict):
            raise ConfigError("detection must be an object")
        _check_keys(det_doc, _DETECT_KEYS, "detection")
        det = DetectionSettings(**det_doc)

        comp_doc = doc.get("comparisons", [])
        if not isinstance(comp_doc, list):
            raise ConfigError("comparisons must be a list of [ref, other] pairs")
        comparisons = []
        for entry in comp_doc:
            if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
                raise ConfigError(f"comparison entries are [ref, other] pairs, got {entry!r}")
            comparisons.append((str(entry[0]), str(entry[1])))

        synth_doc = doc.get("synth")
        synth_cfg = None
        if synth_doc is not None:
            if not isinstance(synth_doc, dict):
                raise ConfigError("synth must be an object")
            _check_keys(synth_doc, _SYNTH_KEYS, "synth")
            kwargs = dict(synth_doc)
            kwargs["community_sizes"] = tuple(kwargs.get("community_sizes", ()))
            kwargs["strengths"] = tuple(kwargs.get("strengths", ()))
            try:
                synth_cfg = SynthConfig(**kwargs)
            except (TypeError, ValueError, DataError) as exc:
                raise ConfigError(f"synth: {exc}") from exc

        try:
            return cls(
                input=input_path,
                schema=str(doc.get("schema", "tsv")),
                stoplist_paths=stop_paths,
                fraction=float(doc.get("fraction", 1.0)),
                width_hours=float(doc.get("width_hours", 6.0)),
                shift_hours=float(doc.get("shift_hours", 5.0)),
                filter=filt,
                detection=det,
                comparisons=tuple(comparisons),
                out=respath(str(doc.get("out", "out"))),
                synth=synth_cfg,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))

    def to_dict(self) -> dict:
        """Effective config for hashing; overrides already applied."""
        synth = None
        if self.synth is not None:
            s = self.synth
            synth = {"n_users": s.n_users, "community_sizes": list(s.community_sizes),
                     "strengths": [dict(m) for m in s.strengths], "seed": s.seed,
                     "noise_rate": s.noise_rate,
                     "community_pool_size": s.community_pool_size,
                     "noise_pool_size": s.noise_pool_size,
                     "span_hours": s.span_hours, "width_hours": s.width_hours,
                     "shift_hours": s.shift_hours}
        return {
            "input": self.input,
            "schema": self.schema,
            "stoplists": dict(self.stoplist_paths),
            "fraction": self.fraction,
            "width_hours": self.width_hours,
            "shift_hours": self.shift_hours,
            "filter": {"th_a": self.filter.th_a, "max_nodes": self.filter.max_nodes,
                       "weight_rule": self.filter.weight_rule,
                       "weight_value": self.filter.weight_value},
            "detection": {"gamma": self.detection.gamma, "omega": self.detection.omega,
                          "seed": self.detection.seed, "theta": self.detection.theta,
                          "min_size": self.detection.min_size},
            "comparisons": [list(c) for c in self.comparisons],
            "out": self.out,
            "synth": synth,
        }

    def context(self) -> ReportContext:
        return ReportContext(version=__version__,
                             cfg_hash=reports.config_hash(self.to_dict()))


def _edges_path(out: str, scope: str) -> str:
    return os.path.join(out, f"edges_{scope}.tsv")


def _partition_path(out: str, scope: str) -> str:
    return os.path.join(out, f"partition_{scope}.tsv")


def _load_layer_graph(out: str, scope: str) -> LayerGraph:
    path = _edges_path(out, scope)
    if not os.path.exists(path):
        raise DataError(f"missing edge list {path}; run build (or the detect mode "
                        f"that creates scope {scope!r}) first")
    return reports.read_edges_tsv(path)


def _load_network(out: str) -> MultiplexNetwork:
    layers = {}
    for layer in ACTIONS:
        layers[layer] = _load_layer_graph(out, layer)
    return MultiplexNetwork.from_layers(layers)


# ---------------------------------------------------------------- synth

def run_synth(cfg: RunConfig) -> dict:
    """Generate the synthetic log + ground truth into the output directory."""
    if cfg.synth is None:
        raise ConfigError("config has no 'synth' section")
    ctx = cfg.context()
    log, truth = generate(cfg.synth)
    events_path = os.path.join(cfg.out, "events.tsv")
    truth_path = os.path.join(cfg.out, "ground_truth.tsv")
    ctx.events(events_path, log)
    ctx.ground_truth(truth_path, truth)
    records = [{
        "record": "synth_summary",
        "n_events": len(log.events),
        "n_users": cfg.synth.n_users,
        "n_communities": cfg.synth.n_communities,
        "n_noise_users": len(truth.noise_users),
        "active_layers": {str(c): sorted(ls) for c, ls in truth.active_layers.items()},
    }]
    ctx.records(os.path.join(cfg.out, "synth_report.jsonl"), records)
    return {"events": events_path, "ground_truth": truth_path}


# ---------------------------------------------------------------- build

def run_build(cfg: RunConfig, jobs: int = 1) -> dict:
    """Ingest, select actors, build the multiplex network, filter it, and
    write per-layer edge lists plus the filter / stats / coverage reports.
    """
    if cfg.input is None:
        raise ConfigError("config has no 'input' path")
    ctx = cfg.context()
    log = parse_events(cfg.input, schema=cfg.schema)
    if cfg.stoplist_paths:
        stop = StopLists.from_sets(
            hashtags=load_stoplist(cfg.stoplist_paths["hashtags"])
            if "hashtags" in cfg.stoplist_paths else (),
            mentions=load_stoplist(cfg.stoplist_paths["mentions"])
            if "mentions" in cfg.stoplist_paths else (),
            url_domains=load_stoplist(cfg.stoplist_paths["url_domains"])
            if "url_domains" in cfg.stoplist_paths else (),
        )
        log = apply_stoplists(log, stop)

    records = []
    if not log.events:
        logger.warning("build: empty event log; writing empty network")
        net = MultiplexNetwork.from_layers(
            {layer: LayerGraph(layer=layer, nodes=set(), edges={}) for layer in ACTIONS})
        filter_reports = []
        actors = None
    else:
        actors = select_users(log, cfg.fraction)
        net = build_multiplex(log, actors, width=cfg.width_hours * 3600.0,
                              shift=cfg.shift_hours * 3600.0)
        raw_records = [reports.layer_stats(net.layers[layer]) for layer in ACTIONS]
        for rec in raw_records:
            rec["record"] = "layer_stats_raw"
        records.extend(raw_records)
        net, filter_reports = filter_multiplex(net, cfg.filter)

    for layer in ACTIONS:
        ctx.edges(_edges_path(cfg.out, layer), net.layers[layer])

    for rep in filter_reports:
        records.append({
            "record": "filter_report", "layer": rep.layer,
            "th_a": rep.th_a, "th_a_auto": rep.th_a_auto,
            "weight_rule": rep.weight_rule, "weight_threshold": rep.weight_threshold,
            "nodes_raw": rep.nodes_raw, "edges_raw": rep.edges_raw,
            "nodes_actions": rep.nodes_actions, "edges_actions": rep.edges_actions,
            "nodes_final": rep.nodes_final, "edges_final": rep.edges_final,
        })
    records.extend(reports.layer_stats(net.layers[layer]) for layer in ACTIONS)

    for li in ACTIONS:
        for lj in ACTIONS:
            if li == lj:
                continue
            rec = {"record": "layer_coverage", "layer_i": li, "layer_j": lj}
            try:
                rec["actor_coverage"] = actor_coverage(net, li, lj)
            except DataError:
                rec["actor_coverage"] = None
            try:
                rec["edge_coverage"] = edge_coverage(net, li, lj)
            except DataError:
                rec["edge_coverage"] = None
            try:
                rec["degree_correlation"] = pearson_degree_correlation(net, li, lj)
            except (DataError, UndefinedMetricError):
                rec["degree_correlation"] = None
            records.append(rec)

    if actors is not None:
        with reports._open_out(os.path.join(cfg.out, "actors.tsv")) as fh:
            fh.write(f"# multicoord {ctx.version} config {ctx.cfg_hash}\n")
            fh.write("user_id\n")
            for u in sorted(actors.actors):
                fh.write(f"{u}\n")

    ctx.records(os.path.join(cfg.out, "build_report.jsonl"), records)
    logger.info("build: wrote %d layers to %s", len(ACTIONS), cfg.out)
    return {"out": cfg.out, "n_layers": len(ACTIONS)}


# ---------------------------------------------------------------- detect

def _detect_one_layer(cfg: RunConfig, ctx: ReportContext, layer: str) -> dict:
    g = _load_layer_graph(cfg.out, layer)
    if not g.nodes:
        logger.warning("detect: layer %s is empty; writing no partition", layer)
        return {"record": "partition_summary", "scope": layer, "empty": True,
                "n_nodes": 0, "n_communities": 0, "modularity": None}
    p = louvain(g, gamma=cfg.detection.gamma, seed=cfg.detection.seed)
    ctx.partition(_partition_path(cfg.out, layer), p)
    return {"record": "partition_summary", "scope": layer, "empty": False,
            "n_nodes": len(p.assignment), "n_communities": p.n_communities(),
            "modularity": modularity(g, p, gamma=cfg.detection.gamma),
            "gamma": cfg.detection.gamma, "seed": cfg.detection.seed}


def _detect_flat(cfg: RunConfig, ctx: ReportContext, scope: str) -> dict:
    net = _load_network(cfg.out)
    if scope == "intfl":
        flat = flatten_intersection(net)
    else:
        flat = flatten_union(net, strategy=scope.split("-", 1)[1])
    ctx.edges(_edges_path(cfg.out, scope), flat.graph)
    if not flat.graph.nodes:
        logger.warning("detect: flattened scope %s is empty", scope)
        return {"record": "partition_summary", "scope": scope, "empty": True,
                "n_nodes": 0, "n_communities": 0, "modularity": None}
    p = louvain(flat, gamma=cfg.detection.gamma, seed=cfg.detection.seed)
    ctx.partition(_partition_path(cfg.out, scope), p)
    return {"record": "partition_summary", "scope": scope, "empty": False,
            "n_nodes": len(p.assignment), "n_communities": p.n_communities(),
            "modularity": modularity(flat.graph, p, gamma=cfg.detection.gamma),
            "gamma": cfg.detection.gamma, "seed": cfg.detection.seed}


def _detect_multi(cfg: RunConfig, ctx: ReportContext) -> dict:
    net = _load_network(cfg.out)
    det = cfg.detection
    p = generalized_louvain(net, gamma=det.gamma, omega=det.omega, seed=det.seed)
    ctx.multiplex_partition(_partition_path(cfg.out, "multi"), p)
    return {"record": "partition_summary", "scope": "multi", "empty": not p.assignment,
            "n_nodes": len(p.assignment), "n_communities": p.n_communities(),
            "modularity": multislice_modularity(net, p, gamma=det.gamma, omega=det.omega),
            "gamma": det.gamma, "omega": det.omega, "seed": det.seed}


def run_detect(cfg: RunConfig, mode: str, layer: str | None = None,
               jobs: int = 1) -> list:
    """Detect communities under one operationalization; write partitions
    plus a summary record per produced scope.
    """
    if mode not in DETECT_MODES:
        raise ConfigError(f"unknown detect mode {mode!r}; expected one of {DETECT_MODES}")
    ctx = cfg.context()
    if mode == "mono":
        if layer is None:
            raise ConfigError("mode 'mono' needs --layer")
        if layer not in ACTIONS:
            raise ConfigError(f"unknown layer {layer!r}; expected one of {ACTIONS}")
        summaries = [_detect_one_layer(cfg, ctx, layer)]
    elif mode == "indi":
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=min(jobs, len(ACTIONS))) as pool:
                summaries = list(pool.map(lambda l: _detect_one_layer(cfg, ctx, l), ACTIONS))
        else:
            summaries = [_detect_one_layer(cfg, ctx, l) for l in ACTIONS]
    elif mode in FLAT_SCOPES:
        summaries = [_detect_flat(cfg, ctx, mode)]
    else:  # multi
        summaries = [_detect_multi(cfg, ctx)]
    ctx.records(os.path.join(cfg.out, f"detect_{mode}.jsonl"), summaries)
    return summaries


# ---------------------------------------------------------------- compare

def _parse_token(token: str) -> tuple[str, str | None]:
    """Split an approach token into (base, restriction layer or None)."""
    if token.startswith("multi:"):
        layer = token.split(":", 1)[1]
        if layer not in ACTIONS:
            raise ConfigError(f"unknown layer in token {token!r}")
        return "multi", layer
    if token in ACTIONS or token in FLAT_SCOPES or token == "multi":
        return token, None
    raise ConfigError(f"unknown approach token {token!r}")


def _resolve_tokens(ref: str, other: str) -> tuple[tuple, tuple]:
    """Apply the restrict-first rule: a bare 'multi' facing a single layer
    is restricted to that layer; facing a user-level scope it is a scope
    mismatch unless an explicit 'multi:<layer>' is given.
    """
    rb, rl = _parse_token(ref)
    ob, ol = _parse_token(other)
    if rb == "multi" and rl is None and ob != "multi":
        if ob in ACTIONS:
            rl = ob
        else:
            raise DataError(f"scope mismatch: '{ref}' is a multiplex partition and "
                            f"'{other}' is user-level; use multi:<layer>")
    if ob == "multi" and ol is None and rb != "multi":
        if rb in ACTIONS:
            ol = rb
        else:
            raise DataError(f"scope mismatch: '{other}' is a multiplex partition and "
                            f"'{ref}' is user-level; use multi:<layer>")
    return (rb, rl), (ob, ol)


def _load_approach(out: str, base: str, restriction: str | None):
    """Returns (community source, display token, metric graph scope or None)."""
    if base == "multi":
        path = _partition_path(out, "multi")
        if not os.path.exists(path):
            raise DataError(f"missing partition {path}; run detect --mode multi first")
        p = reports.read_multiplex_partition_tsv(path)
        if restriction is not None:
            return restrict_to_layer(p, restriction), f"multi-{restriction}", restriction
        return p, "multi", None
    path = _partition_path(out, base)
    if not os.path.exists(path):
        raise DataError(f"missing partition {path}; run detect first")
    return reports.read_partition_tsv(path), base, base


def comparison_id(ref: str, other: str) -> str:
    return f"{ref}_vs_{other}".replace(":", "-")


def run_compare(cfg: RunConfig, ref: str, other: str) -> dict:
    """Overlap matrix, optimal matching, labels, and NMI for one pair.

    ref is the reference approach (side B); other is the baseline (side A).
    """
    det = cfg.detection
    (rb, rl), (ob, ol) = _resolve_tokens(ref, other)
    B, b_token, _ = _load_approach(cfg.out, rb, rl)
    A, a_token, _ = _load_approach(cfg.out, ob, ol)
    cid = comparison_id(ref, other)
    ctx = cfg.context()

    O = overlap_matrix(A, B, min_size=det.min_size)
    M = hungarian_match(O)
    comm_labels = label_communities(O, M, theta=det.theta)
    node_labels = label_nodes(dict(zip(O.a_ids, O.a_members)),
                              dict(zip(O.b_ids, O.b_members)), M)
    nmi_value = nmi(A, B, min_size=det.min_size)

    ctx.overlap(os.path.join(cfg.out, f"overlap_{cid}.tsv"), O)

    def count(labels: dict, label: str) -> int:
        return sum(1 for v in labels.values() if v == label)

    records = [{
        "record": "comparison_summary",
        "ref": ref, "other": other, "a": a_token, "b": b_token,
        "theta": det.theta, "min_size": det.min_size,
        "k_a": O.k_a, "k_b": O.k_b,
        "n_matched": len(M.pairs), "total_overlap": M.total,
        "nmi": nmi_value,
        "communities": {
            "lost": count(comm_labels.community_labels_a, LOST),
            "common": count(comm_labels.community_labels_a, COMMON),
            "gained": count(comm_labels.community_labels_b, GAINED),
        },
        "nodes": {
            "lost": count(node_labels.node_labels, LOST),
            "common": count(node_labels.node_labels, COMMON),
            "gained": count(node_labels.node_labels, GAINED),
        },
    }]
    for a_idx, b_idx in M.pairs:
        records.append({"record": "matched_pair",
                        "a_community": str(O.a_ids[a_idx]),
                        "b_community": str(O.b_ids[b_idx]),
                        "overlap": O.overlap(a_idx, b_idx)})
    for side, labels in (("a", comm_labels.community_labels_a),
                         ("b", comm_labels.community_labels_b)):
        for comm_id in sorted(labels, key=lambda c: (str(type(c).__name__), c)):
            records.append({"record": "community_label", "side": side,
                            "community": str(comm_id), "label": labels[comm_id]})
    for node in sorted(node_labels.node_labels, key=str):
        records.append({"record": "node_label", "node": str(node),
                        "label": node_labels.node_labels[node]})
    ctx.records(os.path.join(cfg.out, f"labels_{cid}.jsonl"), records)
    logger.info("compare %s: k_a=%d k_b=%d matched=%d nmi=%.4f",
                cid, O.k_a, O.k_b, len(M.pairs), nmi_value)
    return records[0]


# ---------------------------------------------------------------- characterize

def _minmax_normalize(rows: list[np.ndarray]) -> list[np.ndarray]:
    X = np.vstack(rows)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return [np.clip((r - lo) / span, 0.0, 1.0) for r in rows]


def run_characterize(cfg: RunConfig, ref: str, other: str) -> dict:
    """Structural characterization of one finished comparison: community
    metric vectors (raw + min-max normalized), matched-pair cosine table,
    PCA coordinates, node metric records, and Brunner-Munzel tests between
    lost / common / gained node groups.
    """
    det = cfg.detection
    cid = comparison_id(ref, other)
    labels_path = os.path.join(cfg.out, f"labels_{cid}.jsonl")
    if not os.path.exists(labels_path):
        raise DataError(f"missing comparison output {labels_path}; run compare first")
    (rb, rl), (ob, ol) = _resolve_tokens(ref, other)
    B, b_token, b_scope = _load_approach(cfg.out, rb, rl)
    A, a_token, a_scope = _load_approach(cfg.out, ob, ol)
    if a_scope is None or b_scope is None:
        raise DataError("characterize needs a concrete graph per side; "
                        "restrict multiplex partitions to a layer (multi:<layer>)")
    g_a = _load_layer_graph(cfg.out, a_scope)
    g_b = _load_layer_graph(cfg.out, b_scope)
    ctx = cfg.context()

    O = overlap_matrix(A, B, min_size=det.min_size)
    M = hungarian_match(O)
    comm_labels = label_communities(O, M, theta=det.theta)
    node_labels = label_nodes(dict(zip(O.a_ids, O.a_members)),
                              dict(zip(O.b_ids, O.b_members)), M)

    comm_rows = []       # (side, community id, label, CommunityMetrics)
    for idx, comm_id in enumerate(O.a_ids):
        m = community_metrics(g_a, O.a_members[idx])
        comm_rows.append(("a", comm_id, comm_labels.community_labels_a[comm_id], m))
    for idx, comm_id in enumerate(O.b_ids):
        m = community_metrics(g_b, O.b_members[idx])
        comm_rows.append(("b", comm_id, comm_labels.community_labels_b[comm_id], m))

    vectors = [m.vector() for _, _, _, m in comm_rows]
    normalized = _minmax_normalize(vectors) if vectors else []
    records = []
    for (side, comm_id, label, m), norm in zip(comm_rows, normalized):
        records.append({
            "record": "community_metrics", "side": side, "community": str(comm_id),
            "label": label,
            "metrics": dict(zip(COMMUNITY_METRIC_NAMES, m.vector().tolist())),
            "normalized": dict(zip(COMMUNITY_METRIC_NAMES, norm.tolist())),
            "conductance_defined": m.conductance_defined,
            "assortativity_defined": m.assortativity_defined,
        })
    ctx.records(os.path.join(cfg.out, f"community_metrics_{cid}.jsonl"), records)

    by_key = {(side, comm_id): m.vector() for side, comm_id, _, m in comm_rows}
    cosine_rows = []
    for a_idx, b_idx in M.pairs:
        va = by_key[("a", O.a_ids[a_idx])]
        vb = by_key[("b", O.b_ids[b_idx])]
        try:
            cos = metric_cosine(va, vb)
        except UndefinedMetricError:
            cos = None
        cosine_rows.append((str(O.a_ids[a_idx]), str(O.b_ids[b_idx]),
                            O.overlap(a_idx, b_idx), cos))
    with reports._open_out(os.path.join(cfg.out, f"cosine_{cid}.tsv")) as fh:
        fh.write(f"# multicoord {ctx.version} config {ctx.cfg_hash}\n")
        fh.write("a_community\tb_community\toverlap\tcosine\n")
        for a_id, b_id, ov, cos in cosine_rows:
            fh.write(f"{a_id}\t{b_id}\t{ov!r}\t{'NA' if cos is None else repr(cos)}\n")
        defined = [c for _, _, _, c in cosine_rows if c is not None]
        mean = sum(defined) / len(defined) if defined else float("nan")
        fh.write(f"mean\t-\t-\t{'NA' if not defined else repr(mean)}\n")

    pca_records = []
    if len(vectors) >= 3:
        coords, ratios = pca_project(vectors, dims=2)
        pca_records.append({"record": "pca_ratios", "ratios": ratios.tolist()})
        for (side, comm_id, label, _), xy in zip(comm_rows, coords):
            pca_records.append({"record": "pca_point", "side": side,
                                "community": str(comm_id), "label": label,
                                "x": float(xy[0]), "y": float(xy[1])})
    else:
        pca_records.append({"record": "pca_skipped",
                            "reason": f"only {len(vectors)} communities"})
    ctx.records(os.path.join(cfg.out, f"pca_{cid}.jsonl"), pca_records)

    # node metrics: lost and common nodes live in the baseline graph A,
    # gained nodes only exist in the reference graph B
    nm_a = node_metrics(g_a) if g_a.nodes else {}
    nm_b = node_metrics(g_b) if g_b.nodes else {}
    node_records = []
    groups: dict = {LOST: {n: [] for n in NODE_METRIC_NAMES},
                    COMMON: {n: [] for n in NODE_METRIC_NAMES},
                    GAINED: {n: [] for n in NODE_METRIC_NAMES}}
    for node in sorted(node_labels.node_labels, key=str):
        label = node_labels.node_labels[node]
        source, graph_id = (nm_a, "a") if label in (LOST, COMMON) else (nm_b, "b")
        if node not in source:
            continue
        nm = source[node]
        rec = {"record": "node_metrics", "node": str(node), "label": label,
               "graph": graph_id}
        for name, value in zip(NODE_METRIC_NAMES, nm.vector().tolist()):
            rec[name] = value
            groups[label][name].append(value)
        node_records.append(rec)
    ctx.records(os.path.join(cfg.out, f"node_metrics_{cid}.jsonl"), node_records)

    bm_records = []
    pairs = ((LOST, COMMON), (LOST, GAINED), (COMMON, GAINED))
    for metric in NODE_METRIC_NAMES:
        for gx, gy in pairs:
            x = groups[gx][metric]
            y = groups[gy][metric]
            rec = {"record": "bm_test", "metric": metric, "group_x": gx,
                   "group_y": gy, "n_x": len(x), "n_y": len(y)}
            if len(x) < 2 or len(y) < 2:
                rec["skipped"] = "group too small"
            else:
                try:
                    res = brunner_munzel(x, y)
                    rec.update(statistic=res.statistic, p_value=res.p_value,
                               df=res.df, band=significance_band(res.p_value))
                except DegenerateSampleError as exc:
                    rec["degenerate"] = str(exc)
            bm_records.append(rec)
    ctx.records(os.path.join(cfg.out, f"bm_{cid}.jsonl"), bm_records)
    logger.info("characterize %s: %d communities, %d labeled nodes",
                cid, len(comm_rows), len(node_records))
    return {"comparison": cid, "n_communities": len(comm_rows),
            "n_nodes": len(node_records)}


# ---------------------------------------------------------------- report

def run_report(out: str) -> str:
    """Human-readable digest of an output directory; returns the text."""
    if not os.path.isdir(out):
        raise DataError(f"not a directory: {out}")
    lines = [f"multicoord report for {out}"]
    names = sorted(os.listdir(out))
    jsonl = [n for n in names if n.endswith(".jsonl")]
    tsv = [n for n in names if n.endswith(".tsv")]
    lines.append(f"{len(tsv)} tables, {len(jsonl)} record files")
    for name in jsonl:
        recs = reports.read_records(os.path.join(out, name))
        body = [r for r in recs if r.get("record") != "meta"]
        meta = next((r for r in recs if r.get("record") == "meta"), None)
        stamp = f" [v{meta['version']} cfg {meta['config_sha256'][:12]}]" if meta else ""
        lines.append(f"  {name}: {len(body)} records{stamp}")
        for r in body:
            kind = r.get("record")
            if kind == "partition_summary":
                lines.append(f"    scope {r['scope']}: {r['n_communities']} communities, "
                             f"{r['n_nodes']} nodes, Q={r['modularity']}")
            elif kind == "comparison_summary":
                lines.append(f"    {r['ref']} vs {r['other']}: "
                             f"communities lost/common/gained = "
                             f"{r['communities']['lost']}/{r['communities']['common']}/"
                             f"{r['communities']['gained']}, nmi={r['nmi']:.4f}")
            elif kind == "synth_summary":
                lines.append(f"    {r['n_events']} events, {r['n_users']} users, "
                             f"{r['n_communities']} planted communities")
    return "\n".join(lines) + "\n"
