"""File formats for pipeline artifacts.

Everything is line-oriented text: tab-separated tables for edge lists,
partitions, ground truth, and overlap matrices, JSON lines for structured
records. Every file starts with a comment line carrying the toolkit
version and the config hash, and writers sort rows, so identical inputs
produce byte-identical files. Floats are written with repr (shortest
round-trip form); no timestamps appear in report bodies.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass

from .errors import DataError
from .community import MultiplexPartition, Partition
from .netbuild import EdgeData, LayerGraph

logger = logging.getLogger(__name__)

UNHASHED = "unhashed"


def canonical_json(obj) -> str:
    """Stable JSON encoding: sorted keys, no whitespace variation."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(cfg_obj) -> str:
    """sha256 of the canonical JSON form of a config mapping."""
    return hashlib.sha256(canonical_json(cfg_obj).encode("utf-8")).hexdigest()


def _meta_line(version: str, cfg_hash: str) -> str:
    return f"# multicoord {version} config {cfg_hash}\n"


def _open_out(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="\n")


def _fmt(x) -> str:
    if isinstance(x, float):  # incl. numpy float subclasses
        if not math.isfinite(x):
            raise ValueError(f"non-finite value in report: {x}")
        return repr(float(x))
    return str(x)


def write_edges_tsv(path: str, g: LayerGraph, version: str = "0",
                    cfg_hash: str = UNHASHED) -> None:
    """`user_a  user_b  weight  co_actions  window_count`, sorted rows."""
    with _open_out(path) as fh:
        fh.write(_meta_line(version, cfg_hash))
        fh.write(f"# layer {g.layer}\n")
        fh.write("user_a\tuser_b\tweight\tco_actions\twindow_count\n")
        for (u, v) in sorted(g.edges):
            d = g.edges[(u, v)]
            fh.write(f"{u}\t{v}\t{_fmt(d.weight)}\t{d.co_actions}\t{d.window_count}\n")


def read_edges_tsv(path: str) -> LayerGraph:
    layer = None
    edges: dict = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read edge list {path}: {exc}") from exc
    with fh:
        header_seen = False
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith("# layer "):
                layer = line[len("# layer "):].strip()
                continue
            if line.startswith("#") or not line.strip():
                continue
            if not header_seen:
                header_seen = True  # column header row
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise DataError(f"{path}:{line_no}: expected 5 columns, got {len(parts)}")
            u, v, w, co, wc = parts
            edges[(u, v) if u <= v else (v, u)] = EdgeData(
                weight=float(w), co_actions=int(co), window_count=int(wc))
    if layer is None:
        raise DataError(f"{path}: missing '# layer' line")
    nodes = {u for key in edges for u in key}
    return LayerGraph(layer=layer, nodes=nodes, edges=edges)


def write_partition_tsv(path: str, p: Partition, version: str = "0",
                        cfg_hash: str = UNHASHED) -> None:
    with _open_out(path) as fh:
        fh.write(_meta_line(version, cfg_hash))
        fh.write(f"# scope {p.scope}\n")
        fh.write(f"# gamma {_fmt(float(p.gamma))}\n")
        fh.write("user_id\tcommunity_id\n")
        for user in sorted(p.assignment):
            fh.write(f"{user}\t{p.assignment[user]}\n")


def read_partition_tsv(path: str) -> Partition:
    scope = None
    gamma = 1.0
    assignment: dict = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read partition {path}: {exc}") from exc
    with fh:
        header_seen = False
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith("# scope "):
                scope = line[len("# scope "):].strip()
                continue
            if line.startswith("# gamma "):
                gamma = float(line[len("# gamma "):])
                continue
            if line.startswith("#") or not line.strip():
                continue
            if not header_seen:
                header_seen = True
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{line_no}: expected 2 columns, got {len(parts)}")
            assignment[parts[0]] = int(parts[1])
    if scope is None:
        raise DataError(f"{path}: missing '# scope' line")
    if not assignment:
        raise DataError(f"{path}: empty partition")
    return Partition(scope=scope, assignment=assignment, gamma=gamma)


def write_multiplex_partition_tsv(path: str, p: MultiplexPartition, version: str = "0",
                                  cfg_hash: str = UNHASHED) -> None:
    with _open_out(path) as fh:
        fh.write(_meta_line(version, cfg_hash))
        fh.write(f"# gamma {_fmt(float(p.gamma))}\n")
        fh.write(f"# omega {_fmt(float(p.omega))}\n")
        fh.write("user_id\tlayer\tcommunity_id\n")
        for (user, layer) in sorted(p.assignment):
            fh.write(f"{user}\t{layer}\t{p.assignment[(user, layer)]}\n")


def read_multiplex_partition_tsv(path: str) -> MultiplexPartition:
    gamma, omega = 1.0, 0.1
    assignment: dict = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read multiplex partition {path}: {exc}") from exc
    with fh:
        header_seen = False
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith("# gamma "):
                gamma = float(line[len("# gamma "):])
                continue
            if line.startswith("# omega "):
                omega = float(line[len("# omega "):])
                continue
            if line.startswith("#") or not line.strip():
                continue
            if not header_seen:
                header_seen = True
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{line_no}: expected 3 columns, got {len(parts)}")
            assignment[(parts[0], parts[1])] = int(parts[2])
    if not assignment:
        raise DataError(f"{path}: empty multiplex partition")
    return MultiplexPartition(assignment=assignment, gamma=gamma, omega=omega)


def write_overlap_tsv(path: str, O, version: str = "0", cfg_hash: str = UNHASHED) -> None:
    """Matrix with B communities as rows, A communities as columns."""
    with _open_out(path) as fh:
        fh.write(_meta_line(version, cfg_hash))
        fh.write("b_id\\a_id\t" + "\t".join(str(a) for a in O.a_ids) + "\n")
        for bi, b_id in enumerate(O.b_ids):
            row = "\t".join(_fmt(float(x)) for x in O.values[bi])
            fh.write(f"{b_id}\t{row}\n")


def write_records(path: str, records, version: str = "0",
                  cfg_hash: str = UNHASHED) -> None:
    """JSON-lines file; first record is the meta record."""
    with _open_out(path) as fh:
        fh.write(canonical_json({"record": "meta", "version": version,
                                 "config_sha256": cfg_hash}) + "\n")
        for rec in records:
            fh.write(canonical_json(rec) + "\n")


def read_records(path: str) -> list:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read records {path}: {exc}") from exc
    with fh:
        out = []
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{line_no}: bad JSON: {exc}") from exc
        return out


def write_ground_truth(path: str, truth, version: str = "0",
                       cfg_hash: str = UNHASHED) -> None:
    """`user_id  community_id`, planted users only, sorted."""
    with _open_out(path) as fh:
        fh.write(_meta_line(version, cfg_hash))
        fh.write("user_id\tcommunity_id\n")
        for user in sorted(truth.assignment):
            fh.write(f"{user}\t{truth.assignment[user]}\n")


def read_ground_truth(path: str) -> dict:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read ground truth {path}: {exc}") from exc
    with fh:
        assignment: dict = {}
        header_seen = False
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith("#") or not line.strip():
                continue
            if not header_seen:
                header_seen = True
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{line_no}: expected 2 columns, got {len(parts)}")
            assignment[parts[0]] = int(parts[1])
        return assignment


def write_events_tsv(path: str, log, version: str = "0",
                     cfg_hash: str = UNHASHED) -> None:
    """Standard 4-column event file: user, action, item, timestamp."""
    with _open_out(path) as fh:
        fh.write(_meta_line(version, cfg_hash))
        for e in log.events:
            fh.write(f"{e.user_id}\t{e.action}\t{e.item_id}\t{_fmt(e.timestamp)}\n")


def _n_components(g: LayerGraph) -> int:
    seen: set = set()
    adj = g.adjacency()
    count = 0
    for start in g.nodes:
        if start in seen:
            continue
        count += 1
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            for v in adj.get(u, {}):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
    return count


def layer_stats(g: LayerGraph) -> dict:
    """One summary record per layer graph."""
    return {
        "record": "layer_stats",
        "layer": g.layer,
        "n_nodes": g.n_nodes,
        "n_edges": g.n_edges,
        "total_weight": g.total_weight(),
        "n_components": _n_components(g),
    }


@dataclass(frozen=True)
class ReportContext:
    """Version + config hash stamped into every written file."""

    version: str
    cfg_hash: str

    def edges(self, path, g):
        write_edges_tsv(path, g, self.version, self.cfg_hash)

    def partition(self, path, p):
        write_partition_tsv(path, p, self.version, self.cfg_hash)

    def multiplex_partition(self, path, p):
        write_multiplex_partition_tsv(path, p, self.version, self.cfg_hash)

    def overlap(self, path, O):
        write_overlap_tsv(path, O, self.version, self.cfg_hash)

    def records(self, path, records):
        write_records(path, records, self.version, self.cfg_hash)

    def ground_truth(self, path, truth):
        write_ground_truth(path, truth, self.version, self.cfg_hash)

    def events(self, path, log):
        write_events_tsv(path, log, self.version, self.cfg_hash)
