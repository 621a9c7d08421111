"""One-hot threat features and their fused combinations.

Five segments are defined over an (attacker, victim) pair:

========  =======================================  ====================
segment   meaning                                  target kind
========  =======================================  ====================
fv1       methods the attacker performs            attack_method
fv2       the victim's human vulnerabilities       human_vulnerability
fv3       vulnerabilities the attacker's methods   human_vulnerability
          exploit (union over performed methods)
fv4       mediums the victim is exposed through    attack_medium
fv5       effect mechanisms behind the victim's    effect_mechanism
          vulnerabilities
========  =======================================  ====================
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .kg import EntityRegistry, KGError, LabeledPair, RelationGraph


@dataclass(frozen=True)
class Segment:
    name: str
    side: str  # "attacker" or "victim": which pair member the segment describes
    path: tuple[str, ...]  # relations composed from the subject to the target
    target: str
    width: int


# name -> (side, relation path, target kind)
SEGMENTS = {
    "fv1": ("attacker", ("performs",), "attack_method"),
    "fv2": ("victim", ("has_vulnerability",), "human_vulnerability"),
    "fv3": ("attacker", ("performs", "exploits"), "human_vulnerability"),
    "fv4": ("victim", ("exposed_via",), "attack_medium"),
    "fv5": ("victim", ("has_vulnerability", "effected_by"), "effect_mechanism"),
}

COMBINATIONS = {
    1: ("fv1", "fv2"),
    2: ("fv1", "fv3", "fv2"),
    3: ("fv1", "fv3", "fv2", "fv4"),
    4: ("fv1", "fv3", "fv2", "fv4", "fv5"),
}


@dataclass(frozen=True)
class FeatureLayout:
    combination: int
    segments: tuple[Segment, ...]
    registry_hash: str
    columns: tuple[str, ...]

    @property
    def width(self) -> int:
        return sum(s.width for s in self.segments)

    def segment_slice(self, name: str) -> slice:
        start = 0
        for seg in self.segments:
            if seg.name == name:
                return slice(start, start + seg.width)
            start += seg.width
        raise KeyError(name)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.combination).encode())
        h.update(self.registry_hash.encode())
        for col in self.columns:
            h.update(b"\x00" + col.encode())
        return h.hexdigest()

    def to_dict(self) -> dict:
        return {
            "combination": self.combination,
            "segments": [
                {"name": s.name, "relations": list(s.path), "target": s.target, "width": s.width}
                for s in self.segments
            ],
            "width": self.width,
            "registry_hash": self.registry_hash,
            "layout_hash": self.fingerprint(),
        }


def make_layout(combination: int, registry: EntityRegistry) -> FeatureLayout:
    if combination not in COMBINATIONS:
        raise ValueError(f"unknown feature combination {combination!r}; expected one of 1-4")
    segments = []
    columns: list[str] = []
    for name in COMBINATIONS[combination]:
        side, path, target = SEGMENTS[name]
        segments.append(Segment(name, side, path, target, registry.count(target)))
        columns.extend(f"{name}.{ident}" for ident in registry.ids(target))
    return FeatureLayout(combination, tuple(segments), registry.fingerprint(), tuple(columns))


def encode_onehot(
    subject: str, edges: Iterable[tuple[str, str]], target: str, registry: EntityRegistry
) -> np.ndarray:
    """Set bit j iff (subject, entity j of ``target``) is in ``edges``."""
    if subject not in registry:
        raise KGError(f"unknown entity {subject!r}")
    vec = np.zeros(registry.count(target), dtype=np.uint8)
    for s, o in edges:
        if s == subject:
            vec[registry.index(o, target)] = 1
    return vec


def _reach(subject: str, path: Sequence[str], graph: RelationGraph) -> set[str]:
    frontier = {subject}
    for rel in path:
        frontier = {o for s in frontier for o in graph.image(rel, s)}
    return frontier


def _encode_path(
    subject: str, kind: str, path: Sequence[str], target: str,
    graph: RelationGraph, registry: EntityRegistry,
) -> np.ndarray:
    registry.index(subject, kind)
    vec = np.zeros(registry.count(target), dtype=np.uint8)
    for ident in _reach(subject, path, graph):
        vec[registry.index(ident, target)] = 1
    return vec


def encode_fv3(attacker: str, graph: RelationGraph, registry: EntityRegistry) -> np.ndarray:
    """Vulnerabilities exploitable by any method the attacker performs."""
    return _encode_path(attacker, "attacker", ("performs", "exploits"),
                        "human_vulnerability", graph, registry)


def encode_fv5(victim: str, graph: RelationGraph, registry: EntityRegistry) -> np.ndarray:
    """Effect mechanisms reached through the victim's vulnerabilities."""
    return _encode_path(victim, "victim", ("has_vulnerability", "effected_by"),
                        "effect_mechanism", graph, registry)


def encode_segment(
    segment: Segment, pair: LabeledPair, graph: RelationGraph, registry: EntityRegistry
) -> np.ndarray:
    subject = pair.attacker if segment.side == "attacker" else pair.victim
    return _encode_path(subject, segment.side, segment.path, segment.target, graph, registry)


def pair_id(attacker: str, victim: str) -> str:
    return f"{attacker}|{victim}"


@dataclass(frozen=True)
class FeatureMatrix:
    layout: FeatureLayout
    X: np.ndarray  # (n, width) uint8
    y: np.ndarray  # (n,) int64
    pair_ids: tuple[str, ...]

    def __post_init__(self):
        n = len(self.pair_ids)
        if self.X.shape != (n, self.layout.width) or self.y.shape != (n,):
            raise ValueError(
                f"shape mismatch: X {self.X.shape}, y {self.y.shape}, "
                f"{n} pairs, layout width {self.layout.width}"
            )

    def __len__(self) -> int:
        return len(self.pair_ids)

    @property
    def width(self) -> int:
        return self.layout.width

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.layout.fingerprint().encode())
        h.update(np.ascontiguousarray(self.X, dtype=np.uint8).tobytes())
        h.update(np.ascontiguousarray(self.y, dtype=np.int64).tobytes())
        for pid in self.pair_ids:
            h.update(b"\x00" + pid.encode())
        return h.hexdigest()


def assemble_dataset(
    pairs: Sequence[LabeledPair], combination: int,
    graph: RelationGraph, registry: EntityRegistry,
) -> FeatureMatrix:
    """Build the fused binary matrix for one feature combination.

    Segment vectors depend only on one side of the pair, so they are
    computed once per attacker / victim and reused across rows.
    """
    layout = make_layout(combination, registry)
    X = np.zeros((len(pairs), layout.width), dtype=np.uint8)
    cache: dict[tuple[str, str], np.ndarray] = {}
    for i, pair in enumerate(pairs):
        pieces = []
        for seg in layout.segments:
            subject = pair.attacker if seg.side == "attacker" else pair.victim
            key = (seg.name, subject)
            if key not in cache:
                cache[key] = encode_segment(seg, pair, graph, registry)
            pieces.append(cache[key])
        if pieces:
            X[i] = np.concatenate(pieces)
    y = np.array([p.label for p in pairs], dtype=np.int64)
    ids = tuple(pair_id(p.attacker, p.victim) for p in pairs)
    return FeatureMatrix(layout, X, y, ids)


def dataset_to_csv(matrix: FeatureMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["pair_id", *matrix.layout.columns, "label"])
    for pid, row, label in zip(matrix.pair_ids, matrix.X, matrix.y):
        writer.writerow([pid, *(int(v) for v in row), int(label)])
    return buf.getvalue()


def layout_to_json(layout: FeatureLayout) -> str:
    doc = layout.to_dict()
    doc["columns"] = list(layout.columns)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _layout_from_json(doc: dict) -> FeatureLayout:
    segments = tuple(
        Segment(s["name"], SEGMENTS[s["name"]][0], tuple(s["relations"]), s["target"], s["width"])
        for s in doc["segments"]
    )
    return FeatureLayout(doc["combination"], segments, doc["registry_hash"], tuple(doc["columns"]))


def dataset_from_csv(csv_text: str, layout_json: str) -> FeatureMatrix:
    layout = _layout_from_json(json.loads(layout_json))
    rows = list(csv.reader(io.StringIO(csv_text)))
    if not rows:
        raise ValueError("dataset CSV is empty (missing header)")
    header = rows[0]
    expected = ["pair_id", *layout.columns, "label"]
    if header != expected:
        raise ValueError("dataset CSV header does not match its layout file")
    body = rows[1:]
    X = np.zeros((len(body), layout.width), dtype=np.uint8)
    y = np.zeros(len(body), dtype=np.int64)
    ids = []
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise ValueError(f"dataset CSV row {i + 2}: expected {len(header)} cells, got {len(row)}")
        cells = row[1:]
        if any(c not in ("0", "1") for c in cells):
            raise ValueError(f"dataset CSV row {i + 2}: non-binary cell")
        ids.append(row[0])
        X[i] = [int(c) for c in cells[:-1]]
        y[i] = int(cells[-1])
    return FeatureMatrix(layout, X, y, tuple(ids))
