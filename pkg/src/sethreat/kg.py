"""Knowledge-graph ingest: triple TSV and label TSV parsing.

The triple file declares entity kinds with ``is_a`` lines and relates
entities with six typed predicates.  Labels live in a separate file of
``attacker<TAB>victim<TAB>label`` rows.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

KINDS = (
    "attacker",
    "victim",
    "attack_method",
    "human_vulnerability",
    "attack_medium",
    "effect_mechanism",
)

# predicate -> (subject kind, object kind)
RELATIONS = {
    "performs": ("attacker", "attack_method"),
    "has_vulnerability": ("victim", "human_vulnerability"),
    "exploits": ("attack_method", "human_vulnerability"),
    "uses_medium": ("attack_method", "attack_medium"),
    "exposed_via": ("victim", "attack_medium"),
    "effected_by": ("human_vulnerability", "effect_mechanism"),
}


class KGError(ValueError):
    """Raised for malformed or inconsistent graph / label input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EntityRegistry:
    """Ordered per-kind entity catalogs.

    Indices within a kind follow lexicographic order of the identifier,
    which fixes the one-hot column positions downstream.
    """

    def __init__(self, entities: dict[str, Iterable[str]] | None = None):
        entities = entities or {}
        unknown = set(entities) - set(KINDS)
        if unknown:
            raise KGError(f"unknown entity kind(s): {sorted(unknown)}")
        self._entities: dict[str, tuple[str, ...]] = {}
        self._index: dict[str, tuple[str, int]] = {}
        for kind in KINDS:
            ids = tuple(sorted(set(entities.get(kind, ()))))
            self._entities[kind] = ids
            for i, ident in enumerate(ids):
                if ident in self._index:
                    other = self._index[ident][0]
                    raise KGError(f"{ident!r} declared as both {other} and {kind}")
                self._index[ident] = (kind, i)

    def ids(self, kind: str) -> tuple[str, ...]:
        return self._entities[kind]

    def count(self, kind: str) -> int:
        return len(self._entities[kind])

    def counts(self) -> dict[str, int]:
        return {kind: len(ids) for kind, ids in self._entities.items()}

    def lookup(self, ident: str) -> tuple[str, int]:
        try:
            return self._index[ident]
        except KeyError:
            raise KGError(f"unknown entity {ident!r}") from None

    def kind_of(self, ident: str) -> str | None:
        entry = self._index.get(ident)
        return entry[0] if entry else None

    def index(self, ident: str, kind: str) -> int:
        found, idx = self.lookup(ident)
        if found != kind:
            raise KGError(f"{ident!r} is a {found}, expected {kind}")
        return idx

    def __contains__(self, ident: object) -> bool:
        return ident in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EntityRegistry):
            return NotImplemented
        return self._entities == other._entities

    def __repr__(self) -> str:
        sizes = ", ".join(f"{k}={len(v)}" for k, v in self._entities.items())
        return f"EntityRegistry({sizes})"

    def fingerprint(self) -> str:
        """SHA-256 over the kind-ordered identifier lists."""
        h = hashlib.sha256()
        for kind in KINDS:
            h.update(kind.encode())
            for ident in self._entities[kind]:
                h.update(b"\x00" + ident.encode())
            h.update(b"\x01")
        return h.hexdigest()


@dataclass(frozen=True)
class RelationGraph:
    """Six typed edge sets over registry entities."""

    edges: dict[str, frozenset[tuple[str, str]]] = field(
        default_factory=lambda: {rel: frozenset() for rel in RELATIONS}
    )

    def __post_init__(self):
        full = {rel: frozenset(self.edges.get(rel, ())) for rel in RELATIONS}
        object.__setattr__(self, "edges", full)
        object.__setattr__(self, "_adjacency", {})

    def __getitem__(self, relation: str) -> frozenset[tuple[str, str]]:
        return self.edges[relation]

    def image(self, relation: str, subject: str) -> frozenset[str]:
        """Objects related to ``subject`` through ``relation``."""
        adj = self._adjacency.get(relation)
        if adj is None:
            adj = {}
            for s, o in self.edges[relation]:
                adj.setdefault(s, set()).add(o)
            adj = {s: frozenset(os) for s, os in adj.items()}
            self._adjacency[relation] = adj
        return adj.get(subject, frozenset())

    def sizes(self) -> dict[str, int]:
        return {rel: len(es) for rel, es in self.edges.items()}

    def validate(self, registry: EntityRegistry) -> None:
        for rel, (skind, okind) in RELATIONS.items():
            for s, o in sorted(self.edges[rel]):
                for ident, kind in ((s, skind), (o, okind)):
                    found = registry.kind_of(ident)
                    if found is None:
                        raise KGError(f"{rel} edge ({s}, {o}): undeclared entity {ident!r}")
                    if found != kind:
                        raise KGError(
                            f"{rel} edge ({s}, {o}): {ident!r} is a {found}, expected {kind}"
                        )


class LabeledPair(NamedTuple):
    attacker: str
    victim: str
    label: int


def _lines(text: str | Iterable[str]) -> Iterable[tuple[int, str]]:
    if isinstance(text, str):
        text = text.splitlines()
    for lineno, raw in enumerate(text, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        yield lineno, line


def parse_triples(text: str | Iterable[str]) -> tuple[EntityRegistry, RelationGraph]:
    """Parse a triple TSV into a registry and a validated relation graph.

    Kind declarations may appear anywhere; endpoint validation runs once
    the whole stream has been read.
    """
    declared: dict[str, str] = {}
    declared_at: dict[str, int] = {}
    edges: dict[str, set[tuple[str, str]]] = {rel: set() for rel in RELATIONS}
    edge_lines: list[tuple[int, str, str, str]] = []

    for lineno, line in _lines(text):
        cols = line.split("\t")
        if len(cols) != 3:
            raise KGError(f"expected 3 tab-separated columns, got {len(cols)}", lineno)
        subj, pred, obj = (c.strip() for c in cols)
        if not subj or not obj:
            raise KGError("empty subject or object", lineno)
        if pred == "is_a":
            if obj not in KINDS:
                raise KGError(f"unknown entity kind {obj!r}", lineno)
            prev = declared.get(subj)
            if prev is not None and prev != obj:
                raise KGError(
                    f"{subj!r} declared {obj} but already {prev} (line {declared_at[subj]})",
                    lineno,
                )
            declared[subj] = obj
            declared_at.setdefault(subj, lineno)
        elif pred in RELATIONS:
            if (subj, obj) in edges[pred]:
                raise KGError(f"duplicate edge {subj} {pred} {obj}", lineno)
            edges[pred].add((subj, obj))
            edge_lines.append((lineno, subj, pred, obj))
        else:
            raise KGError(f"unknown predicate {pred!r}", lineno)

    by_kind: dict[str, list[str]] = {kind: [] for kind in KINDS}
    for ident, kind in declared.items():
        by_kind[kind].append(ident)
    registry = EntityRegistry(by_kind)

    for lineno, subj, pred, obj in edge_lines:
        skind, okind = RELATIONS[pred]
        for ident, kind in ((subj, skind), (obj, okind)):
            found = declared.get(ident)
            if found is None:
                raise KGError(f"undeclared entity {ident!r} in {pred} edge", lineno)
            if found != kind:
                raise KGError(f"{ident!r} is a {found}, but {pred} needs a {kind}", lineno)

    return registry, RelationGraph({rel: frozenset(es) for rel, es in edges.items()})


def dump_triples(registry: EntityRegistry, graph: RelationGraph) -> str:
    """Serialize to the triple TSV format; output is canonical (sorted)."""
    out = []
    for kind in KINDS:
        out.extend(f"{ident}\tis_a\t{kind}" for ident in registry.ids(kind))
    for rel in RELATIONS:
        out.extend(f"{s}\t{rel}\t{o}" for s, o in sorted(graph[rel]))
    return "".join(line + "\n" for line in out)


def parse_labels(text: str | Iterable[str], registry: EntityRegistry) -> list[LabeledPair]:
    pairs: list[LabeledPair] = []
    seen: dict[tuple[str, str], int] = {}
    for lineno, line in _lines(text):
        cols = [c.strip() for c in line.split("\t")]
        if len(cols) != 3:
            raise KGError(f"expected 3 tab-separated columns, got {len(cols)}", lineno)
        attacker, victim, raw = cols
        if raw not in ("0", "1"):
            raise KGError(f"label must be 0 or 1, got {raw!r}", lineno)
        for ident, kind in ((attacker, "attacker"), (victim, "victim")):
            found = registry.kind_of(ident)
            if found != kind:
                what = "unknown entity" if found is None else f"a {found}, not an"
                raise KGError(f"{ident!r} is {what} {kind}", lineno)
        key = (attacker, victim)
        if key in seen:
            raise KGError(f"duplicate pair {attacker}/{victim} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        pairs.append(LabeledPair(attacker, victim, int(raw)))
    return pairs


def dump_labels(pairs: Iterable[LabeledPair]) -> str:
    return "".join(f"{p.attacker}\t{p.victim}\t{p.label}\n" for p in pairs)


@dataclass(frozen=True)
class WorldSummary:
    entities: dict[str, int]
    edges: dict[str, int]
    n_labels: int
    n_positive: int
    n_negative: int

    @property
    def positive_share(self) -> Fraction:
        if self.n_labels == 0:
            return Fraction(0)
        return Fraction(self.n_positive, self.n_labels)

    def positive_share_str(self) -> str:
        return f"{float(self.positive_share):.3f}"

    def table_rows(self) -> list[tuple[str, int]]:
        """The ten inventory rows in attacker..uses_medium order."""
        rows = [(kind, self.entities[kind]) for kind in KINDS]
        for rel in ("performs", "has_vulnerability", "exploits", "uses_medium"):
            rows.append((rel, self.edges[rel]))
        return rows

    def to_dict(self) -> dict:
        return {
            "entities": dict(self.entities),
            "edges": dict(self.edges),
            "labels": {
                "total": self.n_labels,
                "positive": self.n_positive,
                "negative": self.n_negative,
                "positive_share": self.positive_share_str(),
            },
        }


def summarize_world(
    registry: EntityRegistry, graph: RelationGraph, labels: Iterable[LabeledPair] = ()
) -> WorldSummary:
    labels = list(labels)
    pos = sum(1 for p in labels if p.label == 1)
    return WorldSummary(
        entities=registry.counts(),
        edges=graph.sizes(),
        n_labels=len(labels),
        n_positive=pos,
        n_negative=len(labels) - pos,
    )
