"""Synthetic social-engineering worlds with a planted threat rule.

Worlds reproduce the inventory shape of the real data (entity and edge
counts) and label every attacker/victim pair with a path rule: an
attacker threatens a victim when one of its methods both exploits a
vulnerability the victim has and travels over a medium the victim is
exposed through.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from fractions import Fraction

import numpy as np

from .kg import (
    EntityRegistry,
    LabeledPair,
    RelationGraph,
    dump_labels,
    dump_triples,
    summarize_world,
)

ID_PREFIX = {
    "attacker": "atk",
    "victim": "vic",
    "attack_method": "mtd",
    "human_vulnerability": "vul",
    "attack_medium": "med",
    "effect_mechanism": "mch",
}


@dataclass(frozen=True)
class WorldConfig:
    """Shape and sampling knobs for one synthetic world.

    ``vulnerability_skew`` is the Zipf exponent of vulnerability popularity,
    shared by the exploits and has_vulnerability samplers. ``medium_skew``
    does the same for mediums in uses_medium and exposed_via. A victim is
    exposed through the most popular medium with probability
    ``exposure_density``, and through the others proportionally less often.
    """

    attackers: int = 15
    victims: int = 15
    methods: int = 33
    vulnerabilities: int = 43
    mediums: int = 12
    mechanisms: int = 33
    performs: int = 25
    has_vulnerability: int = 88
    exploits: int = 97
    uses_medium: int = 29
    exposure_density: float = 0.8
    mechanism_fanout: int = 1
    vulnerability_skew: float = 2.0
    medium_skew: float = 2.0
    noise_rate: float = 0.05
    seed: int = 0

    def entity_counts(self) -> dict[str, int]:
        return {
            "attacker": self.attackers,
            "victim": self.victims,
            "attack_method": self.methods,
            "human_vulnerability": self.vulnerabilities,
            "attack_medium": self.mediums,
            "effect_mechanism": self.mechanisms,
        }

    def edge_targets(self) -> dict[str, int]:
        return {
            "performs": self.performs,
            "has_vulnerability": self.has_vulnerability,
            "exploits": self.exploits,
            "uses_medium": self.uses_medium,
        }

    def validate(self) -> None:
        counts = self.entity_counts()
        for kind, n in counts.items():
            if n < 1:
                raise ValueError(f"{kind} count must be positive, got {n}")
        spans = {
            "performs": self.attackers * self.methods,
            "has_vulnerability": self.victims * self.vulnerabilities,
            "exploits": self.methods * self.vulnerabilities,
            "uses_medium": self.methods * self.mediums,
        }
        for rel, target in self.edge_targets().items():
            if not 0 <= target <= spans[rel]:
                raise ValueError(f"{rel}: {target} edges infeasible (at most {spans[rel]})")
        if not 0.0 <= self.exposure_density <= 1.0:
            raise ValueError("exposure_density must lie in [0, 1]")
        if not 0 <= self.mechanism_fanout <= self.mechanisms:
            raise ValueError("mechanism_fanout must lie in [0, mechanisms]")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ValueError("noise_rate must lie in [0, 1]")
        if self.vulnerability_skew < 0 or self.medium_skew < 0:
            raise ValueError("popularity skews must be non-negative")


@dataclass(frozen=True)
class ThreatRule:
    """threat(a, v) iff some method m of a exploits a vulnerability of v
    and uses a medium v is exposed through."""

    form: str = (
        "exists m, u, d: performs(a,m) & exploits(m,u) & has_vulnerability(v,u)"
        " & uses_medium(m,d) & exposed_via(v,d)"
    )

    def holds(self, attacker: str, victim: str, graph: RelationGraph) -> bool:
        vulns = graph.image("has_vulnerability", victim)
        mediums = graph.image("exposed_via", victim)
        for m in graph.image("performs", attacker):
            if graph.image("exploits", m) & vulns and graph.image("uses_medium", m) & mediums:
                return True
        return False


def entity_ids(kind: str, n: int) -> list[str]:
    width = max(2, len(str(n - 1)))
    return [f"{ID_PREFIX[kind]}_{i:0{width}d}" for i in range(n)]


def _sample_edges(subjects, objects, count, rng, weights=None):
    """Draw ``count`` distinct (subject, object) pairs.

    The first min(count, |subjects|) edges give distinct subjects one edge
    each; the rest are drawn without replacement from the remaining pairs,
    with object probability proportional to ``weights``.
    """
    n_s, n_o = len(subjects), len(objects)
    w = np.ones(n_o) if weights is None else np.asarray(weights, dtype=float)
    chosen = np.zeros((n_s, n_o), dtype=bool)
    cover = rng.permutation(n_s)[: min(count, n_s)]
    for s in cover:
        chosen[s, rng.choice(n_o, p=w / w.sum())] = True
    rest = count - len(cover)
    if rest > 0:
        free = np.flatnonzero(~chosen.ravel())
        p = np.tile(w, n_s)[free]
        picks = rng.choice(free, size=rest, replace=False, p=p / p.sum())
        chosen.ravel()[picks] = True
    return {(subjects[i], objects[j]) for i, j in zip(*np.nonzero(chosen))}


def _zipf_weights(n, exponent, rng):
    """Popularity 1 / rank^exponent over a random ranking of n entities."""
    ranks = rng.permutation(n)
    return 1.0 / (ranks + 1.0) ** exponent


def generate_world(config: WorldConfig) -> tuple[EntityRegistry, RelationGraph]:
    config.validate()
    ids = {kind: entity_ids(kind, n) for kind, n in config.entity_counts().items()}
    registry = EntityRegistry(ids)
    rng = np.random.default_rng(config.seed)

    popularity = _zipf_weights(config.vulnerabilities, config.vulnerability_skew, rng)
    medium_pop = _zipf_weights(config.mediums, config.medium_skew, rng)

    atk, vic = ids["attacker"], ids["victim"]
    mtd, vul = ids["attack_method"], ids["human_vulnerability"]
    med, mch = ids["attack_medium"], ids["effect_mechanism"]
    edges = {
        "performs": _sample_edges(atk, mtd, config.performs, rng),
        "has_vulnerability": _sample_edges(vic, vul, config.has_vulnerability, rng, popularity),
        "exploits": _sample_edges(mtd, vul, config.exploits, rng, popularity),
        "uses_medium": _sample_edges(mtd, med, config.uses_medium, rng, medium_pop),
    }
    exposure = config.exposure_density * medium_pop / medium_pop.max()
    exposed = set()
    for v in vic:
        mask = rng.random(len(med)) < exposure
        if config.exposure_density > 0 and not mask.any():
            mask[rng.choice(len(med), p=medium_pop / medium_pop.sum())] = True
        exposed.update((v, med[j]) for j in np.flatnonzero(mask))
    edges["exposed_via"] = exposed
    effected = set()
    for u in vul:
        for j in rng.choice(len(mch), size=config.mechanism_fanout, replace=False):
            effected.add((u, mch[j]))
    edges["effected_by"] = effected
    graph = RelationGraph({rel: frozenset(es) for rel, es in edges.items()})
    graph.validate(registry)
    return registry, graph


def rule_labels(registry, graph, rule: ThreatRule | None = None) -> list[LabeledPair]:
    """Noiseless labels over the full attacker x victim product."""
    rule = rule or ThreatRule()
    return [
        LabeledPair(a, v, int(rule.holds(a, v, graph)))
        for a in registry.ids("attacker")
        for v in registry.ids("victim")
    ]


def plant_labels(registry, graph, rule: ThreatRule | None = None, noise_rate: float = 0.05,
                 seed: int = 0) -> list[LabeledPair]:
    """Rule labels with each one flipped independently with ``noise_rate``."""
    if not 0.0 <= noise_rate <= 1.0:
        raise ValueError("noise_rate must lie in [0, 1]")
    clean = rule_labels(registry, graph, rule)
    flips = np.random.default_rng(seed).random(len(clean)) < noise_rate
    return [p._replace(label=p.label ^ int(f)) for p, f in zip(clean, flips)]


def positive_share(pairs) -> Fraction:
    pairs = list(pairs)
    if not pairs:
        return Fraction(0)
    return Fraction(sum(p.label for p in pairs), len(pairs))


class CalibrationError(RuntimeError):
    def __init__(self, message, closest_share, closest_config):
        super().__init__(message)
        self.closest_share = closest_share
        self.closest_config = closest_config


def calibrate_positive_share(config: WorldConfig, target: float, tolerance: float = 0.02,
                             max_attempts: int = 200) -> WorldConfig:
    """Search seeds, then exposure density, for a noiseless share near ``target``.

    Seeds are tried first at the configured density. Every ``seeds_per_step``
    misses, the density is nudged toward the target in proportion to the
    gap left by the closest world so far.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target share must lie strictly between 0 and 1")
    seeds_per_step = 10
    best = (float("inf"), None, None)
    cfg = config
    for attempt in range(max_attempts):
        registry, graph = generate_world(cfg)
        share = float(positive_share(rule_labels(registry, graph)))
        gap = share - target
        if abs(gap) <= tolerance:
            return cfg
        if abs(gap) < best[0]:
            best = (abs(gap), share, cfg)
        if (attempt + 1) % seeds_per_step == 0:
            closest = best[2]
            step = -(best[1] - target) * 0.5
            density = min(1.0, max(0.01, closest.exposure_density + step))
            cfg = replace(closest, exposure_density=round(density, 6), seed=config.seed + attempt + 1)
        else:
            cfg = replace(cfg, seed=config.seed + attempt + 1)
    raise CalibrationError(
        f"no world within {tolerance} of share {target} after {max_attempts} attempts; "
        f"closest share {best[1]:.4f}",
        best[1], best[2],
    )


@dataclass(frozen=True)
class World:
    config: WorldConfig
    registry: EntityRegistry
    graph: RelationGraph
    labels: list[LabeledPair]
    rule: ThreatRule

    @property
    def clean_share(self) -> Fraction:
        return positive_share(rule_labels(self.registry, self.graph, self.rule))

    def meta(self) -> dict:
        summary = summarize_world(self.registry, self.graph, self.labels)
        return {
            "config": asdict(self.config),
            "seed": self.config.seed,
            "counts": summary.to_dict(),
            "positive_share": summary.positive_share_str(),
            "noiseless_positive_share": f"{float(self.clean_share):.3f}",
            "rule": self.rule.form,
        }

    def files(self) -> dict[str, str]:
        return {
            "triples.tsv": dump_triples(self.registry, self.graph),
            "labels.tsv": dump_labels(self.labels),
            "world_meta.json": json.dumps(self.meta(), indent=2, sort_keys=True) + "\n",
        }


def make_world(config: WorldConfig = WorldConfig(), rule: ThreatRule | None = None) -> World:
    """Generate a world and plant noisy labels; label noise uses a seed derived from the world seed."""
    rule = rule or ThreatRule()
    registry, graph = generate_world(config)
    label_seed = int(np.random.SeedSequence([config.seed, 1]).generate_state(1)[0])
    labels = plant_labels(registry, graph, rule, config.noise_rate, label_seed)
    return World(config, registry, graph, labels, rule)
