"""Dataset variant construction: few-shot downsampling, relation subsets,
and inductive split verification."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ._rng import child_rng
from .graph import KnowledgeGraph, Triple


@dataclass(frozen=True)
class SplitReport:
    train_entities: int
    test_entities: int
    shared_entities: int
    train_relations: frozenset[str]
    test_relations: frozenset[str]
    uncovered_test_relations: frozenset[str]

    def lines(self) -> list[str]:
        return [
            f"train_entities={self.train_entities}",
            f"test_entities={self.test_entities}",
            f"shared_entities={self.shared_entities}",
            f"train_relations={len(self.train_relations)}",
            f"test_relations={len(self.test_relations)}",
            "uncovered_test_relations=" + ",".join(sorted(self.uncovered_test_relations)),
        ]


def stratified_downsample(g: KnowledgeGraph, target_links: int, seed: int) -> KnowledgeGraph:
    """Downsample keeping each relation's share of triples (largest-remainder
    apportionment, minimum one triple per relation).

    The kept total can drift from target_links by up to half the relation
    count once the per-relation minimum kicks in. Deterministic given seed.
    """
    total = len(g)
    if not (1 <= target_links <= total):
        raise ValueError(f"target_links must be in [1, {total}], got {target_links}")
    by_relation: dict[str, list[Triple]] = {r: [] for r in g.relations}
    for t in g.triples:
        by_relation[t.relation].append(t)
    if target_links < len(g.relations):
        raise ValueError(
            f"target_links={target_links} below relation count {len(g.relations)}; "
            "cannot keep every relation"
        )

    quotas: dict[str, int] = {}
    remainders: list[tuple[float, str]] = []
    for rel in g.relations:
        share = len(by_relation[rel]) * target_links / total
        quotas[rel] = math.floor(share)
        remainders.append((share - math.floor(share), rel))
    shortfall = target_links - sum(quotas.values())
    # hand the leftover units to the largest remainders (vocab order on ties)
    remainders.sort(key=lambda pair: (-pair[0], g.relations.index(pair[1])))
    for _, rel in remainders[:shortfall]:
        quotas[rel] += 1
    for rel in g.relations:
        quotas[rel] = min(len(by_relation[rel]), max(1, quotas[rel]))

    rng = child_rng(seed, "downsample")
    kept: set[Triple] = set()
    for rel in g.relations:
        group = by_relation[rel]
        quota = quotas[rel]
        kept.update(group if quota >= len(group) else rng.sample(group, quota))
    return KnowledgeGraph(
        (t for t in g.triples if t in kept), text_map=g.text_map
    )


def sample_relation_subset(g: KnowledgeGraph, n_relations: int, seed: int) -> KnowledgeGraph:
    """Keep all triples of n_relations relations drawn without replacement,
    selection probability proportional to each relation's triple count.

    Draws are sequential with renormalization, so a seed pins the exact
    output across runs.
    """
    if n_relations < 1:
        raise ValueError(f"n_relations must be >= 1, got {n_relations}")
    if n_relations > len(g.relations):
        raise ValueError(
            f"n_relations={n_relations} exceeds relation count {len(g.relations)}"
        )
    counts = {r: 0 for r in g.relations}
    for t in g.triples:
        counts[t.relation] += 1
    remaining = list(g.relations)
    rng = child_rng(seed, "relation-subset")
    chosen: set[str] = set()
    for _ in range(n_relations):
        total = sum(counts[r] for r in remaining)
        pick = rng.random() * total
        acc = 0.0
        selected = remaining[-1]
        for r in remaining:
            acc += counts[r]
            if pick < acc:
                selected = r
                break
        chosen.add(selected)
        remaining.remove(selected)
    return KnowledgeGraph(
        (t for t in g.triples if t.relation in chosen), text_map=g.text_map
    )


def verify_split(train: KnowledgeGraph, test: KnowledgeGraph) -> SplitReport:
    """Exact entity/relation overlap bookkeeping between two graphs."""
    train_entities = set(train.entities)
    test_entities = set(test.entities)
    train_relations = frozenset(train.relations)
    test_relations = frozenset(test.relations)
    return SplitReport(
        train_entities=len(train_entities),
        test_entities=len(test_entities),
        shared_entities=len(train_entities & test_entities),
        train_relations=train_relations,
        test_relations=test_relations,
        uncovered_test_relations=test_relations - train_relations,
    )
