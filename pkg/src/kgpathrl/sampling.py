"""Negative triple generation and labeled training-set assembly.

Negatives corrupt exactly one slot (head or tail, never the relation) of a
true triple with an entity drawn from the common k-hop neighborhood of the
triple's endpoints, falling back to the full vocabulary when that pool runs
dry. Training keeps only path-bearing examples; the source positive is
hidden from path extraction for itself and for its negatives, simulating
prediction of a genuinely missing link.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from ._rng import child_rng
from .graph import KnowledgeGraph, Triple
from .paths import (
    PathQuery,
    ReasoningPath,
    _materialize,
    _search,
    enumerate_paths,
    path_sort_key,
    sample_paths,
)

log = logging.getLogger(__name__)


@dataclass
class SamplingConfig:
    """Knobs for training-set generation.

    m: negatives per positive; n: max paths kept per example; k: max path
    length; neighborhood_k: hop bound for the corruption pool (independent of
    k, same default); vocab_fallback: draw from the whole vocabulary once the
    common-neighbor pool is exhausted.
    """

    m: int = 10
    n: int = 3
    k: int = 3
    neighborhood_k: int = 3
    seed: int = 0
    vocab_fallback: bool = True

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.k < 1 or self.neighborhood_k < 1:
            raise ValueError("m, n, k, neighborhood_k must all be >= 1")


@dataclass(frozen=True)
class LabeledExample:
    """A (triple, label, paths) record; paths is never empty."""

    triple: Triple
    label: int
    paths: tuple[ReasoningPath, ...]

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if not self.paths:
            raise ValueError("LabeledExample requires at least one path")


def _candidate_lists(g, t, replacements, taken):
    """Valid head-corrupted and tail-corrupted candidates from a replacement pool."""
    head_cands, tail_cands = [], []
    for e in replacements:
        if e != t.head and e != t.tail:
            cand = Triple(e, t.relation, t.tail)
            if cand not in g and cand not in taken:
                head_cands.append(cand)
            cand = Triple(t.head, t.relation, e)
            if cand not in g and cand not in taken:
                tail_cands.append(cand)
    return head_cands, tail_cands


def corrupt(g: KnowledgeGraph, t: Triple, cfg: SamplingConfig, rng: random.Random) -> list[Triple]:
    """Up to cfg.m distinct negatives for ``t``, none of them in the graph.

    Replacement entities come from the common neighborhood_k-hop neighbors of
    the triple's endpoints; head-vs-tail corruption is a uniform coin per
    sample. With cfg.vocab_fallback the whole vocabulary backfills a short
    pool. May return fewer than m; an empty result is logged.
    """
    pool = sorted(
        g.k_hop_neighbors(t.head, cfg.neighborhood_k)
        & g.k_hop_neighbors(t.tail, cfg.neighborhood_k)
    )
    out: list[Triple] = []
    taken: set[Triple] = {t}
    stages = [pool]
    if cfg.vocab_fallback:
        stages.append(list(g.entities))
    for replacements in stages:
        if len(out) >= cfg.m:
            break
        head_cands, tail_cands = _candidate_lists(g, t, replacements, taken)
        while len(out) < cfg.m and (head_cands or tail_cands):
            pick_head = rng.random() < 0.5
            cands = head_cands if pick_head else tail_cands
            if not cands:
                cands = tail_cands if pick_head else head_cands
            cand = cands.pop(rng.randrange(len(cands)))
            # the same candidate can sit in the other side's list on rare
            # symmetric graphs; taken guards double emission across stages
            if cand in taken:
                continue
            taken.add(cand)
            out.append(cand)
    if not out:
        log.warning("no negative candidates available for %s", t)
    return out


def _paths_for_candidate(g, cand, hide, k, dist_head, dist_tail, anchor):
    """Paths for a candidate sharing one endpoint with the anchor triple.

    Reuses the anchor's BFS distance maps: candidates sharing the anchor's
    tail search from their head pruned by dist_tail; candidates sharing the
    head search from their tail pruned by dist_head and reverse the result.
    """
    hidden = g._triple_key(hide) if hide is not None else None
    if cand.tail == anchor.tail:
        src, dst = g._entity_id(cand.head), g._entity_id(cand.tail)
        recs = _search(g, src, dst, k, hidden, dist_tail)
        return _materialize(g, recs, cand.head, cand.tail)
    src, dst = g._entity_id(cand.tail), g._entity_id(cand.head)
    recs = _search(g, src, dst, k, hidden, dist_head)
    reversed_paths = [p.reverse() for p in _materialize(g, recs, cand.tail, cand.head)]
    return sorted(reversed_paths, key=path_sort_key)


def build_training_set(g: KnowledgeGraph, cfg: SamplingConfig) -> list[LabeledExample]:
    """One positive per path-bearing graph triple plus its path-bearing negatives.

    For each positive p the triple itself is hidden while extracting paths,
    both for p and for p's negatives; path-less candidates are dropped.
    Fully deterministic from (graph, cfg.seed): each positive gets its own
    random stream derived from (seed, triple index).
    """
    examples: list[LabeledExample] = []
    for i, pos in enumerate(g.triples):
        rng = child_rng(cfg.seed, "train", i)
        dist_head = g._bounded_distances(g._entity_id(pos.head), cfg.k)
        dist_tail = g._bounded_distances(g._entity_id(pos.tail), cfg.k)
        pos_paths = _paths_for_candidate(g, pos, pos, cfg.k, dist_head, dist_tail, pos)
        if not pos_paths:
            continue
        examples.append(LabeledExample(pos, 1, tuple(sample_paths(pos_paths, cfg.n, rng))))
        for neg in corrupt(g, pos, cfg, rng):
            if neg.head == pos.head or neg.tail == pos.tail:
                neg_paths = _paths_for_candidate(g, neg, pos, cfg.k, dist_head, dist_tail, pos)
            else:  # unreachable for single-slot corruption; kept for safety
                neg_paths = enumerate_paths(g, PathQuery(neg.head, neg.tail, cfg.k, hide=pos))
            if neg_paths:
                examples.append(LabeledExample(neg, 0, tuple(sample_paths(neg_paths, cfg.n, rng))))
    return examples
