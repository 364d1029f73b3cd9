"""Candidate ranking, max-aggregation, Hits@1 / MRR metrics, explanations.

A query triple is scored by the maximum over its per-instance scores and
ranked against sampled negative candidates; ties are broken pessimistically
(every tying negative counts against the query), so reported numbers are
never inflated. Metric arithmetic is exact (fractions), which makes repeated
runs bit-identical.
"""

from __future__ import annotations

import json
import logging
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from ._rng import child_rng
from .errors import EvaluationError
from .graph import KnowledgeGraph, TextMap, Triple
from .linearize import (
    COMBINED_PATHS,
    EDGE_LIST,
    INDIVIDUAL_PATHS,
    SCHEMES,
    TRIPLE_ONLY,
    Instance,
    _path_from_json,
    _path_to_json,
    _pruned_edges,
    render_context,
    render_question,
)
from .paths import ReasoningPath, sample_paths
from .sampling import SamplingConfig, _paths_for_candidate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AggregationPolicy:
    """Max aggregation over instance scores; empty lists fall to
    empty_path_score, which must sit at or below the active scorer's floor."""

    empty_path_score: float = 0.0


def aggregate(instance_scores, policy: AggregationPolicy = AggregationPolicy()) -> float:
    if not instance_scores:
        return policy.empty_path_score
    return max(instance_scores)


@dataclass
class PhaseTimings:
    """Accumulated wall-clock seconds per pipeline phase."""

    path_extraction: float = 0.0
    scoring: float = 0.0
    aggregation: float = 0.0

    def summary(self) -> str:
        return (
            f"path_extraction={self.path_extraction:.3f}s "
            f"scoring={self.scoring:.3f}s aggregation={self.aggregation:.3f}s"
        )


@dataclass(frozen=True)
class RankingResult:
    query: Triple
    positive_score: float
    negatives: tuple[Triple, ...]
    negative_sides: tuple[str, ...]
    negative_scores: tuple[float, ...]
    rank: int
    reciprocal_rank: Fraction
    best_path: ReasoningPath | None
    best_path_score: float


@dataclass(frozen=True)
class Metrics:
    hits_at_1: Fraction
    mrr: Fraction
    n_queries: int


def format_metrics(m: Metrics) -> str:
    return f"hits@1={float(m.hits_at_1)!r} mrr={float(m.mrr)!r} n={m.n_queries}"


def parse_metrics(text: str) -> dict:
    out = {}
    for token in text.split():
        key, value = token.split("=", 1)
        out[key] = int(value) if key == "n" else float(value)
    return out


def _sample_negatives(g: KnowledgeGraph, query: Triple, n: int, rng: random.Random):
    """Distinct corrupted candidates absent from the graph, with the corrupted
    side recorded per negative. Falls back to an exhaustive sweep (and a
    warning) when the vocabulary cannot supply n candidates."""
    out: list[tuple[Triple, str]] = []
    taken: set[Triple] = {query}
    vocab = g.entities
    attempts, cap = 0, max(200, 20 * n)
    while len(out) < n and attempts < cap:
        attempts += 1
        side = "head" if rng.random() < 0.5 else "tail"
        repl = vocab[rng.randrange(len(vocab))]
        cand = (Triple(repl, query.relation, query.tail) if side == "head"
                else Triple(query.head, query.relation, repl))
        if cand.head == cand.tail or cand in taken or cand in g:
            continue
        taken.add(cand)
        out.append((cand, side))
    if len(out) < n:
        for repl in vocab:
            for side in ("head", "tail"):
                cand = (Triple(repl, query.relation, query.tail) if side == "head"
                        else Triple(query.head, query.relation, repl))
                if cand.head == cand.tail or cand in taken or cand in g:
                    continue
                taken.add(cand)
                out.append((cand, side))
                if len(out) == n:
                    return out
        log.warning("only %d of %d negatives available for %s", len(out), n, query)
    return out


def _candidate_paths(g: KnowledgeGraph, cand: Triple, hide: Triple, k: int,
                     dist_head, dist_tail, anchor: Triple):
    if not (g.has_entity(cand.head) and g.has_entity(cand.tail)):
        return []
    if cand.head == cand.tail:
        return []
    return _paths_for_candidate(g, cand, hide, k, dist_head, dist_tail, anchor)


def _candidate_instances(triple: Triple, cand_paths, scheme: str, tm: TextMap):
    question = render_question(triple, tm)
    if scheme == TRIPLE_ONLY:
        return [Instance(question, "", None, triple)]
    if not cand_paths:
        return []
    if scheme == INDIVIDUAL_PATHS:
        return [
            Instance(question, render_context(scheme, p, tm), None, triple,
                     path_ids=(i,), path=p)
            for i, p in enumerate(cand_paths)
        ]
    if scheme == COMBINED_PATHS:
        context = render_context(scheme, list(cand_paths), tm)
    elif scheme == EDGE_LIST:
        context = render_context(scheme, _pruned_edges(cand_paths), tm)
    else:
        raise ValueError(f"unknown linearization scheme: {scheme!r}")
    return [Instance(question, context, None, triple,
                     path_ids=tuple(range(len(cand_paths))))]


def rank_candidates(
    g_context: KnowledgeGraph,
    query: Triple,
    scorer,
    cfg: SamplingConfig,
    n_negatives: int = 50,
    rng: random.Random | None = None,
    scheme: str = INDIVIDUAL_PATHS,
    policy: AggregationPolicy = AggregationPolicy(),
    max_paths: int | None = None,
    timings: PhaseTimings | None = None,
) -> RankingResult:
    """Rank the query triple among sampled negative candidates.

    The query triple is hidden during path extraction for every candidate
    (it is the link being predicted, so no candidate may use it as context).
    Rank counts strictly better negatives plus all ties below the query.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown linearization scheme: {scheme!r}")
    if rng is None:
        rng = child_rng(cfg.seed, "rank", query.head, query.relation, query.tail)
    tm = g_context.text_map

    negatives = _sample_negatives(g_context, query, n_negatives, rng)

    t0 = time.perf_counter()
    dist_head = (g_context._bounded_distances(g_context._entity_id(query.head), cfg.k)
                 if g_context.has_entity(query.head) else {})
    dist_tail = (g_context._bounded_distances(g_context._entity_id(query.tail), cfg.k)
                 if g_context.has_entity(query.tail) else {})
    candidates = [query] + [cand for cand, _ in negatives]
    per_cand_paths = []
    for cand in candidates:
        cand_paths = _candidate_paths(g_context, cand, query, cfg.k,
                                      dist_head, dist_tail, query)
        if max_paths is not None and len(cand_paths) > max_paths:
            cand_paths = sample_paths(cand_paths, max_paths, rng)
        per_cand_paths.append(cand_paths)
    if timings is not None:
        timings.path_extraction += time.perf_counter() - t0

    per_cand_instances = [
        _candidate_instances(cand, cand_paths, scheme, tm)
        for cand, cand_paths in zip(candidates, per_cand_paths)
    ]
    flat = [inst for block in per_cand_instances for inst in block]
    t0 = time.perf_counter()
    flat_scores = scorer.score_batch(flat)
    if timings is not None:
        timings.scoring += time.perf_counter() - t0

    t0 = time.perf_counter()
    agg_scores = []
    offset = 0
    for block in per_cand_instances:
        agg_scores.append(aggregate(flat_scores[offset:offset + len(block)], policy))
        offset += len(block)
    positive_score, negative_scores = agg_scores[0], agg_scores[1:]

    greater = sum(1 for s in negative_scores if s > positive_score)
    ties = sum(1 for s in negative_scores if s == positive_score)
    rank = 1 + greater + ties

    pos_paths = per_cand_paths[0]
    best_path = None
    if pos_paths:
        if scheme == INDIVIDUAL_PATHS:
            pos_block = flat_scores[:len(per_cand_instances[0])]
            best_path = pos_paths[pos_block.index(max(pos_block))]
        else:
            best_path = pos_paths[0]
    if timings is not None:
        timings.aggregation += time.perf_counter() - t0

    return RankingResult(
        query=query,
        positive_score=positive_score,
        negatives=tuple(cand for cand, _ in negatives),
        negative_sides=tuple(side for _, side in negatives),
        negative_scores=tuple(negative_scores),
        rank=rank,
        reciprocal_rank=Fraction(1, rank),
        best_path=best_path,
        best_path_score=positive_score,
    )


def evaluate(
    g_context: KnowledgeGraph,
    test_triples,
    scorer,
    cfg: SamplingConfig,
    seed: int | None = None,
    n_negatives: int = 50,
    scheme: str = INDIVIDUAL_PATHS,
    policy: AggregationPolicy = AggregationPolicy(),
    max_paths: int | None = None,
    timings: PhaseTimings | None = None,
) -> tuple[Metrics, list[RankingResult]]:
    """Rank every test triple and reduce to Hits@1 / MRR (exact fractions)."""
    test_triples = list(test_triples)
    if not test_triples:
        raise EvaluationError("empty test set")
    for t in test_triples:
        if t in g_context:
            raise EvaluationError(f"test triple {t} is present in the context graph")
    if seed is None:
        seed = cfg.seed
    results = []
    for i, query in enumerate(test_triples):
        results.append(rank_candidates(
            g_context, query, scorer, cfg,
            n_negatives=n_negatives,
            rng=child_rng(seed, "eval", i),
            scheme=scheme,
            policy=policy,
            max_paths=max_paths,
            timings=timings,
        ))
    return metrics_from_ranks([r.rank for r in results]), results


def metrics_from_ranks(ranks) -> Metrics:
    """Exact Hits@1 / MRR reduction over per-query ranks."""
    ranks = list(ranks)
    if not ranks:
        raise EvaluationError("no ranks to reduce")
    n = len(ranks)
    hits = Fraction(sum(1 for r in ranks if r == 1), n)
    mrr = sum((Fraction(1, r) for r in ranks), Fraction(0)) / n
    return Metrics(hits_at_1=hits, mrr=mrr, n_queries=n)


def explain(result: RankingResult, tm: TextMap) -> str:
    """Human-readable narrative: query triple, best path, score."""

    def render(t: Triple) -> str:
        return f"({tm.entity(t.head)}, {tm.relation(t.relation)}, {tm.entity(t.tail)})"

    if result.best_path is None:
        return f"{render(result.query)}: no reasoning path (score floor applied)"
    chain = "; ".join(render(t) for t in result.best_path.triples())
    return f"{render(result.query)} ⇐ {chain} [{result.best_path_score:g}]"


# -- results serialization ------------------------------------------------


def result_to_json(r: RankingResult) -> str:
    obj = {
        "query": r.query.as_list(),
        "positive_score": r.positive_score,
        "rank": r.rank,
        "best_path": _path_to_json(r.best_path),
        "best_path_score": r.best_path_score,
        "negatives": [
            {"triple": t.as_list(), "side": side, "score": score}
            for t, side, score in zip(r.negatives, r.negative_sides, r.negative_scores)
        ],
    }
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def result_from_json(line: str) -> RankingResult:
    obj = json.loads(line)
    query = Triple(*obj["query"])
    rank = obj["rank"]
    return RankingResult(
        query=query,
        positive_score=obj["positive_score"],
        negatives=tuple(Triple(*n["triple"]) for n in obj["negatives"]),
        negative_sides=tuple(n["side"] for n in obj["negatives"]),
        negative_scores=tuple(n["score"] for n in obj["negatives"]),
        rank=rank,
        reciprocal_rank=Fraction(1, rank),
        best_path=_path_from_json(obj.get("best_path"), query.head, query.tail),
        best_path_score=obj["best_path_score"],
    )


def write_results(results, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(result_to_json(r) + "\n")


def read_results(path) -> list[RankingResult]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(result_from_json(line))
    return out
