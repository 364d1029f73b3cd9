import random

import pytest

from kgpathrl import (
    SamplingConfig,
    Triple,
    build_training_set,
    corrupt,
    graph_from_triples,
)
from kgpathrl._rng import child_rng
from oracles import oracle_paths
from synth import random_graph_rows


def test_config_validation():
    with pytest.raises(ValueError):
        SamplingConfig(m=0)
    with pytest.raises(ValueError):
        SamplingConfig(n=0)
    with pytest.raises(ValueError):
        SamplingConfig(k=0)


def test_corrupt_pool_only_exhausts_common_neighborhood(g0):
    # common 3-hop pool of FDR and DC is {USA}: one corruption per side
    cfg = SamplingConfig(m=10, vocab_fallback=False, seed=0)
    negs = corrupt(g0, Triple("FDR", "work_at", "DC"), cfg, random.Random(0))
    assert sorted(n.as_list() for n in negs) == [
        ["FDR", "work_at", "USA"],
        ["USA", "work_at", "DC"],
    ]


def test_corrupt_vocab_fallback_backfills(g0):
    cfg = SamplingConfig(m=10, vocab_fallback=True, seed=0)
    negs = corrupt(g0, Triple("FDR", "work_at", "DC"), cfg, random.Random(0))
    assert len(negs) > 2
    assert Triple("FDR", "work_at", "USA") in negs
    assert Triple("USA", "work_at", "DC") in negs


def test_corrupt_exhausted_pool_warns(caplog):
    g = graph_from_triples([("A", "r", "B")])
    cfg = SamplingConfig(m=5, vocab_fallback=False, seed=0)
    with caplog.at_level("WARNING"):
        negs = corrupt(g, Triple("A", "r", "B"), cfg, random.Random(0))
    assert negs == []
    assert any("no negative candidates" in rec.getMessage() for rec in caplog.records)


def test_corrupt_soundness_on_random_graphs():
    rng = random.Random(31)
    for trial in range(25):
        rows = random_graph_rows(rng, max_nodes=15, max_edges=40)
        g = graph_from_triples(rows)
        t = Triple(*rng.choice(rows))
        cfg = SamplingConfig(m=8, seed=trial)
        negs = corrupt(g, t, cfg, child_rng(trial, "c"))
        assert len(negs) == len(set(negs)) <= cfg.m
        for n in negs:
            assert n not in g and n != t
            assert n.head != n.tail
            # exactly one slot differs, never the relation
            assert n.relation == t.relation
            assert (n.head == t.head) != (n.tail == t.tail)


EXPECTED_G0_TRAINING = [
    # (label, triple, single path as step tuples)
    (1, ("FDR", "president_of", "USA"),
     (("FDR", "work_at", "DC", "fwd"), ("DC", "capital_of", "USA", "fwd"))),
    (0, ("FDR", "president_of", "DC"), (("FDR", "work_at", "DC", "fwd"),)),
    (0, ("DC", "president_of", "USA"), (("DC", "capital_of", "USA", "fwd"),)),
    (1, ("DC", "capital_of", "USA"),
     (("FDR", "work_at", "DC", "bwd"), ("FDR", "president_of", "USA", "fwd"))),
    (0, ("DC", "capital_of", "FDR"), (("FDR", "work_at", "DC", "bwd"),)),
    (0, ("FDR", "capital_of", "USA"), (("FDR", "president_of", "USA", "fwd"),)),
    (1, ("FDR", "work_at", "DC"),
     (("FDR", "president_of", "USA", "fwd"), ("DC", "capital_of", "USA", "bwd"))),
    (0, ("USA", "work_at", "DC"), (("DC", "capital_of", "USA", "bwd"),)),
    (0, ("FDR", "work_at", "USA"), (("FDR", "president_of", "USA", "fwd"),)),
]


def as_flat(example):
    return [
        (example.label, (example.triple.head, example.triple.relation, example.triple.tail),
         tuple((s.triple.head, s.triple.relation, s.triple.tail, s.direction)
               for s in p.steps))
        for p in example.paths
    ]


def test_g0_training_set_matches_exhaustive_derivation(g0):
    """Three triangle positives survive hiding; the two Germany edges have no
    alternative path and are skipped; every retained example carries exactly
    the one path the exhaustive oracle predicts."""
    examples = build_training_set(g0, SamplingConfig(seed=7))
    flat = [row for ex in examples for row in as_flat(ex)]
    assert sorted(flat) == sorted(EXPECTED_G0_TRAINING)
    # positives come in graph order, each directly followed by its negatives
    assert [ex.label for ex in examples] == [1, 0, 0, 1, 0, 0, 1, 0, 0]


def test_g0_negatives_agree_with_oracle_paths(g0):
    examples = build_training_set(g0, SamplingConfig(seed=7))
    rows = [(t.head, t.relation, t.tail) for t in g0.triples]
    pos = None
    for ex in examples:
        if ex.label == 1:
            pos = ex.triple
            continue
        expected = oracle_paths(rows, ex.triple.head, ex.triple.tail, 3,
                                hide=pos.as_list())
        got = {
            tuple((s.triple.head, s.triple.relation, s.triple.tail, s.direction)
                  for s in p.steps)
            for p in ex.paths
        }
        assert got == expected


def test_single_triple_graph_yields_empty_training_set():
    g = graph_from_triples([("A", "r", "B")])
    assert build_training_set(g, SamplingConfig(seed=1)) == []


def test_training_set_deterministic():
    rng = random.Random(77)
    rows = random_graph_rows(rng, max_nodes=12, max_edges=35)
    g = graph_from_triples(rows)
    cfg = SamplingConfig(seed=123)
    assert build_training_set(g, cfg) == build_training_set(g, cfg)


def test_training_set_invariants_on_random_graph():
    rng = random.Random(3)
    rows = random_graph_rows(rng, max_nodes=12, max_edges=40)
    g = graph_from_triples(rows)
    cfg = SamplingConfig(m=4, n=2, seed=9)
    examples = build_training_set(g, cfg)
    current_pos = None
    per_pos_negatives = 0
    for ex in examples:
        assert 1 <= len(ex.paths) <= cfg.n
        for p in ex.paths:
            assert ex.triple not in p.triples()
            assert p.source == ex.triple.head and p.target == ex.triple.tail
        if ex.label == 1:
            current_pos = ex.triple
            per_pos_negatives = 0
            assert ex.triple in g
        else:
            per_pos_negatives += 1
            assert per_pos_negatives <= cfg.m
            assert ex.triple not in g
            assert (ex.triple.head == current_pos.head) != (
                ex.triple.tail == current_pos.tail)
