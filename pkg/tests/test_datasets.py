import random
from collections import Counter

import pytest

from kgpathrl import (
    graph_from_triples,
    sample_relation_subset,
    stratified_downsample,
    verify_split,
)
from synth import wn_v1_like


def uniform_graph(n_relations=4, per_relation=100):
    rows = [
        (f"a{r}_{i}", f"rel{r}", f"b{r}_{i}")
        for r in range(n_relations)
        for i in range(per_relation)
    ]
    return graph_from_triples(rows)


def test_downsample_uniform_proportions():
    g = uniform_graph()
    small = stratified_downsample(g, 40, seed=3)
    assert Counter(t.relation for t in small.triples) == {
        "rel0": 10, "rel1": 10, "rel2": 10, "rel3": 10,
    }


def test_downsample_identity_at_full_size():
    g = uniform_graph()
    same = stratified_downsample(g, len(g), seed=1)
    assert set(same.triples) == set(g.triples)


def test_downsample_is_subset_and_deterministic():
    g = uniform_graph(3, 50)
    a = stratified_downsample(g, 31, seed=9)
    b = stratified_downsample(g, 31, seed=9)
    assert a.triples == b.triples
    assert set(a.triples) <= set(g.triples)


def test_downsample_target_below_relation_count_rejected():
    g = uniform_graph(4, 10)
    with pytest.raises(ValueError):
        stratified_downsample(g, 3, seed=0)


def test_downsample_per_relation_deviation_within_one():
    rng = random.Random(6)
    counts = [rng.randint(5, 400) for _ in range(7)]
    rows = [
        (f"h{r}_{i}", f"rel{r}", f"t{r}_{i}")
        for r, c in enumerate(counts)
        for i in range(c)
    ]
    g = graph_from_triples(rows)
    target = 150
    small = stratified_downsample(g, target, seed=2)
    kept = Counter(t.relation for t in small.triples)
    total = len(g)
    for r, c in enumerate(counts):
        share = c * target / total
        assert abs(kept[f"rel{r}"] - share) <= 1
        assert kept[f"rel{r}"] >= 1
    assert abs(len(small) - target) <= len(counts) / 2


def test_relation_subset_identity():
    g = uniform_graph()
    assert set(sample_relation_subset(g, 4, seed=0).triples) == set(g.triples)


def test_relation_subset_exact_membership():
    g = uniform_graph()
    sub = sample_relation_subset(g, 2, seed=5)
    chosen = set(sub.relations)
    assert len(chosen) == 2
    expected = {t for t in g.triples if t.relation in chosen}
    assert set(sub.triples) == expected


def test_relation_subset_zero_rejected():
    with pytest.raises(ValueError):
        sample_relation_subset(uniform_graph(), 0, seed=0)


def test_relation_subset_weighting_monte_carlo():
    rows = [(f"h{i}", "heavy", f"t{i}") for i in range(90)]
    rows += [(f"x{i}", "light", f"y{i}") for i in range(10)]
    g = graph_from_triples(rows)
    draws = 10_000
    heavy = sum(
        1 for s in range(draws)
        if "heavy" in sample_relation_subset(g, 1, seed=s).relations
    )
    assert abs(heavy / draws - 0.9) < 0.02


def test_verify_split_disjoint_table2_shaped_pair(tmp_path):
    train_rows, test_rows = wn_v1_like()
    report = verify_split(graph_from_triples(train_rows),
                          graph_from_triples(test_rows))
    assert report.shared_entities == 0
    assert report.uncovered_test_relations == frozenset()
    assert len(report.train_relations) == 9
    assert len(report.test_relations) == 8


def test_verify_split_identity():
    g = uniform_graph(2, 5)
    report = verify_split(g, g)
    assert report.shared_entities == len(g.entities)
    assert report.uncovered_test_relations == frozenset()


def test_verify_split_reports_uncovered_relation():
    train = graph_from_triples([("a", "r1", "b")])
    test = graph_from_triples([("c", "r2", "d")])
    report = verify_split(train, test)
    assert report.shared_entities == 0
    assert report.uncovered_test_relations == frozenset({"r2"})
