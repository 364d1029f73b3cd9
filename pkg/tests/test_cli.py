import json
from fractions import Fraction

from click.testing import CliRunner

from kgpathrl.cli import main
from kgpathrl.evaluation import parse_metrics
from synth import star_rows


def write_rows(path, rows):
    path.write_text("".join(f"{h}\t{r}\t{t}\n" for h, r, t in rows), encoding="utf-8")


def run(*args, env=None):
    return CliRunner().invoke(main, [str(a) for a in args], env=env or {},
                              catch_exceptions=False)


def test_prepare_downsample_writes_variant_and_report(tmp_path):
    rows = [(f"h{r}_{i}", f"rel{r}", f"t{r}_{i}") for r in range(3) for i in range(40)]
    src = tmp_path / "train.tsv"
    write_rows(src, rows)
    out = tmp_path / "out"
    result = run("prepare", "--train", src, "--target-links", 30,
                 "--seed", 7, "--out", out)
    assert result.exit_code == 0
    variant = out / "train-30.tsv"
    assert variant.exists()
    assert len(variant.read_text().splitlines()) == 30
    assert "links=30" in (out / "report.txt").read_text()


def test_prepare_split_report_only(tmp_path):
    write_rows(tmp_path / "a.tsv", [("x", "r", "y")])
    write_rows(tmp_path / "b.tsv", [("p", "r", "q")])
    result = run("prepare", "--train", tmp_path / "a.tsv",
                 "--test", tmp_path / "b.tsv", "--out", tmp_path / "rep")
    assert result.exit_code == 0
    assert "shared_entities=0" in result.output


def test_prepare_invalid_tsv_fails_with_line_number(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("a\tr\tb\noops\n", encoding="utf-8")
    result = CliRunner().invoke(main, ["prepare", "--train", str(bad)])
    assert result.exit_code != 0
    assert ":2:" in result.output


def test_emit_g0_fixture(tmp_path, g0_files):
    graph, names = g0_files
    out = tmp_path / "instances.jsonl"
    result = run("emit", "--graph", graph, "--entity-text", names,
                 "--seed", 7, "--out", out)
    assert result.exit_code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 9
    labels = [json.loads(line)["label"] for line in lines]
    assert labels == [1, 0, 0, 1, 0, 0, 1, 0, 0]
    assert "instances=9" in result.output


def test_emit_combined_emits_fewer_lines_than_individual(tmp_path, g0_files):
    graph, names = g0_files
    a, b = tmp_path / "ind.jsonl", tmp_path / "comb.jsonl"
    run("emit", "--graph", graph, "--entity-text", names, "--seed", 7, "--out", a)
    run("emit", "--graph", graph, "--entity-text", names, "--seed", 7,
        "--scheme", "combined_paths", "--out", b)
    n_ind = len(a.read_text().splitlines())
    n_comb = len(b.read_text().splitlines())
    assert n_comb <= n_ind


def test_emit_paths_per_triple_flag(tmp_path, g0_files):
    graph, names = g0_files
    for n in (5, 10):
        out = tmp_path / f"n{n}.jsonl"
        result = run("emit", "--graph", graph, "--entity-text", names,
                     "--seed", 7, "--paths-per-triple", n, "--out", out)
        assert result.exit_code == 0


def test_mine_rules_command(tmp_path):
    rows = [
        ("FDR", "president_of", "USA"), ("DC", "capital_of", "USA"),
        ("FDR", "work_at", "DC"),
        ("Obama", "president_of", "USA2"), ("Paris2", "capital_of", "USA2"),
        ("Obama", "work_at", "Paris2"),
    ]
    src = tmp_path / "g.tsv"
    write_rows(src, rows)
    out = tmp_path / "rules.jsonl"
    result = run("mine-rules", "--graph", src, "--out", out)
    assert result.exit_code == 0
    mined = [json.loads(line) for line in out.read_text().splitlines()]
    assert {"body": [["president_of", "fwd"], ["capital_of", "bwd"]],
            "head": "work_at", "support": 2, "body_count": 2} in mined


def test_evaluate_constant_scorer_all_ties(tmp_path):
    write_rows(tmp_path / "ctx.tsv", star_rows(60))
    write_rows(tmp_path / "test.tsv",
               [(f"s{i:02d}", "related", f"s{i + 1:02d}") for i in range(10)])
    out = tmp_path / "results.jsonl"
    result = run("evaluate", "--graph", tmp_path / "ctx.tsv",
                 "--test", tmp_path / "test.tsv", "--scorer", "constant",
                 "--seed", 3, "--out", out)
    assert result.exit_code == 0
    metrics = parse_metrics(result.stdout.splitlines()[-1])
    assert metrics["hits@1"] == 0.0
    assert metrics["mrr"] == float(Fraction(1, 51))


def test_evaluate_metrics_parse_back_to_results_rationals(tmp_path):
    write_rows(tmp_path / "ctx.tsv", star_rows(30))
    write_rows(tmp_path / "test.tsv",
               [(f"s{i:02d}", "related", f"s{i + 3:02d}") for i in range(6)])
    out = tmp_path / "results.jsonl"
    result = run("evaluate", "--graph", tmp_path / "ctx.tsv",
                 "--test", tmp_path / "test.tsv", "--scorer", "random",
                 "--seed", 11, "--negatives-per-query", 20, "--out", out)
    assert result.exit_code == 0
    metrics = parse_metrics(result.stdout.splitlines()[-1])
    ranks = [json.loads(line)["rank"] for line in out.read_text().splitlines()]
    exact_mrr = sum((Fraction(1, r) for r in ranks), Fraction(0)) / len(ranks)
    exact_hits = Fraction(sum(1 for r in ranks if r == 1), len(ranks))
    assert metrics["mrr"] == float(exact_mrr)
    assert metrics["hits@1"] == float(exact_hits)
    assert metrics["n"] == len(ranks)


def test_evaluate_inductive_guard(tmp_path):
    write_rows(tmp_path / "train.tsv", [("s00", "linked_to", "hub")])
    write_rows(tmp_path / "ctx.tsv", star_rows(10))
    write_rows(tmp_path / "test.tsv", [("s01", "related", "s02")])
    result = CliRunner().invoke(main, [
        "evaluate", "--graph", str(tmp_path / "ctx.tsv"),
        "--test", str(tmp_path / "test.tsv"), "--scorer", "constant",
        "--inductive", "--train-graph", str(tmp_path / "train.tsv"),
    ])
    assert result.exit_code != 0
    assert "inductive check failed" in result.output


def test_evaluate_inductive_guard_passes_on_disjoint(tmp_path):
    write_rows(tmp_path / "train.tsv", [("other_a", "linked_to", "other_b")])
    write_rows(tmp_path / "ctx.tsv", star_rows(10))
    write_rows(tmp_path / "test.tsv", [("s01", "related", "s02")])
    result = run("evaluate", "--graph", tmp_path / "ctx.tsv",
                 "--test", tmp_path / "test.tsv", "--scorer", "constant",
                 "--inductive", "--train-graph", tmp_path / "train.tsv",
                 "--negatives-per-query", 5, "--seed", 1)
    assert result.exit_code == 0


def test_explain_fixture_narrative(tmp_path, g0_files):
    graph, names = g0_files
    write_rows(tmp_path / "q.tsv", [("FDR", "work_at", "DC")])
    result = run("explain", "--graph", graph, "--entity-text", names,
                 "--test", tmp_path / "q.tsv", "--scorer", "rules",
                 "--min-support", 1, "--seed", 2)
    assert result.exit_code == 0
    assert "president of" in result.output and "capital of" in result.output


def test_config_file_supplies_flags(tmp_path, g0_files):
    graph, names = g0_files
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"seed=7\nentity-text={names}\n", encoding="utf-8")
    out = tmp_path / "via_config.jsonl"
    result = run("--config", cfg, "emit", "--graph", graph, "--out", out)
    assert result.exit_code == 0
    direct = tmp_path / "direct.jsonl"
    run("emit", "--graph", graph, "--entity-text", names, "--seed", 7,
        "--out", direct)
    assert out.read_bytes() == direct.read_bytes()


def test_flag_beats_config(tmp_path, g0_files):
    graph, names = g0_files
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed=99\n", encoding="utf-8")
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    run("--config", cfg, "emit", "--graph", graph, "--entity-text", names,
        "--seed", 7, "--out", a)
    run("emit", "--graph", graph, "--entity-text", names, "--seed", 7, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_env_seed_fallback(tmp_path, g0_files):
    graph, names = g0_files
    a = tmp_path / "env.jsonl"
    b = tmp_path / "flag.jsonl"
    run("emit", "--graph", graph, "--entity-text", names, "--out", a,
        env={"KGPATHRL_SEED": "7"})
    run("emit", "--graph", graph, "--entity-text", names, "--seed", 7, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_missing_graph_is_clean_error(tmp_path):
    result = CliRunner().invoke(main, ["emit", "--graph", str(tmp_path / "nope.tsv"),
                                       "--out", str(tmp_path / "o.jsonl")])
    assert result.exit_code != 0
