"""Command-line surface for the full pipeline.

Every command is a batch operation, deterministic given --seed. A config
file of key=value lines can supply any flag; the KGPATHRL_SEED environment
variable is the seed fallback of last resort (flag > config > env > 0).
Timings go to stderr so stdout and output files stay byte-reproducible.
"""

from __future__ import annotations

import os
from pathlib import Path

import click

from .datasets import sample_relation_subset, stratified_downsample, verify_split
from .errors import KgError
from .evaluation import (
    PhaseTimings,
    evaluate,
    explain,
    format_metrics,
    rank_candidates,
    write_results,
)
from .graph import load_graph, save_graph, Triple
from .linearize import INDIVIDUAL_PATHS, SCHEMES, emit_instances, write_instances
from .sampling import SamplingConfig, build_training_set
from .scorers import make_scorer, mine_rules, read_rules, write_rules

_COMMANDS = ("prepare", "emit", "mine-rules", "evaluate", "explain")


def _load_config(path: str) -> dict:
    flat = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise click.ClickException(f"{path}:{line_no}: expected key=value")
            key, value = line.split("=", 1)
            flat[key.strip().replace("-", "_")] = value.strip()
    return flat


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="key=value file supplying defaults for any flag.")
@click.pass_context
def main(ctx, config):
    """Knowledge-graph link prediction toolkit."""
    if config:
        flat = _load_config(config)
        ctx.default_map = {name: flat for name in _COMMANDS}


def _resolve_seed(seed):
    if seed is not None:
        return int(seed)
    env = os.environ.get("KGPATHRL_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise click.ClickException(f"KGPATHRL_SEED must be an integer, got {env!r}")
    return 0


def _graph(path, entity_text=None, relation_text=None):
    try:
        return load_graph(path, entity_text=entity_text, relation_text=relation_text)
    except KgError as exc:
        raise click.ClickException(str(exc))


def _read_test_triples(path):
    g = _graph(path)
    return list(g.triples)


seed_option = click.option("--seed", type=int, default=None,
                           help="random seed (falls back to KGPATHRL_SEED, then 0).")
text_options = (
    click.option("--entity-text", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="optional id<TAB>display-text file for entities."),
    click.option("--relation-text", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="optional id<TAB>display-text file for relations."),
)


def _with(options, fn):
    for opt in options:
        fn = opt(fn)
    return fn


@main.command()
@click.option("--train", "train_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--test", "test_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".")
@click.option("--target-links", type=int, default=None,
              help="stratified downsample size (per-relation shares preserved).")
@click.option("--relations", "n_relations", type=int, default=None,
              help="keep this many relations, drawn weighted by triple count.")
@seed_option
def prepare(train_path, test_path, out_dir, target_links, n_relations, seed):
    """Build dataset variants and report split statistics."""
    seed = _resolve_seed(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    variant = _graph(train_path)
    try:
        if n_relations is not None:
            variant = sample_relation_subset(variant, n_relations, seed)
            dest = out / f"train-rel{n_relations}.tsv"
            save_graph(variant, dest)
            click.echo(f"wrote {dest} links={len(variant)}")
        if target_links is not None:
            variant = stratified_downsample(variant, target_links, seed)
            dest = out / f"train-{target_links}.tsv"
            save_graph(variant, dest)
            click.echo(f"wrote {dest} links={len(variant)}")
    except ValueError as exc:
        raise click.ClickException(str(exc))
    if test_path is not None:
        report = verify_split(variant, _graph(test_path))
        lines = report.lines()
    else:
        lines = [
            f"entities={len(variant.entities)}",
            f"relations={len(variant.relations)}",
            f"links={len(variant)}",
        ]
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for line in lines:
        click.echo(line)


@main.command()
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--scheme", type=click.Choice(SCHEMES), default=INDIVIDUAL_PATHS)
@click.option("--k", type=int, default=3, help="max reasoning-path length.")
@click.option("--paths-per-triple", type=int, default=3,
              help="max paths sampled per example.")
@click.option("--negatives", type=int, default=10, help="negatives per positive.")
@click.option("--neighborhood-k", type=int, default=3,
              help="hop bound for the corruption pool.")
@click.option("--no-vocab-fallback", is_flag=True, default=False,
              help="never backfill negatives from the full vocabulary.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@seed_option
def emit(graph_path, scheme, k, paths_per_triple, negatives, neighborhood_k,
         no_vocab_fallback, out_path, seed, entity_text, relation_text):
    """Generate the labeled training instances JSONL."""
    seed = _resolve_seed(seed)
    g = _graph(graph_path, entity_text, relation_text)
    try:
        cfg = SamplingConfig(
            m=negatives, n=paths_per_triple, k=k, neighborhood_k=neighborhood_k,
            seed=seed, vocab_fallback=not no_vocab_fallback,
        )
        examples = build_training_set(g, cfg)
        instances = emit_instances(examples, scheme, g.text_map)
    except (KgError, ValueError) as exc:
        raise click.ClickException(str(exc))
    write_instances(instances, out_path)
    positives = sum(1 for ex in examples if ex.label == 1)
    click.echo(
        f"instances={len(instances)} examples={len(examples)} "
        f"positives={positives} negatives={len(examples) - positives}"
    )


emit = _with(text_options, emit)


@main.command(name="mine-rules")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, default=3, help="max rule body length.")
@click.option("--min-support", type=int, default=2)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def mine_rules_cmd(graph_path, k, min_support, out_path):
    """Mine path rules from a graph and write them as JSONL."""
    g = _graph(graph_path)
    try:
        rules = mine_rules(g, k, min_support)
    except (KgError, ValueError) as exc:
        raise click.ClickException(str(exc))
    write_rules(rules, out_path)
    click.echo(f"rules={len(rules)}")


def _build_scorer(scorer_spec, rules_path, g, k, min_support, seed):
    rules = read_rules(rules_path) if rules_path else None
    try:
        return make_scorer(scorer_spec, graph=g, rules=rules,
                           k=k, min_support=min_support, seed=seed)
    except ValueError as exc:
        raise click.ClickException(str(exc))


@main.command(name="evaluate")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="context graph used for path extraction.")
@click.option("--test", "test_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="test triples TSV; must be disjoint from the context graph.")
@click.option("--scorer", "scorer_spec", default="rules",
              help="rules | constant | random | remote:<url>")
@click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="pre-mined rules JSONL (else rules are mined "
              "from the context graph).")
@click.option("--negatives-per-query", type=int, default=50)
@click.option("--k", type=int, default=3)
@click.option("--min-support", type=int, default=2)
@click.option("--scheme", type=click.Choice(SCHEMES), default=INDIVIDUAL_PATHS)
@click.option("--max-paths", type=int, default=None,
              help="cap on paths per candidate at inference (default: all).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="write per-query ranking results JSONL here.")
@click.option("--inductive", is_flag=True, default=False,
              help="require the context graph to share no entity with --train-graph.")
@click.option("--train-graph", "train_graph_path",
              type=click.Path(exists=True, dir_okay=False), default=None)
@seed_option
def evaluate_cmd(graph_path, test_path, scorer_spec, rules_path, negatives_per_query,
                 k, min_support, scheme, max_paths, out_path, inductive,
                 train_graph_path, seed, entity_text, relation_text):
    """Rank test triples among sampled negatives and print Hits@1 / MRR."""
    seed = _resolve_seed(seed)
    g = _graph(graph_path, entity_text, relation_text)
    if inductive:
        if train_graph_path is None:
            raise click.ClickException("--inductive requires --train-graph")
        report = verify_split(_graph(train_graph_path), g)
        if report.shared_entities:
            raise click.ClickException(
                f"inductive check failed: {report.shared_entities} entities shared "
                "between train graph and context graph"
            )
    test_triples = _read_test_triples(test_path)
    scorer = _build_scorer(scorer_spec, rules_path, g, k, min_support, seed)
    timings = PhaseTimings()
    try:
        metrics, results = evaluate(
            g, test_triples, scorer,
            SamplingConfig(k=k, seed=seed),
            seed=seed,
            n_negatives=negatives_per_query,
            scheme=scheme,
            max_paths=max_paths,
            timings=timings,
        )
    except KgError as exc:
        raise click.ClickException(str(exc))
    if out_path:
        write_results(results, out_path)
    click.echo(format_metrics(metrics))
    click.echo(f"# timing {timings.summary()}", err=True)


evaluate_cmd = _with(text_options, evaluate_cmd)


@main.command(name="explain")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--test", "test_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--scorer", "scorer_spec", default="rules")
@click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--k", type=int, default=3)
@click.option("--min-support", type=int, default=2)
@click.option("--scheme", type=click.Choice(SCHEMES), default=INDIVIDUAL_PATHS)
@click.option("--limit", type=int, default=None, help="explain only the first N queries.")
@seed_option
def explain_cmd(graph_path, test_path, scorer_spec, rules_path, k, min_support,
                scheme, limit, seed, entity_text, relation_text):
    """Print the top-scoring reasoning path narrative for each test triple."""
    seed = _resolve_seed(seed)
    g = _graph(graph_path, entity_text, relation_text)
    test_triples = _read_test_triples(test_path)
    if limit is not None:
        test_triples = test_triples[:limit]
    scorer = _build_scorer(scorer_spec, rules_path, g, k, min_support, seed)
    try:
        for query in test_triples:
            result = rank_candidates(
                g, query, scorer, SamplingConfig(k=k, seed=seed),
                n_negatives=0, scheme=scheme,
            )
            click.echo(explain(result, g.text_map))
    except KgError as exc:
        raise click.ClickException(str(exc))


explain_cmd = _with(text_options, explain_cmd)


if __name__ == "__main__":
    main()
