"""Knowledge-graph link prediction via reasoning paths and pluggable scoring."""

from .errors import (
    ContractViolationError,
    EmptyGraphError,
    EvaluationError,
    InvalidQueryError,
    KgError,
    ParseError,
    ProtocolError,
    ScoringError,
    UnknownEntityError,
)
from .graph import (
    KnowledgeGraph,
    TextMap,
    Triple,
    contains,
    graph_from_triples,
    k_hop_neighbors,
    load_graph,
    load_text_map,
    save_graph,
    textualize,
)
from .paths import (
    PathQuery,
    PathStep,
    ReasoningPath,
    enumerate_paths,
    extract_pruned_subgraph,
    sample_paths,
)
from .sampling import LabeledExample, SamplingConfig, build_training_set, corrupt
from .linearize import (
    COMBINED_PATHS,
    EDGE_LIST,
    INDIVIDUAL_PATHS,
    SCHEMES,
    TRIPLE_ONLY,
    Instance,
    emit_instances,
    read_instances,
    render_context,
    render_question,
    write_instances,
)
from .scorers import (
    ConstantScorer,
    PathRule,
    RandomScorer,
    RemoteScorer,
    RuleScorer,
    constant_score,
    make_scorer,
    mine_rules,
    random_score,
    read_rules,
    remote_score_batch,
    rule_score,
    write_rules,
)
from .evaluation import (
    AggregationPolicy,
    Metrics,
    PhaseTimings,
    RankingResult,
    aggregate,
    evaluate,
    explain,
    format_metrics,
    parse_metrics,
    rank_candidates,
    read_results,
    write_results,
)
from .datasets import (
    SplitReport,
    sample_relation_subset,
    stratified_downsample,
    verify_split,
)

__version__ = "0.1.0"
