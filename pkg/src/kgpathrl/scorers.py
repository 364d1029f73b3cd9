"""Pluggable instance scorers.

Every scorer follows one contract: ``score_batch(instances)`` returns one
probability per instance, same order, each in [0, 1]. Scorers are sklearn
estimators (``get_params``/``set_params``/``clone`` work), and the rule
scorer is fitted on a knowledge graph the usual way: ``RuleScorer().fit(g)``.

The rule scorer mines entity-free path rules (a (relation, direction)
sequence implying a target relation) and scores an instance by the matching
rule's confidence, which makes it applicable to graphs whose entities were
never seen at mining time. The remote scorer forwards batches to a scoring
service over HTTP.
"""

from __future__ import annotations

import json
import logging
import random
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_score_vector
from .errors import ContractViolationError, InvalidQueryError, ProtocolError, ScoringError
from .graph import KnowledgeGraph, Triple
from .linearize import Instance
from .paths import PathQuery, _materialize, _search, enumerate_paths

log = logging.getLogger(__name__)

DEFAULT_SCORE_FLOOR = 0.01


@dataclass(frozen=True)
class PathRule:
    """Entity-free rule: body (relation, direction) sequence implies head_relation.

    support counts distinct (h, t) pairs carrying both a body path and the
    head triple; body_count counts distinct pairs carrying a body path at
    all. confidence = support / body_count.
    """

    body: tuple[tuple[str, str], ...]
    head_relation: str
    support: int
    body_count: int

    def __post_init__(self):
        if not (0 < self.support <= self.body_count):
            raise ValueError(
                f"need 0 < support <= body_count, got {self.support}/{self.body_count}"
            )

    @property
    def confidence(self) -> float:
        return self.support / self.body_count


def mine_rules(g: KnowledgeGraph, k: int, min_support: int = 2) -> list[PathRule]:
    """Mine all path rules of body length <= k grounded in the graph.

    For each triple (h, r, t) every alternative path h -> t (the triple itself
    hidden) grounds body -> r. Body counts likewise skip groundings that
    would need the pair's own head edge. Rules under min_support are dropped;
    output order is deterministic.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    support_pairs: dict[tuple, set] = defaultdict(set)
    hidden_bodies: dict[Triple, frozenset] = {}
    for t in g.triples:
        if t.head == t.tail:
            continue
        paths = enumerate_paths(g, PathQuery(t.head, t.tail, k, hide=t))
        bodies = frozenset(p.relation_signature() for p in paths)
        hidden_bodies[t] = bodies
        for body in bodies:
            support_pairs[(body, t.relation)].add((t.head, t.tail))

    heads_by_body: dict[tuple, set[str]] = defaultdict(set)
    for body, head_rel in support_pairs:
        heads_by_body[body].add(head_rel)

    extra: dict[tuple, int] = defaultdict(int)
    if heads_by_body:
        for tail_ent in g.entities:
            dst = g._entity_id(tail_ent)
            dist = g._bounded_distances(dst, k)
            for src in dist:
                if src == dst:
                    continue
                head_ent = g.entities[src]
                recs = _search(g, src, dst, k, None, dist)
                if not recs:
                    continue
                bodies_all = {
                    p.relation_signature()
                    for p in _materialize(g, recs, head_ent, tail_ent)
                }
                for body in bodies_all:
                    for head_rel in heads_by_body.get(body, ()):
                        head_triple = Triple(head_ent, head_rel, tail_ent)
                        if head_triple in g:
                            continue  # counted (or rejected) by the hidden pass
                        extra[(body, head_rel)] += 1

    rules = []
    for (body, head_rel), pairs in support_pairs.items():
        support = len(pairs)
        if support < min_support:
            continue
        rules.append(PathRule(
            body=body,
            head_relation=head_rel,
            support=support,
            body_count=support + extra[(body, head_rel)],
        ))
    rules.sort(key=lambda r: (r.head_relation, len(r.body), r.body))
    return rules


def _rule_index(rules) -> dict[tuple, float]:
    return {(r.body, r.head_relation): r.confidence for r in rules}


def rule_score(rules, inst: Instance, floor: float = DEFAULT_SCORE_FLOOR) -> float:
    """Confidence of the rule matching the instance's path, clamped to
    [floor, 1 - floor]; floor when no rule matches."""
    if inst.path is None:
        raise ContractViolationError("instance carries no path metadata")
    index = rules if isinstance(rules, dict) else _rule_index(rules)
    conf = index.get((inst.path.relation_signature(), inst.triple.relation))
    if conf is None:
        return floor
    return min(max(conf, floor), 1.0 - floor)


# -- rule serialization -------------------------------------------------


def rule_to_json(rule: PathRule) -> str:
    obj = {
        "body": [[rel, direction] for rel, direction in rule.body],
        "head": rule.head_relation,
        "support": rule.support,
        "body_count": rule.body_count,
    }
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def rule_from_json(line: str) -> PathRule:
    obj = json.loads(line)
    return PathRule(
        body=tuple((rel, direction) for rel, direction in obj["body"]),
        head_relation=obj["head"],
        support=obj["support"],
        body_count=obj["body_count"],
    )


def write_rules(rules, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in rules:
            fh.write(rule_to_json(r) + "\n")


def read_rules(path) -> list[PathRule]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(rule_from_json(line))
    return out


# -- estimators ----------------------------------------------------------


class BaseScorer(BaseEstimator):
    """Shared scorer surface; subclasses implement score_batch."""

    score_floor = 0.0

    def fit(self, X=None, y=None):
        return self

    def score_batch(self, instances) -> list[float]:
        raise NotImplementedError


class ConstantScorer(BaseScorer):
    """Scores every instance with the same value (0.5 by default)."""

    def __init__(self, value: float = 0.5):
        self.value = value

    @property
    def score_floor(self):
        return self.value

    def score_batch(self, instances) -> list[float]:
        return [self.value] * len(instances)


def constant_score(instances, value: float = 0.5) -> list[float]:
    return [value] * len(instances)


class RandomScorer(BaseScorer):
    """Seeded uniform [0, 1) scores; identical inputs yield identical vectors."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def score_batch(self, instances) -> list[float]:
        return random_score(instances, random.Random(self.seed))


def random_score(instances, rng: random.Random) -> list[float]:
    return [rng.random() for _ in instances]


class RuleScorer(BaseScorer):
    """Path-rule scorer: fit() mines rules from a graph, score_batch() looks
    each instance's path signature up and returns the clamped confidence."""

    def __init__(self, max_path_len: int = 3, min_support: int = 2,
                 floor: float = DEFAULT_SCORE_FLOOR):
        self.max_path_len = max_path_len
        self.min_support = min_support
        self.floor = floor

    @property
    def score_floor(self):
        return self.floor

    def fit(self, graph: KnowledgeGraph, y=None):
        self.rules_ = mine_rules(graph, self.max_path_len, self.min_support)
        self.rule_index_ = _rule_index(self.rules_)
        return self

    @classmethod
    def from_rules(cls, rules, floor: float = DEFAULT_SCORE_FLOOR,
                   max_path_len: int = 3, min_support: int = 2) -> "RuleScorer":
        scorer = cls(max_path_len=max_path_len, min_support=min_support, floor=floor)
        scorer.rules_ = list(rules)
        scorer.rule_index_ = _rule_index(scorer.rules_)
        return scorer

    def score_batch(self, instances) -> list[float]:
        check_is_fitted(self, "rule_index_")
        return [rule_score(self.rule_index_, inst, self.floor) for inst in instances]


def remote_score_batch(
    endpoint: str,
    instances,
    batch_size: int = 32,
    max_retries: int = 3,
    backoff: float = 0.5,
    max_in_flight: int = 4,
    timeout: float = 30.0,
    transport=None,
) -> list[float]:
    """Score instances through a remote service speaking the wire protocol.

    Requests are chunked into batches of ``batch_size`` and may run up to
    ``max_in_flight`` chunks in parallel; results come back in input order.
    Each chunk is retried up to ``max_retries`` times with exponential
    backoff; a chunk that still fails raises ScoringError naming the chunk,
    and any out-of-range or malformed response raises ProtocolError.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if not instances:
        return []
    url = endpoint.rstrip("/") + "/score"
    chunks = [instances[i:i + batch_size] for i in range(0, len(instances), batch_size)]

    def fetch(client: httpx.Client, idx: int) -> list[float]:
        payload = {
            "instances": [
                {"question": inst.question, "context": inst.context}
                for inst in chunks[idx]
            ]
        }
        delay = backoff
        last_exc = None
        for attempt in range(max_retries):
            try:
                resp = client.post(url, json=payload, timeout=timeout)
                resp.raise_for_status()
            except httpx.HTTPError as exc:
                last_exc = exc
                if attempt + 1 < max_retries and delay > 0:
                    time.sleep(delay)
                delay *= 2
                continue
            try:
                data = resp.json()
            except ValueError as exc:
                raise ProtocolError(f"chunk {idx}: response is not JSON: {exc}") from exc
            if not isinstance(data, dict) or "scores" not in data:
                raise ProtocolError(f"chunk {idx}: response missing 'scores'")
            return check_score_vector(data["scores"], len(chunks[idx]),
                                      what=f"chunk {idx} scores")
        raise ScoringError(
            f"chunk {idx} ({len(chunks[idx])} instances) failed after "
            f"{max_retries} attempts: {last_exc}"
        )

    with httpx.Client(transport=transport) as client:
        if len(chunks) == 1:
            return fetch(client, 0)
        workers = min(max_in_flight, len(chunks))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda i: fetch(client, i), range(len(chunks))))
    return [s for part in parts for s in part]


class RemoteScorer(BaseScorer):
    """Client for a scoring service (POST /score per the wire protocol)."""

    def __init__(self, endpoint: str, batch_size: int = 32, max_retries: int = 3,
                 backoff: float = 0.5, max_in_flight: int = 4, timeout: float = 30.0,
                 transport=None):
        self.endpoint = endpoint
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.backoff = backoff
        self.max_in_flight = max_in_flight
        self.timeout = timeout
        self.transport = transport

    def score_batch(self, instances) -> list[float]:
        return remote_score_batch(
            self.endpoint, instances,
            batch_size=self.batch_size,
            max_retries=self.max_retries,
            backoff=self.backoff,
            max_in_flight=self.max_in_flight,
            timeout=self.timeout,
            transport=self.transport,
        )

    def health(self) -> bool:
        url = self.endpoint.rstrip("/") + "/health"
        try:
            with httpx.Client(transport=self.transport) as client:
                resp = client.get(url, timeout=self.timeout)
                return resp.status_code == 200 and resp.json().get("status") == "ok"
        except (httpx.HTTPError, ValueError):
            return False


def make_scorer(spec: str, graph: KnowledgeGraph | None = None, rules=None,
                k: int = 3, min_support: int = 2, seed: int = 0) -> BaseScorer:
    """Build a scorer from a CLI-style spec: rules | constant | random | remote:<url>."""
    if spec == "constant":
        return ConstantScorer()
    if spec == "random":
        return RandomScorer(seed=seed)
    if spec == "rules":
        if rules is not None:
            return RuleScorer.from_rules(rules, max_path_len=k, min_support=min_support)
        if graph is None:
            raise ValueError("rules scorer needs a graph to mine or a rules file")
        return RuleScorer(max_path_len=k, min_support=min_support).fit(graph)
    if spec.startswith("remote:"):
        endpoint = spec[len("remote:"):]
        if not endpoint:
            raise ValueError("remote scorer spec needs a URL: remote:<url>")
        return RemoteScorer(endpoint=endpoint)
    raise ValueError(f"unknown scorer spec: {spec!r}")
