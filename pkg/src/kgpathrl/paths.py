"""Bounded simple-path enumeration between entity pairs.

Paths may traverse stored edges in either direction; each step records the
stored triple plus a flag for the direction it was walked. Enumeration is a
depth-limited DFS pruned by BFS distances from the target, which preserves
the exact output set (the distance is a lower bound on the steps still
needed, so no valid path is ever cut).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import InvalidQueryError
from .graph import KnowledgeGraph, Triple


@dataclass(frozen=True)
class PathStep:
    """One traversed edge: the stored triple and the walk direction."""

    triple: Triple
    forward: bool

    @property
    def direction(self) -> str:
        return "fwd" if self.forward else "bwd"


@dataclass(frozen=True)
class ReasoningPath:
    """An ordered chain of steps connecting ``source`` to ``target``.

    The chain property holds by construction: a forward step connects
    head -> tail, a backward step tail -> head, and consecutive steps share
    the connecting entity. The visited entity sequence has no repeats.
    """

    steps: tuple[PathStep, ...]
    source: str
    target: str

    @property
    def length(self) -> int:
        return len(self.steps)

    def entities(self) -> tuple[str, ...]:
        """Visited entity sequence source..target."""
        seq = [self.source]
        for s in self.steps:
            seq.append(s.triple.tail if s.forward else s.triple.head)
        return tuple(seq)

    def triples(self) -> tuple[Triple, ...]:
        return tuple(s.triple for s in self.steps)

    def relation_signature(self) -> tuple[tuple[str, str], ...]:
        """(relation, direction) sequence; entity-free view of the path."""
        return tuple((s.triple.relation, s.direction) for s in self.steps)

    def reverse(self) -> "ReasoningPath":
        rev = tuple(PathStep(s.triple, not s.forward) for s in reversed(self.steps))
        return ReasoningPath(rev, source=self.target, target=self.source)


@dataclass(frozen=True)
class PathQuery:
    head: str
    tail: str
    max_len: int = 3
    hide: Triple | None = None


def _step_sort_key(step: PathStep):
    t = step.triple
    return (t.head, t.relation, t.tail, step.direction)


def path_sort_key(p: ReasoningPath):
    """Canonical ordering: length first, then lexicographic step order."""
    return (p.length, tuple(_step_sort_key(s) for s in p.steps))


def _search(
    g: KnowledgeGraph,
    src: int,
    dst: int,
    max_len: int,
    hidden: tuple[int, int, int] | None,
    dist_to_dst: dict[int, int],
) -> list[tuple[tuple[int, int, int, bool], ...]]:
    """All simple step sequences src->dst of length <= max_len, as int records."""
    if dist_to_dst.get(src, max_len + 1) > max_len:
        return []
    fwd, bwd = g._fwd, g._bwd
    out: list[tuple[tuple[int, int, int, bool], ...]] = []
    steps: list[tuple[int, int, int, bool]] = []
    visited = {src}

    def extend(cur: int, depth: int) -> None:
        nxt_depth = depth + 1
        remaining = max_len - nxt_depth
        for r, t in fwd[cur]:
            if hidden is not None and cur == hidden[0] and r == hidden[1] and t == hidden[2]:
                continue
            if t == dst:
                steps.append((cur, r, t, True))
                out.append(tuple(steps))
                steps.pop()
            elif t not in visited and remaining > 0 and dist_to_dst.get(t, max_len + 1) <= remaining:
                visited.add(t)
                steps.append((cur, r, t, True))
                extend(t, nxt_depth)
                steps.pop()
                visited.discard(t)
        for r, h in bwd[cur]:
            if hidden is not None and h == hidden[0] and r == hidden[1] and cur == hidden[2]:
                continue
            if h == dst:
                steps.append((h, r, cur, False))
                out.append(tuple(steps))
                steps.pop()
            elif h not in visited and remaining > 0 and dist_to_dst.get(h, max_len + 1) <= remaining:
                visited.add(h)
                steps.append((h, r, cur, False))
                extend(h, nxt_depth)
                steps.pop()
                visited.discard(h)

    extend(src, 0)
    return out


def _materialize(g: KnowledgeGraph, recs, source: str, target: str) -> list[ReasoningPath]:
    ents, rels = g.entities, g.relations
    paths = []
    for rec in recs:
        steps = tuple(
            PathStep(Triple(ents[h], rels[r], ents[t]), forward)
            for h, r, t, forward in rec
        )
        paths.append(ReasoningPath(steps, source=source, target=target))
    paths.sort(key=path_sort_key)
    return paths


def enumerate_paths(g: KnowledgeGraph, q: PathQuery) -> list[ReasoningPath]:
    """Exactly the simple paths of length <= q.max_len between head and tail.

    The hidden triple (if any) is unusable in both directions. Output is
    ordered by (length asc, lexicographic step order) and is deterministic.
    """
    if q.max_len < 1:
        raise InvalidQueryError(f"max_len must be >= 1, got {q.max_len}")
    if q.head == q.tail:
        raise InvalidQueryError(f"path query requires head != tail, got {q.head!r}")
    src = g._entity_id(q.head)
    dst = g._entity_id(q.tail)
    hidden = g._triple_key(q.hide) if q.hide is not None else None
    dist = g._bounded_distances(dst, q.max_len)
    recs = _search(g, src, dst, q.max_len, hidden, dist)
    return _materialize(g, recs, q.head, q.tail)


def sample_paths(paths: list[ReasoningPath], n: int, rng: random.Random) -> list[ReasoningPath]:
    """Keep at most ``n`` paths, strictly shorter lengths first.

    Whole shorter-length groups are taken while they fit; within the boundary
    length the remainder is a uniform sample without replacement. Output
    preserves the input's relative order and is deterministic given the rng.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if len(paths) <= n:
        return list(paths)
    order = sorted(range(len(paths)), key=lambda i: paths[i].length)
    kept: list[int] = []
    pos = 0
    while pos < len(order):
        length = paths[order[pos]].length
        group = [i for i in order[pos:] if paths[i].length == length]
        if len(kept) + len(group) <= n:
            kept.extend(group)
            pos += len(group)
            if len(kept) == n:
                break
        else:
            kept.extend(rng.sample(group, n - len(kept)))
            break
    kept.sort()
    return [paths[i] for i in kept]


def extract_pruned_subgraph(g: KnowledgeGraph, q: PathQuery) -> list[Triple]:
    """Union of triples over all paths for the query.

    Ordered by (length of first contributing path, then lexicographic on the
    triple), so repeated runs produce identical sequences.
    """
    paths = enumerate_paths(g, q)
    first_len: dict[Triple, int] = {}
    for p in paths:
        for t in p.triples():
            if t not in first_len:
                first_len[t] = p.length
    return sorted(first_len, key=lambda t: (first_len[t], t.head, t.relation, t.tail))
