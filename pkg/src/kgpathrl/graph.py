"""Immutable triple store with adjacency indices and display-text maps.

A graph is loaded once from a tab-separated file (``head<TAB>relation<TAB>tail``,
one triple per line, no header) and never mutated afterwards; every query is
side-effect free, so concurrent readers need no locking.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import EmptyGraphError, ParseError, UnknownEntityError

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Triple:
    """A directed labeled edge (head, relation, tail); the unit of knowledge."""

    head: str
    relation: str
    tail: str

    def as_list(self) -> list[str]:
        return [self.head, self.relation, self.tail]


def _clean_text(text: str) -> str:
    # collapses all whitespace runs (incl. tabs/newlines) to single spaces
    return " ".join(text.split())


def _fallback_text(ident: str) -> str:
    # strip namespace prefixes up to the last '/', then de-punctuate
    s = ident.rsplit("/", 1)[-1]
    s = s.replace("_", " ").replace(".", " ")
    s = _clean_text(s)
    return s if s else ident


@dataclass(frozen=True)
class TextMap:
    """Display strings for entity and relation ids.

    Lookups are total: ids missing from the maps fall back to a cleaned form
    of the id itself (namespace prefix stripped, '_' and '.' turned into
    spaces, whitespace collapsed), so a produced string is never empty.
    """

    entity_text: Mapping[str, str] = field(default_factory=dict)
    relation_text: Mapping[str, str] = field(default_factory=dict)

    def entity(self, ident: str) -> str:
        mapped = self.entity_text.get(ident)
        if mapped is not None:
            cleaned = _clean_text(mapped)
            if cleaned:
                return cleaned
        return _fallback_text(ident)

    def relation(self, ident: str) -> str:
        mapped = self.relation_text.get(ident)
        if mapped is not None:
            cleaned = _clean_text(mapped)
            if cleaned:
                return cleaned
        return _fallback_text(ident)


def textualize(tm: TextMap, ident: str) -> str:
    """Best display string for an id of either kind (entity map wins ties)."""
    if ident in tm.entity_text:
        return tm.entity(ident)
    if ident in tm.relation_text:
        return tm.relation(ident)
    return _fallback_text(ident)


class KnowledgeGraph:
    """An immutable set of triples with forward/backward adjacency indices.

    Vocabularies are ordered by first appearance. Entity and relation ids are
    interned to dense integers internally; the public surface always speaks
    original string ids.
    """

    def __init__(self, triples: Iterable[Triple], text_map: TextMap | None = None):
        seen: set[Triple] = set()
        unique: list[Triple] = []
        for t in triples:
            if t not in seen:
                seen.add(t)
                unique.append(t)
        self._triples: tuple[Triple, ...] = tuple(unique)
        self._triple_set: frozenset[Triple] = frozenset(unique)
        self.text_map = text_map if text_map is not None else TextMap()

        entities: list[str] = []
        relations: list[str] = []
        ent_idx: dict[str, int] = {}
        rel_idx: dict[str, int] = {}
        for t in unique:
            for e in (t.head, t.tail):
                if e not in ent_idx:
                    ent_idx[e] = len(entities)
                    entities.append(e)
            if t.relation not in rel_idx:
                rel_idx[t.relation] = len(relations)
                relations.append(t.relation)
        self.entities: tuple[str, ...] = tuple(entities)
        self.relations: tuple[str, ...] = tuple(relations)
        self._ent_idx = ent_idx
        self._rel_idx = rel_idx

        # integer adjacency, one entry per triple per direction
        fwd: list[list[tuple[int, int]]] = [[] for _ in entities]
        bwd: list[list[tuple[int, int]]] = [[] for _ in entities]
        key_set: set[tuple[int, int, int]] = set()
        for t in unique:
            h, r, tl = ent_idx[t.head], rel_idx[t.relation], ent_idx[t.tail]
            fwd[h].append((r, tl))
            bwd[tl].append((r, h))
            key_set.add((h, r, tl))
        self._fwd = tuple(tuple(x) for x in fwd)
        self._bwd = tuple(tuple(x) for x in bwd)
        self._key_set = frozenset(key_set)

    # -- public views -------------------------------------------------

    @property
    def triples(self) -> tuple[Triple, ...]:
        return self._triples

    @property
    def fwd_index(self) -> dict[str, tuple[tuple[str, str], ...]]:
        """entity-id -> outgoing (relation, tail) pairs."""
        return {
            e: tuple((self.relations[r], self.entities[t]) for r, t in self._fwd[i])
            for i, e in enumerate(self.entities)
        }

    @property
    def bwd_index(self) -> dict[str, tuple[tuple[str, str], ...]]:
        """entity-id -> incoming (relation, head) pairs."""
        return {
            e: tuple((self.relations[r], self.entities[h]) for r, h in self._bwd[i])
            for i, e in enumerate(self.entities)
        }

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._triple_set

    def has_entity(self, e: str) -> bool:
        return e in self._ent_idx

    def has_relation(self, r: str) -> bool:
        return r in self._rel_idx

    # -- interning helpers used by the path engine --------------------

    def _entity_id(self, e: str) -> int:
        try:
            return self._ent_idx[e]
        except KeyError:
            raise UnknownEntityError(f"unknown entity: {e!r}") from None

    def _triple_key(self, t: Triple) -> tuple[int, int, int] | None:
        h = self._ent_idx.get(t.head)
        r = self._rel_idx.get(t.relation)
        tl = self._ent_idx.get(t.tail)
        if h is None or r is None or tl is None:
            return None
        return (h, r, tl)

    def _bounded_distances(self, start: int, k: int) -> dict[int, int]:
        """Undirected BFS distances from ``start``, cut off at depth ``k``."""
        dist = {start: 0}
        frontier = deque([start])
        while frontier:
            cur = frontier.popleft()
            d = dist[cur]
            if d == k:
                continue
            for _, nxt in self._fwd[cur]:
                if nxt not in dist:
                    dist[nxt] = d + 1
                    frontier.append(nxt)
            for _, nxt in self._bwd[cur]:
                if nxt not in dist:
                    dist[nxt] = d + 1
                    frontier.append(nxt)
        return dist

    # -- queries -------------------------------------------------------

    def k_hop_neighbors(self, e: str, k: int) -> set[str]:
        """Entities reachable from ``e`` in at most ``k`` steps, either edge
        direction, excluding ``e`` itself."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        start = self._entity_id(e)
        dist = self._bounded_distances(start, k)
        return {self.entities[i] for i in dist if i != start}

    def write_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for t in self._triples:
                fh.write(f"{t.head}\t{t.relation}\t{t.tail}\n")


def contains(g: KnowledgeGraph, t: Triple) -> bool:
    return t in g


def k_hop_neighbors(g: KnowledgeGraph, e: str, k: int) -> set[str]:
    return g.k_hop_neighbors(e, k)


def _parse_triple_lines(path) -> list[Triple]:
    triples: list[Triple] = []
    dup_count = 0
    seen: set[Triple] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    path, line_no,
                    f"expected 3 tab-separated fields, got {len(fields)}",
                )
            head, relation, tail = (f.strip() for f in fields)
            if not head or not relation or not tail:
                raise ParseError(path, line_no, "empty field in triple")
            t = Triple(head, relation, tail)
            if t in seen:
                dup_count += 1
                continue
            seen.add(t)
            triples.append(t)
    if dup_count:
        log.warning("%s: %d duplicate triple line(s) ignored", path, dup_count)
    return triples


def load_text_map(entity_path=None, relation_path=None) -> TextMap:
    """Read ``id<TAB>display text`` files into a TextMap (either side optional)."""

    def read(path) -> dict[str, str]:
        out: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n").rstrip("\r")
                if not line.strip():
                    continue
                fields = line.split("\t", 1)
                if len(fields) != 2:
                    raise ParseError(path, line_no, "expected id<TAB>display text")
                out[fields[0].strip()] = fields[1].strip()
        return out

    return TextMap(
        entity_text=read(entity_path) if entity_path else {},
        relation_text=read(relation_path) if relation_path else {},
    )


def load_graph(triple_source, entity_text=None, relation_text=None) -> KnowledgeGraph:
    """Load a knowledge graph from a triple TSV plus optional text-map files.

    Raises ParseError (with file/line context) on malformed lines and
    EmptyGraphError when the source holds no triples. Duplicate lines are
    dropped with a counted warning.
    """
    triples = _parse_triple_lines(triple_source)
    if not triples:
        raise EmptyGraphError(f"{triple_source}: no triples found")
    tm = load_text_map(entity_text, relation_text)
    return KnowledgeGraph(triples, text_map=tm)


def save_graph(g: KnowledgeGraph, path) -> None:
    g.write_tsv(path)


def graph_from_triples(rows: Iterable[tuple[str, str, str]]) -> KnowledgeGraph:
    """Convenience constructor from (head, relation, tail) tuples."""
    return KnowledgeGraph(Triple(*row) for row in rows)
