"""Turn (triple, structural context) pairs into textual scoring instances.

Four context schemes are supported: one instance per reasoning path
(individual_paths), all paths in one instance (combined_paths), the pruned
subgraph's edges as an unordered clause list (edge_list), and the bare triple
with empty context (triple_only). Questions always follow the natural
pattern "Question: {head} {relation} what ? Is the correct answer {tail} ?".
No tokenizer markers are emitted; scorers own sequence packing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ContractViolationError
from .graph import TextMap, Triple
from .paths import PathStep, ReasoningPath
from .sampling import LabeledExample

INDIVIDUAL_PATHS = "individual_paths"
COMBINED_PATHS = "combined_paths"
EDGE_LIST = "edge_list"
TRIPLE_ONLY = "triple_only"
SCHEMES = (INDIVIDUAL_PATHS, COMBINED_PATHS, EDGE_LIST, TRIPLE_ONLY)


@dataclass(frozen=True)
class Instance:
    """A (question, context) pair handed to a scorer, with traceability meta.

    ``path_ids`` index into the originating example's path list; ``path`` is
    the single originating path under individual_paths, None otherwise.
    """

    question: str
    context: str
    label: int | None
    triple: Triple
    path_ids: tuple[int, ...] = field(default=())
    path: ReasoningPath | None = None


def render_question(t: Triple, tm: TextMap) -> str:
    head = tm.entity(t.head)
    rel = tm.relation(t.relation)
    tail = tm.entity(t.tail)
    return f"Question: {head} {rel} what ? Is the correct answer {tail} ?"


def _clause(t: Triple, tm: TextMap) -> str:
    return f"{tm.entity(t.head)} {tm.relation(t.relation)} {tm.entity(t.tail)};"


def _render_path(p: ReasoningPath, tm: TextMap) -> str:
    # triples appear in chain order but each in stored orientation
    return " ".join(_clause(t, tm) for t in p.triples())


def render_context(scheme: str, structural_input, tm: TextMap) -> str:
    """Render the structural context under the given scheme.

    individual_paths expects one ReasoningPath; combined_paths a path
    sequence; edge_list a Triple sequence; triple_only ignores the input and
    returns the empty string.
    """
    if scheme == TRIPLE_ONLY:
        return ""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown linearization scheme: {scheme!r}")
    if not structural_input:
        raise ContractViolationError(f"scheme {scheme} requires non-empty structural input")
    if scheme == INDIVIDUAL_PATHS:
        if not isinstance(structural_input, ReasoningPath):
            raise ContractViolationError("individual_paths renders a single path")
        return "Context: " + _render_path(structural_input, tm)
    if scheme == COMBINED_PATHS:
        return "Context: " + " | ".join(_render_path(p, tm) for p in structural_input)
    return "Context: " + " ".join(_clause(t, tm) for t in structural_input)


def _pruned_edges(paths: Sequence[ReasoningPath]) -> list[Triple]:
    first_len: dict[Triple, int] = {}
    for p in paths:
        for t in p.triples():
            if t not in first_len:
                first_len[t] = p.length
    return sorted(first_len, key=lambda t: (first_len[t], t.head, t.relation, t.tail))


def emit_instances(
    examples: Iterable[LabeledExample], scheme: str, tm: TextMap
) -> list[Instance]:
    """individual_paths yields one instance per (example, path); the other
    schemes yield one instance per example."""
    out: list[Instance] = []
    for ex in examples:
        question = render_question(ex.triple, tm)
        if scheme == INDIVIDUAL_PATHS:
            for i, p in enumerate(ex.paths):
                out.append(Instance(
                    question=question,
                    context=render_context(scheme, p, tm),
                    label=ex.label,
                    triple=ex.triple,
                    path_ids=(i,),
                    path=p,
                ))
        elif scheme == COMBINED_PATHS:
            out.append(Instance(
                question=question,
                context=render_context(scheme, list(ex.paths), tm),
                label=ex.label,
                triple=ex.triple,
                path_ids=tuple(range(len(ex.paths))),
            ))
        elif scheme == EDGE_LIST:
            out.append(Instance(
                question=question,
                context=render_context(scheme, _pruned_edges(ex.paths), tm),
                label=ex.label,
                triple=ex.triple,
                path_ids=tuple(range(len(ex.paths))),
            ))
        elif scheme == TRIPLE_ONLY:
            out.append(Instance(
                question=question,
                context="",
                label=ex.label,
                triple=ex.triple,
            ))
        else:
            raise ValueError(f"unknown linearization scheme: {scheme!r}")
    return out


# -- JSONL interchange -------------------------------------------------


def _path_to_json(p: ReasoningPath | None):
    if p is None:
        return None
    return [[s.triple.head, s.triple.relation, s.triple.tail, s.direction] for s in p.steps]


def _path_from_json(rows, source: str, target: str) -> ReasoningPath | None:
    if rows is None:
        return None
    steps = tuple(PathStep(Triple(h, r, t), d == "fwd") for h, r, t, d in rows)
    return ReasoningPath(steps, source=source, target=target)


def instance_to_json(inst: Instance) -> str:
    obj = {
        "question": inst.question,
        "context": inst.context,
        "triple": inst.triple.as_list(),
        "path": _path_to_json(inst.path),
    }
    if inst.label is not None:
        obj["label"] = inst.label
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def instance_from_json(line: str) -> Instance:
    obj = json.loads(line)
    triple = Triple(*obj["triple"])
    path = _path_from_json(obj.get("path"), triple.head, triple.tail)
    return Instance(
        question=obj["question"],
        context=obj["context"],
        label=obj.get("label"),
        triple=triple,
        path_ids=(0,) if path is not None else (),
        path=path,
    )


def write_instances(instances: Iterable[Instance], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(instance_to_json(inst) + "\n")


def read_instances(path) -> list[Instance]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(instance_from_json(line))
    return out
