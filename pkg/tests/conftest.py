import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kgpathrl import KnowledgeGraph, TextMap, Triple, graph_from_triples

G0_ROWS = [
    ("FDR", "president_of", "USA"),
    ("DC", "capital_of", "USA"),
    ("FDR", "work_at", "DC"),
    ("Merkel", "chancellor_of", "Germany"),
    ("Berlin", "capital_of", "Germany"),
]

G0_ENTITY_TEXT = {"FDR": "Franklin Roosevelt", "DC": "Washington D.C."}

# second grounding of the president/capital pattern under a fresh country
G0_EXTENDED_ROWS = G0_ROWS + [
    ("Obama", "president_of", "USA2"),
    ("Paris2", "capital_of", "USA2"),
    ("Obama", "work_at", "Paris2"),
]


@pytest.fixture
def g0() -> KnowledgeGraph:
    return KnowledgeGraph(
        (Triple(*row) for row in G0_ROWS),
        text_map=TextMap(entity_text=dict(G0_ENTITY_TEXT)),
    )


@pytest.fixture
def g0_extended() -> KnowledgeGraph:
    return graph_from_triples(G0_EXTENDED_ROWS)


@pytest.fixture
def g0_files(tmp_path):
    """G0 written to disk: triple TSV plus the entity display-text map."""
    graph = tmp_path / "g0.tsv"
    graph.write_text(
        "".join(f"{h}\t{r}\t{t}\n" for h, r, t in G0_ROWS), encoding="utf-8"
    )
    names = tmp_path / "entity_names.tsv"
    names.write_text(
        "".join(f"{k}\t{v}\n" for k, v in G0_ENTITY_TEXT.items()), encoding="utf-8"
    )
    return graph, names
