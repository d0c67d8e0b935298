from .conll import (
    format_conll_coref,
    load_documents,
    parse_conll_coref,
    parse_jsonl_documents,
    write_conll_coref,
    write_jsonl_documents,
)
from .conllu import align_trees, format_conllu, parse_conllu, write_conllu
from .grids import ScoreGrid, check_grid_hierarchy, format_score_grids, parse_score_grid, write_score_grids
from .hierarchy import Hierarchy, build_hierarchy, format_hierarchy, parse_hierarchy, write_hierarchy
from .model import DependencyTree, DepToken, Document, EntityPartition, Mention, Triple
from .triples import TripleCounts, format_triples, parse_role_counts, parse_triples, write_triples

__all__ = [
    "DepToken",
    "DependencyTree",
    "Document",
    "EntityPartition",
    "Hierarchy",
    "Mention",
    "ScoreGrid",
    "Triple",
    "TripleCounts",
    "align_trees",
    "build_hierarchy",
    "check_grid_hierarchy",
    "format_conll_coref",
    "format_conllu",
    "format_hierarchy",
    "format_score_grids",
    "format_triples",
    "load_documents",
    "parse_conll_coref",
    "parse_conllu",
    "parse_hierarchy",
    "parse_jsonl_documents",
    "parse_role_counts",
    "parse_score_grid",
    "parse_triples",
    "write_conll_coref",
    "write_conllu",
    "write_hierarchy",
    "write_jsonl_documents",
    "write_score_grids",
    "write_triples",
]
