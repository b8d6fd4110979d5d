from .evaluate import EvalReport, evaluate_dirs, score_item
from .prf import PRF, match_tables, table_prf
from .teds import teds, teds_struct, tree_edit_distance
from .tree import (TableParseError, TableTree, parse_table_html, parse_tables,
                   structure_to_tree, tree_to_structure)

__all__ = [
    "EvalReport", "PRF", "TableParseError", "TableTree", "evaluate_dirs", "match_tables",
    "parse_table_html", "parse_tables", "score_item", "structure_to_tree", "table_prf",
    "teds", "teds_struct", "tree_edit_distance", "tree_to_structure",
]
