"""Tree edit distance and the TEDS / TEDS-Struct similarities."""

from __future__ import annotations

import numpy as np

from .. import kernels
from .tree import TableTree

_LABELS = {"table": 0, "tr": 1, "td": 2}
_TD = _LABELS["td"]


def _flatten(tree: TableTree):
    nodes = tree.postorder()
    n = len(nodes)
    index = {id(nd): i for i, nd in enumerate(nodes)}
    lml = np.empty(n, dtype=np.int64)
    for i, nd in enumerate(nodes):
        cur = nd
        while cur.children:
            cur = cur.children[0]
        lml[i] = index[id(cur)]
    # keyroots: the highest node for each distinct leftmost leaf
    seen = {}
    for i in range(n):
        seen[int(lml[i])] = i
    keyroots = np.array(sorted(seen.values()), dtype=np.int64)
    labels = np.array([_LABELS[nd.label] for nd in nodes], dtype=np.int64)
    rs = np.array([nd.rowspan for nd in nodes], dtype=np.int64)
    cs = np.array([nd.colspan for nd in nodes], dtype=np.int64)
    codes, offs = [], [0]
    for nd in nodes:
        codes.extend(ord(ch) for ch in nd.content)
        offs.append(len(codes))
    return (lml, keyroots, labels, rs, cs,
            np.array(codes, dtype=np.int64), np.array(offs, dtype=np.int64))


def relabel_matrix(a: TableTree, b: TableTree) -> np.ndarray:
    fa, fb = _flatten(a), _flatten(b)
    return kernels.relabel_costs(fa[2], fa[3], fa[4], fa[5], fa[6],
                                 fb[2], fb[3], fb[4], fb[5], fb[6], _TD)


def tree_edit_distance(a: TableTree, b: TableTree) -> float:
    """Ordered tree edit distance (Zhang-Shasha) with unit insert/delete.

    Relabel costs: 1 between different labels or td nodes with different
    spans, otherwise the normalized Levenshtein distance of td contents.
    """
    fa, fb = _flatten(a), _flatten(b)
    rel = kernels.relabel_costs(fa[2], fa[3], fa[4], fa[5], fa[6],
                                fb[2], fb[3], fb[4], fb[5], fb[6], _TD)
    return float(kernels.zhang_shasha(fa[0], fa[1], fb[0], fb[1], rel))


def teds(a: TableTree, b: TableTree) -> float:
    n = max(a.node_count(), b.node_count())
    return max(0.0, 1.0 - tree_edit_distance(a, b) / n)


def teds_struct(a: TableTree, b: TableTree) -> float:
    return teds(a.without_content(), b.without_content())
