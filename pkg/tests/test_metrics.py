import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridlock.geometry import Rect
from gridlock.linecell import LogicalCell, TableStructure
from gridlock.metrics.prf import table_prf
from gridlock.metrics.teds import teds, teds_struct, tree_edit_distance
from gridlock.metrics.tree import TableParseError, TableTree, parse_table_html, structure_to_tree


# -- independent oracle -------------------------------------------------------------


def lev(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def relabel(x, y):
    if x.label != y.label:
        return 1.0
    if x.label != "td":
        return 0.0
    if (x.rowspan, x.colspan) != (y.rowspan, y.colspan):
        return 1.0
    n = max(len(x.content), len(y.content))
    return 0.0 if n == 0 else lev(x.content, y.content) / n


def ranks(tree):
    pre, post = [], []

    def walk(nd):
        pre.append(nd)
        for c in nd.children:
            walk(c)
        post.append(nd)

    walk(tree)
    post_rank = {id(nd): i for i, nd in enumerate(post)}
    return [(nd, i, post_rank[id(nd)]) for i, nd in enumerate(pre)]


def brute_ted(a, b):
    """Minimum over all Tai mappings (order- and ancestry-preserving partial matchings)."""
    na, nb = ranks(a), ranks(b)
    best = [float(len(na) + len(nb))]

    def go(i, used, pairs, cost):
        if cost >= best[0]:
            return
        if i == len(na):
            total = cost + (len(nb) - len(used))
            best[0] = min(best[0], total)
            return
        node, pa, qa = na[i]
        go(i + 1, used, pairs, cost + 1)  # delete
        for j, (bn, pb, qb) in enumerate(nb):
            if j in used:
                continue
            if all((pa < p2) == (pb < p4) and (qa < q2) == (qb < q4) for p2, q2, p4, q4 in pairs):
                go(i + 1, used | {j}, pairs + [(pa, qa, pb, qb)], cost + relabel(node, bn))

    go(0, frozenset(), [], 0.0)
    return best[0]


# -- random trees -------------------------------------------------------------------


@st.composite
def trees(draw, max_nodes=8, free_shape=False):
    budget = [draw(st.integers(1, max_nodes)) - 1]
    text = st.text("ab", max_size=3)

    def node(label, depth):
        nd = TableTree(label, content=draw(text) if label == "td" else "",
                       rowspan=draw(st.integers(1, 2)) if label == "td" else 1,
                       colspan=draw(st.integers(1, 2)) if label == "td" else 1)
        if free_shape:
            kids = draw(st.integers(0, min(3, budget[0]))) if depth < 3 else 0
        else:
            kids = draw(st.integers(0, min(3, budget[0]))) if label != "td" else 0
        for _ in range(kids):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            child = draw(st.sampled_from(["table", "tr", "td"])) if free_shape else \
                ("tr" if label == "table" else "td")
            nd.children.append(node(child, depth + 1))
        return nd

    return node("table", 0)


@settings(max_examples=200, deadline=None)
@given(trees(), trees())
def test_ted_matches_brute_force_mappings(a, b):
    assert tree_edit_distance(a, b) == pytest.approx(brute_ted(a, b), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(trees(free_shape=True), trees(free_shape=True))
def test_ted_matches_brute_force_on_free_shapes(a, b):
    assert tree_edit_distance(a, b) == pytest.approx(brute_ted(a, b), abs=1e-9)


@settings(max_examples=500)
@given(trees(), trees(), trees())
def test_metric_axioms(a, b, c):
    assert tree_edit_distance(a, a) == 0
    ab = tree_edit_distance(a, b)
    assert ab == pytest.approx(tree_edit_distance(b, a), abs=1e-9)
    assert tree_edit_distance(a, c) <= ab + tree_edit_distance(b, c) + 1e-9


def td(content="", rs=1, cs=1):
    return TableTree("td", rowspan=rs, colspan=cs, content=content)


def test_ted_examples():
    one = TableTree("table", [TableTree("tr", [td("ab")])])
    assert tree_edit_distance(one, one) == 0
    other = TableTree("table", [TableTree("tr", [td("ad")])])
    assert tree_edit_distance(one, other) == 0.5 == brute_ted(one, other)
    plus = TableTree("table", [TableTree("tr", [td("ab"), td("ab")])])
    assert tree_edit_distance(one, plus) == 1 == brute_ted(one, plus)
    assert teds(one, one) == 1.0
    assert teds(one, plus) == 0.75
    assert teds_struct(one, other) == 1.0 and teds(one, other) < 1.0


def mutate(tree, text):
    return TableTree(tree.label, [mutate(c, text) for c in tree.children], tree.rowspan, tree.colspan,
                     text[: len(tree.content) + 1] if tree.label == "td" else "")


@given(trees(), trees(), st.text("xyz", max_size=4))
def test_teds_struct_ignores_content_and_scores_in_range(a, b, text):
    assert teds_struct(a, b) == teds_struct(mutate(a, text), b)
    s = teds(a, b)
    assert 0 <= s <= 1
    assert (s == 1) == (a == b)


# -- parser ----------------------------------------------------------------------------


def test_parser_examples():
    t = parse_table_html("<table><tr><td>a</td></tr></table>")
    assert t.node_count() == 3 and t.children[0].children[0].content == "a"
    t = parse_table_html('<table><tbody><tr><th colspan="2">h</th></tr></tbody></table>')
    cell = t.children[0].children[0]
    assert (cell.label, cell.colspan, cell.content) == ("td", 2, "h")
    t = parse_table_html("<table><tr><td>  a &amp;\n  b<br/>c &lt;&gt;&quot; </td></tr></table>")
    assert t.children[0].children[0].content == 'a & b\nc <>"'
    for bad in ("<div>x</div>", "", "<table><tr><td>a</td></tr></table><table></table>",
                "<table><tr><td>a"):
        with pytest.raises(TableParseError):
            parse_table_html(bad)


# -- precision / recall / F1 -----------------------------------------------------------------



def grid(y, merged=False):
    if merged:
        cells = [LogicalCell(0, 0, 1, 2), LogicalCell(1, 0), LogicalCell(1, 1)]
    else:
        cells = [LogicalCell(r, c) for r in range(2) for c in range(2)]
    return TableStructure(2, 2, cells, Rect(0, y, 100, y + 50))


def test_prf_examples():
    gt = [grid(100 * i) for i in range(10)]
    r = table_prf([grid(100 * i) for i in range(10)], gt)
    assert (r.precision, r.recall, r.f1) == (1, 1, 1)

    gt2 = [grid(0), grid(100)]
    pred = [grid(0), grid(100, merged=True), grid(500)]
    r = table_prf(pred, gt2)
    assert r.precision == pytest.approx(1 / 3) and r.recall == pytest.approx(1 / 2)
    assert r.f1 == pytest.approx(0.4)

    r = table_prf([grid(0, merged=True)], [grid(0)])
    assert r.n_correct == 0
    # (1,0) and (1,1) survive; the merged top row matches neither gt cell
    assert r.cell_recall == pytest.approx(2 / 4) and r.cell_precision == pytest.approx(2 / 3)


def test_prf_empty_and_structure_tree():
    r = table_prf([], [])
    assert (r.precision, r.recall, r.f1) == (0, 0, 0)
    t = grid(0)
    assert structure_to_tree(t).node_count() == 1 + 2 + 4
    assert math.isclose(teds(structure_to_tree(t), structure_to_tree(t)), 1.0)
