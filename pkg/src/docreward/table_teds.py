"""Tree-edit-distance similarity for tables (TEDS and structure-only TEDS-S).

HTML tables are parsed forgivingly (model output routinely drops closing
tags) into rooted ordered trees; the distance is exact Zhang-Shasha with the
usual cost model: unit insert/delete, renames cost 1 on any tag or span
mismatch and otherwise the normalized edit distance between cell contents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from html import escape
from html.parser import HTMLParser

from .errors import DepthLimitExceeded, NoTableFound
from .text_distance import normalized_edit_distance

_STRUCT_TAGS = {"table", "thead", "tbody", "tfoot", "tr", "td", "th", "caption"}
_CELL_TAGS = {"td", "th"}
_SECTION_TAGS = {"thead", "tbody", "tfoot"}
_MAX_DEPTH = 64


@dataclass
class TableNode:
    tag: str
    colspan: int = 1
    rowspan: int = 1
    content: str = ""
    children: list["TableNode"] = field(default_factory=list)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class TableTree:
    root: TableNode

    @property
    def size(self) -> int:
        return sum(1 for _ in self.root.walk())


@dataclass(frozen=True)
class TedsCostModel:
    insert_cost: float = 1.0
    delete_cost: float = 1.0
    structure_only: bool = False

    def insert(self, node: TableNode) -> float:
        return self.insert_cost

    def delete(self, node: TableNode) -> float:
        return self.delete_cost

    def rename(self, a: TableNode, b: TableNode) -> float:
        if a.tag != b.tag or a.colspan != b.colspan or a.rowspan != b.rowspan:
            return 1.0
        if not self.structure_only and a.tag in _CELL_TAGS:
            if a.content or b.content:
                return normalized_edit_distance(a.content, b.content)
        return 0.0


@dataclass(frozen=True)
class TedsOutcome:
    score: float
    pred_missing: bool
    gt_missing: bool


class _TableParser(HTMLParser):
    """Builds the first <table> element into a TableNode tree.

    Unclosed td/tr/section tags are closed implicitly the way browsers do;
    inline markup inside cells is flattened into the cell text.
    """

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root: TableNode | None = None
        self.stack: list[TableNode] = []
        self.text: list[list[str]] = []
        self.done = False

    # -- helpers

    def _top(self) -> TableNode | None:
        return self.stack[-1] if self.stack else None

    def _pop(self) -> None:
        node = self.stack.pop()
        if node.tag in _CELL_TAGS:
            chunks = self.text.pop()
            node.content = " ".join("".join(chunks).split())
        if not self.stack and node is self.root:
            self.done = True

    def _pop_while(self, tags: set[str]) -> None:
        while self.stack and self.stack[-1].tag in tags:
            self._pop()

    def _push(self, node: TableNode) -> None:
        if len(self.stack) >= _MAX_DEPTH:
            raise DepthLimitExceeded(f"table nesting exceeds {_MAX_DEPTH}")
        parent = self._top()
        if parent is not None:
            parent.children.append(node)
        self.stack.append(node)
        if node.tag in _CELL_TAGS:
            self.text.append([])

    # -- HTMLParser hooks

    def handle_starttag(self, tag, attrs):
        if self.done:
            return
        if self.root is None:
            if tag == "table":
                self.root = TableNode(tag="table")
                self.stack.append(self.root)
            return
        if tag not in _STRUCT_TAGS:
            return  # inline markup: text flows through to the cell
        if tag == "table":
            # nested table becomes a subtree of the enclosing cell
            self._push(TableNode(tag="table"))
            return
        if tag == "tr":
            self._pop_while(_CELL_TAGS | {"tr"})
        elif tag in _CELL_TAGS:
            self._pop_while(_CELL_TAGS)
            if self._top() is not None and self._top().tag not in ("tr",):
                if self._top().tag in {"table"} | _SECTION_TAGS:
                    self._push(TableNode(tag="tr"))
        elif tag in _SECTION_TAGS or tag == "caption":
            self._pop_while(_CELL_TAGS | {"tr"} | _SECTION_TAGS | {"caption"})
        node = TableNode(tag=tag)
        if tag in _CELL_TAGS:
            node.colspan = _span(attrs, "colspan")
            node.rowspan = _span(attrs, "rowspan")
        self._push(node)

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag in _STRUCT_TAGS and self.root is not None and not self.done:
            self.handle_endtag(tag)

    def handle_endtag(self, tag):
        if self.done or self.root is None or tag not in _STRUCT_TAGS:
            return
        if not any(n.tag == tag for n in self.stack):
            return  # stray close tag: ignore
        while self.stack:
            top = self.stack[-1].tag
            self._pop()
            if top == tag:
                break

    def handle_data(self, data):
        if self.done or not self.text:
            return
        if self.stack and self.stack[-1].tag in _CELL_TAGS:
            self.text[-1].append(data)

    def finish(self) -> TableNode:
        while self.stack:
            self._pop()
        if self.root is None:
            raise NoTableFound("input contains no <table> element")
        return self.root


def _span(attrs, name: str) -> int:
    for key, value in attrs:
        if key == name and value is not None:
            try:
                return max(1, int(value.strip()))
            except ValueError:
                return 1
    return 1


def parse_table_html(html: str) -> TableTree:
    """Parse the first <table> in an HTML fragment into a TableTree."""
    parser = _TableParser()
    parser.feed(html)
    parser.close()
    return TableTree(root=parser.finish())


# ---------------------------------------------------------------------------
# Zhang-Shasha


class _Annotated:
    """Post-order node list with leftmost-leaf-descendant ids and keyroots."""

    def __init__(self, root: TableNode) -> None:
        self.nodes: list[TableNode] = []
        self.lmds: list[int] = []
        lmd_of: dict[int, int] = {}

        def visit(node: TableNode) -> int:
            child_lmd = -1
            for i, child in enumerate(node.children):
                got = visit(child)
                if i == 0:
                    child_lmd = got
            idx = len(self.nodes)
            self.nodes.append(node)
            self.lmds.append(child_lmd if child_lmd >= 0 else idx)
            return self.lmds[idx]

        visit(root)
        for idx, lmd in enumerate(self.lmds):
            lmd_of[lmd] = idx  # the last (highest) node per lmd is a keyroot
        self.keyroots = sorted(lmd_of.values())


def tree_edit_distance(
    t1: TableTree, t2: TableTree, model: TedsCostModel = TedsCostModel()
) -> float:
    """Exact ordered tree edit distance under the model's costs."""
    a = _Annotated(t1.root)
    b = _Annotated(t2.root)
    na, nb = len(a.nodes), len(b.nodes)
    td = [[0.0] * nb for _ in range(na)]

    for i in a.keyroots:
        for j in b.keyroots:
            _treedist(a, b, i, j, td, model)
    return td[na - 1][nb - 1]


def _treedist(a: _Annotated, b: _Annotated, i: int, j: int, td, model: TedsCostModel) -> None:
    al, bl = a.lmds, b.lmds
    an, bn = a.nodes, b.nodes
    m = i - al[i] + 2
    n = j - bl[j] + 2
    ioff = al[i] - 1
    joff = bl[j] - 1
    fd = [[0.0] * n for _ in range(m)]
    for x in range(1, m):
        fd[x][0] = fd[x - 1][0] + model.delete(an[x + ioff])
    for y in range(1, n):
        fd[0][y] = fd[0][y - 1] + model.insert(bn[y + joff])
    for x in range(1, m):
        for y in range(1, n):
            if al[i] == al[x + ioff] and bl[j] == bl[y + joff]:
                fd[x][y] = min(
                    fd[x - 1][y] + model.delete(an[x + ioff]),
                    fd[x][y - 1] + model.insert(bn[y + joff]),
                    fd[x - 1][y - 1] + model.rename(an[x + ioff], bn[y + joff]),
                )
                td[x + ioff][y + joff] = fd[x][y]
            else:
                p = al[x + ioff] - 1 - ioff
                q = bl[y + joff] - 1 - joff
                fd[x][y] = min(
                    fd[x - 1][y] + model.delete(an[x + ioff]),
                    fd[x][y - 1] + model.insert(bn[y + joff]),
                    fd[p][q] + td[x + ioff][y + joff],
                )


# ---------------------------------------------------------------------------
# Scores


def teds_detail(pred_html: str, gt_html: str, structure_only: bool = False) -> TedsOutcome:
    """TEDS with missing-table diagnostics: a side without a table scores 0."""
    pred_tree = gt_tree = None
    try:
        pred_tree = parse_table_html(pred_html)
    except NoTableFound:
        pass
    try:
        gt_tree = parse_table_html(gt_html)
    except NoTableFound:
        pass
    if pred_tree is None or gt_tree is None:
        return TedsOutcome(
            score=0.0, pred_missing=pred_tree is None, gt_missing=gt_tree is None
        )
    model = TedsCostModel(structure_only=structure_only)
    dist = tree_edit_distance(pred_tree, gt_tree, model)
    denom = max(pred_tree.size, gt_tree.size)
    score = 1.0 - dist / denom if denom else 1.0
    return TedsOutcome(score=min(1.0, max(0.0, score)), pred_missing=False, gt_missing=False)


def teds(pred_html: str, gt_html: str, structure_only: bool = False) -> float:
    return teds_detail(pred_html, gt_html, structure_only).score


# ---------------------------------------------------------------------------
# Markdown pipe tables


def markdown_table_to_html(md: str) -> str:
    """Deterministic pipe-table -> HTML mapping (header row -> th)."""
    rows: list[list[str]] = []
    seps: list[int] = []
    for line in md.strip().split("\n"):
        s = line.strip()
        if not s.startswith("|"):
            continue
        cells = [c.strip() for c in s.strip("|").split("|")]
        if cells and all(_is_separator(c) for c in cells):
            seps.append(len(rows))
            continue
        rows.append(cells)
    header_rows = 1 if seps and seps[0] == 1 and len(rows) >= 1 else 0
    parts = ["<table>"]
    for idx, cells in enumerate(rows):
        cell_tag = "th" if idx < header_rows else "td"
        parts.append(
            "<tr>"
            + "".join(f"<{cell_tag}>{escape(c)}</{cell_tag}>" for c in cells)
            + "</tr>"
        )
    parts.append("</table>")
    return "".join(parts)


def _is_separator(cell: str) -> bool:
    body = cell.strip()
    if body.startswith(":"):
        body = body[1:]
    if body.endswith(":"):
        body = body[:-1]
    return len(body) >= 1 and set(body) == {"-"}


def table_segment_to_html(raw: str) -> str:
    """HTML form of a table segment: passthrough for <table> blocks,
    converted for pipe tables."""
    s = raw.strip()
    if s.startswith("<table"):
        return s
    return markdown_table_to_html(s)
