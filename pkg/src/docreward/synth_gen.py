"""Synthetic training pages: column-layout templates filled with sampled
content, emitting page HTML plus byte-exact Markdown ground truth.

Alignment is guaranteed by construction: both the HTML fragment and the
Markdown fragment for a block are rendered from the same canonicalized
payload, and extract_ground_truth parses the HTML back through the same
canonical mappings.  Rendering to pixels is delegated to an external command
recorded in the manifest.
"""

from __future__ import annotations

import enum
import json
import logging
import random
from dataclasses import dataclass, field, replace
from html import escape
from html.parser import HTMLParser
from pathlib import Path

from jinja2 import Template

from .errors import InsufficientContent, IoFailure, SlotKindMismatch, UnrecognizedStructure

logger = logging.getLogger(__name__)

_BLOCK_KINDS = ("text", "heading", "table", "formula", "image")


class RenderStatus(enum.Enum):
    PENDING = "pending"
    RENDERED = "rendered"
    FILTERED = "filtered"


@dataclass(frozen=True)
class ContentBlock:
    kind: str  # text | heading | table | formula | image
    payload: str
    level: int = 1  # heading depth when kind == "heading"

    def __post_init__(self) -> None:
        if self.kind not in _BLOCK_KINDS:
            raise ValueError(f"unknown block kind {self.kind!r}")


@dataclass(frozen=True)
class ContentSample:
    blocks: tuple[ContentBlock, ...]
    source_tag: str = "unspecified"


@dataclass(frozen=True)
class Slot:
    kind: str
    level: int = 1


@dataclass(frozen=True)
class LayoutTemplate:
    template_id: str
    columns: int
    slots: tuple[Slot, ...]
    html_skeleton: str


@dataclass
class SynthPage:
    page_id: str
    html: str
    ground_truth_md: str
    render_status: RenderStatus = RenderStatus.PENDING
    blocks: tuple[ContentBlock, ...] = ()


@dataclass(frozen=True)
class FilterRules:
    max_block_chars: int = 2000
    min_blocks: int = 1
    max_blocks: int = 32
    require_nonempty: bool = True
    require_image_files: bool = False
    image_root: str | None = None


# ---------------------------------------------------------------------------
# Canonical block forms


def _canon_text(payload: str) -> str:
    return " ".join(payload.split())


def _canon_formula(payload: str) -> str:
    return " ".join(payload.replace("$", "").split())


def _table_grid(payload: str) -> tuple[list[list[str]], bool]:
    """Parse a pipe-table payload into (rows, has_header)."""
    rows: list[list[str]] = []
    has_header = False
    for lineno, line in enumerate(payload.strip().split("\n")):
        s = line.strip()
        if not s.startswith("|"):
            continue
        cells = [" ".join(c.replace("|", " ").split()) for c in s.strip("|").split("|")]
        if cells and all(_is_sep_cell(c) for c in cells):
            if len(rows) == 1:
                has_header = True
            continue
        rows.append([" ".join(c.split()) for c in (cell.strip() for cell in s.strip("|").split("|"))])
    # cells must not contain pipes after canonicalization
    rows = [[c.replace("|", " ").strip() for c in row] for row in rows]
    return rows, has_header


def _is_sep_cell(cell: str) -> bool:
    body = cell.strip().strip(":")
    return len(body) >= 1 and set(body) == {"-"}


def _md_table(rows: list[list[str]], has_header: bool) -> str:
    lines = []
    for idx, row in enumerate(rows):
        lines.append("| " + " | ".join(row) + " |")
        if idx == 0 and has_header:
            lines.append("|" + "|".join(" --- " for _ in row) + "|")
    return "\n".join(lines)


def _html_table(rows: list[list[str]], has_header: bool) -> str:
    parts = ["<table>"]
    for idx, row in enumerate(rows):
        tag = "th" if idx == 0 and has_header else "td"
        parts.append("<tr>" + "".join(f"<{tag}>{escape(c)}</{tag}>" for c in row) + "</tr>")
    parts.append("</table>")
    return "".join(parts)


def _canonical_block(block: ContentBlock, slot: Slot) -> ContentBlock:
    if block.kind == "heading":
        return ContentBlock("heading", _canon_text(block.payload), level=slot.level)
    if block.kind == "text":
        return ContentBlock("text", _canon_text(block.payload))
    if block.kind == "formula":
        return ContentBlock("formula", _canon_formula(block.payload))
    if block.kind == "table":
        rows, has_header = _table_grid(block.payload)
        return ContentBlock("table", _md_table(rows, has_header))
    return ContentBlock("image", block.payload.strip())


def _block_md(block: ContentBlock) -> str:
    if block.kind == "heading":
        return "#" * block.level + " " + block.payload
    if block.kind == "text":
        return block.payload
    if block.kind == "formula":
        return "$$" + block.payload + "$$"
    if block.kind == "table":
        return block.payload  # already canonical pipe form
    return f"![]({block.payload})"


def _block_html(block: ContentBlock) -> str:
    if block.kind == "heading":
        return f"<h{block.level}>{escape(block.payload)}</h{block.level}>"
    if block.kind == "text":
        return f"<p>{escape(block.payload)}</p>"
    if block.kind == "formula":
        return f'<div class="formula">{escape(block.payload)}</div>'
    if block.kind == "table":
        rows, has_header = _table_grid(block.payload)
        return _html_table(rows, has_header)
    return f'<figure><img src="{escape(block.payload)}"/></figure>'


# ---------------------------------------------------------------------------
# Instantiation


def instantiate_template(
    template: LayoutTemplate, sample: ContentSample, seed: int
) -> SynthPage:
    """Fill every slot with a sample block of the matching kind.

    When the sample has exactly one block per slot they are used in order
    (kinds must line up); larger pools are drawn from with the seeded RNG.
    Deterministic: identical (template, sample, seed) give identical pages.
    """
    slots = template.slots
    if len(sample.blocks) == len(slots):
        for slot, block in zip(slots, sample.blocks):
            if block.kind != slot.kind:
                raise SlotKindMismatch(
                    f"slot expects {slot.kind!r}, sample block is {block.kind!r}"
                )
        chosen = list(sample.blocks)
    else:
        rng = random.Random(seed)
        remaining = list(sample.blocks)
        chosen = []
        for slot in slots:
            candidates = [b for b in remaining if b.kind == slot.kind]
            if not candidates:
                raise InsufficientContent(
                    f"no remaining {slot.kind!r} block for template "
                    f"{template.template_id!r}"
                )
            pick = candidates[rng.randrange(len(candidates))]
            remaining.remove(pick)
            chosen.append(pick)

    blocks = tuple(_canonical_block(b, s) for b, s in zip(chosen, slots))
    holes = {f"slot_{i}": _block_html(b) for i, b in enumerate(blocks)}
    html = Template(template.html_skeleton).render(**holes)
    ground_truth = "\n\n".join(_block_md(b) for b in blocks)
    return SynthPage(
        page_id=f"{template.template_id}-{seed:06d}",
        html=html,
        ground_truth_md=ground_truth,
        render_status=RenderStatus.PENDING,
        blocks=blocks,
    )


# ---------------------------------------------------------------------------
# Ground-truth extraction (inverse of instantiation)


class _Node:
    __slots__ = ("tag", "attrs", "children", "text")

    def __init__(self, tag: str, attrs: dict[str, str]):
        self.tag = tag
        self.attrs = attrs
        self.children: list[_Node] = []
        self.text: list[str] = []


_VOID_TAGS = {"img", "br", "hr", "meta", "link"}


class _DomParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = _Node("#root", {})
        self.stack = [self.root]

    def handle_starttag(self, tag, attrs):
        node = _Node(tag, dict(attrs))
        self.stack[-1].children.append(node)
        if tag not in _VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        self.stack[-1].children.append(_Node(tag, dict(attrs)))

    def handle_endtag(self, tag):
        for depth in range(len(self.stack) - 1, 0, -1):
            if self.stack[depth].tag == tag:
                del self.stack[depth:]
                break

    def handle_data(self, data):
        self.stack[-1].text.append(data)


def _find_all(node: _Node, tag: str) -> list[_Node]:
    found = []
    for child in node.children:
        if child.tag == tag:
            found.append(child)
        found.extend(_find_all(child, tag))
    return found


def _node_text(node: _Node) -> str:
    parts = list(node.text)
    for child in node.children:
        parts.append(_node_text(child))
    return "".join(parts)


def extract_ground_truth(html: str) -> str:
    """Deterministic HTML -> Markdown mapping over the template grammar:
    h1-h6 become #-headings, p paragraphs, table pipe tables, formula
    containers display math, figures image links."""
    parser = _DomParser()
    parser.feed(html)
    parser.close()
    mains = _find_all(parser.root, "main")
    if not mains:
        raise UnrecognizedStructure("page has no <main> region")
    fragments: list[str] = []
    for section in mains[0].children:
        if section.tag != "section":
            raise UnrecognizedStructure(f"unexpected <{section.tag}> inside <main>")
        for element in section.children:
            fragments.append(_element_md(element))
    return "\n\n".join(fragments)


def _element_md(node: _Node) -> str:
    tag = node.tag
    if tag in ("h1", "h2", "h3", "h4", "h5", "h6"):
        return "#" * int(tag[1]) + " " + _node_text(node)
    if tag == "p":
        return _node_text(node)
    if tag == "div" and "formula" in node.attrs.get("class", ""):
        return "$$" + _node_text(node) + "$$"
    if tag == "figure":
        imgs = _find_all(node, "img")
        if not imgs:
            raise UnrecognizedStructure("figure without <img>")
        return f"![]({imgs[0].attrs.get('src', '')})"
    if tag == "table":
        trs = _find_all(node, "tr")
        all_cells = [c for tr in trs for c in tr.children if c.tag in ("td", "th")]
        if any(_cell_span(c) != (1, 1) for c in all_cells):
            # pipe syntax cannot express spans: keep the table as embedded HTML
            return _serialize_table(node)
        rows = []
        header = False
        for tr in trs:
            cells = [c for c in tr.children if c.tag in ("td", "th")]
            if not rows and cells and all(c.tag == "th" for c in cells):
                header = True
            rows.append([_node_text(c) for c in cells])
        return _md_table(rows, header)
    raise UnrecognizedStructure(f"unexpected <{tag}> content element")


def _cell_span(cell: _Node) -> tuple[int, int]:
    def num(name: str) -> int:
        try:
            return max(1, int(cell.attrs.get(name, "1")))
        except ValueError:
            return 1

    return num("colspan"), num("rowspan")


def _serialize_table(node: _Node) -> str:
    parts = ["<table>"]
    for tr in _find_all(node, "tr"):
        parts.append("<tr>")
        for cell in tr.children:
            if cell.tag not in ("td", "th"):
                continue
            cs, rs = _cell_span(cell)
            attrs = ""
            if cs != 1:
                attrs += f' colspan="{cs}"'
            if rs != 1:
                attrs += f' rowspan="{rs}"'
            parts.append(f"<{cell.tag}{attrs}>{escape(_node_text(cell))}</{cell.tag}>")
        parts.append("</tr>")
    parts.append("</table>")
    return "".join(parts)


# ---------------------------------------------------------------------------
# Filtering and manifests


def filter_pages(pages: list[SynthPage], rules: FilterRules) -> list[SynthPage]:
    """Mark rule violations as Filtered and return the retained pages."""
    retained = []
    for page in pages:
        reasons = _violations(page, rules)
        if reasons:
            page.render_status = RenderStatus.FILTERED
            logger.info("filtered %s: %s", page.page_id, "; ".join(reasons))
        else:
            retained.append(page)
    return retained


def _violations(page: SynthPage, rules: FilterRules) -> list[str]:
    reasons = []
    n = len(page.blocks)
    if n < rules.min_blocks:
        reasons.append(f"too few blocks ({n} < {rules.min_blocks})")
    if n > rules.max_blocks:
        reasons.append(f"too many blocks ({n} > {rules.max_blocks})")
    for i, block in enumerate(page.blocks):
        if rules.require_nonempty and not block.payload.strip():
            reasons.append(f"block {i} empty")
        if len(block.payload) > rules.max_block_chars:
            reasons.append(f"block {i} over {rules.max_block_chars} chars")
        if (
            rules.require_image_files
            and block.kind == "image"
            and not (Path(rules.image_root or ".") / block.payload).exists()
        ):
            reasons.append(f"block {i} image missing: {block.payload}")
    return reasons


def build_manifest(
    pages: list[SynthPage],
    render_command_template: str,
    output_dir: str | Path,
    format: str = "jsonl",
) -> Path:
    """Write <page_id>.html / <page_id>.md for each page plus a manifest
    listing the files and the render command to produce the page image."""
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        records = []
        for page in sorted(pages, key=lambda p: p.page_id):
            html_path = f"{page.page_id}.html"
            md_path = f"{page.page_id}.md"
            (out / html_path).write_bytes(page.html.encode("utf-8"))
            (out / md_path).write_bytes(page.ground_truth_md.encode("utf-8"))
            records.append(
                {
                    "page_id": page.page_id,
                    "html_path": html_path,
                    "gt_md_path": md_path,
                    "render_cmd": render_command_template.format(
                        html_path=html_path, png_path=f"{page.page_id}.png"
                    ),
                    "status": page.render_status.value,
                }
            )
        if format == "csv":
            manifest = out / "manifest.csv"
            fields = ["page_id", "html_path", "gt_md_path", "render_cmd", "status"]
            lines = [",".join(fields)]
            for rec in records:
                lines.append(",".join('"%s"' % rec[f].replace('"', '""') for f in fields))
            manifest.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
        else:
            manifest = out / "manifest.jsonl"
            manifest.write_bytes(
                "".join(
                    json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n"
                    for rec in records
                ).encode("utf-8")
            )
        return manifest
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


# ---------------------------------------------------------------------------
# Built-in template family and content sampling


_PAGE_CSS = """
body { font-family: Georgia, serif; margin: 24px; background: #fff; }
main { display: flex; gap: 24px; }
section.col { flex: 1 1 0; min-width: 0; }
h1, h2, h3 { margin: 0.4em 0; }
p { margin: 0.5em 0; text-align: justify; }
table { border-collapse: collapse; margin: 0.6em 0; }
td, th { border: 1px solid #444; padding: 3px 7px; font-size: 90%; }
div.formula { text-align: center; margin: 0.8em 0; font-style: italic; }
figure { margin: 0.6em 0; }
figure img { max-width: 100%; }
""".strip()


def _skeleton(columns: list[int]) -> str:
    """Skeleton with one hole per slot, slots distributed over column
    sections in reading order (sections appear in document order)."""
    parts = [
        "<!DOCTYPE html>",
        "<html>",
        "<head>",
        '<meta charset="utf-8"/>',
        f"<style>{_PAGE_CSS}</style>",
        "</head>",
        "<body>",
        f'<main class="layout-{len(columns)}col">',
    ]
    slot = 0
    for count in columns:
        parts.append('<section class="col">')
        for _ in range(count):
            parts.append("{{ slot_%d }}" % slot)
            slot += 1
        parts.append("</section>")
    parts.extend(["</main>", "</body>", "</html>"])
    return "\n".join(parts)


def builtin_templates() -> list[LayoutTemplate]:
    t = Slot
    return [
        LayoutTemplate(
            template_id="one-col",
            columns=1,
            slots=(t("heading", 1), t("text"), t("table"), t("text"), t("formula"), t("text")),
            html_skeleton=_skeleton([6]),
        ),
        LayoutTemplate(
            template_id="two-col",
            columns=2,
            slots=(t("heading", 1), t("text"), t("formula"), t("text"), t("table"), t("text")),
            html_skeleton=_skeleton([3, 3]),
        ),
        LayoutTemplate(
            template_id="three-col",
            columns=3,
            slots=(t("heading", 2), t("text"), t("text"), t("table"), t("text"), t("formula")),
            html_skeleton=_skeleton([2, 2, 2]),
        ),
    ]


_WORDS = (
    "analysis budget contract domain element figure gradient horizon index "
    "journal kernel ledger margin notice outline policy quarter revenue survey "
    "transit update vector window yield archive balance council detail"
).split()

_FORMULA_PARTS = ("x^2 + y^2", "e^{i\\pi} + 1", "\\sum_k a_k", "\\int f(t) dt", "\\alpha \\beta")


def sample_content(rng: random.Random, tag: str = "generated") -> ContentSample:
    """Random pool of blocks large enough for any builtin template."""

    def sentence(n: int) -> str:
        words = [rng.choice(_WORDS) for _ in range(n)]
        return (" ".join(words)).capitalize() + "."

    blocks: list[ContentBlock] = []
    for _ in range(2):
        blocks.append(ContentBlock("heading", " ".join(rng.choice(_WORDS) for _ in range(3)).title()))
    for _ in range(6):
        blocks.append(ContentBlock("text", " ".join(sentence(rng.randrange(6, 14)) for _ in range(rng.randrange(1, 4)))))
    for _ in range(2):
        cols = rng.randrange(2, 5)
        body = rng.randrange(1, 4)
        header = "| " + " | ".join(rng.choice(_WORDS) for _ in range(cols)) + " |"
        sep = "|" + "|".join(" --- " for _ in range(cols)) + "|"
        rows = [
            "| " + " | ".join(str(rng.randrange(0, 1000)) for _ in range(cols)) + " |"
            for _ in range(body)
        ]
        blocks.append(ContentBlock("table", "\n".join([header, sep, *rows])))
    for _ in range(2):
        blocks.append(ContentBlock("formula", f"{rng.choice(_FORMULA_PARTS)} = {rng.randrange(1, 99)}"))
    return ContentSample(blocks=tuple(blocks), source_tag=tag)


def generate_pages(
    count: int,
    seed: int,
    templates: list[LayoutTemplate] | None = None,
) -> list[SynthPage]:
    """Deterministically generate `count` pages cycling over templates."""
    templates = templates or builtin_templates()
    pages = []
    for k in range(count):
        template = templates[k % len(templates)]
        page_seed = seed + k
        sample = sample_content(random.Random(f"{seed}:{k}:content"), tag=f"pool-{seed}")
        pages.append(instantiate_template(template, sample, page_seed))
    return pages


# ---------------------------------------------------------------------------
# File loaders (external template/content directories)


def load_templates(directory: str | Path) -> list[LayoutTemplate]:
    templates = []
    for path in sorted(Path(directory).glob("*.json")):
        raw = json.loads(path.read_text(encoding="utf-8"))
        templates.append(
            LayoutTemplate(
                template_id=str(raw["template_id"]),
                columns=int(raw["columns"]),
                slots=tuple(
                    Slot(kind=str(s["kind"]), level=int(s.get("level", 1)))
                    for s in raw["slots"]
                ),
                html_skeleton=str(raw["html_skeleton"]),
            )
        )
    return templates


def load_content(directory: str | Path) -> list[ContentSample]:
    samples = []
    for path in sorted(Path(directory).glob("*.json")):
        raw = json.loads(path.read_text(encoding="utf-8"))
        samples.append(
            ContentSample(
                blocks=tuple(
                    ContentBlock(
                        kind=str(b["kind"]),
                        payload=str(b["payload"]),
                        level=int(b.get("level", 1)),
                    )
                    for b in raw["blocks"]
                ),
                source_tag=str(raw.get("source_tag", path.stem)),
            )
        )
    return samples
