import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docreward.errors import MalformedTags
from docreward.segmenter import (
    DEFAULT_POLICY,
    RAW_POLICY,
    Kind,
    NormalizationPolicy,
    SourceMode,
    classify_block,
    normalize_text,
    segment_markdown,
)
from oracles import segment_blocks_reference

SIX_BLOCK_FIXTURE = """Intro paragraph text.

| a | b |
| 1 | 2 |

Middle text block.

$$E = mc^2$$

```python
print(1)
```

Closing text."""


class TestEleTagged:
    def test_two_regions(self):
        doc = segment_markdown("<ele>Alpha</ele>\n<ele>Beta</ele>", SourceMode.ELE_TAGGED)
        assert [s.text for s in doc.segments] == ["Alpha", "Beta"]
        assert [s.kind for s in doc.segments] == [Kind.TEXT, Kind.TEXT]

    def test_empty_source_is_empty_document(self):
        doc = segment_markdown("", SourceMode.ELE_TAGGED)
        assert len(doc) == 0

    def test_stray_text_discarded_and_counted(self):
        doc = segment_markdown(
            "noise <ele>kept</ele> more noise", SourceMode.ELE_TAGGED
        )
        assert doc.texts() == ["kept"]
        assert doc.stray_chars == len("noise") + len("morenoise")

    def test_empty_region_is_a_segment(self):
        doc = segment_markdown("<ele></ele><ele>x</ele>", SourceMode.ELE_TAGGED)
        assert len(doc) == 2

    @pytest.mark.parametrize(
        "source",
        [
            "<ele>unclosed",
            "closed</ele>",
            "<ele>a<ele>b</ele></ele>",
            "<ele>a</ele></ele>",
        ],
    )
    def test_malformed_tags(self, source):
        with pytest.raises(MalformedTags):
            segment_markdown(source, SourceMode.ELE_TAGGED)

    def test_tags_are_case_sensitive_and_attribute_free(self):
        # <ELE> and <ele class=x> are not protocol tags: their text is stray
        doc = segment_markdown("<ELE>a</ELE><ele>b</ele>", SourceMode.ELE_TAGGED)
        assert doc.texts() == ["b"]
        assert doc.stray_chars > 0

    def test_region_kind_classification(self):
        doc = segment_markdown(
            "<ele># Head</ele><ele>| a |\n| 1 |</ele><ele>$$x$$</ele>",
            SourceMode.ELE_TAGGED,
        )
        assert [s.kind for s in doc.segments] == [Kind.HEADING, Kind.TABLE, Kind.FORMULA]


class TestPlainBlocks:
    def test_heading_and_body(self):
        doc = segment_markdown("# Title\n\nBody para.", SourceMode.PLAIN_BLOCKS)
        assert len(doc) == 2
        assert [s.kind for s in doc.segments] == [Kind.HEADING, Kind.TEXT]

    def test_six_block_fixture_matches_reference_segmenter(self):
        expected = segment_blocks_reference(SIX_BLOCK_FIXTURE)
        doc = segment_markdown(SIX_BLOCK_FIXTURE, SourceMode.PLAIN_BLOCKS, RAW_POLICY)
        assert [s.raw for s in doc.segments] == expected
        assert [s.kind for s in doc.segments] == [
            Kind.TEXT,
            Kind.TABLE,
            Kind.TEXT,
            Kind.FORMULA,
            Kind.CODE,
            Kind.TEXT,
        ]

    def test_atomic_blocks_with_internal_blank_lines(self):
        source = "before\n\n```\ncode\n\nmore code\n```\n\n| a |\n\n| b |\n\nafter"
        doc = segment_markdown(source, SourceMode.PLAIN_BLOCKS, RAW_POLICY)
        kinds = [s.kind for s in doc.segments]
        assert kinds == [Kind.TEXT, Kind.CODE, Kind.TABLE, Kind.TEXT]
        assert "more code" in doc.segments[1].raw
        assert "| b |" in doc.segments[2].raw

    def test_math_block_multiline(self):
        doc = segment_markdown("$$\na + b\n$$\n\ntext", SourceMode.PLAIN_BLOCKS)
        assert [s.kind for s in doc.segments] == [Kind.FORMULA, Kind.TEXT]

    def test_html_table_block(self):
        source = "<table>\n<tr><td>x</td></tr>\n</table>\n\npara"
        doc = segment_markdown(source, SourceMode.PLAIN_BLOCKS)
        assert [s.kind for s in doc.segments] == [Kind.TABLE, Kind.TEXT]

    def test_empty_source(self):
        assert len(segment_markdown("", SourceMode.PLAIN_BLOCKS)) == 0

    def test_heading_breaks_paragraph(self):
        doc = segment_markdown("# H\nbody", SourceMode.PLAIN_BLOCKS)
        assert [s.kind for s in doc.segments] == [Kind.HEADING, Kind.TEXT]


class TestNormalize:
    def test_collapse_whitespace(self):
        policy = NormalizationPolicy(collapse_whitespace=True)
        assert normalize_text("a  b\t c", policy) == "a b c"

    def test_strip_inline_markup(self):
        policy = NormalizationPolicy(strip_inline_markup=True)
        assert normalize_text("**bold** text", policy) == "bold text"
        assert normalize_text("see [docs](http://x) now", policy) == "see docs now"
        assert normalize_text("![alt](img.png)", policy) == "alt"

    def test_identity_on_plain_ascii(self):
        assert normalize_text("x", DEFAULT_POLICY) == "x"

    def test_all_off_is_identity(self):
        weird = "a  *b*\t[c](d)\n\né"
        assert normalize_text(weird, RAW_POLICY) == weird

    def test_heading_markers_survive(self):
        assert normalize_text("## Results", DEFAULT_POLICY) == "## Results"

    @given(st.text(max_size=200))
    @settings(max_examples=200, deadline=None)
    def test_idempotent_default(self, s):
        once = normalize_text(s, DEFAULT_POLICY)
        assert normalize_text(once, DEFAULT_POLICY) == once

    @given(st.text(max_size=200))
    @settings(max_examples=200, deadline=None)
    def test_idempotent_all_options(self, s):
        policy = NormalizationPolicy(
            unicode_form="NFC",
            collapse_whitespace=True,
            strip_inline_markup=True,
            lowercase=True,
        )
        once = normalize_text(s, policy)
        assert normalize_text(once, policy) == once


class TestClassify:
    @pytest.mark.parametrize(
        "raw,kind",
        [
            ("| a | b |\n|---|---|\n| 1 | 2 |", Kind.TABLE),
            ("$$E=mc^2$$", Kind.FORMULA),
            ("\\[x + y\\]", Kind.FORMULA),
            ("## Results", Kind.HEADING),
            ("###### deep", Kind.HEADING),
            ("####### too deep", Kind.TEXT),
            ("```\n| not a table |\n```", Kind.CODE),
            ("<table><tr><td>1</td></tr></table>", Kind.TABLE),
            ("plain paragraph", Kind.TEXT),
            ("", Kind.TEXT),
            ("$$ spans\nlines $$", Kind.FORMULA),
            ("# multi\nline", Kind.TEXT),
        ],
    )
    def test_kinds(self, raw, kind):
        assert classify_block(raw) is kind


class TestProperties:
    @given(st.lists(st.text(min_size=1, max_size=20).filter(lambda s: "<ele>" not in s and "</ele>" not in s), max_size=12))
    @settings(max_examples=150, deadline=None)
    def test_ele_round_trip_count_and_texts(self, texts):
        source = "".join(f"<ele>{t}</ele>" for t in texts)
        doc = segment_markdown(source, SourceMode.ELE_TAGGED, RAW_POLICY)
        assert len(doc) == len(texts)
        assert [s.raw for s in doc.segments] == texts

    @given(st.text(max_size=400))
    @settings(max_examples=150, deadline=None)
    def test_indices_are_contiguous(self, source):
        doc = segment_markdown(source, SourceMode.PLAIN_BLOCKS)
        assert [s.index for s in doc.segments] == list(range(len(doc)))

    @given(st.data())
    @settings(max_examples=120, deadline=None)
    def test_atomic_blocks_never_split(self, data):
        rng_rows = data.draw(st.integers(2, 5))
        choice = data.draw(st.sampled_from(["code", "table", "math"]))
        if choice == "code":
            inner = "\n\n".join("line%d" % i for i in range(rng_rows))
            block = f"```\n{inner}\n```"
            kind = Kind.CODE
        elif choice == "table":
            block = "\n\n".join("| r%d | v |" % i for i in range(rng_rows))
            kind = Kind.TABLE
        else:
            inner = "\na + b\n" * rng_rows
            block = f"$${inner}$$"
            kind = Kind.FORMULA
        source = f"before text\n\n{block}\n\nafter text"
        doc = segment_markdown(source, SourceMode.PLAIN_BLOCKS, RAW_POLICY)
        assert [s.kind for s in doc.segments] == [Kind.TEXT, kind, Kind.TEXT]
        assert doc.segments[1].raw == block
