"""Benchmark-style end-to-end evaluation: per-document, per-type scores and
grouped aggregates.

Text, formula and reading-order quality are normalized edit distances (lower
is better); tables additionally get TEDS / TEDS-S (higher is better).  Types
absent from a document's ground truth stay absent from its score and are
excluded from every aggregate mean.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MalformedTags, UnknownAttributeKey, UnsupportedFormat
from .matching import hungarian_assign
from .segmenter import (
    DEFAULT_POLICY,
    Document,
    Kind,
    NormalizationPolicy,
    SourceMode,
    segment_markdown,
)
from .table_teds import table_segment_to_html, teds_detail
from .text_distance import ned_matrix, normalized_edit_distance

# single-character separator so segment boundaries cost one edit
SEPARATOR = "\x1f"

_EDIT_FIELDS = ("text_ned", "formula_ned", "table_ned", "read_order_ned")
_ALL_FIELDS = (
    "text_ned",
    "formula_ned",
    "table_ned",
    "table_teds",
    "table_teds_s",
    "read_order_ned",
    "doc_ned",
    "overall_edit",
)


@dataclass(frozen=True)
class EvalRecord:
    doc_id: str
    prediction: str
    ground_truth: str
    attributes: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class DocScore:
    doc_id: str
    text_ned: float | None
    formula_ned: float | None
    table_ned: float | None
    table_teds: float | None
    table_teds_s: float | None
    read_order_ned: float
    doc_ned: float

    @property
    def overall_edit(self) -> float | None:
        present = [
            v
            for v in (self.text_ned, self.formula_ned, self.table_ned, self.read_order_ned)
            if v is not None
        ]
        return sum(present) / len(present) if present else None


@dataclass(frozen=True)
class EvalReport:
    per_doc: tuple[DocScore, ...]
    aggregates: dict[str, dict[str, float]]
    overall: dict[str, float]
    group_by: str | None

    @property
    def overall_edit(self) -> float | None:
        return self.overall.get("overall_edit")


def _segment_auto(
    text: str, policy: NormalizationPolicy, fallback: bool
) -> Document:
    if "<ele>" in text or "</ele>" in text:
        try:
            return segment_markdown(text, SourceMode.ELE_TAGGED, policy)
        except MalformedTags:
            if not fallback:
                raise
    return segment_markdown(text, SourceMode.PLAIN_BLOCKS, policy)


def reading_order_score(reference: Document, prediction: Document) -> float:
    """NED between the text-only concatenations of both sides, in emitted
    order; 0.0 when neither side has text segments."""
    ref = SEPARATOR.join(s.text for s in reference.of_kind(Kind.TEXT))
    pred = SEPARATOR.join(s.text for s in prediction.of_kind(Kind.TEXT))
    return normalized_edit_distance(ref, pred)


def evaluate_document(
    record: EvalRecord,
    policy: NormalizationPolicy = DEFAULT_POLICY,
    fallback_on_malformed: bool = True,
) -> DocScore:
    """Segment both sides and score each content type present in the ground
    truth."""
    ref_doc = _segment_auto(record.ground_truth, policy, fallback=False)
    pred_doc = _segment_auto(record.prediction, policy, fallback=fallback_on_malformed)

    text_ned = _concat_ned(ref_doc, pred_doc, Kind.TEXT, use_raw=False)
    formula_ned = _concat_ned(ref_doc, pred_doc, Kind.FORMULA, use_raw=True)
    table_ned, table_teds, table_teds_s = _table_scores(ref_doc, pred_doc)

    doc_ned = normalized_edit_distance(
        "\n\n".join(ref_doc.texts()), "\n\n".join(pred_doc.texts())
    )
    return DocScore(
        doc_id=record.doc_id,
        text_ned=text_ned,
        formula_ned=formula_ned,
        table_ned=table_ned,
        table_teds=table_teds,
        table_teds_s=table_teds_s,
        read_order_ned=reading_order_score(ref_doc, pred_doc),
        doc_ned=doc_ned,
    )


def _concat_ned(
    ref_doc: Document, pred_doc: Document, kind: Kind, use_raw: bool
) -> float | None:
    ref_segs = ref_doc.of_kind(kind)
    if not ref_segs:
        return None
    pred_segs = pred_doc.of_kind(kind)
    pick = (lambda s: s.raw) if use_raw else (lambda s: s.text)
    return normalized_edit_distance(
        SEPARATOR.join(pick(s) for s in ref_segs),
        SEPARATOR.join(pick(s) for s in pred_segs),
    )


def _table_scores(ref_doc: Document, pred_doc: Document):
    ref_tables = ref_doc.of_kind(Kind.TABLE)
    if not ref_tables:
        return None, None, None
    pred_tables = pred_doc.of_kind(Kind.TABLE)
    # pair tables one-to-one by text similarity before scoring
    matches = hungarian_assign(
        ned_matrix([s.text for s in ref_tables], [s.text for s in pred_tables])
    )
    matched = {i: j for i, j, _ in matches.pairs}
    neds, teds_scores, teds_s_scores = [], [], []
    for i, ref_seg in enumerate(ref_tables):
        j = matched.get(i)
        if j is None:
            neds.append(1.0)
            teds_scores.append(0.0)
            teds_s_scores.append(0.0)
            continue
        pred_seg = pred_tables[j]
        neds.append(normalized_edit_distance(ref_seg.raw, pred_seg.raw))
        gt_html = table_segment_to_html(ref_seg.raw)
        pred_html = table_segment_to_html(pred_seg.raw)
        teds_scores.append(teds_detail(pred_html, gt_html, structure_only=False).score)
        teds_s_scores.append(teds_detail(pred_html, gt_html, structure_only=True).score)
    n = len(ref_tables)
    return sum(neds) / n, sum(teds_scores) / n, sum(teds_s_scores) / n


# ---------------------------------------------------------------------------
# Aggregation


def _mean_scores(scores: list[DocScore]) -> dict[str, float]:
    out: dict[str, float] = {}
    for name in _ALL_FIELDS:
        values = [
            getattr(s, name) if name != "overall_edit" else s.overall_edit
            for s in scores
        ]
        present = [v for v in values if v is not None]
        if present:
            out[name] = sum(present) / len(present)
    out["count"] = len(scores)
    return out


def aggregate(
    scores: list[DocScore],
    records: list[EvalRecord],
    group_by: str | None = None,
) -> EvalReport:
    """Arithmetic means over present values, overall and per group value."""
    ordered = sorted(scores, key=lambda s: s.doc_id)
    groups: dict[str, list[DocScore]] = {}
    if group_by is not None:
        by_id = {r.doc_id: r for r in records}
        for score in ordered:
            record = by_id.get(score.doc_id)
            if record is None or group_by not in record.attributes:
                raise UnknownAttributeKey(
                    f"record {score.doc_id!r} has no attribute {group_by!r}"
                )
            groups.setdefault(str(record.attributes[group_by]), []).append(score)
    return EvalReport(
        per_doc=tuple(ordered),
        aggregates={k: _mean_scores(v) for k, v in sorted(groups.items())},
        overall=_mean_scores(ordered) if ordered else {"count": 0},
        group_by=group_by,
    )


def evaluate_records(
    records: list[EvalRecord],
    policy: NormalizationPolicy = DEFAULT_POLICY,
    group_by: str | None = None,
    jobs: int = 1,
) -> EvalReport:
    if jobs > 1 and len(records) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(evaluate_document, records, chunksize=8))
    else:
        scores = [evaluate_document(r, policy) for r in records]
    return aggregate(scores, records, group_by)


# ---------------------------------------------------------------------------
# Dataset and report IO


def load_dataset(path: str | Path) -> list[EvalRecord]:
    """Line-delimited records: {doc_id, prediction, ground_truth, attributes}."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                records.append(
                    EvalRecord(
                        doc_id=str(raw["doc_id"]),
                        prediction=str(raw["prediction"]),
                        ground_truth=str(raw["ground_truth"]),
                        attributes={
                            str(k): str(v)
                            for k, v in (raw.get("attributes") or {}).items()
                        },
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"bad dataset record at line {lineno}: {exc}") from exc
    return records


def _score_dict(score: DocScore) -> dict:
    def r4(v):
        return None if v is None else round(v, 4)

    return {
        "doc_id": score.doc_id,
        "text_ned": r4(score.text_ned),
        "formula_ned": r4(score.formula_ned),
        "table_ned": r4(score.table_ned),
        "table_teds": r4(score.table_teds),
        "table_teds_s": r4(score.table_teds_s),
        "read_order_ned": r4(score.read_order_ned),
        "doc_ned": r4(score.doc_ned),
        "overall_edit": r4(score.overall_edit),
    }


def _agg_dict(agg: dict[str, float]) -> dict:
    out = {}
    for name in _ALL_FIELDS:
        out[name] = round(agg[name], 4) if name in agg else None
    out["count"] = int(agg.get("count", 0))
    return out


def emit_report(report: EvalReport, format: str = "json") -> bytes:
    """Deterministic serialization: stable key order, floats at 4 decimals."""
    if format == "json":
        payload = {
            "group_by": report.group_by,
            "overall": _agg_dict(report.overall),
            "aggregates": {k: _agg_dict(v) for k, v in report.aggregates.items()},
            "per_doc": [_score_dict(s) for s in report.per_doc],
        }
        return (
            json.dumps(payload, ensure_ascii=False, separators=(",", ":")) + "\n"
        ).encode("utf-8")
    if format == "csv":
        header = ["doc_id", *_ALL_FIELDS]
        lines = [",".join(header)]
        for s in report.per_doc:
            d = _score_dict(s)
            row = [s.doc_id] + [
                "" if d[f] is None else f"{getattr(s, f) if f != 'overall_edit' else s.overall_edit:.4f}"
                for f in _ALL_FIELDS
            ]
            lines.append(",".join(row))
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "md":
        cols = ["group", *_ALL_FIELDS, "count"]
        lines = [
            "| " + " | ".join(cols) + " |",
            "|" + "|".join("---" for _ in cols) + "|",
        ]

        def row(name: str, agg: dict[str, float]) -> str:
            cells = [name]
            for f in _ALL_FIELDS:
                cells.append(f"{agg[f]:.4f}" if f in agg else "-")
            cells.append(str(int(agg.get("count", 0))))
            return "| " + " | ".join(cells) + " |"

        for name, agg in report.aggregates.items():
            lines.append(row(name, agg))
        lines.append(row("overall", report.overall))
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise UnsupportedFormat(f"unknown report format {format!r}")
