#!/usr/bin/env python3
"""Regenerate the frozen golden files under tests/data/.

Run only when an intentional behavior change invalidates the existing
goldens; inspect the diff before committing.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

from docreward.eval_harness import emit_report, evaluate_records, load_dataset
from docreward.reward import multi_aspect_reward
from docreward.service import breakdown_dict
from docreward.synth_gen import generate_pages

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def eval_dataset() -> list[dict]:
    gt_en = (
        "# Quarterly Report\n\n"
        "Revenue grew in every region.\n\n"
        "| region | growth |\n|---|---|\n| north | 12 |\n| south | 8 |\n\n"
        "$$g = r_1 - r_0$$\n\n"
        "Outlook remains stable."
    )
    pred_typo = gt_en.replace("grew", "grwe").replace("stable", "stble")
    pred_no_table = "\n\n".join(
        b for b in gt_en.split("\n\n") if not b.startswith("| region")
    )
    gt_zh = "# 年度总结\n\n第一段内容。\n\n第二段内容。"
    pred_zh_swapped = "# 年度总结\n\n第二段内容。\n\n第一段内容。"
    gt_slides = "<ele># Deck</ele><ele>bullet one</ele><ele>bullet two</ele>"
    pred_slides_extra = (
        "<ele># Deck</ele><ele>bullet one</ele><ele>bullet two</ele><ele>hallucinated</ele>"
    )
    return [
        {
            "doc_id": "en-perfect",
            "prediction": gt_en,
            "ground_truth": gt_en,
            "attributes": {"language": "EN", "category": "Report"},
        },
        {
            "doc_id": "en-typos",
            "prediction": pred_typo,
            "ground_truth": gt_en,
            "attributes": {"language": "EN", "category": "Report"},
        },
        {
            "doc_id": "en-missing-table",
            "prediction": pred_no_table,
            "ground_truth": gt_en,
            "attributes": {"language": "EN", "category": "Report"},
        },
        {
            "doc_id": "zh-swapped",
            "prediction": pred_zh_swapped,
            "ground_truth": gt_zh,
            "attributes": {"language": "ZH", "category": "Book"},
        },
        {
            "doc_id": "slides-extra-segment",
            "prediction": pred_slides_extra,
            "ground_truth": gt_slides,
            "attributes": {"language": "EN", "category": "Slides"},
        },
    ]


def reward_cases(count: int = 50) -> list[dict]:
    """Rollout-style cases: tagged references plus corrupted candidates."""
    rng = random.Random(2024)
    pages = generate_pages(count, seed=77)
    cases = []
    for k, page in enumerate(pages):
        blocks = page.ground_truth_md.split("\n\n")
        reference = "".join(f"<ele>{b}</ele>" for b in blocks)
        corrupted = list(blocks)
        kind = k % 5
        if kind == 1 and len(corrupted) >= 2:  # swap two segments
            i, j = rng.sample(range(len(corrupted)), 2)
            corrupted[i], corrupted[j] = corrupted[j], corrupted[i]
        elif kind == 2:  # drop a segment
            corrupted.pop(rng.randrange(len(corrupted)))
        elif kind == 3:  # character noise
            victim = rng.randrange(len(corrupted))
            chars = list(corrupted[victim])
            for _ in range(max(1, len(chars) // 12)):
                chars[rng.randrange(len(chars))] = rng.choice("qzX#")
            corrupted[victim] = "".join(chars)
        elif kind == 4:  # spurious extra segment
            corrupted.insert(rng.randrange(len(corrupted) + 1), "spurious block")
        candidate = "".join(f"<ele>{b}</ele>" for b in corrupted)
        breakdown = multi_aspect_reward(candidate, reference)
        cases.append(
            {
                "case_id": f"case-{k:03d}",
                "reference": reference,
                "candidate": candidate,
                "breakdown": breakdown_dict(breakdown),
            }
        )
    return cases


def main() -> int:
    DATA.mkdir(parents=True, exist_ok=True)

    records = eval_dataset()
    with open(DATA / "eval_dataset.jsonl", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    report = evaluate_records(load_dataset(DATA / "eval_dataset.jsonl"), group_by="language")
    (DATA / "eval_report_golden.json").write_bytes(emit_report(report, "json"))
    (DATA / "eval_report_golden.csv").write_bytes(emit_report(report, "csv"))
    (DATA / "eval_report_golden.md").write_bytes(emit_report(report, "md"))

    with open(DATA / "reward_golden.jsonl", "w", encoding="utf-8") as fh:
        for case in reward_cases():
            fh.write(json.dumps(case, ensure_ascii=False) + "\n")

    print(f"golden files written under {DATA}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
