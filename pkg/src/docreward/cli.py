"""Command-line front door: segment, reward, evaluate, synth and serve.

Exit codes: 0 success, 1 input/usage error, 2 internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DocRewardError
from .eval_harness import emit_report, evaluate_records, load_dataset
from .reward import OrderDenominator, RewardConfig, multi_aspect_reward
from .segmenter import NormalizationPolicy, SourceMode, segment_markdown
from .service import breakdown_dict, load_service_config, serve
from .synth_gen import (
    FilterRules,
    build_manifest,
    builtin_templates,
    filter_pages,
    generate_pages,
    instantiate_template,
    load_content,
    load_templates,
)

_MODES = {"ele": SourceMode.ELE_TAGGED, "blocks": SourceMode.PLAIN_BLOCKS}

DEFAULT_RENDER_CMD = "chromium --headless --window-size=1240,1754 --screenshot={png_path} {html_path}"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # print help + exit 1 instead of argparse's exit 2
        raise _UsageError(message)


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _add_policy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--no-nfc", action="store_true", help="skip NFC normalization")
    parser.add_argument(
        "--keep-whitespace", action="store_true", help="do not collapse whitespace"
    )
    parser.add_argument(
        "--strip-inline-markup", action="store_true", help="drop emphasis and link syntax"
    )
    parser.add_argument("--lowercase", action="store_true", help="casefold text")


def _policy(args) -> NormalizationPolicy:
    return NormalizationPolicy(
        unicode_form="none" if args.no_nfc else "NFC",
        collapse_whitespace=not args.keep_whitespace,
        strip_inline_markup=args.strip_inline_markup,
        lowercase=args.lowercase,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="docreward", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="split markdown into typed segments")
    p.add_argument("--input", required=True, help="file path or - for stdin")
    p.add_argument("--mode", choices=sorted(_MODES), default="blocks")
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("reward", help="score one prediction against a reference")
    p.add_argument("--pred", required=True, help="file path or - for stdin")
    p.add_argument("--ref", required=True)
    p.add_argument("--mode", choices=sorted(_MODES), default="ele")
    p.add_argument("--w-dist", type=float, default=1.0)
    p.add_argument("--w-count", type=float, default=1.0)
    p.add_argument("--w-order", type=float, default=1.0)
    p.add_argument("--no-clamp-count", action="store_true")
    p.add_argument(
        "--order-denominator",
        choices=["reference_pairs", "matched_pairs"],
        default="reference_pairs",
    )
    p.add_argument("--min-similarity", type=float, default=None)
    p.add_argument(
        "--fallback", action="store_true", help="fall back to block segmentation on bad tags"
    )
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_reward)

    p = sub.add_parser("evaluate", help="run benchmark evaluation over a dataset")
    p.add_argument("--dataset", required=True, help="line-delimited records file")
    p.add_argument("--group-by", default=None)
    p.add_argument("--format", choices=["json", "csv", "md"], default="json")
    p.add_argument("--out", default="-", help="output path or - for stdout")
    p.add_argument("--jobs", type=int, default=1)
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("synth", help="generate aligned synthetic pages + manifest")
    p.add_argument("--templates", default=None, help="directory of template json files")
    p.add_argument("--content", default=None, help="directory of content sample json files")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--render-cmd", default=DEFAULT_RENDER_CMD)
    p.add_argument("--manifest-format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--max-block-chars", type=int, default=2000)
    p.add_argument("--max-blocks", type=int, default=32)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("serve", help="run the reward service")
    p.add_argument("--config", default=None, help="service config json")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def _cmd_segment(args) -> int:
    doc = segment_markdown(_read(args.input), _MODES[args.mode], _policy(args))
    payload = {
        "source_mode": doc.source_mode.value,
        "stray_chars": doc.stray_chars,
        "segments": [
            {"index": s.index, "kind": s.kind.value, "raw": s.raw, "text": s.text}
            for s in doc.segments
        ],
    }
    print(_dumps(payload))
    return 0


def _cmd_reward(args) -> int:
    config = RewardConfig(
        w_dist=args.w_dist,
        w_count=args.w_count,
        w_order=args.w_order,
        clamp_count_at_zero=not args.no_clamp_count,
        order_denominator=OrderDenominator(args.order_denominator),
        min_similarity=args.min_similarity,
        fallback_to_plain_blocks=args.fallback,
    )
    breakdown = multi_aspect_reward(
        _read(args.pred), _read(args.ref), config, _policy(args), _MODES[args.mode]
    )
    print(_dumps(breakdown_dict(breakdown)))
    return 0


def _cmd_evaluate(args) -> int:
    records = load_dataset(args.dataset)
    report = evaluate_records(records, _policy(args), args.group_by, jobs=args.jobs)
    blob = emit_report(report, args.format)
    if args.out == "-":
        sys.stdout.buffer.write(blob)
        sys.stdout.flush()
    else:
        Path(args.out).write_bytes(blob)
    return 0


def _cmd_synth(args) -> int:
    templates = load_templates(args.templates) if args.templates else builtin_templates()
    if not templates:
        raise DocRewardError(f"no templates found in {args.templates}")
    if args.content:
        samples = load_content(args.content)
        if not samples:
            raise DocRewardError(f"no content samples found in {args.content}")
        pages = [
            instantiate_template(
                templates[k % len(templates)], samples[k % len(samples)], args.seed + k
            )
            for k in range(args.n)
        ]
    else:
        pages = generate_pages(args.n, args.seed, templates)
    rules = FilterRules(max_block_chars=args.max_block_chars, max_blocks=args.max_blocks)
    retained = filter_pages(pages, rules)
    manifest = build_manifest(retained, args.render_cmd, args.out, args.manifest_format)
    print(
        _dumps(
            {
                "generated": len(pages),
                "retained": len(retained),
                "filtered": len(pages) - len(retained),
                "manifest": str(manifest),
            }
        )
    )
    return 0


def _cmd_serve(args) -> int:  # pragma: no cover - long-running process
    config = load_service_config(args.config)
    if args.host is not None or args.port is not None:
        from dataclasses import replace

        config = replace(
            config,
            host=args.host or config.host,
            port=args.port if args.port is not None else config.port,
        )
    serve(config)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (DocRewardError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
