#!/usr/bin/env python3
"""Measure reward latency for rollout-style groups at several document sizes.

Reports per-request wall time for a group of candidates scored against one
reference, library path only (HTTP adds ~1 ms on loopback).
"""

import argparse
import random
import statistics
import time

from docreward.reward import multi_aspect_reward
from docreward.text_distance import warmup


def make_doc(rng: random.Random, n_segments: int, seg_len: int) -> str:
    segs = (
        "".join(rng.choice("abcdefgh ijklmnopqrstuvwxyz") for _ in range(seg_len))
        for _ in range(n_segments)
    )
    return "".join(f"<ele>{s}</ele>" for s in segs)


def corrupt(rng: random.Random, doc: str) -> str:
    chars = list(doc)
    for _ in range(max(1, len(chars) // 100)):
        pos = rng.randrange(len(chars))
        if chars[pos] not in "<>/el":
            chars[pos] = rng.choice("XYZ")
    return "".join(chars)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--group", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    warmup()
    rng = random.Random(1)
    for n_segments, seg_len in [(10, 60), (40, 120), (40, 250), (80, 120)]:
        reference = make_doc(rng, n_segments, seg_len)
        candidates = [corrupt(rng, reference) for _ in range(args.group)]
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            for cand in candidates:
                multi_aspect_reward(cand, reference)
            times.append((time.perf_counter() - t0) * 1000)
        label = f"{n_segments} segs x {seg_len} chars (~{len(reference) // 1024} KB)"
        print(
            f"{label:36s} group of {args.group}: "
            f"median {statistics.median(times):7.2f} ms  min {min(times):7.2f} ms"
        )
    return 0


if __name__ == "__main__":
    import sys

    sys.exit(main())
