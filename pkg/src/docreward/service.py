"""HTTP reward service for RL trainers: batch reward + group advantages over
JSON, plus wire access to the evaluation harness.

Every response is a pure function of (request, server config); there is no
per-request state, so any number of requests may be served concurrently and
replayed in any order.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from . import __version__
from .errors import MalformedTags
from .eval_harness import EvalRecord, emit_report, evaluate_records
from .reward import (
    DEFAULT_REWARD_CONFIG,
    OrderDenominator,
    RewardBreakdown,
    RewardConfig,
    group_advantages,
    multi_aspect_reward,
)
from .segmenter import DEFAULT_POLICY, NormalizationPolicy, SourceMode
from .text_distance import warmup

_MODES = {"ele": SourceMode.ELE_TAGGED, "blocks": SourceMode.PLAIN_BLOCKS}


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    max_candidates: int = 64
    max_body_bytes: int = 2 * 1024 * 1024
    reward: RewardConfig = DEFAULT_REWARD_CONFIG
    policy: NormalizationPolicy = DEFAULT_POLICY
    mode: str = "ele"
    config_digest: str = ""


def load_service_config(path: str | Path | None = None) -> ServiceConfig:
    """Build the server config from a JSON file; the digest in /v1/health is
    the sha256 of the file bytes (of the defaults blob when no file given)."""
    if path is None:
        blob = b"{}"
        raw: dict = {}
    else:
        blob = Path(path).read_bytes()
        raw = json.loads(blob.decode("utf-8"))
    reward_raw = raw.get("reward", {})
    policy_raw = raw.get("policy", {})
    reward = RewardConfig(
        w_dist=float(reward_raw.get("w_dist", 1.0)),
        w_count=float(reward_raw.get("w_count", 1.0)),
        w_order=float(reward_raw.get("w_order", 1.0)),
        clamp_count_at_zero=bool(reward_raw.get("clamp_count_at_zero", True)),
        order_denominator=OrderDenominator(
            reward_raw.get("order_denominator", "reference_pairs")
        ),
        min_similarity=reward_raw.get("min_similarity"),
        fallback_to_plain_blocks=bool(reward_raw.get("fallback_to_plain_blocks", False)),
    )
    policy = NormalizationPolicy(
        unicode_form=str(policy_raw.get("unicode_form", "NFC")),
        collapse_whitespace=bool(policy_raw.get("collapse_whitespace", True)),
        strip_inline_markup=bool(policy_raw.get("strip_inline_markup", False)),
        lowercase=bool(policy_raw.get("lowercase", False)),
    )
    return ServiceConfig(
        host=str(raw.get("host", "127.0.0.1")),
        port=int(raw.get("port", 8080)),
        max_candidates=int(raw.get("max_candidates", 64)),
        max_body_bytes=int(raw.get("max_body_bytes", 2 * 1024 * 1024)),
        reward=reward,
        policy=policy,
        mode=str(raw.get("mode", "ele")),
        config_digest=hashlib.sha256(blob).hexdigest(),
    )


# ---------------------------------------------------------------------------
# Wire schemas


class ConfigOverrides(BaseModel):
    w_dist: float | None = None
    w_count: float | None = None
    w_order: float | None = None
    clamp_count_at_zero: bool | None = None
    order_denominator: Literal["reference_pairs", "matched_pairs"] | None = None
    min_similarity: float | None = None
    fallback_to_plain_blocks: bool | None = None


class RewardRequest(BaseModel):
    reference: str
    candidates: list[str] = Field(min_length=1)
    config: ConfigOverrides | None = None
    mode: Literal["ele", "blocks"] | None = None
    compute_advantages: bool = True
    advantage_epsilon: float = Field(default=1e-12, gt=0.0)


class RecordIn(BaseModel):
    doc_id: str
    prediction: str
    ground_truth: str
    attributes: dict[str, str] = Field(default_factory=dict)


class EvaluateRequest(BaseModel):
    records: list[RecordIn] = Field(min_length=1)
    group_by: str | None = None


def breakdown_dict(b: RewardBreakdown) -> dict:
    """Canonical wire form; shared by the CLI so outputs compare bytewise."""
    return {
        "r_dist": b.r_dist,
        "r_count": b.r_count,
        "r_order": b.r_order,
        "total": b.total,
        "n_ref": b.n_ref,
        "n_pred": b.n_pred,
        "n_matched": b.n_matched,
        "inversions": b.inversions,
    }


def _effective_config(base: RewardConfig, overrides: ConfigOverrides | None) -> RewardConfig:
    if overrides is None:
        return base
    fields = overrides.model_dump(exclude_none=True)
    if "order_denominator" in fields:
        fields["order_denominator"] = OrderDenominator(fields["order_denominator"])
    return replace(base, **fields)


def _config_echo(config: RewardConfig, mode: str) -> dict:
    return {
        "w_dist": config.w_dist,
        "w_count": config.w_count,
        "w_order": config.w_order,
        "clamp_count_at_zero": config.clamp_count_at_zero,
        "order_denominator": config.order_denominator.value,
        "min_similarity": config.min_similarity,
        "fallback_to_plain_blocks": config.fallback_to_plain_blocks,
        "mode": mode,
    }


# ---------------------------------------------------------------------------
# App


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    cfg = config or load_service_config(None)
    app = FastAPI(title="docreward", version=__version__)
    started = time.monotonic()
    warmup()

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        length = request.headers.get("content-length")
        if length is not None and int(length) > cfg.max_body_bytes:
            return JSONResponse(
                status_code=413,
                content={"detail": f"body over {cfg.max_body_bytes} bytes"},
            )
        return await call_next(request)

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "uptime_s": time.monotonic() - started,
            "config_digest": cfg.config_digest,
        }

    @app.post("/v1/reward")
    def reward(req: RewardRequest):
        if len(req.candidates) > cfg.max_candidates:
            return JSONResponse(
                status_code=413,
                content={
                    "detail": f"{len(req.candidates)} candidates over limit "
                    f"{cfg.max_candidates}"
                },
            )
        t0 = time.perf_counter()
        effective = _effective_config(cfg.reward, req.config)
        mode_name = req.mode or cfg.mode
        mode = _MODES[mode_name]
        breakdowns = []
        for candidate in req.candidates:
            try:
                breakdowns.append(
                    multi_aspect_reward(candidate, req.reference, effective, cfg.policy, mode)
                )
            except MalformedTags as exc:
                return JSONResponse(status_code=422, content={"detail": str(exc)})
        advantages = None
        if req.compute_advantages:
            advantages = list(
                group_advantages(
                    [b.total for b in breakdowns], req.advantage_epsilon
                ).advantages
            )
        return {
            "breakdowns": [breakdown_dict(b) for b in breakdowns],
            "advantages": advantages,
            "latency_ms": (time.perf_counter() - t0) * 1000.0,
            "config": _config_echo(effective, mode_name),
        }

    @app.post("/v1/evaluate")
    def evaluate(req: EvaluateRequest):
        if len(req.records) > cfg.max_candidates:
            return JSONResponse(
                status_code=413,
                content={
                    "detail": f"{len(req.records)} records over limit {cfg.max_candidates}"
                },
            )
        records = [
            EvalRecord(
                doc_id=r.doc_id,
                prediction=r.prediction,
                ground_truth=r.ground_truth,
                attributes=dict(r.attributes),
            )
            for r in req.records
        ]
        report = evaluate_records(records, cfg.policy, req.group_by)
        return Response(
            content=emit_report(report, "json"), media_type="application/json"
        )

    return app


def serve(config: ServiceConfig) -> None:  # pragma: no cover - process entry point
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="warning")
