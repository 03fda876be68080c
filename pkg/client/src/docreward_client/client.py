"""Client for the reward service's /v1 endpoints.

The client performs no reward math of its own: responses are returned as the
server sent them, fields unrenamed, so training logs always reflect the
single server-side source of truth.  Instances are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import httpx

from .errors import ConnectionError, SchemaError, ServerRejected

_RETRY_BACKOFF_S = 0.05


@dataclass(frozen=True)
class ClientConfig:
    base_url: str
    timeout_s: float = 10.0
    retries: int = 2  # connection-level failures only; requests are idempotent
    max_batch: int = 64

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")


def dumps(payload) -> str:
    """Serializer matching the server's JSON byte layout (compact separators,
    unescaped non-ASCII), so parse -> dumps round-trips are byte-stable."""
    return json.dumps(payload, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


class RewardClient:
    def __init__(self, config: ClientConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._http = httpx.Client(
            base_url=config.base_url,
            timeout=config.timeout_s,
            transport=transport,
        )

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "RewardClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- endpoints

    def reward_group(
        self,
        reference: str,
        candidates: list[str],
        overrides: dict | None = None,
        mode: str | None = None,
        compute_advantages: bool = True,
    ) -> dict:
        """Score a rollout group; returns the server payload verbatim:
        {breakdowns, advantages, latency_ms, config}."""
        if not candidates:
            raise ValueError("candidates must be non-empty")
        if len(candidates) > self.config.max_batch:
            raise ValueError(
                f"{len(candidates)} candidates over max_batch {self.config.max_batch}"
            )
        body: dict = {
            "reference": reference,
            "candidates": list(candidates),
            "compute_advantages": compute_advantages,
        }
        if overrides is not None:
            body["config"] = overrides
        if mode is not None:
            body["mode"] = mode
        payload = self._request("POST", "/v1/reward", body)
        if not isinstance(payload, dict) or "breakdowns" not in payload:
            raise SchemaError("reward response missing 'breakdowns'")
        if len(payload["breakdowns"]) != len(candidates):
            raise SchemaError(
                f"{len(payload['breakdowns'])} breakdowns for {len(candidates)} candidates"
            )
        return payload

    def evaluate(self, records: list[dict], group_by: str | None = None) -> dict:
        """Run the server-side benchmark evaluation over raw record dicts."""
        if not records:
            raise ValueError("records must be non-empty")
        if len(records) > self.config.max_batch:
            raise ValueError(f"{len(records)} records over max_batch {self.config.max_batch}")
        body: dict = {"records": list(records)}
        if group_by is not None:
            body["group_by"] = group_by
        payload = self._request("POST", "/v1/evaluate", body)
        if not isinstance(payload, dict) or "per_doc" not in payload:
            raise SchemaError("evaluate response missing 'per_doc'")
        return payload

    def health(self) -> dict:
        payload = self._request("GET", "/v1/health", None)
        if not isinstance(payload, dict) or "status" not in payload:
            raise SchemaError("health response missing 'status'")
        return payload

    # -- transport

    def _request(self, method: str, path: str, body: dict | None):
        attempts = self.config.retries + 1
        last_exc: Exception | None = None
        for attempt in range(attempts):
            try:
                response = self._http.request(
                    method, path, json=body if body is not None else None
                )
            except (httpx.ConnectError, httpx.ConnectTimeout) as exc:
                last_exc = exc
                if attempt + 1 < attempts:
                    time.sleep(_RETRY_BACKOFF_S * (attempt + 1))
                continue
            except httpx.HTTPError as exc:
                # non-connection transport failure: do not retry blindly
                raise ConnectionError(str(exc)) from exc
            if response.status_code >= 300:
                raise ServerRejected(response.status_code, response.text[:500])
            try:
                return response.json()
            except ValueError as exc:
                raise SchemaError(f"response is not JSON: {exc}") from exc
        raise ConnectionError(
            f"{method} {path} failed after {attempts} attempts: {last_exc}"
        ) from last_exc
