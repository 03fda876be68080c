import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from docreward_client import (
    ClientConfig,
    ConnectionError,
    RewardClient,
    SchemaError,
    ServerRejected,
    dumps,
)

GOLDEN = Path(__file__).resolve().parents[2] / "tests" / "data" / "reward_golden.jsonl"


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="session")
def server_url():
    """The real service, started through its CLI (the wire interface is the
    only coupling between this package and the server)."""
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "docreward.cli", "serve", "--port", str(port)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    url = f"http://127.0.0.1:{port}"
    try:
        deadline = time.time() + 60
        while True:
            try:
                if httpx.get(url + "/v1/health", timeout=2).status_code == 200:
                    break
            except httpx.HTTPError:
                pass
            if time.time() > deadline:
                raise RuntimeError("service did not come up")
            time.sleep(0.2)
        yield url
    finally:
        proc.terminate()
        proc.wait(timeout=10)


@pytest.fixture()
def client(server_url):
    with RewardClient(ClientConfig(base_url=server_url)) as c:
        yield c


def strip_latency(payload: dict) -> dict:
    return {k: v for k, v in payload.items() if k != "latency_ms"}


class TestAgainstLiveServer:
    def test_perfect_singleton(self, client):
        ref = "<ele>alpha</ele><ele>beta</ele>"
        payload = client.reward_group(ref, [ref])
        assert payload["breakdowns"][0]["total"] == 3.0
        assert payload["advantages"] == [0.0]

    def test_health(self, client, server_url):
        payload = client.health()
        assert payload["status"] == "ok"
        direct = httpx.get(server_url + "/v1/health").json()
        assert payload["version"] == direct["version"]
        assert payload["config_digest"] == direct["config_digest"]

    def test_golden_suite_matches_direct_http(self, client, server_url):
        # latency_ms is per-call measurement noise; everything else must be
        # byte-identical between the SDK and a raw HTTP call
        cases = [json.loads(line) for line in GOLDEN.read_text().splitlines() if line]
        assert len(cases) == 50
        with httpx.Client(base_url=server_url) as raw:
            for case in cases:
                body = {"reference": case["reference"], "candidates": [case["candidate"]]}
                via_client = client.reward_group(case["reference"], [case["candidate"]])
                direct = raw.post("/v1/reward", json=body).json()
                assert dumps(strip_latency(via_client)) == dumps(strip_latency(direct))
                assert dumps(via_client["breakdowns"][0]) == dumps(case["breakdown"])

    def test_overrides_are_echoed(self, client):
        ref = "<ele>abc</ele>"
        payload = client.reward_group(ref, [ref], overrides={"w_order": 0.0})
        assert payload["config"]["w_order"] == 0.0
        assert payload["breakdowns"][0]["total"] == 2.0

    def test_evaluate_endpoint(self, client):
        payload = client.evaluate(
            [{"doc_id": "d", "prediction": "# T\n\nbody", "ground_truth": "# T\n\nbody"}]
        )
        assert payload["overall"]["overall_edit"] == 0.0

    def test_server_rejection_is_typed_and_not_retried(self, client):
        with pytest.raises(ServerRejected) as exc_info:
            client.reward_group("ref", ["<ele>unclosed"])
        assert exc_info.value.status == 422

    def test_serializer_round_trip_is_byte_stable(self, client, server_url):
        raw = httpx.get(server_url + "/v1/health")
        assert dumps(json.loads(raw.text)) == raw.text


class TestPreconditions:
    def test_empty_candidates(self, server_url):
        with RewardClient(ClientConfig(base_url=server_url)) as c:
            with pytest.raises(ValueError):
                c.reward_group("ref", [])

    def test_max_batch_enforced_client_side(self):
        c = RewardClient(ClientConfig(base_url="http://127.0.0.1:1", max_batch=2))
        with pytest.raises(ValueError):
            c.reward_group("ref", ["a", "b", "c"])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ClientConfig(base_url="http://x", timeout_s=0)
        with pytest.raises(ValueError):
            ClientConfig(base_url="http://x", retries=-1)


class TestFailurePaths:
    def test_connection_error_after_retries(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            raise httpx.ConnectError("refused")

        client = RewardClient(
            ClientConfig(base_url="http://test", retries=2),
            transport=httpx.MockTransport(handler),
        )
        with pytest.raises(ConnectionError):
            client.reward_group("ref", ["cand"])
        assert len(attempts) == 3  # initial try + 2 retries

    def test_dead_port_raises_connection_error(self):
        port = free_port()  # nothing listens here
        client = RewardClient(
            ClientConfig(base_url=f"http://127.0.0.1:{port}", timeout_s=1, retries=1)
        )
        with pytest.raises(ConnectionError):
            client.health()

    def test_no_retry_on_4xx(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            return httpx.Response(400, json={"detail": "bad"})

        client = RewardClient(
            ClientConfig(base_url="http://test", retries=5),
            transport=httpx.MockTransport(handler),
        )
        with pytest.raises(ServerRejected):
            client.reward_group("ref", ["cand"])
        assert len(attempts) == 1

    def test_schema_error_on_garbage(self):
        def handler(request):
            return httpx.Response(200, content=b"not json")

        client = RewardClient(
            ClientConfig(base_url="http://test"), transport=httpx.MockTransport(handler)
        )
        with pytest.raises(SchemaError):
            client.health()

    def test_schema_error_on_missing_fields(self):
        def handler(request):
            return httpx.Response(200, json={"unexpected": True})

        client = RewardClient(
            ClientConfig(base_url="http://test"), transport=httpx.MockTransport(handler)
        )
        with pytest.raises(SchemaError):
            client.reward_group("ref", ["cand"])
