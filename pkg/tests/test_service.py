import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from conftest import DATA_DIR, random_tagged_doc
from docreward.eval_harness import emit_report, evaluate_records, load_dataset
from docreward.reward import multi_aspect_reward
from docreward.service import breakdown_dict, create_app, load_service_config


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def compact(obj) -> bytes:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")).encode()


class TestHealth:
    def test_ok(self, client):
        r = client.get("/v1/health")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert body["uptime_s"] >= 0
        assert len(body["config_digest"]) == 64

    def test_digest_is_hash_of_config_file(self, tmp_path):
        path = tmp_path / "svc.json"
        blob = json.dumps({"max_candidates": 8}).encode()
        path.write_bytes(blob)
        cfg = load_service_config(path)
        assert cfg.config_digest == hashlib.sha256(blob).hexdigest()
        assert cfg.max_candidates == 8
        r = TestClient(create_app(cfg)).get("/v1/health")
        assert r.json()["config_digest"] == cfg.config_digest

    def test_health_responds_during_reward_load(self, client):
        big = random_tagged_doc(random.Random(0), 30, seg_len=120)
        with ThreadPoolExecutor(max_workers=4) as pool:
            slow = pool.submit(
                client.post,
                "/v1/reward",
                json={"reference": big, "candidates": [big] * 8},
            )
            health = [pool.submit(client.get, "/v1/health") for _ in range(5)]
            assert all(h.result().status_code == 200 for h in health)
            assert slow.result().status_code == 200


class TestReward:
    def test_perfect_singleton(self, client):
        ref = "<ele>alpha</ele><ele>beta</ele><ele>gamma</ele>"
        r = client.post("/v1/reward", json={"reference": ref, "candidates": [ref]})
        assert r.status_code == 200
        body = r.json()
        assert body["breakdowns"][0]["total"] == 3.0
        assert body["advantages"] == [0.0]
        assert body["latency_ms"] >= 0
        assert body["config"]["w_dist"] == 1.0

    def test_reference_and_empty_candidate(self, client):
        ref = "<ele>aaa</ele><ele>bbb</ele><ele>ccc</ele>"
        r = client.post("/v1/reward", json={"reference": ref, "candidates": [ref, ""]})
        body = r.json()
        totals = [b["total"] for b in body["breakdowns"]]
        assert totals == [3.0, 1.0]
        assert body["advantages"][0] == pytest.approx(1.0, abs=1e-5)
        assert body["advantages"][1] == pytest.approx(-1.0, abs=1e-5)

    def test_empty_candidates_is_400(self, client):
        assert (
            client.post("/v1/reward", json={"reference": "x", "candidates": []}).status_code
            == 400
        )

    def test_schema_violation_is_400(self, client):
        assert client.post("/v1/reward", json={"candidates": ["x"]}).status_code == 400
        assert (
            client.post("/v1/reward", json={"reference": 5, "candidates": ["x"]}).status_code
            == 400
        )

    def test_candidate_count_limit_is_413(self, client):
        r = client.post("/v1/reward", json={"reference": "x", "candidates": ["y"] * 65})
        assert r.status_code == 413

    def test_body_size_limit_is_413(self, client):
        huge = "z" * (2 * 1024 * 1024 + 10)
        r = client.post("/v1/reward", json={"reference": huge, "candidates": ["y"]})
        assert r.status_code == 413

    def test_malformed_tags_is_422_without_fallback(self, client):
        r = client.post(
            "/v1/reward", json={"reference": "<ele>a</ele>", "candidates": ["<ele>open"]}
        )
        assert r.status_code == 422

    def test_fallback_override_rescues_malformed(self, client):
        r = client.post(
            "/v1/reward",
            json={
                "reference": "<ele>a</ele>",
                "candidates": ["<ele>open"],
                "config": {"fallback_to_plain_blocks": True},
            },
        )
        assert r.status_code == 200
        assert r.json()["config"]["fallback_to_plain_blocks"] is True

    def test_mode_override(self, client):
        text = "# H\n\npara"
        r = client.post(
            "/v1/reward",
            json={"reference": text, "candidates": [text], "mode": "blocks"},
        )
        assert r.json()["breakdowns"][0]["total"] == 3.0

    def test_weight_override_changes_total(self, client):
        ref = "<ele>abc</ele>"
        r = client.post(
            "/v1/reward",
            json={"reference": ref, "candidates": [ref], "config": {"w_order": 0.0}},
        )
        assert r.json()["breakdowns"][0]["total"] == 2.0

    def test_matches_library_bytes(self, client):
        rng = random.Random(77)
        for _ in range(10):
            ref = random_tagged_doc(rng, rng.randrange(1, 6))
            cand = random_tagged_doc(rng, rng.randrange(0, 6))
            want = breakdown_dict(multi_aspect_reward(cand, ref))
            got = client.post(
                "/v1/reward", json={"reference": ref, "candidates": [cand]}
            ).json()["breakdowns"][0]
            assert compact(got) == compact(want)


class TestEvaluate:
    def test_single_perfect_record(self, client):
        r = client.post(
            "/v1/evaluate",
            json={
                "records": [
                    {"doc_id": "a", "prediction": "# T\n\nbody", "ground_truth": "# T\n\nbody"}
                ]
            },
        )
        assert r.status_code == 200
        assert r.json()["overall"]["overall_edit"] == 0.0

    def test_bytes_match_direct_emit(self, client):
        records = load_dataset(DATA_DIR / "eval_dataset.jsonl")
        payload = {
            "records": [
                {
                    "doc_id": r.doc_id,
                    "prediction": r.prediction,
                    "ground_truth": r.ground_truth,
                    "attributes": r.attributes,
                }
                for r in records
            ],
            "group_by": "language",
        }
        r = client.post("/v1/evaluate", json=payload)
        want = emit_report(evaluate_records(records, group_by="language"), "json")
        assert r.content == want
        assert r.content == (DATA_DIR / "eval_report_golden.json").read_bytes()

    def test_oversize_batch_is_413(self, client):
        rec = {"doc_id": "a", "prediction": "x", "ground_truth": "x"}
        r = client.post("/v1/evaluate", json={"records": [rec] * 65})
        assert r.status_code == 413

    def test_empty_records_is_400(self, client):
        assert client.post("/v1/evaluate", json={"records": []}).status_code == 400


class TestStatelessness:
    def test_randomized_concurrent_replay(self, client):
        rng = random.Random(13)
        requests = []
        for _ in range(12):
            ref = random_tagged_doc(rng, rng.randrange(1, 5))
            cands = [random_tagged_doc(rng, rng.randrange(0, 5)) for _ in range(rng.randrange(1, 4))]
            requests.append({"reference": ref, "candidates": cands})

        def strip_latency(body: dict) -> dict:
            return {k: v for k, v in body.items() if k != "latency_ms"}

        solo = [strip_latency(client.post("/v1/reward", json=q).json()) for q in requests]
        with ThreadPoolExecutor(max_workers=8) as pool:
            futures = [
                pool.submit(client.post, "/v1/reward", json=requests[i % len(requests)])
                for i in range(48)
            ]
            for i, fut in enumerate(futures):
                assert strip_latency(fut.result().json()) == solo[i % len(requests)]
