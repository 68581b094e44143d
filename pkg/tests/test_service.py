"""HTTP service endpoints and the published response schema."""

import math

import pytest
from fastapi.testclient import TestClient

from icnl.experiments import golden_sources
from icnl.service import RunResponse, SweepResponse, app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_run_endpoint_bell(client):
    resp = client.post("/run", json={"source": golden_sources()["bell.icl"]})
    assert resp.status_code == 200
    body = resp.json()
    RunResponse.model_validate(body)
    assert body["pair_coefficient"] == 2.0
    kets = {a["ket"]: (a["re"], a["im"]) for a in body["kappa_sector"]}
    assert kets == {"00HH": (1.0, 0.0), "00VV": (1.0, 0.0)}
    assert body["density"]["basis"] == ["HH", "VV"]


def test_run_endpoint_with_overrides(client):
    resp = client.post(
        "/run",
        json={"source": golden_sources()["frustrated.icl"], "overrides": {"PHI": "pi"}},
    )
    assert resp.status_code == 200
    assert resp.json()["pair_coefficient"] == 0.0
    assert resp.json()["kappa_sector"] == []


def test_run_endpoint_oracle(client):
    resp = client.post(
        "/run",
        json={
            "source": golden_sources()["frustrated.icl"],
            "overrides": {"PHI": "pi / 2"},
            "oracle": {"g": 0.01, "alpha": 1.0},
        },
    )
    assert resp.status_code == 200
    oracle = resp.json()["oracle"]
    assert oracle["passed"] is True
    assert oracle["max_deviation"] < 10 * (0.01) ** 2


def test_run_endpoint_diagnostics(client):
    resp = client.post("/run", json={"source": "paths a\nnl a\n"})
    assert resp.status_code == 422
    body = resp.json()
    assert body["diagnostics"][0]["message"] == "nl requires 2 paths"


def test_run_endpoint_runtime_error(client):
    # empty pair sector cannot be post-selected
    resp = client.post(
        "/run",
        json={
            "source": golden_sources()["frustrated.icl"],
            "overrides": {"PHI": "pi"},
            "density": ["s2", "i2"],
        },
    )
    assert resp.status_code == 400


def test_check_endpoint(client):
    resp = client.post("/check", json={"source": golden_sources()["object_id.icl"]})
    assert resp.status_code == 200
    assert resp.json() == {"ok": True, "diagnostics": []}
    resp = client.post("/check", json={"source": ""})
    assert resp.json()["ok"] is False
    assert resp.json()["diagnostics"][0]["message"] == "missing paths declaration"


def test_sweep_endpoint(client):
    resp = client.post("/sweep", json={"source": golden_sources()["frustrated.icl"]})
    assert resp.status_code == 200
    body = SweepResponse.model_validate(resp.json())
    assert body.param == "PHI"
    assert len(body.rows) == 65
    assert body.rows[0].pair_coefficient == 4.0
    assert body.rows[32].pair_coefficient == 0.0
    assert abs(body.rows[32].value - math.pi) < 1e-15


def test_sweep_endpoint_explicit_grid(client):
    resp = client.post(
        "/sweep",
        json={
            "source": golden_sources()["object_id.icl"],
            "param": "GAMMA",
            "values": [0.0, math.pi],
        },
    )
    assert resp.status_code == 200
    assert [row["value"] for row in resp.json()["rows"]] == [0.0, math.pi]


def test_examples_endpoint(client):
    resp = client.get("/examples")
    assert resp.status_code == 200
    assert set(resp.json()["files"]) == set(golden_sources())
