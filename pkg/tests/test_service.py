import pytest
from fastapi.testclient import TestClient

from ttlab.enumeration import catalog
from ttlab.complexes import triple_to_triangulation
from ttlab.service import app

client = TestClient(app)


def test_info():
    data = client.get("/").json()
    assert data["format"] == "ttlab/1"
    assert "/enumerate" in data["endpoints"]


def test_enumerate_endpoint():
    data = client.post("/enumerate", json={"n": 5}).json()
    assert data["total"] == 100
    assert {c["x_power"]: c["count"] for c in data["coefficients"]} == {1: 60, 2: 40}


def test_enumerate_empty_size():
    data = client.post("/enumerate", json={"n": 3}).json()
    assert data["coefficients"] == [] and data["total"] == 0


def test_enumerate_cap_is_rejected():
    assert client.post("/enumerate", json={"n": 8}).status_code == 413
    assert client.post("/enumerate", json={"n": 8, "extended": True}).status_code == 413


def test_series_endpoints():
    h = client.post("/series", json={"family": "H", "order": 3}).json()
    assert h["coefficients"] == [0, 2, 6, 36]
    a = client.post("/series", json={"family": "A", "order": 4}).json()
    assert a["coefficients"] == [0, 0, 2, 8, 100]
    assert abs(a["growth_constant"] - 28.43330) < 1e-4
    m = client.post("/series", json={"family": "M", "order": 4}).json()
    assert {row["n"]: row["coefficients"] for row in m["coefficients"]}[4] == {
        "1": 8,
        "3": 12,
    }


def test_build3d_verify_certify_round_trip():
    tt = catalog(4)[0]
    built = client.post("/build3d", json={"triple": tt.to_json()})
    assert built.status_code == 200
    tri_json = built.json()["triangulation"]
    verdict = client.post("/verify", json={"triangulation": tri_json}).json()
    assert verdict["ok"] and verdict["diagnostics"] == []
    cert = client.post("/certify", json={"triangulation": tri_json}).json()
    assert len(cert["certificate"]["steps"]) == 3
    assert cert["triple"]["pi_h"] == list(tt.pi_h.partner)
    assert sorted(c for *_, c in (p for p in [])) == []  # placeholder-free check


def test_verify_rejects_tampered_input():
    tt = next(t for t in catalog(4) if t.loops == 3)
    tri3 = triple_to_triangulation(tt)
    data = tri3.to_json()
    data["e"] = data["e"][:-1]  # one edge short of spanning
    verdict = client.post("/verify", json={"triangulation": data})
    assert verdict.status_code == 200
    body = verdict.json()
    assert not body["ok"] and body["diagnostics"]


def test_build3d_rejects_degenerate_size():
    tt = catalog(2)[0]
    resp = client.post("/build3d", json={"triple": tt.to_json()})
    assert resp.status_code == 422


def test_catalog_endpoint():
    data = client.post("/catalog", json={"n": 4}).json()
    assert len(data["entries"]) == 20
    assert data["loop_counts"] == {"1": 8, "3": 12}


def test_sample_endpoint_small():
    req = {"x": 1.0, "n_min": 2, "n_max": 4, "steps": 2000, "seed": 1}
    data = client.post("/sample", json=req).json()
    assert data["histogram"]
    assert set(data["coverage"]) <= {"2", "4"} or set(data["coverage"]) <= {2, 4}
