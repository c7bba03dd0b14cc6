import pytest
from fastapi.testclient import TestClient

from frolicher.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_catalog_endpoint(client):
    resp = client.get("/catalog")
    assert resp.status_code == 200
    entries = {e["name"]: e for e in resp.json()}
    assert len(entries) >= 6
    assert entries["iwasawa"]["n"] == 3
    assert entries["kodaira_thurston"]["n"] == 2


def test_analyze_torus(client):
    resp = client.post("/analyze", json={"manifold": "torus2", "options": {"j_max": 8}})
    assert resp.status_code == 200
    data = resp.json()
    assert data["all_passed"]
    report = data["report"]
    assert report["betti"] == [1, 4, 6, 4, 1]
    assert report["pages"]["degeneration_page"] == 1
    branches = report["classification"]["branches"]
    assert all(b["decay_class"] == "inf" for b in branches)


def test_analyze_iwasawa(client):
    resp = client.post("/analyze", json={"manifold": "iwasawa", "options": {"j_max": 10, "seed": 3}})
    assert resp.status_code == 200
    data = resp.json()
    assert data["all_passed"]
    report = data["report"]
    assert report["pages"]["dims_degree"]["1"][1] == 5
    assert report["pages"]["dims_degree"]["2"][1] == 4
    assert report["hypothesis"]["passed"] is False
    assert report["skt"]["passed"] is False
    assert report["theorem"]["rows"]


def test_analyze_inline_schema_with_metric(client):
    body = {
        "manifold": {"name": "kt-inline", "n": 2, "dbar": [{"i": 2, "j": 1, "k": 1, "re": 1}]},
        "metric": [[[2, 0], [0, 0]], [[0, 0], [1, 0]]],
        "options": {"j_max": 8},
    }
    resp = client.post("/analyze", json=body)
    assert resp.status_code == 200
    data = resp.json()
    assert data["all_passed"]
    assert data["report"]["metric"]["matrix"][0][0] == [2.0, 0.0]


def test_analyze_schema_error_is_400(client):
    resp = client.post("/analyze", json={"manifold": {"name": "bad", "n": 2,
                                                      "dbar": [{"i": 5, "j": 1, "k": 1}]}})
    assert resp.status_code == 400
    assert "out of range" in resp.json()["detail"]
    resp = client.post("/analyze", json={"manifold": "noSuchThing"})
    assert resp.status_code == 400


def test_sweep_torus(client):
    resp = client.post("/sweep", json={"manifold": "torus1", "j_max": 8})
    assert resp.status_code == 200
    data = resp.json()
    assert data["all_passed"]
    lines = data["eigenvalues_csv"].strip().splitlines()
    assert lines[0] == "k,i,h,lambda"
    values = [float(line.split(",")[3]) for line in lines[1:]]
    assert max(abs(v) for v in values) <= 1e-12
    # 9 grid points per branch: degrees 0..2 have 1+2+1 branches
    assert len(lines) - 1 == 9 * 4


def test_sweep_iwasawa_grid_size(client):
    resp = client.post("/sweep", json={"manifold": "iwasawa", "j_max": 8})
    data = resp.json()
    lines = data["classification_csv"].strip().splitlines()
    assert lines[0] == "k,i,slope,class"
    assert len(lines) - 1 == 2 ** 6  # one row per branch
    eig_lines = data["eigenvalues_csv"].strip().splitlines()[1:]
    per_branch = {}
    for line in eig_lines:
        k, i, h, lam = line.split(",")
        per_branch.setdefault((k, i), []).append(h)
    assert all(len(hs) == 9 for hs in per_branch.values())
    verdict_lines = data["verdicts_csv"].strip().splitlines()
    assert verdict_lines[0] == "r,k,dimEr,count,pass"
    assert all(line.endswith("true") for line in verdict_lines[1:])
