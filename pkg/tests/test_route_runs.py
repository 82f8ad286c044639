from src.conf import messages


def test_runs_empty(client):
    response = client.get("/api/runs/")
    assert response.status_code == 200, response.text
    assert response.json() == []


def test_runs_listed_newest_first(client, burgers_tuple):
    client.post("/api/regime/check", json=burgers_tuple)
    client.post("/api/experiments/demo/nonuniqueness", json={"points": 11})
    response = client.get("/api/runs/")
    assert response.status_code == 200, response.text
    runs = response.json()
    assert [run["kind"] for run in runs] == ["demo", "regime_check"]
    assert runs[0]["verdict"] is None
    assert runs[1]["verdict"]["weak_DAalpha"] is True
    assert len(runs[1]["checksum"]) == 64


def test_runs_filter_and_page(client):
    response = client.get("/api/runs/", params={"kind": "regime_check"})
    assert [run["kind"] for run in response.json()] == ["regime_check"]
    response = client.get("/api/runs/", params={"limit": 1, "offset": 1})
    assert [run["kind"] for run in response.json()] == ["regime_check"]


def test_runs_bad_limit(client):
    response = client.get("/api/runs/", params={"limit": 0})
    assert response.status_code == 422, response.text


def test_get_run(client):
    run_id = client.get("/api/runs/").json()[0]["id"]
    response = client.get(f"/api/runs/{run_id}")
    assert response.status_code == 200, response.text
    data = response.json()
    assert data["kind"] == "demo"
    assert data["config"]["points"] == 11


def test_get_run_not_found(client):
    response = client.get("/api/runs/9999")
    assert response.status_code == 404, response.text
    assert response.json()["detail"] == messages.RUN_NOT_FOUND


def test_remove_run(client):
    run_id = client.get("/api/runs/").json()[0]["id"]
    response = client.delete(f"/api/runs/{run_id}")
    assert response.status_code == 200, response.text
    assert client.get(f"/api/runs/{run_id}").status_code == 404
    assert client.delete(f"/api/runs/{run_id}").status_code == 404
