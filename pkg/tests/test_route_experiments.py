from src.conf import messages
from src.database.models import Run


def test_simulate(client, session, simulation):
    response = client.post("/api/experiments/simulate", json={**simulation, "seed": 5})
    assert response.status_code == 201, response.text
    data = response.json()
    assert data["kind"] == "simulate"
    assert data["summary"]["seed"] == 5
    assert data["tables"]["statistics"]
    run = session.query(Run).filter_by(id=data["run_id"]).first()
    assert run.checksum == data["checksum"]
    assert run.config["ensemble"] == 3


def test_simulate_is_deterministic(client, simulation):
    first = client.post("/api/experiments/simulate", json={**simulation, "seed": 9}).json()
    second = client.post("/api/experiments/simulate", json={**simulation, "seed": 9}).json()
    assert first["checksum"] == second["checksum"]
    assert first["summary"]["checksum"] == second["summary"]["checksum"]
    assert first["run_id"] != second["run_id"]


def test_simulate_work_limit(client, simulation):
    response = client.post("/api/experiments/simulate", json={**simulation, "ensemble": 1_000_000})
    assert response.status_code == 413, response.text
    assert messages.WORK_LIMIT_EXCEEDED in response.json()["detail"]


def test_simulate_rejects_unknown_keys(client, simulation):
    response = client.post("/api/experiments/simulate", json={**simulation, "steps": 10})
    assert response.status_code == 422, response.text


def test_simulate_polynomial_degree_mismatch(client, simulation):
    body = {**simulation, "drift": {"kind": "reaction_diffusion1d", "f1": [0.0, 0.0, 0.0, -1.0], "p": 5}}
    response = client.post("/api/experiments/simulate", json=body)
    assert response.status_code == 422, response.text
    assert response.json()["detail"]["error"] == "ParameterError"


def test_couple(client, simulation):
    body = {"simulation": simulation, "x": {"coefficients": [1.0]}, "y": {"coefficients": [0.5]}}
    response = client.post("/api/experiments/couple", json=body)
    assert response.status_code == 201, response.text
    data = response.json()
    assert data["summary"]["distance"] > 0
    assert len(data["tables"]["coupling"]) > 0


def test_galerkin(client, simulation):
    response = client.post("/api/experiments/galerkin", json={"simulation": simulation, "levels": [2, 4]})
    assert response.status_code == 201, response.text
    levels = response.json()["tables"]["levels"]
    assert [row["n"] for row in levels] == [2, 4]
    assert levels[-1]["mean_error"] == 0


def test_galerkin_reference_above_modes(client, simulation):
    response = client.post("/api/experiments/galerkin", json={"simulation": simulation, "levels": [2, 8]})
    assert response.status_code == 422, response.text


def test_kolmogorov(client):
    body = {"operator": {"n_modes": 1}, "forcing": {"mode": "constant"}, "grid": {"nodes": 5},
            "expectation": {"method": "hermite", "order": 3}, "max_iter": 3}
    response = client.post("/api/experiments/kolmogorov", json=body)
    assert response.status_code == 201, response.text
    data = response.json()
    assert data["summary"]["iterate"]["converged"] is True
    assert len(data["tables"]["solution"]) == 5


def test_kolmogorov_work_limit(client):
    body = {"operator": {"n_modes": 4}, "grid": {"nodes": 41}, "expectation": {"method": "hermite", "order": 5}}
    response = client.post("/api/experiments/kolmogorov", json=body)
    assert response.status_code == 413, response.text


def test_nonuniqueness(client):
    response = client.post("/api/experiments/demo/nonuniqueness", json={"theta": 0.5, "points": 101})
    assert response.status_code == 201, response.text
    summary = response.json()["summary"]
    assert abs(summary["separation"] - 0.25) < 1e-12
    assert summary["zero_residual"] == 0


def test_nonuniqueness_theta_range(client):
    response = client.post("/api/experiments/demo/nonuniqueness", json={"theta": 1.5})
    assert response.status_code == 422, response.text
