from src.conf import messages


def test_read_main(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["docs"] == "/docs"
    assert "performance" in response.headers


def test_healthchecker(client):
    response = client.get("/api/healthchecker")
    assert response.status_code == 200, response.text
    assert response.json()["message"] == "Welcome to the SPDE regime lab!"


def test_healthchecker_database_error(client, session, monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("connection refused")

    monkeypatch.setattr(session, "execute", broken)
    response = client.get("/api/healthchecker")
    assert response.status_code == 500, response.text
    assert response.json()["detail"] == messages.DATABASE_CONNECTION_ERROR
