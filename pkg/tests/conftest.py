from types import SimpleNamespace

import pytest
from fastapi.testclient import TestClient

from dicomvault.config import ServerConfig
from dicomvault.server import VaultServices, create_app

import acceptance_log


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def make_server(tmp_path):
    """Factory for isolated server instances backed by throwaway data dirs."""
    created = []

    def build(name: str = "srv", rbac_mode: bool = True, **config_kw) -> SimpleNamespace:
        config = ServerConfig(data_dir=tmp_path / name, rbac_mode=rbac_mode,
                              admin_password="adminpw", **config_kw)
        services = VaultServices(config)
        client = TestClient(create_app(services))
        handle = SimpleNamespace(services=services, client=client, config=config)
        created.append(handle)
        return handle

    yield build
    for handle in created:
        handle.services.close()


@pytest.fixture
def server(make_server):
    return make_server()


def login(client, username: str, password: str) -> str:
    response = client.post("/auth/login", json={"username": username, "password": password})
    assert response.status_code == 200, response.text
    return response.json()["token"]


def bearer(token: str) -> dict:
    return {"Authorization": f"Bearer {token}"}
